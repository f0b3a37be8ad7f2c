"""Verification reports and the probe that decides which coefficients are checkable."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, List, Mapping, Sequence, Set, Tuple

from .algebra import TruncatedSeries, format_monomial, format_rational, monomial_sort_key
from .charnum import CharKey

Observations = Dict[Hashable, Fraction]


@dataclass
class Report:
    check: str
    order: int
    compared_order: int
    checked: int = 0
    skipped: List[dict] = field(default_factory=list)
    failures: List[dict] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "fail" if self.failures else "pass"

    @property
    def passed(self) -> bool:
        return not self.failures

    def exit_code(self) -> int:
        if self.failures:
            return 1
        return 0 if self.checked else 2

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "order": self.order,
            "compared_order": self.compared_order,
            "status": self.status,
            "checked": self.checked,
            "skipped": self.skipped,
            "failures": self.failures,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def generic_value(key: Hashable, salt: int) -> Fraction:
    """A reproducible 'random' rational standing in for an unknown value."""
    digest = hashlib.sha256(f"{key!r}|{salt}".encode()).digest()
    num = int.from_bytes(digest[:8], "big") + 1
    den = int.from_bytes(digest[8:12], "big") + 1
    return Fraction(num, den)


def probe(evaluate: Callable[[Mapping], Observations],
          known: Mapping[CharKey, Fraction],
          unknown: Iterable[CharKey]) -> Tuple[Observations, Dict[Hashable, Set[CharKey]]]:
    """Evaluate with unknowns set to generic values and find what depends on them.

    Returns the observations of the generic run together with, for every
    observation that moves when a single unknown is re-drawn, the set of
    unknowns it depends on.  Observations absent from the result map are
    independent of all unknowns (up to a negligible chance of coincidence).
    """
    unknown = sorted(set(unknown))
    generic = {u: generic_value(u, 0) for u in unknown}
    base_obs = evaluate({**known, **generic})
    deps: Dict[Hashable, Set[CharKey]] = {}
    for u in unknown:
        moved = dict(generic)
        moved[u] = generic_value(u, 1)
        obs = evaluate({**known, **moved})
        for k in base_obs.keys() | obs.keys():
            if base_obs.get(k, 0) != obs.get(k, 0):
                deps.setdefault(k, set()).add(u)
    return base_obs, deps


def key_list(keys: Iterable[CharKey]) -> List[List[int]]:
    return [list(k) for k in sorted(set(keys))]


def observe(obs: Observations, where: str, lhs: TruncatedSeries, rhs: TruncatedSeries,
            upto: int) -> None:
    """Record the coefficients of both sides through total degree ``upto``."""
    for side, series in (("lhs", lhs), ("rhs", rhs)):
        for m, c in series.items():
            if sum(m) <= upto:
                obs[(where, m, side)] = c


def run_check(report: Report,
              evaluate: Callable[[Mapping], Observations],
              known: Mapping[CharKey, Fraction],
              unknown: Mapping[CharKey, Sequence[CharKey]]) -> Report:
    """Evaluate, probe for dependence on unknown keys, and compare the two sides.

    ``evaluate`` returns observations keyed ``(where, monomial, side)``.
    ``unknown`` maps each undeterminable key to the base entries blocking it.
    A coefficient is compared only if neither side depends on an unknown key;
    otherwise it is listed as skipped together with the blocking entries.
    """
    obs, deps = probe(evaluate, known, unknown)
    pairs: Dict[tuple, List[Fraction]] = {}
    pair_deps: Dict[tuple, Set[CharKey]] = {}
    for (where, m, side), v in obs.items():
        pairs.setdefault((where, m), [Fraction(0), Fraction(0)])[side == "rhs"] = v
    for (where, m, side), us in deps.items():
        pairs.setdefault((where, m), [Fraction(0), Fraction(0)])
        pair_deps.setdefault((where, m), set()).update(us)
    for where, m in sorted(pairs, key=lambda k: (k[0], monomial_sort_key(k[1]))):
        lhs, rhs = pairs[(where, m)]
        mono = format_monomial(m)
        if (where, m) in pair_deps:
            missing = set()
            for u in pair_deps[(where, m)]:
                missing.update(unknown.get(u) or (u,))
            report.skipped.append({"monomial": mono, "where": where, "missing": key_list(missing)})
            continue
        report.checked += 1
        if lhs != rhs:
            report.failures.append({
                "monomial": mono, "where": where,
                "lhs": format_rational(lhs), "rhs": format_rational(rhs),
            })
    return report
