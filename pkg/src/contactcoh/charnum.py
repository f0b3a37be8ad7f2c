"""Characteristic numbers N_d(a, b, c) of rational plane curves.

N_d(a, b, c) counts degree-d rational curves through ``a`` points, tangent to
``b`` lines and tangent to ``c`` lines at a given point of each, with
``a + b + 2c = 3d - 1``.  Values with ``a >= 3`` follow from the recursion in
:func:`char_number`; values with ``a <= 2`` are external input held in a
:class:`BaseStore`.
"""

from __future__ import annotations

import json
import threading
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Tuple, Union

from .algebra import binomial, format_rational, multinomial, parse_rational
from .chow import ClassI, InvalidDegree, cup_i, curve_class, integrate_i

SCHEMA = "charnum-base/1"


class CharKey(NamedTuple):
    d: int
    a: int
    b: int
    c: int

    def __str__(self) -> str:
        return f"N_{self.d}({self.a},{self.b},{self.c})"

    def is_valid(self) -> bool:
        d, a, b, c = self
        return d >= 1 and min(a, b, c) >= 0 and a + b + 2 * c == 3 * d - 1

    def to_json(self) -> dict:
        return {"d": self.d, "a": self.a, "b": self.b, "c": self.c}


class InvalidKey(ValueError):
    pass


class MissingBaseData(LookupError):
    """Raised when a value needs base entries (a <= 2) the store lacks."""

    def __init__(self, keys: Iterable[CharKey]):
        self.keys = sorted(set(CharKey(*k) for k in keys))
        super().__init__("missing base data: " + ", ".join(map(str, self.keys)))


class ParseError(ValueError):
    pass


class SchemaViolation(ValueError):
    pass


def check_key(key) -> CharKey:
    key = CharKey(*key)
    if not key.is_valid():
        raise InvalidKey(f"{tuple(key)} violates a + b + 2c = 3d - 1 (or has a bad index)")
    return key


def keys_of_degree(d: int) -> Iterator[CharKey]:
    """All keys of degree d, ordered by c, then by decreasing a."""
    n = 3 * d - 1
    for c in range(n // 2 + 1):
        for a in range(n - 2 * c, -1, -1):
            yield CharKey(d, a, n - 2 * c - a, c)


# -- base data ---------------------------------------------------------------

class BaseStore:
    """Externally supplied characteristic numbers with ``a <= 2``.

    Treat instances as immutable; derived values are memoised per store.
    """

    def __init__(self, entries: Mapping = (), sources: Optional[Mapping] = None):
        self._entries: Dict[CharKey, Fraction] = {}
        self._sources: Dict[CharKey, str] = {}
        for key, value in dict(entries).items():
            key = CharKey(*key)
            _check_storable(key)
            self._entries[key] = Fraction(value)
            self._sources[key] = (sources or {}).get(key, "")
        self._memo: Dict[CharKey, Fraction] = {}
        self._needs: Dict[CharKey, frozenset] = {}
        self._lock = threading.Lock()

    def __contains__(self, key) -> bool:
        return CharKey(*key) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, key) -> Optional[Fraction]:
        return self._entries.get(CharKey(*key))

    def source(self, key) -> str:
        return self._sources.get(CharKey(*key), "")

    def keys(self) -> List[CharKey]:
        return sorted(self._entries)

    def merged(self, entries: Mapping, sources: Optional[Mapping] = None) -> "BaseStore":
        values = dict(self._entries)
        srcs = dict(self._sources)
        for key, value in dict(entries).items():
            key = CharKey(*key)
            values[key] = Fraction(value)
            srcs[key] = (sources or {}).get(key, "")
        return BaseStore(values, srcs)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "entries": [
                {**k.to_json(), "value": format_rational(v), "source": self._sources[k]}
                for k, v in sorted(self._entries.items())
            ],
        }


def _check_storable(key: CharKey) -> None:
    if not key.is_valid():
        raise SchemaViolation(f"{tuple(key)} violates a + b + 2c = 3d - 1")
    if key.a > 2:
        raise SchemaViolation(f"{key} has a > 2; such values come from the recursion")


_LINE_NOTE = "lines: the lift of a line has class (1,0), so only point and flag incidences count"
_CONIC_NOTE = "conics: self-duality N_2(a,b,0) = N_2(b,a,0) applied to the recursion value"


def default_base() -> BaseStore:
    entries = {
        CharKey(1, 2, 0, 0): 1,
        CharKey(1, 1, 1, 0): 0,
        CharKey(1, 0, 2, 0): 0,
        CharKey(1, 0, 0, 1): 1,
        CharKey(2, 2, 3, 0): 4,
        CharKey(2, 1, 4, 0): 2,
        CharKey(2, 0, 5, 0): 1,
    }
    sources = {k: (_LINE_NOTE if k.d == 1 else _CONIC_NOTE) for k in entries}
    return BaseStore(entries, sources)


def parse_base(text: str, defaults: Optional[BaseStore] = None) -> BaseStore:
    """Parse a base-data document and merge it over ``defaults``."""
    defaults = default_base() if defaults is None else defaults
    if not text.strip():
        return defaults
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    if doc.get("schema") != SCHEMA:
        raise ParseError(f"schema: expected {SCHEMA!r}, got {doc.get('schema')!r}")
    rows = doc.get("entries", [])
    if not isinstance(rows, list):
        raise ParseError("entries: expected a list")
    values: Dict[CharKey, Fraction] = {}
    sources: Dict[CharKey, str] = {}
    for n, row in enumerate(rows):
        where = f"entries[{n}]"
        if not isinstance(row, dict):
            raise ParseError(f"{where}: expected an object")
        ints = []
        for field in "dabc":
            v = row.get(field)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ParseError(f"{where}.{field}: expected an integer, got {v!r}")
            ints.append(v)
        raw = row.get("value")
        if not isinstance(raw, str):
            raise ParseError(f"{where}.value: expected a rational string, got {raw!r}")
        try:
            value = parse_rational(raw)
        except ValueError as exc:
            raise ParseError(f"{where}.value: {exc}") from None
        key = CharKey(*ints)
        try:
            _check_storable(key)
        except SchemaViolation as exc:
            raise SchemaViolation(f"{where}: {exc}") from None
        values[key] = value
        sources[key] = str(row.get("source", ""))
    return defaults.merged(values, sources)


def load_base(path: Union[str, Path], defaults: Optional[BaseStore] = None) -> BaseStore:
    return parse_base(Path(path).read_text(), defaults)


def save_base(store: BaseStore, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(store.to_json(), indent=2) + "\n")


# -- the recursion -------------------------------------------------------------

Term = Tuple[Fraction, CharKey, CharKey]


def recursion_terms(key: CharKey, reverse: bool = False) -> List[Term]:
    """Nonzero terms ``(coefficient, key1, key2)`` of the recursion for ``key``.

    Only meaningful for ``a >= 3``.  Sub-keys violating their own dimension
    constraint are dropped; out-of-range binomials vanish on their own.
    """
    d, a, b, c = key
    m = a - 3
    terms: List[Term] = []

    def add(coef, k1, k2):
        if coef and k1.is_valid() and k2.is_valid():
            terms.append((Fraction(coef), k1, k2))

    splits = range(d - 1, 0, -1) if reverse else range(1, d)
    for d1 in splits:
        d2 = d - d1
        for c1 in range(c + 1):
            c2 = c - c1
            for b1 in range(b + 1):
                b2 = b - b1
                for a1 in range(a):
                    coef = (d1**2 * d2**2 * binomial(m, a1 - 1)
                            - d1**3 * d2 * binomial(m, a1)) * binomial(b, b1) * binomial(c, c1)
                    add(coef, CharKey(d1, a1, b1, c1), CharKey(d2, a - 1 - a1, b2, c2))
            for b1 in range(b):
                b2 = b - 1 - b1
                for a1 in range(a + 1):
                    coef = 2 * (d1**2 * d2 * binomial(m, a1 - 1) - d1**3 * binomial(m, a1)) \
                        * multinomial(b, (b1, b2, 1)) * binomial(c, c1)
                    add(coef, CharKey(d1, a1, b1, c1), CharKey(d2, a - a1, b2, c2))
            for b1 in range(b - 1):
                b2 = b - 2 - b1
                for a1 in range(a + 2):
                    coef = 4 * (d1 * d2 * binomial(m, a1 - 2) - d1**2 * binomial(m, a1 - 1)) \
                        * multinomial(b, (b1, b2, 2)) * binomial(c, c1)
                    add(coef, CharKey(d1, a1, b1, c1), CharKey(d2, a + 1 - a1, b2, c2))
        # fourth sum: one flag condition is split off
        for c1 in range(c):
            c2 = c - 1 - c1
            for b1 in range(b + 1):
                b2 = b - b1
                for a1 in range(a + 2):
                    coef = 2 * (d1 * d2 * binomial(m, a1 - 2) - d1**2 * binomial(m, a1 - 1)) \
                        * binomial(b, b1) * multinomial(c, (c1, c2, 1))
                    add(coef, CharKey(d1, a1, b1, c1), CharKey(d2, a + 1 - a1, b2, c2))
    if reverse:
        terms.reverse()
    return terms


def required_base_keys(key, base: BaseStore) -> frozenset:
    """Base keys (a <= 2) that the recursion for ``key`` touches."""
    key = check_key(key)
    if key.a <= 2:
        return frozenset([key])
    cached = base._needs.get(key)
    if cached is not None:
        return cached
    need = set()
    for _, k1, k2 in recursion_terms(key):
        need |= required_base_keys(k1, base)
        need |= required_base_keys(k2, base)
    need = frozenset(need)
    with base._lock:
        base._needs[key] = need
    return need


def char_number(key, base: Optional[BaseStore] = None, *, memo: bool = True,
                reverse: bool = False) -> Fraction:
    """N_d(a, b, c): a base lookup for ``a <= 2``, the recursion otherwise."""
    base = default_base() if base is None else base
    key = check_key(key)
    missing = [k for k in required_base_keys(key, base) if k not in base]
    if missing:
        raise MissingBaseData(missing)
    if memo and not reverse:
        return _memo_value(key, base)
    return _evaluate(key, base, reverse)


def _evaluate(key: CharKey, base: BaseStore, reverse: bool) -> Fraction:
    if key.a <= 2:
        return base.get(key)
    total = Fraction(0)
    for coef, k1, k2 in recursion_terms(key, reverse=reverse):
        total += coef * _evaluate(k1, base, reverse) * _evaluate(k2, base, reverse)
    return total


def _memo_value(key: CharKey, base: BaseStore) -> Fraction:
    if key.a <= 2:
        return base.get(key)
    value = base._memo.get(key)
    if value is None:
        value = Fraction(0)
        for coef, k1, k2 in recursion_terms(key):
            value += coef * _memo_value(k1, base) * _memo_value(k2, base)
        with base._lock:
            base._memo.setdefault(key, value)
    return value


def try_char_number(key, base: BaseStore) -> Tuple[Optional[Fraction], List[CharKey]]:
    """``(value, [])`` or ``(None, missing_keys)``."""
    try:
        return char_number(key, base), []
    except MissingBaseData as exc:
        return None, exc.keys


# -- Kontsevich's numbers, computed independently ---------------------------------

@lru_cache(maxsize=None)
def kontsevich_direct(d: int) -> Fraction:
    """Number of degree-d rational curves through 3d - 1 general points."""
    if d < 1:
        raise InvalidDegree(f"degree must be positive, got {d}")
    if d == 1:
        return Fraction(1)
    total = Fraction(0)
    for d1 in range(1, d):
        d2 = d - d1
        weight = (d1 * d1 * d2 * d2 * binomial(3 * d - 4, 3 * d1 - 2)
                  - d1**3 * d2 * binomial(3 * d - 4, 3 * d1 - 1))
        total += kontsevich_direct(d1) * kontsevich_direct(d2) * weight
    return total


# -- first-order Gromov-Witten invariants ---------------------------------------

def gw_first_order(d: int, insertions: Iterable[int], base: Optional[BaseStore] = None) -> Fraction:
    """N_d(T_{i1} ... T_{in}) for basis insertions ``i`` in 0..5."""
    if d < 1:
        raise InvalidDegree(f"degree must be positive, got {d}")
    counts = Counter(insertions)
    if any(i not in range(6) for i in counts):
        raise ValueError(f"insertions must be basis indices 0..5: {sorted(counts)}")
    if counts[0]:
        return Fraction(0)
    curve = curve_class(d)
    factor = Fraction(1)
    for divisor in (1, 3):
        pairing = integrate_i(cup_i(ClassI.basis(divisor), curve))
        factor *= pairing ** counts[divisor]
    key = CharKey(d, counts[2], counts[4], counts[5])
    if not key.is_valid() or not factor:
        return Fraction(0)
    return factor * char_number(key, base)
