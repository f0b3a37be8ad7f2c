"""Potentials N, R, K and the contact product on A*(P^2)[[y0..y5]].

The quantum potential

    N = sum_d sum_{a+b+2c=3d-1} N_d(a,b,c) y2^a y4^b y5^c / (a! b! c!) exp(d y1 + (2d-2) y3)

together with the closed-form double-cover potential R determine the mixed
potential K = 2 sum_s dN/dy_s dR/dz_{5-s}.  Third derivatives of K are the
structure constants of the contact product

    T_i . T_j = K_{ij5} T0 + K_{ij4} T1 + K_{ij3} T2,      0 <= i, j <= 2.

Series are truncated by total degree.  Three derivatives cost three orders,
so every comparison below runs through order ``D - 3`` for a build at ``D``.

Base data for a <= 2 is external and usually incomplete.  Verifiers work on
whatever is determinable: unknown characteristic numbers are replaced by
generic values and any coefficient that moves with them is reported as
skipped, with the base entries that block it.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .algebra import (
    TruncatedSeries,
    exp_linear,
    monomial,
)
from .charnum import (
    BaseStore,
    CharKey,
    InvalidKey,
    MissingBaseData,
    check_key,
    default_base,
    gw_first_order,
    keys_of_degree,
    try_char_number,
)
from .chow import ClassI, ClassP2
from .report import Report, observe, probe, run_check

Y = [f"y{i}" for i in range(6)]
Z = [f"z{i}" for i in range(6)]


def min_degree(d: int) -> int:
    """Lowest total degree of a monomial in the degree-d block of N."""
    return -(-(3 * d - 1) // 2)


def keys_through(order: int) -> List[CharKey]:
    """Keys whose block of N has a monomial of total degree <= order."""
    out = []
    d = 1
    while min_degree(d) <= order:
        out.extend(k for k in keys_of_degree(d) if k.a + k.b + k.c <= order)
        d += 1
    return out


def value_table(order: int, base: BaseStore
                ) -> Tuple[Dict[CharKey, Fraction], Dict[CharKey, List[CharKey]]]:
    """Split the keys needed through ``order`` into known values and unknowns.

    Unknown keys map to the base entries whose absence blocks them.
    """
    known: Dict[CharKey, Fraction] = {}
    unknown: Dict[CharKey, List[CharKey]] = {}
    for key in keys_through(order):
        value, missing = try_char_number(key, base)
        if value is None:
            unknown[key] = missing
        else:
            known[key] = value
    return known, unknown


# -- potentials --------------------------------------------------------------------

def potential_from_values(values: Mapping[CharKey, Fraction], order: int) -> TruncatedSeries:
    """Assemble N from a table of characteristic numbers; absent keys count as 0."""
    blocks: Dict[int, Dict] = {}
    for key, value in values.items():
        d, a, b, c = key
        if not value or a + b + c > order:
            continue
        m = monomial({"y2": a, "y4": b, "y5": c})
        coef = Fraction(value, math.factorial(a) * math.factorial(b) * math.factorial(c))
        blocks.setdefault(d, {})[m] = coef
    total = TruncatedSeries.zero(order)
    for d in sorted(blocks):
        poly = TruncatedSeries(blocks[d], order)
        total = total + poly * exp_linear({"y1": d, "y3": 2 * d - 2}, order)
    return total


@dataclass(frozen=True)
class PotentialN:
    series: TruncatedSeries
    order: int
    d_max: int

    def derivative(self, indices: str) -> TruncatedSeries:
        """``derivative("112")`` is d^3 N / dy1 dy1 dy2."""
        return derivative(self.series, indices)


def derivative(series: TruncatedSeries, indices: str) -> TruncatedSeries:
    for i in indices:
        series = series.partial(f"y{i}")
    return series


def build_N(order: int, base: Optional[BaseStore] = None) -> PotentialN:
    base = default_base() if base is None else base
    known, unknown = value_table(order, base)
    if unknown:
        raise MissingBaseData(k for keys in unknown.values() for k in keys)
    d_max = max((k.d for k in known), default=0)
    return PotentialN(potential_from_values(known, order), order, d_max)


def build_R(order: int) -> TruncatedSeries:
    """The double-cover potential, a closed form in y3, y4, y5, z3, z4, z5."""
    bracket = TruncatedSeries.from_terms({
        "z3^2*y4^2": Fraction(1, 2),
        "z3^2*y5": Fraction(1, 2),
        "z3*z4*y4": 1,
        "z3*z5": Fraction(1, 2),
        "z4^2": Fraction(1, 4),
    }, order)
    return bracket * exp_linear({"y3": 2}, order)


class PotentialK:
    """The mixed potential K, linear in the z variables.

    Built as ``sum_k z_k * 2 sum_s N_s R_{z_{5-s} z_k}``.  The y-coefficient of
    each z_k is exact through the order of N_s, i.e. ``D - 1``, so K itself
    is exact through total degree ``D``.
    """

    def __init__(self, N: TruncatedSeries):
        order = N.order
        R = build_R(order + 2)
        series = TruncatedSeries.zero(order)
        for k in range(6):
            coeff = TruncatedSeries.zero(order - 1)
            for s in range(6):
                R2 = R.partial(Z[5 - s]).partial(Z[k])
                if not R2:
                    continue
                coeff = coeff + N.partial(Y[s]) * R2
            if coeff:
                series = series + coeff.scale(2).shift(Z[k])
        self.series = series
        self.order = order
        self._kp: Dict[Tuple[int, int, int], TruncatedSeries] = {}

    def kp(self, i: int, j: int, k: int) -> TruncatedSeries:
        """d^3 K / dy_i dy_j dz_k, exact through ``order - 3``."""
        i, j = min(i, j), max(i, j)
        key = (i, j, k)
        if key not in self._kp:
            self._kp[key] = self.series.partial(Z[k]).partial(Y[i]).partial(Y[j])
        return self._kp[key]

    def z_monomials_outside(self, allowed: Iterable[int]) -> List:
        """Monomials of K that contain some z_k with k not in ``allowed``."""
        allowed = set(allowed)
        return [m for m, _ in self.series.items()
                if any(m[6 + k] for k in range(6) if k not in allowed)]


def build_K(order: int, base: Optional[BaseStore] = None) -> PotentialK:
    return PotentialK(build_N(order, base).series)


# -- the contact product ----------------------------------------------------------

@dataclass(frozen=True)
class ProductElement:
    """c0*1 + c1*h + c2*h^2 with power-series coordinates."""
    coords: Tuple[TruncatedSeries, TruncatedSeries, TruncatedSeries]

    @classmethod
    def basis(cls, i: int, order: int) -> "ProductElement":
        return cls(tuple(TruncatedSeries.constant(int(i == s), order) for s in range(3)))

    @classmethod
    def from_class(cls, x: ClassP2, order: int) -> "ProductElement":
        return cls(tuple(TruncatedSeries.constant(x[s], order) for s in range(3)))

    @property
    def order(self) -> int:
        return min(c.order for c in self.coords)

    def __getitem__(self, s: int) -> TruncatedSeries:
        return self.coords[s]

    def __add__(self, other: "ProductElement") -> "ProductElement":
        return ProductElement(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "ProductElement") -> "ProductElement":
        return ProductElement(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def times(self, f) -> "ProductElement":
        """Multiply every coordinate by a scalar or series."""
        return ProductElement(tuple(c * f for c in self.coords))

    def truncate(self, order: int) -> "ProductElement":
        return ProductElement(tuple(c.truncate(order) for c in self.coords))


def structure_constants(K: PotentialK, i: int, j: int) -> ProductElement:
    """T_i . T_j as an element of A*(P^2)[[y]]."""
    return ProductElement((K.kp(i, j, 5), K.kp(i, j, 4), K.kp(i, j, 3)))


def bullet(x: ProductElement, y: ProductElement, K: PotentialK) -> ProductElement:
    order = min(x.order, y.order, K.order - 3)
    out = [TruncatedSeries.zero(order) for _ in range(3)]
    for i in range(3):
        if not x[i]:
            continue
        for j in range(3):
            if not y[j]:
                continue
            w = x[i] * y[j]
            tij = structure_constants(K, i, j)
            for s in range(3):
                if tij[s]:
                    out[s] = out[s] + w * tij[s]
    return ProductElement(tuple(out))


def cup_series(x: ProductElement, y: ProductElement) -> ProductElement:
    order = min(x.order, y.order)
    out = [TruncatedSeries.zero(order) for _ in range(3)]
    for i in range(3):
        for j in range(3 - i):
            out[i + j] = out[i + j] + x[i] * y[j]
    return ProductElement(tuple(out))


def contact_product(x: ProductElement, y: ProductElement, K: PotentialK) -> ProductElement:
    return cup_series(x, y) + bullet(x, y, K)


# -- the differential equation ----------------------------------------------------------

def pde_sides(N: TruncatedSeries) -> Tuple[TruncatedSeries, TruncatedSeries]:
    """Left and right side of the third-order equation satisfied by N."""
    n111, n112, n122, n222 = (derivative(N, s) for s in ("111", "112", "122", "222"))
    order = n222.order
    y4 = TruncatedSeries.variable("y4", order)
    w = TruncatedSeries.from_terms({"y4^2": 2, "y5": 2}, order)
    rhs = (n112 * n112 - n111 * n122
           + y4.scale(2) * (n112 * n122 - n111 * n222)
           + w * (n122 * n122 - n112 * n222))
    return n222, exp_linear({"y3": 2}, order) * rhs


def dfi_sides(N: TruncatedSeries) -> Tuple[TruncatedSeries, TruncatedSeries]:
    """The equation on the slice y3 = y5 = 0 (no flag conditions)."""
    N = N.restrict("y3", "y5")
    n111, n112, n122, n222 = (derivative(N, s) for s in ("111", "112", "122", "222"))
    order = n222.order
    y4 = TruncatedSeries.variable("y4", order)
    rhs = (n112 * n112 - n111 * n122
           + y4.scale(2) * (n112 * n122 - n111 * n222)
           + (y4 * y4).scale(2) * (n122 * n122 - n112 * n222))
    return n222, rhs


def km_sides(N: TruncatedSeries) -> Tuple[TruncatedSeries, TruncatedSeries]:
    """The equation on y3 = y4 = y5 = 0: Kontsevich's potential in y1, y2."""
    N = N.restrict("y3", "y4", "y5")
    n111, n112, n122, n222 = (derivative(N, s) for s in ("111", "112", "122", "222"))
    return n222, n112 * n112 - n111 * n122


_PDE_FORMS = {None: ("pde", pde_sides), "dfi": ("pde-dfi", dfi_sides), "km": ("pde-km", km_sides)}


def verify_pde(order: int, base: Optional[BaseStore] = None, determinable_only: bool = True,
               specialize: Optional[str] = None) -> Report:
    base = default_base() if base is None else base
    name, sides = _PDE_FORMS[specialize]
    upto = order - 3
    report = Report(name, order, upto)
    if not determinable_only:
        build_N(order, base)  # raises MissingBaseData when anything is absent
    known, unknown = value_table(order, base)

    def evaluate(values):
        lhs, rhs = sides(potential_from_values(values, order))
        obs: dict = {}
        observe(obs, name, lhs, rhs, upto)
        return obs

    return run_check(report, evaluate, known, unknown)


# -- associativity of the contact product -------------------------------------------

def t0_identity_sides(K: PotentialK) -> Tuple[TruncatedSeries, TruncatedSeries]:
    """T0-coefficient of (T1*T1)*T2 = T1*(T1*T2), written in structure constants."""
    kp = K.kp
    lhs = kp(1, 1, 4) * kp(1, 2, 5) + kp(2, 2, 5) + kp(1, 1, 3) * kp(2, 2, 5)
    rhs = kp(1, 1, 5) * kp(1, 2, 4) + kp(1, 2, 5) * kp(1, 2, 3)
    return lhs, rhs


def associativity_residuals(K: PotentialK, triples=None):
    """Yield ``(label, lhs, rhs)`` for each basis triple and coordinate."""
    upto = K.order - 3
    T = [ProductElement.basis(i, upto) for i in range(3)]
    triples = triples or [(i, j, k) for i in range(3) for j in range(3) for k in range(3)]
    for i, j, k in triples:
        lhs = contact_product(contact_product(T[i], T[j], K), T[k], K)
        rhs = contact_product(T[i], contact_product(T[j], T[k], K), K)
        for s in range(3):
            yield f"(T{i}*T{j})*T{k} - T{i}*(T{j}*T{k}) [T{s}]", lhs[s], rhs[s]


def verify_contact_associativity(order: int, base: Optional[BaseStore] = None,
                                 values: Optional[Mapping[CharKey, Fraction]] = None) -> Report:
    """Associativity on all basis triples plus the T0-coefficient identity.

    ``values`` overrides entries of the value table (for mutation tests).
    """
    base = default_base() if base is None else base
    upto = order - 3
    report = Report("assoc", order, upto)
    known, unknown = value_table(order, base)
    if values:
        known.update(values)
        for k in values:
            unknown.pop(k, None)

    def evaluate(vals):
        K = PotentialK(potential_from_values(vals, order))
        obs: dict = {}
        for label, lhs, rhs in associativity_residuals(K):
            observe(obs, label, lhs, rhs, upto)
        lhs, rhs = t0_identity_sides(K)
        observe(obs, "T0-coefficient identity", lhs, rhs, upto)
        return obs

    return run_check(report, evaluate, known, unknown)


# -- presentation of the contact ring ------------------------------------------------

def presentation_from_N(N: TruncatedSeries) -> Tuple[TruncatedSeries, TruncatedSeries, TruncatedSeries]:
    n111, n112, n122 = (derivative(N, s) for s in ("111", "112", "122"))
    order = n111.order
    e2 = exp_linear({"y3": 2}, order)
    e4 = exp_linear({"y3": 4}, order)
    y4 = TruncatedSeries.variable("y4", order)
    w = TruncatedSeries.from_terms({"y4^2": 2, "y5": 2}, order)
    disc = e4 * (n111 * n122 - n112 * n112)
    xi2 = e2 * (n111 + y4.scale(4) * n112 + w * n122)
    xi1 = e2 * (n112.scale(2) + y4.scale(2) * n122) + disc * w
    xi0 = e2 * n122 + disc * y4.scale(2)
    return xi0, xi1, xi2


@dataclass
class Presentation:
    """Coefficients of h*h*h in the basis 1, h, h*h.

    ``undetermined`` maps ``(index, monomial)`` to the base entries blocking
    that coefficient; blocked coefficients are left out of ``xi``.
    """
    xi: Tuple[TruncatedSeries, TruncatedSeries, TruncatedSeries]
    order: int
    undetermined: Dict[tuple, List[CharKey]] = field(default_factory=dict)

    def missing_keys(self) -> List[CharKey]:
        return sorted({k for keys in self.undetermined.values() for k in keys})


def ring_presentation(order: int, base: Optional[BaseStore] = None,
                      determinable_only: bool = False, slice_quantum: bool = False) -> Presentation:
    """xi_0, xi_1, xi_2 from a build at truncation ``order`` (exact to ``order - 3``).

    With ``slice_quantum`` the variables y3, y4, y5 are set to zero.
    """
    base = default_base() if base is None else base
    upto = order - 3
    if not determinable_only:
        return Presentation(_sliced(presentation_from_N(build_N(order, base).series), slice_quantum),
                            upto)
    known, unknown = value_table(order, base)

    def evaluate(values):
        xis = _sliced(presentation_from_N(potential_from_values(values, order)), slice_quantum)
        obs = {}
        for i, xi in enumerate(xis):
            for m, c in xi.items():
                obs[(i, m)] = c
        return obs

    obs, deps = probe(evaluate, known, unknown)
    xi_terms: List[Dict] = [{}, {}, {}]
    undetermined = {}
    for (i, m), c in obs.items():
        if (i, m) not in deps:
            xi_terms[i][m] = c
    for (i, m), us in deps.items():
        undetermined[(i, m)] = sorted({k for u in us for k in unknown[u]})
    xi = tuple(TruncatedSeries(t, upto) for t in xi_terms)
    return Presentation(xi, upto, undetermined)


def _sliced(xis, slice_quantum: bool):
    if not slice_quantum:
        return xis
    return tuple(x.restrict("y3", "y4", "y5") for x in xis)


def presentation_residual(K: PotentialK, xi) -> Tuple[ProductElement, ProductElement]:
    """h*h*h and xi2*(h*h) + xi1*h + xi0*1 under the contact product."""
    upto = K.order - 3
    one, h = ProductElement.basis(0, upto), ProductElement.basis(1, upto)
    hh = contact_product(h, h, K)
    hhh = contact_product(hh, h, K)
    xi0, xi1, xi2 = xi
    return hhh, hh.times(xi2) + h.times(xi1) + one.times(xi0)


def verify_presentation(order: int, base: Optional[BaseStore] = None,
                        xi_override=None) -> Report:
    """Check the cubic relation for h.  ``xi_override(xi) -> xi`` perturbs the coefficients."""
    base = default_base() if base is None else base
    upto = order - 3
    report = Report("presentation", order, upto)
    known, unknown = value_table(order, base)

    def evaluate(values):
        N = potential_from_values(values, order)
        K = PotentialK(N)
        xi = presentation_from_N(N)
        if xi_override is not None:
            xi = xi_override(xi)
        lhs, rhs = presentation_residual(K, xi)
        obs = {}
        for s in range(3):
            observe(obs, f"h*h*h - xi2*h*h - xi1*h - xi0 [T{s}]", lhs[s], rhs[s], upto)
        return obs

    return run_check(report, evaluate, known, unknown)


# -- the differential equation as an independent route to N_d(a,b,c) ------------------------

_PDE_MEMO: "weakref.WeakKeyDictionary[BaseStore, Dict]" = weakref.WeakKeyDictionary()


def pde_extract_charnum(key, base: Optional[BaseStore] = None) -> Fraction:
    """N_d(a,b,c) for a >= 3, read off one coefficient of the differential equation.

    Works on the slice y1 = y3 = 0, where N becomes a sum over degrees of
    polynomials in y2, y4, y5 and each y1-derivative multiplies the degree-d
    block by d.  The coefficient of y2^(a-3) y4^b y5^c on the left is
    N_d(a,b,c) / ((a-3)! b! c!); the right side involves only lower degrees,
    which are obtained the same way.
    """
    base = default_base() if base is None else base
    key = check_key(key)
    if key.a < 3:
        raise InvalidKey(f"{key}: the equation only determines a >= 3")
    value, missing = _pde_value(key, base)
    if value is None:
        raise MissingBaseData(missing)
    return value


def _pde_value(key: CharKey, base: BaseStore) -> Tuple[Optional[Fraction], List[CharKey]]:
    memo = _PDE_MEMO.setdefault(base, {})
    if key in memo:
        return memo[key]
    d, a, b, c = key
    known: Dict[CharKey, Fraction] = {}
    unknown: Dict[CharKey, List[CharKey]] = {}
    for d1 in range(1, d):
        for k in keys_of_degree(d1):
            if k.b > b or k.c > c:
                continue
            if k.a <= 2:
                v, miss = base.get(k), [k]
            else:
                v, miss = _pde_value(k, base)
            if v is None:
                unknown[k] = miss
            else:
                known[k] = v
    target = monomial({"y2": a - 3, "y4": b, "y5": c})
    order = a - 3 + b + c

    def evaluate(values):
        return {"rhs": _slice_rhs(values, order).coefficient(target)}

    obs, deps = probe(evaluate, known, unknown)
    if deps:
        result = (None, sorted({m for u in deps["rhs"] for m in unknown[u]}))
    else:
        scale = math.factorial(a - 3) * math.factorial(b) * math.factorial(c)
        result = (obs["rhs"] * scale, [])
    memo[key] = result
    return result


def _slice_rhs(values: Mapping[CharKey, Fraction], order: int) -> TruncatedSeries:
    """Right side of the equation at y1 = y3 = 0, through ``order``."""
    blocks: Dict[int, Dict] = {}
    for (d, a, b, c), v in values.items():
        if v and a + b + c <= order + 3:
            m = monomial({"y2": a, "y4": b, "y5": c})
            blocks.setdefault(d, {})[m] = Fraction(v, math.factorial(a) * math.factorial(b)
                                                   * math.factorial(c))
    polys = {d: TruncatedSeries(t, order + 3) for d, t in blocks.items()}

    def nder(k_y1: int, k_y2: int) -> TruncatedSeries:
        total = TruncatedSeries.zero(order + 3 - k_y2)
        for d, p in polys.items():
            q = p
            for _ in range(k_y2):
                q = q.partial("y2")
            total = total + q.scale(d ** k_y1)
        return total

    n111, n112, n122, n222 = nder(3, 0), nder(2, 1), nder(1, 2), nder(0, 3)
    n111, n112, n122 = (s.truncate(order) for s in (n111, n112, n122))
    y4 = TruncatedSeries.variable("y4", order)
    w = TruncatedSeries.from_terms({"y4^2": 2, "y5": 2}, order)
    return (n112 * n112 - n111 * n122
            + y4.scale(2) * (n112 * n122 - n111 * n222)
            + w * (n122 * n122 - n112 * n222))


# -- the contact product evaluated from its defining double sum -------------------------

def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def lift_invariant(fixed: Sequence[int], delta: ClassI, m: int, base: BaseStore) -> Fraction:
    """sum_d N_d(T_fixed..., delta^m), expanding delta multilinearly."""
    total = Fraction(0)
    for counts in _compositions(m, 6):
        weight = Fraction(math.factorial(m))
        for r, n in enumerate(counts):
            weight = weight / math.factorial(n) * delta[r] ** n
        if not weight:
            continue
        insertions = list(fixed) + [r for r, n in enumerate(counts) for _ in range(n)]
        codim = sum((0, 1, 2, 1, 2, 3)[r] for r in insertions)
        # N_d needs total codimension 3d - 1 + (number of insertions)
        for d in range(1, codim + 1):
            if 3 * d - 1 + len(insertions) == codim:
                total += weight * gw_first_order(d, insertions, base)
    return total


def double_cover_invariant(a: int, b: int, delta: ClassI, n: int) -> Fraction:
    """Invariant of the double covers with ramification insertions T_a, T_b and delta^n."""
    R = build_R(n + 2)
    r2 = R.partial(Z[a]).partial(Z[b])
    line = r2.substitute_line({Y[s]: delta[s] for s in range(6)})
    return line.coefficient({"T": n}) * math.factorial(n)


def bullet_direct(i: int, j: int, delta: ClassI, q: int,
                  base: Optional[BaseStore] = None) -> ClassP2:
    """q-th T-coefficient of T_i . T_j deformed by delta, from the double sum."""
    base = default_base() if base is None else base
    out = [Fraction(0)] * 3
    for m in range(q + 1):
        n = q - m
        weight = Fraction(2, math.factorial(m) * math.factorial(n))
        for s in range(6):
            lift = None
            for t in (3, 4, 5):
                cover = double_cover_invariant(5 - s, t, delta, n)
                if not cover:
                    continue
                if lift is None:
                    lift = lift_invariant((i, j, s), delta, m, base)
                out[5 - t] += weight * lift * cover
    return ClassP2(*out)
