"""Exact scalars, combinatorial coefficients and truncated power series.

Everything downstream works over :class:`fractions.Fraction`.  Series live in
the fixed variable universe ``y0..y5, z0..z5, T`` and are truncated by total
degree across all variables.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Tuple, Union

Rational = Fraction

VARIABLES: Tuple[str, ...] = tuple(
    [f"y{i}" for i in range(6)] + [f"z{i}" for i in range(6)] + ["T"]
)
NVARS = len(VARIABLES)
_INDEX = {name: i for i, name in enumerate(VARIABLES)}

Monomial = Tuple[int, ...]
ONE: Monomial = (0,) * NVARS

Scalar = Union[int, Fraction]


class NonzeroConstantTerm(ValueError):
    pass


class UnassignedVariable(ValueError):
    pass


class AboveTruncation(ValueError):
    pass


def binomial(n: int, k: int) -> int:
    """C(n, k), with every out-of-range index giving 0."""
    if n < 0 or k < 0 or k > n:
        return 0
    return math.comb(n, k)


def multinomial(n: int, parts: Iterable[int]) -> int:
    parts = list(parts)
    if any(p < 0 for p in parts) or sum(parts) != n or n < 0:
        return 0
    out = math.factorial(n)
    for p in parts:
        out //= math.factorial(p)
    return out


def parse_rational(text: str) -> Fraction:
    """Parse ``"p"`` or ``"p/q"``; raises ValueError on anything else."""
    m = re.fullmatch(r"\s*(-?\d+)(?:\s*/\s*(\d+))?\s*", text)
    if m is None:
        raise ValueError(f"not a rational: {text!r}")
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(m.group(1)), den)


def format_rational(x: Scalar) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# -- monomials ---------------------------------------------------------------

def var_index(name: str) -> int:
    try:
        return _INDEX[name]
    except KeyError:
        raise ValueError(f"unknown variable {name!r}") from None


def monomial(spec: Union[str, Mapping[str, int], Monomial] = "1") -> Monomial:
    """Build an exponent vector from ``"y1^2*z3"``, a dict, or a tuple."""
    if isinstance(spec, tuple):
        if len(spec) != NVARS or any(e < 0 for e in spec):
            raise ValueError(f"bad exponent vector {spec!r}")
        return spec
    exps = [0] * NVARS
    if isinstance(spec, Mapping):
        items = spec.items()
    else:
        spec = spec.replace(" ", "")
        if spec in ("", "1"):
            return ONE
        items = []
        for factor in spec.split("*"):
            name, _, power = factor.partition("^")
            items.append((name, int(power) if power else 1))
    for name, power in items:
        if power < 0:
            raise ValueError(f"negative exponent for {name}")
        exps[var_index(name)] += power
    return tuple(exps)


def degree(m: Monomial) -> int:
    return sum(m)


def format_monomial(m: Monomial) -> str:
    parts = []
    for name, e in zip(VARIABLES, m):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts) if parts else "1"


def monomial_sort_key(m: Monomial):
    # graded, then y0 before y1 before ...
    return (sum(m), tuple(-e for e in m))


def _mono_mul(m1: Monomial, m2: Monomial) -> Monomial:
    return tuple(a + b for a, b in zip(m1, m2))


# -- truncated series -----------------------------------------------------------

class TruncatedSeries:
    """Sparse multivariate power series known exactly through total degree ``order``.

    Instances are immutable.  Terms above ``order`` and zero coefficients are
    never stored.  Binary ring operations truncate to the smaller order.
    """

    __slots__ = ("_terms", "_order")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None, order: int = 0):
        self._order = int(order)
        clean = {}
        if terms:
            for m, c in terms.items():
                c = Fraction(c)
                if c and sum(m) <= self._order:
                    clean[m] = c
        self._terms = clean

    @classmethod
    def _raw(cls, terms: dict, order: int) -> "TruncatedSeries":
        # caller guarantees canonical terms
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._order = order
        return obj

    # -- constructors
    @classmethod
    def zero(cls, order: int) -> "TruncatedSeries":
        return cls._raw({}, order)

    @classmethod
    def constant(cls, c: Scalar, order: int) -> "TruncatedSeries":
        return cls({ONE: c}, order)

    @classmethod
    def variable(cls, name: str, order: int) -> "TruncatedSeries":
        return cls({monomial(name): 1}, order)

    @classmethod
    def from_terms(cls, terms: Mapping[str, Scalar], order: int) -> "TruncatedSeries":
        """``{"y1^2": 3, "1": -1}`` style constructor, handy in tests."""
        out: dict = {}
        for spec, c in terms.items():
            m = monomial(spec)
            out[m] = out.get(m, 0) + Fraction(c)
        return cls(out, order)

    # -- inspection
    @property
    def order(self) -> int:
        return self._order

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        for m in sorted(self._terms, key=monomial_sort_key):
            yield m, self._terms[m]

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def variables(self) -> set:
        return {VARIABLES[i] for m in self._terms for i, e in enumerate(m) if e}

    def coefficient(self, m: Union[str, Monomial, Mapping[str, int]]) -> Fraction:
        m = monomial(m)
        if sum(m) > self._order:
            raise AboveTruncation(
                f"{format_monomial(m)} has degree {sum(m)} > order {self._order}"
            )
        return self._terms.get(m, Fraction(0))

    def constant_term(self) -> Fraction:
        return self._terms.get(ONE, Fraction(0))

    # -- ring structure
    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            return other
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries.constant(other, self._order)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        order = min(self._order, other._order)
        out = {m: c for m, c in self._terms.items() if sum(m) <= order}
        for m, c in other._terms.items():
            if sum(m) > order:
                continue
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return TruncatedSeries._raw(out, order)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries._raw({m: -c for m, c in self._terms.items()}, self._order)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Scalar) -> "TruncatedSeries":
        c = Fraction(c)
        if not c:
            return TruncatedSeries.zero(self._order)
        return TruncatedSeries._raw({m: c * v for m, v in self._terms.items()}, self._order)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        order = min(self._order, other._order)
        left = [(m, sum(m), c) for m, c in self._terms.items() if sum(m) <= order]
        right = sorted(
            ((m, sum(m), c) for m, c in other._terms.items() if sum(m) <= order),
            key=lambda t: t[1],
        )
        out: dict = {}
        for m1, d1, c1 in left:
            room = order - d1
            for m2, d2, c2 in right:
                if d2 > room:
                    break
                m = _mono_mul(m1, m2)
                out[m] = out.get(m, 0) + c1 * c2
        return TruncatedSeries._raw({m: c for m, c in out.items() if c}, order)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int) -> "TruncatedSeries":
        if n < 0:
            raise ValueError("negative power")
        result = TruncatedSeries.constant(1, self._order)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def shift(self, m: Union[str, Monomial]) -> "TruncatedSeries":
        """Multiply by a monomial.

        The product is known exactly through ``order + degree(m)``, so the
        order is raised accordingly rather than left at the operand's.
        """
        m = monomial(m)
        return TruncatedSeries._raw(
            {_mono_mul(k, m): c for k, c in self._terms.items()}, self._order + sum(m)
        )

    # -- calculus
    def partial(self, var: str) -> "TruncatedSeries":
        """Formal partial derivative; the result is only exact to ``order - 1``."""
        i = var_index(var)
        out = {}
        order = self._order - 1
        for m, c in self._terms.items():
            e = m[i]
            if e:
                dm = m[:i] + (e - 1,) + m[i + 1:]
                if sum(dm) <= order:
                    out[dm] = c * e
        return TruncatedSeries._raw(out, order)

    def exp(self) -> "TruncatedSeries":
        if self.constant_term():
            raise NonzeroConstantTerm("exp needs a series without constant term")
        result = TruncatedSeries.constant(1, self._order)
        power = result
        k = 0
        while True:
            k += 1
            power = (power * self).scale(Fraction(1, k))
            if not power:
                return result
            result = result + power

    def truncate(self, order: int) -> "TruncatedSeries":
        order = min(order, self._order)
        return TruncatedSeries._raw(
            {m: c for m, c in self._terms.items() if sum(m) <= order}, order
        )

    def restrict(self, *zero_vars: str) -> "TruncatedSeries":
        """Set the named variables to zero."""
        idx = [var_index(v) for v in zero_vars]
        return TruncatedSeries._raw(
            {m: c for m, c in self._terms.items() if not any(m[i] for i in idx)},
            self._order,
        )

    def substitute_line(self, assignment: Mapping[str, Scalar]) -> "TruncatedSeries":
        """Replace each variable ``v`` by ``assignment[v] * T``.

        ``T`` itself, if present, is left in place.  Total degree is preserved,
        so the order is unchanged.
        """
        t = var_index("T")
        vals = {var_index(v): Fraction(c) for v, c in assignment.items()}
        out: dict = {}
        for m, c in self._terms.items():
            coeff = c
            for i, e in enumerate(m):
                if not e or i == t:
                    continue
                if i not in vals:
                    raise UnassignedVariable(VARIABLES[i])
                coeff *= vals[i] ** e
            if coeff:
                key = tuple(sum(m) if i == t else 0 for i in range(NVARS))
                out[key] = out.get(key, 0) + coeff
        return TruncatedSeries._raw({m: c for m, c in out.items() if c}, self._order)

    # -- comparison / display
    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = TruncatedSeries.constant(other, self._order)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self._order == other._order and self._terms == other._terms

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for m, c in self.items():
            mono = format_monomial(m)
            mag = format_rational(abs(c))
            if mono == "1":
                body = mag
            elif mag == "1":
                body = mono
            else:
                body = f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            pieces.append((sign, body))
        first_sign, first = pieces[0]
        text = ("-" if first_sign == "-" else "") + first
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self) -> str:
        return f"TruncatedSeries({self}, order={self._order})"

    def to_json(self) -> dict:
        return {format_monomial(m): format_rational(c) for m, c in self.items()}


def exp_linear(coeffs: Mapping[str, Scalar], order: int) -> TruncatedSeries:
    """``exp(sum c_v * v)`` for a linear form, expanded to ``order``."""
    lin = TruncatedSeries({monomial(v): c for v, c in coeffs.items()}, order)
    return lin.exp()
