"""Cohomology of the plane and of the point-line incidence variety.

``ClassP2`` is written in the basis ``1, h, h^2``.  ``ClassI`` uses the ordered
basis ``T0..T5 = 1, h, h^2, hv, hv^2, h^2*hv`` where ``hv`` is the pullback of
the dual-line class.  The product on ``I`` is generated from the relations

    h^3 = 0,   hv^3 = 0,   h*hv = h^2 + hv^2

and the resulting table is checked against the pairing and push-forward
requirements when this module is imported.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Sequence, Tuple

from .algebra import Scalar, format_rational

# exponent pair (i, j) of h^i * hv^j for each basis element
I_BASIS: Tuple[Tuple[int, int], ...] = ((0, 0), (1, 0), (2, 0), (0, 1), (0, 2), (2, 1))
I_NAMES = ("1", "h", "h^2", "hv", "hv^2", "h^2*hv")
P2_NAMES = ("1", "h", "h^2")
_POS = {e: i for i, e in enumerate(I_BASIS)}


class InvalidDegree(ValueError):
    pass


def _coeffs(values: Iterable[Scalar], n: int) -> Tuple[Fraction, ...]:
    vals = tuple(Fraction(v) for v in values)
    if len(vals) != n:
        raise ValueError(f"expected {n} coefficients, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class ClassP2:
    coeffs: Tuple[Fraction, Fraction, Fraction]

    def __init__(self, c0: Scalar = 0, c1: Scalar = 0, c2: Scalar = 0):
        object.__setattr__(self, "coeffs", _coeffs((c0, c1, c2), 3))

    @classmethod
    def basis(cls, i: int) -> "ClassP2":
        v = [0, 0, 0]
        v[i] = 1
        return cls(*v)

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i]

    def __add__(self, other: "ClassP2") -> "ClassP2":
        return ClassP2(*(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "ClassP2") -> "ClassP2":
        return ClassP2(*(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, k: Scalar) -> "ClassP2":
        return ClassP2(*(k * a for a in self.coeffs))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_json(self):
        return [format_rational(c) for c in self.coeffs]


@dataclass(frozen=True)
class ClassI:
    coeffs: Tuple[Fraction, ...]

    def __init__(self, *coeffs: Scalar):
        if len(coeffs) == 1 and isinstance(coeffs[0], (list, tuple)):
            coeffs = tuple(coeffs[0])
        object.__setattr__(self, "coeffs", _coeffs(coeffs or (0,) * 6, 6))

    @classmethod
    def basis(cls, i: int) -> "ClassI":
        v = [0] * 6
        v[i] = 1
        return cls(*v)

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i]

    def __add__(self, other: "ClassI") -> "ClassI":
        return ClassI(*(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "ClassI") -> "ClassI":
        return ClassI(*(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, k: Scalar) -> "ClassI":
        return ClassI(*(k * a for a in self.coeffs))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_json(self):
        return [format_rational(c) for c in self.coeffs]


# -- P^2 ----------------------------------------------------------------------

def cup_p2(x: ClassP2, y: ClassP2) -> ClassP2:
    out = [Fraction(0)] * 3
    for i in range(3):
        for j in range(3 - i):
            out[i + j] += x[i] * y[j]
    return ClassP2(*out)


def integrate_p2(x: ClassP2) -> Fraction:
    return x[2]


# -- the incidence variety ------------------------------------------------------

def _normal_form(i: int, j: int) -> Dict[int, int]:
    """Reduce h^i * hv^j to basis coordinates using the defining relations."""
    if i + j > 3 or i >= 3 or j >= 3:
        return {}
    if (i, j) in _POS:
        return {_POS[(i, j)]: 1}
    # i, j >= 1 here: trade one h*hv for h^2 + hv^2
    out: Dict[int, int] = {}
    for part in (_normal_form(i + 1, j - 1), _normal_form(i - 1, j + 1)):
        for k, c in part.items():
            out[k] = out.get(k, 0) + c
    return {k: c for k, c in out.items() if c}


def _build_table() -> Tuple[Tuple[Dict[int, int], ...], ...]:
    table = []
    for a in I_BASIS:
        row = []
        for b in I_BASIS:
            row.append(_normal_form(a[0] + b[0], a[1] + b[1]))
        table.append(tuple(row))
    return tuple(table)


MULT_TABLE = _build_table()


def cup_i(x: ClassI, y: ClassI) -> ClassI:
    out = [Fraction(0)] * 6
    for i, xi in enumerate(x.coeffs):
        if not xi:
            continue
        for j, yj in enumerate(y.coeffs):
            if not yj:
                continue
            for k, c in MULT_TABLE[i][j].items():
                out[k] += c * xi * yj
    return ClassI(*out)


def integrate_i(x: ClassI) -> Fraction:
    return x[5]


def pullback_p(x: ClassP2) -> ClassI:
    return ClassI(x[0], x[1], x[2], 0, 0, 0)


def pushforward_p(x: ClassI) -> ClassP2:
    # hv has degree one on the fibres; hv^2 = h*hv - h^2 pushes to h
    return ClassP2(x[3], x[4], x[5])


def diagonal_decompose(x: ClassI) -> ClassI:
    out = ClassI()
    for s in range(6):
        out = out + ClassI.basis(5 - s) * integrate_i(cup_i(x, ClassI.basis(s)))
    return out


def curve_class(d: int) -> ClassI:
    """Class of the lift of a degree-d rational plane curve."""
    if d < 1:
        raise InvalidDegree(f"degree must be positive, got {d}")
    return ClassI(0, 0, 2 * d - 2, 0, d, 0)


def pairing_matrix() -> Sequence[Sequence[Fraction]]:
    return [
        [integrate_i(cup_i(ClassI.basis(i), ClassI.basis(j))) for j in range(6)]
        for i in range(6)
    ]


def _validate() -> None:
    pairing = pairing_matrix()
    for i in range(6):
        for j in range(6):
            if pairing[i][j] != (1 if i + j == 5 else 0):
                raise RuntimeError(f"incidence ring table fails pairing at T{i}.T{j}")
    for i in range(3):
        if not pushforward_p(ClassI.basis(i)).is_zero():
            raise RuntimeError(f"p_* does not kill T{i}")
    images = [pushforward_p(ClassI.basis(i)).coeffs for i in (3, 4, 5)]
    if images != [ClassP2.basis(k).coeffs for k in range(3)]:
        raise RuntimeError("p_* is not bijective on span(T3, T4, T5)")


_validate()
