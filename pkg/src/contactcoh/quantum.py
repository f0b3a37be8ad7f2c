"""Small quantum product on H*(P^2), deformed along a class delta.

Invariants of P^2 are reduced to Kontsevich's numbers: a class 1 among
the insertions kills a d > 0 invariant, every h contributes a factor d, and
the number of h^2 insertions must be 3d - 1.  At d = 0 only the three-point
classical product survives.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Mapping, Optional

from .algebra import TruncatedSeries, multinomial, monomial
from .charnum import kontsevich_direct
from .chow import ClassP2, cup_p2
from .contact import ProductElement
from .report import Report, observe, run_check


def _invariant(d: int, n_h: int, n_h2: int, numbers: Mapping[int, Fraction]) -> Fraction:
    """N_d with ``n_h`` copies of h and ``n_h2`` copies of h^2 (no class 1)."""
    if n_h2 != 3 * d - 1:
        return Fraction(0)
    value = numbers[d] if d in numbers else kontsevich_direct(d)
    return Fraction(d) ** n_h * value


def quantum_coefficient(x: ClassP2, y: ClassP2, delta: ClassP2, n: int,
                        numbers: Optional[Mapping[int, Fraction]] = None) -> ClassP2:
    """The T^n coefficient of x * y."""
    numbers = numbers or {}
    if n == 0:
        out = cup_p2(x, y)
    else:
        out = ClassP2()
    # 3d - 1 h^2-insertions out of at most n + 3 bounds the degree
    d_max = (n + 3 + 1) // 3
    for d in range(1, d_max + 1):
        for n2 in range(n + 1):
            n1 = n - n2
            weight = Fraction(multinomial(n, (n1, n2))) * delta[1] ** n1 * delta[2] ** n2
            if not weight:
                continue
            for i in (1, 2):
                for j in (1, 2):
                    xy = x[i] * y[j]
                    if not xy:
                        continue
                    for s in (1, 2):
                        inv = _invariant(
                            d,
                            n1 + (i == 1) + (j == 1) + (s == 1),
                            n2 + (i == 2) + (j == 2) + (s == 2),
                            numbers,
                        )
                        if inv:
                            # dual basis: 1 <-> h^2, h <-> h
                            out = out + ClassP2.basis(2 - s) * (weight * xy * inv)
    return out * Fraction(1, math.factorial(n))


def quantum_product(x: ClassP2, y: ClassP2, delta: ClassP2, order: int,
                    numbers: Optional[Mapping[int, Fraction]] = None) -> ProductElement:
    """x * y as a T-series through T^order.

    ``numbers`` overrides Kontsevich's N_d for selected d.
    """
    terms = [{}, {}, {}]
    for n in range(order + 1):
        c = quantum_coefficient(x, y, delta, n, numbers)
        for s in range(3):
            if c[s]:
                terms[s][monomial({"T": n})] = c[s]
    return ProductElement(tuple(TruncatedSeries(t, order) for t in terms))


def _apply(f: ProductElement, z: ClassP2, delta: ClassP2, order: int, numbers, left: bool):
    out = ProductElement.from_class(ClassP2(), order)
    for s in range(3):
        if not f[s]:
            continue
        b = ClassP2.basis(s)
        prod = quantum_product(b, z, delta, order, numbers) if left else \
            quantum_product(z, b, delta, order, numbers)
        out = out + prod.times(f[s])
    return out


def verify_quantum_associativity(order: int, delta: ClassP2,
                                 numbers: Optional[Mapping[int, Fraction]] = None) -> Report:
    """(x*y)*z = x*(y*z) through T^order on all basis triples."""
    report = Report("quantum", order, order)
    basis = [ClassP2.basis(i) for i in range(3)]

    def evaluate(_values):
        obs: dict = {}
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    xy = quantum_product(basis[i], basis[j], delta, order, numbers)
                    yz = quantum_product(basis[j], basis[k], delta, order, numbers)
                    lhs = _apply(xy, basis[k], delta, order, numbers, left=True)
                    rhs = _apply(yz, basis[i], delta, order, numbers, left=False)
                    for s in range(3):
                        observe(obs, f"(b{i}*b{j})*b{k} - b{i}*(b{j}*b{k}) [b{s}]",
                                lhs[s], rhs[s], order)
        return obs

    return run_check(report, evaluate, {}, {})
