import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from contactcoh.algebra import TruncatedSeries, exp_linear, monomial
from contactcoh.charnum import CharKey, MissingBaseData, char_number, default_base
from contactcoh.chow import ClassI, ClassP2, cup_p2
from contactcoh.contact import (
    PotentialK,
    ProductElement,
    build_K,
    build_N,
    build_R,
    bullet,
    bullet_direct,
    contact_product,
    dfi_sides,
    keys_through,
    km_sides,
    pde_extract_charnum,
    pde_sides,
    potential_from_values,
    ring_presentation,
    structure_constants,
    value_table,
    verify_contact_associativity,
    verify_pde,
    verify_presentation,
)

D = 5


@pytest.fixture(scope="module")
def K5():
    known, _ = value_table(D, default_base())
    return PotentialK(potential_from_values(known, D))


def completed_base(order):
    """Shipped base with every gap up to ``order`` filled by an arbitrary value."""
    _, unknown = value_table(order, default_base())
    fill = {k: 7 + k.b for keys in unknown.values() for k in keys}
    return default_base().merged(fill)


def const_element(x, order):
    return ProductElement.from_class(x, order)


rationals = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def elements(draw, order=2):
    coords = []
    for _ in range(3):
        terms = {}
        for m in ("1", "y1", "y2", "y4", "y1*y2"):
            terms[monomial(m)] = draw(rationals)
        coords.append(TruncatedSeries(terms, order))
    return ProductElement(tuple(coords))


# -- N, R, K -----------------------------------------------------------------

def test_build_N_examples():
    N = build_N(2)
    assert N.series.coefficient("y5") == 1
    assert N.series.coefficient("y2^2") == Fraction(1, 2)
    assert not any(m[0] for m, _ in N.series.items())
    assert N.d_max == 1


def test_build_N_reports_missing_keys():
    with pytest.raises(MissingBaseData) as exc:
        build_N(4)
    assert CharKey(2, 2, 1, 1) in exc.value.keys
    assert all(k.a <= 2 for k in exc.value.keys)


def test_N_matches_definition():
    known, _ = value_table(D, default_base())
    N = potential_from_values(known, D)
    expected = TruncatedSeries.zero(D)
    for (d, a, b, c), v in known.items():
        poly = TruncatedSeries({monomial({"y2": a, "y4": b, "y5": c}):
                                Fraction(v, math.factorial(a) * math.factorial(b) * math.factorial(c))}, D)
        expected = expected + poly * exp_linear({"y1": d, "y3": 2 * d - 2}, D)
    assert N == expected


def test_keys_through():
    assert set(keys_through(2)) == {CharKey(1, 2, 0, 0), CharKey(1, 1, 1, 0), CharKey(1, 0, 2, 0),
                                    CharKey(1, 0, 0, 1)}
    assert all(k.d <= 2 for k in keys_through(3))


def test_build_R_examples():
    R = build_R(4)
    assert R.coefficient("z3*z5") == Fraction(1, 2)
    assert R.coefficient("z4^2*y3") == Fraction(1, 2)
    assert R.restrict("z3", "z4", "z5") == TruncatedSeries.zero(4)
    assert not (R.variables() & {"z0", "z1", "z2", "y0", "y1", "y2"})


def test_K_examples(K5):
    assert K5.series.coefficient("y2*z5") == 1
    assert K5.series.partial("z0") == TruncatedSeries.zero(D - 1)
    assert all(sum(m[6:12]) == 1 for m, _ in K5.series.items())
    assert K5.z_monomials_outside((3, 4, 5)) == []


def test_K_agrees_with_two_term_formula(K5):
    known, _ = value_table(D, default_base())
    N = potential_from_values(known, D)
    R = build_R(D + 2)
    two_term = (N.partial("y1") * R.partial("z4") + N.partial("y2") * R.partial("z3")).scale(2)
    assert K5.series.truncate(D - 1) == two_term.truncate(D - 1)


def test_build_K_strict():
    with pytest.raises(MissingBaseData):
        build_K(5)
    K = build_K(5, completed_base(5))
    assert K.kp(1, 2, 5).constant_term() == 1
    assert K.z_monomials_outside((3, 4, 5)) == []


def test_kp_examples(K5):
    assert K5.kp(2, 1, 5).constant_term() == 1
    assert K5.kp(2, 1, 4).constant_term() == 0
    for i in range(3):
        for j in range(3):
            for k in range(3):
                assert not K5.kp(i, j, k)
            for k in range(6):
                assert K5.kp(i, j, k) == K5.kp(j, i, k)


def test_T0_has_no_quantum_correction(K5):
    for j in range(3):
        for k in range(6):
            assert not K5.kp(0, j, k)


# -- products --------------------------------------------------------------------

def test_bullet_examples(K5):
    o = D - 3
    h, h2 = const_element(ClassP2.basis(1), o), const_element(ClassP2.basis(2), o)
    prod = bullet(h2, h, K5)
    assert [c.constant_term() for c in prod.coords] == [1, 0, 0]
    assert [c.constant_term() for c in contact_product(h2, h, K5).coords] == [1, 0, 0]


def test_identity(K5):
    one = const_element(ClassP2.basis(0), D - 3)
    for i in range(3):
        x = const_element(ClassP2.basis(i), D - 3)
        assert contact_product(one, x, K5) == x
        assert contact_product(x, one, K5) == x


def test_constant_part_is_cup_plus_bullet(K5):
    for i in range(3):
        for j in range(3):
            x, y = ClassP2.basis(i), ClassP2.basis(j)
            got = contact_product(const_element(x, 2), const_element(y, 2), K5)
            cup = cup_p2(x, y)
            bul = structure_constants(K5, i, j)
            for s in range(3):
                assert got[s].constant_term() == cup[s] + bul[s].constant_term()


@settings(max_examples=25, deadline=None)
@given(elements(), elements())
def test_contact_product_commutes(x, y):
    K = _K5()
    assert contact_product(x, y, K) == contact_product(y, x, K)
    assert bullet(x, y, K) == bullet(y, x, K)


_K_CACHE = {}


def _K5():
    if "K" not in _K_CACHE:
        known, _ = value_table(D, default_base())
        _K_CACHE["K"] = PotentialK(potential_from_values(known, D))
    return _K_CACHE["K"]


def test_bullet_matches_double_sum(K5):
    # delta has no T5 part, so keys with c > 0 never enter
    delta = ClassI(5, Fraction(1, 2), Fraction(-1, 3), Fraction(2, 5), Fraction(3, 7), 0)
    line = {f"y{r}": delta[r] for r in range(6)}
    for i in range(3):
        for j in range(3):
            sc = structure_constants(K5, i, j)
            direct = bullet_direct(i, j, delta, 2)
            assert [c.substitute_line(line).coefficient("T^2") for c in sc] == list(direct.coeffs)


# -- the differential equation --------------------------------------------------------

def test_pde_passes_with_shipped_base():
    for order in (4, 5, 6):
        report = verify_pde(order)
        assert report.passed and report.checked > 0, report.failures


def test_pde_strict_mode_raises():
    with pytest.raises(MissingBaseData):
        verify_pde(4, determinable_only=False)
    report = verify_pde(6, completed_base(6), determinable_only=False)
    assert report.passed and not report.skipped


def test_pde_reports_skips_with_keys():
    report = verify_pde(7)
    assert report.passed
    assert report.skipped
    assert all(s["missing"] for s in report.skipped)


def test_pde_detects_wrong_recursion_value():
    known, _ = value_table(6, default_base())
    known[CharKey(2, 4, 1, 0)] += 1
    lhs, rhs = pde_sides(potential_from_values(known, 6))
    assert lhs.truncate(3) != rhs.truncate(3)


@pytest.mark.parametrize("key, value", [
    ((2, 5, 0, 0), 1), ((3, 8, 0, 0), 12), ((2, 3, 0, 1), 1), ((3, 6, 0, 1), 10), ((4, 11, 0, 0), 620),
])
def test_pde_extract_examples(key, value):
    assert pde_extract_charnum(key) == value


def test_pde_extract_missing_and_invalid():
    with pytest.raises(MissingBaseData) as exc:
        pde_extract_charnum((3, 5, 1, 1))
    assert exc.value.keys == [CharKey(2, 2, 1, 1)]
    with pytest.raises(ValueError):
        pde_extract_charnum((2, 2, 3, 0))


def test_general_form_restricts_to_specialisations():
    known, _ = value_table(6, default_base())
    N = potential_from_values(known, 6)
    lhs, rhs = pde_sides(N)
    dl, dr = dfi_sides(N)
    assert lhs.restrict("y3", "y5") == dl
    assert rhs.restrict("y3", "y5") == dr
    kl, kr = km_sides(N)
    assert rhs.restrict("y3", "y4", "y5") == kr
    assert lhs.restrict("y3", "y4", "y5") == kl


def test_specialised_checks_pass():
    for form in ("dfi", "km"):
        report = verify_pde(6, specialize=form)
        assert report.passed and report.checked > 0


# -- associativity and presentation ----------------------------------------------------

def test_contact_associativity_order_4_and_5():
    for order in (4, 5):
        report = verify_contact_associativity(order)
        assert report.passed and report.checked > 0


def test_associativity_catches_table_corruption():
    # a wrong value written into the table after the recursion has run
    report = verify_contact_associativity(5, values={CharKey(2, 4, 1, 0): 3})
    assert not report.passed
    assert report.failures[0]["where"] and report.failures[0]["monomial"]


def test_presentation_at_origin():
    pres = ring_presentation(3, determinable_only=True)
    assert not pres.undetermined
    assert [x.constant_term() for x in pres.xi] == [1, 0, 0]


def test_presentation_strict_raises():
    with pytest.raises(MissingBaseData):
        ring_presentation(5)
    pres = ring_presentation(5, completed_base(5))
    assert [x.constant_term() for x in pres.xi] == [1, 0, 0]


def test_presentation_quantum_slice():
    pres = ring_presentation(6, determinable_only=True, slice_quantum=True)
    assert not pres.undetermined
    known, _ = value_table(6, default_base())
    N = potential_from_values(known, 6).restrict("y3", "y4", "y5")
    n111, n112, n122 = (N.partial("y1").partial(a).partial(b) for a, b in
                        (("y1", "y1"), ("y1", "y2"), ("y2", "y2")))
    xi0, xi1, xi2 = pres.xi
    assert xi2 == n111.truncate(3)
    assert xi1 == n112.scale(2).truncate(3)
    assert xi0 == n122.truncate(3)


def test_presentation_relation_holds():
    for order in (3, 4, 5):
        assert verify_presentation(order).passed


def test_presentation_detects_perturbed_xi0():
    def bump(xi):
        return (xi[0] + TruncatedSeries.variable("y1", xi[0].order), xi[1], xi[2])
    report = verify_presentation(4, xi_override=bump)
    assert not report.passed


def test_presentation_undetermined_entries_name_keys():
    pres = ring_presentation(5, determinable_only=True)
    assert pres.undetermined
    assert CharKey(2, 2, 1, 1) in pres.missing_keys()


@settings(max_examples=10, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=7, max_size=7))
def test_equation_and_associativity_hold_for_any_base(values):
    # the recursion is the equation solved for a >= 3, so base data is unconstrained by it
    base = default_base().merged(dict(zip(default_base().keys(), values)))
    assert verify_pde(5, base).passed
    assert verify_contact_associativity(4, base).passed
    for key in ((2, 5, 0, 0), (3, 8, 0, 0), (3, 6, 0, 1)):
        assert pde_extract_charnum(key, base) == char_number(key, base)
