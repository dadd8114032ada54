from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from flagforge.exactring import (
    DenominatorVanishes,
    LocalizedElement,
    LocalizedRing,
    MissingAssignment,
    NotDivisible,
    NotInvertible,
    Polynomial,
    RegistryMismatch,
    VariableRegistry,
    loc_arith,
    substitute,
    substitute_localized,
)
from flagforge.flagcomb import FlagType
from flagforge.flagmatrix import master_ring

R = master_ring(FlagType((2,), 4))
NAMES = R.registry.names

coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
exponents = st.tuples(*[st.integers(0, 2)] * len(NAMES))


@st.composite
def polynomials(draw, registry=R.registry, max_terms=4):
    terms = draw(st.dictionaries(exponents, coeffs, max_size=max_terms))
    return Polynomial(registry, terms)


@st.composite
def elements(draw):
    num = draw(polynomials())
    den = draw(st.dictionaries(st.integers(0, len(R.minors) - 1), st.integers(0, 2), max_size=2))
    return LocalizedElement(R, num, den)


points = st.fixed_dictionaries({n: st.fractions(min_value=-7, max_value=7, max_denominator=5) for n in NAMES})


def z(name):
    return R.var(name)


def test_gr24_minor_table():
    table = {name: str(p) for name, p in R.minors}
    assert table == {"w1_13": "z23", "w1_14": "z24", "w1_23": "z13", "w1_24": "z14",
                     "w1_34": "z13*z24 - z14*z23"}


def test_polynomial_basics():
    reg = VariableRegistry(["x", "y"])
    x, y = Polynomial.var(reg, "x"), Polynomial.var(reg, "y")
    p = (x + y) ** 2
    assert p == x * x + 2 * x * y + y * y
    assert p.degree() == 2 and p.is_homogeneous()
    assert p.divexact(x + y) == x + y
    with pytest.raises(NotDivisible):
        (p + 1).divexact(x + y)
    assert (x - y).evaluate({"x": Fraction(1, 2), "y": 3}) == Fraction(-5, 2)
    with pytest.raises(MissingAssignment):
        x.evaluate({"y": 1})
    other = Polynomial.var(VariableRegistry(["x", "y", "t"]), "x")
    with pytest.raises(RegistryMismatch):
        x + other
    # y is the more significant variable
    assert (x + y).leading_term()[0] == (0, 1)


def test_localized_display_form():
    e = z("z14") - z("z23") ** -1 * z("z13") * z("z24")
    assert str(e) == "-z23^-1*z13*z24 + z14"
    d = R.minor_element("w1_34")
    assert str(d ** -1 * z("z24")) == "(z13*z24 - z14*z23)^-1*z24"


def test_hand_evaluation():
    e = z("z14") - z("z23") ** -1 * z("z13") * z("z24")
    # z14 - z13*z24/z23 = 2 - 5/3
    pt = {"z13": 1, "z14": 2, "z23": 3, "z24": 5}
    assert e.evaluate(pt) == Fraction(1, 3)
    with pytest.raises(DenominatorVanishes):
        e.evaluate({"z13": 1, "z14": 2, "z23": 0, "z24": 5})


def test_normalization_cancels_minors():
    d = R.minor_element("w1_34")
    e = LocalizedElement(R, d.numerator * z("z13").numerator, {R.minor_index["w1_34"]: 1})
    assert e.den == {} and e == z("z13")
    assert (d * d ** -1) == 1
    assert (z("z23") ** -2 * z("z23") ** 3) == z("z23")


def test_inverse_and_divexact():
    d = R.minor_element("w1_34")
    assert (3 * d * z("z13")).inverse() * d * z("z13") == Fraction(1, 3)
    with pytest.raises(NotInvertible):
        (z("z13") + z("z14")).inverse()
    assert (d * z("z24")).divexact(d) == z("z24")
    assert (z("z24")).divexact(d) == z("z24") * d ** -1
    with pytest.raises(ZeroDivisionError):
        z("z24").divexact(R.zero())


def test_equality_across_denominators():
    a = z("z13") * z("z23") ** -1
    b = LocalizedElement(R, (z("z13") * z("z24")).numerator, {R.minor_index["w1_13"]: 1, R.minor_index["w1_14"]: 1})
    assert a == b and hash(a) == hash(b)
    assert a != z("z13")


@given(elements(), elements(), elements())
def test_ring_axioms(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + R.zero() == a and a * R.one() == a
    assert a - a == 0
    assert loc_arith(a, b, "sub") == a - b


@given(elements())
def test_normalization_is_idempotent(a):
    again = LocalizedElement(R, a.numerator, a.den)
    assert again.numerator == a.numerator and again.den == a.den


@given(elements(), elements(), points)
def test_evaluate_is_a_homomorphism(a, b, pt):
    try:
        va, vb = a.evaluate(pt), b.evaluate(pt)
    except DenominatorVanishes:
        return
    assert (a + b).evaluate(pt) == va + vb
    assert (a * b).evaluate(pt) == va * vb


@given(elements())
def test_hash_consistent_with_equality(a):
    b = LocalizedElement(R, a.numerator * R.minor(4) * R.minor(0),
                         {k: v for k, v in a.den.items()} | {4: a.den.get(4, 0) + 1, 0: a.den.get(0, 0) + 1})
    assert a == b and hash(a) == hash(b)


def test_substitute():
    reg = VariableRegistry(["u", "v"])
    p = Polynomial.var(reg, "u") ** 2 - Polynomial.var(reg, "v")
    img = substitute(p, {"u": z("z13"), "v": z("z23") ** -1}, R)
    assert img == z("z13") ** 2 - z("z23") ** -1
    with pytest.raises(MissingAssignment):
        substitute(p, {"u": z("z13")}, R)
    # swapping z13 and z23 is an automorphism of the localization
    e = z("z14") * z("z23") ** -1
    swapped = substitute_localized(e, {"z13": z("z23"), "z14": z("z14"), "z23": z("z13"), "z24": z("z24")}, R)
    assert swapped == z("z14") * z("z13") ** -1


def test_small_custom_ring():
    reg = VariableRegistry(["x", "y"], ["w"])
    ring = LocalizedRing(reg, minors=[("w", Polynomial.var(reg, "x") + Polynomial.var(reg, "y"))])
    s = ring.minor_element("w")
    assert s * ring.inverse_of_minor("w") == 1
    assert (ring.var("x") * s ** -1 + ring.var("y") * s ** -1) == 1
