import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from flagforge.exactring import substitute_localized
from flagforge.flagcomb import AdmissibleSequence, FlagType, enumerate_sequences, parse_sequence
from flagforge.flagmatrix import (
    InvalidFlag,
    OutOfChart,
    RingMatrix,
    block_lu_transition,
    chart_coordinates,
    det,
    distinguished_minor,
    evaluate_chart_coordinates,
    flag_minor,
    is_blocked_form,
    localization_set,
    master_realization,
    master_ring,
    numeric_reference,
    reference_matrix,
    transition_map,
    verify_cocycle,
)

from gr24_fixtures import GR24, chart, chart_matrices

FL123 = FlagType((1, 2), 3)

small = st.fractions(min_value=-6, max_value=6, max_denominator=3)


def leibniz_det(m):
    n = len(m)
    total = Fraction(0)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = Fraction(-1) ** inversions
        for i, p in enumerate(perm):
            term *= m[i][p]
        total += term
    return total


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def square(n):
    return st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)


@given(st.integers(1, 5).flatmap(square))
def test_det_matches_leibniz(m):
    assert det(m, one=Fraction(1)) == leibniz_det(m)


@given(square(3), square(3))
def test_det_is_multiplicative(a, b):
    one = Fraction(1)
    assert det(matmul(a, b), one=one) == det(a, one=one) * det(b, one=one)


def test_det_needs_pivoting():
    m = [[0, 1, 2, 3], [1, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
    assert det([[Fraction(x) for x in r] for r in m], one=Fraction(1)) == -1


def test_reference_matrix_gr24():
    m = reference_matrix(GR24)
    assert [[str(e) for e in row] for row in m.entries] == [["1", "0", "z13", "z14"], ["0", "1", "z23", "z24"]]


@pytest.mark.parametrize("cols", list(chart_matrices()), ids=str)
def test_gr24_chart_matrices(cols):
    m, gens = master_realization(chart(*cols))
    expected = chart_matrices()[cols]
    for row, exp_row in zip(m.entries, expected):
        for got, want in zip(row, exp_row):
            assert got == want
    assert len(gens) == 4


def test_transition_frame_to_chart_13():
    c, cm = block_lu_transition(chart(1, 2), chart(1, 3))
    z23 = master_ring(GR24).var("z23")
    assert c.entries[0][0] == 1 and c.entries[0][1] == -z23 ** -1 * master_ring(GR24).var("z13")
    assert c.entries[1][0] == 0 and c.entries[1][1] == z23 ** -1
    assert is_blocked_form(cm, chart(1, 3))
    assert localization_set(chart(1, 3)) == ["w1_13"]
    assert localization_set(chart(3, 4)) == ["w1_34"]


def test_fl123_minors_and_realization():
    ring = master_ring(FL123)
    assert {n: str(p) for n, p in ring.minors} == {"w1_2": "z12", "w1_3": "z13", "w2_13": "z23",
                                                   "w2_23": "z12*z23 - z13"}
    m, gens = master_realization(parse_sequence(FL123, "1;1,3"))
    assert [[str(e) for e in row] for row in m.entries] == [["1", "z12", "z13"], ["0", "z23^-1", "1"]]
    assert [str(g) for g in gens] == ["z12", "z13", "z23^-1"]


@pytest.mark.parametrize("ft", [FlagType(d, n) for n in range(2, 6) for r in range(1, n)
                                for d in itertools.combinations(range(1, n), r)], ids=lambda f: f.label())
def test_every_realization_is_blocked(ft):
    for seq in enumerate_sequences(ft):
        assert is_blocked_form(master_realization(seq)[0], seq), seq.label()


def test_distinguished_and_flag_minors():
    m = reference_matrix(GR24)
    assert distinguished_minor(m, 1, [3, 4]) == master_ring(GR24).minor_element("w1_34")
    fl = reference_matrix(FL123)
    assert flag_minor(fl, 1, [2]) == master_ring(FL123).var("z12")
    # the literal band-2 minor on column 1 is identically zero, so it cannot localize anything
    assert distinguished_minor(fl, 2, [1]) == 0


@pytest.mark.parametrize("ft", [GR24, FL123], ids=lambda f: f.label())
def test_cocycle_from_reference(ft):
    seqs = enumerate_sequences(ft)
    for j, k in itertools.product(seqs, repeat=2):
        assert verify_cocycle(seqs[0], j, k)


def test_transition_inverse_is_identity():
    ring = master_ring(GR24)
    for i, j in itertools.product(enumerate_sequences(GR24), repeat=2):
        ij, ji = transition_map(i, j), transition_map(j, i)
        for v in ring.registry.names:
            assert substitute_localized(ij[v], ji, ring) == ring.var(v)


def test_numeric_chart_coordinates():
    m = [[1, 2, 3, 5], [0, 1, 1, 2]]
    seq = chart(1, 3)
    num = evaluate_chart_coordinates(m, seq)
    ref = evaluate_chart_coordinates(m, AdmissibleSequence.reference(GR24))
    sym = chart_coordinates(seq)
    assert {v: sym[v].evaluate(ref) for v in sym} == num
    with pytest.raises(OutOfChart):
        evaluate_chart_coordinates([[1, 0, 0, 0], [0, 1, 0, 0]], chart(3, 4))
    with pytest.raises(InvalidFlag):
        evaluate_chart_coordinates([[1, 2, 3, 4], [2, 4, 6, 8]], seq)
    with pytest.raises(InvalidFlag):
        evaluate_chart_coordinates([[1, 2, 3]], seq)


@given(st.integers(0, 10 ** 6))
def test_numeric_symbolic_commute(seed):
    rng = random.Random(seed)
    ft = FL123
    point = {n: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for n in master_ring(ft).registry.names}
    m = numeric_reference(ft, point)
    for seq in enumerate_sequences(ft):
        try:
            num = evaluate_chart_coordinates(m, seq)
        except OutOfChart:
            continue
        sym = chart_coordinates(seq)
        assert {v: sym[v].evaluate(point) for v in sym} == num


def test_ring_matrix_product_and_det():
    ring = master_ring(GR24)
    z = {n: ring.var(n) for n in ring.registry.names}
    a = RingMatrix.of([[z["z13"], z["z14"]], [z["z23"], z["z24"]]])
    assert a.determinant() == ring.minor_element("w1_34")
    assert (a @ a).determinant() == a.determinant() ** 2
