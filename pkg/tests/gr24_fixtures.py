"""Gr(2;4) chart matrices and Pluecker substitution tuples, typed in by hand as independent fixtures."""

from flagforge.flagcomb import AdmissibleSequence, FlagType
from flagforge.flagmatrix import master_ring

GR24 = FlagType((2,), 4)


def chart(*cols):
    return AdmissibleSequence.of(GR24, [list(cols)])


def symbols():
    R = master_ring(GR24)
    z13, z14, z23, z24 = (R.var(n) for n in ("z13", "z14", "z23", "z24"))
    return R, z13, z14, z23, z24


def chart_matrices():
    R, z13, z14, z23, z24 = symbols()
    D = z13 * z24 - z14 * z23
    inv = lambda x: x ** -1
    return {
        (1, 2): [[1, 0, z13, z14],
                 [0, 1, z23, z24]],
        (1, 3): [[1, -inv(z23) * z13, 0, z14 - inv(z23) * z13 * z24],
                 [0, inv(z23), 1, inv(z23) * z24]],
        (1, 4): [[1, -inv(z24) * z14, z13 - inv(z24) * z14 * z23, 0],
                 [0, inv(z24), inv(z24) * z23, 1]],
        (2, 3): [[-inv(z13) * z23, 1, 0, z24 - inv(z13) * z14 * z23],
                 [inv(z13), 0, 1, inv(z13) * z14]],
        (2, 4): [[-inv(z14) * z24, 1, z23 - inv(z14) * z13 * z24, 0],
                 [inv(z14), 0, inv(z14) * z13, 1]],
        (3, 4): [[inv(D) * z24, -inv(D) * z14, 1, 0],
                 [-inv(D) * z23, inv(D) * z13, 0, 1]],
    }


def plucker_tuples():
    R, z13, z14, z23, z24 = symbols()
    D = z13 * z24 - z14 * z23
    inv = lambda x: x ** -1
    return {
        (1, 2): [1, z23, z24, -z13, -z14, D],
        (1, 3): [inv(z23), 1, inv(z23) * z24, -inv(z23) * z13, -inv(z23) * z14, -z14 + inv(z23) * z13 * z24],
        (1, 4): [inv(z24), inv(z24) * z23, 1, -inv(z24) * z13, -inv(z24) * z14, z13 - inv(z24) * z14 * z23],
        (2, 3): [-inv(z13), -inv(z13) * z23, -inv(z13) * z24, 1, inv(z13) * z14, -z24 + inv(z13) * z14 * z23],
        (2, 4): [-inv(z14), -inv(z14) * z23, -inv(z14) * z24, inv(z14) * z13, 1, z23 - inv(z14) * z13 * z24],
        (3, 4): [inv(D), inv(D) * z23, inv(D) * z24, -inv(D) * z13, -inv(D) * z14, 1],
    }
