"""Exact charts, transition maps and noncommutative soft schemes of flag varieties."""

from .exactring import LocalizedElement, LocalizedRing, Polynomial, VariableRegistry
from .flagcomb import (
    AdmissibleChain,
    AdmissibleSequence,
    FlagType,
    characteristic_map,
    enumerate_sequences,
    parse_sequence,
    sequence_count,
)
from .flagmatrix import (
    chart_coordinates,
    master_realization,
    master_ring,
    reference_matrix,
    transition_map,
    verify_cocycle,
)
from .freealg import LiftConvention, NCPolynomial, commutatize, lift, localization_rules, nc_equal, reduce
from .softscheme import (
    build_closed_subscheme,
    build_soft_scheme,
    plucker_pullback,
    plucker_tuple,
    soften_union,
    verify_soft_scheme,
)

__version__ = "0.1.0"
