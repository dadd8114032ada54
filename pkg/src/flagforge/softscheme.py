"""Chain-indexed generator systems: commutative charts, soft NC schemes, subschemes, Pluecker pullbacks."""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .exactring import LocalizedElement, Polynomial, VariableRegistry, substitute, substitute_localized
from .flagcomb import (
    AdmissibleChain,
    AdmissibleSequence,
    FlagType,
    chains_up_to,
    enumerate_sequences,
)
from .flagmatrix import (
    MasterRing,
    chart_coordinates,
    det,
    master_realization,
    master_ring,
    transition_map,
)
from .freealg import LiftConvention, NCPolynomial, commutatize, lift, nc_substitute


class Unsupported(ValueError):
    pass


class InvalidInput(ValueError):
    pass


def _union(lists: Iterable[Sequence]) -> tuple:
    """Order-preserving union; elements hash consistently with ``==``."""
    return tuple(dict.fromkeys(x for items in lists for x in items))


class _Memo:
    """Chain -> value table with synchronized insertion."""

    def __init__(self, compute):
        self._compute = compute
        self._table: dict = {}
        self._lock = threading.Lock()

    def __call__(self, key):
        try:
            return self._table[key]
        except KeyError:
            pass
        value = self._compute(key)
        with self._lock:
            return self._table.setdefault(key, value)


class CommutativeSystem:
    """``chain -> generators of R_chain`` inside the master ring, computed on demand."""

    def __init__(self, flag_type: FlagType):
        self.flag_type = flag_type
        self.ring = master_ring(flag_type)
        self._memo = _Memo(lambda chain: _union(master_realization(s)[1] for s in chain))

    def chart(self, seq: AdmissibleSequence) -> tuple[LocalizedElement, ...]:
        return master_realization(seq)[1]

    def generators(self, chain: AdmissibleChain | AdmissibleSequence) -> tuple[LocalizedElement, ...]:
        if isinstance(chain, AdmissibleSequence):
            chain = AdmissibleChain.of([chain])
        return self._memo(chain)


def build_commutative_system(flag_type: FlagType) -> CommutativeSystem:
    return CommutativeSystem(flag_type)


class SoftScheme:
    """Per-chart noncommutative generators; chain generators are unions over members."""

    def __init__(self, flag_type: FlagType, chart_generators: Mapping[AdmissibleSequence, Sequence[NCPolynomial]],
                 conventions: Sequence[str] = (LiftConvention.INVERSE_FIRST.value,)):
        self.flag_type = flag_type
        self.ring: MasterRing = master_ring(flag_type)
        self.conventions = tuple(conventions)
        self.charts = {s: tuple(chart_generators[s]) for s in enumerate_sequences(flag_type)}
        self.system = CommutativeSystem(flag_type)
        self._memo = _Memo(lambda chain: _union(self.charts[s] for s in chain))

    @property
    def is_lifting(self) -> bool:
        """Built from a single lift, so ``pi_0`` should be a bijection on generators."""
        return len(self.conventions) == 1

    def generators(self, chain: AdmissibleChain | AdmissibleSequence) -> tuple[NCPolynomial, ...]:
        if isinstance(chain, AdmissibleSequence):
            chain = AdmissibleChain.of([chain])
        return self._memo(chain)

    def replace_generator(self, seq: AdmissibleSequence, index: int, new: NCPolynomial) -> "SoftScheme":
        charts = dict(self.charts)
        gens = list(charts[seq])
        gens[index] = new
        charts[seq] = tuple(gens)
        return SoftScheme(self.flag_type, charts, self.conventions)


def build_soft_scheme(flag_type: FlagType,
                      convention: LiftConvention | str = LiftConvention.INVERSE_FIRST) -> SoftScheme:
    convention = LiftConvention(convention)
    charts = {s: tuple(lift(g, convention) for g in master_realization(s)[1])
              for s in enumerate_sequences(flag_type)}
    return SoftScheme(flag_type, charts, (convention.value,))


@dataclass
class Violation:
    check: str
    chain: str
    detail: str

    def to_json(self):
        return {"check": self.check, "chain": self.chain, "detail": self.detail}


@dataclass
class SchemeReport:
    chains_checked: int = 0
    pairs_checked: int = 0
    violations: list[Violation] = field(default_factory=list)
    checks: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def failed(self, check: str) -> bool:
        return any(v.check == check for v in self.violations)

    def to_json(self):
        return {"ok": self.ok, "chains_checked": self.chains_checked, "pairs_checked": self.pairs_checked,
                "checks": list(self.checks), "violations": [v.to_json() for v in self.violations]}


def verification_chains(flag_type: FlagType) -> list[AdmissibleChain]:
    """Chains of size at most two plus the maximal chain."""
    chains = chains_up_to(flag_type, 2)
    top = AdmissibleChain.maximal(flag_type)
    if top not in chains:
        chains.append(top)
    return chains


def verify_soft_scheme(s: SoftScheme, chains: Sequence[AdmissibleChain] | None = None) -> SchemeReport:
    """Monotonicity, ``pi_0(G_nc) = G`` and the commuting square, over a bounded set of chains."""
    chains = list(chains) if chains is not None else verification_chains(s.flag_type)
    checks = ("monotone", "epimorphism", "commuting-square")
    if s.is_lifting:
        checks += ("bijective",)
    report = SchemeReport(checks=checks)
    pi0: dict[NCPolynomial, LocalizedElement] = {}

    def image(g):
        if g not in pi0:
            pi0[g] = commutatize(g)
        return pi0[g]

    nc_sets = {c: set(s.generators(c)) for c in chains}
    comm_sets = {c: set(s.system.generators(c)) for c in chains}
    for chain in chains:
        report.chains_checked += 1
        nc = s.generators(chain)
        comm = comm_sets[chain]
        img = [image(g) for g in nc]
        for g, v in zip(nc, img):
            if v not in comm:
                report.violations.append(Violation("epimorphism", chain.label(),
                                                   f"pi_0({g}) = {v} is not a generator of R"))
        hit = set(img)
        for g in s.system.generators(chain):
            if g not in hit:
                report.violations.append(Violation("epimorphism", chain.label(), f"{g} is not hit by pi_0"))
        if s.is_lifting and len(hit) != len(img):
            report.violations.append(Violation("bijective", chain.label(),
                                               "two noncommutative generators share a commutatization"))
    for small, big in itertools.permutations(chains, 2):
        if not set(small.sequences) <= set(big.sequences):
            continue
        report.pairs_checked += 1
        nc_big, comm_big = nc_sets[big], comm_sets[big]
        for g in s.generators(small):
            if g not in nc_big:
                report.violations.append(Violation("monotone", f"{small.label()} <= {big.label()}",
                                                   f"{g} missing from the larger chain"))
                continue
            # pi_0 o iota# == iota# o pi_0 on generators
            if image(g) not in comm_big:
                report.violations.append(Violation("commuting-square", f"{small.label()} <= {big.label()}",
                                                   f"pi_0({g}) not in R of the larger chain"))
        for g in comm_sets[small]:
            if g not in comm_big:
                report.violations.append(Violation("monotone", f"{small.label()} <= {big.label()}",
                                                   f"commutative generator {g} missing"))
    return report


def soften_union(a: SoftScheme, b: SoftScheme) -> SoftScheme:
    """Common softening: chartwise union of generator sets."""
    if a.flag_type != b.flag_type:
        raise ValueError(f"{a.flag_type.label()} vs {b.flag_type.label()}")
    charts = {s: _union([a.charts[s], b.charts[s]]) for s in a.charts}
    conventions = tuple(dict.fromkeys(a.conventions + b.conventions))
    return SoftScheme(a.flag_type, charts, conventions)


def softens(finer: SoftScheme, coarser: SoftScheme, chains: Sequence[AdmissibleChain] | None = None) -> bool:
    """``finer`` contains every generator of ``coarser`` on every listed chain."""
    chains = list(chains) if chains is not None else verification_chains(coarser.flag_type)
    return all(set(coarser.generators(c)) <= set(finer.generators(c)) for c in chains)


# -- Pluecker ---------------------------------------------------------------------

def plucker_registry(flag_type: FlagType) -> VariableRegistry:
    if not flag_type.is_grassmannian:
        raise Unsupported("Pluecker coordinates are only provided for Grassmannians")
    k = len(list(itertools.combinations(range(flag_type.n), flag_type.d[0])))
    return _plucker_registry(k)


_PLUCKER: dict[int, VariableRegistry] = {}


def _plucker_registry(k: int) -> VariableRegistry:
    if k not in _PLUCKER:
        _PLUCKER[k] = VariableRegistry(f"y{i}" for i in range(k))
    return _PLUCKER[k]


def plucker_subsets(flag_type: FlagType) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(1, flag_type.n + 1), flag_type.d[0]))


def plucker_tuple(seq: AdmissibleSequence) -> list[LocalizedElement]:
    """``det`` of the realization matrix on each column subset, lexicographic."""
    ft = seq.flag_type
    if not ft.is_grassmannian:
        raise Unsupported("Pluecker coordinates are only provided for Grassmannians")
    m = master_realization(seq)[0]
    one = m.ring.one()
    return [det(m.submatrix(range(ft.rows), [c - 1 for c in cols]), one=one) for cols in plucker_subsets(ft)]


def plucker_pullback(f: Polynomial, seq: AdmissibleSequence) -> LocalizedElement:
    ft = seq.flag_type
    if not ft.is_grassmannian:
        raise Unsupported("Pluecker pullback needs a Grassmannian flag type")
    reg = plucker_registry(ft)
    if f.registry != reg:
        raise InvalidInput(f"polynomial must be in the variables {', '.join(reg.names)}")
    if not f.is_homogeneous():
        raise InvalidInput("Pluecker pullback needs a homogeneous polynomial")
    ring = master_ring(ft)
    return substitute(f, dict(zip(reg.names, plucker_tuple(seq))), ring)


def plucker_quadric(flag_type: FlagType = FlagType((2,), 4)) -> Polynomial:
    """``y0 y5 - y1 y4 + y2 y3`` for Gr(2;4)."""
    reg = plucker_registry(flag_type)
    y = [Polynomial.var(reg, n) for n in reg.names]
    return y[0] * y[5] - y[1] * y[4] + y[2] * y[3]


def fermat_quartic(flag_type: FlagType = FlagType((2,), 4)) -> Polynomial:
    reg = plucker_registry(flag_type)
    total = Polynomial.zero(reg)
    for n in reg.names:
        total = total + Polynomial.var(reg, n, 4)
    return total


# -- closed subschemes ------------------------------------------------------------

def in_chart_coordinates(e: LocalizedElement, seq: AdmissibleSequence) -> Polynomial:
    """Rewrite ``e`` as a polynomial in the chart-``seq`` coordinates.

    Raises :class:`InvalidInput` when ``e`` is not in ``R_seq``.
    """
    ft = seq.flag_type
    ref = master_ring(ft)
    back = transition_map(seq, _reference(ft))
    image = substitute_localized(e, back, ref) if e.den else substitute(e.numerator, back, ref)
    if not image.is_polynomial():
        raise InvalidInput(f"{e} is not a polynomial in the coordinates of chart {seq.label()}")
    return image.numerator


def _reference(ft):
    return AdmissibleSequence.reference(ft)


def lift_to_chart(e: LocalizedElement, seq: AdmissibleSequence, scheme: SoftScheme) -> NCPolynomial:
    """A preimage of ``e`` inside the subalgebra generated by the chart's NC generators."""
    p = in_chart_coordinates(e, seq)
    coords = chart_coordinates(seq)
    gens = scheme.charts[seq]
    comm = master_realization(seq)[1]
    assignment = {}
    for name, value in coords.items():
        idx = next(i for i, g in enumerate(comm) if g == value)
        assignment[name] = gens[idx]
    return nc_substitute(p, assignment, scheme.ring)


@dataclass
class SubschemeData:
    scheme: SoftScheme
    commutative: dict[AdmissibleSequence, tuple[LocalizedElement, ...]]
    lifted: dict[AdmissibleSequence, tuple[NCPolynomial, ...]]

    def generators(self, chain: AdmissibleChain | AdmissibleSequence):
        """``(commutative, noncommutative)`` ideal generators of a chain."""
        if isinstance(chain, AdmissibleSequence):
            chain = AdmissibleChain.of([chain])
        return (_union(self.commutative[s] for s in chain), _union(self.lifted[s] for s in chain))

    def verify(self, chains: Sequence[AdmissibleChain] | None = None) -> SchemeReport:
        chains = list(chains) if chains is not None else verification_chains(self.scheme.flag_type)
        report = SchemeReport(checks=("lift", "monotone"))
        for seq in self.commutative:
            for g, lg in zip(self.commutative[seq], self.lifted[seq]):
                if commutatize(lg) != g:
                    report.violations.append(Violation("lift", seq.label(), f"pi_0({lg}) != {g}"))
        for small, big in itertools.permutations(chains, 2):
            if not set(small.sequences) <= set(big.sequences):
                continue
            report.pairs_checked += 1
            cs, ns = self.generators(small)
            cb, nb = self.generators(big)
            if not set(cs) <= set(cb) or not set(ns) <= set(nb):
                report.violations.append(Violation("monotone", f"{small.label()} <= {big.label()}",
                                                   "ideal generators not inherited"))
        report.chains_checked = len(chains)
        return report


def build_closed_subscheme(s: SoftScheme, ideals: Mapping[AdmissibleSequence, Sequence[LocalizedElement]]
                           ) -> SubschemeData:
    """Lift per-chart ideal generators into the chart's noncommutative algebra."""
    comm, lifted = {}, {}
    for seq in s.charts:
        gens = tuple(ideals.get(seq, ()))
        comm[seq] = gens
        lifted[seq] = tuple(lift_to_chart(g, seq, s) for g in gens)
    return SubschemeData(s, comm, lifted)


def hypersurface_ideals(f: Polynomial, flag_type: FlagType) -> dict[AdmissibleSequence, list[LocalizedElement]]:
    """Per-chart ideal ``<Psi#_I(f)>`` of a hypersurface section of a Grassmannian."""
    return {seq: [plucker_pullback(f, seq)] for seq in enumerate_sequences(flag_type)}
