"""Invariant sweep over one flag type, used by ``flagforge verify --all``."""

from __future__ import annotations

import itertools
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .exactring import DenominatorVanishes
from .flagcomb import (
    AdmissibleSequence,
    FlagType,
    characteristic_map,
    enumerate_sequences,
    sequence_count,
)
from .flagmatrix import (
    OutOfChart,
    chart_coordinates,
    evaluate_chart_coordinates,
    is_blocked_form,
    master_realization,
    master_ring,
    transition_map,
    verify_cocycle,
)
from .freealg import (
    EqualityVerdict,
    LiftConvention,
    NCPolynomial,
    commutatize,
    generator_names,
    lift,
    localization_rules,
    nc_equal,
    reduce,
)
from .softscheme import (
    build_closed_subscheme,
    build_soft_scheme,
    fermat_quartic,
    hypersurface_ideals,
    plucker_pullback,
    plucker_quadric,
    plucker_tuple,
    soften_union,
    softens,
    verify_soft_scheme,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int = 0
    failures: list[str] = field(default_factory=list)

    def to_json(self):
        return {"check": self.name, "passed": self.passed, "cases": self.cases,
                "failures": self.failures[:20]}


def thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("FLAGFORGE_THREADS", "1")))
    except ValueError:
        return 1


def _result(name: str, cases: int, failures: list[str]) -> CheckResult:
    return CheckResult(name, not failures, cases, failures)


def check_counting(ft: FlagType) -> CheckResult:
    seqs = enumerate_sequences(ft)
    fails = []
    if len(seqs) != sequence_count(ft):
        fails.append(f"enumerated {len(seqs)} sequences, formula gives {sequence_count(ft)}")
    if seqs != sorted(seqs) or len(set(seqs)) != len(seqs):
        fails.append("enumeration is not strictly increasing")
    nvars = len(master_ring(ft).registry)
    if nvars != ft.dimension():
        fails.append(f"{nvars} reference variables, dimension {ft.dimension()}")
    return _result("counting", len(seqs), fails)


def check_characteristic_maps(ft: FlagType) -> CheckResult:
    fails = []
    seqs = enumerate_sequences(ft)
    for seq in seqs:
        chi = characteristic_map(seq)
        if sorted(chi.map) != list(range(1, ft.n + 1)):
            fails.append(f"{seq.label()}: not a permutation")
            continue
        for j in range(1, ft.r + 1):
            if set(chi(k) for k in range(1, ft.d[j - 1] + 1)) != set(seq.subsets[j - 1]):
                fails.append(f"{seq.label()}: initial segment {j} not sent to I_{j}")
        for lo, hi in zip((0,) + ft.bounds[:-1], ft.bounds):
            band = [chi(k) for k in range(lo + 1, hi + 1)]
            if band != sorted(band):
                fails.append(f"{seq.label()}: not order preserving on ({lo},{hi}]")
        inv = chi.inverse
        if any(inv[chi(k) - 1] != k for k in range(1, ft.n + 1)):
            fails.append(f"{seq.label()}: inverse round trip fails")
    return _result("characteristic-map", len(seqs), fails)


def check_blocked_form(ft: FlagType) -> CheckResult:
    seqs = enumerate_sequences(ft)
    fails = [s.label() for s in seqs if not is_blocked_form(master_realization(s)[0], s)]
    return _result("blocked-form", len(seqs), fails)


def check_cocycle(ft: FlagType, exhaustive: bool = True, workers: int = 1) -> CheckResult:
    seqs = enumerate_sequences(ft)
    if exhaustive:
        triples = list(itertools.product(seqs, repeat=3))
    else:
        triples = [(seqs[0], j, k) for j in seqs for k in seqs]
    # warm the transition cache on one thread so workers only read it
    for i, j in itertools.product(seqs, repeat=2):
        transition_map(i, j)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            oks = list(pool.map(lambda t: verify_cocycle(*t), triples))
    else:
        oks = [verify_cocycle(*t) for t in triples]
    fails = [" -> ".join(s.label() for s in t) for t, ok in zip(triples, oks) if not ok]
    return _result("cocycle", len(triples), fails)


def random_flag(ft: FlagType, rng: random.Random, bound: int = 9) -> list[list[Fraction]]:
    return [[Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) for _ in range(ft.n)]
            for _ in range(ft.rows)]


def check_numeric_roundtrip(ft: FlagType, samples: int = 20, seed: int = 0,
                            require_all_charts: bool = False) -> CheckResult:
    """Numeric chart coordinates against symbolic ones, and transport along transition maps.

    With ``require_all_charts`` only flags lying in every chart are used.
    """
    rng = random.Random(seed)
    seqs = enumerate_sequences(ft)
    ref = AdmissibleSequence.reference(ft)
    fails: list[str] = []
    cases = 0
    used = 0
    while used < samples:
        m = random_flag(ft, rng)
        coords = {}
        for seq in seqs:
            try:
                coords[seq] = evaluate_chart_coordinates(m, seq)
            except OutOfChart:
                pass
        if ref not in coords or (require_all_charts and len(coords) != len(seqs)):
            continue
        used += 1
        point = coords[ref]
        for seq, numeric in coords.items():
            cases += 1
            sym = chart_coordinates(seq)
            try:
                if any(sym[v].evaluate(point) != numeric[v] for v in numeric):
                    fails.append(f"sample {used}: chart {seq.label()} disagrees")
            except DenominatorVanishes as exc:
                fails.append(f"sample {used}: chart {seq.label()}: {exc}")
        for si, sj in itertools.product(coords, repeat=2):
            cases += 1
            tmap = transition_map(si, sj)
            try:
                if any(tmap[v].evaluate(coords[si]) != coords[sj][v] for v in coords[sj]):
                    fails.append(f"sample {used}: transport {si.label()} -> {sj.label()} disagrees")
            except DenominatorVanishes as exc:
                fails.append(f"sample {used}: transport {si.label()} -> {sj.label()}: {exc}")
    return _result("numeric-roundtrip", cases, fails)


def check_lift_section(ft: FlagType) -> CheckResult:
    fails = []
    cases = 0
    for seq in enumerate_sequences(ft):
        for g in master_realization(seq)[1]:
            for conv in LiftConvention:
                cases += 1
                if commutatize(lift(g, conv)) != g:
                    fails.append(f"{seq.label()}: {g} ({conv.value})")
    return _result("lift-section", cases, fails)


def check_rewrite_relations(ft: FlagType) -> CheckResult:
    ring = master_ring(ft)
    system = localization_rules(ring)
    nz = len(ring.registry)
    fails = []
    for k, name in enumerate(ring.minor_names):
        w = NCPolynomial._raw(ring, {(nz + k,): Fraction(1)})
        m = lift(ring.minor_element(k))
        for label, prod in (("w*m", w * m), ("m*w", m * w)):
            if reduce(prod, system) != 1:
                fails.append(f"{label} for {name}")
    return _result("rewrite-relations", 2 * len(ring.minor_names), fails)


def check_nc_equal_soundness(ft: FlagType) -> CheckResult:
    """Commutators never reduce to Equal; lifts of equal elements under both orders are not Distinct.

    A variable and the inverse of that same variable do commute, so such pairs are skipped.
    """
    ring = master_ring(ft)
    system = localization_rules(ring)
    gens = [NCPolynomial.generator(ring, n) for n in generator_names(ring)]
    fails = []
    cases = 0
    for a, b in itertools.combinations(gens, 2):
        if commutatize(a) * commutatize(b) == 1:
            continue
        cases += 1
        if nc_equal(a * b, b * a, system) is EqualityVerdict.EQUAL:
            fails.append(f"[{a}, {b}] judged Equal")
    for seq in enumerate_sequences(ft):
        for g in master_realization(seq)[1]:
            cases += 1
            v = nc_equal(lift(g, LiftConvention.INVERSE_FIRST), lift(g, LiftConvention.INVERSE_LAST), system)
            if v is EqualityVerdict.DISTINCT:
                fails.append(f"two lifts of {g} judged Distinct")
    return _result("nc-equal-soundness", cases, fails)


def check_soft_scheme(ft: FlagType) -> CheckResult:
    fails = []
    schemes = {}
    for conv in LiftConvention:
        schemes[conv] = build_soft_scheme(ft, conv)
        report = verify_soft_scheme(schemes[conv])
        fails += [f"{conv.value}: {v.check} at {v.chain}: {v.detail}" for v in report.violations]
    union = soften_union(*schemes.values())
    report = verify_soft_scheme(union)
    fails += [f"union: {v.check} at {v.chain}: {v.detail}" for v in report.violations]
    for conv, s in schemes.items():
        if not softens(union, s):
            fails.append(f"union does not soften {conv.value}")
    return _result("soft-scheme", 3, fails)


def check_plucker(ft: FlagType) -> CheckResult:
    fails = []
    seqs = enumerate_sequences(ft)
    for seq in seqs:
        tup = plucker_tuple(seq)
        own = tup[[s.subsets[-1] for s in seqs].index(seq.subsets[-1])]
        if own != 1:
            fails.append(f"{seq.label()}: own Pluecker coordinate is {own}")
        if ft == FlagType((2,), 4) and not plucker_pullback(plucker_quadric(ft), seq).is_zero():
            fails.append(f"{seq.label()}: quadric does not vanish")
    return _result("plucker", len(seqs), fails)


def check_subscheme(ft: FlagType) -> CheckResult:
    s = build_soft_scheme(ft)
    data = build_closed_subscheme(s, hypersurface_ideals(fermat_quartic(ft), ft))
    report = data.verify()
    fails = [f"{v.check} at {v.chain}: {v.detail}" for v in report.violations]
    fails += [f"{seq.label()}: zero generator" for seq, gens in data.commutative.items() if any(g.is_zero() for g in gens)]
    return _result("subscheme", len(data.commutative), fails)


def sweep_checks(ft: FlagType, exhaustive: bool = True, workers: int = 1) -> list[tuple[str, Callable[[], CheckResult]]]:
    checks: list[tuple[str, Callable[[], CheckResult]]] = [
        ("counting", lambda: check_counting(ft)),
        ("characteristic-map", lambda: check_characteristic_maps(ft)),
        ("blocked-form", lambda: check_blocked_form(ft)),
        ("cocycle", lambda: check_cocycle(ft, exhaustive, workers)),
        ("numeric-roundtrip", lambda: check_numeric_roundtrip(ft)),
        ("lift-section", lambda: check_lift_section(ft)),
        ("rewrite-relations", lambda: check_rewrite_relations(ft)),
        ("nc-equal-soundness", lambda: check_nc_equal_soundness(ft)),
        ("soft-scheme", lambda: check_soft_scheme(ft)),
    ]
    if ft.is_grassmannian:
        checks += [("plucker", lambda: check_plucker(ft)), ("subscheme", lambda: check_subscheme(ft))]
    return checks


def run_sweep(ft: FlagType, exhaustive: bool = True, workers: int | None = None) -> list[CheckResult]:
    """Run every check; results come back in a fixed order whatever the thread count."""
    workers = workers or thread_cap()
    checks = sweep_checks(ft, exhaustive, workers)
    # the master ring is built lazily; do it once before any fan-out
    master_ring(ft).minors
    results = []
    for name, fn in checks:
        try:
            results.append(fn())
        except Exception as exc:  # a crash is a failed check, not a crashed sweep
            results.append(CheckResult(name, False, 0, [f"{type(exc).__name__}: {exc}"]))
    return results
