"""Chart matrices over the master ring and the transition data between charts.

Conventions:

* ``C_chi`` acts on columns by ``M C_chi [:, chi(k)] = M[:, k]``, so the chart
  matrix ``M_I(x) = M_{I_0}(x) C_chi`` carries its identity blocks on the
  columns ``chi(1..d_r)``.
* The transition matrix ``C_{I;J}`` is the unique block-lower-triangular
  ``d_r x d_r`` matrix (w.r.t. the row bands) that brings the columns
  ``chi_J(1..d_r)`` of ``M_I`` to blocked form.  Its band-``j`` rows are the
  last ``d_j - d_{j-1}`` rows of the inverse of the leading ``d_j x d_j``
  block, whose determinant is a flag minor (rows ``1..d_j``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .exactring import (
    LocalizedElement,
    LocalizedRing,
    NotInvertible,
    Polynomial,
    VariableRegistry,
    substitute_localized,
    to_fraction,
)
from .flagcomb import (
    AdmissibleChain,
    AdmissibleSequence,
    FlagType,
    characteristic_map,
    distinguished_bands,
)


class OutOfChart(ValueError):
    """The flag does not lie in the requested chart (a chart minor vanishes)."""


class InvalidFlag(ValueError):
    """The numeric matrix is malformed or not of full row rank."""


class TransitionError(ArithmeticError):
    """A leading block failed to be invertible in the localized ring."""


# -- names ---------------------------------------------------------------------

def z_name(ft: FlagType, i: int, j: int) -> str:
    return f"z{i}{j}" if ft.n < 10 else f"z{i}_{j}"


def minor_name(ft: FlagType, band: int, cols: Sequence[int]) -> str:
    sep = "" if ft.n < 10 else ","
    return f"w{band}_{sep.join(map(str, cols))}"


# -- generic exact determinant ---------------------------------------------------

def _default_div(a, b):
    return a.divexact(b) if hasattr(a, "divexact") else a / b


def det(rows: Sequence[Sequence], one=None, div: Callable | None = None):
    """Exact determinant: cofactor expansion up to 3x3, Bareiss elimination above."""
    n = len(rows)
    if n == 0:
        if one is None:
            raise ValueError("need 'one' for an empty determinant")
        return one
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    if n == 3:
        a, b, c = rows
        return (a[0] * (b[1] * c[2] - b[2] * c[1])
                - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0]))
    div = div or _default_div
    m = [list(r) for r in rows]
    sign = 1
    prev = None
    for k in range(n - 1):
        if _is_zero(m[k][k]):
            swap = next((i for i in range(k + 1, n) if not _is_zero(m[i][k])), None)
            if swap is None:
                return m[k][k] * 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                v = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                m[i][j] = v if prev is None else div(v, prev)
        prev = m[k][k]
    return m[n - 1][n - 1] if sign > 0 else -m[n - 1][n - 1]


def _is_zero(x) -> bool:
    return x.is_zero() if hasattr(x, "is_zero") else x == 0


# -- RingMatrix ------------------------------------------------------------------

@dataclass(frozen=True)
class RingMatrix:
    entries: tuple[tuple[LocalizedElement, ...], ...]
    block_profile: FlagType | None = None

    @classmethod
    def of(cls, rows, block_profile=None) -> "RingMatrix":
        return cls(tuple(tuple(r) for r in rows), block_profile)

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def ring(self) -> LocalizedRing:
        return self.entries[0][0].ring

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> list[list]:
        """0-based row/column selection as a plain nested list."""
        return [[self.entries[i][j] for j in cols] for i in rows]

    def __matmul__(self, other: "RingMatrix") -> "RingMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        zero = self.ring.zero()
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    a = self.entries[i][k]
                    b = other.entries[k][j]
                    if a.is_zero() or b.is_zero():
                        continue
                    acc = acc + a * b
                row.append(acc)
            out.append(row)
        return RingMatrix.of(out, other.block_profile or self.block_profile)

    def __eq__(self, other):
        if not isinstance(other, RingMatrix):
            return NotImplemented
        return (self.rows, self.cols) == (other.rows, other.cols) and all(
            a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb))

    def __hash__(self):
        return hash((self.rows, self.cols))

    def determinant(self):
        return det(self.entries, one=self.ring.one())

    def __str__(self):
        return "\n".join("[" + ", ".join(str(x) for x in row) + "]" for row in self.entries)


def identity_matrix(ring: LocalizedRing, n: int) -> RingMatrix:
    return RingMatrix.of([[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)])


# -- the master ring -------------------------------------------------------------

def registry_for(ft: FlagType) -> VariableRegistry:
    return VariableRegistry(z_name(ft, i, j) for i, j in ft.free_positions())


def reference_polynomials(ft: FlagType, registry: VariableRegistry) -> list[list[Polynomial]]:
    rows = []
    for i in range(1, ft.rows + 1):
        band_end = ft.d[ft.band_of_row(i) - 1]
        row = []
        for j in range(1, ft.n + 1):
            if j > band_end:
                row.append(Polynomial.var(registry, z_name(ft, i, j)))
            else:
                row.append(Polynomial.constant(registry, 1 if i == j else 0))
        rows.append(row)
    return rows


def _positive(p: Polynomial) -> Polynomial:
    return -p if p.leading_term()[1] < 0 else p


def top_minors(rows: list[list], k_max: int, zero, one) -> dict[tuple[int, ...], object]:
    """All determinants of rows ``1..k`` on sorted 1-based column sets, ``k <= k_max``.

    Laplace expansion along the last row, memoised across column sets.
    """
    n = len(rows[0])
    table = {(): one}
    prev = {(): one}
    for k in range(1, k_max + 1):
        cur = {}
        row = rows[k - 1]
        for cols in itertools.combinations(range(1, n + 1), k):
            acc = zero
            for pos, c in enumerate(cols):
                entry = row[c - 1]
                if _is_zero(entry):
                    continue
                sub = prev[cols[:pos] + cols[pos + 1:]]
                if _is_zero(sub):
                    continue
                term = entry * sub
                acc = acc + term if (k - 1 - pos) % 2 == 0 else acc - term
            cur[cols] = acc
        table.update(cur)
        prev = cur
    return table


class MasterRing(LocalizedRing):
    """``Q[M_{I_0}(z)]`` localized at every nonconstant flag minor.

    A flag minor is ``det M_{I_0}(z)[rows 1..d_j, cols K]`` with ``|K| = d_j``;
    its id is ``(j, K)``.  Minors are sign-normalised (positive leading
    coefficient) and pruned of units and repeats, in lexicographic id order.
    """

    def __init__(self, ft: FlagType):
        self.flag_type = ft
        registry = registry_for(ft)
        super().__init__(registry, minor_source=self._build_minors)
        self.reference = reference_polynomials(ft, registry)
        self._ids: dict[str, tuple[int, tuple[int, ...]]] = {}
        self._aliases: dict[tuple[int, tuple[int, ...]], str | None] = {}

    def _build_minors(self):
        ft = self.flag_type
        reg = self.registry
        mins = top_minors(self.reference, ft.rows, Polynomial.zero(reg), Polynomial.constant(reg, 1))
        out: list[tuple[str, Polynomial]] = []
        seen: dict[Polynomial, str] = {}
        for j, dj in enumerate(ft.d, start=1):
            for cols in itertools.combinations(range(1, ft.n + 1), dj):
                p = mins[cols]
                if p.is_zero():
                    raise ArithmeticError(f"flag minor {j}:{cols} vanishes identically")
                if p.is_constant():
                    self._aliases[(j, cols)] = None
                    continue
                p = _positive(p)
                if p in seen:
                    self._aliases[(j, cols)] = seen[p]
                    continue
                name = minor_name(ft, j, cols)
                seen[p] = name
                self._ids[name] = (j, cols)
                self._aliases[(j, cols)] = name
                out.append((name, p))
        return out

    def minor_id(self, name: str) -> tuple[int, tuple[int, ...]]:
        self.minors  # noqa: B018 - force construction
        return self._ids[name]

    def lookup_minor(self, p: Polynomial) -> tuple[Fraction, str | None]:
        """Match a polynomial with ``c * minor`` (``None`` name for units)."""
        if p.is_zero():
            raise NotInvertible("zero is not a minor")
        if p.is_constant():
            return p.constant_value(), None
        q = _positive(p)
        for name, m in self.minors:
            if m == q:
                return (Fraction(1) if q is p else Fraction(-1)), name
        raise KeyError(f"{p} is not a registered minor")

    def reference_matrix(self) -> RingMatrix:
        return RingMatrix.of([[self.poly(p) for p in row] for row in self.reference], self.flag_type)


@lru_cache(maxsize=None)
def master_ring(ft: FlagType) -> MasterRing:
    return MasterRing(ft)


def reference_matrix(ft: FlagType) -> RingMatrix:
    """Blocked ``d_r x n`` matrix with identity diagonal blocks and free z's to the right."""
    return master_ring(ft).reference_matrix()


def distinguished_minor(m: RingMatrix, band_index: int, column_set: Sequence[int]):
    """Determinant of the square on row band ``band_index`` and the given 1-based columns."""
    ft = m.block_profile
    (lo, hi), size = distinguished_bands(ft)[band_index - 1]
    cols = sorted(column_set)
    if len(cols) != size or len(set(cols)) != size:
        raise ValueError(f"band {band_index} needs {size} distinct columns, got {column_set}")
    if cols[0] < 1 or cols[-1] > m.cols:
        raise ValueError("column out of range")
    return det(m.submatrix(range(lo - 1, hi), [c - 1 for c in cols]), one=m.ring.one())


def flag_minor(m: RingMatrix, j: int, column_set: Sequence[int]):
    """``det M^{K}``: rows ``1..d_j`` and the sorted 1-based columns ``K``, ``|K| = d_j``."""
    ft = m.block_profile
    cols = sorted(column_set)
    if len(cols) != ft.d[j - 1]:
        raise ValueError(f"need {ft.d[j - 1]} columns for level {j}")
    return det(m.submatrix(range(ft.d[j - 1]), [c - 1 for c in cols]), one=m.ring.one())


def chart_matrix(ft: FlagType, seq: AdmissibleSequence) -> RingMatrix:
    """``M_I(x) = M_{I_0}(x) C_chi`` with ``x`` named like the reference variables."""
    ref = master_ring(ft).reference_matrix()
    chi = characteristic_map(seq)
    return RingMatrix.of(chi.permute_columns(ref.entries), ft)


def _minor_as_element(ring: MasterRing, value: LocalizedElement) -> LocalizedElement:
    """Inverse of a determinant known to be a unit of the master ring."""
    try:
        return value.inverse()
    except NotInvertible as exc:
        raise TransitionError(f"leading block not invertible: {value}") from exc


def normalizing_frame(m: RingMatrix, seq: AdmissibleSequence, invert=None) -> list[list]:
    """Block-lower-triangular ``C`` such that ``C m`` is blocked on the columns ``chi(1..d_r)``."""
    ft = seq.flag_type
    chi = characteristic_map(seq)
    dr = ft.rows
    entries = m.entries
    a = [[entries[i][chi(k) - 1] for k in range(1, dr + 1)] for i in range(dr)]
    sample = entries[0][0]
    zero = sample * 0
    one = zero + 1
    invert = invert or (lambda x: x.inverse())
    c = [[zero] * dr for _ in range(dr)]
    b = ft.bounds
    for j in range(1, ft.r + 1):
        dj, dprev = b[j], b[j - 1]
        block = [row[:dj] for row in a[:dj]]
        d = det(block, one=one)
        dinv = invert(d)
        for r in range(dprev, dj):
            for col in range(dj):
                # inverse[r][col] = (-1)^{r+col} det(block without row col, col r) / det
                minor = [[block[i][k] for k in range(dj) if k != r]
                         for i in range(dj) if i != col]
                cof = det(minor, one=one)
                if (r + col) % 2:
                    cof = -cof
                c[r][col] = cof * dinv
    return c


def _matmul_rows(c: list[list], m: Sequence[Sequence]) -> list[list]:
    out = []
    for i in range(len(c)):
        row = []
        for j in range(len(m[0])):
            acc = None
            for k in range(len(m)):
                a, bb = c[i][k], m[k][j]
                if _is_zero(a) or _is_zero(bb):
                    continue
                acc = a * bb if acc is None else acc + a * bb
            row.append(acc if acc is not None else c[i][0] * 0)
        out.append(row)
    return out


def is_blocked_form(m: RingMatrix | Sequence[Sequence], seq: AdmissibleSequence) -> bool:
    """Identity diagonal blocks and zeros below on the columns ``chi(1..d_r)``."""
    ft = seq.flag_type
    entries = m.entries if isinstance(m, RingMatrix) else m
    chi = characteristic_map(seq)
    for i in range(1, ft.rows + 1):
        bi = ft.band_of_row(i)
        for k in range(1, ft.rows + 1):
            v = entries[i - 1][chi(k) - 1]
            bk = ft.band_of_row(k)
            if bk < bi or (bk == bi and k != i):
                if not _is_zero(v):
                    return False
            elif k == i and not (v == 1):
                return False
    return True


def block_lu_transition(seq_i: AdmissibleSequence, seq_j: AdmissibleSequence,
                        source: RingMatrix | None = None) -> tuple[RingMatrix, RingMatrix]:
    """``(C_{I;J}, C_{I;J} M)`` for ``M`` the master realization of ``I`` (or ``source``)."""
    if seq_i.flag_type != seq_j.flag_type:
        raise ValueError("sequences of different flag types")
    ft = seq_i.flag_type
    m = source if source is not None else master_realization(seq_i)[0]
    c = normalizing_frame(m, seq_j)
    result = RingMatrix.of(_matmul_rows(c, m.entries), ft)
    return RingMatrix.of(c, ft), result


@lru_cache(maxsize=None)
def master_realization(seq: AdmissibleSequence) -> tuple[RingMatrix, tuple[LocalizedElement, ...]]:
    """``C_{I_0;I} M_{I_0}(z)`` and its entries that are not 0 or 1, row-major."""
    ft = seq.flag_type
    ref = reference_matrix(ft)
    if characteristic_map(seq).is_identity():
        result = ref
    else:
        _, result = block_lu_transition(AdmissibleSequence.reference(ft), seq, source=ref)
    gens = tuple(e for row in result.entries for e in row
                 if not (e.is_constant() and e.constant_value() in (0, 1)))
    return result, gens


def coordinates_from_frame(m: Sequence[Sequence], seq: AdmissibleSequence) -> dict[str, object]:
    """Chart variables read off a blocked matrix: ``x_ab`` sits at column ``chi(b)``."""
    ft = seq.flag_type
    chi = characteristic_map(seq)
    return {z_name(ft, a, b): m[a - 1][chi(b) - 1] for a, b in ft.free_positions()}


@lru_cache(maxsize=None)
def chart_coordinates(seq: AdmissibleSequence) -> dict[str, LocalizedElement]:
    """Chart-``seq`` coordinates as master-ring elements (keyed by variable name)."""
    return coordinates_from_frame(master_realization(seq)[0].entries, seq)


@lru_cache(maxsize=None)
def transition_map(seq_i: AdmissibleSequence, seq_j: AdmissibleSequence) -> dict[str, LocalizedElement]:
    """``phi#_{IJ}``: chart-``J`` variables as functions of the chart-``I`` variables.

    Both variable sets reuse the reference names; the map is evaluated on the
    chart matrix ``M_I(x)`` inside the master ring.
    """
    ft = seq_i.flag_type
    m = chart_matrix(ft, seq_i)
    c = normalizing_frame(m, seq_j)
    return coordinates_from_frame(_matmul_rows(c, m.entries), seq_j)


def localization_set(to, frm: AdmissibleSequence | None = None) -> list[str]:
    """Pruned minor names ``S_{I;J,o}`` needed to localize chart ``frm`` onto ``to``."""
    seqs = list(to) if isinstance(to, AdmissibleChain) else [to]
    ft = seqs[0].flag_type
    frm = frm or AdmissibleSequence.reference(ft)
    ring = master_ring(ft)
    m = chart_matrix(ft, frm)
    found: set[str] = set()
    for seq in seqs:
        for j in range(1, ft.r + 1):
            d = flag_minor(m, j, seq.subsets[j - 1])
            if not d.is_polynomial():
                raise TransitionError("chart minor with a denominator")
            _, name = ring.lookup_minor(d.numerator)
            if name is not None:
                found.add(name)
    return [name for name in ring.minor_names if name in found]


def verify_cocycle(seq_i: AdmissibleSequence, seq_j: AdmissibleSequence,
                   seq_k: AdmissibleSequence) -> bool:
    """``phi#_{IJ} o phi#_{JK} == phi#_{IK}`` on every chart-``K`` variable."""
    ij = transition_map(seq_i, seq_j)
    jk = transition_map(seq_j, seq_k)
    ik = transition_map(seq_i, seq_k)
    ring = master_ring(seq_i.flag_type)
    return all(substitute_localized(jk[v], ij, ring) == ik[v] for v in ring.registry.names)


# -- numeric charts --------------------------------------------------------------

def _rank(rows: list[list[Fraction]]) -> int:
    m = [list(r) for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col] != 0:
                f = m[i][col] / m[rank][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def evaluate_chart_coordinates(m, seq: AdmissibleSequence) -> dict[str, Fraction]:
    """Exact chart-``seq`` coordinates of the flag spanned by the rows of ``m``."""
    ft = seq.flag_type
    rows = [[to_fraction(x) for x in r] for r in m]
    if len(rows) != ft.rows or any(len(r) != ft.n for r in rows):
        raise InvalidFlag(f"expected a {ft.rows}x{ft.n} matrix")
    if _rank(rows) != ft.rows:
        raise InvalidFlag("matrix is not of full row rank")
    for j in range(1, ft.r + 1):
        sub = [[rows[i][c - 1] for c in seq.subsets[j - 1]] for i in range(ft.d[j - 1])]
        if det(sub, one=Fraction(1)) == 0:
            raise OutOfChart(f"flag minor on {seq.subsets[j - 1]} vanishes")
    c = normalizing_frame(RingMatrix.of(rows, ft), seq, invert=lambda x: 1 / x)
    return coordinates_from_frame(_matmul_rows(c, rows), seq)


def numeric_reference(ft: FlagType, point) -> list[list[Fraction]]:
    """The reference matrix evaluated at a rational point ``{name: value}``."""
    reg = master_ring(ft).registry
    return [[p.evaluate(point) for p in row] for row in reference_polynomials(ft, reg)]
