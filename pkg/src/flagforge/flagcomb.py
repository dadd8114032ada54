"""Admissible sequences, chains and the characteristic permutation.

All indices are 1-based. A flag type ``Fl(d_1, ..., d_r; n)`` is stored as
``FlagType(d=(d_1, ..., d_r), n=n)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property


class IncompatibleCharts(ValueError):
    """Raised when two chains or sequences belong to different flag types."""


@dataclass(frozen=True)
class FlagType:
    d: tuple[int, ...]
    n: int

    def __post_init__(self):
        d = tuple(int(x) for x in self.d)
        object.__setattr__(self, "d", d)
        if not d:
            raise ValueError("flag type needs at least one dimension")
        bounds = (0,) + d + (self.n,)
        if any(a >= b for a, b in zip(bounds, bounds[1:])):
            raise ValueError(f"need 0 < d_1 < ... < d_r < n, got d={d}, n={self.n}")

    @property
    def r(self) -> int:
        return len(self.d)

    @property
    def bounds(self) -> tuple[int, ...]:
        """``(d_0, d_1, ..., d_r, d_{r+1}) = (0, d_1, ..., d_r, n)``."""
        return (0,) + self.d + (self.n,)

    @property
    def rows(self) -> int:
        return self.d[-1]

    @property
    def is_grassmannian(self) -> bool:
        return self.r == 1

    def band_of_row(self, i: int) -> int:
        """1-based band index of 1-based row ``i``."""
        for j, dj in enumerate(self.d, start=1):
            if i <= dj:
                return j
        raise IndexError(i)

    def free_positions(self) -> list[tuple[int, int]]:
        """Row-major ``(i, j)`` positions of the chart variables."""
        return [(i, j) for i in range(1, self.rows + 1)
                for j in range(self.d[self.band_of_row(i) - 1] + 1, self.n + 1)]

    def dimension(self) -> int:
        """``d_r(n - d_r) + d_{r-1}(d_r - d_{r-1}) + ... + d_1(d_2 - d_1)``."""
        b = self.d + (self.n,)
        return sum(b[k] * (b[k + 1] - b[k]) for k in range(self.r))

    def label(self) -> str:
        ds = ",".join(map(str, self.d))
        return f"Gr({ds};{self.n})" if self.r == 1 else f"Fl({ds};{self.n})"

    def to_json(self) -> dict:
        return {"d": list(self.d), "n": self.n}


@dataclass(frozen=True, order=True)
class AdmissibleSequence:
    """A nested sequence ``I_1 < I_2 < ... < I_r`` of index sets.

    Ordering (``order=True``) compares ``key`` first, which is the
    concatenation of the sorted subsets, i.e. the canonical lexicographic order.
    """

    key: tuple[int, ...]
    flag_type: FlagType
    subsets: tuple[tuple[int, ...], ...]

    @classmethod
    def of(cls, flag_type: FlagType, subsets) -> "AdmissibleSequence":
        subs = tuple(tuple(sorted(int(x) for x in s)) for s in subsets)
        if len(subs) != flag_type.r:
            raise ValueError(f"expected {flag_type.r} subsets, got {len(subs)}")
        for j, s in enumerate(subs):
            if len(s) != flag_type.d[j] or len(set(s)) != len(s):
                raise ValueError(f"subset {s} must have {flag_type.d[j]} distinct elements")
            if s and (s[0] < 1 or s[-1] > flag_type.n):
                raise ValueError(f"subset {s} not inside 1..{flag_type.n}")
            if j and not set(subs[j - 1]) <= set(s):
                raise ValueError(f"subsets not nested: {subs[j - 1]} vs {s}")
        return cls(tuple(itertools.chain.from_iterable(subs)), flag_type, subs)

    @classmethod
    def reference(cls, flag_type: FlagType) -> "AdmissibleSequence":
        """The nested initial segments ``I_0``."""
        return cls.of(flag_type, [range(1, dj + 1) for dj in flag_type.d])

    def band_columns(self, j: int) -> tuple[int, ...]:
        """Sorted ``I_j - I_{j-1}`` for ``j = 1..r+1`` (``I_{r+1} = {1..n}``)."""
        ft = self.flag_type
        upper = self.subsets[j - 1] if j <= ft.r else tuple(range(1, ft.n + 1))
        lower = set(self.subsets[j - 2]) if j >= 2 else set()
        return tuple(c for c in upper if c not in lower)

    def label(self) -> str:
        return ";".join(",".join(map(str, s)) for s in self.subsets)

    def to_json(self) -> dict:
        return {"d": list(self.flag_type.d), "n": self.flag_type.n,
                "subsets": [list(s) for s in self.subsets]}

    def __repr__(self):
        return f"AdmissibleSequence({self.label()})"


def parse_sequence(flag_type: FlagType, text: str) -> AdmissibleSequence:
    """Parse ``"1,3"`` or ``"1;1,3"`` (semicolon separates subsets)."""
    parts = [p for p in text.replace(" ", "").split(";")]
    try:
        subsets = [[int(x) for x in p.split(",") if x] for p in parts]
    except ValueError as exc:
        raise ValueError(f"bad sequence {text!r}") from exc
    return AdmissibleSequence.of(flag_type, subsets)


@dataclass(frozen=True)
class AdmissibleChain:
    flag_type: FlagType
    sequences: tuple[AdmissibleSequence, ...]

    @classmethod
    def of(cls, sequences) -> "AdmissibleChain":
        seqs = tuple(sorted(set(sequences)))
        if not seqs:
            raise ValueError("an admissible chain must be nonempty")
        ft = seqs[0].flag_type
        if any(s.flag_type != ft for s in seqs):
            raise IncompatibleCharts("sequences of different flag types in one chain")
        return cls(ft, seqs)

    @classmethod
    def maximal(cls, flag_type: FlagType) -> "AdmissibleChain":
        return cls(flag_type, tuple(enumerate_sequences(flag_type)))

    def __len__(self):
        return len(self.sequences)

    def __iter__(self):
        return iter(self.sequences)

    def __contains__(self, seq):
        return seq in self.sequences

    def label(self) -> str:
        return "{" + " | ".join(s.label() for s in self.sequences) + "}"

    def to_json(self) -> dict:
        return {"sequences": [s.to_json() for s in self.sequences]}


@dataclass(frozen=True)
class CharacteristicPermutation:
    sequence: AdmissibleSequence
    map: tuple[int, ...]  # map[k-1] = chi(k)

    def __call__(self, k: int) -> int:
        return self.map[k - 1]

    @cached_property
    def inverse(self) -> tuple[int, ...]:
        inv = [0] * len(self.map)
        for k, v in enumerate(self.map, start=1):
            inv[v - 1] = k
        return tuple(inv)

    def is_identity(self) -> bool:
        return all(v == k for k, v in enumerate(self.map, start=1))

    def is_involution(self) -> bool:
        return all(self.map[v - 1] == k for k, v in enumerate(self.map, start=1))

    def permute_columns(self, rows):
        """Column ``k`` of ``rows`` becomes column ``chi(k)`` (``M -> M C_chi``)."""
        out = []
        for row in rows:
            new = [None] * len(row)
            for k, v in enumerate(self.map):
                new[v - 1] = row[k]
            out.append(new)
        return out

    def unpermute_columns(self, rows):
        """Inverse of :meth:`permute_columns`: column ``chi(k)`` goes back to ``k``."""
        return [[row[v - 1] for v in self.map] for row in rows]


def enumerate_sequences(flag_type: FlagType) -> list[AdmissibleSequence]:
    """All admissible sequences, canonically ordered."""
    out = []

    def grow(prefix, prev):
        j = len(prefix)
        if j == flag_type.r:
            out.append(AdmissibleSequence.of(flag_type, prefix))
            return
        rest = [c for c in range(1, flag_type.n + 1) if c not in prev]
        need = flag_type.d[j] - len(prev)
        for extra in itertools.combinations(rest, need):
            grow(prefix + [sorted(prev + extra)], tuple(sorted(prev + extra)))

    grow([], ())
    return sorted(out)


def sequence_count(flag_type: FlagType) -> int:
    """Closed-form multinomial ``n! / ((n-d_r)! ... (d_2-d_1)! d_1!)``."""
    b = flag_type.bounds
    denom = math.prod(math.factorial(b[k + 1] - b[k]) for k in range(len(b) - 1))
    return math.factorial(flag_type.n) // denom


def characteristic_map(seq: AdmissibleSequence) -> CharacteristicPermutation:
    ft = seq.flag_type
    b = ft.bounds
    image = []
    for j in range(1, ft.r + 2):
        cols = seq.band_columns(j)
        assert len(cols) == b[j] - b[j - 1]
        image.extend(cols)
    return CharacteristicPermutation(seq, tuple(image))


def chain_union(a: AdmissibleChain, b: AdmissibleChain) -> AdmissibleChain:
    if a.flag_type != b.flag_type:
        raise IncompatibleCharts(f"{a.flag_type.label()} vs {b.flag_type.label()}")
    return AdmissibleChain.of(a.sequences + b.sequences)


def is_subordinate(a: AdmissibleChain, b: AdmissibleChain) -> bool:
    """``U_a`` subordinate to ``U_b``, decided as reverse chain inclusion."""
    if a.flag_type != b.flag_type:
        raise IncompatibleCharts(f"{a.flag_type.label()} vs {b.flag_type.label()}")
    return set(b.sequences) <= set(a.sequences)


def distinguished_bands(flag_type: FlagType) -> list[tuple[tuple[int, int], int]]:
    """``[((d_{i-1}+1, d_i), d_i - d_{i-1}) for i = 1..r]``."""
    b = flag_type.bounds
    return [((b[i - 1] + 1, b[i]), b[i] - b[i - 1]) for i in range(1, flag_type.r + 1)]


def chains_up_to(flag_type: FlagType, size: int) -> list[AdmissibleChain]:
    """All chains with at most ``size`` members, smallest first."""
    seqs = enumerate_sequences(flag_type)
    return [AdmissibleChain(flag_type, combo)
            for k in range(1, size + 1) for combo in itertools.combinations(seqs, k)]
