"""Free algebra on the chart variables and the formal inverses of the minors.

Generators are numbered ``0 .. nz-1`` for the z-variables (registry order)
followed by ``nz .. nz+nw-1`` for the ``w_k`` (minor order), so every z sorts
before every w.  Words are tuples of generator numbers, compared deg-lex.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .exactring import (
    LocalizedElement,
    LocalizedRing,
    Polynomial,
    RegistryMismatch,
    to_fraction,
)

Word = tuple[int, ...]


def word_key(w: Word):
    return (len(w), w)


class LiftConvention(str, enum.Enum):
    INVERSE_FIRST = "inverse-first"
    INVERSE_LAST = "inverse-last"


class EqualityVerdict(str, enum.Enum):
    EQUAL = "Equal"
    DISTINCT = "Distinct"
    UNKNOWN = "Unknown"


class NCPolynomial:
    __slots__ = ("ring", "terms")

    def __init__(self, ring: LocalizedRing, terms: Mapping[Word, Fraction] | None = None):
        self.ring = ring
        self.terms = {tuple(w): to_fraction(c) for w, c in (terms or {}).items() if c}

    @classmethod
    def _raw(cls, ring, terms):
        p = cls.__new__(cls)
        p.ring = ring
        p.terms = terms
        return p

    @classmethod
    def constant(cls, ring, c):
        c = to_fraction(c)
        return cls._raw(ring, {(): c} if c else {})

    @classmethod
    def generator(cls, ring, name: str):
        return cls._raw(ring, {(generator_index(ring, name),): Fraction(1)})

    @classmethod
    def word(cls, ring, names: Sequence[str], coeff=1):
        c = to_fraction(coeff)
        return cls._raw(ring, {tuple(generator_index(ring, n) for n in names): c} if c else {})

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def sorted_terms(self, descending=True):
        return sorted(self.terms.items(), key=lambda t: word_key(t[0]), reverse=descending)

    def leading_term(self):
        w = max(self.terms, key=word_key)
        return w, self.terms[w]

    def _coerce(self, other):
        if isinstance(other, NCPolynomial):
            if other.ring is not self.ring:
                raise RegistryMismatch("free-algebra elements over different rings")
            return other
        if isinstance(other, (int, Fraction)):
            return NCPolynomial.constant(self.ring, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self.terms)
        for w, c in other.terms.items():
            s = t.get(w, 0) + c
            if s:
                t[w] = s
            else:
                t.pop(w, None)
        return NCPolynomial._raw(self.ring, t)

    __radd__ = __add__

    def __neg__(self):
        return NCPolynomial._raw(self.ring, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t: dict = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                s = t.get(w, 0) + c1 * c2
                if s:
                    t[w] = s
                else:
                    t.pop(w, None)
        return NCPolynomial._raw(self.ring, t)

    def __rmul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self

    def __pow__(self, k: int):
        result = NCPolynomial.constant(self.ring, 1)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = NCPolynomial.constant(self.ring, other)
        if not isinstance(other, NCPolynomial):
            return NotImplemented
        return self.ring is other.ring and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        names = generator_names(self.ring)
        parts = []
        for w, c in self.sorted_terms():
            body = "*".join(names[g] for g in w)
            a = abs(c)
            if not body:
                body = str(a)
            elif a != 1:
                body = f"{a}*{body}"
            parts.append(("-" if c < 0 else "+", body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"NCPolynomial({self})"


def generator_names(ring: LocalizedRing) -> tuple[str, ...]:
    return ring.registry.names + ring.minor_names


def generator_index(ring: LocalizedRing, name: str) -> int:
    nz = len(ring.registry)
    if name in ring.registry:
        return ring.registry.index(name)
    try:
        return nz + ring.minor_index[name]
    except KeyError:
        raise KeyError(f"unknown generator {name!r}") from None


def nc_arith(a: NCPolynomial, b: NCPolynomial, op: str) -> NCPolynomial:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def commutatize(a: NCPolynomial) -> LocalizedElement:
    """``pi_0``: forget the order of letters; ``w_k`` becomes ``1 / m_k``."""
    ring = a.ring
    nz = len(ring.registry)
    total = ring.zero()
    for w, c in a.terms.items():
        exp = [0] * nz
        den: dict[int, int] = {}
        for g in w:
            if g < nz:
                exp[g] += 1
            else:
                den[g - nz] = den.get(g - nz, 0) + 1
        total = total + LocalizedElement(ring, Polynomial._raw(ring.registry, {tuple(exp): c}), den)
    return total


def _monomial_word(exp: Sequence[int]) -> Word:
    return tuple(i for i, k in enumerate(exp) for _ in range(k))


def lift(e: LocalizedElement, convention: LiftConvention | str = LiftConvention.INVERSE_FIRST) -> NCPolynomial:
    """A preimage of ``e`` under ``pi_0`` with a fixed letter order per monomial.

    Numerator terms are first split so that monomial minors cancel termwise
    (``z14 - z23^-1 z13 z24`` rather than ``z23^-1 (z14 z23 - z13 z24)``);
    each term becomes ``w``-letters (ascending minor id) and ``z``-letters
    (ascending registry order), w's first or last according to ``convention``.
    """
    convention = LiftConvention(convention)
    ring = e.ring
    nz = len(ring.registry)
    terms: dict[Word, Fraction] = {}
    for c, exp, den in e.expanded_terms():
        ws = tuple(nz + k for k in sorted(den) for _ in range(den[k]))
        zs = _monomial_word(exp)
        w = ws + zs if convention is LiftConvention.INVERSE_FIRST else zs + ws
        s = terms.get(w, 0) + c
        if s:
            terms[w] = s
        else:
            terms.pop(w, None)
    return NCPolynomial._raw(ring, terms)


def lift_polynomial(p: Polynomial, ring: LocalizedRing) -> NCPolynomial:
    """Letters of each monomial in ascending registry order."""
    return NCPolynomial._raw(ring, {_monomial_word(e): c for e, c in p.terms.items()})


@dataclass(frozen=True)
class Rule:
    lhs: Word
    rhs: NCPolynomial
    minor: int
    side: str  # "left" for w_k m_k - 1, "right" for m_k w_k - 1


class RewriteSystem:
    """String rewriting from the relations ``w_k m_k - 1`` and ``m_k w_k - 1``."""

    def __init__(self, ring: LocalizedRing, rules: Sequence[Rule]):
        self.ring = ring
        self.rules = tuple(rules)
        self._by_first: dict[int, list[tuple[int, Rule]]] = {}
        for idx, rule in enumerate(self.rules):
            self._by_first.setdefault(rule.lhs[0], []).append((idx, rule))

    def __len__(self):
        return len(self.rules)

    def find(self, w: Word):
        """Leftmost match; ties at one position go to the lowest rule id."""
        for i, g in enumerate(w):
            for _, rule in self._by_first.get(g, ()):
                n = len(rule.lhs)
                if w[i:i + n] == rule.lhs:
                    return i, rule
        return None


def localization_rules(ring: LocalizedRing, minors: Sequence[int | str] | None = None) -> RewriteSystem:
    nz = len(ring.registry)
    if minors is None:
        ks = list(range(len(ring.minors)))
    else:
        ks = sorted(k if isinstance(k, int) else ring.minor_index[k] for k in minors)
    rules = []
    for k in ks:
        m = lift_polynomial(ring.minor(k), ring)
        lw, lc = m.leading_term()
        rest = m - NCPolynomial._raw(ring, {lw: lc})
        w = NCPolynomial._raw(ring, {(nz + k,): Fraction(1)})
        one = NCPolynomial.constant(ring, 1)
        # w m - 1 = 0  =>  w.lw = (1 - w.rest) / lc
        left = (one - w * rest) * NCPolynomial.constant(ring, 1 / lc)
        right = (one - rest * w) * NCPolynomial.constant(ring, 1 / lc)
        rules.append(Rule((nz + k,) + lw, left, k, "left"))
        rules.append(Rule(lw + (nz + k,), right, k, "right"))
    return RewriteSystem(ring, rules)


class ReductionLimit(RuntimeError):
    pass


def reduce(a: NCPolynomial, system: RewriteSystem, max_steps: int = 1_000_000) -> NCPolynomial:
    """Normal form w.r.t. ``system``; each step replaces a word by deg-lex smaller ones."""
    todo = dict(a.terms)
    out: dict[Word, Fraction] = {}
    steps = 0
    while todo:
        w = max(todo, key=word_key)
        c = todo.pop(w)
        hit = system.find(w)
        if hit is None:
            s = out.get(w, 0) + c
            if s:
                out[w] = s
            else:
                out.pop(w, None)
            continue
        steps += 1
        if steps > max_steps:
            raise ReductionLimit(f"more than {max_steps} rewrite steps")
        i, rule = hit
        prefix, suffix = w[:i], w[i + len(rule.lhs):]
        for rw, rc in rule.rhs.terms.items():
            nw = prefix + rw + suffix
            s = todo.get(nw, 0) + c * rc
            if s:
                todo[nw] = s
            else:
                todo.pop(nw, None)
    return NCPolynomial._raw(a.ring, out)


def nc_equal(a: NCPolynomial, b: NCPolynomial, system: RewriteSystem) -> EqualityVerdict:
    """Sound three-valued equality in the localized free algebra."""
    diff = a - b
    if reduce(diff, system).is_zero():
        return EqualityVerdict.EQUAL
    if not commutatize(diff).is_zero():
        return EqualityVerdict.DISTINCT
    return EqualityVerdict.UNKNOWN


def nc_substitute(p: Polynomial, assignment: Mapping[str, NCPolynomial], ring: LocalizedRing) -> NCPolynomial:
    """Replace each variable of ``p`` (letters in ascending registry order) by an NC element."""
    names = p.registry.names
    total = NCPolynomial.constant(ring, 0)
    for e, c in p.sorted_terms():
        term = NCPolynomial.constant(ring, c)
        for i, k in enumerate(e):
            for _ in range(k):
                term = term * assignment[names[i]]
        total = total + term
    return total


def word_to_string(ring: LocalizedRing, w: Word) -> str:
    names = generator_names(ring)
    return "*".join(names[g] for g in w)

