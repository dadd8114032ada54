"""Exact sparse polynomials over Q and their localizations at a finite set of minors.

A :class:`Polynomial` is a dict from exponent tuples (over the z-variables of a
:class:`VariableRegistry`) to :class:`fractions.Fraction` coefficients.

A :class:`LocalizedElement` is ``numerator / prod(m_k ** e_k)`` where every
``m_k`` is a polynomial registered in a :class:`LocalizedRing`.  Denominators
are kept as formal multisets of minor indices and are never expanded except
for cross-multiplication.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping


class RegistryMismatch(ValueError):
    pass


class NotDivisible(ArithmeticError):
    pass


class NotInvertible(ArithmeticError):
    pass


class DenominatorVanishes(ZeroDivisionError):
    pass


class MissingAssignment(KeyError):
    pass


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


class VariableRegistry:
    """Ordered, immutable table of commuting variable names.

    ``names`` are the polynomial variables; ``inverse_names`` label the formal
    inverses ``w_k`` (they never appear in exponent vectors).
    """

    def __init__(self, names: Iterable[str], inverse_names: Iterable[str] = ()):
        self.names = tuple(names)
        self.inverse_names = tuple(inverse_names)
        allnames = self.names + self.inverse_names
        if len(set(allnames)) != len(allnames):
            raise ValueError("variable names must be unique")
        self._index = {n: i for i, n in enumerate(self.names)}

    def __len__(self):
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        return (isinstance(other, VariableRegistry) and self.names == other.names
                and self.inverse_names == other.inverse_names)

    def __hash__(self):
        return hash((self.names, self.inverse_names))

    def __repr__(self):
        return f"VariableRegistry({', '.join(self.names)})"


def term_key(exp: tuple[int, ...]):
    """Graded lex with later registry variables more significant (z13 < z14 < ...)."""
    return (sum(exp), exp[::-1])


class Polynomial:
    __slots__ = ("registry", "terms", "_hash")

    def __init__(self, registry: VariableRegistry, terms: Mapping[tuple, Fraction] | None = None):
        self.registry = registry
        self.terms = {}
        if terms:
            for e, c in terms.items():
                if c:
                    self.terms[tuple(e)] = to_fraction(c)
        self._hash = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def _raw(cls, registry, terms):
        p = cls.__new__(cls)
        p.registry = registry
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls, registry):
        return cls._raw(registry, {})

    @classmethod
    def constant(cls, registry, c):
        c = to_fraction(c)
        return cls._raw(registry, {(0,) * len(registry): c} if c else {})

    @classmethod
    def var(cls, registry, name: str, power: int = 1):
        e = [0] * len(registry)
        e[registry.index(name)] = power
        return cls._raw(registry, {tuple(e): Fraction(1)})

    @classmethod
    def monomial(cls, registry, powers: Mapping[str, int], coeff=1):
        e = [0] * len(registry)
        for name, k in powers.items():
            e[registry.index(name)] += k
        c = to_fraction(coeff)
        return cls._raw(registry, {tuple(e): c} if c else {})

    # -- queries -----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and not any(next(iter(self.terms))))

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * len(self.registry), Fraction(0))

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def sorted_terms(self, descending: bool = True):
        return sorted(self.terms.items(), key=lambda t: term_key(t[0]), reverse=descending)

    def leading_term(self):
        e = max(self.terms, key=term_key)
        return e, self.terms[e]

    def variables(self) -> set[str]:
        used = set()
        for e in self.terms:
            used.update(self.registry.names[i] for i, k in enumerate(e) if k)
        return used

    # -- arithmetic ----------------------------------------------------------
    def _check(self, other):
        if self.registry is not other.registry and self.registry != other.registry:
            raise RegistryMismatch("polynomials over different registries")

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(self.registry, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = dict(self.terms)
        for e, c in other.terms.items():
            s = t.get(e, 0) + c
            if s:
                t[e] = s
            else:
                t.pop(e, None)
        return Polynomial._raw(self.registry, t)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self.registry, {e: -c for e, c in self.terms.items()})

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
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = t.get(e, 0) + c1 * c2
                if s:
                    t[e] = s
                else:
                    t.pop(e, None)
        return Polynomial._raw(self.registry, t)

    __rmul__ = __mul__

    def scale(self, c) -> "Polynomial":
        c = to_fraction(c)
        if not c:
            return Polynomial.zero(self.registry)
        return Polynomial._raw(self.registry, {e: v * c for e, v in self.terms.items()})

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial.constant(self.registry, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def divexact(self, b: "Polynomial") -> "Polynomial":
        """Return ``q`` with ``self == b * q``; raise :class:`NotDivisible` otherwise."""
        self._check(b)
        if b.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        if self.is_zero():
            return Polynomial.zero(self.registry)
        lb, cb = b.leading_term()
        rem = dict(self.terms)
        q: dict = {}
        while rem:
            le = max(rem, key=term_key)
            diff = tuple(x - y for x, y in zip(le, lb))
            if any(x < 0 for x in diff):
                raise NotDivisible
            qc = rem[le] / cb
            q[diff] = qc
            for e, c in b.terms.items():
                m = tuple(x + y for x, y in zip(e, diff))
                s = rem.get(m, 0) - qc * c
                if s:
                    rem[m] = s
                else:
                    rem.pop(m, None)
        return Polynomial._raw(self.registry, q)

    def divides(self, a: "Polynomial") -> bool:
        try:
            a.divexact(self)
        except NotDivisible:
            return False
        return True

    # -- evaluation ----------------------------------------------------------
    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        vals = []
        for name in self.registry.names:
            vals.append(point.get(name))
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for i, k in enumerate(e):
                if k:
                    if vals[i] is None:
                        raise MissingAssignment(self.registry.names[i])
                    v *= to_fraction(vals[i]) ** k
            total += v
        return total

    # -- comparison / display ------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Polynomial.constant(self.registry, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.registry == other.registry and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __str__(self):
        return format_terms(self.registry.names, self.sorted_terms())

    def __repr__(self):
        return f"Polynomial({self})"


def format_monomial(names, e) -> str:
    parts = []
    for i, k in enumerate(e):
        if k == 1:
            parts.append(names[i])
        elif k:
            parts.append(f"{names[i]}^{k}")
    return "*".join(parts)


def format_terms(names, terms) -> str:
    if not terms:
        return "0"
    out = []
    for e, c in terms:
        mono = format_monomial(names, e)
        sign = "-" if c < 0 else "+"
        a = abs(c)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        out.append((sign, body))
    s = ("-" if out[0][0] == "-" else "") + out[0][1]
    for sign, body in out[1:]:
        s += f" {sign} {body}"
    return s


def poly_arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def poly_divexact(a: Polynomial, b: Polynomial) -> Polynomial | None:
    """Exact quotient or ``None`` when ``b`` does not divide ``a``."""
    try:
        return a.divexact(b)
    except NotDivisible:
        return None


class LocalizedRing:
    """A polynomial ring localized at finitely many registered polynomials.

    ``minor_source`` is called once (lazily, thread-safe) and must return a
    list of ``(name, Polynomial)``; names become ``registry.inverse_names``
    order.  The multiplicative set is generated by those polynomials.
    """

    def __init__(self, registry: VariableRegistry,
                 minor_source: Callable[[], list[tuple[str, Polynomial]]] | None = None,
                 minors: list[tuple[str, Polynomial]] | None = None):
        self.registry = registry
        self._minor_source = minor_source
        self._minors = minors
        self._lock = threading.Lock()

    @property
    def minors(self) -> list[tuple[str, Polynomial]]:
        if self._minors is None:
            with self._lock:
                if self._minors is None:
                    self._minors = list(self._minor_source()) if self._minor_source else []
        return self._minors

    @cached_property
    def minor_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.minors)

    @cached_property
    def minor_index(self) -> dict[str, int]:
        return {name: k for k, (name, _) in enumerate(self.minors)}

    def minor(self, k: int) -> Polynomial:
        return self.minors[k][1]

    @cached_property
    def hash_point(self) -> dict[str, Fraction]:
        """A fixed rational point at which no registered minor vanishes."""
        primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71]
        for shift in range(50):
            pt = {name: Fraction(primes[(i + shift) % len(primes)] + shift, 1 + (i % 3))
                  for i, name in enumerate(self.registry.names)}
            if all(m.evaluate(pt) != 0 for _, m in self.minors):
                return pt
        raise RuntimeError("no hash point found")

    # -- element constructors ----------------------------------------------
    def zero(self):
        return LocalizedElement(self, Polynomial.zero(self.registry))

    def one(self):
        return LocalizedElement(self, Polynomial.constant(self.registry, 1))

    def const(self, c):
        return LocalizedElement(self, Polynomial.constant(self.registry, c))

    def var(self, name: str):
        return LocalizedElement(self, Polynomial.var(self.registry, name))

    def poly(self, p: Polynomial):
        return LocalizedElement(self, p)

    def inverse_of_minor(self, key, power: int = 1):
        k = key if isinstance(key, int) else self.minor_index[key]
        return LocalizedElement(self, Polynomial.constant(self.registry, 1), {k: power})

    def minor_element(self, key):
        k = key if isinstance(key, int) else self.minor_index[key]
        return LocalizedElement(self, self.minor(k))

    def factor_unit(self, p: Polynomial) -> tuple[Fraction, dict[int, int]] | None:
        """Write ``p = c * prod(m_k ** e_k)`` by trial division, or ``None``."""
        if p.is_zero():
            return None
        exps: dict[int, int] = {}
        rest = p
        progress = True
        while not rest.is_constant() and progress:
            progress = False
            for k, (_, m) in enumerate(self.minors):
                if m.degree() > rest.degree():
                    continue
                try:
                    rest = rest.divexact(m)
                except NotDivisible:
                    continue
                exps[k] = exps.get(k, 0) + 1
                progress = True
                break
        if not rest.is_constant():
            return None
        return rest.constant_value(), exps


class LocalizedElement:
    """Immutable element ``numerator / prod(minor_k ** e_k)`` of a :class:`LocalizedRing`."""

    __slots__ = ("ring", "numerator", "den", "_hash")

    def __init__(self, ring: LocalizedRing, numerator: Polynomial, den: Mapping[int, int] | None = None,
                 normalize: bool = True):
        self.ring = ring
        self.numerator = numerator
        d = {k: e for k, e in (den or {}).items() if e}
        if any(e < 0 for e in d.values()):
            raise ValueError("negative denominator exponent")
        self.den = d
        self._hash = None
        if normalize:
            self._normalize()

    def _normalize(self):
        if self.numerator.is_zero():
            self.den = {}
            return
        num = self.numerator
        den = dict(self.den)
        for k in sorted(den):
            m = self.ring.minor(k)
            while den[k]:
                try:
                    num = num.divexact(m)
                except NotDivisible:
                    break
                den[k] -= 1
        self.numerator = num
        self.den = {k: e for k, e in sorted(den.items()) if e}

    # -- helpers -------------------------------------------------------------
    def _check(self, other):
        if self.ring is not other.ring:
            raise RegistryMismatch("elements of different localized rings")

    def _coerce(self, other):
        if isinstance(other, LocalizedElement):
            self._check(other)
            return other
        if isinstance(other, Polynomial):
            return LocalizedElement(self.ring, other)
        if isinstance(other, (int, Fraction)):
            return self.ring.const(other)
        return NotImplemented

    def den_poly(self, den: Mapping[int, int] | None = None) -> Polynomial:
        den = self.den if den is None else den
        p = Polynomial.constant(self.ring.registry, 1)
        for k, e in den.items():
            p = p * self.ring.minor(k) ** e
        return p

    def is_zero(self):
        return self.numerator.is_zero()

    def is_polynomial(self):
        return not self.den

    def is_constant(self):
        return not self.den and self.numerator.is_constant()

    def constant_value(self) -> Fraction:
        return self.numerator.constant_value()

    # -- arithmetic ------------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.den and not other.den:
            return LocalizedElement(self.ring, self.numerator + other.numerator, normalize=False)
        lcm = dict(self.den)
        for k, e in other.den.items():
            lcm[k] = max(lcm.get(k, 0), e)
        a = self.numerator * self.den_poly({k: e - self.den.get(k, 0) for k, e in lcm.items()})
        b = other.numerator * self.den_poly({k: e - other.den.get(k, 0) for k, e in lcm.items()})
        return LocalizedElement(self.ring, a + b, lcm)

    __radd__ = __add__

    def __neg__(self):
        return LocalizedElement(self.ring, -self.numerator, self.den, normalize=False)

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
        den = dict(self.den)
        for k, e in other.den.items():
            den[k] = den.get(k, 0) + e
        return LocalizedElement(self.ring, self.numerator * other.numerator, den)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.ring.one()
        for _ in range(k):
            result = result * self
        return result

    def inverse(self) -> "LocalizedElement":
        """Inverse in the ring; the numerator must factor as a constant times minors."""
        f = self.ring.factor_unit(self.numerator)
        if f is None:
            raise NotInvertible(f"{self} is not a unit of the localized ring")
        c, exps = f
        return LocalizedElement(self.ring, self.den_poly().scale(1 / c), exps)

    def divexact(self, other: "LocalizedElement") -> "LocalizedElement":
        """``self / other`` when the quotient exists in the ring."""
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero")
        num = self.numerator * other.den_poly()
        try:
            q = num.divexact(other.numerator)
        except NotDivisible:
            return self * other.inverse()
        return LocalizedElement(self.ring, q, self.den)

    # -- comparison ------------------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Polynomial)):
            other = self._coerce(other)
        if not isinstance(other, LocalizedElement):
            return NotImplemented
        self._check(other)
        if self.den == other.den:
            return self.numerator == other.numerator
        keys = set(self.den) | set(other.den)
        common = {k: min(self.den.get(k, 0), other.den.get(k, 0)) for k in keys}
        lhs = self.numerator * self.den_poly({k: other.den.get(k, 0) - common[k] for k in keys})
        rhs = other.numerator * self.den_poly({k: self.den.get(k, 0) - common[k] for k in keys})
        return lhs == rhs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.evaluate(self.ring.hash_point))
        return self._hash

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        num = self.numerator.evaluate(point)
        d = Fraction(1)
        for k, e in self.den.items():
            v = self.ring.minor(k).evaluate(point)
            if v == 0:
                raise DenominatorVanishes(f"minor {self.ring.minor_names[k]} vanishes")
            d *= v ** e
        return num / d

    # -- display ---------------------------------------------------------------
    def expanded_terms(self):
        """Split into ``(coeff, exponent, den)`` terms, cancelling monomial minors termwise.

        Every numerator term gets its own denominator; a minor that is a single
        monomial is divided out of the term as far as it goes.  Summing the
        returned terms gives back ``self`` exactly.
        """
        out = []
        monomial_minors = {}
        for k in self.den:
            m = self.ring.minor(k)
            if m.is_monomial():
                monomial_minors[k] = m.leading_term()
        for e, c in self.numerator.sorted_terms():
            den = dict(self.den)
            e = list(e)
            for k, (me, mc) in monomial_minors.items():
                while den[k] and all(a >= b for a, b in zip(e, me)):
                    e = [a - b for a, b in zip(e, me)]
                    c = c / mc
                    den[k] -= 1
            out.append((c, tuple(e), {k: v for k, v in den.items() if v}))
        return out

    def __str__(self):
        if self.is_zero():
            return "0"
        names = self.ring.registry.names
        parts = []
        for c, e, den in self.expanded_terms():
            factors = []
            for k, p in sorted(den.items()):
                m = self.ring.minor(k)
                base = str(m) if m.is_monomial() else f"({m})"
                factors.append(f"{base}^-{p}")
            mono = format_monomial(names, e)
            if mono:
                factors.append(mono)
            a = abs(c)
            if a != 1 or not factors:
                factors.insert(0, str(a))
            parts.append(("-" if c < 0 else "+", "*".join(factors)))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"LocalizedElement({self})"


def loc_arith(a: LocalizedElement, b: LocalizedElement, op: str) -> LocalizedElement:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def substitute(p: Polynomial, assignment: Mapping[str, LocalizedElement],
               ring: LocalizedRing | None = None) -> LocalizedElement:
    """Image of ``p`` under the ring map sending each variable to ``assignment[var]``."""
    if ring is None:
        if not assignment:
            raise ValueError("need a target ring for an empty assignment")
        ring = next(iter(assignment.values())).ring
    names = p.registry.names
    powers: dict[tuple[int, int], LocalizedElement] = {}

    def power(i, k):
        if (i, k) not in powers:
            try:
                base = assignment[names[i]]
            except KeyError:
                raise MissingAssignment(names[i]) from None
            powers[(i, k)] = base if k == 1 else power(i, k - 1) * base
        return powers[(i, k)]

    total = ring.zero()
    for e, c in p.sorted_terms():
        term = ring.const(c)
        for i, k in enumerate(e):
            if k:
                term = term * power(i, k)
        total = total + term
    return total


def substitute_localized(e: LocalizedElement, assignment: Mapping[str, LocalizedElement],
                         ring: LocalizedRing | None = None) -> LocalizedElement:
    """Extend :func:`substitute` to a fraction; the images of denominators must be units."""
    ring = ring or next(iter(assignment.values())).ring
    result = substitute(e.numerator, assignment, ring)
    for k, p in e.den.items():
        img = substitute(e.ring.minor(k), assignment, ring)
        result = result * img.inverse() ** p
    return result


def evaluate(e: LocalizedElement, point: Mapping[str, Fraction]) -> Fraction:
    return e.evaluate(point)
