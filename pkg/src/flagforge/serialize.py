"""Canonical JSON encodings.  Coefficients are decimal strings; indices are 1-based ints."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .exactring import LocalizedElement, LocalizedRing, Polynomial, VariableRegistry
from .flagcomb import AdmissibleChain, AdmissibleSequence, CharacteristicPermutation, FlagType
from .flagmatrix import MasterRing, RingMatrix
from .freealg import NCPolynomial, generator_index, generator_names

SCHEMA = "flagforge/1"


class FormatError(ValueError):
    pass


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _coeff(c: Fraction) -> list[str]:
    return [str(c.numerator), str(c.denominator)]


def polynomial_to_json(p: Polynomial) -> list:
    names = p.registry.names
    return [_coeff(c) + [[[names[i], k] for i, k in enumerate(e) if k]] for e, c in p.sorted_terms()]


def polynomial_from_json(doc, registry: VariableRegistry) -> Polynomial:
    if isinstance(doc, dict):
        doc = doc.get("terms", doc.get("numerator"))
    if not isinstance(doc, list):
        raise FormatError("polynomial must be a list of [num, den, [[var, exp], ...]] terms")
    total = Polynomial.zero(registry)
    for term in doc:
        try:
            num, den, powers = term
            c = Fraction(int(num), int(den))
            mono = {}
            for name, k in powers:
                if int(k) < 0:
                    raise FormatError("negative exponent")
                mono[name] = mono.get(name, 0) + int(k)
        except FormatError:
            raise
        except (TypeError, ValueError) as exc:
            raise FormatError(f"bad term {term!r}") from exc
        try:
            total = total + Polynomial.monomial(registry, mono, c)
        except KeyError as exc:
            raise FormatError(str(exc)) from exc
    return total


def localized_to_json(e: LocalizedElement) -> dict:
    names = e.ring.minor_names
    return {"numerator": polynomial_to_json(e.numerator),
            "denominator": [[names[k], p] for k, p in sorted(e.den.items())]}


def localized_from_json(doc, ring: LocalizedRing) -> LocalizedElement:
    if isinstance(doc, list):
        return ring.poly(polynomial_from_json(doc, ring.registry))
    if not isinstance(doc, dict) or "numerator" not in doc:
        raise FormatError("expected {'numerator': [...], 'denominator': [...]}")
    num = polynomial_from_json(doc["numerator"], ring.registry)
    den = {}
    for item in doc.get("denominator", []):
        try:
            name, p = item
            k = ring.minor_index[name]
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad denominator entry {item!r}") from exc
        den[k] = den.get(k, 0) + int(p)
    return LocalizedElement(ring, num, den)


def nc_to_json(a: NCPolynomial) -> list:
    names = generator_names(a.ring)
    return [_coeff(c) + [[names[g] for g in w]] for w, c in a.sorted_terms()]


def nc_from_json(doc, ring: LocalizedRing) -> NCPolynomial:
    terms = {}
    for term in doc:
        try:
            num, den, word = term
            w = tuple(generator_index(ring, n) for n in word)
            terms[w] = terms.get(w, 0) + Fraction(int(num), int(den))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad term {term!r}") from exc
    return NCPolynomial(ring, terms)


def matrix_to_json(m: RingMatrix) -> dict:
    return {"rows": m.rows, "cols": m.cols,
            "entries": [[localized_to_json(e) for e in row] for row in m.entries]}


def matrix_display(m: RingMatrix) -> list[list[str]]:
    return [[str(e) for e in row] for row in m.entries]


def sequence_from_json(doc) -> AdmissibleSequence:
    ft = FlagType(tuple(doc["d"]), int(doc["n"]))
    return AdmissibleSequence.of(ft, doc["subsets"])


def chain_from_json(doc) -> AdmissibleChain:
    return AdmissibleChain.of([sequence_from_json(s) for s in doc["sequences"]])


def permutation_to_json(chi: CharacteristicPermutation) -> dict:
    return {"map": {str(k): v for k, v in enumerate(chi.map, start=1)}, "involution": chi.is_involution()}


def minor_table_to_json(ring: MasterRing) -> list[dict]:
    out = []
    for name, p in ring.minors:
        band, cols = ring.minor_id(name)
        out.append({"name": name, "level": band, "columns": list(cols),
                    "polynomial": polynomial_to_json(p), "text": str(p)})
    return out


def envelope(command: str, flag_type: FlagType | None = None, **body) -> dict:
    doc = {"schema": SCHEMA, "command": command}
    if flag_type is not None:
        doc["flag_type"] = flag_type.to_json()
    doc.update(body)
    return doc
