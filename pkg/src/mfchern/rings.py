"""Exact multivariate polynomial arithmetic over Q, localized at a set of
inverted variables.

A ring k[x1..xn, S^-1] is described by an ordered variable list and the
subset S of variables that may carry negative exponents.  Elements are
stored sparsely as {exponent vector: Fraction}; no zero coefficients are
ever kept.  All values are immutable after construction and safe to share.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping


class RingError(ValueError):
    """Structural problem with a ring or an element of one."""


class RingMismatchError(RingError):
    """Operands belong to different rings."""


_NAME_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9_]*\Z")


def grlex_key(exponents: tuple[int, ...]) -> tuple:
    """Graded-lex sort key: total degree first, earlier variables first
    within a grade.  Ascending order matches the documented basis order."""
    return (sum(exponents), tuple(-e for e in exponents))


class Ring:
    """A chart's coordinate ring: Q[variables] with `inverted` units."""

    __slots__ = ("variables", "inverted", "_index")

    def __init__(self, variables: Iterable[str], inverted: Iterable[str] = ()):
        variables = tuple(variables)
        inverted = frozenset(inverted)
        if len(set(variables)) != len(variables):
            raise RingError("duplicate variable names: %r" % (variables,))
        for v in variables:
            if not _NAME_RE.match(v):
                raise RingError("bad variable name: %r" % v)
        extra = inverted - set(variables)
        if extra:
            raise RingError("inverted variables not in ring: %s" % sorted(extra))
        self.variables = variables
        self.inverted = inverted
        self._index = {v: i for i, v in enumerate(variables)}

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def var_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise RingError("unknown variable %r in ring %s" % (name, self)) from None

    def allows_exponent(self, var_pos: int, exponent: int) -> bool:
        return exponent >= 0 or self.variables[var_pos] in self.inverted

    def zero(self) -> LocalizedPoly:
        return LocalizedPoly(self, {})

    def one(self) -> LocalizedPoly:
        return self.constant(1)

    def constant(self, c) -> LocalizedPoly:
        return LocalizedPoly(self, {(0,) * self.nvars: Fraction(c)})

    def var(self, name: str) -> LocalizedPoly:
        exps = [0] * self.nvars
        exps[self.var_index(name)] = 1
        return LocalizedPoly(self, {tuple(exps): Fraction(1)})

    def monomial(self, exponents: Iterable[int], coeff=1) -> LocalizedPoly:
        return LocalizedPoly(self, {tuple(exponents): Fraction(coeff)})

    def __eq__(self, other):
        return (
            isinstance(other, Ring)
            and self.variables == other.variables
            and self.inverted == other.inverted
        )

    def __hash__(self):
        return hash((self.variables, self.inverted))

    def __repr__(self):
        inv = ", ".join("%s^-1" % v for v in self.variables if v in self.inverted)
        body = ", ".join(self.variables)
        return "Q[%s]" % (body + (", " + inv if inv else ""))


def _check_same_ring(p: "LocalizedPoly", q: "LocalizedPoly") -> None:
    if p.ring != q.ring:
        raise RingMismatchError("operands live in %s and %s" % (p.ring, q.ring))


class LocalizedPoly:
    """Sparse polynomial with exact rational coefficients.

    `terms` maps exponent vectors (tuples of ints, negative entries only on
    inverted variables) to nonzero Fractions.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring: Ring, terms: Mapping[tuple[int, ...], Fraction]):
        clean: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in terms.items():
            coeff = Fraction(coeff)
            if coeff == 0:
                continue
            if len(exps) != ring.nvars:
                raise RingError("exponent vector %r has wrong length" % (exps,))
            for pos, e in enumerate(exps):
                if not ring.allows_exponent(pos, e):
                    raise RingError(
                        "negative exponent on non-inverted variable %r"
                        % ring.variables[pos]
                    )
            clean[tuple(exps)] = clean.get(tuple(exps), Fraction(0)) + coeff
            if clean[tuple(exps)] == 0:
                del clean[tuple(exps)]
        self.ring = ring
        self.terms = clean

    # -- predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exps) for exps in self.terms)

    def constant_value(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        if not self.is_constant():
            raise RingError("not a constant: %s" % self)
        return next(iter(self.terms.values()))

    def is_unit_monomial(self) -> bool:
        """One term whose variables with nonzero exponent are all inverted,
        i.e. structurally invertible in the ring."""
        if len(self.terms) != 1:
            return False
        exps = next(iter(self.terms))
        return all(
            e == 0 or self.ring.variables[pos] in self.ring.inverted
            for pos, e in enumerate(exps)
        )

    def unit_inverse(self) -> "LocalizedPoly":
        if not self.is_unit_monomial():
            raise RingError("not a unit in %s: %s" % (self.ring, self))
        exps, coeff = next(iter(self.terms.items()))
        return LocalizedPoly(self.ring, {tuple(-e for e in exps): 1 / coeff})

    def numerator_degree(self) -> int:
        """Max over terms of the total degree of the numerator part."""
        if self.is_zero():
            return 0
        return max(sum(max(e, 0) for e in exps) for exps in self.terms)

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        _check_same_ring(self, other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            acc = terms.get(exps, Fraction(0)) + coeff
            if acc == 0:
                terms.pop(exps, None)
            else:
                terms[exps] = acc
        return LocalizedPoly(self.ring, terms)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return LocalizedPoly(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        _check_same_ring(self, other)
        terms: dict[tuple[int, ...], Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exps = tuple(a + b for a, b in zip(e1, e2))
                acc = terms.get(exps, Fraction(0)) + c1 * c2
                if acc == 0:
                    terms.pop(exps, None)
                else:
                    terms[exps] = acc
        return LocalizedPoly(self.ring, terms)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("polynomial powers must be integers")
        if k < 0:
            return self.unit_inverse() ** (-k)
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def _coerce(self, other) -> "LocalizedPoly":
        if isinstance(other, LocalizedPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return self.ring.constant(other)
        raise TypeError("cannot combine LocalizedPoly with %r" % (other,))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.ring.constant(other)
        return (
            isinstance(other, LocalizedPoly)
            and self.ring == other.ring
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.ring, frozenset(self.terms.items())))

    # -- calculus and homomorphisms ---------------------------------------

    def partial(self, name: str) -> "LocalizedPoly":
        """d/d(name), with d(x^-k)/dx = -k x^(-k-1)."""
        pos = self.ring.var_index(name)
        terms: dict[tuple[int, ...], Fraction] = {}
        for exps, coeff in self.terms.items():
            e = exps[pos]
            if e == 0:
                continue
            new = list(exps)
            new[pos] = e - 1
            key = tuple(new)
            acc = terms.get(key, Fraction(0)) + coeff * e
            if acc == 0:
                terms.pop(key, None)
            else:
                terms[key] = acc
        return LocalizedPoly(self.ring, terms)

    def substitute(
        self, images: Mapping[str, "LocalizedPoly"], target: Ring
    ) -> "LocalizedPoly":
        """Apply the ring homomorphism sending each variable to its image.

        Every variable of the source ring must be mapped, and the image of an
        inverted variable must be a unit monomial of the target (checked
        structurally before any work is done).
        """
        for name in images:
            if name not in self.ring._index:
                raise RingError("substitution names unknown variable %r" % name)
        for name in self.ring.variables:
            if name not in images:
                raise RingError("substitution misses variable %r" % name)
            img = images[name]
            if img.ring != target:
                raise RingMismatchError(
                    "image of %r lives in %s, expected %s" % (name, img.ring, target)
                )
            if name in self.ring.inverted and not img.is_unit_monomial():
                raise RingError(
                    "image of inverted variable %r is not a unit: %s" % (name, img)
                )
        result = target.zero()
        for exps, coeff in self.terms.items():
            term = target.constant(coeff)
            for pos, e in enumerate(exps):
                if e:
                    term = term * (images[self.ring.variables[pos]] ** e)
            result = result + term
        return result

    # -- serialization -----------------------------------------------------

    def sorted_terms(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """Terms in canonical order: graded lex, leading term first."""
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), t[0]), reverse=True)

    def __str__(self):
        if self.is_zero():
            return "0"
        rendered = []
        for exps, coeff in self.sorted_terms():
            factors = []
            for pos, e in enumerate(exps):
                if e == 0:
                    continue
                name = self.ring.variables[pos]
                factors.append(name if e == 1 else "%s^%d" % (name, e))
            if not factors:
                rendered.append(str(coeff))
            elif coeff == 1:
                rendered.append("*".join(factors))
            elif coeff == -1:
                rendered.append("-" + "*".join(factors))
            else:
                rendered.append("*".join([str(coeff)] + factors))
        out = " + ".join(rendered)
        return out.replace("+ -", "- ")

    def __repr__(self):
        return "LocalizedPoly(%s)" % self
