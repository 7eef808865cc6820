"""Exterior algebra of differential forms over a chart ring.

A DiffForm is stored expanded over the dx_I basis: a map from strictly
increasing tuples of variable indices to LocalizedPoly coefficients.  The
wedge uses shuffle signs, the exterior derivative acts by the Leibniz rule
on coefficients, and dw_wedge implements the two-periodic differential,
wedging dw in the first slot.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .rings import LocalizedPoly, Ring, RingError, RingMismatchError


def _merge_sign(left: tuple[int, ...], right: tuple[int, ...]):
    """Merge two strictly increasing index tuples; return (sign, merged) or
    (0, None) when they share an index."""
    if set(left) & set(right):
        return 0, None
    merged = sorted(left + right)
    # Count inversions of the concatenation relative to sorted order.
    concat = left + right
    sign = 1
    for i in range(len(concat)):
        for j in range(i + 1, len(concat)):
            if concat[i] > concat[j]:
                sign = -sign
    return sign, tuple(merged)


class DiffForm:
    """Element of the exterior algebra on dx_1..dx_n over a chart ring."""

    __slots__ = ("ring", "components")

    def __init__(self, ring: Ring, components: Mapping[tuple[int, ...], LocalizedPoly]):
        clean: dict[tuple[int, ...], LocalizedPoly] = {}
        for idx, coeff in components.items():
            idx = tuple(idx)
            if any(b <= a for a, b in zip(idx, idx[1:])):
                raise RingError("index tuple %r is not strictly increasing" % (idx,))
            if idx and (idx[0] < 0 or idx[-1] >= ring.nvars):
                raise RingError("index tuple %r out of range" % (idx,))
            if coeff.ring != ring:
                raise RingMismatchError("coefficient ring differs from form ring")
            if coeff.is_zero():
                continue
            if idx in clean:
                acc = clean[idx] + coeff
                if acc.is_zero():
                    del clean[idx]
                else:
                    clean[idx] = acc
            else:
                clean[idx] = coeff
        self.ring = ring
        self.components = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, ring: Ring) -> "DiffForm":
        return cls(ring, {})

    @classmethod
    def from_poly(cls, p: LocalizedPoly) -> "DiffForm":
        return cls(p.ring, {(): p})

    @classmethod
    def d_var(cls, ring: Ring, name: str) -> "DiffForm":
        return cls(ring, {(ring.var_index(name),): ring.one()})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.components

    def degrees(self) -> set[int]:
        return {len(idx) for idx in self.components}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def degree(self) -> int:
        """Form degree of a homogeneous form; 0 for the zero form."""
        degs = self.degrees()
        if not degs:
            return 0
        if len(degs) > 1:
            raise RingError("form is not homogeneous: %s" % self)
        return degs.pop()

    def degree_part(self, q: int) -> "DiffForm":
        return DiffForm(
            self.ring, {i: c for i, c in self.components.items() if len(i) == q}
        )

    def coefficient(self, idx: tuple[int, ...]) -> LocalizedPoly:
        return self.components.get(tuple(idx), self.ring.zero())

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other: "DiffForm") -> "DiffForm":
        if self.ring != other.ring:
            raise RingMismatchError("forms live in different rings")
        comps = dict(self.components)
        for idx, coeff in other.components.items():
            acc = comps.get(idx, self.ring.zero()) + coeff
            if acc.is_zero():
                comps.pop(idx, None)
            else:
                comps[idx] = acc
        return DiffForm(self.ring, comps)

    def __neg__(self) -> "DiffForm":
        return DiffForm(self.ring, {i: -c for i, c in self.components.items()})

    def __sub__(self, other: "DiffForm") -> "DiffForm":
        return self + (-other)

    def scale(self, c) -> "DiffForm":
        """Multiply by a scalar or a 0-form polynomial coefficient."""
        if isinstance(c, (int, Fraction)):
            c = self.ring.constant(c)
        return DiffForm(self.ring, {i: c * f for i, f in self.components.items()})

    def wedge(self, other: "DiffForm") -> "DiffForm":
        if self.ring != other.ring:
            raise RingMismatchError("forms live in different rings")
        comps: dict[tuple[int, ...], LocalizedPoly] = {}
        for i1, c1 in self.components.items():
            for i2, c2 in other.components.items():
                sign, merged = _merge_sign(i1, i2)
                if sign == 0:
                    continue
                coeff = c1 * c2
                if sign < 0:
                    coeff = -coeff
                acc = comps.get(merged, self.ring.zero()) + coeff
                if acc.is_zero():
                    comps.pop(merged, None)
                else:
                    comps[merged] = acc
        return DiffForm(self.ring, comps)

    def __eq__(self, other):
        return (
            isinstance(other, DiffForm)
            and self.ring == other.ring
            and self.components == other.components
        )

    def __hash__(self):
        return hash((self.ring, frozenset(self.components.items())))

    # -- serialization --------------------------------------------------------

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for idx in sorted(self.components, key=lambda i: (len(i), i)):
            poly = self.components[idx]
            poly_str = str(poly)
            if len(poly.terms) > 1:
                poly_str = "(%s)" % poly_str
            dxs = " ^ ".join("d(%s)" % self.ring.variables[i] for i in idx)
            if not idx:
                parts.append(poly_str)
            elif poly == self.ring.one():
                parts.append(dxs)
            else:
                parts.append("%s * %s" % (poly_str, dxs))
        return " + ".join(parts)

    def __repr__(self):
        return "DiffForm(%s)" % self


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    return a.wedge(b)


def exterior_d(a) -> DiffForm:
    """Exterior derivative; accepts a DiffForm or a bare polynomial."""
    if isinstance(a, LocalizedPoly):
        a = DiffForm.from_poly(a)
    ring = a.ring
    result = DiffForm.zero(ring)
    for idx, coeff in a.components.items():
        for pos, name in enumerate(ring.variables):
            dcoeff = coeff.partial(name)
            if dcoeff.is_zero():
                continue
            term = DiffForm(ring, {(pos,): dcoeff}).wedge(
                DiffForm(ring, {idx: ring.one()})
            )
            result = result + term
    return result


def dw_wedge(a: DiffForm, w: LocalizedPoly) -> DiffForm:
    """The two-periodic differential dw /\\ a, with dw in the first slot."""
    if a.ring != w.ring:
        raise RingMismatchError("form and potential live in different rings")
    return exterior_d(w).wedge(a)
