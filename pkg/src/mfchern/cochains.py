"""Cech cochains valued in forms (OmegaCochain) and in endomorphisms
(EndoCochain).

An OmegaCochain entry lives at a key (chart tuple, form degree q) and is a
DiffForm over the tuple's overlap ring, homogeneous of degree q.  Entries
that vanish are never stored.  Serialization is canonical: tuples sorted
lexicographically, then by degree, forms rendered in canonical term order.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from .cover import ChartTuple, CoverModel, GlobalMF
from .forms import DiffForm
from .mfcore import GradedMatrix, ShapeError, ValidationError
from .rings import RingError, RingMismatchError

EntryKey = tuple[ChartTuple, int]


class OmegaCochain:
    """Cech cochain valued in the two-periodic form complex."""

    def __init__(self, model: CoverModel, entries: Mapping[EntryKey, DiffForm] | None = None):
        self.model = model
        self.entries: dict[EntryKey, DiffForm] = {}
        for (t, q), form in (entries or {}).items():
            self.set_entry(tuple(t), q, form)

    def set_entry(self, t: ChartTuple, q: int, form: DiffForm) -> None:
        t = tuple(t)
        ring = self.model.ring_of(t)
        if form.ring != ring:
            raise RingMismatchError(
                "entry at %s lives in %s, expected %s"
                % (self.model.names_of_tuple(t), form.ring, ring)
            )
        if not form.degrees() <= {q}:
            raise RingError(
                "entry at %s, degree %d contains other degrees %s"
                % (self.model.names_of_tuple(t), q, sorted(form.degrees()))
            )
        if form.is_zero():
            self.entries.pop((t, q), None)
        else:
            self.entries[(t, q)] = form

    def add_to_entry(self, t: ChartTuple, q: int, form: DiffForm) -> None:
        t = tuple(t)
        current = self.entries.get((t, q))
        total = form if current is None else current + form
        self.set_entry(t, q, total)

    def entry(self, t: ChartTuple, q: int) -> DiffForm:
        t = tuple(t)
        existing = self.entries.get((t, q))
        if existing is not None:
            return existing
        return DiffForm.zero(self.model.ring_of(t))

    def is_zero(self) -> bool:
        return not self.entries

    def sorted_keys(self) -> list[EntryKey]:
        return sorted(
            self.entries,
            key=lambda key: (self.model.names_of_tuple(key[0]), key[1]),
        )

    def first_nonzero(self) -> EntryKey | None:
        keys = self.sorted_keys()
        return keys[0] if keys else None

    def parities(self) -> set[int]:
        """Total parities (len(tuple) - 1 + q) mod 2 present in the cochain."""
        return {(len(t) - 1 + q) % 2 for (t, q) in self.entries}

    def __add__(self, other: "OmegaCochain") -> "OmegaCochain":
        if self.model is not other.model and self.model.chart_names != other.model.chart_names:
            raise ValidationError(["cochains live over different covers"])
        out = OmegaCochain(self.model, self.entries)
        for (t, q), form in other.entries.items():
            out.add_to_entry(t, q, form)
        return out

    def __neg__(self) -> "OmegaCochain":
        return OmegaCochain(
            self.model, {key: -form for key, form in self.entries.items()}
        )

    def __sub__(self, other: "OmegaCochain") -> "OmegaCochain":
        return self + (-other)

    def scale(self, c: Fraction) -> "OmegaCochain":
        return OmegaCochain(
            self.model, {key: form.scale(c) for key, form in self.entries.items()}
        )

    def __eq__(self, other):
        return (
            isinstance(other, OmegaCochain)
            and self.model.chart_names == other.model.chart_names
            and self.entries == other.entries
        )

    def __repr__(self):
        parts = [
            "(%s, %d): %s" % (",".join(self.model.names_of_tuple(t)), q, form)
            for (t, q), form in sorted(self.entries.items())
        ]
        return "OmegaCochain{%s}" % "; ".join(parts)

    # -- serialization ---------------------------------------------------------

    def to_doc(self) -> dict:
        entries = []
        for (t, q) in self.sorted_keys():
            entries.append(
                {
                    "tuple": self.model.names_of_tuple(t),
                    "degree": q,
                    "form": str(self.entries[(t, q)]),
                }
            )
        return {"entries": entries}

    @classmethod
    def from_doc(cls, model: CoverModel, doc: Mapping) -> "OmegaCochain":
        from .parsing import parse_form

        out = cls(model)
        for entry in doc.get("entries", []):
            t = model.tuple_of_names(entry["tuple"])
            ring = model.ring_of(t)
            form = parse_form(ring, entry["form"])
            q = int(entry["degree"])
            out.add_to_entry(t, q, form.degree_part(q))
            leftover = form - form.degree_part(q)
            if not leftover.is_zero():
                raise RingError(
                    "cochain entry %s declared degree %d but has other degrees"
                    % (entry["tuple"], q)
                )
        return out


class EndoCochain:
    """Cech cochain of endomorphism-valued matrices of a GlobalMF.

    The entry at a tuple lives over the tuple's overlap ring, written in the
    frame of the tuple's first chart, and must be parity homogeneous.
    """

    def __init__(self, gmf: GlobalMF, entries: Mapping[ChartTuple, GradedMatrix] | None = None):
        self.gmf = gmf
        self.entries: dict[ChartTuple, GradedMatrix] = {}
        for t, mat in (entries or {}).items():
            self.set_entry(tuple(t), mat)

    def set_entry(self, t: ChartTuple, mat: GradedMatrix) -> None:
        t = tuple(t)
        model = self.gmf.model
        if mat.ring != model.ring_of(t):
            raise RingMismatchError(
                "endomorphism at %s lives in the wrong ring" % model.names_of_tuple(t)
            )
        if (mat.rank0, mat.rank1) != (self.gmf.rank0, self.gmf.rank1):
            raise ShapeError("endomorphism ranks do not match the factorization")
        if mat.parity() == "mixed":
            raise ValidationError(
                ["endomorphism at %s is not parity homogeneous" % model.names_of_tuple(t)]
            )
        if not mat.is_zero():
            self.entries[t] = mat

    def entry(self, t: ChartTuple) -> GradedMatrix:
        t = tuple(t)
        existing = self.entries.get(t)
        if existing is not None:
            return existing
        return GradedMatrix.zero(
            self.gmf.model.ring_of(t), self.gmf.rank0, self.gmf.rank1
        )

    def max_cech_degree(self) -> int:
        return max((len(t) - 1 for t in self.entries), default=0)


def identity_endo_cochain(gmf: GlobalMF) -> EndoCochain:
    """The identity as a 0-cochain: the Chern character's argument."""
    entries = {}
    for i in range(gmf.model.nchart):
        ring = gmf.model.ring_of((i,))
        entries[(i,)] = GradedMatrix.identity(ring, gmf.rank0, gmf.rank1)
    return EndoCochain(gmf, entries)
