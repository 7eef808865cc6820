"""Charts, overlap rings, restriction maps, and glued factorizations.

A CoverModel holds the geometry: named charts with their own rings, an
overlap ring for every chart tuple up to the configured depth, restriction
homomorphisms from member charts into each overlap, and a potential per
chart that must agree on overlaps.

Overlap rings reuse the variables of their first member chart, and the
restriction map from that chart is the identity on variables.  This is what
lets restrictions between nested overlaps be derived from the chart-level
data: to restrict from the overlap of S to the overlap of T (S a subtuple
of T), send each variable through the map of S's first chart into T.

A GlobalMF presents one global factorization as per-chart data glued by
transition pairs (g0, g1): the pair stored for (i, j) identifies the
j-presentation with the i-presentation over their pairwise overlap,
e0_i = g1 e0_j g0^-1 and e1_i = g0 e1_j g1^-1.  Connections transport by
the gauge rule A -> g A g^-1 + g d(g^-1); supertraces downstream never see
the frame choice (conjugation invariance).
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from .forms import DiffForm, exterior_d
from .mfcore import (
    Connection,
    MatrixFactorization,
    ShapeError,
    ValidationError,
    check_shape,
    form_d,
    form_mul,
    mat_add,
    poly_eye,
    poly_inverse,
    poly_mul,
    poly_to_form,
)
from .rings import LocalizedPoly, Ring, RingError

ChartTuple = tuple[int, ...]


class Overlap:
    """Ring of a chart tuple plus the restriction map of each member."""

    __slots__ = ("members", "ring", "restrictions")

    def __init__(
        self,
        members: ChartTuple,
        ring: Ring,
        restrictions: Mapping[int, Mapping[str, LocalizedPoly]],
    ):
        self.members = tuple(members)
        self.ring = ring
        self.restrictions = {i: dict(m) for i, m in restrictions.items()}


class CoverModel:
    """Charts with rings, overlaps for tuples, and per-chart potentials."""

    def __init__(
        self,
        charts: Sequence[tuple[str, Ring]],
        overlaps: Mapping[ChartTuple, Overlap],
        potentials: Sequence[LocalizedPoly],
    ):
        self.chart_names = [name for name, _ in charts]
        self.chart_rings = [ring for _, ring in charts]
        self.overlaps = dict(overlaps)
        self.potentials = list(potentials)
        self._name_index = {name: i for i, name in enumerate(self.chart_names)}

    # -- lookup ------------------------------------------------------------

    @property
    def nchart(self) -> int:
        return len(self.chart_names)

    def chart_index(self, name: str) -> int:
        try:
            return self._name_index[name]
        except KeyError:
            raise RingError("unknown chart %r" % name) from None

    def tuple_of_names(self, names: Iterable[str]) -> ChartTuple:
        return tuple(self.chart_index(n) for n in names)

    def names_of_tuple(self, t: ChartTuple) -> list[str]:
        return [self.chart_names[i] for i in t]

    def all_tuples(self) -> list[ChartTuple]:
        """Singletons plus every overlap tuple, in canonical order."""
        singles = [(i,) for i in range(self.nchart)]
        return sorted(singles + list(self.overlaps), key=lambda t: (len(t), t))

    def tuples_of_length(self, size: int) -> list[ChartTuple]:
        return [t for t in self.all_tuples() if len(t) == size]

    def ring_of(self, t: ChartTuple) -> Ring:
        t = tuple(t)
        if len(t) == 1:
            return self.chart_rings[t[0]]
        try:
            return self.overlaps[t].ring
        except KeyError:
            raise RingError(
                "no overlap ring for tuple %s" % (self.names_of_tuple(t),)
            ) from None

    def chart_restriction(self, chart: int, t: ChartTuple) -> dict[str, LocalizedPoly]:
        """Variable map of the chart's ring into the tuple's overlap ring."""
        t = tuple(t)
        if chart not in t:
            raise RingError(
                "chart %s is not a member of %s"
                % (self.chart_names[chart], self.names_of_tuple(t))
            )
        if len(t) == 1:
            ring = self.chart_rings[chart]
            return {v: ring.var(v) for v in ring.variables}
        overlap = self.overlaps.get(t)
        if overlap is None or chart not in overlap.restrictions:
            raise RingError(
                "missing restriction map of chart %s into %s"
                % (self.chart_names[chart], self.names_of_tuple(t))
            )
        return overlap.restrictions[chart]

    def tuple_restriction(self, src: ChartTuple, dst: ChartTuple) -> dict[str, LocalizedPoly]:
        """Variable map of the src overlap ring into the dst overlap ring.

        Relies on src's ring sharing the variables of src's first chart;
        the map is then the first chart's restriction into dst.
        """
        src, dst = tuple(src), tuple(dst)
        if not set(src) <= set(dst):
            raise RingError(
                "%s is not a subtuple of %s"
                % (self.names_of_tuple(src), self.names_of_tuple(dst))
            )
        if src == dst:
            ring = self.ring_of(src)
            return {v: ring.var(v) for v in ring.variables}
        chart_map = self.chart_restriction(src[0], dst)
        src_ring = self.ring_of(src)
        for v in src_ring.variables:
            if v not in chart_map:
                raise RingError(
                    "cannot derive restriction %s -> %s: variable %r not covered"
                    % (self.names_of_tuple(src), self.names_of_tuple(dst), v)
                )
        return {v: chart_map[v] for v in src_ring.variables}

    # -- restriction of values ----------------------------------------------

    def restrict_poly(
        self, p: LocalizedPoly, src: ChartTuple, dst: ChartTuple
    ) -> LocalizedPoly:
        return p.substitute(self.tuple_restriction(src, dst), self.ring_of(dst))

    def restrict_form(self, a: DiffForm, src: ChartTuple, dst: ChartTuple) -> DiffForm:
        """Restriction of a form: substitute on coefficients, dv to
        d(image of v) (chain rule)."""
        varmap = self.tuple_restriction(src, dst)
        target = self.ring_of(dst)
        src_ring = self.ring_of(src)
        result = DiffForm.zero(target)
        # wedge order: coefficient first, then the dv images left to right
        for idx, coeff in a.components.items():
            term = DiffForm.from_poly(coeff.substitute(varmap, target))
            for pos in idx:
                term = term.wedge(exterior_d(varmap[src_ring.variables[pos]]))
            result = result + term
        return result

    def restrict_matrix(self, m, src: ChartTuple, dst: ChartTuple):
        """Entrywise polynomial-matrix restriction."""
        varmap = self.tuple_restriction(src, dst)
        target = self.ring_of(dst)
        return [[entry.substitute(varmap, target) for entry in row] for row in m]

    def potential_on(self, t: ChartTuple) -> LocalizedPoly:
        t = tuple(t)
        return self.restrict_poly(self.potentials[t[0]], (t[0],), t)

    # -- validation -----------------------------------------------------------

    def validate(self) -> list[str]:
        violations = []
        if len(set(self.chart_names)) != len(self.chart_names):
            violations.append("duplicate chart names")
        if len(self.potentials) != self.nchart:
            violations.append("need one potential per chart")
            return violations
        for i, w in enumerate(self.potentials):
            if w.ring != self.chart_rings[i]:
                violations.append(
                    "potential on %s lives in the wrong ring" % self.chart_names[i]
                )
        for t, overlap in self.overlaps.items():
            names = self.names_of_tuple(t)
            if tuple(overlap.members) != tuple(t):
                violations.append("overlap %s stored under wrong key" % (names,))
            if list(t) != sorted(set(t)):
                violations.append(
                    "overlap tuple %s is not strictly increasing" % (names,)
                )
                continue
            first_ring = self.chart_rings[t[0]]
            if overlap.ring.variables != first_ring.variables:
                violations.append(
                    "overlap %s must reuse the variables of its first chart %s"
                    % (names, self.chart_names[t[0]])
                )
                continue
            for chart in t:
                try:
                    varmap = self.chart_restriction(chart, t)
                except RingError as exc:
                    violations.append(str(exc))
                    continue
                chart_ring = self.chart_rings[chart]
                for v in chart_ring.variables:
                    if v not in varmap:
                        violations.append(
                            "restriction %s -> %s misses variable %r"
                            % (self.chart_names[chart], names, v)
                        )
                        continue
                    img = varmap[v]
                    if img.ring != overlap.ring:
                        violations.append(
                            "restriction image of %r in %s has wrong ring" % (v, names)
                        )
                    elif v in chart_ring.inverted and not img.is_unit_monomial():
                        violations.append(
                            "restriction %s -> %s sends inverted %r to the non-unit %s"
                            % (self.chart_names[chart], names, v, img)
                        )
            first_map = overlap.restrictions.get(t[0], {})
            for v in first_ring.variables:
                if v in first_map and first_map[v] != overlap.ring.var(v):
                    violations.append(
                        "restriction of first chart %s into %s must be the identity"
                        % (self.chart_names[t[0]], names)
                    )
                    break
        violations.extend(self._validate_potentials())
        violations.extend(self._validate_nesting())
        return violations

    def _validate_potentials(self) -> list[str]:
        violations = []
        for t in self.overlaps:
            if len(t) != 2:
                continue
            i, j = t
            try:
                wi = self.restrict_poly(self.potentials[i], (i,), t)
                wj = self.restrict_poly(self.potentials[j], (j,), t)
            except RingError as exc:
                violations.append(str(exc))
                continue
            if wi != wj:
                violations.append(
                    "potential disagreement on %s: %s vs %s"
                    % ("".join(self.names_of_tuple(t)), wi, wj)
                )
        return violations

    def _validate_nesting(self) -> list[str]:
        """Restricting chart -> S -> T must equal chart -> T directly."""
        violations = []
        for big in self.overlaps:
            for small in self.all_tuples():
                if small == big or not set(small) < set(big):
                    continue
                if len(small) > 1 and small not in self.overlaps:
                    continue
                for chart in small:
                    direct = self.chart_restriction(chart, big)
                    step1 = self.chart_restriction(chart, small)
                    varmap = self.tuple_restriction(small, big)
                    target = self.ring_of(big)
                    for v in self.chart_rings[chart].variables:
                        composite = step1[v].substitute(varmap, target)
                        if composite != direct[v]:
                            violations.append(
                                "restriction of %s via %s into %s differs from "
                                "the direct map on %r"
                                % (
                                    self.chart_names[chart],
                                    self.names_of_tuple(small),
                                    self.names_of_tuple(big),
                                    v,
                                )
                            )
        return violations

    def require_valid(self) -> "CoverModel":
        violations = self.validate()
        if violations:
            raise ValidationError(violations)
        return self


def single_chart_model(name: str, ring: Ring, w: LocalizedPoly) -> CoverModel:
    return CoverModel([(name, ring)], {}, [w])


# ---------------------------------------------------------------------------
# glued factorizations
# ---------------------------------------------------------------------------


class GlobalMF:
    """Per-chart factorization presentations identified by transitions.

    `transitions[(i, j)]` is the pair (g0, g1) over the pairwise overlap
    ring of {i, j} conjugating the j-presentation into the i-presentation;
    pairs not stored are recovered from their inverses, and (i, i) is the
    identity.
    """

    def __init__(
        self,
        model: CoverModel,
        factorizations: Sequence[MatrixFactorization],
        transitions: Mapping[tuple[int, int], tuple[list, list]] | None = None,
    ):
        if len(factorizations) != model.nchart:
            raise ValidationError(["need one factorization per chart"])
        ranks = {(mf.rank0, mf.rank1) for mf in factorizations}
        if len(ranks) > 1:
            raise ValidationError(["per-chart ranks disagree: %s" % sorted(ranks)])
        self.model = model
        self.factorizations = list(factorizations)
        self.transitions = dict(transitions or {})
        self.rank0, self.rank1 = factorizations[0].rank0, factorizations[0].rank1

    def mf_on(self, t: ChartTuple, frame: int | None = None) -> MatrixFactorization:
        """The frame chart's presentation restricted to the tuple's ring."""
        t = tuple(t)
        frame = t[0] if frame is None else frame
        mf = self.factorizations[frame]
        ring = self.model.ring_of(t)
        return MatrixFactorization(
            ring,
            mf.rank0,
            mf.rank1,
            self.model.restrict_matrix(mf.e0, (frame,), t),
            self.model.restrict_matrix(mf.e1, (frame,), t),
            self.model.restrict_poly(mf.w, (frame,), t),
        )

    def transition_on(self, i: int, j: int, t: ChartTuple):
        """(g0, g1) identifying the j-presentation with the i-presentation,
        over the ring of tuple t (which must contain i and j)."""
        t = tuple(t)
        ring = self.model.ring_of(t)
        if i == j:
            return poly_eye(ring, self.rank0), poly_eye(ring, self.rank1)
        pair = tuple(sorted((i, j)))
        stored = self.transitions.get((i, j))
        if stored is not None:
            g0, g1 = stored
            g0 = self.model.restrict_matrix(g0, pair, t)
            g1 = self.model.restrict_matrix(g1, pair, t)
            return g0, g1
        stored = self.transitions.get((j, i))
        if stored is not None:
            g0, g1 = stored
            g0 = self.model.restrict_matrix(g0, pair, t)
            g1 = self.model.restrict_matrix(g1, pair, t)
            return (
                poly_inverse(g0, ring, self.rank0),
                poly_inverse(g1, ring, self.rank1),
            )
        # No transition given: the presentations are declared equal.
        return poly_eye(ring, self.rank0), poly_eye(ring, self.rank1)

    def validate(self) -> list[str]:
        violations = []
        for name, mf in zip(self.model.chart_names, self.factorizations):
            for v in mf.validate():
                violations.append("chart %s: %s" % (name, v))
            if mf.w != self.model.potentials[self.model.chart_index(name)]:
                violations.append(
                    "chart %s: factorization potential differs from the model's" % name
                )
        for (i, j), (g0, g1) in self.transitions.items():
            pair = tuple(sorted((i, j)))
            if pair not in self.model.overlaps:
                violations.append(
                    "transition (%s,%s) has no overlap ring"
                    % (self.model.chart_names[i], self.model.chart_names[j])
                )
                continue
            ring = self.model.ring_of(pair)
            try:
                check_shape(g0, self.rank0, self.rank0, "g0")
                check_shape(g1, self.rank1, self.rank1, "g1")
                poly_inverse(g0, ring, self.rank0)
                poly_inverse(g1, ring, self.rank1)
            except (ShapeError, RingError) as exc:
                violations.append("transition (%d,%d): %s" % (i, j, exc))
        violations.extend(self._validate_compatibility())
        violations.extend(self._validate_cocycle())
        return violations

    def _validate_compatibility(self) -> list[str]:
        """e0_i = g1 e0_j g0^-1 and e1_i = g0 e1_j g1^-1 on pair overlaps."""
        violations = []
        r0, r1 = self.rank0, self.rank1
        for t in self.model.overlaps:
            if len(t) != 2:
                continue
            i, j = t
            ring = self.model.ring_of(t)
            mfi = self.mf_on(t, frame=i)
            mfj = self.mf_on(t, frame=j)
            try:
                g0, g1 = self.transition_on(i, j, t)
                g0_inv = poly_inverse(g0, ring, r0)
                g1_inv = poly_inverse(g1, ring, r1)
            except RingError as exc:
                violations.append(str(exc))
                continue
            conj_e0 = poly_mul(
                poly_mul(g1, mfj.e0, ring, r1, r1, r0), g0_inv, ring, r1, r0, r0
            )
            conj_e1 = poly_mul(
                poly_mul(g0, mfj.e1, ring, r0, r0, r1), g1_inv, ring, r0, r1, r1
            )
            names = "".join(self.model.names_of_tuple(t))
            for label, got, want, rows, cols in (
                ("e0", conj_e0, mfi.e0, r1, r0),
                ("e1", conj_e1, mfi.e1, r0, r1),
            ):
                for a in range(rows):
                    for b in range(cols):
                        if got[a][b] != want[a][b]:
                            violations.append(
                                "transition on %s fails %s compatibility at (%d,%d):"
                                " %s vs %s" % (names, label, a, b, got[a][b], want[a][b])
                            )
        return violations

    def _validate_cocycle(self) -> list[str]:
        violations = []
        r0, r1 = self.rank0, self.rank1
        for t in self.model.overlaps:
            if len(t) != 3:
                continue
            i, j, k = t
            ring = self.model.ring_of(t)
            gij = self.transition_on(i, j, t)
            gjk = self.transition_on(j, k, t)
            gik = self.transition_on(i, k, t)
            prod0 = poly_mul(gij[0], gjk[0], ring, r0, r0, r0)
            prod1 = poly_mul(gij[1], gjk[1], ring, r1, r1, r1)
            if prod0 != gik[0] or prod1 != gik[1]:
                violations.append(
                    "cocycle failure on %s" % "".join(self.model.names_of_tuple(t))
                )
        return violations

    def require_valid(self) -> "GlobalMF":
        violations = self.validate()
        if violations:
            raise ValidationError(violations)
        return self


class LocalConnections:
    """One connection per chart, shapes matching the global ranks."""

    def __init__(self, gmf: GlobalMF, connections: Sequence[Connection]):
        if len(connections) != gmf.model.nchart:
            raise ValidationError(["need one connection per chart"])
        for name, conn in zip(gmf.model.chart_names, connections):
            if (conn.rank0, conn.rank1) != (gmf.rank0, gmf.rank1):
                raise ValidationError(
                    ["connection on chart %s has wrong ranks" % name]
                )
        self.gmf = gmf
        self.connections = list(connections)

    def __getitem__(self, chart: int) -> Connection:
        return self.connections[chart]


def transport_connection(
    conn: Connection, g0, g1, ring: Ring, rank0: int, rank1: int
) -> Connection:
    """Gauge transport A -> g A g^-1 + g d(g^-1) per graded component."""

    def transport_block(A, g, n):
        if n == 0:
            return []
        g_inv = poly_inverse(g, ring, n)
        gf, ginvf = poly_to_form(g), poly_to_form(g_inv)
        gauge = form_mul(gf, form_d(g_inv), ring, n, n, n)
        conj = form_mul(form_mul(gf, A, ring, n, n, n), ginvf, ring, n, n, n)
        return mat_add(conj, gauge)

    return Connection(
        ring,
        transport_block(conn.A0, g0, rank0),
        transport_block(conn.A1, g1, rank1),
    )


def connection_on(
    gmf: GlobalMF,
    conns: LocalConnections,
    chart: int,
    t: ChartTuple,
    frame: int | None = None,
) -> Connection:
    """The chart's connection restricted to the tuple's overlap ring and
    expressed in the frame chart's trivialization."""
    t = tuple(t)
    frame = t[0] if frame is None else frame
    model = gmf.model
    ring = model.ring_of(t)
    conn = conns[chart]
    restricted = Connection(
        ring,
        [[model.restrict_form(entry, (chart,), t) for entry in row] for row in conn.A0],
        [[model.restrict_form(entry, (chart,), t) for entry in row] for row in conn.A1],
    )
    if chart == frame:
        return restricted
    g0, g1 = gmf.transition_on(frame, chart, t)
    return transport_connection(restricted, g0, g1, ring, gmf.rank0, gmf.rank1)
