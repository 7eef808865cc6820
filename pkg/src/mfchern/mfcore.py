"""Z2-graded matrix calculus for matrix factorizations.

A matrix factorization is a pair of polynomial matrices e0: E0 -> E1 and
e1: E1 -> E0 with e0*e1 = e1*e0 = w * id.  Endomorphism-valued forms are
GradedMatrix values: four blocks of DiffForm entries, block (i, j) mapping
the parity-j component to the parity-i component.

Composition convention: (M*N)[i][j] = sum_k M[i][k] /\ N[k][j], the left
factor's forms leftmost.  Every downstream sign (e.g. ch of the Koszul
factorization {x, y} being -dx^dy) hangs off this one choice.

Matrices are lists of rows.  Ranks may be zero, so shapes are always passed
explicitly where they cannot be read off the data (a 0 x n matrix is just
[] and carries no column count).
"""

from __future__ import annotations

from fractions import Fraction

from .forms import DiffForm, exterior_d
from .rings import LocalizedPoly, Ring, RingError, RingMismatchError


class ShapeError(ValueError):
    """Matrix shapes are inconsistent."""


class ValidationError(ValueError):
    """A factorization or cover invariant fails; carries the report."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


# ---------------------------------------------------------------------------
# shape-explicit matrix helpers (entries: LocalizedPoly or DiffForm)
# ---------------------------------------------------------------------------


def check_shape(m, rows: int, cols: int, what: str = "matrix") -> None:
    if len(m) != rows or any(len(row) != cols for row in m):
        raise ShapeError(
            "%s has shape %s, expected (%d, %d)"
            % (what, (len(m), len(m[0]) if m else 0), rows, cols)
        )


def poly_zeros(ring: Ring, rows: int, cols: int):
    return [[ring.zero() for _ in range(cols)] for _ in range(rows)]


def form_zeros(ring: Ring, rows: int, cols: int):
    return [[DiffForm.zero(ring) for _ in range(cols)] for _ in range(rows)]


def poly_eye(ring: Ring, n: int):
    return [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)]


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_neg(a):
    return [[-x for x in row] for row in a]


def mat_transpose(a, rows: int, cols: int):
    return [[a[i][j] for i in range(rows)] for j in range(cols)]


def poly_mul(a, b, ring: Ring, rows: int, inner: int, cols: int):
    out = poly_zeros(ring, rows, cols)
    for i in range(rows):
        for j in range(cols):
            acc = ring.zero()
            for k in range(inner):
                acc = acc + a[i][k] * b[k][j]
            out[i][j] = acc
    return out


def form_mul(a, b, ring: Ring, rows: int, inner: int, cols: int):
    out = form_zeros(ring, rows, cols)
    for i in range(rows):
        for j in range(cols):
            acc = DiffForm.zero(ring)
            for k in range(inner):
                acc = acc + a[i][k].wedge(b[k][j])
            out[i][j] = acc
    return out


def poly_scale(a, c: LocalizedPoly):
    return [[c * entry for entry in row] for row in a]


def poly_to_form(a):
    return [[DiffForm.from_poly(entry) for entry in row] for row in a]


def form_d(a):
    """Entrywise exterior derivative of a polynomial matrix."""
    return [[exterior_d(entry) for entry in row] for row in a]


def poly_det(a, ring: Ring, n: int) -> LocalizedPoly:
    if n == 0:
        return ring.one()
    if n == 1:
        return a[0][0]
    det = ring.zero()
    sign = 1
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in a[1:]]
        term = a[0][j] * poly_det(minor, ring, n - 1)
        det = det + term if sign > 0 else det - term
        sign = -sign
    return det


def poly_inverse(a, ring: Ring, n: int):
    """Exact inverse over the ring; the determinant must be a unit monomial
    (structurally invertible in the localized ring)."""
    if n == 0:
        return []
    det = poly_det(a, ring, n)
    if not det.is_unit_monomial():
        raise RingError("matrix is not invertible over %s (det = %s)" % (ring, det))
    det_inv = det.unit_inverse()
    adj = poly_zeros(ring, n, n)
    for i in range(n):
        for j in range(n):
            minor = [row[:i] + row[i + 1 :] for k, row in enumerate(a) if k != j]
            cof = poly_det(minor, ring, n - 1)
            adj[i][j] = cof if (i + j) % 2 == 0 else -cof
    return poly_scale(adj, det_inv)


# ---------------------------------------------------------------------------
# graded matrices
# ---------------------------------------------------------------------------

_BLOCK_KEYS = ((0, 0), (0, 1), (1, 0), (1, 1))


class GradedMatrix:
    """Endomorphism-valued form on E0 (+) E1: four DiffForm blocks, block
    (i, j) of shape rank_i x rank_j mapping parity j to parity i.

    Mixed Z2 parity and mixed form degree are allowed; such values are the
    formal sums of their homogeneous parts, and sign-sensitive operations
    (hom_differential) insist on homogeneous parity.
    """

    __slots__ = ("ring", "rank0", "rank1", "blocks")

    def __init__(self, ring: Ring, rank0: int, rank1: int, blocks=None):
        self.ring = ring
        self.rank0 = rank0
        self.rank1 = rank1
        ranks = (rank0, rank1)
        self.blocks = {}
        blocks = blocks or {}
        for (i, j) in _BLOCK_KEYS:
            block = blocks.get((i, j))
            if block is None:
                block = form_zeros(ring, ranks[i], ranks[j])
            check_shape(block, ranks[i], ranks[j], "block %s" % ((i, j),))
            self.blocks[(i, j)] = block

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, ring: Ring, rank0: int, rank1: int) -> "GradedMatrix":
        return cls(ring, rank0, rank1)

    @classmethod
    def identity(cls, ring: Ring, rank0: int, rank1: int) -> "GradedMatrix":
        return cls(
            ring,
            rank0,
            rank1,
            {
                (0, 0): poly_to_form(poly_eye(ring, rank0)),
                (1, 1): poly_to_form(poly_eye(ring, rank1)),
            },
        )

    @classmethod
    def even(
        cls, ring: Ring, rank0: int, rank1: int, b00, b11
    ) -> "GradedMatrix":
        return cls(ring, rank0, rank1, {(0, 0): b00, (1, 1): b11})

    @classmethod
    def odd(cls, ring: Ring, rank0: int, rank1: int, b10, b01) -> "GradedMatrix":
        return cls(ring, rank0, rank1, {(1, 0): b10, (0, 1): b01})

    # -- structure ---------------------------------------------------------

    def block(self, i: int, j: int):
        return self.blocks[(i, j)]

    def is_zero(self) -> bool:
        return all(
            entry.is_zero() for b in self.blocks.values() for row in b for entry in row
        )

    def _block_zero(self, key) -> bool:
        return all(entry.is_zero() for row in self.blocks[key] for entry in row)

    def parity(self) -> str:
        """'even', 'odd', 'zero', or 'mixed'."""
        diag = self._block_zero((0, 0)) and self._block_zero((1, 1))
        off = self._block_zero((0, 1)) and self._block_zero((1, 0))
        if diag and off:
            return "zero"
        if diag:
            return "odd"
        if off:
            return "even"
        return "mixed"

    def form_degrees(self) -> set[int]:
        degs = set()
        for b in self.blocks.values():
            for row in b:
                for entry in row:
                    degs |= entry.degrees()
        return degs

    def degree_part(self, q: int) -> "GradedMatrix":
        return GradedMatrix(
            self.ring,
            self.rank0,
            self.rank1,
            {
                key: [[entry.degree_part(q) for entry in row] for row in block]
                for key, block in self.blocks.items()
            },
        )

    def map_entries(self, fn, ring: Ring | None = None) -> "GradedMatrix":
        blocks = {
            key: [[fn(entry) for entry in row] for row in block]
            for key, block in self.blocks.items()
        }
        return GradedMatrix(ring or self.ring, self.rank0, self.rank1, blocks)

    # -- algebra ---------------------------------------------------------

    def __add__(self, other: "GradedMatrix") -> "GradedMatrix":
        self._check_like(other)
        return GradedMatrix(
            self.ring,
            self.rank0,
            self.rank1,
            {key: mat_add(self.blocks[key], other.blocks[key]) for key in self.blocks},
        )

    def __neg__(self) -> "GradedMatrix":
        return GradedMatrix(
            self.ring,
            self.rank0,
            self.rank1,
            {key: mat_neg(block) for key, block in self.blocks.items()},
        )

    def __sub__(self, other: "GradedMatrix") -> "GradedMatrix":
        return self + (-other)

    def scale(self, c) -> "GradedMatrix":
        if isinstance(c, (int, Fraction)):
            c = self.ring.constant(c)
        return self.map_entries(lambda entry: entry.scale(c))

    def _check_like(self, other: "GradedMatrix") -> None:
        if self.ring != other.ring:
            raise RingMismatchError("graded matrices live in different rings")
        if (self.rank0, self.rank1) != (other.rank0, other.rank1):
            raise ShapeError("graded matrices have different ranks")

    def __eq__(self, other):
        return (
            isinstance(other, GradedMatrix)
            and self.ring == other.ring
            and (self.rank0, self.rank1) == (other.rank0, other.rank1)
            and all(self.blocks[key] == other.blocks[key] for key in self.blocks)
        )

    def __repr__(self):
        return "GradedMatrix(ranks=(%d, %d), parity=%s)" % (
            self.rank0,
            self.rank1,
            self.parity(),
        )

    def conjugate(self, g0, g1) -> "GradedMatrix":
        """g . a . g^-1 for the even invertible pair (g0, g1) of 0-forms."""
        ring = self.ring
        ranks = (self.rank0, self.rank1)
        check_shape(g0, ranks[0], ranks[0], "g0")
        check_shape(g1, ranks[1], ranks[1], "g1")
        g = {0: poly_to_form(g0), 1: poly_to_form(g1)}
        ginv = {
            0: poly_to_form(poly_inverse(g0, ring, ranks[0])),
            1: poly_to_form(poly_inverse(g1, ring, ranks[1])),
        }
        blocks = {}
        for (i, j) in _BLOCK_KEYS:
            left = form_mul(g[i], self.blocks[(i, j)], ring, ranks[i], ranks[i], ranks[j])
            blocks[(i, j)] = form_mul(left, ginv[j], ring, ranks[i], ranks[j], ranks[j])
        return GradedMatrix(ring, self.rank0, self.rank1, blocks)


def gmul(a: GradedMatrix, b: GradedMatrix) -> GradedMatrix:
    """Block composition; entry products are wedges, left factor leftmost."""
    a._check_like(b)
    ring = a.ring
    ranks = (a.rank0, a.rank1)
    blocks = {}
    for (i, j) in _BLOCK_KEYS:
        acc = form_zeros(ring, ranks[i], ranks[j])
        for k in (0, 1):
            acc = mat_add(
                acc,
                form_mul(
                    a.blocks[(i, k)], b.blocks[(k, j)], ring, ranks[i], ranks[k], ranks[j]
                ),
            )
        blocks[(i, j)] = acc
    return GradedMatrix(ring, a.rank0, a.rank1, blocks)


def gpow(a: GradedMatrix, k: int) -> GradedMatrix:
    result = GradedMatrix.identity(a.ring, a.rank0, a.rank1)
    for _ in range(k):
        result = gmul(result, a)
    return result


def supertrace(a: GradedMatrix) -> DiffForm:
    """trace(block 00) - trace(block 11); vanishes on odd parity."""
    acc = DiffForm.zero(a.ring)
    for i in range(a.rank0):
        acc = acc + a.blocks[(0, 0)][i][i]
    for i in range(a.rank1):
        acc = acc - a.blocks[(1, 1)][i][i]
    return acc


# ---------------------------------------------------------------------------
# matrix factorizations
# ---------------------------------------------------------------------------


class MatrixFactorization:
    """e0: E0 -> E1 and e1: E1 -> E0 with both compositions equal to w*id."""

    __slots__ = ("ring", "rank0", "rank1", "e0", "e1", "w")

    def __init__(
        self,
        ring: Ring,
        rank0: int,
        rank1: int,
        e0,
        e1,
        w: LocalizedPoly,
    ):
        check_shape(e0, rank1, rank0, "e0")
        check_shape(e1, rank0, rank1, "e1")
        if w.ring != ring:
            raise RingMismatchError("potential lives in a different ring")
        self.ring = ring
        self.rank0 = rank0
        self.rank1 = rank1
        self.e0 = e0
        self.e1 = e1
        self.w = w

    def validate(self) -> list[str]:
        """Check e0*e1 = w*id and e1*e0 = w*id exactly; returns violations
        (empty list means the factorization is valid)."""
        violations = []
        ring = self.ring
        checks = (
            ("e0*e1", poly_mul(self.e0, self.e1, ring, self.rank1, self.rank0, self.rank1), self.rank1),
            ("e1*e0", poly_mul(self.e1, self.e0, ring, self.rank0, self.rank1, self.rank0), self.rank0),
        )
        for name, prod, n in checks:
            for i in range(n):
                for j in range(n):
                    expect = self.w if i == j else ring.zero()
                    if prod[i][j] != expect:
                        violations.append(
                            "%s entry (%d,%d) is %s, expected %s"
                            % (name, i, j, prod[i][j], expect)
                        )
        if not self.w.is_zero() and self.rank0 != self.rank1:
            violations.append(
                "nonzero potential forces rank0 == rank1, got (%d, %d)"
                % (self.rank0, self.rank1)
            )
        return violations

    def require_valid(self) -> "MatrixFactorization":
        violations = self.validate()
        if violations:
            raise ValidationError(violations)
        return self

    def as_graded(self) -> GradedMatrix:
        """The curved differential e as an odd graded matrix of 0-forms."""
        return GradedMatrix.odd(
            self.ring, self.rank0, self.rank1, poly_to_form(self.e0), poly_to_form(self.e1)
        )

    def identity_endo(self) -> GradedMatrix:
        return GradedMatrix.identity(self.ring, self.rank0, self.rank1)

    def dual(self) -> "MatrixFactorization":
        """Dual factorization with potential -w: e0' = -e1^T, e1' = e0^T."""
        e0 = mat_neg(mat_transpose(self.e1, self.rank0, self.rank1))
        e1 = mat_transpose(self.e0, self.rank1, self.rank0)
        return MatrixFactorization(self.ring, self.rank0, self.rank1, e0, e1, -self.w)

    def shift(self) -> "MatrixFactorization":
        """E[1]: swap the graded components and negate the differential."""
        return MatrixFactorization(
            self.ring, self.rank1, self.rank0, mat_neg(self.e1), mat_neg(self.e0), self.w
        )

    def direct_sum(self, other: "MatrixFactorization") -> "MatrixFactorization":
        if self.ring != other.ring:
            raise RingMismatchError("summands live in different rings")
        if self.w != other.w:
            raise ValidationError(["direct summands must share the potential"])
        ring = self.ring

        def block_diag(a, b, rows_a, cols_a, rows_b, cols_b):
            out = poly_zeros(ring, rows_a + rows_b, cols_a + cols_b)
            for i in range(rows_a):
                for j in range(cols_a):
                    out[i][j] = a[i][j]
            for i in range(rows_b):
                for j in range(cols_b):
                    out[rows_a + i][cols_a + j] = b[i][j]
            return out

        return MatrixFactorization(
            ring,
            self.rank0 + other.rank0,
            self.rank1 + other.rank1,
            block_diag(
                self.e0, other.e0, self.rank1, self.rank0, other.rank1, other.rank0
            ),
            block_diag(
                self.e1, other.e1, self.rank0, self.rank1, other.rank0, other.rank1
            ),
            self.w,
        )

    def tensor(self, other: "MatrixFactorization") -> "MatrixFactorization":
        """Tensor product factorization of w + w'.

        Components: (M (x) N)_0 = M0 (x) N0 + M1 (x) N1 and
        (M (x) N)_1 = M0 (x) N1 + M1 (x) N0, with the Koszul signs of
        d = d_M (x) 1 + 1 (x) d_N baked into the blocks.
        """
        if self.ring != other.ring:
            raise RingMismatchError("tensor factors live in different rings")
        ring = self.ring
        m0, m1 = self.e0, self.e1
        n0, n1 = other.e0, other.e1
        a0, a1 = self.rank0, self.rank1
        b0, b1 = other.rank0, other.rank1

        def kron(p, q, rp, cp, rq, cq):
            out = poly_zeros(ring, rp * rq, cp * cq)
            for i in range(rp):
                for j in range(cp):
                    for k in range(rq):
                        for l in range(cq):
                            out[i * rq + k][j * cq + l] = p[i][j] * q[k][l]
            return out

        def stack(tl, tr, bl, br):
            top = [row_l + row_r for row_l, row_r in zip(tl, tr)]
            bottom = [row_l + row_r for row_l, row_r in zip(bl, br)]
            return top + bottom

        eye = lambda n: poly_eye(ring, n)

        # e0: M0N0 (+) M1N1 -> M0N1 (+) M1N0
        e0 = stack(
            kron(eye(a0), n0, a0, a0, b1, b0),
            kron(m1, eye(b1), a0, a1, b1, b1),
            kron(m0, eye(b0), a1, a0, b0, b0),
            mat_neg(kron(eye(a1), n1, a1, a1, b0, b1)),
        )
        # e1: M0N1 (+) M1N0 -> M0N0 (+) M1N1
        e1 = stack(
            kron(eye(a0), n1, a0, a0, b0, b1),
            kron(m1, eye(b0), a0, a1, b0, b0),
            kron(m0, eye(b1), a1, a0, b1, b1),
            mat_neg(kron(eye(a1), n0, a1, a1, b1, b0)),
        )
        return MatrixFactorization(
            ring,
            a0 * b0 + a1 * b1,
            a0 * b1 + a1 * b0,
            e0,
            e1,
            self.w + other.w,
        )

    def __eq__(self, other):
        return (
            isinstance(other, MatrixFactorization)
            and self.ring == other.ring
            and (self.rank0, self.rank1) == (other.rank0, other.rank1)
            and self.e0 == other.e0
            and self.e1 == other.e1
            and self.w == other.w
        )

    def __repr__(self):
        return "MatrixFactorization(ranks=(%d, %d), w=%s)" % (
            self.rank0,
            self.rank1,
            self.w,
        )


def koszul(a: LocalizedPoly, b: LocalizedPoly) -> MatrixFactorization:
    """Rank-(1,1) factorization {a, b} of w = a*b."""
    return MatrixFactorization(a.ring, 1, 1, [[a]], [[b]], a * b)


class Connection:
    """Chart-local connection d + A, one square matrix of 1-forms per
    graded component."""

    __slots__ = ("ring", "A0", "A1")

    def __init__(self, ring: Ring, A0, A1):
        for name, block in (("A0", A0), ("A1", A1)):
            check_shape(block, len(block), len(block), name)
            for row in block:
                for entry in row:
                    if not entry.degrees() <= {1}:
                        raise RingError(
                            "connection entries must be 1-forms, got %s" % entry
                        )
                    if entry.ring != ring:
                        raise RingMismatchError("connection entry in wrong ring")
        self.ring = ring
        self.A0 = A0
        self.A1 = A1

    @classmethod
    def trivial(cls, ring: Ring, rank0: int, rank1: int) -> "Connection":
        return cls(ring, form_zeros(ring, rank0, rank0), form_zeros(ring, rank1, rank1))

    @property
    def rank0(self):
        return len(self.A0)

    @property
    def rank1(self):
        return len(self.A1)

    def as_even_matrix(self) -> GradedMatrix:
        return GradedMatrix.even(self.ring, self.rank0, self.rank1, self.A0, self.A1)

    def __eq__(self, other):
        return (
            isinstance(other, Connection)
            and self.ring == other.ring
            and self.A0 == other.A0
            and self.A1 == other.A1
        )


def supercommutator(mf: MatrixFactorization, conn: Connection) -> GradedMatrix:
    """[nabla, e] = nabla e - e nabla: odd, form degree 1, with blocks
    d(e0) + A1*e0 - e0*A0 and d(e1) + A0*e1 - e1*A1."""
    if (conn.rank0, conn.rank1) != (mf.rank0, mf.rank1):
        raise ShapeError("connection ranks do not match factorization ranks")
    ring = mf.ring
    r0, r1 = mf.rank0, mf.rank1
    e0f = poly_to_form(mf.e0)
    e1f = poly_to_form(mf.e1)
    b10 = mat_add(
        form_d(mf.e0),
        mat_add(
            form_mul(conn.A1, e0f, ring, r1, r1, r0),
            mat_neg(form_mul(e0f, conn.A0, ring, r1, r0, r0)),
        ),
    )
    b01 = mat_add(
        form_d(mf.e1),
        mat_add(
            form_mul(conn.A0, e1f, ring, r0, r0, r1),
            mat_neg(form_mul(e1f, conn.A1, ring, r0, r1, r1)),
        ),
    )
    return GradedMatrix.odd(ring, r0, r1, b10, b01)


def hom_differential(f: GradedMatrix, mf: MatrixFactorization) -> GradedMatrix:
    """Hom-complex differential on endomorphisms: e f - (-1)^|f| f e.

    Requires f of homogeneous Z2 parity; satisfies d(d(f)) = 0 because the
    curvature terms w f - f w cancel.
    """
    parity = f.parity()
    if parity == "mixed":
        raise ShapeError("hom_differential needs a parity-homogeneous argument")
    e = mf.as_graded()
    ef = gmul(e, f)
    fe = gmul(f, e)
    if parity == "odd":
        return ef + fe
    return ef - fe
