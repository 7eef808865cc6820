"""The Chern character and boundary-bulk formulas.

Locally, ch(E) = str(sum_k [nabla, e]^k / k!) truncated at k = n, the number
of chart variables (higher powers carry form degree above n and vanish).

Globally, over a cover with chart-local connections, the tuple
(i0 < ... < ip) contributes the sum over k0..kp >= 0, k0+...+kp+p <= n, of

    tau_p(k) [nabla_{i0}, e]^{k0} (nabla_{i0} - nabla_{i1}) [nabla_{i1}, e]^{k1}
        ... (nabla_{i_{p-1}} - nabla_{i_p}) [nabla_{i_p}, e]^{k_p}

with tau_p(k) = (-1)^{sum_j j (k_j + 1)}, all factors restricted to the
tuple's overlap ring and written in the i0-frame.  The assembled cocycle
divides the form-degree-q part of the supertrace by q! and multiplies by
(-1)^{p(p-1)/2}; together with tau_p this reproduces the closed-form sign
(-1)^{p + sum_j j k_j} with weight 1/(k0+...+kp+p)! per term.

The boundary-bulk map evaluates the same connection factors against an
endomorphism cochain, combining tuples by the Cech cup rule: the connection
factor on the front face (i0..ip) composes with the endomorphism on the
back face (ip..i_{p+q}), sharing the middle vertex.  At the identity
0-cochain this reduces to the Chern character on the nose.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from math import factorial

from .cochains import EndoCochain, OmegaCochain, identity_endo_cochain
from .cover import ChartTuple, GlobalMF, LocalConnections, connection_on
from .forms import DiffForm
from .mfcore import (
    Connection,
    GradedMatrix,
    MatrixFactorization,
    ValidationError,
    gmul,
    hom_differential,
    supercommutator,
    supertrace,
)


def local_chern(mf: MatrixFactorization, conn: Connection) -> DiffForm:
    """str(sum_{k=0}^{n} [nabla, e]^k / k!) over the factorization's ring."""
    n = mf.ring.nvars
    nabla_e = supercommutator(mf, conn)
    power = GradedMatrix.identity(mf.ring, mf.rank0, mf.rank1)
    total = DiffForm.zero(mf.ring)
    for k in range(n + 1):
        if k:
            power = gmul(power, nabla_e)
        total = total + supertrace(power).scale(Fraction(1, factorial(k)))
    return total


def _compositions(total: int, parts: int):
    """All tuples of `parts` nonnegative integers summing to `total`."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def _tau_sign(ks: tuple[int, ...]) -> int:
    exponent = sum(j * (k + 1) for j, k in enumerate(ks))
    return -1 if exponent % 2 else 1


def cech_components(
    gmf: GlobalMF,
    conns: LocalConnections,
    t: ChartTuple,
    frame: int | None = None,
) -> GradedMatrix:
    """Sum over exponent tuples of the tau-signed connection products for
    one chart tuple, before supertrace and factorial weights.

    All factors are restricted to the tuple's overlap ring and transported
    into the frame chart's trivialization (default: the first chart).  The
    supertrace of the result is frame independent.
    """
    t = tuple(t)
    p = len(t) - 1
    frame = t[0] if frame is None else frame
    model = gmf.model
    ring = model.ring_of(t)
    n = ring.nvars
    mf = gmf.mf_on(t, frame=frame)
    brackets = []
    connections = []
    for chart in t:
        conn = connection_on(gmf, conns, chart, t, frame=frame)
        connections.append(conn)
        brackets.append(supercommutator(mf, conn))
    differences = [
        connections[l].as_even_matrix() - connections[l + 1].as_even_matrix()
        for l in range(p)
    ]
    total = GradedMatrix.zero(ring, gmf.rank0, gmf.rank1)
    if p > n:
        return total
    for weight in range(p, n + 1):
        for ks in _compositions(weight - p, p + 1):
            term = None
            for l in range(p + 1):
                for _ in range(ks[l]):
                    term = brackets[l] if term is None else gmul(term, brackets[l])
                if l < p:
                    term = differences[l] if term is None else gmul(term, differences[l])
            if term is None:
                term = GradedMatrix.identity(ring, gmf.rank0, gmf.rank1)
            if _tau_sign(ks) < 0:
                term = -term
            total = total + term
    return total


def _gluing_sign(p: int) -> int:
    return -1 if (p * (p - 1) // 2) % 2 else 1


def _factorial_rescale(form: DiffForm) -> DiffForm:
    out = DiffForm.zero(form.ring)
    for q in form.degrees():
        out = out + form.degree_part(q).scale(Fraction(1, factorial(q)))
    return out


def _thread_count() -> int:
    raw = os.environ.get("MFCHERN_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(["MFCHERN_THREADS must be an integer >= 1"]) from None
    if n < 1:
        raise ValidationError(["MFCHERN_THREADS must be an integer >= 1"])
    return n


def cech_chern(
    gmf: GlobalMF, conns: LocalConnections, threads: int | None = None
) -> OmegaCochain:
    """The Chern character cocycle in the Cech model of the two-periodic
    complex.  Per-tuple work is independent; assembly is deterministic for
    any thread count."""
    model = gmf.model
    tuples = model.all_tuples()
    threads = _thread_count() if threads is None else threads

    def entry_for(t: ChartTuple) -> DiffForm:
        p = len(t) - 1
        traced = supertrace(cech_components(gmf, conns, t))
        scaled = _factorial_rescale(traced)
        if _gluing_sign(p) < 0:
            scaled = -scaled
        return scaled

    if threads > 1 and len(tuples) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(zip(tuples, pool.map(entry_for, tuples)))
    else:
        results = {t: entry_for(t) for t in tuples}

    out = OmegaCochain(model)
    for t in tuples:
        form = results[t]
        for q in sorted(form.degrees()):
            out.add_to_entry(t, q, form.degree_part(q))
    return out


def endo_is_closed(endo: EndoCochain) -> list[str]:
    """Check hom-closedness (e f = (-1)^|f| f e per entry) and Cech
    closedness (alternating frame-transported restrictions cancel)."""
    gmf = endo.gmf
    model = gmf.model
    violations = []
    for t, mat in sorted(endo.entries.items()):
        mf = gmf.mf_on(t)
        d = hom_differential(mat, mf)
        if not d.is_zero():
            violations.append(
                "endomorphism at %s is not closed under the hom differential"
                % model.names_of_tuple(t)
            )
    max_p = endo.max_cech_degree()
    for t in model.all_tuples():
        p = len(t) - 1
        if p == 0 or p > max_p + 1:
            continue
        acc = GradedMatrix.zero(model.ring_of(t), gmf.rank0, gmf.rank1)
        for k in range(len(t)):
            face = t[:k] + t[k + 1 :]
            if face not in endo.entries:
                continue
            moved = _move_endo(endo, face, t)
            acc = acc + (moved if k % 2 == 0 else -moved)
        if not acc.is_zero():
            violations.append(
                "endomorphism cochain fails the Cech cocycle condition on %s"
                % model.names_of_tuple(t)
            )
    return violations


def _move_endo(endo: EndoCochain, src: ChartTuple, dst: ChartTuple) -> GradedMatrix:
    """Restrict an entry from its tuple to a finer tuple and rewrite it in
    the finer tuple's first-chart frame."""
    gmf = endo.gmf
    model = gmf.model
    mat = endo.entry(src)
    ring = model.ring_of(dst)
    restricted = mat.map_entries(
        lambda entry: model.restrict_form(entry, src, dst), ring
    )
    if src[0] == dst[0]:
        return restricted
    g0, g1 = gmf.transition_on(dst[0], src[0], dst)
    return restricted.conjugate(g0, g1)


def boundary_bulk(
    gmf: GlobalMF,
    conns: LocalConnections,
    endo: EndoCochain,
    strict: bool = True,
    threads: int | None = None,
) -> OmegaCochain:
    """The boundary-bulk map evaluated on an endomorphism cochain.

    Output tuples combine the connection-factor tuple with the endomorphism
    tuple by the cup rule (front face composed with back face sharing the
    middle vertex).  With the identity 0-cochain the result equals
    cech_chern bit for bit.
    """
    problems = endo_is_closed(endo)
    if problems:
        if strict:
            raise ValidationError(problems)
        for message in problems:
            warnings.warn(message)
    model = gmf.model
    threads = _thread_count() if threads is None else threads
    tuples = model.all_tuples()

    def entry_for(t: ChartTuple) -> DiffForm:
        total = DiffForm.zero(model.ring_of(t))
        for cut in range(len(t)):
            front = t[: cut + 1]
            back = t[cut:]
            if back not in endo.entries:
                continue
            p = len(front) - 1
            components = cech_components(gmf, conns, front)
            moved = components.map_entries(
                lambda entry: model.restrict_form(entry, front, t), model.ring_of(t)
            )
            f_part = _move_endo(endo, back, t)
            traced = supertrace(gmul(_rescale_matrix(moved), f_part))
            if _gluing_sign(p) < 0:
                traced = -traced
            total = total + traced
        return total

    if threads > 1 and len(tuples) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = dict(zip(tuples, pool.map(entry_for, tuples)))
    else:
        results = {t: entry_for(t) for t in tuples}

    out = OmegaCochain(model)
    for t in tuples:
        form = results[t]
        for q in sorted(form.degrees()):
            out.add_to_entry(t, q, form.degree_part(q))
    return out


def _rescale_matrix(mat: GradedMatrix) -> GradedMatrix:
    """Divide the form-degree-q part of every entry by q! (the factorial
    weight counts only the connection factors, never the endomorphism)."""
    return mat.map_entries(_factorial_rescale)


def chern_at_identity(gmf: GlobalMF, conns: LocalConnections) -> OmegaCochain:
    """boundary_bulk at the identity 0-cochain."""
    return boundary_bulk(gmf, conns, identity_endo_cochain(gmf))
