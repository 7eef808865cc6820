"""Cech differential and total differential on form-valued cochains.

The total differential is D = cech_d + gamma * (dw /\\ -), where gamma acts
on the entry at Cech degree p and form degree q as (-1)^(p+q).  Equivalently
gamma is (-1)^p against dw wedged from the right; with dw wedged on the left
(the convention everywhere in this package) the form degree enters the sign.
D squares to zero on arbitrary cochains, and the Chern character cocycle is
D-closed on every model; the master closedness test pins this convention.
"""

from __future__ import annotations

from .cochains import OmegaCochain
from .cover import CoverModel
from .forms import DiffForm, dw_wedge


def cech_d(c: OmegaCochain) -> OmegaCochain:
    """Alternating sum of restrictions: (dc)_T = sum_k (-1)^k c_{T minus k}."""
    model = c.model
    out = OmegaCochain(model)
    lengths = {len(t) for (t, _q) in c.entries}
    if not lengths:
        return out
    for t in model.all_tuples():
        if (len(t) - 1) not in lengths:
            continue
        for k in range(len(t)):
            face = t[:k] + t[k + 1 :]
            for q in _degrees_at(c, face):
                form = c.entry(face, q)
                moved = model.restrict_form(form, face, t)
                if k % 2:
                    moved = -moved
                out.add_to_entry(t, q, moved)
    return out


def _degrees_at(c: OmegaCochain, t) -> list[int]:
    t = tuple(t)
    return sorted(q for (s, q) in c.entries if s == t)


def total_d(c: OmegaCochain) -> OmegaCochain:
    """D(c) = cech_d(c) + (-1)^(p+q) dw /\\ c per entry."""
    model = c.model
    out = cech_d(c)
    for (t, q), form in c.entries.items():
        p = len(t) - 1
        w = model.potential_on(t)
        wedge = dw_wedge(form, w)
        if wedge.is_zero():
            continue
        if (p + q) % 2:
            wedge = -wedge
        out.add_to_entry(t, q + 1, wedge)
    return out


def check_closed(c: OmegaCochain):
    """Exact closedness test: returns (True, None) or (False, offending key
    with its value)."""
    d = total_d(c)
    if d.is_zero():
        return True, None
    key = d.first_nonzero()
    return False, (key, d.entries[key])
