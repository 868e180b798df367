"""Detection of small forbidden configurations.

A configuration template is itself a PartialLinearSpace.  find_config
searches for an injective map of template points into the host that
sends every template line into some stored host line; in strict mode
the image must coincide with a host line exactly.  Extra collinearity
among image points is not checked because in a linear space an extra
line inside the image would share two points with a template line's
host, which the constructor forbids.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import corpus
from .space import PartialLinearSpace

TEMPLATES: dict = {name: corpus.load(name) for name in ("pasch", "mitre", "mia")}


def _resolve(template):
    if isinstance(template, PartialLinearSpace):
        return template
    return TEMPLATES[template]


def find_config(space, template, strict=False):
    """First embedding of the template into space, or None.

    Returns a dict mapping template points to host points.  Template
    points are assigned most-constrained first; a partial assignment is
    pruned as soon as a fully-mapped template line has no host line.
    """
    tpl = _resolve(template)
    if tpl.n > space.n:
        return None
    degree = {p: sum(1 for l in tpl.lines if p in l) for p in tpl.points}
    order = sorted(tpl.points, key=lambda p: (-degree[p], p))
    host_pts = list(space.points)

    def line_hosted(image):
        for l in space.lines:
            if image <= l and (not strict or len(l) == len(image)):
                return True
        return False

    assignment = {}
    used = set()

    def extend(i):
        if i == len(order):
            return True
        p = order[i]
        for q in host_pts:
            if q in used:
                continue
            assignment[p] = q
            used.add(q)
            ok = True
            for l in tpl.lines:
                if p not in l:
                    continue
                mapped = frozenset(assignment[x] for x in l if x in assignment)
                if len(mapped) == len(l):
                    if not line_hosted(mapped):
                        ok = False
                        break
                elif len(mapped) >= 2:
                    if not any(mapped <= l2 for l2 in space.lines):
                        ok = False
                        break
            if ok and extend(i + 1):
                return True
            del assignment[p]
            used.discard(q)
        return False

    if extend(0):
        return dict(assignment)
    return None


def count_configurations(space, n):
    """Number of (n+2)-point subsets inducing exactly n lines of size >= 3."""
    size = n + 2
    if size < 0 or size > space.n:
        return 0
    count = 0
    for sub in itertools.combinations(space.points, size):
        pts = set(sub)
        traces = sum(1 for l in space.lines if len(l & pts) >= 3)
        if traces == n:
            count += 1
    return count


def is_infinity_sparse(space, size_cap=None):
    """Scan every subset for a witness A with delta(A) = 2 and |A| >= 6.

    Returns (True, None) when no witness exists up to the cap, else
    (False, witness) with the smallest witness (ties broken by mask
    value).  Exact over the whole subset lattice, so the host must stay
    within the scanning capacity.
    """
    cap = space.n if size_cap is None else min(size_cap, space.n)
    if cap < 6:
        return True, None
    best = None
    for masks, deltas in space._scan(np.uint64(0)):
        sizes = np.bitwise_count(masks)
        sel = (deltas == 2) & (sizes >= 6) & (sizes <= cap)
        if not sel.any():
            continue
        for m, s in zip(masks[sel], sizes[sel]):
            key = (int(s), int(m))
            if best is None or key < best:
                best = key
    if best is None:
        return True, None
    mask = best[1]
    witness = frozenset(p for i, p in enumerate(space.points) if mask >> i & 1)
    return False, witness
