"""Partial linear spaces and the predimension calculus on them.

A structure holds labeled points and stored lines. Each stored line has at
least three points and two points share at most one line; collinearity of a
bare pair is never stored. For a point set A the predimension is

    delta(A) = |A| - sum over lines of max(|line & A| - 2, 0)

so a line costs one for each point beyond its second. The minimization
routines (dim, is_strong, icl) are exact subset scans over the points
outside the queried set, vectorized over bitmasks, and refuse to scan more
than 2**24 candidate sets rather than fall back to a heuristic.

Labels are ints or strings, ordered ints first. An optional star table
stores a binary operation on points, used by quasigroup backed systems;
the constructor checks only shape, deeper coherence belongs to the class
checks in pairs.
"""

from __future__ import annotations

import itertools
import json
import math
from typing import Mapping

import numpy as np

SCAN_CAP = 24
_CHUNK = 1 << 18
_CANON_CAP = 1_000_000


class LinearSpaceError(ValueError):
    """Points, lines, or a star table violate the structure axioms."""


class CapacityError(RuntimeError):
    """An exact scan would exceed the supported size."""


def label_key(label):
    """Sort key for point labels; ints order before strings."""
    if isinstance(label, bool) or not isinstance(label, (int, str)):
        raise LinearSpaceError(f"label {label!r} is not an int or str")
    return (0, label) if isinstance(label, int) else (1, label)


def _freeze_lines(lines, index):
    frozen = []
    for line in lines:
        fs = frozenset(line)
        if len(fs) < 3:
            raise LinearSpaceError("a stored line needs at least three points")
        for p in fs:
            if p not in index:
                raise LinearSpaceError(f"line point {p!r} is not a point")
        frozen.append(fs)
    frozen.sort(key=lambda l: tuple(sorted(label_key(p) for p in l)))
    for a, b in itertools.combinations(frozen, 2):
        if len(a & b) > 1:
            raise LinearSpaceError("two stored lines share two points")
    return tuple(frozen)


def _freeze_star(star, index):
    if star is None:
        return None
    if isinstance(star, Mapping):
        entries = [(x, y, z) for (x, y), z in star.items()]
    else:
        entries = [tuple(t) for t in star]
    table = {}
    for entry in entries:
        if len(entry) != 3:
            raise LinearSpaceError("star entries must be (x, y, x*y) triples")
        x, y, z = entry
        for p in (x, y, z):
            if p not in index:
                raise LinearSpaceError(f"star entry uses {p!r}, not a point")
        if table.get((x, y), z) != z:
            raise LinearSpaceError(f"star table defines ({x!r}, {y!r}) twice")
        table[(x, y)] = z
    return table


class PartialLinearSpace:
    """Immutable partial linear space with an optional star table."""

    __slots__ = ("points", "lines", "star", "_index", "_line_masks")

    def __init__(self, points, lines=(), star=None):
        pts = list(points)
        if len(set(pts)) != len(pts):
            raise LinearSpaceError("duplicate points")
        self.points = tuple(sorted(pts, key=label_key))
        self._index = {p: i for i, p in enumerate(self.points)}
        self.lines = _freeze_lines(lines, self._index)
        self.star = _freeze_star(star, self._index)
        self._line_masks = None

    # -------------------------------------------------- basics

    @property
    def n(self) -> int:
        return len(self.points)

    def __repr__(self):
        star = "" if self.star is None else f", star[{len(self.star)}]"
        return f"PartialLinearSpace({self.n} points, {len(self.lines)} lines{star})"

    def __eq__(self, other):
        if not isinstance(other, PartialLinearSpace):
            return NotImplemented
        return (self.points == other.points and self.lines == other.lines
                and self.star == other.star)

    def __hash__(self):
        star = None if self.star is None else frozenset(self.star.items())
        return hash((self.points, self.lines, star))

    def _check_subset(self, subset):
        pts = set(subset)
        for p in pts:
            if p not in self._index:
                raise LinearSpaceError(f"{p!r} is not a point of the structure")
        return pts

    def line_through(self, x, y):
        """The stored line on both points, or None. x and y must differ."""
        if x == y:
            raise LinearSpaceError("line_through needs two distinct points")
        for line in self.lines:
            if x in line and y in line:
                return line
        return None

    def collinear(self, x, y, z):
        line = self.line_through(x, y)
        return line is not None and z in line

    # -------------------------------------------------- predimension

    def delta(self, subset=None) -> int:
        if subset is None:
            pts = set(self.points)
        else:
            pts = self._check_subset(subset)
        return len(pts) - sum(max(len(line & pts) - 2, 0) for line in self.lines)

    def rel_delta(self, ext, base) -> int:
        """delta of base+ext minus delta of base."""
        base = self._check_subset(base)
        ext = self._check_subset(ext)
        return self.delta(base | ext) - self.delta(base)

    def induced(self, subset) -> "PartialLinearSpace":
        keep = self._check_subset(subset)
        lines = [line & keep for line in self.lines if len(line & keep) >= 3]
        star = None
        if self.star is not None:
            star = {k: v for k, v in self.star.items()
                    if k[0] in keep and k[1] in keep and v in keep}
        return PartialLinearSpace(keep, lines, star)

    # -------------------------------------------------- mask scans

    def _masks(self):
        if self._line_masks is None:
            if self.n > 63:
                raise CapacityError("mask operations support at most 63 points")
            lm = np.zeros(len(self.lines), dtype=np.uint64)
            for i, line in enumerate(self.lines):
                m = 0
                for p in line:
                    m |= 1 << self._index[p]
                lm[i] = m
            self._line_masks = lm
        return self._line_masks

    def _mask_of(self, subset) -> int:
        m = 0
        for p in self._check_subset(subset):
            m |= 1 << self._index[p]
        return m

    def _labels_of(self, mask: int) -> frozenset:
        return frozenset(self.points[i] for i in range(self.n) if (mask >> i) & 1)

    def _scan(self, fixed_mask: int):
        """Yield (masks, deltas) numpy chunks over all supersets of fixed_mask."""
        free = [i for i in range(self.n) if not (fixed_mask >> i) & 1]
        if len(free) > SCAN_CAP:
            raise CapacityError(
                f"exact scan over {len(free)} free points exceeds 2**{SCAN_CAP} sets")
        line_masks = self._masks()
        total = 1 << len(free)
        for start in range(0, total, _CHUNK):
            idx = np.arange(start, min(start + _CHUNK, total), dtype=np.uint64)
            masks = np.full(idx.shape, fixed_mask, dtype=np.uint64)
            for j, pos in enumerate(free):
                masks |= ((idx >> np.uint64(j)) & np.uint64(1)) << np.uint64(pos)
            deltas = np.bitwise_count(masks).astype(np.int64)
            for lm in line_masks:
                t = np.bitwise_count(masks & lm).astype(np.int64)
                t -= 2
                np.maximum(t, 0, out=t)
                deltas -= t
            yield masks, deltas

    def dim(self, subset) -> int:
        """Minimal delta over supersets of the subset."""
        best = None
        for _, deltas in self._scan(self._mask_of(subset)):
            low = int(deltas.min())
            best = low if best is None else min(best, low)
        return best

    def is_strong(self, subset) -> bool:
        """No superset drops delta below delta(subset)."""
        return self.dim(subset) == self.delta(subset)

    def icl(self, subset) -> frozenset:
        """The least strong superset.

        Repeatedly absorbs the smallest minimum-delta witness; every strong
        superset contains that witness, so the loop lands on the least one.
        """
        current = self._mask_of(subset)
        while True:
            best = None
            for masks, deltas in self._scan(current):
                low = int(deltas.min())
                sel = masks[deltas == low]
                counts = np.bitwise_count(sel)
                small = sel[counts == counts.min()]
                key = (low, int(counts.min()), int(small.min()))
                if best is None or key < best:
                    best = key
            low, _, witness = best
            if low == self.delta(self._labels_of(current)):
                return self._labels_of(current)
            current = witness

    def r_closure(self, subset) -> frozenset:
        """Close under adding whole lines once two of their points are in."""
        current = set(self._check_subset(subset))
        changed = True
        while changed:
            changed = False
            for line in self.lines:
                if len(line & current) >= 2 and not line <= current:
                    current |= line
                    changed = True
        return frozenset(current)

    # -------------------------------------------------- identity and IO

    def relabel(self, mapping) -> "PartialLinearSpace":
        f = lambda p: mapping.get(p, p)
        star = None
        if self.star is not None:
            star = [(f(x), f(y), f(z)) for (x, y), z in self.star.items()]
        return PartialLinearSpace([f(p) for p in self.points],
                                  [[f(p) for p in line] for line in self.lines],
                                  star)

    def to_json(self) -> str:
        doc = {"points": list(self.points),
               "lines": [sorted(line, key=label_key) for line in self.lines]}
        if self.star is not None:
            doc["star"] = sorted(([x, y, z] for (x, y), z in self.star.items()),
                                 key=lambda t: (label_key(t[0]), label_key(t[1])))
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PartialLinearSpace":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise LinearSpaceError(f"bad JSON: {exc}") from None
        if not isinstance(doc, dict) or "points" not in doc:
            raise LinearSpaceError("expected an object with a 'points' field")
        star = doc.get("star")
        if star is not None:
            star = [tuple(t) for t in star]
        return cls(doc["points"], doc.get("lines", ()), star)

    def to_dot(self) -> str:
        out = ["graph linearspace {", "  node [shape=circle];"]
        for p in self.points:
            out.append(f'  "{p}";')
        for i, line in enumerate(self.lines):
            tag = f"L{i}"
            out.append(f'  "{tag}" [shape=box, label="{tag}"];')
            for p in sorted(line, key=label_key):
                out.append(f'  "{tag}" -- "{p}";')
        out.append("}")
        return "\n".join(out) + "\n"


# ------------------------------------------------------ amalgamation

def free_amalgam(left: PartialLinearSpace, right: PartialLinearSpace, common,
                 require_strong: bool = False) -> PartialLinearSpace:
    """Join two structures over their shared part.

    The domains must overlap exactly in `common` and induce the same
    structure on it. Lines whose traces on the common part share two points
    merge into a single line; no other relation crosses the two sides. The
    result's predimension is exactly delta(left) + delta(right) - delta(common).

    Raises LinearSpaceError if the overlap is wrong, the induced parts
    differ, the merged line family is not a linear space (no canonical
    join exists for the triple), or require_strong is set and the common
    part is not strong on both sides.
    """
    c = frozenset(common)
    if (set(left.points) & set(right.points)) != c:
        raise LinearSpaceError("domains must overlap exactly in the common part")
    if left.induced(c) != right.induced(c):
        raise LinearSpaceError("sides induce different structures on the common part")
    if require_strong:
        for name, side in (("left", left), ("right", right)):
            if not side.is_strong(c):
                raise LinearSpaceError(f"common part is not strong in the {name} side")

    merged: dict[frozenset, set] = {}
    plain = []
    for side in (left, right):
        for line in side.lines:
            trace = frozenset(line & c)
            if len(trace) >= 2:
                merged.setdefault(trace, set()).update(line)
            else:
                plain.append(set(line))
    for a, b in itertools.combinations(merged, 2):
        if len(a & b) >= 2:
            raise LinearSpaceError("incoherent traces on the common part")
    # two merged families can collide only through a point repeated across
    # families on each side, which strongness of the common part in either
    # side rules out
    for a, b in itertools.combinations([frozenset(v) for v in merged.values()], 2):
        if len(a & b) >= 2:
            raise LinearSpaceError(
                "merged line families collide; the triple has no canonical join")

    star = None
    if left.star is not None or right.star is not None:
        star = {}
        for side in (left, right):
            for key, val in (side.star or {}).items():
                if star.get(key, val) != val:
                    raise LinearSpaceError(f"star tables disagree at {key}")
                star[key] = val

    points = set(left.points) | set(right.points)
    result = PartialLinearSpace(points, list(merged.values()) + plain, star)
    assert result.delta() == left.delta() + right.delta() - left.delta(c)
    return result


# ------------------------------------------------------ isomorphism

def _profile(space, p):
    return tuple(sorted(len(line) for line in space.lines if p in line))


def isomorphic(left: PartialLinearSpace, right: PartialLinearSpace,
               return_map: bool = False):
    """Structure isomorphism by backtracking on line-degree profiles."""
    fail = (False, None) if return_map else False
    if left.n != right.n or len(left.lines) != len(right.lines):
        return fail
    lp = {p: _profile(left, p) for p in left.points}
    rp = {p: _profile(right, p) for p in right.points}
    if sorted(lp.values()) != sorted(rp.values()):
        return fail

    order = sorted(left.points,
                   key=lambda p: (sum(1 for q in left.points if lp[q] == lp[p]),
                                  label_key(p)))
    rights = list(right.points)

    def extend(i, mapping, used):
        if i == len(order):
            image_lines = {frozenset(mapping[p] for p in line) for line in left.lines}
            if image_lines != set(right.lines):
                return None
            if (left.star is None) != (right.star is None):
                return None
            if left.star is not None:
                image_star = {(mapping[x], mapping[y]): mapping[z]
                              for (x, y), z in left.star.items()}
                if image_star != right.star:
                    return None
            return dict(mapping)
        p = order[i]
        for q in rights:
            if q in used or rp[q] != lp[p]:
                continue
            ok = True
            for p2, q2 in mapping.items():
                ll = left.line_through(p, p2)
                rl = right.line_through(q, q2)
                if (ll is None) != (rl is None):
                    ok = False
                    break
                if ll is not None and len(ll) != len(rl):
                    ok = False
                    break
            if not ok:
                continue
            mapping[p] = q
            used.add(q)
            found = extend(i + 1, mapping, used)
            if found is not None:
                return found
            del mapping[p]
            used.discard(q)
        return None

    found = extend(0, {}, set())
    if return_map:
        return (found is not None, found)
    return found is not None


def canonical_form(space: PartialLinearSpace, blocks=None):
    """Order-invariant encoding, optionally respecting an ordered partition.

    Two structures get the same form exactly when some isomorphism maps the
    k-th block of one onto the k-th block of the other.
    """
    pset = set(space.points)
    if blocks is None:
        blocks = [pset]
    else:
        blocks = [set(b) for b in blocks]
        seen: set = set()
        for b in blocks:
            if b - pset or b & seen:
                raise LinearSpaceError("blocks must be disjoint sets of points")
            seen |= b
        if seen != pset:
            raise LinearSpaceError("blocks must cover all points")

    starred = set()
    if space.star:
        for (x, y), z in space.star.items():
            starred |= {x, y, z}

    cells: dict = {}
    for p in space.points:
        b = next(i for i, blk in enumerate(blocks) if p in blk)
        cells.setdefault((b, _profile(space, p)), []).append(p)
    keys = sorted(cells)
    ordered = [sorted(cells[k], key=label_key) for k in keys]

    total = 1
    cell_perms = []
    for cell in ordered:
        inert = all(_profile(space, p) == () and p not in starred for p in cell)
        if inert or len(cell) == 1:
            cell_perms.append([tuple(cell)])
        else:
            cell_perms.append(list(itertools.permutations(cell)))
            total *= math.factorial(len(cell))
            if total > _CANON_CAP:
                raise CapacityError("canonical form search too large")

    best = None
    for combo in itertools.product(*cell_perms):
        pos = {}
        i = 0
        for chunk in combo:
            for p in chunk:
                pos[p] = i
                i += 1
        enc_lines = tuple(sorted(tuple(sorted(pos[p] for p in line))
                                 for line in space.lines))
        enc_star = ()
        if space.star:
            enc_star = tuple(sorted((pos[x], pos[y], pos[z])
                                    for (x, y), z in space.star.items()))
        enc = (enc_lines, enc_star)
        if best is None or enc < best:
            best = enc
    header = (space.n, tuple((k[0], k[1], len(cells[k])) for k in keys))
    return (header, best)


# ------------------------------------------------------ enumeration

def all_linear_spaces(n: int, min_line: int = 3):
    """Yield every structure on points 0..n-1, each exactly once.

    Candidate lines are all point sets of size >= min_line; a compatibility
    DFS extends line families while any two chosen lines share at most one
    point.
    """
    pts = list(range(n))
    cands = [frozenset(c) for k in range(min_line, n + 1)
             for c in itertools.combinations(pts, k)]
    comp = []
    for i, a in enumerate(cands):
        mask = 0
        for j in range(i + 1, len(cands)):
            if len(a & cands[j]) <= 1:
                mask |= 1 << j
        comp.append(mask)

    def rec(chosen, allowed):
        yield PartialLinearSpace(pts, [cands[i] for i in chosen])
        a = allowed
        while a:
            j = (a & -a).bit_length() - 1
            a &= a - 1
            chosen.append(j)
            yield from rec(chosen, allowed & comp[j])
            chosen.pop()

    yield from rec([], (1 << len(cands)) - 1)
