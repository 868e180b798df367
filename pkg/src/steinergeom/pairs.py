"""Good pairs, disjoint-copy counts, mu bounds, and class membership.

A pair (B, C) is judged inside the structure induced on B+C, so its
properties are intrinsic to the pair and invariant under isomorphism.
Strongness questions over extension subsets are answered with two
lattice transforms of the delta table over subsets of C: a subset-min
pass decides whether B is strong below a given level, a superset-min
pass decides whether a level is strong in the whole pair.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .blockalg import BlockAlgebra, FiniteField, _generator_map
from .configs import find_config
from .space import (
    CapacityError,
    LinearSpaceError,
    PartialLinearSpace,
    canonical_form,
    label_key,
)

_EXT_CAP = 16


def _sorted_pts(pts):
    return tuple(sorted(pts, key=label_key))


def _delta_table(space, base, ext):
    """delta(base + subset-of-ext) indexed by bitmask over ext."""
    k = len(ext)
    if k > _EXT_CAP:
        raise CapacityError(f"extension of {k} points is too large")
    base = set(base)
    out = np.empty(1 << k, dtype=np.int64)
    for m in range(1 << k):
        out[m] = space.delta(base | {ext[i] for i in range(k) if m >> i & 1})
    return out


def _subset_min(table):
    t = table.copy()
    size = t.size
    step = 1
    while step < size:
        for start in range(0, size, 2 * step):
            lo = t[start:start + step]
            hi = t[start + step:start + 2 * step]
            np.minimum(hi, lo, out=hi)
        step *= 2
    return t


def _superset_min(table):
    t = table.copy()
    size = t.size
    step = 1
    while step < size:
        for start in range(0, size, 2 * step):
            lo = t[start:start + step]
            hi = t[start + step:start + 2 * step]
            np.minimum(lo, hi, out=lo)
        step *= 2
    return t


def _zero_extension(space, base, ext):
    """base <= base+ext with no predimension gained."""
    ext = _sorted_pts(ext)
    tab = _delta_table(space, base, ext)
    full = tab.size - 1
    return tab[full] == tab[0] and _subset_min(tab)[full] == tab[0]


def is_zero_primitive(space, ext, base):
    """ext is a minimal 0-extension step over base: no proper nonempty
    intermediate level is strong on both sides."""
    base = frozenset(base)
    ext_set = frozenset(ext)
    if not ext_set:
        return False
    if base & ext_set:
        raise LinearSpaceError("base and extension must be disjoint")
    ext = _sorted_pts(ext_set)
    tab = _delta_table(space, base, ext)
    full = tab.size - 1
    d_base = tab[0]
    if tab[full] != d_base:
        return False
    g = _subset_min(tab)
    if g[full] != d_base:
        return False
    h = _superset_min(tab)
    for m in range(1, full):
        if g[m] == d_base and h[m] == tab[m]:
            return False
    return True


def is_good_pair(space, base, ext):
    base = frozenset(base)
    ext_set = frozenset(ext)
    if not ext_set or base & ext_set:
        return False
    if not is_zero_primitive(space, ext_set, base):
        return False
    for r in range(len(base)):
        for sub in itertools.combinations(_sorted_pts(base), r):
            if _zero_extension(space, frozenset(sub), ext_set):
                return False
    return True


def find_good_base(space, ext, within=None):
    """Smallest candidate set (ties by label order) over which ext is a
    0-extension, or None."""
    ext = frozenset(ext)
    pool = set(space.points) - ext if within is None else set(within)
    if pool & ext:
        raise LinearSpaceError("candidate pool overlaps the extension")
    cands = _sorted_pts(pool)
    if len(cands) > _EXT_CAP:
        raise CapacityError(f"candidate pool of {len(cands)} points is too large")
    for size in range(len(cands) + 1):
        for combo in itertools.combinations(cands, size):
            if _zero_extension(space, frozenset(combo), ext):
                return frozenset(combo)
    return None


# ------------------------------------------------------ enumeration

def _collinearity_adjacency(space):
    adj = {p: set() for p in space.points}
    for line in space.lines:
        for x, y in itertools.combinations(line, 2):
            adj[x].add(y)
            adj[y].add(x)
    return adj


def _is_connected(subset, adj):
    subset = set(subset)
    start = next(iter(subset))
    seen = {start}
    stack = [start]
    while stack:
        for w in adj[stack.pop()] & subset:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == subset


def enumerate_good_pairs(space, max_size):
    """All good pairs (base, ext) with at most max_size points combined.

    Connectivity of base+ext in the collinearity graph is a proved
    necessary condition, so only connected subsets are scanned.
    """
    if max_size > 8:
        raise CapacityError("pair enumeration beyond 8 points is too large")
    adj = _collinearity_adjacency(space)
    points = _sorted_pts(space.points)
    found = []
    for size in range(1, min(max_size, len(points)) + 1):
        for sub in itertools.combinations(points, size):
            if not _is_connected(sub, adj):
                continue
            d_all = space.delta(sub)
            for r in range(size):
                for b in itertools.combinations(sub, r):
                    base = frozenset(b)
                    if space.delta(base) != d_all:
                        continue
                    ext = frozenset(sub) - base
                    if is_good_pair(space, base, ext):
                        found.append((base, ext))
    found.sort(key=lambda bc: (len(bc[0] | bc[1]),
                               tuple(label_key(p) for p in _sorted_pts(bc[0] | bc[1])),
                               len(bc[0]),
                               tuple(label_key(p) for p in _sorted_pts(bc[0]))))
    return found


def canonical_pair_form(space, base, ext):
    base = frozenset(base)
    ext = frozenset(ext)
    pair = space.induced(base | ext)
    return canonical_form(pair, blocks=[base, ext])


# ------------------------------------------------------ copy counting

def _verify_copy(space, pair, mapping):
    image = frozenset(mapping.values())
    if len(image) != pair.n:
        return False
    sub = space.induced(image)
    expected = {frozenset(mapping[p] for p in line) for line in pair.lines}
    if {frozenset(l) for l in sub.lines} != expected:
        return False
    if pair.star is not None:
        mapped = {(mapping[x], mapping[y]): mapping[z]
                  for (x, y), z in pair.star.items()}
        if mapped != (sub.star or {}):
            return False
    return True


def _copy_images(space, base, ext):
    """C-images of embeddings fixing the base pointwise, as frozensets."""
    base = frozenset(base)
    ext_set = frozenset(ext)
    pair = space.induced(base | ext_set)
    degree = {p: sum(1 for l in pair.lines if p in l) for p in pair.points}
    order = sorted(ext_set, key=lambda p: (-degree[p], label_key(p)))
    lines = [frozenset(l) for l in pair.lines]
    mapping = {p: p for p in base}
    taken = set(base)
    images = set()

    def feasible(p):
        for l in lines:
            if p not in l:
                continue
            placed = frozenset(mapping[x] for x in l if x in mapping)
            if len(placed) >= 2 and not any(placed <= ml for ml in space.lines):
                return False
        return True

    def rec(i):
        if i == len(order):
            if _verify_copy(space, pair, mapping):
                images.add(frozenset(mapping[c] for c in order))
            return
        p = order[i]
        for q in space.points:
            if q in taken:
                continue
            mapping[p] = q
            taken.add(q)
            if feasible(p):
                rec(i + 1)
            del mapping[p]
            taken.discard(q)

    rec(0)
    return images


def _max_disjoint(sets):
    sets = sorted(set(sets),
                  key=lambda s: (len(s), tuple(label_key(p) for p in _sorted_pts(s))))
    n = len(sets)
    best = 0

    def rec(i, used, cnt):
        nonlocal best
        if cnt > best:
            best = cnt
        if i == n or cnt + (n - i) <= best:
            return
        if not (sets[i] & used):
            rec(i + 1, used | sets[i], cnt + 1)
        rec(i + 1, used, cnt)

    rec(0, frozenset(), 0)
    return best


def chi(space, base, ext):
    """Maximum number of pairwise-disjoint copies of ext over the base,
    the base fixed pointwise."""
    if not ext:
        raise LinearSpaceError("extension must be nonempty")
    return _max_disjoint(_copy_images(space, base, ext))


# ------------------------------------------------------ mu functions

def is_pseudo_cycle_pair(space, base, ext):
    """Two non-collinear anchors closed by an alternating cycle of
    3-point lines, one anchor and two cycle points each."""
    base = frozenset(base)
    ext = frozenset(ext)
    if len(base) != 2 or not ext:
        return False
    pair = space.induced(base | ext)
    lines = [frozenset(l) for l in pair.lines]
    if len(lines) != len(ext):
        return False
    if any(len(l) != 3 or len(l & base) != 1 for l in lines):
        return False
    for c in ext:
        if sum(1 for l in lines if c in l) != 2:
            return False
    anchor = next(iter(base))
    line_adj = {i: [] for i in range(len(lines))}
    for i, j in itertools.combinations(range(len(lines)), 2):
        shared = (lines[i] & lines[j]) - base
        if len(shared) > 1:
            return False
        if shared:
            if (anchor in lines[i]) == (anchor in lines[j]):
                return False
            line_adj[i].append(j)
            line_adj[j].append(i)
    if any(len(v) != 2 for v in line_adj.values()):
        return False
    seen = {0}
    stack = [0]
    while stack:
        for j in line_adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == len(lines)


def _is_line_completion(pair, base):
    return (len(base) == 2 and len(pair.lines) == 1
            and len(next(iter(pair.lines))) == pair.n)


_RULES = ("U", "U_ls", "U_tau_prime")


class MuFunction:
    """Bound on disjoint copies per good pair, keyed by canonical form.

    The default rule supplies the bound for pairs without an override:
    "U" uses the base predimension throughout, "U_ls" lowers single-line
    completions to alpha_bound, "U_tau_prime" raises them to q - 2 for a
    fixed line length q.  An optional pseudo_cycle_bound pins the whole
    cycle family.
    """

    def __init__(self, default_rule="U", alpha_bound=1, q=None,
                 pseudo_cycle_bound=None, overrides=()):
        if default_rule not in _RULES:
            raise ValueError(f"unknown rule {default_rule!r}")
        if default_rule == "U_tau_prime":
            if q is None or q < 3:
                raise ValueError("U_tau_prime needs a line length q >= 3")
        if alpha_bound < 0:
            raise ValueError("alpha_bound must be nonnegative")
        self.default_rule = default_rule
        self.alpha_bound = alpha_bound
        self.q = q
        self.pseudo_cycle_bound = pseudo_cycle_bound
        self.overrides = tuple(overrides)
        self._table = {}
        for pair, base, bound in self.overrides:
            ext = frozenset(pair.points) - frozenset(base)
            key = canonical_form(pair, blocks=[frozenset(base), ext])
            self._table[key] = bound

    def with_override(self, space, base, ext, bound):
        base = frozenset(base)
        ext = frozenset(ext)
        pair = space.induced(base | ext)
        return MuFunction(self.default_rule, self.alpha_bound, self.q,
                          self.pseudo_cycle_bound,
                          self.overrides + ((pair, base, bound),))

    def bound_for(self, space, base, ext):
        base = frozenset(base)
        ext = frozenset(ext)
        key = canonical_pair_form(space, base, ext)
        if key in self._table:
            return self._table[key]
        if (self.pseudo_cycle_bound is not None
                and is_pseudo_cycle_pair(space, base, ext)):
            return self.pseudo_cycle_bound
        pair = space.induced(base | ext)
        if _is_line_completion(pair, base):
            if self.default_rule == "U_ls":
                return self.alpha_bound
            if self.default_rule == "U_tau_prime":
                return self.q - 2
        return space.delta(base)

    def to_json(self):
        entries = []
        for pair, base, bound in self.overrides:
            entries.append({"pair": json.loads(pair.to_json()),
                            "base": sorted(base, key=label_key),
                            "bound": bound})
        doc = {"default_rule": self.default_rule,
               "alpha_bound": self.alpha_bound,
               "q": self.q,
               "pseudo_cycle_bound": self.pseudo_cycle_bound,
               "overrides": entries}
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        overrides = []
        for entry in doc.get("overrides", ()):
            pair = PartialLinearSpace.from_json(json.dumps(entry["pair"]))
            overrides.append((pair, frozenset(entry["base"]), entry["bound"]))
        return cls(doc.get("default_rule", "U"),
                   doc.get("alpha_bound", 1),
                   doc.get("q"),
                   doc.get("pseudo_cycle_bound"),
                   overrides)


@dataclass(frozen=True)
class MuViolation:
    base: frozenset
    ext_sample: frozenset
    count: int
    bound: int


def respects_mu_bounds(space, mu, max_pair_size=6):
    """Audit every good pair family against its mu bound.

    Instances are grouped by (canonical pair form, base point set); the
    group's disjoint-copy count must stay within the bound.
    """
    groups = {}
    for base, ext in enumerate_good_pairs(space, max_pair_size):
        key = (canonical_pair_form(space, base, ext), base)
        groups.setdefault(key, []).append(ext)
    violations = []
    ordered = sorted(groups.items(),
                     key=lambda kv: (len(kv[0][1]),
                                     tuple(label_key(p)
                                           for p in _sorted_pts(kv[0][1])),
                                     len(kv[1][0])))
    for (_, base), exts in ordered:
        bound = mu.bound_for(space, base, exts[0])
        count = _max_disjoint(exts)
        if count > bound:
            violations.append(MuViolation(base, exts[0], count, bound))
    return (not violations), violations


# ------------------------------------------------------ class checks

_PROFILES = ("BASE_K0", "SPARSE", "ANTI_PASCH", "ANTI_MITRE", "ANTI_MIA",
             "HRU_STAR", "TWO_TRANS", "QUASI")


@dataclass(frozen=True)
class ClassSpec:
    profile: str
    q: int | None = None
    multiplier: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "profile", self.profile.upper())
        if self.profile not in _PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}")
        if self.profile == "QUASI" and (self.q is None or self.q < 3):
            raise ValueError("QUASI needs a line length q >= 3")


def _worst_subset(space, min_size, max_delta, skip_line_subsets=False):
    """Smallest subset with at least min_size points and delta at most
    max_delta, or None."""
    if space.n == 0:
        return None
    best = None
    full = (1 << space.n) - 1
    excl = []
    if skip_line_subsets:
        for line in space.lines:
            lm = 0
            for i, p in enumerate(space.points):
                if p in line:
                    lm |= 1 << i
            excl.append(np.uint64(full ^ lm))
    for masks, deltas in space._scan(np.uint64(0)):
        sizes = np.bitwise_count(masks)
        sel = (sizes >= min_size) & (deltas <= max_delta)
        for notlm in excl:
            sel &= (masks & notlm) != 0
        if not sel.any():
            continue
        for m, s in zip(masks[sel], sizes[sel]):
            cand = (int(s), int(m))
            if best is None or cand < best:
                best = cand
    if best is None:
        return None
    return frozenset(p for i, p in enumerate(space.points) if best[1] >> i & 1)


def _fmt(points):
    return "{" + ", ".join(str(p) for p in _sorted_pts(points)) + "}"


_CONFIG_OF = {"ANTI_PASCH": "pasch", "ANTI_MITRE": "mitre", "ANTI_MIA": "mia"}

_REFERENCE_CACHE = {}


def _reference_algebra(q, multiplier):
    key = (q, multiplier)
    if key not in _REFERENCE_CACHE:
        p = next(f for f in (2, 3, 5, 7, 11, 13) if q % f == 0)
        n = 1
        while p ** n < q:
            n += 1
        if p ** n != q:
            raise ValueError(f"{q} is not a prime power")
        field = FiniteField(p, n)
        if multiplier is None:
            a = field.primitive_elements()[0]
        else:
            a = field.from_int(multiplier)
            if a in (field.zero, field.one):
                raise ValueError("multiplier must avoid 0 and 1")
        _REFERENCE_CACHE[key] = BlockAlgebra(field, a)
    return _REFERENCE_CACHE[key]


class _TableAlgebra:
    def __init__(self, carrier, table):
        self.carrier = carrier
        self._table = table

    def star(self, x, y):
        return self._table[(x, y)]


def _check_quasi(space, spec):
    q = spec.q
    for line in space.lines:
        if len(line) != q:
            return False, f"line {_fmt(line)} has {len(line)} points, not {q}"
    star = space.star or {}
    for (x, y), z in star.items():
        if x == y:
            if z != x:
                return False, f"diagonal star entry ({x!r}, {x!r}) is not {x!r}"
            continue
        host = space.line_through(x, y)
        if host is None or z not in host:
            return False, f"star entry ({x!r}, {y!r}) lies on no stored line"
    ref = _reference_algebra(q, spec.multiplier)
    for line in sorted(space.lines,
                       key=lambda l: tuple(label_key(p) for p in _sorted_pts(l))):
        pts = list(_sorted_pts(line))
        table = {}
        for x, y in itertools.permutations(pts, 2):
            if (x, y) not in star:
                return False, f"star incomplete on line {_fmt(line)}"
            table[(x, y)] = star[(x, y)]
        for x in pts:
            table[(x, x)] = x
        local = _TableAlgebra(pts, table)
        if not any(_generator_map(ref, local, u, v)
                   for u, v in itertools.permutations(pts, 2)):
            return False, f"line {_fmt(line)} is not a copy of the reference algebra"
    witness = _worst_subset(space, 1, -1)
    if witness is not None:
        return False, f"negative predimension at {_fmt(witness)}"
    return True, None


def in_class(space, spec):
    """(True, None) if the structure satisfies the profile, else
    (False, reason)."""
    profile = spec.profile
    if profile == "BASE_K0":
        w = _worst_subset(space, 1, -1)
        if w is not None:
            return False, f"negative predimension at {_fmt(w)}"
        return True, None
    if profile == "SPARSE":
        w = _worst_subset(space, 2, 1)
        if w is not None:
            return False, f"{_fmt(w)} has delta <= 1"
        w = _worst_subset(space, 4, 2)
        if w is not None:
            return False, f"{_fmt(w)} has delta <= 2 with 4+ points"
        return True, None
    if profile == "TWO_TRANS":
        w = _worst_subset(space, 1, 0)
        if w is not None:
            return False, f"{_fmt(w)} has delta <= 0"
        w = _worst_subset(space, 2, 1)
        if w is not None:
            return False, f"{_fmt(w)} has delta <= 1"
        return True, None
    if profile == "HRU_STAR":
        for line in space.lines:
            if len(line) != 3:
                return False, f"line {_fmt(line)} has {len(line)} points"
        w = _worst_subset(space, 2, 1)
        if w is not None:
            return False, f"{_fmt(w)} has delta <= 1"
        w = _worst_subset(space, 3, 2, skip_line_subsets=True)
        if w is not None:
            return False, f"{_fmt(w)} has delta <= 2 outside every line"
        return True, None
    if profile in _CONFIG_OF:
        w = _worst_subset(space, 1, -1)
        if w is not None:
            return False, f"negative predimension at {_fmt(w)}"
        for line in space.lines:
            if len(line) != 3:
                return False, f"line {_fmt(line)} has {len(line)} points"
        hit = find_config(space, _CONFIG_OF[profile], strict=True)
        if hit is not None:
            return False, (f"contains a forbidden configuration on "
                           f"{_fmt(hit.values())}")
        return True, None
    return _check_quasi(space, spec)
