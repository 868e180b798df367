"""Two-anchor path graphs, alternating walks, fans, and uniformity.

Fix two anchor points a and b.  Outside a small excluded core the
remaining points carry two edge colors: x and y are a-adjacent when
some stored line contains all of a, x, y, and b-adjacent likewise.
Walks alternate the two anchors through the multiplication table (or
the third point on 3-point lines) and either close into a pseudo-cycle
or stop with their envelope lines pairwise disjoint away from the
anchors.
"""

import itertools
from collections import Counter
from dataclasses import dataclass

from .space import LinearSpaceError, PartialLinearSpace, label_key

MAX_WALK_STEPS = 256


def star_lookup(space: PartialLinearSpace, x, y):
    """x*y from the stored table, else the third point of a 3-point line."""
    if x == y:
        raise LinearSpaceError("star lookup needs two distinct points")
    if space.star is not None and (x, y) in space.star:
        return space.star[(x, y)]
    line = space.line_through(x, y)
    if line is None:
        raise LinearSpaceError(f"no line through {x!r} and {y!r}")
    if len(line) != 3:
        raise LinearSpaceError(
            f"line of size {len(line)} needs an explicit multiplication entry")
    return next(p for p in line if p != x and p != y)


@dataclass(frozen=True)
class PathGraph:
    anchors: tuple
    nodes: frozenset
    a_edges: frozenset
    b_edges: frozenset

    def degree(self, node):
        return (sum(1 for e in self.a_edges if node in e),
                sum(1 for e in self.b_edges if node in e))


def _excluded_core(space, a, b, mode):
    if mode == "line":
        core = {a, b}
        line = space.line_through(a, b)
        if line is not None:
            core |= line
        return core
    if mode == "icl":
        return set(space.icl({a, b}))
    raise ValueError(f"unknown mode {mode!r}")


def build_graph(space: PartialLinearSpace, a, b, mode="line") -> PathGraph:
    if a == b or a not in set(space.points) or b not in set(space.points):
        raise LinearSpaceError("anchors must be two distinct points")
    core = _excluded_core(space, a, b, mode)
    nodes = [p for p in space.points if p not in core]
    a_edges, b_edges = set(), set()
    for x, y in itertools.combinations(nodes, 2):
        if any({a, x, y} <= line for line in space.lines):
            a_edges.add(frozenset({x, y}))
        if any({b, x, y} <= line for line in space.lines):
            b_edges.add(frozenset({x, y}))
    # an edge of both colors would put its endpoints on the excluded
    # line through the anchors, so the color sets must be disjoint
    if a_edges & b_edges:
        raise LinearSpaceError("edge carries both colors; host is malformed")
    return PathGraph((a, b), frozenset(nodes),
                     frozenset(a_edges), frozenset(b_edges))


# earlier name, kept as an alias
build_path_graph = build_graph


@dataclass(frozen=True)
class Path:
    classification: str  # "pseudo_cycle" or "truncated"
    anchors: tuple
    seed: object
    first_color: str
    points: tuple
    lines: tuple

    @property
    def line_count(self):
        return len(self.lines)


def generate_path(space: PartialLinearSpace, a, b, seed,
                  first_color="a", mode="line") -> Path:
    """Alternate d -> a*d -> b*(a*d) -> ... recording one line per step.

    The walk closes when the newest line meets an earlier non-adjacent
    line somewhere away from the anchors, and truncates when no line
    (or table entry) extends it or the next point leaves the domain.
    first_color chooses which anchor multiplies first.
    """
    if first_color not in ("a", "b"):
        raise ValueError(f"first_color must be 'a' or 'b', got {first_color!r}")
    core = _excluded_core(space, a, b, mode)
    domain = {p for p in space.points if p not in core}
    if seed not in domain:
        raise LinearSpaceError(f"seed {seed!r} is not in the walk domain")
    order = (a, b) if first_color == "a" else (b, a)
    pts = [seed]
    lines: list = []
    current = seed
    for step in range(MAX_WALK_STEPS):
        anchor = order[step % 2]
        try:
            nxt = star_lookup(space, anchor, current)
        except LinearSpaceError:
            return Path("truncated", (a, b), seed, first_color,
                        tuple(pts), tuple(lines))
        new_line = space.line_through(anchor, current)
        if new_line is None or nxt not in new_line or nxt not in domain:
            return Path("truncated", (a, b), seed, first_color,
                        tuple(pts), tuple(lines))
        # non-adjacent means every recorded line except the immediately
        # preceding one, which shares the current walk point by design
        for j in range(len(lines) - 1):
            if (new_line & lines[j]) - {a, b}:
                lines.append(new_line)
                return Path("pseudo_cycle", (a, b), seed, first_color,
                            tuple(pts), tuple(lines))
        lines.append(new_line)
        pts.append(nxt)
        current = nxt
    return Path("truncated", (a, b), seed, first_color,
                tuple(pts), tuple(lines))


def envelope(path: Path) -> frozenset:
    """All points on the walk's lines, anchors included."""
    out = set()
    for line in path.lines:
        out |= line
    return frozenset(out)


def fan_view(path: Path, style="envelope"):
    """The walk as its envelope lines or as its point path."""
    if style == "envelope":
        return list(path.lines)
    if style == "path":
        return list(path.points)
    raise ValueError(f"unknown style {style!r}")


@dataclass(frozen=True)
class Fan:
    anchors: tuple
    seed: object
    levels: tuple  # increasing frozensets of envelope points
    fixpoint: bool

    @property
    def points(self):
        return self.levels[-1] if self.levels else frozenset()


def build_fan(space: PartialLinearSpace, a, b, seed, depth=8,
              mode="line", seeding="points") -> Fan:
    """Iterated union of walk envelopes, launched from both orientations.

    Level 0 is the envelope of the two walks from the seed.  With
    seeding="points" each next level launches walks from every domain
    point collected so far; with seeding="lines" only from points lying
    on the previous level's walk lines, using the opposite first color.
    Levels stop at the requested depth or at a fixpoint.
    """
    if seeding not in ("points", "lines"):
        raise ValueError(f"unknown seeding {seeding!r}")
    core = _excluded_core(space, a, b, mode)
    domain = {p for p in space.points if p not in core}

    def launch(s, colors):
        paths = [generate_path(space, a, b, s, first_color=c, mode=mode)
                 for c in colors]
        pts, lns = set(), []
        for p in paths:
            pts |= envelope(p)
            lns.extend(p.lines)
        return pts, lns

    base_pts, base_lines = launch(seed, ("a", "b"))
    levels = [frozenset(base_pts)]
    prev_lines = {("a", l) for l in base_lines} | {("b", l) for l in base_lines}
    fixpoint = False
    for _ in range(depth):
        current = levels[-1]
        new_pts = set(current)
        new_lines = set()
        if seeding == "points":
            seeds = [(s, ("a", "b")) for s in sorted(current & domain,
                                                     key=label_key)]
        else:
            seeds = []
            for color, line in sorted(prev_lines,
                                      key=lambda t: (t[0], sorted(map(str, t[1])))):
                flip = "b" if color == "a" else "a"
                for s in sorted(line & domain, key=label_key):
                    seeds.append((s, (flip,)))
        for s, colors in seeds:
            pts, lns = launch(s, colors)
            new_pts |= pts
            for c, l in zip(itertools.cycle(colors), lns):
                new_lines.add((c, l))
        if new_pts == set(current):
            fixpoint = True
            break
        levels.append(frozenset(new_pts))
        prev_lines = new_lines
    return Fan((a, b), seed, tuple(levels), fixpoint)


def _color_iso(g1: PathGraph, g2: PathGraph) -> bool:
    if (len(g1.nodes) != len(g2.nodes)
            or len(g1.a_edges) != len(g2.a_edges)
            or len(g1.b_edges) != len(g2.b_edges)):
        return False
    d1 = {v: g1.degree(v) for v in g1.nodes}
    d2 = {v: g2.degree(v) for v in g2.nodes}
    if Counter(d1.values()) != Counter(d2.values()):
        return False
    freq = Counter(d1.values())
    order = sorted(g1.nodes, key=lambda v: (freq[d1[v]], str(v)))
    targets = sorted(g2.nodes, key=str)
    mapping, used = {}, set()

    def extend(i):
        if i == len(order):
            return True
        v = order[i]
        for w in targets:
            if w in used or d2[w] != d1[v]:
                continue
            if any((frozenset({u, v}) in g1.a_edges)
                   != (frozenset({mu, w}) in g2.a_edges)
                   or (frozenset({u, v}) in g1.b_edges)
                   != (frozenset({mu, w}) in g2.b_edges)
                   for u, mu in mapping.items()):
                continue
            mapping[v] = w
            used.add(w)
            if extend(i + 1):
                return True
            del mapping[v]
            used.discard(w)
        return False

    return extend(0)


def graphs_isomorphic(g1: PathGraph, g2: PathGraph,
                      allow_color_swap: bool = True) -> bool:
    if _color_iso(g1, g2):
        return True
    if allow_color_swap:
        swapped = PathGraph((g2.anchors[1], g2.anchors[0]), g2.nodes,
                            g2.b_edges, g2.a_edges)
        return _color_iso(g1, swapped)
    return False


def is_uniform(space: PartialLinearSpace, mode="line"):
    """Whether all anchor pairs yield one path graph up to color swap.

    Returns (True, None) or (False, (reference_pair, offending_pair)).
    """
    points = sorted(space.points, key=label_key)
    pairs = list(itertools.combinations(points, 2))
    if not pairs:
        return True, None
    ref = build_graph(space, *pairs[0], mode=mode)
    for pair in pairs[1:]:
        g = build_graph(space, *pair, mode=mode)
        if not graphs_isomorphic(ref, g, allow_color_swap=True):
            return False, (pairs[0], pair)
    return True, None


def r_dimension_lower_bound(space: PartialLinearSpace, budget=None,
                            base=()) -> int:
    """Size of a verified line-closure-independent set, built greedily.

    base points are always included in the closures but never counted;
    budget caps how many candidate points the greedy pass looks at.
    """
    fixed = list(base)
    candidates = sorted(space.points, key=label_key)
    if budget is not None:
        candidates = candidates[:budget]
    chosen: list = []
    for p in candidates:
        if p in fixed:
            continue
        if p not in space.r_closure(fixed + chosen):
            chosen.append(p)
    changed = True
    while changed:
        changed = False
        for x in list(chosen):
            rest = [c for c in chosen if c != x]
            if x in space.r_closure(fixed + rest):
                chosen.remove(x)
                changed = True
                break
    return len(chosen)
