"""Minimal 0-extensions, good pairs, copy counts, mu bounds, classes.

The oracles here re-derive strongness and 0-primitivity with plain
itertools scans so the transform-based implementation is checked
against an independent route.  The census numbers for the 7-point
plane (71 good pairs in 4 types) and the quadrilateral (19 in 3) were
worked out by hand from the line lists before the implementation
existed.
"""

import itertools

import pytest

from steinergeom import corpus
from steinergeom.blockalg import BlockAlgebra, FiniteField, induced_steiner
from steinergeom.pairs import (
    ClassSpec,
    MuFunction,
    canonical_pair_form,
    chi,
    enumerate_good_pairs,
    find_good_base,
    in_class,
    is_good_pair,
    is_pseudo_cycle_pair,
    is_zero_primitive,
    respects_mu_bounds,
)
from steinergeom.space import PartialLinearSpace, free_amalgam

THREE_LINE = PartialLinearSpace(["p", "q", "r"], [["p", "q", "r"]])
FOUR_LINE = PartialLinearSpace([1, 2, 3, 4], [[1, 2, 3, 4]])


def plain_delta(space, subset):
    pts = set(subset)
    return len(pts) - sum(max(len(l & pts) - 2, 0) for l in space.lines)


def oracle_rel_strong(space, base, ext):
    """base <= base+ext, by scanning every intermediate subset."""
    b = plain_delta(space, base)
    for k in range(len(ext) + 1):
        for extra in itertools.combinations(sorted(ext, key=str), k):
            if plain_delta(space, set(base) | set(extra)) < b:
                return False
    return True


def oracle_zero_primitive(space, ext, base):
    base, ext = set(base), set(ext)
    if not ext or base & ext:
        return False
    if plain_delta(space, base | ext) != plain_delta(space, base):
        return False
    if not oracle_rel_strong(space, base, ext):
        return False
    for k in range(1, len(ext)):
        for mid in itertools.combinations(sorted(ext, key=str), k):
            mid = set(mid)
            if (oracle_rel_strong(space, base, mid)
                    and oracle_rel_strong(space, base | mid, ext - mid)):
                return False
    return True


def test_zero_primitive_matches_oracle_on_templates():
    cases = []
    pasch = corpus.load("pasch")
    for ext in ({"E", "F", "G", "H"}, {"X", "D", "E", "G"}, {"X"}):
        base = set(pasch.points) - ext
        cases.append((pasch, ext, base))
    cases.append((THREE_LINE, {"r"}, {"p", "q"}))
    cases.append((FOUR_LINE, {3, 4}, {1, 2}))
    cases.append((FOUR_LINE, {4}, {1, 2, 3}))
    for space, ext, base in cases:
        got = is_zero_primitive(space, ext, base)
        want = oracle_zero_primitive(space, ext, base)
        assert got == want, (space, ext, base)


def test_single_line_extension_pairs():
    assert is_zero_primitive(THREE_LINE, {"r"}, {"p", "q"})
    assert is_good_pair(THREE_LINE, {"p", "q"}, {"r"})
    assert not is_zero_primitive(FOUR_LINE, {3, 4}, {1, 2})
    assert is_zero_primitive(FOUR_LINE, {4}, {1, 2, 3})
    assert not is_good_pair(FOUR_LINE, {1, 2, 3}, {4})


def test_quadrilateral_pair_over_diagonal():
    pasch = corpus.load("pasch")
    assert is_zero_primitive(pasch, {"E", "F", "G", "H"}, {"D", "X"})
    assert is_good_pair(pasch, {"D", "X"}, {"E", "F", "G", "H"})
    assert not is_zero_primitive(pasch, {"X", "D", "E", "G"}, {"F", "H"})


def test_good_base_search():
    pasch = corpus.load("pasch")
    assert find_good_base(pasch, {"X", "D", "E", "G"}) == frozenset({"F", "H"})
    assert find_good_base(pasch, {"E", "F", "G", "H"}) == frozenset({"D", "X"})
    m = corpus.load("mermelstein")
    assert find_good_base(m, {"c1", "c2", "c3", "c4"}) == frozenset(
        {"b1", "b2", "b3", "b4"})


def test_mermelstein_pair_is_primitive_over_both_bases():
    m = corpus.load("mermelstein")
    ext = {"c1", "c2", "c3", "c4"}
    assert is_zero_primitive(m, ext, {"a", "b1", "b2", "b3", "b4"})
    assert is_zero_primitive(m, ext, {"b1", "b2", "b3", "b4"})
    assert is_good_pair(m, {"b1", "b2", "b3", "b4"}, ext)
    assert not is_good_pair(m, {"a", "b1", "b2", "b3", "b4"}, ext)


def test_whole_plane_is_good_over_empty_base():
    fano = corpus.load("fano")
    assert is_zero_primitive(fano, set(fano.points), frozenset())
    assert is_good_pair(fano, frozenset(), set(fano.points))
    assert find_good_base(fano, set(fano.points)) == frozenset()


def test_enumerate_on_single_lines():
    found = enumerate_good_pairs(THREE_LINE, max_size=3)
    assert len(found) == 3
    assert all(len(b) == 2 and len(c) == 1 for b, c in found)
    forms = {canonical_pair_form(THREE_LINE, b, c) for b, c in found}
    assert len(forms) == 1

    found4 = enumerate_good_pairs(FOUR_LINE, max_size=4)
    assert len(found4) == 12
    forms4 = {canonical_pair_form(FOUR_LINE, b, c) for b, c in found4}
    assert len(forms4) == 1
    assert forms4 == forms


def test_enumerate_census_quadrilateral():
    pasch = corpus.load("pasch")
    found = enumerate_good_pairs(pasch, max_size=6)
    assert len(found) == 19
    forms = {canonical_pair_form(pasch, b, c) for b, c in found}
    assert len(forms) == 3
    by_shape = {}
    for b, c in found:
        by_shape.setdefault((len(b), len(c)), []).append((b, c))
    assert len(by_shape[(2, 1)]) == 12
    assert len(by_shape[(2, 4)]) == 3
    assert len(by_shape[(3, 3)]) == 4


def test_enumerate_census_plane():
    fano = corpus.load("fano")
    found = enumerate_good_pairs(fano, max_size=7)
    assert len(found) == 71
    forms = {canonical_pair_form(fano, b, c) for b, c in found}
    assert len(forms) == 4
    by_shape = {}
    for b, c in found:
        by_shape.setdefault((len(b), len(c)), []).append((b, c))
    assert len(by_shape[(2, 1)]) == 21
    assert len(by_shape[(2, 4)]) == 21
    assert len(by_shape[(3, 3)]) == 28
    assert len(by_shape[(0, 7)]) == 1


def test_enumerated_pairs_satisfy_oracle():
    pasch = corpus.load("pasch")
    for b, c in enumerate_good_pairs(pasch, max_size=6):
        assert oracle_zero_primitive(pasch, c, b)


def test_pair_forms_agree_across_hosts():
    ag = corpus.load("ag23")
    fano = corpus.load("fano")
    alpha_forms = {
        canonical_pair_form(THREE_LINE, {"p", "q"}, {"r"}),
        canonical_pair_form(FOUR_LINE, {1, 2}, {3}),
        canonical_pair_form(fano, {1, 2}, {3}),
        canonical_pair_form(ag, {"00", "01"}, {"02"}),
    }
    assert len(alpha_forms) == 1
    quad = canonical_pair_form(corpus.load("pasch"), {"D", "X"},
                               {"E", "F", "G", "H"})
    assert quad not in alpha_forms


def _double_quadrilateral():
    pasch = corpus.load("pasch")
    twin = pasch.relabel({"E": "E2", "F": "F2", "G": "G2", "H": "H2",
                          "D": "D", "X": "X"})
    return free_amalgam(pasch, twin, {"D", "X"}, require_strong=True)


def test_chi_counts_disjoint_copies():
    fano = corpus.load("fano")
    assert chi(fano, {1, 2}, {3}) == 1
    assert chi(FOUR_LINE, {1, 2}, {3}) == 2
    pasch = corpus.load("pasch")
    assert chi(pasch, {"D", "X"}, {"E", "F", "G", "H"}) == 1
    doubled = _double_quadrilateral()
    assert chi(doubled, {"D", "X"}, {"E", "F", "G", "H"}) == 2
    ag = corpus.load("ag23")
    assert chi(ag, {"00", "01"}, {"02"}) == 1


def test_pseudo_cycle_recognizer():
    pasch = corpus.load("pasch")
    assert is_pseudo_cycle_pair(pasch, {"D", "X"}, {"E", "F", "G", "H"})
    assert is_pseudo_cycle_pair(pasch, {"G", "F"}, {"D", "E", "H", "X"})
    assert is_pseudo_cycle_pair(pasch, {"E", "H"}, {"D", "F", "G", "X"})
    assert not is_pseudo_cycle_pair(pasch, {"F", "H"}, {"D", "E", "G", "X"})
    assert not is_pseudo_cycle_pair(THREE_LINE, {"p", "q"}, {"r"})
    fano = corpus.load("fano")
    assert not is_pseudo_cycle_pair(fano, {1, 2, 3}, {4, 5, 6})


def test_mu_default_rules():
    pasch = corpus.load("pasch")
    mu_u = MuFunction(default_rule="U")
    assert mu_u.bound_for(THREE_LINE, {"p", "q"}, {"r"}) == 2
    assert mu_u.bound_for(pasch, {"D", "X"}, {"E", "F", "G", "H"}) == 2

    mu_ls = MuFunction(default_rule="U_ls", alpha_bound=1)
    assert mu_ls.bound_for(THREE_LINE, {"p", "q"}, {"r"}) == 1
    assert mu_ls.bound_for(pasch, {"D", "X"}, {"E", "F", "G", "H"}) == 2

    mu_tau = MuFunction(default_rule="U_tau_prime", q=4)
    assert mu_tau.bound_for(FOUR_LINE, {1, 2}, {3}) == 2
    assert mu_tau.bound_for(pasch, {"D", "X"}, {"E", "F", "G", "H"}) == 2

    mu_cycle = MuFunction(default_rule="U_ls", alpha_bound=1,
                          pseudo_cycle_bound=0)
    assert mu_cycle.bound_for(pasch, {"D", "X"}, {"E", "F", "G", "H"}) == 0
    assert mu_cycle.bound_for(THREE_LINE, {"p", "q"}, {"r"}) == 1

    empty = MuFunction(default_rule="U_ls")
    fano = corpus.load("fano")
    assert empty.bound_for(fano, frozenset(), set(fano.points)) == 0


def test_mu_overrides_and_serialization():
    pasch = corpus.load("pasch")
    mu = MuFunction(default_rule="U_ls", alpha_bound=1)
    mu2 = mu.with_override(THREE_LINE, {"p", "q"}, {"r"}, 5)
    assert mu2.bound_for(THREE_LINE, {"p", "q"}, {"r"}) == 5
    assert mu2.bound_for(corpus.load("fano"), {1, 2}, {3}) == 5
    assert mu2.bound_for(pasch, {"D", "X"}, {"E", "F", "G", "H"}) == 2
    assert mu.bound_for(THREE_LINE, {"p", "q"}, {"r"}) == 1

    blob = mu2.to_json()
    back = MuFunction.from_json(blob)
    assert back.bound_for(THREE_LINE, {"p", "q"}, {"r"}) == 5
    assert back.bound_for(pasch, {"D", "X"}, {"E", "F", "G", "H"}) == 2
    assert back.to_json() == blob


def test_mu_audit():
    mu_ls = MuFunction(default_rule="U_ls", alpha_bound=1)
    ok, violations = respects_mu_bounds(THREE_LINE, mu_ls, max_pair_size=3)
    assert ok and violations == []

    ok, violations = respects_mu_bounds(FOUR_LINE, mu_ls, max_pair_size=4)
    assert not ok and len(violations) == 6
    assert all(v.count == 2 and v.bound == 1 for v in violations)

    mu_tau = MuFunction(default_rule="U_tau_prime", q=4)
    ok, _ = respects_mu_bounds(FOUR_LINE, mu_tau, max_pair_size=4)
    assert ok

    fano = corpus.load("fano")
    ok, violations = respects_mu_bounds(fano, mu_ls, max_pair_size=7)
    assert not ok
    assert len(violations) == 1
    assert violations[0].base == frozenset()

    doubled = _double_quadrilateral()
    ok, _ = respects_mu_bounds(doubled, mu_ls, max_pair_size=6)
    assert ok
    mu_cycle = MuFunction(default_rule="U_ls", alpha_bound=1,
                          pseudo_cycle_bound=0)
    ok, violations = respects_mu_bounds(doubled, mu_cycle, max_pair_size=6)
    assert not ok
    assert any(v.base == frozenset({"D", "X"}) and v.count == 2
               for v in violations)


def oracle_sparse(space):
    for k in range(2, space.n + 1):
        for sub in itertools.combinations(space.points, k):
            d = plain_delta(space, sub)
            if d <= 1 or (k >= 4 and d <= 2):
                return False
    return True


def oracle_two_trans(space):
    for k in range(1, space.n + 1):
        for sub in itertools.combinations(space.points, k):
            if plain_delta(space, sub) < min(k, 2):
                return False
    return True


def oracle_hru(space):
    if any(len(l) != 3 for l in space.lines):
        return False
    for k in range(2, space.n + 1):
        for sub in itertools.combinations(space.points, k):
            d = plain_delta(space, sub)
            if d <= 1:
                return False
            if d <= 2 and k >= 3 and not any(set(sub) <= l for l in space.lines):
                return False
    return True


SMALL_HOSTS = ["pasch", "mitre", "mia", "fano", "mermelstein", "ag23"]


def test_class_checks_match_oracles():
    spaces = [corpus.load(n) for n in SMALL_HOSTS] + [THREE_LINE, FOUR_LINE]
    for space in spaces:
        got, _ = in_class(space, ClassSpec("SPARSE"))
        assert got == oracle_sparse(space), space
        got, _ = in_class(space, ClassSpec("TWO_TRANS"))
        assert got == oracle_two_trans(space), space
        got, _ = in_class(space, ClassSpec("HRU_STAR"))
        assert got == oracle_hru(space), space
        got, _ = in_class(space, ClassSpec("BASE_K0"))
        want = all(plain_delta(space, s) >= 0
                   for k in range(space.n + 1)
                   for s in itertools.combinations(space.points, k))
        assert got == want, space


def test_class_frozen_verdicts():
    fano = corpus.load("fano")
    pasch = corpus.load("pasch")
    assert in_class(THREE_LINE, ClassSpec("SPARSE"))[0]
    assert not in_class(FOUR_LINE, ClassSpec("SPARSE"))[0]
    assert not in_class(pasch, ClassSpec("SPARSE"))[0]
    assert not in_class(fano, ClassSpec("SPARSE"))[0]
    assert in_class(pasch, ClassSpec("TWO_TRANS"))[0]
    assert not in_class(fano, ClassSpec("TWO_TRANS"))[0]
    assert in_class(THREE_LINE, ClassSpec("HRU_STAR"))[0]
    assert not in_class(pasch, ClassSpec("HRU_STAR"))[0]
    assert not in_class(corpus.load("ag23"), ClassSpec("BASE_K0"))[0]

    assert in_class(corpus.load("mitre"), ClassSpec("ANTI_PASCH"))[0]
    assert not in_class(fano, ClassSpec("ANTI_PASCH"))[0]
    assert in_class(fano, ClassSpec("ANTI_MITRE"))[0]
    assert in_class(pasch, ClassSpec("ANTI_MIA"))[0]
    assert not in_class(corpus.load("mia"), ClassSpec("ANTI_MIA"))[0]
    ok, detail = in_class(corpus.load("ag23"), ClassSpec("ANTI_PASCH"))
    assert not ok and detail is not None


def test_sparse_structures_contain_no_forbidden_configs():
    from steinergeom.configs import find_config
    for name in SMALL_HOSTS:
        space = corpus.load(name)
        if in_class(space, ClassSpec("SPARSE"))[0]:
            for tpl in ("pasch", "mitre", "mia"):
                assert find_config(space, tpl) is None


def _starred_affine_plane():
    f = FiniteField(3)
    plane = BlockAlgebra(f, f.from_int(2), copies=2)
    return induced_steiner(plane, with_star=True)


def _starred_four_line():
    f = FiniteField(2, 2)
    line = BlockAlgebra(f, f.primitive_elements()[0])
    return induced_steiner(line, with_star=True)


def test_quasi_class_checks():
    plane = _starred_affine_plane()
    two_lines = plane.induced({"(0,0)", "(0,1)", "(0,2)", "(1,0)", "(2,0)"})
    ok, detail = in_class(two_lines, ClassSpec("QUASI", q=3))
    assert ok, detail
    bare = PartialLinearSpace(two_lines.points,
                              [sorted(l, key=str) for l in two_lines.lines])
    assert not in_class(bare, ClassSpec("QUASI", q=3))[0]

    # every line clause holds on the full plane, but 9 points on 12
    # lines dip below zero, which no strong substructure may do
    ok, detail = in_class(plane, ClassSpec("QUASI", q=3))
    assert not ok and "negative" in detail

    sp4 = _starred_four_line()
    assert in_class(sp4, ClassSpec("QUASI", q=4))[0]
    assert not in_class(sp4, ClassSpec("QUASI", q=3))[0]
    assert not in_class(two_lines, ClassSpec("QUASI", q=4))[0]


def test_quasi_rejects_tampered_star():
    sp4 = _starred_four_line()
    star = dict(sp4.star)
    (x, y), z = next(iter(star.items()))
    line = next(iter(sp4.lines))
    other = next(p for p in line if p not in (x, y, z))
    star[(x, y)] = other
    tampered = PartialLinearSpace(sp4.points,
                                  [sorted(l, key=str) for l in sp4.lines], star)
    assert not in_class(tampered, ClassSpec("QUASI", q=4))[0]


def test_quasi_rejects_star_off_line():
    star = {}
    for x, y in itertools.permutations((1, 2, 3), 2):
        star[(x, y)] = next(z for z in (1, 2, 3) if z not in (x, y))
    star[(1, 4)] = 2
    space = PartialLinearSpace([1, 2, 3, 4], [[1, 2, 3]], star)
    ok, detail = in_class(space, ClassSpec("QUASI", q=3))
    assert not ok and "line" in detail


def test_round_trip_preserves_quasi_membership():
    plane = _starred_affine_plane()
    two_lines = plane.induced({"(0,0)", "(0,1)", "(0,2)", "(1,0)", "(2,0)"})
    back = PartialLinearSpace.from_json(two_lines.to_json())
    assert in_class(back, ClassSpec("QUASI", q=3))[0]
