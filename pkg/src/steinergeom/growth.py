"""Audited growth of strong chains toward a profile's generic structure.

The engine grows a partial linear space one construction step at a
time, keeping the old structure strong in the new one, staying inside
the chosen amalgamation class, and respecting the multiplicity bounds.
Every step is recorded with enough detail that verify_chain can replay
the whole run from the seed and re-check each certificate.
"""

import hashlib
import itertools
import json
import random
from dataclasses import dataclass

from . import corpus
from .configs import find_config, is_infinity_sparse
from .pairs import (ClassSpec, MuFunction, _reference_algebra, chi, in_class,
                    is_zero_primitive, respects_mu_bounds)
from .pathgraph import build_graph, generate_path
from .space import (LinearSpaceError, PartialLinearSpace, free_amalgam,
                    label_key)

PROFILES = ("SPARSE", "ANTI_PASCH", "ANTI_MITRE", "ANTI_MIA", "HRU_STAR",
            "TWO_TRANS", "QUASI", "SCRIPT_B")

# candidates sampled per task application before giving up on the task
MAX_ATTEMPTS = 8

_QUAD_DISABLED = {
    "SPARSE": "a quadrilateral is a 6-point set of predimension 2",
    "ANTI_PASCH": "the quadrilateral is exactly the forbidden configuration",
    "HRU_STAR": "a quadrilateral puts predimension 2 on a set outside "
                "every line",
    "SCRIPT_B": "attaching a quadrilateral closes a pseudo-cycle over "
                "its base pair",
}


def default_mu(profile, q=3):
    """Bound function matching the profile's amalgamation class."""
    if profile == "QUASI":
        return MuFunction("U_tau_prime", q=q)
    if profile == "SCRIPT_B":
        return MuFunction("U_ls", alpha_bound=1, pseudo_cycle_bound=0)
    return MuFunction("U_ls", alpha_bound=1)


@dataclass(frozen=True)
class GrowthConfig:
    profile: str
    q: int = 3
    max_points: int = 20
    rng_seed: int = 0
    mu: MuFunction = None
    multiplier: int = None
    seed_name: str = None
    seed_points: int = 3
    base_cap: int = 6
    audit_cap: int = 5
    final_audit_cap: int = 6

    def __post_init__(self):
        profile = self.profile.replace("-", "_").upper()
        if profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; "
                             f"choose from {', '.join(PROFILES)}")
        object.__setattr__(self, "profile", profile)
        if self.q < 3:
            raise ValueError("line length q must be at least 3")
        if profile != "QUASI" and self.q != 3:
            raise ValueError("only the QUASI profile supports q != 3")
        if not 3 <= self.max_points <= 24:
            raise ValueError("max_points must lie between 3 and 24")
        if self.mu is None:
            object.__setattr__(self, "mu", default_mu(profile, self.q))
        self._check_mu()

    def _check_mu(self):
        # probe with a single full line to read off the line-completion
        # bound the function assigns
        pts = [f"t{i}" for i in range(self.q)]
        probe = PartialLinearSpace(pts, [pts])
        bound = self.mu.bound_for(probe, frozenset(pts[:2]),
                                  frozenset(pts[2:]))
        if self.profile == "SPARSE" and bound != 1:
            raise ValueError("the sparse class pins the line-completion "
                             f"bound to 1, got {bound}")
        if bound < 1:
            raise ValueError("growth by line completion needs a "
                             "line-completion bound of at least 1")
        if self.profile == "SCRIPT_B" and self.mu.pseudo_cycle_bound != 0:
            raise ValueError("the script-B profile forbids closed "
                             "pseudo-cycles; set pseudo_cycle_bound=0")

    def to_doc(self):
        return {"profile": self.profile,
                "q": self.q,
                "max_points": self.max_points,
                "rng_seed": self.rng_seed,
                "mu": json.loads(self.mu.to_json()),
                "multiplier": self.multiplier,
                "seed_name": self.seed_name,
                "seed_points": self.seed_points,
                "base_cap": self.base_cap,
                "audit_cap": self.audit_cap,
                "final_audit_cap": self.final_audit_cap}

    @classmethod
    def from_doc(cls, doc):
        return cls(profile=doc["profile"],
                   q=doc["q"],
                   max_points=doc["max_points"],
                   rng_seed=doc["rng_seed"],
                   mu=MuFunction.from_json(json.dumps(doc["mu"])),
                   multiplier=doc.get("multiplier"),
                   seed_name=doc.get("seed_name"),
                   seed_points=doc.get("seed_points", 3),
                   base_cap=doc.get("base_cap", 6),
                   audit_cap=doc.get("audit_cap", 5),
                   final_audit_cap=doc.get("final_audit_cap", 6))


def class_spec_for(config: GrowthConfig) -> ClassSpec:
    if config.profile == "SCRIPT_B":
        return ClassSpec("TWO_TRANS")
    if config.profile == "QUASI":
        return ClassSpec("QUASI", q=config.q, multiplier=config.multiplier)
    return ClassSpec(config.profile)


def build_example(name: str) -> PartialLinearSpace:
    """Load a bundled reference structure by name."""
    try:
        return corpus.load(name)
    except KeyError as exc:
        raise ValueError(str(exc)) from None


# ------------------------------------------------------ construction steps

def _space_hash(space):
    return hashlib.sha256(space.to_json().encode()).hexdigest()


def _star_triples(space):
    if not space.star:
        return []
    return [(x, y, z) for (x, y), z in space.star.items()]


def _fresh_labels(space, count):
    used = set(space.points)
    out = []
    i = 0
    while len(out) < count:
        cand = f"p{i}"
        if cand not in used:
            out.append(cand)
            used.add(cand)
        i += 1
    return out


def _line_star_entries(q, multiplier, line_pts):
    """Multiplication entries for a fresh line, copied off the reference
    block algebra along a fixed bijection."""
    ref = _reference_algebra(q, multiplier)
    phi = dict(zip(ref.carrier, line_pts))
    entries = [(phi[s], phi[t], phi[ref.star(s, t)])
               for s, t in itertools.permutations(ref.carrier, 2)]
    entries.sort(key=lambda t: (label_key(t[0]), label_key(t[1])))
    return entries


def _complete_pair_space(space, x, y, config):
    fresh = _fresh_labels(space, config.q - 2)
    line = sorted([x, y], key=label_key) + fresh
    added_star = []
    if config.profile == "QUASI":
        added_star = _line_star_entries(config.q, config.multiplier, line)
    star = None
    if space.star is not None or added_star:
        star = _star_triples(space) + added_star
    new = PartialLinearSpace(list(space.points) + fresh,
                             [list(l) for l in space.lines] + [line],
                             star)
    record = {"task": "complete_pair",
              "base": sorted([x, y], key=label_key),
              "added_points": fresh,
              "added_lines": [line],
              "added_star": [list(t) for t in added_star]}
    return new, record


def _quad_space(space, x, y, config):
    e, f, g, h = _fresh_labels(space, 4)
    lines = [[x, e, g], [x, f, h], [y, e, f], [y, g, h]]
    added_star = []
    if config.profile == "QUASI":
        for line in lines:
            added_star += _line_star_entries(3, config.multiplier, line)
        added_star.sort(key=lambda t: (label_key(t[0]), label_key(t[1])))
    piece = PartialLinearSpace([x, y, e, f, g, h], lines,
                               added_star if added_star else None)
    new = free_amalgam(space, piece, {x, y}, require_strong=True)
    record = {"task": "realize_quadrilateral",
              "base": sorted([x, y], key=label_key),
              "added_points": [e, f, g, h],
              "added_lines": [sorted(l, key=label_key) for l in lines],
              "added_star": [list(t) for t in added_star]}
    return new, record


def _quad_disabled_reason(config):
    if config.profile in _QUAD_DISABLED:
        return _QUAD_DISABLED[config.profile]
    if config.profile == "QUASI" and config.q != 3:
        return (f"quadrilateral lines carry 3 points but this class "
                f"needs lines of length {config.q}")
    return None


def _completion_candidates(space, config):
    if space.n + (config.q - 2) > config.max_points:
        return []
    pts = sorted(space.points, key=label_key)
    return [(x, y) for x, y in itertools.combinations(pts, 2)
            if space.line_through(x, y) is None]


def _quad_candidates(space, config):
    if space.n + 4 > config.max_points:
        return []
    pts = sorted(space.points, key=label_key)
    return list(itertools.combinations(pts, 2))


def _attempt_task(space, task, config, spec, rng, skips):
    """Try up to MAX_ATTEMPTS candidates for one task; return the first
    extension passing every per-step certificate, or None."""
    if task == "complete_pair":
        candidates = _completion_candidates(space, config)
        builder = _complete_pair_space
    else:
        candidates = _quad_candidates(space, config)
        builder = _quad_space
    if not candidates:
        return None
    order = rng.sample(range(len(candidates)),
                       min(len(candidates), MAX_ATTEMPTS))
    for idx in order:
        x, y = candidates[idx]
        pair = sorted([x, y], key=label_key)
        try:
            new, record = builder(space, x, y, config)
        except LinearSpaceError as exc:
            skips.append({"task": task, "base": pair,
                          "reason": "construction_failed",
                          "detail": str(exc), "at_points": space.n})
            continue
        if not new.is_strong(space.points):
            skips.append({"task": task, "base": pair,
                          "reason": "not_strong",
                          "detail": "previous structure loses strongness",
                          "at_points": space.n})
            continue
        ok, why = in_class(new, spec)
        if not ok:
            skips.append({"task": task, "base": pair,
                          "reason": "class_violation",
                          "detail": why, "at_points": space.n})
            continue
        mu_ok, violations = respects_mu_bounds(new, config.mu,
                                               config.audit_cap)
        if not mu_ok:
            skips.append({"task": task, "base": pair,
                          "reason": "mu_violation",
                          "detail": str(violations[0]),
                          "at_points": space.n})
            continue
        audit = {"strong": True, "class": True, "mu": True}
        if task == "realize_quadrilateral":
            # the regular audit caps pair size below the 6 points of a
            # quadrilateral over its base, so count this one directly
            base = frozenset((x, y))
            ext = frozenset(record["added_points"])
            count = chi(new, base, ext)
            bound = config.mu.bound_for(new, base, ext)
            if count > bound:
                skips.append({"task": task, "base": pair,
                              "reason": "chi_exceeds_mu",
                              "detail": f"multiplicity {count} > {bound}",
                              "at_points": space.n})
                continue
            audit["chi"] = count
            audit["chi_bound"] = bound
        record["hash"] = _space_hash(new)
        return new, record, audit
    return None


# ------------------------------------------------------ the engine

@dataclass
class GrowthTrace:
    config: GrowthConfig
    seed_json: str
    steps: list
    skips: list
    audits: list
    status: str
    final_hash: str

    def to_json(self) -> str:
        doc = {"config": self.config.to_doc(),
               "seed": json.loads(self.seed_json),
               "steps": self.steps,
               "skips": self.skips,
               "audits": self.audits,
               "status": self.status,
               "final_hash": self.final_hash}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "GrowthTrace":
        doc = json.loads(text)
        return cls(config=GrowthConfig.from_doc(doc["config"]),
                   seed_json=json.dumps(doc["seed"], indent=2) + "\n",
                   steps=doc["steps"],
                   skips=doc["skips"],
                   audits=doc["audits"],
                   status=doc["status"],
                   final_hash=doc["final_hash"])


def _seed_space(config):
    if config.seed_name is not None:
        space = build_example(config.seed_name)
        if config.profile == "QUASI" and space.star is None:
            raise LinearSpaceError("the QUASI profile needs a seed with "
                                   "multiplication entries")
        return space
    star = [] if config.profile == "QUASI" else None
    pts = [f"p{i}" for i in range(config.seed_points)]
    return PartialLinearSpace(pts, [], star)


def grow(config: GrowthConfig):
    """Run the growth loop; returns (trace, final_space)."""
    space = _seed_space(config)
    if space.n > config.max_points:
        raise LinearSpaceError(f"seed has {space.n} points, over the "
                               f"budget of {config.max_points}")
    spec = class_spec_for(config)
    ok, why = in_class(space, spec)
    if not ok:
        raise LinearSpaceError(f"seed violates the profile: {why}")
    mu_ok, violations = respects_mu_bounds(space, config.mu,
                                           config.audit_cap)
    if not mu_ok:
        raise LinearSpaceError(f"seed violates the multiplicity bounds: "
                               f"{violations[0]}")

    seed_json = space.to_json()
    steps, skips, audits = [], [], []
    schedule = ["complete_pair"]
    reason = _quad_disabled_reason(config)
    if reason is None:
        schedule.append("realize_quadrilateral")
    else:
        skips.append({"task": "realize_quadrilateral", "base": [],
                      "reason": "disabled_for_profile",
                      "detail": reason, "at_points": space.n})

    rng = random.Random(config.rng_seed)
    status = "reached_budget"
    rotation = 0
    while space.n < config.max_points:
        progressed = False
        for offset in range(len(schedule)):
            task = schedule[(rotation + offset) % len(schedule)]
            got = _attempt_task(space, task, config, spec, rng, skips)
            if got is not None:
                space, record, audit = got
                record["index"] = len(steps)
                audit["index"] = len(steps)
                steps.append(record)
                audits.append(audit)
                progressed = True
                break
        rotation += 1
        if not progressed:
            status = "stalled"
            break

    trace = GrowthTrace(config=config, seed_json=seed_json, steps=steps,
                        skips=skips, audits=audits, status=status,
                        final_hash=_space_hash(space))
    return trace, space


# ------------------------------------------------------ verification

def _replay_step(space, record):
    task = record["task"]
    base = list(record["base"])
    added_pts = list(record["added_points"])
    added_lines = [list(l) for l in record["added_lines"]]
    added_star = [tuple(t) for t in record["added_star"]]
    if task == "complete_pair":
        star = None
        if space.star is not None or added_star:
            star = _star_triples(space) + added_star
        return PartialLinearSpace(list(space.points) + added_pts,
                                  [list(l) for l in space.lines]
                                  + added_lines,
                                  star)
    if task == "realize_quadrilateral":
        piece = PartialLinearSpace(base + added_pts, added_lines,
                                   added_star if added_star else None)
        return free_amalgam(space, piece, set(base), require_strong=True)
    raise LinearSpaceError(f"unknown growth task {task!r}")


def verify_chain(trace: GrowthTrace) -> dict:
    """Replay a trace from its seed and re-check every certificate.

    Reports each failure with the step index it occurred at (None for
    seed-level or final-state checks)."""
    config = trace.config
    spec = class_spec_for(config)
    failures = []
    space = PartialLinearSpace.from_json(trace.seed_json)
    ok, why = in_class(space, spec)
    if not ok:
        failures.append({"step": None, "check": "seed_class", "detail": why})
    for i, record in enumerate(trace.steps):
        try:
            new = _replay_step(space, record)
        except LinearSpaceError as exc:
            failures.append({"step": i, "check": "replay",
                             "detail": str(exc)})
            break
        if _space_hash(new) != record["hash"]:
            failures.append({"step": i, "check": "hash",
                             "detail": "replayed structure hash diverges "
                                       "from the recorded one"})
        if not new.is_strong(space.points):
            failures.append({"step": i, "check": "strong",
                             "detail": "previous structure is not strong "
                                       "in the extension"})
        ok, why = in_class(new, spec)
        if not ok:
            failures.append({"step": i, "check": "class", "detail": why})
        mu_ok, violations = respects_mu_bounds(new, config.mu,
                                               config.audit_cap)
        if not mu_ok:
            failures.append({"step": i, "check": "mu",
                             "detail": str(violations[0])})
        space = new
    if _space_hash(space) != trace.final_hash:
        failures.append({"step": None, "check": "final_hash",
                         "detail": "final structure hash diverges from "
                                   "the recorded one"})
    mu_ok, violations = respects_mu_bounds(space, config.mu,
                                           config.final_audit_cap)
    if not mu_ok:
        failures.append({"step": None, "check": "final_mu",
                         "detail": str(violations[0])})
    det_ok, det_why = profile_detector(space, config)
    if not det_ok:
        failures.append({"step": None, "check": "detector",
                         "detail": det_why})
    return {"ok": not failures,
            "failures": failures,
            "steps_checked": len(trace.steps),
            "status": trace.status,
            "final_points": space.n,
            "detector": {"ok": det_ok, "detail": det_why}}


def profile_detector(space, config) -> tuple:
    """Check the property that defines the profile's target structure,
    beyond bare class membership.  Returns (ok, detail)."""
    spec = class_spec_for(config)
    ok, why = in_class(space, spec)
    if not ok:
        return False, why
    profile = config.profile
    if profile == "SPARSE":
        sparse, witness = is_infinity_sparse(space)
        if not sparse:
            return False, f"sparsity fails at {sorted(map(str, witness))}"
    elif profile in ("ANTI_PASCH", "ANTI_MITRE", "ANTI_MIA"):
        name = profile.split("_", 1)[1].lower()
        hit = find_config(space, name)
        if hit is not None:
            return False, f"forbidden {name} configuration at {hit}"
    elif profile == "TWO_TRANS":
        for pair in itertools.combinations(space.points, 2):
            if not space.is_strong(pair):
                return False, f"pair {pair} is not strong"
    elif profile == "HRU_STAR":
        for size in (1, 2, 3):
            for sub in itertools.combinations(space.points, size):
                if not space.is_strong(sub):
                    return False, f"subset {sub} is not strong"
    elif profile == "SCRIPT_B":
        census = pseudo_cycle_census(space)
        if census:
            return False, f"closed pseudo-cycle found: {census[0]}"
    return True, None


def pseudo_cycle_census(space, mode="line") -> list:
    """Walk every seed in both directions over every strong pair and
    collect the closed pseudo-cycles as (pair, seed, first_color,
    line_count) tuples."""
    out = []
    pts = sorted(space.points, key=label_key)
    for a, b in itertools.combinations(pts, 2):
        if not space.is_strong((a, b)):
            continue
        graph = build_graph(space, a, b, mode=mode)
        for seed in sorted(graph.nodes, key=label_key):
            for color in ("a", "b"):
                path = generate_path(space, a, b, seed,
                                     first_color=color, mode=mode)
                if path.classification == "pseudo_cycle":
                    out.append(((a, b), seed, color, path.line_count))
    return out


# ------------------------------------------------------ worked replay

def replay_counterexample() -> dict:
    """Reconstruct the bundled free-amalgamation counterexample: a pair
    that is absent from both halves of an amalgam yet realized in the
    amalgam itself.

    The decomposition admits two readings (one label is ambiguous), so
    the report also records the alternate reading and shows it cannot
    be amalgamated at all."""
    whole = build_example("mermelstein")
    base = ("a", "b1", "b2", "b3", "b4")
    ext = ("c1", "c2", "c3", "c4")
    common = ["a", "c2", "c4"]
    left_pts = set(common) | {"b1", "c1", "b4"}
    right_pts = set(common) | {"b2", "c3", "b3"}
    left = whole.induced(left_pts)
    right = whole.induced(right_pts)
    amalgam = free_amalgam(left, right, set(common))

    zero_prim = is_zero_primitive(whole, ext, base)
    additive = (amalgam.delta() ==
                left.delta() + right.delta() - whole.induced(common).delta())
    component_realizes = {
        "left": find_config(left, whole, strict=True) is not None,
        "right": find_config(right, whole, strict=True) is not None,
    }
    amalgam_realizes = find_config(amalgam, whole, strict=True) is not None
    matches = amalgam.to_json() == whole.to_json()

    # literal reading: the three 3-point sets taken as bare components,
    # which do not even overlap the stated common part
    alt = {"valid": False, "reason": None}
    try:
        free_amalgam(whole.induced({"b1", "c1", "b4"}),
                     whole.induced({"b2", "c3", "b3"}),
                     set(common))
        alt["valid"] = True
    except LinearSpaceError as exc:
        alt["reason"] = str(exc)

    status = "realized" if (zero_prim and amalgam_realizes
                            and not any(component_realizes.values())) \
        else "not_realized"
    return {"status": status,
            "zero_primitive": zero_prim,
            "base": list(base),
            "extension": list(ext),
            "common_part": common,
            "common_strong": {"left": left.is_strong(common),
                              "right": right.is_strong(common)},
            "component_points": {"left": sorted(left.points, key=label_key),
                                 "right": sorted(right.points,
                                                 key=label_key)},
            "component_realizes": component_realizes,
            "amalgam_realizes": amalgam_realizes,
            "amalgam_matches_original": matches,
            "delta_additive": additive,
            "alternate_reading": alt}
