"""Command-line surface.

Exit status contract: 0 = success, 1 = a checked property is violated
(the witness goes to stdout as JSON), 2 = bad input (diagnostic on
stderr).  All structure output uses the canonical sorted JSON of
PartialLinearSpace.to_json, so export/import round-trips are stable.
"""

import argparse
import json
import sys

from .blockalg import (BlockAlgebra, FiniteField, induced_steiner,
                       steiner_parameters, verify_2q_variety)
from .configs import TEMPLATES, find_config, is_infinity_sparse
from .growth import GrowthConfig, GrowthTrace, grow, replay_counterexample, \
    verify_chain
from .pairs import MuFunction
from .pathgraph import build_graph, generate_path, is_uniform
from .space import (CapacityError, LinearSpaceError, PartialLinearSpace,
                    free_amalgam, label_key)


class CliInputError(Exception):
    pass


def _emit(doc):
    print(json.dumps(doc, indent=2, sort_keys=True))


def _read_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc}") from None


def _load_space(path):
    text = _read_file(path)
    try:
        return PartialLinearSpace.from_json(text)
    except LinearSpaceError as exc:
        raise CliInputError(f"{path}: {exc}") from None


def _split_labels(text):
    """Comma-split that leaves parenthesised labels like (0,1) intact."""
    parts, cur, depth = [], [], 0
    for ch in text:
        if ch == "," and depth == 0:
            parts.append("".join(cur).strip())
            cur = []
            continue
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        cur.append(ch)
    parts.append("".join(cur).strip())
    return [p for p in parts if p]


def _resolve_label(space, token):
    pts = set(space.points)
    if token in pts:
        return token
    try:
        as_int = int(token)
    except ValueError:
        as_int = None
    if as_int is not None and as_int in pts:
        return as_int
    raise CliInputError(f"unknown point {token!r}")


def _resolve_labels(space, text):
    return [_resolve_label(space, tok) for tok in _split_labels(text)]


def _sorted_labels(labels):
    return sorted(labels, key=label_key)


# ------------------------------------------------------ verbs

def _cmd_inspect(args):
    space = _load_space(args.file)
    if args.subset is None or args.subset == "all":
        subset = list(space.points)
    else:
        subset = _resolve_labels(space, args.subset)
    doc = {"points": space.n,
           "lines": len(space.lines),
           "subset": _sorted_labels(subset),
           "delta": space.delta(subset),
           "dim": space.dim(subset),
           "strong": space.is_strong(subset),
           "icl": _sorted_labels(space.icl(subset)),
           "r_closure": _sorted_labels(space.r_closure(subset))}
    _emit(doc)
    return 0


def _cmd_detect(args):
    space = _load_space(args.file)
    tpl_names = [args.template] if args.template else (
        [] if args.sparse else sorted(TEMPLATES))
    do_sparse = args.sparse or not args.template
    templates = {}
    for name in tpl_names:
        hit = find_config(space, name, strict=args.strict)
        templates[name] = None if hit is None else \
            {str(k): v for k, v in sorted(hit.items())}
    sparse_doc = None
    if do_sparse:
        ok, witness = is_infinity_sparse(space)
        sparse_doc = {"ok": ok,
                      "witness": None if witness is None
                      else _sorted_labels(witness)}
    violated = any(v is not None for v in templates.values()) or \
        (sparse_doc is not None and not sparse_doc["ok"])
    _emit({"templates": templates, "sparse": sparse_doc,
           "violated": violated})
    return 1 if violated else 0


def _cmd_amalgamate(args):
    left = _load_space(args.left)
    right = _load_space(args.right)
    common = set(_resolve_labels(left, args.common))
    result = free_amalgam(left, right, common,
                          require_strong=args.require_strong)
    text = result.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_grow(args):
    if args.check_trace is not None:
        text = _read_file(args.check_trace)
        try:
            trace = GrowthTrace.from_json(text)
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CliInputError(f"bad trace file: {exc}") from None
        report = verify_chain(trace)
        _emit(report)
        return 0 if report["ok"] else 1
    if args.profile is None:
        raise CliInputError("--profile is required unless --check-trace "
                            "is given")
    mu = None
    if args.mu_file:
        try:
            mu = MuFunction.from_json(_read_file(args.mu_file))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CliInputError(f"bad mu file: {exc}") from None
    config = GrowthConfig(profile=args.profile, q=args.q,
                          max_points=args.max_points, rng_seed=args.seed,
                          mu=mu, multiplier=args.multiplier,
                          seed_name=args.seed_name)
    trace, final = grow(config)
    report = verify_chain(trace)
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(final.to_json())
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(trace.to_json())
    _emit({"profile": config.profile,
           "status": trace.status,
           "final_points": final.n,
           "steps": len(trace.steps),
           "skips": len(trace.skips),
           "final_hash": trace.final_hash,
           "verified": report["ok"],
           "failures": report["failures"]})
    return 0 if report["ok"] else 1


def _cmd_blockalg(args):
    field = FiniteField(args.p, args.n)
    if args.a is None:
        a = field.primitive_elements()[0]
    else:
        a = field.from_int(args.a)
    line_alg = BlockAlgebra(field, a)
    big = line_alg if args.power == 1 else \
        BlockAlgebra(field, a, copies=args.power)
    quasigroup = line_alg.is_quasigroup()
    idempotent = line_alg.is_idempotent()
    variety = verify_2q_variety(line_alg, big) if quasigroup else False
    doc = {"q": args.p ** args.n,
           "multiplier": field.to_int(a),
           "power": args.power,
           "quasigroup": quasigroup,
           "idempotent": idempotent,
           "commutative": line_alg.is_commutative(),
           "associative": line_alg.is_associative(),
           "variety_2q": variety}
    if quasigroup:
        # a degenerate multiplier spans 2-point "lines", which are not
        # a linear space, so the induced system only exists here
        system = induced_steiner(big, with_star=True)
        v, b, k = steiner_parameters(system)
        doc["steiner"] = {"points": v, "blocks": b, "line_size": k,
                          "double_count_ok": v * (v - 1) == b * k * (k - 1)}
        if args.emit:
            with open(args.emit, "w", encoding="utf-8") as fh:
                fh.write(system.to_json())
    elif args.emit:
        raise CliInputError("cannot emit an induced system from a "
                            "degenerate multiplier")
    _emit(doc)
    return 0 if quasigroup and idempotent and variety else 1


def _cmd_steiner(args):
    space = _load_space(args.file)
    try:
        v, b, k = steiner_parameters(space)
    except LinearSpaceError as exc:
        _emit({"steiner": False, "reason": str(exc)})
        return 1
    _emit({"steiner": True, "points": v, "blocks": b, "line_size": k,
           "double_count_ok": v * (v - 1) == b * k * (k - 1)})
    return 0


def _edge_list(edges):
    pairs = [tuple(_sorted_labels(e)) for e in edges]
    return sorted(pairs, key=lambda pr: tuple(label_key(x) for x in pr))


def _pathgraph_dot(graph):
    out = ["graph pathgraph {", "  node [shape=circle];"]
    for node in _sorted_labels(graph.nodes):
        out.append(f'  "{node}";')
    for color, style, edges in (("a", "red", graph.a_edges),
                                ("b", "blue", graph.b_edges)):
        for x, y in _edge_list(edges):
            out.append(f'  "{x}" -- "{y}" [color={style}, '
                       f'label="{color}"];')
    out.append("}")
    return "\n".join(out) + "\n"


def _cmd_pathgraph(args):
    space = _load_space(args.file)
    a = _resolve_label(space, args.a)
    b = _resolve_label(space, args.b)
    if a == b:
        raise CliInputError("anchors must be two distinct points")
    graph = build_graph(space, a, b, mode=args.mode)
    if args.seed is not None:
        seed = _resolve_label(space, args.seed)
        if seed not in graph.nodes:
            raise CliInputError(f"seed {args.seed!r} is outside the "
                                "walk domain")
        seeds = [seed]
    else:
        seeds = _sorted_labels(graph.nodes)
    colors = [args.first_color] if args.first_color else ["a", "b"]
    walks = []
    for seed in seeds:
        for color in colors:
            path = generate_path(space, a, b, seed, first_color=color,
                                 mode=args.mode)
            walks.append({"seed": seed,
                          "first_color": color,
                          "classification": path.classification,
                          "line_count": path.line_count,
                          "points": list(path.points)})
    dot = _pathgraph_dot(graph)
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(dot)
    _emit({"anchors": [a, b],
           "mode": args.mode,
           "nodes": _sorted_labels(graph.nodes),
           "a_edges": _edge_list(graph.a_edges),
           "b_edges": _edge_list(graph.b_edges),
           "walks": walks,
           "dot": dot})
    return 0


def _cmd_uniform(args):
    space = _load_space(args.file)
    uniform, witness = is_uniform(space, mode=args.mode)
    doc = {"uniform": uniform, "mode": args.mode,
           "reference_pair": None, "offending_pair": None}
    if not uniform:
        ref, bad = witness
        doc["reference_pair"] = list(ref)
        doc["offending_pair"] = list(bad)
    _emit(doc)
    return 0 if uniform else 1


def _cmd_replay(args):
    doc = replay_counterexample()
    _emit(doc)
    return 0 if doc["status"] == "realized" else 1


def _cmd_export(args):
    space = _load_space(args.file)
    text = space.to_json() if args.format == "json" else space.to_dot()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ------------------------------------------------------ wiring

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="steinergeom",
        description="Predimension calculus, amalgamation, block algebras "
                    "and audited growth for sparse linear spaces.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("inspect", help="predimension, dimension and "
                                       "closures of a subset")
    p.add_argument("file")
    p.add_argument("--subset", help="comma-separated points, or 'all'")
    p.set_defaults(func=_cmd_inspect)

    p = sub.add_parser("detect", help="forbidden configurations and "
                                      "sparsity")
    p.add_argument("file")
    p.add_argument("--template", choices=sorted(TEMPLATES))
    p.add_argument("--sparse", action="store_true",
                   help="only run the sparsity scan")
    p.add_argument("--strict", action="store_true",
                   help="template lines must match host lines exactly")
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("amalgamate", help="free amalgam of two "
                                          "structures over a common part")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--common", required=True,
                   help="comma-separated shared points")
    p.add_argument("--require-strong", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_amalgamate)

    p = sub.add_parser("grow", help="grow an audited strong chain")
    p.add_argument("--profile")
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--max-points", type=int, default=20)
    p.add_argument("--seed", type=int, default=0,
                   help="rng seed for candidate selection")
    p.add_argument("--seed-name", help="start from a bundled structure")
    p.add_argument("--multiplier", type=int)
    p.add_argument("--mu-file", help="JSON bound-function description")
    p.add_argument("--emit", help="write the final structure here")
    p.add_argument("--trace", help="write the replayable trace here")
    p.add_argument("--check-trace",
                   help="verify a previously written trace instead of "
                        "growing")
    p.set_defaults(func=_cmd_grow)

    p = sub.add_parser("blockalg", help="block algebra over GF(p^n) "
                                        "and its induced system")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--a", type=int,
                   help="multiplier as an integer label; defaults to "
                        "the first primitive element")
    p.add_argument("--power", type=int, default=1,
                   help="number of coordinate copies")
    p.add_argument("--emit", help="write the induced system here")
    p.set_defaults(func=_cmd_blockalg)

    p = sub.add_parser("steiner", help="check Steiner parameters of a "
                                       "structure")
    p.add_argument("file")
    p.set_defaults(func=_cmd_steiner)

    p = sub.add_parser("pathgraph", help="two-anchor walk graph, walks "
                                         "and DOT")
    p.add_argument("file")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--mode", choices=("line", "icl"), default="line")
    p.add_argument("--seed", help="walk only from this point")
    p.add_argument("--first-color", choices=("a", "b"))
    p.add_argument("--dot", help="write the DOT rendering here")
    p.set_defaults(func=_cmd_pathgraph)

    p = sub.add_parser("uniform", help="compare walk graphs across all "
                                       "anchor pairs")
    p.add_argument("file")
    p.add_argument("--mode", choices=("line", "icl"), default="line")
    p.set_defaults(func=_cmd_uniform)

    p = sub.add_parser("replay", help="replay the bundled amalgamation "
                                      "counterexample")
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("export", help="canonical JSON or DOT of a "
                                      "structure")
    p.add_argument("file")
    p.add_argument("--format", choices=("json", "dot"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_export)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except LinearSpaceError as exc:
        _emit({"error": str(exc)})
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
