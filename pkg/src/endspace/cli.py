"""Command line reports for trees, diagrams, dimension groups and Thompson maps.

Exit status: 0 on success, 1 on a domain error, 2 on a usage error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from collections import Counter
from pathlib import Path

from . import bratteli, dimgroup, groupoid, rigidity, thompson, trees, ultrametric
from .errors import EndspaceError, StructureError


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _point(text: str) -> trees.EndPoint:
    """``"0,1|0"``: prefix digits, a bar, then the repeating cycle."""
    if "|" not in text:
        raise argparse.ArgumentTypeError(f"end point needs 'prefix|cycle', got {text!r}")
    head, cyc = text.split("|", 1)
    try:
        return trees.EndPoint(tuple(_int_list(head)), tuple(_int_list(cyc)))
    except (argparse.ArgumentTypeError, StructureError) as exc:
        raise argparse.ArgumentTypeError(f"bad end point {text!r}: {exc}")


def _vertex(text: str) -> trees.Vertex:
    return trees.Vertex.of(_int_list(text))


def _add_tree_input(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--builtin", metavar="NAME", choices=trees.BUILTINS)
    src.add_argument("--file", metavar="PATH", help="tree JSON document")
    src.add_argument("--sft", metavar="PATH", help="JSON 0/1 transition matrix")
    src.add_argument("--inline", metavar="JSON", help="tree JSON document given inline")
    p.add_argument("--n", type=_int_list, help="builtin parameter (a list for branching)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="endspace", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine readable output")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help, parents=[common])

    p = command("validate", help="check a tree document")
    _add_tree_input(p)

    p = command("profile", help="vertex counts per level")
    _add_tree_input(p)
    p.add_argument("--levels", type=_positive_int, default=6)

    p = command("bratteli", help="Bratteli diagram of the collapsed tree")
    _add_tree_input(p)
    p.add_argument("--dot", action="store_true")
    p.add_argument("--levels", type=_positive_int, default=4)

    p = command("telescope", help="telescope a diagram or search for a common telescoping")
    _add_tree_input(p)
    p.add_argument("--initial", type=_int_list, default=[0])
    p.add_argument("--step", type=_positive_int, default=2)
    p.add_argument("--against-builtin", metavar="NAME", choices=trees.BUILTINS)
    p.add_argument("--against-n", type=_int_list)
    p.add_argument("--bound", type=_positive_int, default=3)

    p = command("dimgroup", help="dimension group report")
    _add_tree_input(p)
    p.add_argument("--element", metavar="LEVEL:V1,V2,...", help="element to test for positivity")
    p.add_argument("--bound", type=_positive_int, default=200)

    p = command("rigidity", help="local rigidity verdict and isometry group order")
    _add_tree_input(p)

    p = command("germs", help="local isometry germs and path pairs")
    _add_tree_input(p)
    p.add_argument("--level", type=_nonneg_int, default=2)
    p.add_argument("--kappa", action="store_true", help="show path pairs")
    p.add_argument("--compose", nargs=4, metavar=("A", "B", "C", "D"), type=_vertex,
                   help="compose germ C→D after A→B")

    p = command("tailer", help="tail equivalence of two end points")
    _add_tree_input(p)
    p.add_argument("--x", type=_point, required=True, help="'prefix|cycle', e.g. '0,1|0'")
    p.add_argument("--y", type=_point, required=True)
    p.add_argument("--depth", type=_positive_int, default=10)

    p = command("thompson", help="prefix maps and the Cuntz representation")
    p.add_argument("--map", dest="maps", action="append", default=[], metavar="JSON",
                   help='{"n": 2, "pairs": [["0","1"],["1","0"]]}; give two to compose')
    p.add_argument("--verify", action="store_true", help="run the seeded representation suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=_positive_int, default=2)
    p.add_argument("--depth", type=_positive_int, default=4)
    p.add_argument("--count", type=_positive_int, default=100)

    p = command("dendrogram", help="tree of a finite ultrametric space")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--file", metavar="PATH")
    src.add_argument("--inline", metavar="JSON")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


# -- input loading ------------------------------------------------------------------


def _load_json(path: str | None, inline: str | None):
    try:
        if inline is not None:
            return json.loads(inline)
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise StructureError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise StructureError(f"invalid JSON: {exc}") from exc


def _builtin_param(name: str, n):
    if name == "branching" or n is None:
        return n
    if len(n) != 1:
        raise StructureError(f"builtin {name!r} takes a single integer --n")
    return n[0]


def load_tree(args):
    if args.builtin:
        return trees.builtin(args.builtin, _builtin_param(args.builtin, args.n))
    if args.sft:
        doc = _load_json(args.sft, None)
        return trees.from_sft(doc["matrix"] if isinstance(doc, dict) else doc)
    doc = _load_json(args.file, args.inline)
    if not isinstance(doc, dict):
        raise StructureError("tree document must be a JSON object")
    return trees.from_json(doc)


def _diagram(ts) -> bratteli.BratteliDiagram:
    return bratteli.diagram_of(ts)


# -- commands ------------------------------------------------------------------------


def _matrix_text(m) -> str:
    return "[" + ", ".join("[" + ", ".join(map(str, row)) + "]" for row in m) + "]"


def cmd_validate(args):
    ts = load_tree(args)
    if isinstance(ts, trees.ProceduralTree):
        return {"ok": True, "kind": "procedural"}, "valid procedural tree (levels generated on demand)"
    report = trees.validate(ts)
    data = {"ok": report.ok, "kind": ts.kind, "problems": list(report.problems)}
    if not report.ok:
        raise StructureError("; ".join(report.problems))
    text = f"valid {ts.kind} tree: {len(ts.prefix)} prefix levels, {len(ts.cycle)} cycle levels"
    return data, text


def cmd_profile(args):
    ts = load_tree(args)
    prof = trees.level_profile(ts, args.levels)
    return {"profile": prof}, "vertices per level: " + " ".join(map(str, prof))


def cmd_bratteli(args):
    d = _diagram(load_tree(args))
    if args.dot:
        text = bratteli.to_dot(d, args.levels, name=getattr(args, "builtin", None) or "bratteli")
        return {"dot": text}, text.rstrip("\n")
    lines = []
    for i, m in enumerate(d.prefix):
        lines.append(f"A_{i} = {_matrix_text(m)}")
    if d.cycle:
        start = len(d.prefix)
        lines.append("then repeating:")
        for k, m in enumerate(d.cycle):
            lines.append(f"A_{start + k} = {_matrix_text(m)}")
    return d.to_json(), "\n".join(lines)


def cmd_telescope(args):
    d = _diagram(load_tree(args))
    if args.against_builtin:
        other = _diagram(trees.builtin(args.against_builtin,
                                       _builtin_param(args.against_builtin, args.against_n)))
        res = bratteli.equivalence_search(d, other, args.bound)
        if isinstance(res, bratteli.Unknown):
            return ({"verdict": "unknown", "bound": res.bound},
                    f"no common telescoping found with cut bound {res.bound} (unknown)")
        data = {
            "verdict": "equivalent",
            "cuts1": {"initial": list(res.cuts1.initial), "step": res.cuts1.step},
            "cuts2": {"initial": list(res.cuts2.initial), "step": res.cuts2.step},
        }
        t = bratteli.telescope(d, res.cuts1)
        text = (f"equivalent: cuts {list(res.cuts1.initial)}+{res.cuts1.step}k and "
                f"{list(res.cuts2.initial)}+{res.cuts2.step}k give isomorphic diagrams\n"
                f"common telescoping: {json.dumps(t.to_json()['matrices'])}")
        return data, text
    cuts = bratteli.Cuts(tuple(args.initial), args.step)
    t = bratteli.telescope(d, cuts)
    return t.to_json(), json.dumps(t.to_json()["matrices"])


def _parse_element(text: str) -> dimgroup.Element:
    try:
        level, vec = text.split(":", 1)
        return dimgroup.Element(int(level), tuple(_int_list(vec)))
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise StructureError(f"element must look like LEVEL:V1,V2 (got {text!r})") from exc


def cmd_dimgroup(args):
    g = dimgroup.DimensionGroup(_diagram(load_tree(args)))
    data: dict = {"rank": g.rank()}
    lines = [f"rank {g.rank()}"]
    if g.primitive:
        emb = g.pf_embedding()
        lam = emb.value
        data["perron_value"] = str(lam)
        if lam is None:
            lines.append(f"Perron value: root of {list(emb.data.minimal_poly)} "
                         f"≈ {emb.data.numeric:.12g}")
        else:
            lines.append(f"Perron value λ = {lam}")
            ell = ", ".join(map(str, emb.left_vector))
            data["left_vector"] = [str(x) for x in emb.left_vector]
            lines.append(f"positive cone: 0 or l·v > 0 at aligned levels, l = ({ell})")
            unit = emb.evaluate(g.order_unit)
            data["unit_image"] = str(unit)
            lines.append(f"order unit ↦ {unit}")
            data["image"] = emb.describe_image()
            lines.append(f"image: {data['image']}")
    else:
        lines.append("period matrix not primitive: positivity by closed-form orbit analysis")
    if args.element:
        el = _parse_element(args.element)
        verdict = g.is_positive(el, args.bound)
        data["element"] = {"level": el.level, "vector": list(el.vector), "verdict": verdict.verdict}
        line = f"element {el.level}:{list(el.vector)} is {verdict.verdict}"
        if isinstance(verdict, dimgroup.Positive):
            line += f" (nonnegative at level {verdict.level}: {list(verdict.vector)})"
        elif isinstance(verdict, dimgroup.NotPositive):
            line += f" (certificate: {verdict.certificate})"
            data["element"]["certificate"] = verdict.certificate
        lines.append(line)
    return data, "\n".join(lines)


def cmd_rigidity(args):
    ts = load_tree(args)
    v = rigidity.is_locally_rigid(ts)
    order = rigidity.isometry_group_order(ts)
    data = {"status": v.status, "epsilon": v.epsilon() if v.rigid else None}
    lines = [v.status]
    if v.witness is not None:
        w = v.witness
        data["witness"] = {"level": w.level, "class": w.cls, "path": list(w.path),
                           "child_class": w.child_class, "multiplicity": w.multiplicity}
        lines.append(f"witness class {w.cls} at level {w.level} (vertex path {list(w.path)}): "
                     f"child class {w.child_class} occurs {w.multiplicity} times")
    elif v.rigid:
        lines.append(f"epsilon = {v.epsilon()}")
    else:
        lines.append(f"no decision beyond depth {v.depth}")
    if isinstance(order, rigidity.Finite):
        data["order"] = order.order
        lines.append(f"|Isom| = {order.order}")
    elif isinstance(order, rigidity.Infinite):
        data["order"] = "infinite"
        lines.append("|Isom| = infinite")
    else:
        data["order"] = "unknown"
        lines.append(f"|Isom| unknown beyond depth {order.depth}")
    return data, "\n".join(lines)


def cmd_germs(args):
    ts = load_tree(args)
    gg = groupoid.GermGroupoid(ts)
    if args.compose:
        a, b, c, d = args.compose
        g = gg.compose(gg.germ(c, d), gg.germ(a, b))
        return g.to_json(), f"germ {list(g.source.path)} → {list(g.target.path)} (shift {g.shift})"
    germs = gg.enumerate_germs(args.level)
    counts = Counter(gg.col.class_of(args.level, trees.class_of_path(ts, g.source.path))
                     for g in germs if g.source == g.target)
    lines = [f"{len(germs)} germs at level {args.level} "
             f"(class sizes {dict(sorted(counts.items()))})"]
    out = []
    for g in germs:
        item = g.to_json()
        line = f"{list(g.source.path)} → {list(g.target.path)}"
        if args.kappa:
            pp = gg.kappa_star(g)
            item["path_pair"] = pp.to_json()
            line += f"  range {[list(e) for e in pp.range]} source {[list(e) for e in pp.source]}"
        out.append(item)
        lines.append(line)
    return {"level": args.level, "germs": out}, "\n".join(lines)


def cmd_tailer(args):
    ts = load_tree(args)
    n = groupoid.tail_equivalent(ts, args.x, args.y)
    if n is None:
        return {"tail_equivalent": False}, "not tail equivalent"
    w = groupoid.isometry_witness(ts, args.x, args.y)
    ok = groupoid.verify_witness(ts, w, args.x, args.y, max(args.depth, w.level))
    data = {"tail_equivalent": True, "N": n, "witness": w.to_json(), "verified": ok}
    text = (f"tail equivalent from index {n}\n"
            f"witness: swap label prefix {list(w.source)} for {list(w.target)} "
            f"at level {w.level}; isometric on depth {max(args.depth, w.level)}: {ok}")
    return data, text


def cmd_thompson(args):
    if args.verify:
        rng = random.Random(args.seed)
        passed, failures = 0, []
        for i in range(args.count):
            g = thompson.random_prefix_map(rng, args.n, args.depth)
            h = thompson.random_prefix_map(rng, args.n, args.depth)
            rep = thompson.verify_representation(g, h)
            if rep.ok:
                passed += 1
            else:
                failures.append({"g": g.to_json(), "h": h.to_json(), "failed": rep.failures()})
        data = {"passed": passed, "total": args.count, "failures": failures}
        return data, f"{passed}/{args.count} representation checks passed"
    if not args.maps:
        raise StructureError("give --map (once or twice) or --verify")
    if len(args.maps) > 2:
        raise StructureError("at most two --map arguments")
    maps = [thompson.from_json(_load_json(None, m)) for m in args.maps]
    g = maps[0] if len(maps) == 1 else thompson.compose(maps[0], maps[1])
    data = {"map": g.to_json(), "class": thompson.classify(g), "rho": thompson.rho(g).to_json()}
    lines = []
    if len(maps) == 2:
        lines.append(f"composite {g}")
    else:
        lines.append(f"map {g}")
    lines.append(f"class {thompson.classify(g)}")
    lines.append(f"rho = {thompson.rho(g)}")
    return data, "\n".join(lines)


def cmd_dendrogram(args):
    doc = _load_json(args.file, args.inline)
    if not isinstance(doc, dict):
        raise StructureError("ultrametric document must be a JSON object")
    space = ultrametric.FiniteUltrametricSpace.from_json(doc)
    den = ultrametric.dendrogram(space)
    order = rigidity.isometry_group_order(den.tree)
    lines = []
    for t, lv in sorted(den.level_of_distance.items(), key=lambda kv: kv[1]):
        lines.append(f"level {lv}: distance {t}, {len(den.tree.level(lv))} balls")
    for p, leaf in zip(space.points, den.leaves):
        lines.append(f"{p}: path {list(leaf.prefix)}")
    if isinstance(order, rigidity.Finite):
        lines.append(f"|Isom| = {order.order}")
    data = {
        "tree": den.tree.to_json(),
        "levels": {str(t): lv for t, lv in den.level_of_distance.items()},
        "leaves": {str(p): list(leaf.prefix) for p, leaf in zip(space.points, den.leaves)},
        "isometry_group_order": getattr(order, "order", None),
    }
    return data, "\n".join(lines)


COMMANDS = {
    "validate": cmd_validate,
    "profile": cmd_profile,
    "bratteli": cmd_bratteli,
    "telescope": cmd_telescope,
    "dimgroup": cmd_dimgroup,
    "rigidity": cmd_rigidity,
    "germs": cmd_germs,
    "tailer": cmd_tailer,
    "thompson": cmd_thompson,
    "dendrogram": cmd_dendrogram,
}


def run(args: argparse.Namespace) -> tuple[int, str]:
    """Execute a parsed command; returns (exit status, rendered report)."""
    try:
        data, text = COMMANDS[args.command](args)
    except EndspaceError as exc:
        return 1, f"error: {exc}"
    except (KeyError, TypeError, ValueError) as exc:
        return 1, f"error: malformed input: {exc}"
    if args.json:
        return 0, json.dumps(data, indent=2, sort_keys=True, default=str)
    return 0, text


def main(argv=None) -> int:
    args = parse_args(argv)
    status, report = run(args)
    if status != 0:
        print(report, file=sys.stderr)
        return status
    if args.out:
        Path(args.out).write_text(report + "\n")
    else:
        print(report)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
