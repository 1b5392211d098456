"""Command line entry point.

Graphs are given either as a JSON file or as a builder spec::

    rose:3   theta   ht:3,2   circle:4   adj:[[1,1],[1,0]]

Words use the graph's single-letter labels when it has them (``aab``) and
edge ids otherwise (``"0 1 1"``).  Exit codes: 0 success, 2 invalid input,
3 verification failure, 4 bound exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .dynamics import (
    ConstructionError,
    convergence_report,
    default_start_classes,
    proximality_family,
    solve_transitivity,
)
from .graph import (
    Graph,
    GraphError,
    classify,
    from_adjacency,
    higman_thompson,
    periodic_decomposition,
    rose,
    subdivided_circle,
    theta,
)
from .homology import HomologyError, abelianization_FD, ektw_model, groupoid_homology, out_D_cstar_simple
from .marker import MarkerData, MarkerError, apply_point, check_overlap_conditions, f_phi
from .measures import PeriodicCombo
from .words import EpPoint, cyclic_class, enumerate_primitive_classes

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_BOUND = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


# -- parsing helpers -------------------------------------------------------

def load_graph(spec: str) -> Graph:
    path = Path(spec)
    if path.suffix == ".json" or path.is_file():
        try:
            return Graph.from_json(path.read_text())
        except OSError as exc:
            raise CliError(f"cannot read graph file: {exc}") from None
    name, _, arg = spec.partition(":")
    try:
        if name == "rose":
            return rose(int(arg))
        if name == "theta":
            return theta()
        if name in ("ht", "higman_thompson"):
            n, r = (int(x) for x in arg.split(","))
            return higman_thompson(n, r)
        if name == "circle":
            return subdivided_circle(int(arg))
        if name == "adj":
            return from_adjacency(json.loads(arg))
    except (ValueError, json.JSONDecodeError) as exc:
        raise CliError(f"bad graph spec {spec!r}: {exc}") from None
    raise CliError(f"unknown graph spec {spec!r}")


def parse_fraction(text: str) -> Fraction:
    try:
        eps = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise CliError(f"bad rational {text!r}") from None
    if not 0 < eps < 1:
        raise CliError("epsilon must lie in (0, 1)")
    return eps


def parse_class(g: Graph, text: str):
    word = g.parse_word(text)
    cls = cyclic_class(g, word)
    return cls


def parse_point(g: Graph, text: str) -> EpPoint:
    """``prefix|cycle`` or just ``cycle`` for a periodic point."""
    prefix, _, cycle = text.rpartition("|")
    return EpPoint.make(g.parse_word(prefix), g.parse_word(cycle), g)


def load_marker(g: Graph, text: str) -> MarkerData:
    path = Path(text)
    raw = path.read_text() if path.is_file() else text
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliError(f"bad marker JSON: {exc}") from None
    for key in ("m", "m2", "d", "d2"):
        if isinstance(data.get(key), str):
            data[key] = list(g.parse_word(data[key]))
    return MarkerData.from_json(data)


def fmt_fraction(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def emit(args, payload, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def require_valid(g: Graph) -> None:
    c = classify(g)
    if not c.sft_valid:
        why = "not strongly connected" if not c.strongly_connected else f"subdivided circle S^1_{c.is_subdivided_circle}"
        raise CliError(f"graph is not a valid SFT graph ({why})")


# -- subcommands ---------------------------------------------------------

def cmd_analyze(args) -> int:
    g = load_graph(args.graph)
    c = classify(g)
    payload = {"vertices": g.num_vertices, "edges": g.num_edges, **c.to_json()}
    lines = [f"vertices\t{g.num_vertices}", f"edges\t{g.num_edges}"]
    lines += [f"{k}\t{v}" for k, v in c.to_json().items()]
    if c.strongly_connected:
        classes, e0, _ = periodic_decomposition(g)
        payload["period_classes"] = classes
        payload["E0_edges"] = e0.num_edges
        lines.append(f"period_classes\t{classes}")
    emit(args, payload, "\n".join(lines))
    return EXIT_OK if c.sft_valid else EXIT_INPUT


def cmd_classes(args) -> int:
    g = load_graph(args.graph)
    require_valid(g)
    classes = enumerate_primitive_classes(g, args.max_len)
    payload = [{"length": c.length, "rep": g.format_word(c.rep)} for c in classes]
    emit(args, payload, "\n".join(f"{c.length}\t{g.format_word(c.rep)}" for c in classes))
    return EXIT_OK


def cmd_marker(args) -> int:
    g = load_graph(args.graph)
    data = load_marker(g, args.marker)
    if args.action == "check":
        phi = check_overlap_conditions(g, data)
        emit(args, {"valid": True, "marker": phi.to_json()}, f"valid\ttype {phi.kind}")
        return EXIT_OK
    phi = check_overlap_conditions(g, data)
    if args.input is None:
        raise CliError("--input is required for apply and fphi")
    if args.action == "apply":
        y = apply_point(phi, parse_point(g, args.input))
        text = f"{g.format_word(y.prefix)}|{g.format_word(y.cycle)}"
        emit(args, {"prefix": list(y.prefix), "cycle": list(y.cycle), "text": text}, text)
        return EXIT_OK
    cls = parse_class(g, args.input)
    if not cls.primitive:
        raise CliError("fphi needs a primitive class")
    out = f_phi(phi, cls)
    emit(args, {"class": out.to_json(), "text": f"[{g.format_word(out.rep)}]"}, f"[{g.format_word(out.rep)}]")
    return EXIT_OK


def cmd_transitivity(args) -> int:
    g = load_graph(args.graph)
    require_valid(g)
    src, dst = parse_class(g, args.src), parse_class(g, args.dst)
    if not (src.primitive and dst.primitive):
        raise CliError("classes must be primitive")
    chain = solve_transitivity(g, src, dst)
    payload = chain.to_json()
    text = [f"source\t[{g.format_word(src.rep)}]", f"target\t[{g.format_word(dst.rep)}]",
            f"moves\t{len(chain)}", f"verified\t{payload['verified']}"]
    for i, mv in enumerate(chain.moves, 1):
        d = mv.coe.data
        text.append(f"{i}\ttype {d.kind}\tm={g.format_word(d.m)}\tm'={g.format_word(d.m2)}"
                    f"\td={g.format_word(d.d)}\td'={g.format_word(d.d2)}")
    emit(args, payload, "\n".join(text))
    return EXIT_OK if payload["verified"] else EXIT_VERIFY


def cmd_proximality(args) -> int:
    g = load_graph(args.graph)
    require_valid(g)
    if g.num_vertices == 1 and g.num_edges == 2:
        raise CliError("the 2-rose needs the separate R2 construction, which this tool does not provide")
    if not classify(g).two_edge_connected:
        raise CliError("proximality family needs a 2-edge-connected graph")
    eps = parse_fraction(args.epsilon)
    fam = proximality_family(g)
    starts = [parse_class(g, s) for s in args.start] if args.start else default_start_classes(g)
    blocks, payload, unmet = [], [], 0
    for cls in starts:
        if not cls.primitive:
            raise CliError("start classes must be primitive")
        rep = convergence_report(fam, PeriodicCombo.single(cls), args.power, eps, args.n_max)
        blocks.append(f"# start [{g.format_word(cls.rep)}]\n" + rep.to_tsv())
        payload.append({
            "start": g.format_word(cls.rep),
            "reached": rep.reached,
            "rows": [{"n": r.n, "S": fmt_fraction(r.s), "delta": fmt_fraction(r.delta),
                      "bound": None if r.bound is None else fmt_fraction(r.bound),
                      "bound_ok": r.bound_ok} for r in rep.rows],
        })
        if any(r.bound_ok is False for r in rep.rows):
            emit(args, payload, "".join(blocks))
            return EXIT_VERIFY
        if rep.reached is None:
            unmet += 1
    emit(args, payload, "".join(blocks))
    return EXIT_BOUND if unmet else EXIT_OK


def cmd_homology(args) -> int:
    g = load_graph(args.graph)
    require_valid(g)
    h = groupoid_homology(g)
    fd = abelianization_FD(g)
    verdict = out_D_cstar_simple(g)
    label = "C*-simple" if verdict.simple else "NOT C*-simple"
    payload = {**h.to_json(), "F/D": fd.to_json(), "cstar_simple": verdict.simple, "reason": verdict.reason}
    text = [f"H0\t{h.h0}", f"unit\t{list(h.h0.unit or ())}", f"H1\t{'Z^%d' % h.h1_rank if h.h1_rank else '0'}",
            f"F/D\t{fd}", f"Out(D): {label} ({verdict.reason})"]
    emit(args, payload, "\n".join(text))
    return EXIT_OK


def cmd_ektw(args) -> int:
    g = load_graph(args.graph)
    require_valid(g)
    try:
        model = ektw_model(g)
    except HomologyError as exc:
        raise CliError(str(exc), EXIT_BOUND) from None
    rec = model.record
    text = [f"adjacency\t{model.graph.adjacency()}", f"B\t{model.b_matrix}", f"C_swap\t{model.swapped}"]
    text += [f"{k}\t{v}" for k, v in rec.to_json().items()]
    emit(args, model.to_json(), "\n".join(text))
    return EXIT_OK if rec.passed else EXIT_VERIFY


# -- argument parser -------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", required=True, help="JSON file or builder spec (rose:3, theta, ht:3,2, ...)")
    common.add_argument("--format", choices=("tsv", "json"), default="tsv")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized sweeps")

    p = argparse.ArgumentParser(prog="markercoe", description="Marker orbit equivalences of edge shifts.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common], help="classify a graph").set_defaults(func=cmd_analyze)

    c = sub.add_parser("classes", parents=[common], help="list primitive classes")
    c.add_argument("--max-len", type=int, default=4)
    c.set_defaults(func=cmd_classes)

    m = sub.add_parser("marker", parents=[common], help="check or apply a marker")
    m.add_argument("action", choices=("check", "apply", "fphi"))
    m.add_argument("--marker", required=True, help="marker JSON (inline or file)")
    m.add_argument("--input", help="point 'prefix|cycle' for apply, class word for fphi")
    m.set_defaults(func=cmd_marker)

    t = sub.add_parser("transitivity", parents=[common], help="chain of markers between two classes")
    t.add_argument("--src", required=True)
    t.add_argument("--dst", required=True)
    t.set_defaults(func=cmd_transitivity)

    x = sub.add_parser("proximality", parents=[common], help="convergence table of the proximality family")
    x.add_argument("--start", action="append", help="start class (repeatable); default five short classes")
    x.add_argument("--power", type=int, default=1, help="K, the power of the target cycle")
    x.add_argument("--epsilon", default="1/20")
    x.add_argument("--n-max", type=int, default=32)
    x.set_defaults(func=cmd_proximality)

    sub.add_parser("homology", parents=[common], help="H0, H1 and the C*-simplicity verdict").set_defaults(func=cmd_homology)
    sub.add_parser("ektw", parents=[common], help="2-edge-connected model with verification").set_defaults(func=cmd_ektw)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    for name in ("max_len", "n_max", "power"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 1:
            print(f"error: --{name.replace('_', '-')} must be >= 1", file=sys.stderr)
            return EXIT_INPUT
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (GraphError, MarkerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConstructionError as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
