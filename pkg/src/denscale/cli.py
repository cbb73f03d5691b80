"""Command line entry point: ``denscale <subcommand> ...``.

Exit status is 0 on success, 2 on usage errors and 1 on bad input data.
Output files are written only after every result has been computed, each one
through a temporary file and an atomic rename.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import optimize, piecewise
from .bench import ExperimentSpec, corrected_rand, run_experiment
from .dendrogram import dump_dendrogram, load_dendrogram
from .detect import greedy_agglomerate
from .generators import PlantedConfig, TwoScaleConfig, generate_planted, generate_two_scale
from .graph import (
    ParseError,
    dump_graph,
    dump_partition,
    load_distances,
    load_embedding,
    load_graph,
    load_partition,
)
from .multiscale import find_multiscale_partitions
from .quality import FAMILIES, QualityError, d_out_for_modularity, make_model
from .relevance import relevance_curve, relevant_scales

log = logging.getLogger("denscale")


class DataError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _flush(outputs: dict[Path, str]) -> None:
    for path, text in outputs.items():
        write_atomic(path, text)


def _alpha(text: str) -> float:
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= a <= 1.0:
        raise argparse.ArgumentTypeError(f"scale factor {a} outside [0, 1]")
    return a


def _inputs(args):
    g = load_graph(_read(args.graph))
    d = load_dendrogram(_read(args.dendrogram), g)
    sim = None
    if args.embedding:
        sim = load_embedding(_read(args.embedding), g.n)
    elif args.distances:
        sim = load_distances(_read(args.distances))
        if sim.n != g.n:
            raise DataError(f"distance matrix covers {sim.n} vertices, graph has {g.n}")
    if args.quality == "similarity" and sim is None:
        raise DataError("--quality similarity needs --embedding FILE or --distances FILE")
    return g, d, make_model(args.quality, g, sim)


def _emit(args, summary: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def cmd_generate(args) -> None:
    outputs: dict[Path, str] = {}
    if args.model == "planted":
        if args.d_out is None and args.q_exp is None:
            raise DataError("planted model needs --d-out or --q-exp")
        d_out = args.d_out if args.d_out is not None else d_out_for_modularity(args.d_in, args.q_exp, args.c)
        g, ref = generate_planted(PlantedConfig(args.n, args.c, args.d_in, d_out, args.seed))
        outputs[Path(args.out_graph)] = dump_graph(g)
        if args.out_partition:
            outputs[Path(args.out_partition)] = dump_partition(ref)
    else:
        if args.d_out is None:
            raise DataError("two-scale model needs --d-out")
        g, macro, micro = generate_two_scale(TwoScaleConfig(
            args.n, args.d_in_micro, args.d_in_macro, args.d_out, args.macro, args.micro, args.seed))
        outputs[Path(args.out_graph)] = dump_graph(g)
        if args.out_partition:
            outputs[Path(args.out_partition)] = dump_partition(macro)
        if args.out_micro:
            outputs[Path(args.out_micro)] = dump_partition(micro)
    _flush(outputs)
    _emit(args, {"n": g.n, "m": g.m}, [f"n = {g.n}", f"m = {g.m}"])


def cmd_detect(args) -> None:
    g = load_graph(_read(args.graph))
    trace = greedy_agglomerate(g)
    _flush({Path(args.out): dump_dendrogram(trace.dendrogram)})
    d = trace.dendrogram
    _emit(args, {"merges": d.internal_count, "virtual_root": d.virtual_root},
          [f"merges = {d.internal_count}", f"virtual_root = {int(d.virtual_root)}"])


def cmd_cut(args, search) -> None:
    _, d, model = _inputs(args)
    res = search(d, model, tol=args.tol)
    if args.out:
        _flush({Path(args.out): dump_partition(res.partition)})
    _emit(args, {"Q": res.value, "communities": res.community_count},
          [f"Q = {res.value:.9f}", f"communities = {res.community_count}"])


def cmd_multiscale(args) -> None:
    _, d, model = _inputs(args)
    profile = find_multiscale_partitions(d, model, tol=args.tol)
    out = Path(args.out_dir)
    outputs: dict[Path, str] = {}
    rows = ["alpha_lo,alpha_hi,slope,intercept"]
    rows += [",".join(fmt(x) for x in seg) for seg in profile.envelope.segments()]
    outputs[out / "envelope.csv"] = "\n".join(rows) + "\n"
    rows = ["node,alpha_min,alpha_max,size"]
    rows += [f"{sp.node},{fmt(sp.alpha_min)},{fmt(sp.alpha_max)},{sp.size}" for sp in profile.lifespans()]
    outputs[out / "lifespans.csv"] = "\n".join(rows) + "\n"
    reordered, attrs = profile.reordered()
    outputs[out / "reordered_dendrogram.txt"] = dump_dendrogram(reordered, attrs)
    lines = [f"partitions = {len(profile.intervals())}", f"Qmax(0.5) = {profile.envelope(0.5):.9f}"]
    parts = {}
    for a in args.alpha or []:
        p = profile.partition_at(a)
        name = f"partition_alpha_{fmt(a)}.txt"
        outputs[out / name] = dump_partition(p)
        parts[fmt(a)] = {"file": name, "communities": p.community_count}
        lines.append(f"alpha {fmt(a)}: communities = {p.community_count} -> {name}")
    _flush(outputs)
    _emit(args, {"partitions": len(profile.intervals()), "Qmax_half": profile.envelope(0.5),
                 "evaluations": profile.evaluations, "alpha": parts}, lines)


def cmd_relevance(args) -> None:
    _, d, model = _inputs(args)
    profile = find_multiscale_partitions(d, model, tol=args.tol)
    curve = relevance_curve(profile)
    out = Path(args.out_dir)
    outputs: dict[Path, str] = {}
    rows = ["alpha_lo,alpha_hi,A,B,C"] + [",".join(fmt(x) for x in piece) for piece in curve.pieces]
    outputs[out / "relevance.csv"] = "\n".join(rows) + "\n"
    scales = relevant_scales(curve, args.k, include_trivial=args.include_trivial)
    lines, entries = [], []
    for rank, (alpha, i) in enumerate(scales, start=1):
        p = profile.partition_at(curve.representative_alpha(i))
        name = f"partition_scale_{rank}.txt"
        outputs[out / name] = dump_partition(p)
        r = curve.piece_value(i, alpha)
        entries.append({"rank": rank, "alpha": alpha, "R": r, "communities": p.community_count, "file": name})
        lines.append(f"scale {rank}: alpha = {fmt(alpha)} R = {fmt(r)} communities = {p.community_count} -> {name}")
    summary_lines = ["rank,alpha,R,communities,file"] + [
        f"{e['rank']},{fmt(e['alpha'])},{fmt(e['R'])},{e['communities']},{e['file']}" for e in entries]
    outputs[out / "scales.csv"] = "\n".join(summary_lines) + "\n"
    _flush(outputs)
    _emit(args, {"scales": entries}, lines or ["no relevant scale found"])


def cmd_compare(args) -> None:
    a = load_partition(_read(args.a))
    b = load_partition(_read(args.b))
    if a.n != b.n:
        raise DataError(f"partitions cover {a.n} and {b.n} vertices")
    ari = corrected_rand(a, b)
    _emit(args, {"ARI": ari}, [f"ARI = {ari:.9f}"])


def cmd_bench(args) -> None:
    spec = ExperimentSpec.parse(_read(args.spec))
    if args.seed is not None:
        spec.seed = args.seed
    report = run_experiment(spec)
    out = Path(args.out_dir)
    outputs = {out / "report.csv": report.csv(timing=args.timing)}
    if args.json:
        outputs[out / "summary.json"] = report.json()
    else:
        outputs[out / "summary.txt"] = report.summary_text()
    _flush(outputs)
    if args.json:
        print(report.json(), end="")
    else:
        print(report.summary_text(), end="")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print a single JSON summary")
    common.add_argument("--tol", type=float, default=optimize.TIE_TOL,
                        help="tie and collinearity tolerance (expert use)")
    common.add_argument("-v", "--verbose", action="store_true")

    quality = argparse.ArgumentParser(add_help=False)
    quality.add_argument("--quality", choices=FAMILIES, required=True)
    quality.add_argument("--graph", required=True)
    quality.add_argument("--dendrogram", required=True)
    src = quality.add_mutually_exclusive_group()
    src.add_argument("--embedding")
    src.add_argument("--distances")

    p = argparse.ArgumentParser(prog="denscale", description="Post-process community dendrograms.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("generate", parents=[common], help="generate a benchmark graph")
    s.add_argument("--model", choices=("planted", "two-scale"), default="planted")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--c", type=int, default=4)
    s.add_argument("--d-in", type=float, default=6.0)
    s.add_argument("--d-out", type=float)
    s.add_argument("--q-exp", type=float)
    s.add_argument("--macro", type=int, default=10)
    s.add_argument("--micro", type=int, default=10)
    s.add_argument("--d-in-micro", type=float, default=6.0)
    s.add_argument("--d-in-macro", type=float, default=3.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-graph", required=True)
    s.add_argument("--out-partition")
    s.add_argument("--out-micro")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("detect", parents=[common], help="greedy modularity dendrogram")
    s.add_argument("--graph", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("cut", parents=[common, quality], help="best straight cut")
    s.add_argument("--out")
    s.set_defaults(func=lambda a: cmd_cut(a, optimize.best_straight_cut))

    s = sub.add_parser("best", parents=[common, quality], help="best cut over all dendrogram cuts")
    s.add_argument("--out")
    s.set_defaults(func=lambda a: cmd_cut(a, optimize.find_best_partition))

    s = sub.add_parser("multiscale", parents=[common, quality], help="optimal partitions for every scale")
    s.add_argument("--alpha", type=_alpha, action="append")
    s.add_argument("--out-dir", default=".")
    s.set_defaults(func=cmd_multiscale)

    s = sub.add_parser("relevance", parents=[common, quality], help="most relevant scales")
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--include-trivial", action="store_true")
    s.add_argument("--out-dir", default=".")
    s.set_defaults(func=cmd_relevance)

    s = sub.add_parser("compare", parents=[common], help="corrected Rand index of two partitions")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("bench", parents=[common], help="run a method comparison experiment")
    s.add_argument("--spec", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--out-dir", default=".")
    s.add_argument("--timing", action="store_true", help="add per-method seconds to report.csv")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    old = piecewise.EPS_COLLINEAR
    try:
        if args.tol != optimize.TIE_TOL:
            piecewise.EPS_COLLINEAR = args.tol
        args.func(args)
    except (DataError, ParseError, QualityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        piecewise.EPS_COLLINEAR = old
    return 0


if __name__ == "__main__":
    sys.exit(main())
