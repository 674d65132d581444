"""Command-line entry point: ``dnsm decompose|convexity|fit-only|report``."""

from __future__ import annotations

import argparse
from dataclasses import replace
import logging
from pathlib import Path
import sys

from . import io
from .convexity import PruneParams, baseline_concavities, convexity_report, prune
from .model import DEFAULT_RADIUS, DEFAULT_SLOPE, DEFAULT_SPACING
from .optimize import FitDivergedError
from .pipeline import (STEP1_DEFAULTS, STEP3_DEFAULTS, PipelineParams, decompose,
                       diagnostics, overlap_fit)

log = logging.getLogger("dnsm")

DEFAULT_MIN_C = 0.2
MEASURES = ("dnsm", "pb", "rb")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be a positive finite number, got {text}")
    return value


def _nonnegative_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value >= 0 or value == float("inf"):
        raise argparse.ArgumentTypeError(f"must be >= 0 and finite, got {text}")
    return value


def _threshold(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= value <= 255:
        raise argparse.ArgumentTypeError("threshold must be in 0..255")
    return value


def _add_input(sub):
    sub.add_argument("input", help="PGM (P2/P5) or PNG grayscale image")
    sub.add_argument("--threshold", type=_threshold, default=128,
                     help="gray level at or above which a pixel is shape (default 128)")


def _add_model_flags(sub, with_prune=True, with_step3=True):
    g = sub.add_argument_group("model and fitting")
    g.add_argument("--radius", type=_positive_float, default=DEFAULT_RADIUS,
                   help="initial disc radius, fraction of the longer image side")
    g.add_argument("--spacing", type=_positive_float, default=DEFAULT_SPACING,
                   help="initial disc grid spacing, same units")
    g.add_argument("--m-halfspaces", type=_positive_int, default=16)
    g.add_argument("--slope", type=_positive_float, default=DEFAULT_SLOPE)
    g.add_argument("--eta1", type=_nonnegative_float, default=STEP1_DEFAULTS.eta,
                   help="overlap reward of the first fit, per polytope "
                        "(divided by N-1 unless --eta1-absolute)")
    g.add_argument("--eta1-absolute", action="store_true",
                   help="use --eta1 as given instead of dividing it by N-1")
    g.add_argument("--containment", type=_nonnegative_float,
                   default=STEP1_DEFAULTS.containment,
                   help="first-fit charge per polytope for covering background")
    if with_step3:
        g.add_argument("--eta3", type=_nonnegative_float, default=STEP3_DEFAULTS.eta,
                       help="overlap penalty of the final fit")
    g.add_argument("--gamma", type=_positive_float, default=STEP1_DEFAULTS.step_size,
                   help="gradient step size (halved on energy increase)")
    g.add_argument("--max-iters", type=_positive_int, default=STEP1_DEFAULTS.max_iters)
    g.add_argument("--rel-tol", type=_nonnegative_float, default=STEP1_DEFAULTS.rel_tol)
    g.add_argument("--seedless-deterministic", action="store_true",
                   help="accepted for compatibility; runs are always deterministic")
    if with_prune:
        p = sub.add_argument_group("pruning")
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--keep-k", type=_positive_int,
                          help="keep this many polytopes")
        mode.add_argument("--min-c", type=_positive_float,
                          help=f"drop polytopes until every C >= this (default {DEFAULT_MIN_C})")
        p.add_argument("--t", type=_positive_float, default=0.25,
                       help="size exponent of the significance measure")
        p.add_argument("--concavity-on", choices=("step1", "final"), default="step1",
                       help="model the global concavity is measured on")


def _pipeline_params(args) -> PipelineParams:
    common = dict(step_size=args.gamma, max_iters=args.max_iters, rel_tol=args.rel_tol)
    step1 = replace(STEP1_DEFAULTS, eta=args.eta1, containment=args.containment, **common)
    step3 = replace(STEP3_DEFAULTS, eta=getattr(args, "eta3", STEP3_DEFAULTS.eta), **common)
    keep_k = getattr(args, "keep_k", None)
    min_c = getattr(args, "min_c", None)
    if keep_k is None and min_c is None:
        min_c = DEFAULT_MIN_C
    pr = PruneParams(keep_k=keep_k, min_c=min_c, t_exponent=getattr(args, "t", 0.25))
    return PipelineParams(radius=args.radius, spacing=args.spacing,
                          m_halfspaces=args.m_halfspaces, slope=args.slope,
                          step1=step1, prune=pr, step3=step3,
                          concavity_on=getattr(args, "concavity_on", "step1"),
                          eta1_per_pair=not args.eta1_absolute)


def _params_dict(p: PipelineParams) -> dict:
    def fit_dict(f):
        return {"eta": f.eta, "step_size": f.step_size, "max_iters": f.max_iters,
                "rel_tol": f.rel_tol, "overlap_sign": f.overlap_sign.name.lower(),
                "overlap_domain": f.overlap_domain, "containment": f.containment}
    return {"radius": p.radius, "spacing": p.spacing, "m_halfspaces": p.m_halfspaces,
            "slope": p.slope, "eta1_per_pair": p.eta1_per_pair,
            "step1": fit_dict(p.step1), "step3": fit_dict(p.step3),
            "prune": {"keep_k": p.prune.keep_k, "min_c": p.prune.min_c,
                      "t_exponent": p.prune.t_exponent},
            "concavity_on": p.concavity_on}


def _out_paths(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    return out / f"{stem}.dnsm", out / f"{stem}.report.json", out / f"{stem}.labels.png"


def cmd_decompose(args) -> int:
    shape = io.read_shape(args.input, args.threshold)
    p = _pipeline_params(args)
    res = decompose(shape, p)
    model_path, report_path, labels_path = _out_paths(args)
    report = res.report.as_dict()
    report.update({
        "input": Path(args.input).name,
        "shape": {"height": shape.height, "width": shape.width},
        "n_initial": res.stages["init"].n_polytopes,
        "n_parts": res.n_parts,
        "removed": res.removed,
        "connectivity": res.connectivity,
        "diagnostics": res.diagnostics,
        "traces": {k: t.as_dict() for k, t in res.traces.items()},
        "params": _params_dict(p),
    })
    io.write_model(res.model, model_path, shape)
    io.write_report(report, report_path)
    io.write_label_map(res.labels, labels_path)
    print(f"{res.n_parts} parts, dnsm_concavity {res.report.dnsm_concavity:.6f}")
    for path in (model_path, report_path, labels_path, io.sidecar_path(labels_path)):
        print(path)
    return 0


def cmd_fit_only(args) -> int:
    shape = io.read_shape(args.input, args.threshold)
    p = _pipeline_params(args)
    init, fitted, trace = overlap_fit(shape, p)
    model_path, report_path, _ = _out_paths(args)
    report = {"input": Path(args.input).name,
              "shape": {"height": shape.height, "width": shape.width},
              "n_polytopes": fitted.n_polytopes,
              "diagnostics": diagnostics(fitted, shape),
              "traces": {"step1": trace.as_dict()},
              "params": _params_dict(p)}
    io.write_model(fitted, model_path, shape)
    io.write_report(report, report_path)
    print(model_path)
    print(report_path)
    return 0


def _measures(shape, p: PipelineParams, wanted) -> dict:
    out = {}
    if "pb" in wanted or "rb" in wanted:
        pb, rb = baseline_concavities(shape)
        out.update(pb=pb, rb=rb)
    if "dnsm" in wanted:
        if p.concavity_on == "final":
            out["dnsm"] = decompose(shape, p).report.dnsm_concavity
        else:
            _, fitted, _ = overlap_fit(shape, p)
            pruned, _, stats = prune(fitted, shape, p.prune)
            out["dnsm"] = convexity_report(pruned, shape, p.prune.t_exponent,
                                           stats).dnsm_concavity
    return {k: out[k] for k in MEASURES if k in wanted}


def cmd_convexity(args) -> int:
    wanted = MEASURES if args.measure == "all" else (args.measure,)
    shape = io.read_shape(args.input, args.threshold)
    for name, value in _measures(shape, _pipeline_params(args), wanted).items():
        print(f"{name}_concavity {value:.6f}")
    return 0


def cmd_report(args) -> int:
    p = _pipeline_params(args)
    rows = []
    for path in args.inputs:
        shape = io.read_shape(path, args.threshold)
        rows.append((Path(path).name, _measures(shape, p, MEASURES)))
    rank_by = args.sort_by
    rows.sort(key=lambda r: (r[1][rank_by], r[0]))
    width = max(len(name) for name, _ in rows)
    print(f"{'shape':<{width}}  " + "  ".join(f"{m:>10}" for m in MEASURES))
    for name, values in rows:
        print(f"{name:<{width}}  " + "  ".join(f"{values[m]:10.4f}" for m in MEASURES))
    if args.json:
        doc = {"sorted_by": rank_by, "params": _params_dict(p),
               "shapes": [{"input": n, **{f"{m}_concavity": v[m] for m in MEASURES}}
                          for n, v in rows]}
        io.write_report(doc, args.json)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dnsm", description="Convex decomposition and concavity of binary shapes.")
    parser.add_argument("-v", "--verbose", action="store_true")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("decompose", help="three-step decomposition into convex parts")
    _add_input(sub)
    sub.add_argument("--out-dir", default=".", help="directory for the output files")
    _add_model_flags(sub)
    sub.set_defaults(func=cmd_decompose)

    sub = subs.add_parser("convexity", help="print concavity measures of one shape")
    _add_input(sub)
    sub.add_argument("--measure", choices=MEASURES + ("all",), default="all")
    _add_model_flags(sub)
    sub.set_defaults(func=cmd_convexity)

    sub = subs.add_parser("fit-only", help="initialize and run the overlap-rewarding fit")
    _add_input(sub)
    sub.add_argument("--out-dir", default=".")
    _add_model_flags(sub, with_prune=False, with_step3=False)
    sub.set_defaults(func=cmd_fit_only)

    sub = subs.add_parser("report", help="rank several shapes by concavity")
    sub.add_argument("inputs", nargs="+")
    sub.add_argument("--threshold", type=_threshold, default=128)
    sub.add_argument("--sort-by", choices=MEASURES, default="dnsm")
    sub.add_argument("--json", help="also write the table as JSON here")
    _add_model_flags(sub)
    sub.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (OSError, ValueError, FitDivergedError) as exc:
        print(f"dnsm: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
