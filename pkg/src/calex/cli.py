"""Command-line entry point: simulate | calibrate | extrapolate | experiment | series."""

from __future__ import annotations

import argparse
import csv
import secrets
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import experiment as exp
from . import gen
from .boot import EstimateReport, bootstrap_estimate, summarize
from .calib import (
    FITTERS,
    StratifiedSample,
    build_base_joint,
    fit_curve,
    sample_neyman,
    sample_random,
    sample_uniform_strata,
    stratify,
    uniform_edges,
)
from .core import JointDistribution, ScoredItem, prevalence_of, scores_of
from .estim import TECHNIQUES, TechniqueConfig, estimate
from .files import dump_joint, read_dataset, read_json, write_dataset, write_json

SAMPLERS = ("uniform", "neyman", "random")


class CommandError(Exception):
    """Reported on stderr with exit status 1."""


def _seed(args) -> int:
    if args.seed is None:
        args.seed = secrets.randbits(31)
        print(f"seed: {args.seed}")
    return args.seed


def _pct(x: float) -> str:
    return f"{100 * x:.2f}%"


def _report_line(r: EstimateReport) -> str:
    return f"{r.technique}: {_pct(r.point)} ({_pct(r.ci_low)}, {_pct(r.ci_high)}) [{r.replicates} replicates]"


# -- simulate ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    given = [args.preset is not None, args.intrinsic is not None, args.extrinsic is not None]
    if sum(given) != 1:
        raise CommandError("give exactly one of --preset, --intrinsic, --extrinsic")
    if args.preset:
        spec = gen.preset(args.preset)
    elif args.intrinsic:
        spec = gen.IntrinsicSpec(*args.intrinsic)
    else:
        spec = gen.ExtrinsicSpec(*args.extrinsic)
    seed = _seed(args)
    items = gen.generate(spec, args.n, seed)
    write_dataset(args.out, items)
    frac = float(np.mean([it.label for it in items]))
    print(f"wrote {args.out}: n={len(items)} positive fraction={frac:.4f}")
    return 0


# -- calibrate --------------------------------------------------------------


def _restratify(sample_items: List[ScoredItem], base_scores, k: int) -> StratifiedSample:
    """A pre-labeled sample, stratified against the base dataset."""
    strata, _ = stratify(scores_of(sample_items), k)
    _, counts = stratify(base_scores, k)
    return StratifiedSample(sample_items, strata, uniform_edges(k), counts)


def cmd_calibrate(args) -> int:
    seed = _seed(args)
    base = read_dataset(args.base)
    if not base:
        raise CommandError(f"{args.base}: no rows")
    base_scores = scores_of(base)
    if args.sample:
        sample = _restratify(read_dataset(args.sample, require_labels=True), base_scores, args.strata)
    else:
        if args.sampler == "uniform":
            sample = sample_uniform_strata(base, args.cap, args.strata, seed)
        elif args.sampler == "neyman":
            sample = sample_neyman(base, args.total, args.strata, seed)
        else:
            sample = sample_random(base, args.total, seed)
        missing = [it.id for it in sample.items if it.label is None]
        if missing:
            raise CommandError(f"{len(missing)} sampled items have no label (first: {missing[0]}); "
                               "supply a labeled sample with --sample")
    weights = None if args.unweighted else sample.design_weights
    curve = fit_curve(args.fitter, sample.scores, sample.labels, args.bins, weights=weights)
    joint = build_base_joint(base_scores, curve, args.bins)

    sample_out = Path(args.sample_out or Path(args.out).with_suffix(".sample.csv"))
    write_dataset(sample_out, sample.items)
    provenance = {
        "base": str(Path(args.base).resolve()),
        "sample": str(sample_out.resolve()),
        "fitter": args.fitter,
        "strata": args.strata,
        "bins": args.bins,
        "weighted": not args.unweighted,
    }
    dump_joint(joint, args.out, calibration=provenance)
    print(f"wrote {args.out} and {sample_out} ({len(sample.items)} labeled items)")
    print(f"base prevalence (joint): {_pct(prevalence_of(joint))}")
    if args.reps >= 2:
        rep = bootstrap_estimate(base_scores, sample, None, TechniqueConfig("cpcc", bins=args.bins),
                                 args.fitter, args.reps, seed, weighted=not args.unweighted)
        print("base " + _report_line(rep))
    return 0


# -- extrapolate ------------------------------------------------------------


def _load_calibration(joint_path):
    """(joint, provenance) where provenance holds the base scores and the
    stratified sample, or None when the joint file carries no usable record."""
    raw = read_json(joint_path)
    joint = JointDistribution.from_dict(raw)
    prov = raw.get("calibration")
    if not prov:
        return joint, None
    try:
        base = read_dataset(prov["base"])
        sample_items = read_dataset(prov["sample"], require_labels=True)
    except OSError:
        return joint, None
    base_scores = scores_of(base)
    return joint, {
        "base_scores": base_scores,
        "sample": _restratify(sample_items, base_scores, int(prov["strata"])),
        "fitter": prov["fitter"],
        "weighted": bool(prov.get("weighted", True)),
    }


def _technique_config(args, technique: str, bins: int) -> TechniqueConfig:
    return TechniqueConfig(technique, threshold=args.threshold, grid_step=args.grid_step,
                           bins=bins, denominator_guard=args.guard)


def run_technique(joint, calibration, target_scores, config: TechniqueConfig, reps: int,
                  seed: int) -> EstimateReport:
    if calibration is None or reps < 2:
        point = estimate(config, target_scores, joint)
        return summarize([point], config.technique, seed)
    return bootstrap_estimate(calibration["base_scores"], calibration["sample"], target_scores, config,
                              calibration["fitter"], reps, seed, weighted=calibration["weighted"])


def cmd_extrapolate(args) -> int:
    seed = _seed(args)
    joint, calibration = _load_calibration(args.joint)
    target = read_dataset(args.target)
    if not target:
        raise CommandError(f"{args.target}: empty target file")
    if calibration is None and args.reps >= 2:
        print("note: joint file has no readable calibration record; reporting the point estimate only")
    config = _technique_config(args, args.technique, joint.density.bins)
    rep = run_technique(joint, calibration, scores_of(target), config, args.reps, seed)
    if args.out:
        write_json(args.out, rep.to_dict())
    print(_report_line(rep))
    return 0


# -- experiment -------------------------------------------------------------


def cmd_experiment(args) -> int:
    seed = _seed(args)
    cfg = exp.ExperimentConfig(reps=args.reps, seed=seed, fitter=args.fitter, bins=args.bins,
                               weighted=not args.unweighted)
    results = exp.run_experiment(cfg)
    paths = exp.write_tables(results, args.out_dir)
    for name, path in paths.items():
        print(f"== {name} ({path})")
        print(path.read_text(), end="")
    found = exp.checks(results)
    for c in found:
        tag = "PASS" if c.passed else "FAIL"
        gate = "" if c.gating else " (informational)"
        print(f"[{tag}] criterion {c.criterion}: {c.name}: {c.detail}{gate}")
    return 0 if exp.gate_passed(found) else 1


# -- series -----------------------------------------------------------------


def load_manifest(path):
    """Manifest JSON: {"joint": path, "periods": [{"label": .., "target": path}, ...],
    "techniques": [...]}; relative paths resolve against the manifest."""
    raw = read_json(path)
    root = Path(path).resolve().parent
    periods = raw.get("periods") or []
    if not periods:
        raise CommandError(f"{path}: manifest lists no periods")
    return {
        "joint": root / raw["joint"],
        "periods": [(str(p["label"]), root / p["target"]) for p in periods],
        "techniques": list(raw.get("techniques", [])),
    }


def cmd_series(args) -> int:
    seed = _seed(args)
    manifest = load_manifest(args.manifest)
    techniques = args.techniques or manifest["techniques"] or ["cpcc"]
    for t in techniques:
        if t not in TECHNIQUES:
            raise CommandError(f"unknown technique {t!r}; choose from {TECHNIQUES}")
    joint, calibration = _load_calibration(manifest["joint"])
    rows = []
    for label, target_path in manifest["periods"]:
        try:
            target = read_dataset(target_path)
        except (OSError, ValueError) as e:
            raise CommandError(f"period {label}: cannot read {target_path}: {e}") from None
        if not target:
            raise CommandError(f"period {label}: {target_path} is empty")
        scores = scores_of(target)
        for t in techniques:
            rep = run_technique(joint, calibration, scores,
                                _technique_config(args, t, joint.density.bins), args.reps, seed)
            rows.append((label, t, rep))
            print(f"{label} {_report_line(rep)}")
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", "technique", "point", "ci_low", "ci_high"])
        for label, t, rep in rows:
            w.writerow([label, t, f"{rep.point:.6f}", f"{rep.ci_low:.6f}", f"{rep.ci_high:.6f}"])
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


# -- parser -----------------------------------------------------------------


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _add_technique_flags(p):
    p.add_argument("--threshold", type=float, default=0.5, help="cc/acc threshold")
    p.add_argument("--grid-step", type=float, default=0.001, help="mixture grid step")
    p.add_argument("--guard", type=float, default=0.05, help="acc/median_sweep |tpr-fpr| guard")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="calex", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write a simulated labeled dataset")
    p.add_argument("--preset", choices=sorted(gen.PRESETS))
    p.add_argument("--intrinsic", type=float, nargs=5, metavar=("A_POS", "B_POS", "A_NEG", "B_NEG", "PREV"))
    p.add_argument("--extrinsic", type=float, nargs=7, metavar=("W", "B", "A1", "B1", "A2", "B2", "LAMBDA"))
    p.add_argument("--n", type=_positive_int, default=20_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit a calibration curve and write the base joint distribution")
    p.add_argument("--base", required=True, help="base dataset CSV")
    p.add_argument("--sample", help="pre-labeled calibration sample CSV (real-data mode)")
    p.add_argument("--sampler", choices=SAMPLERS, default="uniform")
    p.add_argument("--strata", type=_positive_int, default=10)
    p.add_argument("--cap", type=_positive_int, default=200, help="per-stratum cap (uniform sampler)")
    p.add_argument("--total", type=_positive_int, default=2000, help="sample size (neyman/random)")
    p.add_argument("--fitter", choices=FITTERS, default="platt")
    p.add_argument("--bins", type=_positive_int, default=20)
    p.add_argument("--unweighted", action="store_true", help="fit the curve without design weights")
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="joint distribution JSON")
    p.add_argument("--sample-out", help="calibration sample CSV (default: next to --out)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("extrapolate", help="estimate prevalence on a target dataset")
    p.add_argument("--joint", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--technique", choices=TECHNIQUES, default="cpcc")
    _add_technique_flags(p)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="report JSON")
    p.set_defaults(func=cmd_extrapolate)

    p = sub.add_parser("experiment", help="run the four simulated configurations")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--fitter", choices=FITTERS, default="platt")
    p.add_argument("--bins", type=_positive_int, default=20)
    p.add_argument("--unweighted", action="store_true")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("series", help="estimate prevalence for each period of a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--techniques", nargs="+")
    _add_technique_flags(p)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_series)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CommandError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
