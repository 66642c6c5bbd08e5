"""Run the four simulated configurations and print both result tables.

    python scripts/run_experiment.py --out-dir results --reps 1000 --seed 0

Add ``--seeds 0 30`` to repeat the run over a seed range and report how
often each acceptance check passes, instead of writing tables.
"""

import argparse
from collections import defaultdict

from calex import experiment as exp


def pass_rates(first: int, count: int, reps: int):
    tally = defaultdict(int)
    for seed in range(first, first + count):
        for c in exp.checks(exp.run_experiment(exp.ExperimentConfig(reps=reps, seed=seed))):
            tally[(c.criterion, c.name)] += c.passed
        print(f"seed {seed} done", flush=True)
    for (criterion, name), hits in sorted(tally.items()):
        print(f"criterion {criterion} {name}: {hits}/{count}")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--fitter", default="platt")
    ap.add_argument("--unweighted", action="store_true")
    ap.add_argument("--seeds", type=int, nargs=2, metavar=("FIRST", "COUNT"))
    args = ap.parse_args()

    if args.seeds:
        pass_rates(args.seeds[0], args.seeds[1], args.reps)
        return 0
    cfg = exp.ExperimentConfig(reps=args.reps, seed=args.seed, fitter=args.fitter, weighted=not args.unweighted)
    results = exp.run_experiment(cfg)
    for name, path in exp.write_tables(results, args.out_dir).items():
        print(f"== {name}: {path}")
        print(path.read_text())
    for c in exp.checks(results):
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.criterion} {c.name}: {c.detail}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
