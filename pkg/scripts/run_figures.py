"""Regenerate the three figure experiments into results/<scenario>/.

Usage: python3 scripts/run_figures.py [--trials N] [--workers W] [--seed S] [fig2a fig2b fig2c]
"""

import argparse
import sys

from pilot_forge.experiment import SCENARIOS, make_spec, run_experiment


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("scenarios", nargs="*", help=f"any of {', '.join(SCENARIOS)}; default fig2a fig2b fig2c")
    p.add_argument("--trials", type=int, help="override the per-scenario drop count")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results")
    args = p.parse_args(argv)
    unknown = set(args.scenarios) - set(SCENARIOS)
    if unknown:
        p.error(f"unknown scenario(s): {', '.join(sorted(unknown))}")
    for scenario in args.scenarios or ("fig2a", "fig2b", "fig2c"):
        overrides = dict(seed=args.seed, workers=args.workers, out=f"{args.out}/{scenario}")
        if args.trials:
            overrides["trials"] = args.trials
        spec = make_spec(scenario, overrides)
        res = run_experiment(spec)
        print(f"{scenario}: {', '.join(str(f) for f in res.files)}", file=sys.stderr)
        if res.igs_trace is not None:
            print(f"  normalized threshold {res.igs_trace.gamma_th:.4f}", file=sys.stderr)
        for scheme in spec.schemes if scenario != "fig2a" else ():
            means = " ".join(f"M={M}:{res.mean(scheme, M):.3f}" for M in spec.antennas)
            print(f"  {scheme:8s} {means}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
