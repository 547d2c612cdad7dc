"""CLI for the baseline harness: run the model zoo, merge comparisons."""

from __future__ import annotations

import argparse
import json
import os
import sys

from .harness import HashMismatch, compare, run_baselines, write_results_csv


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kernelscope-baselines",
        description="Classical reference models over kernelscope exports.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="grid-search the model zoo on an export")
    p.add_argument("--dataset", required=True, help="exported dataset CSV")
    p.add_argument("--task", choices=("classification", "regression"),
                   default="classification")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-train", type=int, default=None,
                   help="only for exports without split indices")
    p.add_argument("--families", default=None,
                   help="comma list; default: all six")
    p.add_argument("--jobs", type=int, default=-1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare", help="merge primary report with baselines")
    p.add_argument("--primary-report", required=True)
    p.add_argument("--baselines", required=True, help="baselines.csv")
    p.add_argument("--out", required=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            families = args.families.split(",") if args.families else None
            results = run_baselines(
                args.dataset, task=args.task, seed=args.seed,
                n_train=args.n_train, families=families, n_jobs=args.jobs,
            )
            os.makedirs(args.out, exist_ok=True)
            write_results_csv(os.path.join(args.out, "baselines.csv"), results)
        else:
            summary = compare(args.primary_report, args.baselines, args.out)
            print(json.dumps(summary, sort_keys=True))
    except (HashMismatch, FileNotFoundError, ValueError) as exc:
        print(json.dumps({"error": {"type": type(exc).__name__,
                                    "message": str(exc)}}), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
