"""Command-line interface.

Exit codes: 0 success, 1 computation error, 2 input error. Failures emit a
structured JSON error object on stderr. Every report embeds the config and
seeds, and reruns with identical arguments reproduce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import pipeline
from .errors import (
    CapacityExceeded,
    FormatError,
    InsufficientData,
    InvalidGenerator,
    InvalidInput,
    KernelscopeError,
)

INPUT_ERRORS = (
    InvalidInput,
    FormatError,
    InsufficientData,
    InvalidGenerator,
    CapacityExceeded,
    FileNotFoundError,
)


def _add_common(p, dataset=True, embedding=False):
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=None,
                   help=f"worker threads (fallback: ${pipeline.THREADS_ENV})")
    p.add_argument("--out", required=True, help="output directory")
    if dataset:
        p.add_argument("--dataset", default="gaussian",
                       help="gaussian | csv:PATH | fmnist:DIR")
        p.add_argument("--n", dest="dim", type=int, default=None,
                       help="input dimension (PCA components for fmnist)")
        p.add_argument("--N", dest="n_points", type=int, default=None,
                       help="number of data points")
    if embedding:
        p.add_argument("--embedding", choices=("e1", "e2", "e3"), default="e1")


def _kernels_arg(p, default="fidelity,pq"):
    p.add_argument("--kernels", default=default,
                   help="comma list from: fidelity, pq, pq-linear")
    p.add_argument("--pq-gamma-factor", dest="pq_gamma_factor", type=float,
                   default=1.0, help="gamma = factor / (n_qubits * Var)")


def _grid_args(p):
    p.add_argument("--lambda-grid", dest="lambda_grid", default=None,
                   help="comma list of regularization values")
    p.add_argument("--gamma-grid", dest="gamma_factors", default=None,
                   help="comma list of RBF gamma multipliers")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kernelscope",
        description="Screen datasets and embeddings for potential quantum "
                    "prediction advantage.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="embed data, export 1-RDM features")
    _add_common(p, embedding=True)

    p = sub.add_parser("gram", help="build reference Gram matrices")
    _add_common(p, embedding=True)
    _kernels_arg(p)

    p = sub.add_parser("geometry", help="geometry report from .gram files")
    _add_common(p, dataset=False)
    p.add_argument("--gram-q", nargs="+", required=True,
                   help="reference .gram files")
    p.add_argument("--gram-c", nargs="+", required=True,
                   help="classical .gram files")
    p.add_argument("--labels-csv", default=None,
                   help="dataset CSV supplying targets for the s comparison")
    p.add_argument("--observable-frobenius", type=float, default=None)
    _grid_args(p)

    p = sub.add_parser("screen", help="full screening flowchart")
    _add_common(p)
    p.add_argument("--embeddings", default="e1",
                   help="comma list from: e1, e2, e3")
    p.add_argument("--dims", default=None,
                   help="comma list of input dimensions to sweep (overrides --n)")
    _kernels_arg(p)
    _grid_args(p)
    p.add_argument("--labels", choices=("none", "qnn", "data"), default="none")
    p.add_argument("--observable", choices=("z1",), default=None)
    p.add_argument("--task", choices=("regression", "classification"),
                   default="regression")
    p.add_argument("--evaluate", action="store_true",
                   help="also fit/evaluate models on a 75/25 split")
    p.add_argument("--plots", action="store_true", help="emit plots/*.svg")

    p = sub.add_parser("engineer", help="engineer a maximally separating dataset")
    _add_common(p, embedding=True)
    _kernels_arg(p, default="pq")
    _grid_args(p)
    p.add_argument("--reference", default="pq",
                   help="kernel the labels saturate (from --kernels)")
    p.add_argument("--mode", choices=("median", "sign_noise"),
                   default="sign_noise")
    p.add_argument("--noise-p", dest="noise_p", type=float, default=0.1)
    p.add_argument("--s-tra-cap", dest="s_tra_cap", type=float, default=0.002)
    p.add_argument("--n-train", dest="n_train", type=int, default=None)

    p = sub.add_parser("learn", help="grid-searched kernel ridge on a dataset")
    _add_common(p, embedding=True)
    p.add_argument("--kernel", choices=("linear", "rbf", "pq", "fidelity"),
                   required=True)
    p.add_argument("--task", choices=("regression", "classification"),
                   default="classification")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--n-train", dest="n_train", type=int, default=None)
    _grid_args(p)

    p = sub.add_parser("dlog-demo", help="discrete-log learning demo")
    _add_common(p, dataset=False)
    p.add_argument("--p", type=int, default=59, help="prime modulus")
    p.add_argument("--g", type=int, default=2, help="group generator")
    p.add_argument("--s", type=int, default=2, help="interval offset")
    p.add_argument("--n-train", dest="n_train", type=int, default=50)

    p = sub.add_parser("appendix-g-demo",
                       help="basis-encoding fidelity-kernel failure demo")
    _add_common(p, dataset=False)
    p.add_argument("--n", dest="dim", type=int, default=10)
    p.add_argument("--N", dest="n_points", type=int, default=100)

    return ap


def _parse_list(raw, cast):
    return [cast(v) for v in raw.split(",") if v] if raw else None


def config_from_args(args: argparse.Namespace) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    if cfg.get("kernels") and isinstance(cfg["kernels"], str):
        cfg["kernels"] = [k.strip() for k in cfg["kernels"].split(",") if k.strip()]
    if cfg.get("embeddings") and isinstance(cfg["embeddings"], str):
        cfg["embeddings"] = [e.strip() for e in cfg["embeddings"].split(",")]
    if cfg.get("dims") and isinstance(cfg["dims"], str):
        cfg["dims"] = _parse_list(cfg["dims"], int)
    if cfg.get("lambda_grid") and isinstance(cfg["lambda_grid"], str):
        cfg["lambda_grid"] = _parse_list(cfg["lambda_grid"], float)
    if cfg.get("gamma_factors") and isinstance(cfg["gamma_factors"], str):
        cfg["gamma_factors"] = _parse_list(cfg["gamma_factors"], float)
    return cfg


RUNNERS = {
    "embed": pipeline.run_embed,
    "gram": pipeline.run_gram,
    "geometry": pipeline.run_geometry,
    "screen": pipeline.run_screen,
    "engineer": pipeline.run_engineer,
    "learn": pipeline.run_learn,
    "dlog-demo": pipeline.run_dlog_demo,
    "appendix-g-demo": pipeline.run_appendix_g_demo,
}


def _error_json(exc: Exception) -> str:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    if isinstance(exc, FileNotFoundError):
        payload["error"]["path"] = str(exc.filename or exc)
    return json.dumps(payload, sort_keys=True)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    runner = RUNNERS[cfg["command"]]
    try:
        runner(cfg)
    except INPUT_ERRORS as exc:
        print(_error_json(exc), file=sys.stderr)
        return 2
    except (KernelscopeError, np.linalg.LinAlgError) as exc:
        print(_error_json(exc), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
