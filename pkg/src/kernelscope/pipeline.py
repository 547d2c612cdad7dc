"""End-to-end pipeline stages shared by the CLI subcommands.

Each ``run_*`` function takes a plain config dict (already validated by the
CLI), performs one pipeline, writes its files under ``out``, and returns the
report dict. All randomness flows from the single ``seed`` entry through
fixed offsets, so identical configs reproduce identical outputs.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import data as dat
from . import engineer as eng
from . import geometry as geo
from . import kernels as kn
from . import learn
from . import statevec as sv
from . import svg
from .errors import InvalidInput

THREADS_ENV = "KERNELSCOPE_THREADS"

# seed offsets so every stage has an independent, reproducible stream
SEED_QNN = 1
SEED_NOISE = 2
SEED_SPLIT = 3
SEED_HAAR = 4

STATE_MEMORY_BUDGET = 256 * 1024 * 1024


def resolve_threads(threads: int | None) -> int:
    if threads is not None and threads >= 1:
        return threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InvalidInput(f"{THREADS_ENV}={env!r} is not an integer")
    return 1


def make_embedding_spec(scheme: str, n: int, seed: int) -> sv.EmbeddingSpec:
    return sv.EmbeddingSpec(scheme=scheme, n=n, e3_haar_seed=seed + SEED_HAAR)


def embed_all(x: np.ndarray, spec: sv.EmbeddingSpec, threads: int = 1,
              keep_states: bool | None = None):
    """Embed every row once; return (features, states-or-None).

    States are retained only when they fit the memory budget (or when
    forced), otherwise callers must re-embed per block.
    """
    x = np.asarray(x, dtype=np.float64)
    n_points = x.shape[0]
    if keep_states is None:
        need = n_points * 16 * (2**spec.register)
        keep_states = need <= STATE_MEMORY_BUDGET

    def one(row):
        state = sv.embed(row, spec)
        return sv.pauli_expectations_1rdm(state), state

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, x))
    else:
        results = [one(row) for row in x]
    features = np.stack([f for f, _ in results])
    states = [s for _, s in results] if keep_states else None
    return features, states


def fidelity_gram_for(x: np.ndarray, spec: sv.EmbeddingSpec,
                      states=None, block_size: int = 32,
                      provenance=None) -> kn.GramMatrix:
    if states is not None:
        return kn.fidelity_gram(states, provenance=provenance)
    return kn.fidelity_gram_blocks(
        x.shape[0], lambda i: sv.embed(x[i], spec), block_size=block_size,
        provenance=provenance,
    )


def classical_suite(x: np.ndarray, gamma_factors=None) -> list[kn.GramMatrix]:
    """Linear kernel plus the data-scaled RBF gamma grid, trace-normalized."""
    factors = gamma_factors or kn.GEOMETRY_RBF_GAMMA_FACTORS
    suite = [kn.normalize_trace(kn.classical_gram(x, "linear"))]
    for gamma in kn.gamma_grid(x, x.shape[1], factors):
        suite.append(kn.normalize_trace(kn.classical_gram(x, "rbf", gamma=gamma)))
    return suite


def pq_gamma(features: np.ndarray, factor: float = 1.0) -> float:
    """Data-scaled projected-kernel gamma: factor / (n_qubits * Var[feature])."""
    return kn.gamma_grid(features, features.shape[1], (factor,))[0]


def quantum_grams(x, spec, kernels, features, states, pq_gamma_factor=1.0,
                  provenance=None) -> dict[str, kn.GramMatrix]:
    """Build the requested reference Grams, keyed by kernel name."""
    out = {}
    for name in kernels:
        if name == "fidelity":
            out[name] = fidelity_gram_for(x, spec, states=states,
                                          provenance=provenance)
        elif name == "pq":
            gamma = pq_gamma(features, pq_gamma_factor)
            out[name] = kn.projected_gaussian_1rdm_gram(features, gamma,
                                                        provenance=provenance)
        elif name == "pq-linear":
            out[name] = kn.normalize_trace(
                kn.projected_linear_gram(features=features, order=1,
                                         provenance=provenance)
            )
        else:
            raise InvalidInput(f"unknown reference kernel {name!r}")
    return out


def load_inputs(cfg: dict):
    """Resolve the dataset spec to (X, y-or-None, meta)."""
    spec = cfg.get("dataset", "gaussian")
    seed = cfg["seed"]
    n_points = cfg.get("n_points")
    dim = cfg.get("dim")
    if spec == "gaussian":
        if not n_points or not dim:
            raise InvalidInput("gaussian dataset needs --n and --N")
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(n_points, dim))
        return x, None, {"source": "gaussian", "seed": seed}
    if spec.startswith("csv:") or spec.endswith(".csv"):
        path = spec[4:] if spec.startswith("csv:") else spec
        if not os.path.exists(path):
            raise FileNotFoundError(path)
        ds, sidecar = dat.load_dataset(path)
        x = ds.x if dim is None else ds.x[:, :dim]
        if n_points is not None and n_points < ds.n_points:
            ds = dat.subsample(dat.Dataset(x=x, y=ds.y, meta=ds.meta),
                               n_points, seed)
            x = ds.x
        return x, ds.y, {"source": spec, "sha256": sidecar.get("sha256")}
    if spec.startswith("fmnist:"):
        path = spec[len("fmnist:"):]
        if not os.path.exists(path):
            raise FileNotFoundError(path)
        images, labels = dat.load_fashion_mnist(path)
        kept, y = dat.filter_classes(images, labels, (3, 6))
        flat = kept.reshape(kept.shape[0], -1).astype(np.float64)
        if dim is None:
            raise InvalidInput("fmnist dataset needs --n (PCA components)")
        x, _ = dat.pca_standardize(flat, dim)
        ds = dat.Dataset(x=x, y=y, meta={"source": spec})
        if n_points is not None and n_points < ds.n_points:
            ds = dat.subsample(ds, n_points, seed)
        return ds.x, ds.y, {"source": spec, "classes": [3, 6]}
    raise InvalidInput(f"unknown dataset spec {spec!r}")


def attach_labels(cfg, x, y, spec):
    """Generate QNN labels when requested; otherwise pass data labels through."""
    labels = cfg.get("labels", "none")
    if labels == "qnn":
        ds = dat.gen_quantum_dataset(x, spec, qnn_seed=cfg["seed"] + SEED_QNN)
        return ds.y, ds.meta["qnn"]
    if labels == "data":
        if y is None:
            raise InvalidInput("--labels data requested but dataset has no labels")
        return y, None
    return None, None


def _jsonable(obj):
    return dat._jsonable(obj)


def write_report(out_dir, report: dict, name: str = "report.json") -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as fh:
        json.dump(_jsonable(report), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def write_csv_rows(path, rows: list[dict]) -> None:
    if not rows:
        with open(path, "w", newline="") as fh:
            fh.write("")
        return
    fields = list(rows[0].keys())
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for row in rows:
            w.writerow(row)


def split_indices(n: int, n_train: int, seed: int):
    perm = np.random.default_rng(seed + SEED_SPLIT).permutation(n)
    return perm[:n_train], perm[n_train:]


def cv_lambda(full_k: np.ndarray, y: np.ndarray, lambda_grid, folds: int,
              seed: int, task: str) -> float:
    """Pick lambda by k-fold CV on a precomputed kernel (ties to larger)."""
    n = y.shape[0]
    fold_idx = learn.cv_folds(n, min(folds, n), seed)
    best = None
    for lam in sorted(lambda_grid, reverse=True):
        errs = []
        for test in fold_idx:
            train = np.setdiff1d(np.arange(n), test)
            alpha, _ = learn._fit_alpha(full_k[np.ix_(train, train)], y[train], lam)
            preds = np.clip(full_k[np.ix_(train, test)].T @ alpha, -1.0, 1.0)
            if task == "regression":
                errs.append(np.mean(np.abs(preds - y[test])))
            else:
                errs.append(np.mean(np.where(preds >= 0, 1.0, -1.0) != y[test]))
        score = float(np.mean(errs))
        if best is None or score < best[0]:
            best = (score, lam)
    return best[1]


def fit_eval_split(full_k: np.ndarray, y: np.ndarray, train, test,
                   lambda_grid, seed: int, task: str) -> dict:
    """CV-select lambda on the training block, refit, evaluate on the rest."""
    k_tr = full_k[np.ix_(train, train)]
    lam = cv_lambda(k_tr, y[train], lambda_grid, 5, seed, task)
    alpha, _ = learn._fit_alpha(k_tr, y[train], lam)
    preds = np.clip(full_k[np.ix_(train, test)].T @ alpha, -1.0, 1.0)
    metrics = learn.evaluate(preds, y[test], task)
    return {"lambda": lam, **metrics}


# ---------------------------------------------------------------------------
# Subcommand pipelines


def run_embed(cfg: dict) -> dict:
    x, _, meta = load_inputs(cfg)
    spec = make_embedding_spec(cfg["embedding"], x.shape[1], cfg["seed"])
    threads = resolve_threads(cfg.get("threads"))
    features, _ = embed_all(x, spec, threads=threads, keep_states=False)
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    feat_path = os.path.join(out_dir, "features.csv")
    flat = features.reshape(features.shape[0], -1)
    header = [
        f"q{q}_{p}" for q in range(features.shape[1]) for p in ("x", "y", "z")
    ]
    with open(feat_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in flat:
            w.writerow([repr(float(v)) for v in row])
    report = {
        "config": cfg,
        "data": meta,
        "n_points": int(x.shape[0]),
        "n_qubits": spec.register,
        "files": {"features": "features.csv"},
    }
    write_report(out_dir, report)
    return report


def run_gram(cfg: dict) -> dict:
    x, y, meta = load_inputs(cfg)
    spec = make_embedding_spec(cfg["embedding"], x.shape[1], cfg["seed"])
    threads = resolve_threads(cfg.get("threads"))
    features, states = embed_all(x, spec, threads=threads)
    provenance = {"data": _jsonable(meta), "seed": cfg["seed"],
                  "embedding": spec.scheme}
    grams = quantum_grams(x, spec, cfg["kernels"], features, states,
                          cfg.get("pq_gamma_factor") or 1.0, provenance)
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    files = {}
    for name, gram in grams.items():
        path = os.path.join(out_dir, f"{name}.gram")
        kn.write_gram(path, gram)
        files[name] = f"{name}.gram"
    report = {"config": cfg, "data": meta, "files": files,
              "n_points": int(x.shape[0])}
    write_report(out_dir, report)
    return report


def run_geometry(cfg: dict) -> dict:
    """Geometry quantities from precomputed Gram files."""
    refs = [kn.normalize_trace(kn.read_gram(p)) for p in cfg["gram_q"]]
    suite = [kn.normalize_trace(kn.read_gram(p)) for p in cfg["gram_c"]]
    y = None
    if cfg.get("labels_csv"):
        ds, _ = dat.load_dataset(cfg["labels_csv"])
        y = ds.y
    reports = geo.screen(
        refs, suite, lambda_grid=cfg.get("lambda_grid") or geo.LAMBDA_GRID,
        observable_frobenius=cfg.get("observable_frobenius"), y=y,
        seeds={"seed": cfg["seed"]},
    )
    out_dir = cfg["out"]
    report = {"config": cfg, "reports": [r.to_json_dict() for r in reports]}
    write_report(out_dir, report)
    write_csv_rows(
        os.path.join(out_dir, "report.csv"),
        [row for r in reports for row in r.csv_rows()],
    )
    return report


def run_screen(cfg: dict) -> dict:
    """Full screening flowchart, optionally swept over input dimensions."""
    dims = cfg.get("dims") or [cfg["dim"]]
    threads = resolve_threads(cfg.get("threads"))
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    all_reports = []
    trend = {}
    accuracy_rows = []
    for dim in dims:
        sub = dict(cfg, dim=dim)
        x, y_data, meta = load_inputs(sub)
        for scheme in cfg["embeddings"]:
            spec = make_embedding_spec(scheme, dim, cfg["seed"])
            features, states = embed_all(x, spec, threads=threads)
            provenance = {"data": _jsonable(meta), "seed": cfg["seed"],
                          "embedding": scheme}
            refs = quantum_grams(x, spec, cfg["kernels"], features, states,
                                 cfg.get("pq_gamma_factor") or 1.0, provenance)
            suite = classical_suite(x)
            y, qnn_meta = attach_labels(sub, x, y_data, spec)
            observable = None
            if cfg.get("observable") == "z1":
                observable = float(2**spec.register)
            reports = geo.screen(
                list(refs.values()), suite,
                lambda_grid=cfg.get("lambda_grid") or geo.LAMBDA_GRID,
                observable_frobenius=observable, y=y, input_dim=dim,
                seeds={"seed": cfg["seed"], "qnn": qnn_meta},
            )
            for name, rep in zip(refs, reports):
                key = f"{scheme}/{name}"
                trend.setdefault(key, {})[dim] = (rep.d_eff, rep.min_g["g_gen"])
                all_reports.append({"embedding": scheme, "kernel": name,
                                    "dim": dim, **rep.to_json_dict()})
            if y is not None and cfg.get("evaluate"):
                n_train = int(round(0.75 * x.shape[0]))
                train, test = split_indices(x.shape[0], n_train, cfg["seed"])
                task = cfg.get("task") or "regression"
                for name, gram in refs.items():
                    res = fit_eval_split(gram.values, y, train, test,
                                         geo.LAMBDA_GRID, cfg["seed"], task)
                    accuracy_rows.append(
                        {"embedding": scheme, "model": name, "dim": dim, **res}
                    )
    report = {"config": cfg, "reports": all_reports,
              "evaluations": accuracy_rows}
    write_report(out_dir, report)
    csv_rows = []
    for entry in all_reports:
        base = {"embedding": entry["embedding"], "kernel": entry["kernel"],
                "dim": entry["dim"], "d_eff": entry["d_eff"],
                "min_g": entry["min_g"]["g_gen"], "verdict": entry["verdict"]}
        csv_rows.append(base)
    write_csv_rows(os.path.join(out_dir, "report.csv"), csv_rows)
    if cfg.get("plots"):
        plots_dir = os.path.join(out_dir, "plots")
        os.makedirs(plots_dir, exist_ok=True)
        xs = sorted({d for series in trend.values() for d in series})
        d_series = {
            key: [series[d][0] for d in xs]
            for key, series in sorted(trend.items())
            if set(series) == set(xs)
        }
        g_series = {
            key: [series[d][1] for d in xs]
            for key, series in sorted(trend.items())
            if set(series) == set(xs)
        }
        svg.line_chart(os.path.join(plots_dir, "d_vs_n.svg"), xs, d_series,
                       title="effective dimension", xlabel="input dimension n",
                       ylabel="d_eff")
        svg.line_chart(os.path.join(plots_dir, "g_vs_n.svg"), xs, g_series,
                       title="min geometric difference", xlabel="input dimension n",
                       ylabel="g")
        if accuracy_rows:
            metric = "mae" if "mae" in accuracy_rows[0] else "accuracy"
            labels = [f"{r['embedding']}/{r['model']}@{r['dim']}"
                      for r in accuracy_rows]
            svg.bar_chart(os.path.join(plots_dir, "accuracy_bars.svg"),
                          labels, [r[metric] for r in accuracy_rows],
                          title=f"held-out {metric}", ylabel=metric)
    return report


def run_engineer(cfg: dict) -> dict:
    """Engineer saturating labels, export the dataset, evaluate models."""
    x, _, meta = load_inputs(cfg)
    n_points = x.shape[0]
    scheme = cfg["embedding"]
    spec = make_embedding_spec(scheme, x.shape[1], cfg["seed"])
    threads = resolve_threads(cfg.get("threads"))
    features, states = embed_all(x, spec, threads=threads)
    provenance = {"data": _jsonable(meta), "seed": cfg["seed"],
                  "embedding": scheme}
    refs = quantum_grams(x, spec, cfg["kernels"], features, states,
                         cfg.get("pq_gamma_factor") or 1.0, provenance)
    ref_name = cfg.get("reference") or "pq"
    if ref_name not in refs:
        raise InvalidInput(f"reference kernel {ref_name!r} not in --kernels")
    k_ref = refs[ref_name]
    suite = classical_suite(x)
    adversary = eng.select_adversary(k_ref, suite)
    labels = eng.engineer_labels(
        adversary, k_ref,
        lambda_grid=cfg.get("lambda_grid") or geo.LAMBDA_GRID,
        s_tra_cap=cfg.get("s_tra_cap") or eng.S_TRA_CAP,
        mode=cfg.get("mode") or "sign_noise",
        noise_p=cfg.get("noise_p", 0.1) if cfg.get("noise_p") is not None else 0.1,
        noise_seed=cfg["seed"] + SEED_NOISE,
    )
    s_q = geo.model_complexity(k_ref, labels.y_real, 0.0)
    s_c_reg = geo.model_complexity(adversary, labels.y_real, labels.lam_used)

    n_train = cfg.get("n_train") or int(round(0.75 * n_points))
    if not 0 < n_train < n_points:
        raise InvalidInput(f"n_train {n_train} outside 1..{n_points - 1}")
    train, test = split_indices(n_points, n_train, cfg["seed"])

    y_class = labels.y_class.astype(np.float64)
    model_rows = []
    for name, gram in refs.items():
        res = fit_eval_split(gram.values, y_class, train, test,
                             cfg.get("lambda_grid") or geo.LAMBDA_GRID,
                             cfg["seed"], "classification")
        model_rows.append({
            "model": {"pq": "projected_kernel", "fidelity": "fidelity_kernel",
                      "pq-linear": "projected_linear_kernel"}[name],
            "accuracy": res["accuracy"], "lambda": res["lambda"],
        })

    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    ds = dat.Dataset(x=x, y=y_class, meta={
        "source": "engineered",
        "base": _jsonable(meta),
        "embedding": scheme,
        "reference": k_ref.label(),
        "adversary": adversary.label(),
        "lambda_used": labels.lam_used,
        "g_gen": labels.g_gen_achieved,
        "s_q": s_q,
        "s_c_regularized": s_c_reg,
        "mode": labels.mode,
        "noise_seed": labels.noise_seed,
        "cap_satisfied": labels.cap_satisfied,
        "seeds": {"seed": cfg["seed"], "noise": cfg["seed"] + SEED_NOISE,
                  "split": cfg["seed"] + SEED_SPLIT},
        "split": {"train": [int(i) for i in train],
                  "test": [int(i) for i in test]},
    })
    csv_path = os.path.join(out_dir, "engineered.csv")
    digest = dat.save_dataset(
        csv_path, ds,
        extra_columns={"y_real": labels.y_real, "y_class": y_class},
    )
    no_separation = labels.g_gen_achieved <= 1.0 + 1e-9
    report = {
        "config": cfg,
        "data": meta,
        "dataset_sha256": digest,
        "achieved": {
            "g_gen": labels.g_gen_achieved,
            "lambda": labels.lam_used,
            "s_q": s_q,
            "s_c_regularized": s_c_reg,
            "s_tra_bound": labels.s_tra_bound,
            "cap_satisfied": labels.cap_satisfied,
            "adversary": adversary.label(),
            "no_separation_possible": no_separation,
        },
        "models": model_rows,
        "split": {"n_train": int(n_train), "n_test": int(n_points - n_train)},
        "files": {"dataset": "engineered.csv",
                  "sidecar": "engineered.csv.meta.json"},
    }
    write_report(out_dir, report)
    return report


def run_learn(cfg: dict) -> dict:
    """Grid-searched kernel ridge on a dataset with a held-out evaluation."""
    x, y, meta = load_inputs(cfg)
    if y is None:
        raise InvalidInput("learn needs labeled data")
    kernel = cfg["kernel"]
    task = cfg.get("task") or "classification"
    n_points = x.shape[0]
    n_train = cfg.get("n_train") or int(round(0.75 * n_points))
    train, test = split_indices(n_points, n_train, cfg["seed"])

    if kernel in ("pq", "fidelity"):
        spec = make_embedding_spec(cfg["embedding"], x.shape[1], cfg["seed"])
        threads = resolve_threads(cfg.get("threads"))
        features, states = embed_all(x, spec, threads=threads)
        if kernel == "pq":
            flat = features.reshape(n_points, -1)
            grid = [
                {"gamma": g} for g in kn.gamma_grid(
                    features, features.shape[1],
                    cfg.get("gamma_factors") or kn.LEARNING_RBF_GAMMA_FACTORS)
            ]
            factory = lambda params: (
                lambda ia, ib: kn.rbf_cross(flat[ia], flat[ib], params["gamma"])
            )
        else:
            if states is None:
                amps_of = lambda i: sv.embed(x[i], spec)
                full = kn.fidelity_gram_blocks(n_points, amps_of).values
            else:
                full = kn.fidelity_cross(states, states)
            grid = [{}]
            factory = lambda params: (lambda ia, ib: full[np.ix_(ia, ib)])
    elif kernel == "linear":
        grid = [{}]
        factory = lambda params: (lambda ia, ib: kn.linear_cross(x[ia], x[ib]))
    elif kernel == "rbf":
        grid = [
            {"gamma": g} for g in kn.gamma_grid(
                x, x.shape[1],
                cfg.get("gamma_factors") or kn.LEARNING_RBF_GAMMA_FACTORS)
        ]
        factory = lambda params: (
            lambda ia, ib: kn.rbf_cross(x[ia], x[ib], params["gamma"])
        )
    else:
        raise InvalidInput(f"unknown kernel {kernel!r}")

    result = learn.grid_search(
        x[train], y[train],
        lambda params: (
            lambda ia, ib: factory(params)(train[ia], train[ib])
        ),
        grid, c_grid=cfg.get("c_grid") or learn.C_GRID, folds=cfg.get("folds") or 5,
        seed=cfg["seed"], task=task,
    )
    kfn = factory(result.params)
    k_train = kfn(train, train)
    alpha, used_pinv = learn._fit_alpha(k_train, y[train], result.lam)
    preds = np.clip(kfn(train, test).T @ alpha, -1.0, 1.0)
    metrics = learn.evaluate(preds, y[test], task)
    model = learn.TrainedModel(
        alpha=alpha, lam=result.lam, kernel_id=kernel, params=result.params,
        data_ref={"source": _jsonable(meta), "train_indices": [int(i) for i in train]},
        used_pinv=used_pinv,
    )
    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    learn.save_model(os.path.join(out_dir, "model.json"), model)
    report = {
        "config": cfg,
        "data": meta,
        "grid_search": {"params": result.params, "C": result.c,
                        "lambda": result.lam, "cv_score": result.cv_score},
        "test": metrics,
        "split": {"n_train": int(n_train), "n_test": int(n_points - n_train)},
        "files": {"model": "model.json"},
    }
    write_report(out_dir, report)
    return report


def run_dlog_demo(cfg: dict) -> dict:
    """Discrete-log task: quadratic kernel on the projected feature versus
    a one-hot kernel on the raw input."""
    p, g, s = cfg["p"], cfg["g"], cfg["s"]
    ds, z = dat.dlog_full_group(p, g, s)
    n_total = ds.n_points
    n_train = cfg.get("n_train") or 50
    if not 0 < n_train < n_total:
        raise InvalidInput(f"n_train {n_train} outside 1..{n_total - 1}")
    train, test = split_indices(n_total, n_train, cfg["seed"])

    quad_full = kn.dlog_quadratic_cross(z, z)
    alpha, _ = learn._fit_alpha(quad_full[np.ix_(train, train)], ds.y[train], 0.0)
    quad_preds = np.clip(quad_full[np.ix_(train, test)].T @ alpha, -1.0, 1.0)
    quad_acc = learn.evaluate(quad_preds, ds.y[test], "classification")["accuracy"]

    delta_full = kn.delta_cross(ds.x, ds.x)
    alpha_d, _ = learn._fit_alpha(delta_full[np.ix_(train, train)], ds.y[train], 0.0)
    raw = delta_full[np.ix_(train, test)].T @ alpha_d
    delta_preds = np.clip(raw, -1.0, 1.0)
    delta_acc = learn.evaluate(delta_preds, ds.y[test], "classification")["accuracy"]

    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    dat.save_dataset(os.path.join(out_dir, "dlog.csv"), ds,
                     extra_columns={"z": z})
    report = {
        "config": cfg,
        "group": {"p": p, "g": g, "s": s, "order": p - 1},
        "split": {"n_train": int(n_train), "n_test": int(n_total - n_train)},
        "quadratic_kernel": {"accuracy": quad_acc},
        "one_hot_kernel": {
            "accuracy": delta_acc,
            "max_abs_unseen_prediction": float(np.max(np.abs(raw))),
        },
        "files": {"dataset": "dlog.csv"},
    }
    write_report(out_dir, report)
    return report


def run_appendix_g_demo(cfg: dict) -> dict:
    """Basis-encoding failure demo: fidelity-kernel regression collapses on
    unseen strings while a linear model classifies the last coordinate."""
    n, n_points = cfg["dim"], cfg["n_points"]
    if n > 16:
        raise InvalidInput("demo capped at n = 16 (full-domain enumeration)")
    ds = dat.gen_appendix_g_dataset(n, n_points, cfg["seed"])
    train_bits = (ds.x == np.pi).astype(np.int64)
    states = [sv.embed_basis(b) for b in train_bits]
    k_fid = kn.fidelity_gram(states)
    model = learn.fit(k_fid, ds.y, 0.0)

    # enumerate the full domain {0, pi}^n
    all_bits = ((np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1)
    domain_y = np.where(all_bits[:, -1] == 0, 1.0, -1.0)
    all_states = [sv.embed_basis(b) for b in all_bits]
    cross = kn.fidelity_cross(states, all_states)
    fid_preds = learn.predict(model, cross)
    fid_mae = learn.evaluate(fid_preds, domain_y, "regression")["mae"]

    x_train = ds.x
    lin_full = kn.linear_cross(x_train, x_train)
    alpha, _ = learn._fit_alpha(lin_full, ds.y, 0.0)
    lin_preds = np.clip(
        kn.linear_cross(x_train, np.pi * all_bits).T @ alpha, -1.0, 1.0
    )
    lin_acc = learn.evaluate(lin_preds, domain_y, "classification")["accuracy"]

    out_dir = cfg["out"]
    os.makedirs(out_dir, exist_ok=True)
    dat.save_dataset(os.path.join(out_dir, "basis_dataset.csv"), ds)
    report = {
        "config": cfg,
        "fidelity_regression": {
            "mae_full_domain": fid_mae,
            "mae_lower_bound": 1.0 - n_points / 2.0**n,
        },
        "linear_classification": {"accuracy_full_domain": lin_acc},
        "files": {"dataset": "basis_dataset.csv"},
    }
    write_report(out_dir, report)
    return report
