"""Dataset ingestion and generation.

IDX image loading, PCA projection with per-dimension standardization,
seeded subsampling, QNN-labeled datasets, the basis-encoding adversarial
dataset, and the discrete-log classification dataset (brute-force log
table at desk scale).
"""

from __future__ import annotations

import csv
import gzip
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateDimension,
    FormatError,
    InsufficientData,
    InvalidGenerator,
    InvalidInput,
)
from .statevec import EmbeddingSpec, QnnSpec, embed, qnn_expectation

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

DLOG_MAX_PRIME = 1_000_000


@dataclass
class Dataset:
    """Inputs X (N x n), targets y, and regeneration metadata."""

    x: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.x.ndim != 2 or self.y.ndim != 1 or self.x.shape[0] != self.y.shape[0]:
            raise InvalidInput(
                f"X has shape {self.x.shape}, y has shape {self.y.shape}"
            )
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise InvalidInput("dataset entries must be finite")

    @property
    def n_points(self) -> int:
        return self.x.shape[0]

    @property
    def dim(self) -> int:
        return self.x.shape[1]


# ---------------------------------------------------------------------------
# IDX (fashion-MNIST style) ingestion


def _open_maybe_gzip(path):
    with open(path, "rb") as fh:
        head = fh.read(2)
    if head == b"\x1f\x8b":
        return gzip.open(path, "rb")
    return open(path, "rb")


def _read_idx(path, expected_magic: int) -> np.ndarray:
    with _open_maybe_gzip(path) as fh:
        header = fh.read(4)
        if len(header) != 4:
            raise FormatError(f"{path}: truncated magic")
        magic = int.from_bytes(header, "big")
        if magic != expected_magic:
            raise FormatError(
                f"{path}: magic 0x{magic:08x}, expected 0x{expected_magic:08x}"
            )
        ndim = magic & 0xFF
        dims = []
        for _ in range(ndim):
            raw = fh.read(4)
            if len(raw) != 4:
                raise FormatError(f"{path}: truncated dimension header")
            dims.append(int.from_bytes(raw, "big"))
        count = int(np.prod(dims))
        payload = fh.read(count)
        if len(payload) != count:
            raise FormatError(
                f"{path}: payload has {len(payload)} bytes, expected {count}"
            )
    return np.frombuffer(payload, dtype=np.uint8).reshape(dims)


def load_fashion_mnist(path) -> tuple[np.ndarray, np.ndarray]:
    """Load an IDX image/label pair (gzip or raw).

    ``path`` may be a directory holding train-images-idx3-ubyte[.gz] and
    train-labels-idx1-ubyte[.gz], or the images file itself (the labels
    file is inferred by name). Returns (images (N, 28, 28) uint8, labels).
    """
    path = os.fspath(path)
    if os.path.isdir(path):
        images_path = None
        for stem in ("train-images-idx3-ubyte", "t10k-images-idx3-ubyte"):
            for suffix in ("", ".gz"):
                cand = os.path.join(path, stem + suffix)
                if os.path.exists(cand):
                    images_path = cand
                    break
            if images_path:
                break
        if images_path is None:
            raise FormatError(f"{path}: no images-idx3-ubyte file found")
    else:
        images_path = path
    labels_path = images_path.replace("images-idx3", "labels-idx1")
    if labels_path == images_path or not os.path.exists(labels_path):
        raise FormatError(f"cannot locate labels file for {images_path}")
    images = _read_idx(images_path, IDX_IMAGES_MAGIC)
    labels = _read_idx(labels_path, IDX_LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise FormatError(
            f"{images.shape[0]} images but {labels.shape[0]} labels"
        )
    return images, labels


def filter_classes(images: np.ndarray, labels: np.ndarray,
                   classes=(3, 6)) -> tuple[np.ndarray, np.ndarray]:
    """Keep two classes and map them to labels -1 (first) and +1 (second)."""
    a, b = classes
    mask = (labels == a) | (labels == b)
    y = np.where(labels[mask] == b, 1.0, -1.0)
    return images[mask], y


# ---------------------------------------------------------------------------
# Preprocessing


def pca_standardize(x_raw: np.ndarray, n_components: int):
    """Project onto leading covariance eigenvectors, then standardize.

    Component signs are fixed by making each component's largest-magnitude
    loading positive. Output columns have mean 0 and population std 1.
    Returns (X, info) with the transform recorded in ``info``.
    """
    x_raw = np.asarray(x_raw, dtype=np.float64)
    if x_raw.ndim != 2:
        x_raw = x_raw.reshape(x_raw.shape[0], -1)
    n, d = x_raw.shape
    if n_components > min(n, d):
        raise InvalidInput(
            f"cannot extract {n_components} components from {n}x{d} data"
        )
    mean = x_raw.mean(axis=0)
    centered = x_raw - mean
    cov = (centered.T @ centered) / n
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    comps = vecs[:, order[:n_components]]
    for k in range(n_components):
        lead = int(np.argmax(np.abs(comps[:, k])))
        if comps[lead, k] < 0:
            comps[:, k] = -comps[:, k]
    proj = centered @ comps
    std = proj.std(axis=0)
    if np.any(std < 1e-12):
        bad = int(np.argmin(std))
        raise DegenerateDimension(f"projected dimension {bad} has zero variance")
    out = (proj - proj.mean(axis=0)) / std
    info = {
        "mean": mean,
        "components": comps,
        "proj_mean": proj.mean(axis=0),
        "proj_std": std,
        "eigenvalues": vals,
    }
    return out, info


def subsample(dataset: Dataset, n: int, seed: int) -> Dataset:
    """Seeded subsample without replacement, class-balanced for binary labels."""
    total = dataset.n_points
    if n > total:
        raise InsufficientData(f"asked for {n} of {total} points")
    if n == total:
        return Dataset(
            x=dataset.x.copy(), y=dataset.y.copy(),
            meta={**dataset.meta, "subsample": {"n": n, "seed": seed}},
        )
    rng = np.random.default_rng(seed)
    labels = np.unique(dataset.y)
    if labels.size == 2:
        idx_a = np.flatnonzero(dataset.y == labels[0])
        idx_b = np.flatnonzero(dataset.y == labels[1])
        take_a = min((n + 1) // 2, idx_a.size)
        take_b = min(n - take_a, idx_b.size)
        take_a = n - take_b  # refill if the second class ran short
        if take_a > idx_a.size:
            raise InsufficientData("not enough points to balance classes")
        chosen = np.concatenate([
            rng.choice(idx_a, size=take_a, replace=False),
            rng.choice(idx_b, size=take_b, replace=False),
        ])
        chosen = chosen[rng.permutation(chosen.size)]
    else:
        chosen = rng.choice(total, size=n, replace=False)
    return Dataset(
        x=dataset.x[chosen], y=dataset.y[chosen],
        meta={**dataset.meta, "subsample": {"n": n, "seed": seed}},
    )


# ---------------------------------------------------------------------------
# Generators


def gen_quantum_dataset(x: np.ndarray, embedding: EmbeddingSpec,
                        qnn_seed: int, trotter_steps: int = 10,
                        time: float = 10.0) -> Dataset:
    """Label inputs with <Z_0> of a random-coupling QNN applied to their
    embeddings; the metadata allows bit-identical regeneration."""
    x = np.asarray(x, dtype=np.float64)
    qnn = QnnSpec.random(register=embedding.register, seed=qnn_seed,
                         trotter_steps=trotter_steps, time=time)
    y = np.array([qnn_expectation(embed(row, embedding), qnn) for row in x])
    meta = {
        "source": "qnn",
        "embedding": {
            "scheme": embedding.scheme,
            "n": embedding.n,
            "e3_trotter_steps": embedding.e3_trotter_steps,
            "e3_time": embedding.e3_time,
            "e3_haar_seed": embedding.e3_haar_seed,
        },
        "qnn": {"seed": qnn_seed, "trotter_steps": trotter_steps, "time": time},
    }
    return Dataset(x=x, y=y, meta=meta)


def gen_appendix_g_dataset(n: int, n_points: int, seed: int) -> Dataset:
    """Adversarial dataset for the fidelity kernel.

    Inputs are uniform over {0, pi}^n (independent draws, duplicates
    allowed) and embed to computational basis states; the label is the
    Z expectation on the last qubit: +1 iff x_n = 0.
    """
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(n_points, n))
    x = np.pi * bits
    y = np.where(bits[:, -1] == 0, 1.0, -1.0)
    return Dataset(x=x, y=y, meta={"source": "basis_parity", "n": n, "seed": seed})


def discrete_log_table(p: int, g: int) -> np.ndarray:
    """table[x] = log_g(x) in 1..p-1 for x in Z_p^*, by brute-force powers.

    Raises InvalidGenerator unless g generates the full group (order p-1).
    """
    if p > DLOG_MAX_PRIME:
        raise InvalidInput(f"prime {p} exceeds brute-force cap {DLOG_MAX_PRIME}")
    table = np.zeros(p, dtype=np.int64)
    value = 1
    for e in range(1, p):
        value = (value * g) % p
        if value == 1 and e < p - 1:
            raise InvalidGenerator(f"{g} has order {e} mod {p}, not {p - 1}")
        if table[value] == 0:
            table[value] = e
    if value != 1:
        raise InvalidGenerator(f"{g} does not generate Z_{p}^*")
    return table


def dlog_interval_members(p: int, s: int) -> np.ndarray:
    """Log values labeled +1: the wrap-around interval [s, s + (p-3)/2]
    inside {1, ..., p-1} (arithmetic mod p-1)."""
    length = (p - 3) // 2 + 1
    return (s - 1 + np.arange(length)) % (p - 1) + 1


def gen_dlog_dataset(p: int, g: int, s: int, n_points: int,
                     seed: int) -> tuple[Dataset, np.ndarray]:
    """Discrete-log classification data: y = +1 iff log_g(x) lies in the
    half-group interval starting at s.

    Returns (dataset, z) where z = log_g(x)/p in [0, 1) is the projected
    feature for the quadratic kernel.
    """
    table = discrete_log_table(p, g)
    rng = np.random.default_rng(seed)
    xs = rng.integers(1, p, size=n_points)
    logs = table[xs]
    members = set(int(v) for v in dlog_interval_members(p, s))
    y = np.array([1.0 if int(v) in members else -1.0 for v in logs])
    z = logs / p
    ds = Dataset(
        x=xs[:, None].astype(np.float64), y=y,
        meta={"source": "dlog", "p": p, "g": g, "s": s, "seed": seed},
    )
    return ds, z


def dlog_full_group(p: int, g: int, s: int) -> tuple[Dataset, np.ndarray]:
    """The full Z_p^* as a dataset (one row per group element, ascending x)."""
    table = discrete_log_table(p, g)
    xs = np.arange(1, p)
    logs = table[xs]
    members = set(int(v) for v in dlog_interval_members(p, s))
    y = np.array([1.0 if int(v) in members else -1.0 for v in logs])
    ds = Dataset(
        x=xs[:, None].astype(np.float64), y=y,
        meta={"source": "dlog_full", "p": p, "g": g, "s": s},
    )
    return ds, logs / p


# ---------------------------------------------------------------------------
# CSV persistence (header x_0..x_{n-1},y plus JSON sidecar)


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def save_dataset(path, dataset: Dataset, extra_columns: dict | None = None) -> str:
    """Write CSV (+ sidecar <path>.meta.json) and return the CSV's sha256.

    ``extra_columns`` maps column name -> vector for additional outputs
    (e.g. real-valued engineered targets next to class labels).
    """
    extra = extra_columns or {}
    n = dataset.dim
    header = [f"x_{j}" for j in range(n)] + ["y"] + list(extra)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(dataset.n_points):
            row = [repr(float(v)) for v in dataset.x[i]]
            row.append(repr(float(dataset.y[i])))
            row.extend(repr(float(extra[c][i])) for c in extra)
            w.writerow(row)
    digest = file_sha256(path)
    sidecar = {
        "meta": _jsonable(dataset.meta),
        "sha256": digest,
        "columns": header,
        "n_points": dataset.n_points,
        "dim": n,
    }
    with open(f"{path}.meta.json", "w") as fh:
        json.dump(sidecar, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return digest


def load_dataset(path) -> tuple[Dataset, dict]:
    """Read a dataset CSV and its sidecar; extra columns land in the meta."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0] or not rows[0][0].startswith("x_"):
        raise FormatError(f"{path}: not a dataset CSV")
    header = rows[0]
    n = sum(1 for c in header if c.startswith("x_"))
    try:
        body = np.array([[float(v) for v in row] for row in rows[1:]])
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric cell ({exc})") from exc
    x = body[:, :n]
    y = body[:, n]
    extras = {c: body[:, n + 1 + j] for j, c in enumerate(header[n + 1 :])}
    sidecar_path = f"{path}.meta.json"
    sidecar = {}
    if os.path.exists(sidecar_path):
        with open(sidecar_path) as fh:
            sidecar = json.load(fh)
    ds = Dataset(x=x, y=y, meta=sidecar.get("meta", {}))
    sidecar["extra_columns"] = extras
    return ds, sidecar


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj
