"""RBF-kernel SVM trained by sequential minimal optimization.

The trainer keeps an error cache and picks the second multiplier by the
largest |E_i - E_j| step, falling back to seeded-random sweeps, so results
are deterministic under a fixed seed.  The dual objective and the KKT
conditions are exposed for verification against an independent QP solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ModelMismatchError


def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    """exp(-gamma * ||x - y||^2); equals 1 at x == y."""
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    d = x - y
    return float(np.exp(-gamma * (d @ d)))


def rbf_kernel_matrix(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    sq_a = np.sum(A * A, axis=1)[:, None]
    sq_b = np.sum(B * B, axis=1)[None, :]
    sq = np.maximum(sq_a + sq_b - 2.0 * (A @ B.T), 0.0)
    return np.exp(-gamma * sq)


@dataclass
class SvmModel:
    support_vectors: np.ndarray   # rows of (scaled) features
    coef: np.ndarray              # alpha_i * y_i per support vector
    b: float
    C: float
    gamma: float
    schema_hash: str = ""
    # full training solution, kept for diagnostics; not persisted
    alphas: np.ndarray | None = field(default=None, repr=False)
    labels: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.support_vectors.shape[1]


def dual_objective(alphas: np.ndarray, y: np.ndarray, K: np.ndarray) -> float:
    """W(alpha) = sum(alpha) - 1/2 (alpha*y)' K (alpha*y), to be maximized."""
    ay = alphas * y
    return float(alphas.sum() - 0.5 * ay @ K @ ay)


def max_kkt_violation(K: np.ndarray, y: np.ndarray, alphas: np.ndarray,
                      b: float, C: float) -> float:
    """Largest violation of the optimality conditions, 0 when optimal."""
    f = K @ (alphas * y) + b
    margins = y * f
    viol = np.zeros_like(margins)
    at_zero = alphas <= 0
    at_c = alphas >= C
    inside = ~at_zero & ~at_c
    viol[at_zero] = np.maximum(0.0, 1.0 - margins[at_zero])
    viol[at_c] = np.maximum(0.0, margins[at_c] - 1.0)
    viol[inside] = np.abs(margins[inside] - 1.0)
    return float(viol.max(initial=0.0))


def train_smo(X: np.ndarray, y: np.ndarray, C: float, gamma: float,
              tol: float = 1e-3, max_passes: int = 5, seed: int = 0,
              max_sweeps: int = 2000, step_eps: float = 1e-12) -> SvmModel:
    """Solve the soft-margin dual for +-1 labels.

    Terminates when ``max_passes`` consecutive full sweeps change nothing
    (every point then satisfies KKT within ``tol``) or at ``max_sweeps``.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be n x d with one label per row")
    if not np.all(np.isfinite(X)):
        raise DataError("non-finite feature value in training matrix")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +-1")
    if len(np.unique(y)) < 2:
        raise DataError("training data contains a single class")
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")

    n = X.shape[0]
    K = rbf_kernel_matrix(X, X, gamma)
    alphas = np.zeros(n)
    b = 0.0
    f = np.full(n, b)  # decision values; E = f - y
    rng = np.random.default_rng(seed)

    def take_step(i: int, j: int) -> bool:
        nonlocal b
        if i == j:
            return False
        ei = f[i] - y[i]
        ej = f[j] - y[j]
        s = y[i] * y[j]
        if s < 0:
            lo = max(0.0, alphas[j] - alphas[i])
            hi = min(C, C + alphas[j] - alphas[i])
        else:
            lo = max(0.0, alphas[i] + alphas[j] - C)
            hi = min(C, alphas[i] + alphas[j])
        if hi - lo < step_eps:
            return False
        eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
        if eta < 0.0:
            aj = alphas[j] - y[j] * (ei - ej) / eta
            aj = min(hi, max(lo, aj))
        else:
            # flat direction: evaluate the dual at both ends of the segment
            aj = _best_endpoint(i, j, lo, hi, alphas, y, K, step_eps)
            if aj is None:
                return False
        if abs(aj - alphas[j]) < step_eps * (aj + alphas[j] + step_eps):
            return False
        ai = alphas[i] + s * (alphas[j] - aj)
        di = y[i] * (ai - alphas[i])
        dj = y[j] * (aj - alphas[j])
        b1 = b - ei - di * K[i, i] - dj * K[i, j]
        b2 = b - ej - di * K[i, j] - dj * K[j, j]
        if 0.0 < ai < C:
            new_b = b1
        elif 0.0 < aj < C:
            new_b = b2
        else:
            new_b = 0.5 * (b1 + b2)
        f[:] += di * K[:, i] + dj * K[:, j] + (new_b - b)
        alphas[i] = ai
        alphas[j] = aj
        b = new_b
        return True

    def examine(i: int) -> bool:
        r = (f[i] - y[i]) * y[i]
        if not ((r < -tol and alphas[i] < C) or (r > tol and alphas[i] > 0)):
            return False
        e = f - y
        j = int(np.argmax(np.abs(e - e[i])))
        if take_step(i, j):
            return True
        for j in rng.permutation(n):
            if take_step(i, int(j)):
                return True
        return False

    passes = 0
    sweeps = 0
    while passes < max_passes and sweeps < max_sweeps:
        changed = sum(examine(i) for i in range(n))
        sweeps += 1
        passes = passes + 1 if changed == 0 else 0

    sv = alphas > 0
    return SvmModel(
        support_vectors=X[sv].copy(),
        coef=(alphas * y)[sv],
        b=b,
        C=C,
        gamma=gamma,
        alphas=alphas,
        labels=y,
    )


def _best_endpoint(i, j, lo, hi, alphas, y, K, eps):
    s = y[i] * y[j]

    def objective_at(aj):
        trial = alphas.copy()
        trial[i] = alphas[i] + s * (alphas[j] - aj)
        trial[j] = aj
        return dual_objective(trial, y, K)

    w_lo = objective_at(lo)
    w_hi = objective_at(hi)
    if w_lo > w_hi + eps:
        return lo
    if w_hi > w_lo + eps:
        return hi
    return None


def decision_function(model: SvmModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.dim:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs model {model.dim}")
    K = rbf_kernel_matrix(X, model.support_vectors, model.gamma)
    return K @ model.coef + model.b


def predict(model: SvmModel, x: np.ndarray) -> tuple[int, float]:
    """(label, decision value); a decision value of exactly 0 maps to +1."""
    value = float(decision_function(model, np.atleast_2d(x))[0])
    return (1 if value >= 0.0 else -1), value


def predict_labels(model: SvmModel, X: np.ndarray) -> np.ndarray:
    values = decision_function(model, X)
    return np.where(values >= 0.0, 1, -1)


@dataclass(frozen=True)
class GridSearchSpec:
    c_grid: tuple[float, ...] = (0.01, 0.1, 1.0, 10.0, 100.0)
    gamma_grid: tuple[float, ...] = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
    folds: int = 5
    seed: int = 0

    def validate(self) -> None:
        if not self.c_grid or not self.gamma_grid:
            raise ValueError("grids must be non-empty")
        if self.folds < 2:
            raise ValueError(f"folds must be >= 2, got {self.folds}")


def stratified_folds(y: np.ndarray, folds: int, seed: int) -> list[np.ndarray]:
    """Round-robin per-class assignment; every fold must contain both classes."""
    rng = np.random.default_rng(seed)
    assignment = np.zeros(len(y), dtype=np.intp)
    for cls in (-1, 1):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        for pos, i in enumerate(idx):
            assignment[i] = pos % folds
    out = [np.flatnonzero(assignment == k) for k in range(folds)]
    for k, fold in enumerate(out):
        if len(np.unique(y[fold])) < 2:
            raise DataError(f"fold {k} is degenerate (missing a class); use fewer folds")
    return out


def grid_search_cv(X: np.ndarray, y: np.ndarray, spec: GridSearchSpec = GridSearchSpec(),
                   tol: float = 1e-3, max_passes: int = 5,
                   threads: int = 1) -> tuple[float, float, list[tuple[float, float, float]]]:
    """Stratified k-fold accuracy for every grid cell.

    Ties prefer the smaller C, then the smaller gamma.  Returns
    (best_C, best_gamma, [(C, gamma, accuracy), ...]).
    """
    spec.validate()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] < spec.folds:
        raise DataError(f"need at least {spec.folds} rows for {spec.folds}-fold CV")
    folds = stratified_folds(y, spec.folds, spec.seed)
    cells = [(c, g) for c in sorted(spec.c_grid) for g in sorted(spec.gamma_grid)]

    def evaluate_cell(cell_index: int) -> float:
        c, g = cells[cell_index]
        accs = []
        for k, fold in enumerate(folds):
            train_idx = np.setdiff1d(np.arange(len(y)), fold, assume_unique=False)
            model = train_smo(X[train_idx], y[train_idx], C=c, gamma=g, tol=tol,
                              max_passes=max_passes,
                              seed=spec.seed + 7919 * cell_index + k)
            preds = predict_labels(model, X[fold])
            accs.append(float(np.mean(preds == y[fold])))
        return float(np.mean(accs))

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            scores = list(pool.map(evaluate_cell, range(len(cells))))
    else:
        scores = [evaluate_cell(i) for i in range(len(cells))]

    table = [(c, g, acc) for (c, g), acc in zip(cells, scores)]
    best_c, best_gamma, _ = max(table, key=lambda row: (row[2], -row[0], -row[1]))
    return best_c, best_gamma, table


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

_SVM_MAGIC = b"FNSV"
_SVM_VERSION = 1


def save_svm(model: SvmModel, path, meta: dict[str, str] | None = None) -> None:
    import json
    import struct

    with open(path, "wb") as fh:
        fh.write(_SVM_MAGIC)
        schema_raw = model.schema_hash.encode("ascii")
        meta_raw = json.dumps(meta or {}, sort_keys=True).encode("utf-8")
        fh.write(struct.pack("<Iddd", _SVM_VERSION, model.C, model.gamma, model.b))
        fh.write(struct.pack("<H", len(schema_raw)))
        fh.write(schema_raw)
        fh.write(struct.pack("<I", len(meta_raw)))
        fh.write(meta_raw)
        n, d = model.support_vectors.shape
        fh.write(struct.pack("<II", n, d))
        fh.write(np.ascontiguousarray(model.coef, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.support_vectors, dtype="<f8").tobytes())


def load_svm(path) -> tuple[SvmModel, dict[str, str]]:
    import json
    import struct

    with open(path, "rb") as fh:
        if fh.read(4) != _SVM_MAGIC:
            raise ModelMismatchError(f"{path}: not an SVM model file")
        version, C, gamma, b = struct.unpack("<Iddd", fh.read(4 + 24))
        if version != _SVM_VERSION:
            raise ModelMismatchError(f"{path}: unsupported SVM model version {version}")
        (hash_len,) = struct.unpack("<H", fh.read(2))
        schema_hash = fh.read(hash_len).decode("ascii")
        (meta_len,) = struct.unpack("<I", fh.read(4))
        meta = json.loads(fh.read(meta_len).decode("utf-8"))
        n, d = struct.unpack("<II", fh.read(8))
        coef = np.frombuffer(fh.read(n * 8), dtype="<f8").astype(np.float64)
        data = np.frombuffer(fh.read(n * d * 8), dtype="<f8")
        if coef.size != n or data.size != n * d:
            raise DataError(f"{path}: truncated SVM model")
        sv = data.astype(np.float64).reshape(n, d)
    model = SvmModel(support_vectors=sv, coef=coef, b=b, C=C, gamma=gamma,
                     schema_hash=schema_hash)
    return model, meta
