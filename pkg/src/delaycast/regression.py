"""Nearest-neighbor search and the local / global linear regression engines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import DesignMatrix

# Normal-matrix condition estimate above this triggers the ridge fallback.
ILL_CONDITIONED = 1e12


@dataclass(frozen=True)
class LinearModel:
    """Affine fit; `selected` lists the design-column subset when one was chosen."""

    intercept: float
    coefficients: np.ndarray
    selected: tuple[int, ...] | None = None
    ridged: bool = False

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if self.selected is not None:
            X = X[:, list(self.selected)]
        return self.intercept + X @ self.coefficients


@dataclass(frozen=True)
class NeighborSet:
    """Row indices of the k nearest design rows, distances nondecreasing."""

    indices: np.ndarray
    distances: np.ndarray

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=np.int64)
        dist = np.asarray(self.distances, dtype=np.float64)
        if idx.shape != dist.shape or idx.ndim != 1:
            raise ValueError("indices and distances must be matching 1-D arrays")
        if np.any(np.diff(dist) < 0):
            raise ValueError("distances must be nondecreasing")
        if len(set(idx.tolist())) != idx.size:
            raise ValueError("indices must be distinct")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "distances", dist)


def column_scales(X: np.ndarray) -> np.ndarray:
    """Per-column standard deviations for distance scaling; constant columns get 1."""
    scales = np.std(np.asarray(X, dtype=np.float64), axis=0)
    return np.where(scales > 0, scales, 1.0)


def choose_k(n_eff: int, p: int, multiplier: float) -> int:
    """Neighborhood size round(multiplier * sqrt(n)), raised to the p+2 floor."""
    k = int(round(multiplier * np.sqrt(n_eff)))
    return max(k, p + 2)


def _scaled_sq_dists(X: np.ndarray, x0: np.ndarray, scaling: np.ndarray) -> np.ndarray:
    diff = (X - x0) / scaling
    return np.einsum("ij,ij->i", diff, diff)


def _check_query(X: np.ndarray, x0: np.ndarray, k: int, scaling: np.ndarray):
    X = np.asarray(X, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside 1..{n}")
    if scaling is None:
        scaling = np.ones(X.shape[1])
    scaling = np.asarray(scaling, dtype=np.float64)
    if np.any(scaling <= 0):
        raise ValueError("scaling must be strictly positive")
    return X, x0, k, scaling


def knn_brute(X: np.ndarray, x0: np.ndarray, k: int, scaling: np.ndarray | None = None) -> NeighborSet:
    """Reference kNN: sort every row by (scaled distance, row index), take the first k."""
    X, x0, k, scaling = _check_query(X, x0, k, scaling)
    d2 = _scaled_sq_dists(X, x0, scaling)
    order = np.lexsort((np.arange(X.shape[0]), d2))[:k]
    return NeighborSet(order, np.sqrt(d2[order]))


def knn_query(X: np.ndarray, x0: np.ndarray, k: int, scaling: np.ndarray | None = None) -> NeighborSet:
    """The k rows nearest to x0 in scaled Euclidean distance, ties to lower index.

    Partition-based selection; results are exactly those of the brute-force
    scan (knn_brute), including tie cases.
    """
    X, x0, k, scaling = _check_query(X, x0, k, scaling)
    d2 = _scaled_sq_dists(X, x0, scaling)
    picked = _select_k(d2, k)
    order = picked[np.lexsort((picked, d2[picked]))]
    return NeighborSet(order, np.sqrt(d2[order]))


def _select_k(d2: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k smallest values, filling ties at the boundary by lower index."""
    n = d2.shape[0]
    if k == n:
        return np.arange(n)
    kth = np.partition(d2, k - 1)[k - 1]
    below = np.flatnonzero(d2 < kth)
    at = np.flatnonzero(d2 == kth)
    need = k - below.size
    return np.concatenate([below, at[:need]])


def _solve_affine(B: np.ndarray, y: np.ndarray, ridge_eps: float) -> tuple[np.ndarray, bool]:
    """Least-squares coefficients for augmented design B = [1 | X].

    Falls back to ridge-regularized normal equations when the normal matrix
    condition estimate exceeds ILL_CONDITIONED; raises if the system stays
    degenerate.
    """
    A = B.T @ B
    cond = np.linalg.cond(A)
    if np.isfinite(cond) and cond <= ILL_CONDITIONED:
        beta, *_ = np.linalg.lstsq(B, y, rcond=None)
        return beta, False
    if ridge_eps > 0:
        ridge = ridge_eps * np.trace(A) / A.shape[0]
        A = A + ridge * np.eye(A.shape[0])
        try:
            beta = np.linalg.solve(A, B.T @ y)
        except np.linalg.LinAlgError:
            beta = None
        if beta is not None and np.all(np.isfinite(beta)):
            return beta, True
    raise ValueError("degenerate local design even after ridge regularization")


class LocalLinearEngine:
    """Reusable kNN local-linear predictor over one design matrix.

    Distance scaling defaults to the design's own column standard deviations
    (the training block), so mixed-unit coordinates compare sensibly.
    """

    def __init__(
        self,
        design: DesignMatrix,
        k: int,
        ridge_eps: float = 1e-8,
        scaling: np.ndarray | None = None,
    ):
        p = design.p
        if k < p + 2:
            raise ValueError(f"k={k} below the overdetermination floor p+2={p + 2}")
        if k > design.n_eff:
            raise ValueError(f"k={k} exceeds n_eff={design.n_eff}")
        if ridge_eps < 0:
            raise ValueError("ridge_eps must be >= 0")
        self.design = design
        self.k = k
        self.ridge_eps = ridge_eps
        self.scaling = column_scales(design.X) if scaling is None else np.asarray(scaling)

    def predict(self, x0: np.ndarray) -> tuple[float, float]:
        """Fitted value at x0 and the residual at the single nearest neighbor."""
        x0 = np.asarray(x0, dtype=np.float64).ravel()
        nn = knn_query(self.design.X, x0, self.k, self.scaling)
        Xk = self.design.X[nn.indices]
        yk = self.design.y[nn.indices]
        B = np.column_stack([np.ones(self.k), Xk])
        beta, _ = _solve_affine(B, yk, self.ridge_eps)
        prediction = float(beta[0] + x0 @ beta[1:])
        nn_residual = float(yk[0] - (beta[0] + Xk[0] @ beta[1:]))
        return prediction, nn_residual

    def predict_many(self, X_query: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Predictions and nearest-neighbor residuals for each query row."""
        X_query = np.atleast_2d(np.asarray(X_query, dtype=np.float64))
        preds = np.empty(X_query.shape[0])
        residuals = np.empty(X_query.shape[0])
        for i, x0 in enumerate(X_query):
            preds[i], residuals[i] = self.predict(x0)
        return preds, residuals


def local_linear_predict(
    design: DesignMatrix, x0: np.ndarray, k: int, ridge_eps: float = 1e-8
) -> tuple[float, float]:
    """OLS on the k nearest rows, evaluated at x0.

    Returns the prediction and the residual y - fit at the single nearest
    neighbor row (the seed of the empirical predictive distribution).
    """
    return LocalLinearEngine(design, k, ridge_eps).predict(x0)


def global_linear_fit(design: DesignMatrix) -> LinearModel:
    """OLS with intercept over every design row; ridge fallback is flagged."""
    n, p = design.n_eff, design.p
    if n < p + 2:
        raise ValueError(f"need n_eff >= p+2 rows, have {n} for p={p}")
    B = np.column_stack([np.ones(n), design.X])
    rank = np.linalg.matrix_rank(B)
    if rank < p + 1:
        beta, ridged = _solve_affine(B, design.y, ridge_eps=1e-8)
        ridged = True
    else:
        beta, *_ = np.linalg.lstsq(B, design.y, rcond=None)
        ridged = False
    return LinearModel(float(beta[0]), beta[1:].copy(), ridged=ridged)


def forward_select_fit(design: DesignMatrix, max_terms: int) -> LinearModel:
    """Greedy forward stepwise selection, stopping when adjusted R-squared drops.

    At each step the coordinate most correlated (in absolute value) with the
    current residual joins the model; the final model is OLS on the selected
    subset.
    """
    n, p = design.n_eff, design.p
    if not 1 <= max_terms <= p:
        raise ValueError(f"max_terms={max_terms} outside 1..{p}")
    if n < p + 2:
        raise ValueError(f"need n_eff >= p+2 rows, have {n} for p={p}")

    y = design.y
    selected: list[int] = []
    residual = y - y.mean()
    best_adj_r2 = -np.inf
    best: tuple[list[int], np.ndarray] | None = None
    total_ss = float(np.sum((y - y.mean()) ** 2))
    if total_ss == 0:
        return LinearModel(float(y.mean()), np.zeros(0), selected=())

    while len(selected) < max_terms:
        scores = np.zeros(p)
        for j in range(p):
            if j in selected:
                continue
            col = design.X[:, j]
            sd = col.std()
            if sd == 0 or residual.std() == 0:
                continue
            scores[j] = abs(np.corrcoef(col, residual)[0, 1])
        j_new = int(np.argmax(scores))
        if scores[j_new] == 0:
            break
        candidate = selected + [j_new]
        B = np.column_stack([np.ones(n), design.X[:, candidate]])
        beta, *_ = np.linalg.lstsq(B, y, rcond=None)
        fitted = B @ beta
        ss_res = float(np.sum((y - fitted) ** 2))
        q = len(candidate)
        adj_r2 = 1.0 - (ss_res / total_ss) * (n - 1) / (n - q - 1)
        if adj_r2 < best_adj_r2:
            break
        best_adj_r2 = adj_r2
        best = (candidate, beta)
        selected = candidate
        residual = y - fitted

    if best is None:
        return LinearModel(float(y.mean()), np.zeros(0), selected=())
    chosen, beta = best
    return LinearModel(float(beta[0]), beta[1:].copy(), selected=tuple(chosen))
