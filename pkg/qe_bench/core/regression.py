"""
Elastic-net linear regression by cyclic coordinate descent.

Objective (scikit-learn convention, so alpha=1.0 / l1_ratio=0.5 mean the same):

    (1 / (2n)) * ||y - Xw - b||^2 + alpha * l1_ratio * ||w||_1
        + (alpha / 2) * (1 - l1_ratio) * ||w||^2

The intercept is unpenalized and absorbed by centering. With standardize=True
the penalty applies to coefficients of unit-variance features and the fitted
weights are unwound to original units afterwards.
"""
import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from qe_bench.core.constants import DEFAULT_ALPHA, DEFAULT_L1_RATIO, DEFAULT_MAX_ITER, DEFAULT_TOL
from qe_bench.core.errors import RegressionError
from qe_bench.utils.logger import get_project_logger

logger = get_project_logger(__name__)


@dataclass(frozen=True)
class ElasticNetSpec:
    alpha: float = DEFAULT_ALPHA
    l1_ratio: float = DEFAULT_L1_RATIO
    max_iter: int = DEFAULT_MAX_ITER
    tol: float = DEFAULT_TOL
    standardize: bool = True

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise RegressionError(f"alpha must be a finite non-negative number, got {self.alpha!r}")
        if not (0.0 <= self.l1_ratio <= 1.0):
            raise RegressionError(f"l1_ratio must lie in [0, 1], got {self.l1_ratio!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise RegressionError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if not (math.isfinite(self.tol) and self.tol > 0):
            raise RegressionError(f"tol must be positive, got {self.tol!r}")


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    intercept: float
    feature_means: np.ndarray
    feature_scales: np.ndarray
    n_iter: int
    converged: bool
    # Coefficients in the (centered, scaled) space the penalty acts on
    scaled_weights: np.ndarray = field(repr=False)
    objective_path: Tuple[float, ...] = field(default=(), repr=False)

    @property
    def n_features(self) -> int:
        return int(self.weights.shape[0])


def _soft_threshold(x: float, t: float) -> float:
    if x > t:
        return x - t
    if x < -t:
        return x + t
    return 0.0


def _as_matrix(X) -> np.ndarray:
    matrix = np.asarray(X, dtype=float)
    if matrix.ndim == 1:
        matrix = matrix[:, None]
    if matrix.ndim != 2:
        raise RegressionError(f"X must be a 2-d matrix, got {matrix.ndim} dimensions")
    if not np.all(np.isfinite(matrix)):
        raise RegressionError("non-finite input in X")
    return matrix


def penalized_objective(Z: np.ndarray, y: np.ndarray, beta: np.ndarray, spec: ElasticNetSpec) -> float:
    """Elastic-net objective for centered inputs Z, y and coefficients beta."""
    n = Z.shape[0]
    residual = y - Z @ beta
    l1 = spec.alpha * spec.l1_ratio * np.sum(np.abs(beta))
    l2 = 0.5 * spec.alpha * (1.0 - spec.l1_ratio) * np.dot(beta, beta)
    return float(np.dot(residual, residual) / (2.0 * n) + l1 + l2)


def prepare_design(X: np.ndarray, standardize: bool) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Center (and optionally scale) the columns of X.

    Returns (Z, means, scales, active). Constant columns (exact peak-to-peak
    zero, not a rounding-level spread) get scale 1, an all-zero Z column and
    are marked inactive, so their weight stays 0.
    """
    means = X.mean(axis=0)
    active = np.ptp(X, axis=0) > 0
    centered = X - means
    centered[:, ~active] = 0.0
    spread = np.sqrt(np.mean(centered ** 2, axis=0))
    if standardize:
        scales = np.where(active, spread, 1.0)
    else:
        scales = np.ones(X.shape[1])
    return centered / scales, means, scales, active


def fit_elastic_net(X, y, spec: ElasticNetSpec = ElasticNetSpec()) -> LinearModel:
    """
    Fit an elastic net with cyclic coordinate descent and soft-thresholding.

    Stops when the largest coordinate change of a full sweep is below spec.tol
    or after spec.max_iter sweeps.

    Raises:
        RegressionError: non-finite input, empty input or dimension mismatch
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=float).ravel()
    n, d = X.shape
    if n < 1 or d < 1:
        raise RegressionError(f"need at least one row and one feature, got {n}x{d}")
    if y.shape[0] != n:
        raise RegressionError(f"dimension mismatch: X has {n} rows, y has {y.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise RegressionError("non-finite input in y")

    Z, means, scales, active = prepare_design(X, spec.standardize)
    y_mean = float(y.mean())
    yc = y - y_mean

    l1_penalty = spec.alpha * spec.l1_ratio
    l2_penalty = spec.alpha * (1.0 - spec.l1_ratio)
    col_sq = np.einsum("ij,ij->j", Z, Z) / n
    active_idx = [j for j in range(d) if active[j]]

    beta = np.zeros(d)
    residual = yc.copy()
    path = [penalized_objective(Z, yc, beta, spec)]
    converged = not active_idx
    n_iter = 0

    for sweep in range(1, spec.max_iter + 1):
        n_iter = sweep
        max_change = 0.0
        for j in active_idx:
            z_j = Z[:, j]
            old = beta[j]
            rho = np.dot(z_j, residual) / n + col_sq[j] * old
            new = _soft_threshold(rho, l1_penalty) / (col_sq[j] + l2_penalty)
            if new != old:
                residual -= z_j * (new - old)
                beta[j] = new
                max_change = max(max_change, abs(new - old))
        path.append(penalized_objective(Z, yc, beta, spec))
        if max_change < spec.tol:
            converged = True
            break

    if not converged:
        logger.warning(f"Coordinate descent did not converge in {spec.max_iter} sweeps (tol={spec.tol})")

    weights = beta / scales
    intercept = y_mean - float(np.dot(means, weights))
    return LinearModel(
        weights=weights,
        intercept=intercept,
        feature_means=means,
        feature_scales=scales,
        n_iter=n_iter,
        converged=converged,
        scaled_weights=beta.copy(),
        objective_path=tuple(path),
    )


def predict(model: LinearModel, X) -> np.ndarray:
    """X @ w + b in original units."""
    X = _as_matrix(X)
    if X.shape[1] != model.n_features:
        raise RegressionError(
            f"dimension mismatch: model has {model.n_features} features, X has {X.shape[1]}"
        )
    return X @ model.weights + model.intercept
