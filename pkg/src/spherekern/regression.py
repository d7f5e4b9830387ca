"""Kernel ridge regression on the sphere with posterior-uncertainty tooling.

Implements the regressor f_hat(x) = k_n(x)^T (K_n + lam^2 I)^{-1} Y_n and
its posterior variance sigma_n^2(x) = kappa(1) - k_n(x)^T (K_n+lam^2 I)^{-1}
k_n(x), plus the quantities used to reason about sample efficiency:
information gain I = 1/2 log det(I + K/lam^2), effective dimension
d_eff = Tr(K (K + lam^2 I)^{-1}), confidence bands with multiplier
beta(delta) = B + (R/lam) sqrt(2 log(1/delta)), and greedy max-variance
data collection over a candidate grid.

All log-determinants come from Cholesky factors (sum of log-diagonals,
doubled), never from raw determinants.  Greedy selection updates the
factor one row at a time, so an n-step run over an m-point grid costs
O(n^2 m) instead of refitting from scratch each step.
"""

from dataclasses import dataclass
from math import log, sqrt

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

from .errors import (
    ConfigurationError,
    DomainError,
    IllConditionedGramError,
    ParameterError,
)
from .kernels import gram
from .serialize import csv_document, json_document

#: Jitter escalation for near-singular factorizations, as multiples of trace/n.
JITTER_LADDER = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


@dataclass(frozen=True)
class SphericalDataset:
    """Training inputs on the unit sphere with observed values.

    ``noise_scale`` records the sub-Gaussian scale of the observation noise
    (metadata used by confidence bands and experiment protocols; 0 means
    noiseless observations).
    """

    X: np.ndarray
    Y: np.ndarray
    noise_scale: float = 0.0

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Y = np.asarray(self.Y, dtype=float).ravel()
        if X.shape[0] != Y.shape[0]:
            raise ParameterError(
                f"got {X.shape[0]} inputs but {Y.shape[0]} values"
            )
        norms = np.linalg.norm(X, axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > 1e-8)[0]
        if bad.size:
            raise DomainError(f"input {bad[0]} is not unit-norm")
        if self.noise_scale < 0:
            raise ParameterError("noise_scale must be nonnegative")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    def __len__(self):
        return self.Y.size

    @property
    def d(self):
        return self.X.shape[1]


@dataclass(frozen=True)
class ConfidenceParams:
    """Band parameters: RKHS norm bound B, noise scale R, failure probability delta."""

    norm_bound: float
    noise_scale: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta}")
        if self.norm_bound <= 0:
            raise ParameterError("norm_bound must be positive")
        if self.noise_scale < 0:
            raise ParameterError("noise_scale must be nonnegative")

    def beta(self, lam):
        """Multiplier beta(delta) = B + (R/lam) sqrt(2 log(1/delta))."""
        return self.norm_bound + (self.noise_scale / lam) * sqrt(
            2.0 * log(1.0 / self.delta)
        )


class FittedRegressor:
    """Immutable result of a kernel ridge regression fit.

    Holds the lower Cholesky factor L of K_n + lam^2 I (plus any jitter the
    factorization needed, recorded in ``jitter``) and the dual weights
    alpha = (K_n + lam^2 I)^{-1} Y_n.  The n = 0 instance built by
    :meth:`empty` is the prior: mean 0, variance kappa(1).
    """

    def __init__(self, kernel, X, lam, L, alpha, jitter=0.0):
        self.kernel = kernel
        self.X = X
        self.lam = float(lam)
        self.L = L
        self.alpha = alpha
        self.jitter = float(jitter)
        for arr in (self.X, self.L, self.alpha):
            arr.setflags(write=False)

    @classmethod
    def empty(cls, kernel, lam, d=None):
        """The prior model (no training data)."""
        if lam <= 0:
            raise ParameterError(f"lam must be positive, got {lam}")
        if d is None:
            spec = getattr(kernel, "spec", None)
            d = spec.d if spec is not None else 3
        return cls(kernel, np.empty((0, d)), lam, np.empty((0, 0)), np.empty(0))

    @property
    def n(self):
        return self.X.shape[0]


def sample_sphere(d, n, seed):
    """n points uniform on S^{d-1}: normalized standard Gaussian rows.

    Deterministic given the seed (which may be an int or a seed sequence).
    """
    if d < 2:
        raise ParameterError(f"d must be >= 2, got {d}")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    while np.any(norms == 0.0):  # probability-zero guard
        X = rng.standard_normal((n, d))
        norms = np.linalg.norm(X, axis=1, keepdims=True)
    return X / norms


def _chol_with_jitter(A):
    """Lower Cholesky factor of A, escalating diagonal jitter on failure."""
    n = A.shape[0]
    scale = float(np.trace(A)) / max(n, 1)
    for level in JITTER_LADDER:
        try:
            L = cholesky(A + (level * scale) * np.eye(n), lower=True)
            return L, level * scale
        except np.linalg.LinAlgError:
            continue
    cond = float(np.linalg.cond(A))
    raise IllConditionedGramError(
        f"Cholesky failed for {n}x{n} system even with jitter "
        f"{JITTER_LADDER[-1]:.0e}*trace/n (condition estimate {cond:.3e})"
    )


def fit(kernel, dataset, lam):
    """Fit kernel ridge regression with regularization lam (noise std scale).

    The linear system uses lam^2 on the diagonal.  Near-singular Gram
    matrices (e.g. duplicated training points at small lam) get escalating
    diagonal jitter before the fit is abandoned.
    """
    if lam <= 0:
        raise ParameterError(f"lam must be positive, got {lam}")
    if len(dataset) == 0:
        raise ConfigurationError("fit requires a non-empty dataset; use FittedRegressor.empty")
    K = gram(kernel, dataset.X)
    A = K + lam * lam * np.eye(len(dataset))
    L, jitter = _chol_with_jitter(A)
    alpha = cho_solve((L, True), dataset.Y)
    return FittedRegressor(kernel, dataset.X, lam, L, alpha, jitter)


def _test_points(model, x):
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 1
    pts = np.atleast_2d(arr)
    norms = np.linalg.norm(pts, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise DomainError("test points must be unit-norm")
    return pts, scalar


def predict_mean(model, x):
    """Posterior mean at x (scalar for a single point, array for a batch)."""
    pts, scalar = _test_points(model, x)
    if model.n == 0:
        out = np.zeros(pts.shape[0])
    else:
        k = gram(model.kernel, pts, model.X)
        out = k @ model.alpha
    return float(out[0]) if scalar else out


def predict_variance(model, x):
    """Posterior variance at x; independent of Y and clamped into [0, kappa(1)]."""
    pts, scalar = _test_points(model, x)
    kappa_one = model.kernel.kappa_one
    if model.n == 0:
        out = np.full(pts.shape[0], kappa_one)
    else:
        k = gram(model.kernel, pts, model.X)
        z = solve_triangular(model.L, k.T, lower=True)
        out = kappa_one - np.sum(z * z, axis=0)
        out = np.clip(out, 0.0, kappa_one)
    return float(out[0]) if scalar else out


def confidence_band(model, x, params):
    """Half-width beta(delta) * sigma_n(x) of the pointwise confidence band."""
    var = predict_variance(model, x)
    return params.beta(model.lam) * np.sqrt(var)


def information_gain(kernel, points, lam):
    """Mutual information I = 1/2 log det(I + K/lam^2) for points on the sphere."""
    if lam <= 0:
        raise ParameterError(f"lam must be positive, got {lam}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    K = gram(kernel, points)
    L, _ = _chol_with_jitter(K + lam * lam * np.eye(n))
    return max(float(np.sum(np.log(np.diag(L))) - n * log(lam)), 0.0)


def effective_dimension(kernel, points, lam):
    """Effective dimension Tr(K (K + lam^2 I)^{-1}) = sum_j mu_j/(mu_j + lam^2)."""
    if lam <= 0:
        raise ParameterError(f"lam must be positive, got {lam}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    K = gram(kernel, points)
    L, _ = _chol_with_jitter(K + lam * lam * np.eye(n))
    inv = cho_solve((L, True), np.eye(n))
    return float(n - lam * lam * np.trace(inv))


@dataclass(frozen=True)
class InfoGainReport:
    """Information gain and effective dimension of one point set.

    ``sum_variance`` and ``bound_rhs`` are the two sides of
    :func:`variance_sum_check` evaluated over the points in their given
    order, so the report and greedy traces share one CSV schema.
    """

    n: int
    info_gain: float
    effective_dim: float
    lam: float
    sum_variance: float
    bound_rhs: float

    def to_csv(self):
        header = ["n", "info_gain", "effective_dim", "sum_variance", "bound_rhs"]
        row = [self.n, self.info_gain, self.effective_dim, self.sum_variance, self.bound_rhs]
        return csv_document(header, [row])

    def to_json(self, config=None, timestamp=None):
        payload = {
            "n": self.n,
            "info_gain": self.info_gain,
            "effective_dim": self.effective_dim,
            "lam": self.lam,
            "sum_variance": self.sum_variance,
            "bound_rhs": self.bound_rhs,
        }
        return json_document(payload, config=config, timestamp=timestamp)


@dataclass(frozen=True)
class GreedyTrace:
    """Per-step record of a greedy max-variance run.

    Arrays are indexed by step; entry i describes the model after i+1
    selections.  ``bound_rhs`` is the sequential-decomposition bound
    (2/log(1 + lam^{-2})) * log det(I + K/lam^2) that dominates
    ``sum_variance`` at every prefix.
    """

    lam: float
    selected_indices: np.ndarray
    selected_points: np.ndarray
    selected_variance: np.ndarray
    info_gain: np.ndarray
    effective_dim: np.ndarray
    sum_variance: np.ndarray
    bound_rhs: np.ndarray

    @property
    def n(self):
        return self.selected_indices.size

    def to_csv(self):
        header = ["n", "info_gain", "effective_dim", "sum_variance", "bound_rhs"]
        rows = [
            [i + 1, self.info_gain[i], self.effective_dim[i],
             self.sum_variance[i], self.bound_rhs[i]]
            for i in range(self.n)
        ]
        return csv_document(header, rows)

    def to_json(self, config=None, timestamp=None):
        payload = {
            "lam": self.lam,
            "n": self.n,
            "selected_indices": self.selected_indices.tolist(),
            "selected_variance": self.selected_variance.tolist(),
            "info_gain": self.info_gain.tolist(),
            "effective_dim": self.effective_dim.tolist(),
            "sum_variance": self.sum_variance.tolist(),
            "bound_rhs": self.bound_rhs.tolist(),
        }
        return json_document(payload, config=config, timestamp=timestamp)


def greedy_max_variance(kernel, candidate_grid, n, lam):
    """Select n points by repeated posterior-variance argmax over a grid.

    Ties break toward the lowest grid index, so runs are deterministic for
    a fixed grid order; repetitions are permitted (a reselected point still
    carries lam^2 observation variance).  Returns a :class:`GreedyTrace`
    with the selection order, the variance at each selection, and per-prefix
    information gain, effective dimension, and variance-sum bound.
    """
    if lam <= 0:
        raise ParameterError(f"lam must be positive, got {lam}")
    grid = np.atleast_2d(np.asarray(candidate_grid, dtype=float))
    if grid.shape[0] == 0:
        raise ConfigurationError("candidate grid is empty")
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    norms = np.linalg.norm(grid, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-8):
        raise DomainError("candidate grid points must be unit-norm")

    m = grid.shape[0]
    kappa_one = kernel.kappa_one
    lam2 = lam * lam
    log_lam = log(lam)

    U = np.clip(grid @ grid.T, -1.0, 1.0)
    K_grid = kernel((U + U.T) / 2.0)

    V = np.empty((n, m))
    L = np.zeros((n, n))
    sigma2 = np.full(m, kappa_one)
    sel = np.empty(n, dtype=np.int64)
    sel_var = np.empty(n)
    info = np.empty(n)
    eff = np.empty(n)
    sum_log_diag = 0.0
    tr_inv = 0.0

    for i in range(n):
        j = int(np.argmax(sigma2))
        sel[i] = j
        sel_var[i] = max(float(sigma2[j]), 0.0)

        v = V[:i, j]
        schur = kappa_one + lam2 - float(v @ v)
        if schur <= 0.0:
            raise IllConditionedGramError(
                f"greedy step {i}: nonpositive Schur complement {schur:.3e}"
            )
        ell = sqrt(schur)
        L[i, :i] = v
        L[i, i] = ell
        V[i] = (K_grid[j] - v @ V[:i]) / ell
        sigma2 -= V[i] * V[i]
        np.clip(sigma2, 0.0, None, out=sigma2)

        sum_log_diag += log(ell)
        if i == 0:
            tr_inv = 1.0 / schur
        else:
            u = solve_triangular(L[:i, :i], v, lower=True, trans="T")
            tr_inv += (float(u @ u) + 1.0) / schur
        info[i] = sum_log_diag - (i + 1) * log_lam
        eff[i] = (i + 1) - lam2 * tr_inv

    sum_var = np.cumsum(sel_var)
    bound = (2.0 / log(1.0 + 1.0 / lam2)) * (2.0 * info)
    return GreedyTrace(
        lam=lam,
        selected_indices=sel,
        selected_points=grid[sel],
        selected_variance=sel_var,
        info_gain=info,
        effective_dim=eff,
        sum_variance=sum_var,
        bound_rhs=bound,
    )


def variance_sum_check(kernel, points, lam):
    """Both sides of the total-uncertainty bound for a sequential point set.

    lhs is the sum of prior-to-selection variances sigma_{i-1}^2(x_i); rhs
    is (2/log(1 + lam^{-2})) * log det(I + K_n/lam^2).  The identity
    sigma_{i-1}^2(x_i) = L_ii^2 - lam^2 (L the Cholesky factor of
    K + lam^2 I) turns both into one factorization.  lhs <= rhs holds for
    every sequence; both values are returned for reporting.
    """
    if lam <= 0:
        raise ParameterError(f"lam must be positive, got {lam}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0]
    K = gram(kernel, points)
    lam2 = lam * lam
    L, _ = _chol_with_jitter(K + lam2 * np.eye(n))
    diag = np.diag(L)
    lhs = float(np.sum(diag * diag) - n * lam2)
    logdet = 2.0 * float(np.sum(np.log(diag)) - n * log(lam))
    rhs = (2.0 / log(1.0 + 1.0 / lam2)) * logdet
    return lhs, rhs
