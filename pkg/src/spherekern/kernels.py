"""Closed-form and Monte-Carlo evaluation of neural kernels on the sphere.

Two kernel families are supported for the power-ReLU activations
``a_s(z) = max(0, z)**s``:

* the random-feature (RF) kernel ``kappa_s(u)``, the covariance of the
  network output when only the last layer is trained, and
* the neural tangent (NT) kernel ``kappa_NT,s(u)``, the kernel of the
  network linearized around its random initialization.

Both are functions of the inner product ``u = x . x'`` of unit vectors.
Closed forms are available for ``s in {0, 1, 2, 3}``; deeper networks
(``l > 2``) are handled by the layer recursion.  A seeded Monte-Carlo
oracle estimates the defining Gaussian expectations directly and is used
to validate the closed forms.
"""

from dataclasses import dataclass
from math import prod, sqrt

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    UnsupportedSmoothnessError,
)

#: Hard bound for inner products: values in (1, 1 + U_CLAMP_TOL] are treated
#: as rounding noise and clamped to 1 (same at -1); anything larger is an error.
U_CLAMP_TOL = 1e-12

_SUPPORTED_S = (1, 2, 3)


def _as_ufloat(u):
    """Validate and clamp an inner-product argument.

    Returns (array, was_scalar).  Raises DomainError if any entry lies
    outside [-1 - U_CLAMP_TOL, 1 + U_CLAMP_TOL].
    """
    arr = np.asarray(u, dtype=float)
    excess = np.max(np.abs(arr), initial=0.0) - 1.0
    if excess > U_CLAMP_TOL:
        raise DomainError(
            f"inner product outside [-1, 1] by {excess:.3e} (tolerance {U_CLAMP_TOL:.0e})"
        )
    return np.clip(arr, -1.0, 1.0), arr.ndim == 0


def _sin_theta(u):
    # sqrt(1 - u^2) computed as sqrt((1-u)(1+u)) to avoid cancellation near |u| = 1
    return np.sqrt(np.maximum((1.0 - u) * (1.0 + u), 0.0))


def _kappa0(u):
    return 1.0 - np.arccos(u) / np.pi


def _kappa1(u):
    return (u * (np.pi - np.arccos(u)) + _sin_theta(u)) / np.pi


def _kappa2(u):
    theta = np.arccos(u)
    sin_t = _sin_theta(u)
    return (3.0 * sin_t * u + (np.pi - theta) * (1.0 + 2.0 * u * u)) / (3.0 * np.pi)


def _kappa3(u):
    theta = np.arccos(u)
    sin_t = _sin_theta(u)
    return (
        15.0 * sin_t
        - 11.0 * sin_t**3
        + (np.pi - theta) * (9.0 * u + 6.0 * u**3)
    ) / (15.0 * np.pi)


_CLOSED_FORMS = {0: _kappa0, 1: _kappa1, 2: _kappa2, 3: _kappa3}


def double_factorial_odd(s):
    """(2s-1)!! for integer s >= 0 (empty product = 1)."""
    return prod(range(1, 2 * s, 2))


def rf_closed(s, u):
    """Evaluate the 2-layer RF kernel ``kappa_s(u)`` in closed form.

    Parameters
    ----------
    s : int in {0, 1, 2, 3}
        Activation power.  ``s = 0`` is the step-function kernel, used
        internally by the derivative identity.
    u : float or array
        Inner product(s) in [-1, 1] (clamped within 1e-12).
    """
    if s not in _CLOSED_FORMS:
        raise UnsupportedSmoothnessError(
            f"no closed form for s={s}; supported s in {sorted(_CLOSED_FORMS)}"
        )
    arr, scalar = _as_ufloat(u)
    val = _CLOSED_FORMS[s](arr)
    return float(val) if scalar else val


def rf_derivative(s, u):
    """Derivative ``kappa_s'(u) = (s^2/(2s-1)) * kappa_{s-1}(u)`` for s >= 1."""
    if s < 1:
        raise UnsupportedSmoothnessError(f"derivative requires s >= 1, got s={s}")
    return s * s / (2.0 * s - 1.0) * rf_closed(s - 1, u)


def nt_two_layer(s, u):
    """2-layer NT kernel ``kappa_NT,s(u) = u * kappa_s'(u) + kappa_s(u)``."""
    arr, scalar = _as_ufloat(u)
    val = arr * rf_derivative(s, arr) + rf_closed(s, arr)
    return float(val) if scalar else val


def rf_deep(s, l, u):
    """Depth-``l`` RF kernel via the composition ``kappa^l = kappa_s(kappa^{l-1})``."""
    if l < 2:
        raise ConfigurationError(f"depth l must be >= 2, got {l}")
    val = rf_closed(s, u)
    for _ in range(l - 2):
        val = rf_closed(s, val)
    return val


def nt_deep(s, l, u, drop_c2=False):
    """Depth-``l`` NT kernel via the layer recursion.

    Each layer applies ``nt^l = c^2 * nt^{l-1} * kappa_s'(rf^{l-1}) + rf^l``
    with ``c^2 = 2/(2s-1)!!``.  With ``drop_c2=True`` the ``c^2`` factor is
    omitted, which matches the standard NTK recursion
    ``Theta^l = Theta^{l-1} * Sigma-dot^l + Sigma^l``; the default keeps the
    factor.
    """
    if l < 2:
        raise ConfigurationError(f"depth l must be >= 2, got {l}")
    c2 = 1.0 if drop_c2 else 2.0 / double_factorial_odd(s)
    rf_val = rf_closed(s, u)
    nt_val = nt_two_layer(s, u)
    for _ in range(l - 2):
        nt_val = c2 * nt_val * rf_derivative(s, rf_val) + rf_closed(s, rf_val)
        rf_val = rf_closed(s, rf_val)
    return nt_val


@dataclass(frozen=True)
class KernelSpec:
    """Identifies a kernel: family ("rf" or "nt"), power s, depth l, ambient dim d."""

    family: str
    s: int
    l: int = 2
    d: int = 3

    def __post_init__(self):
        if self.family not in ("rf", "nt"):
            raise ConfigurationError(f"family must be 'rf' or 'nt', got {self.family!r}")
        if self.s not in _SUPPORTED_S:
            raise UnsupportedSmoothnessError(
                f"s={self.s} unsupported; closed forms exist for s in {_SUPPORTED_S}"
            )
        if self.l < 2:
            raise ConfigurationError(f"depth l must be >= 2, got {self.l}")
        if self.d < 2:
            raise ConfigurationError(f"ambient dimension d must be >= 2, got {self.d}")

    @property
    def c_squared(self):
        """Normalization constant c^2 = 2/(2s-1)!!."""
        return 2.0 / double_factorial_odd(self.s)


class DotProductKernel:
    """An evaluable kernel ``u -> kappa(u)``, immutable after construction.

    Instances are callable on scalars or arrays of inner products.  The
    attribute ``kappa_one`` caches the value at ``u = 1`` (the maximum for
    these kernels, used by posterior-variance code as the prior variance).
    """

    def __init__(self, spec, drop_c2=False):
        self.spec = spec
        self.drop_c2 = bool(drop_c2)
        self.kappa_one = float(self(1.0))

    def __call__(self, u):
        if self.spec.family == "rf":
            return rf_deep(self.spec.s, self.spec.l, u)
        return nt_deep(self.spec.s, self.spec.l, u, drop_c2=self.drop_c2)

    def __repr__(self):
        extra = ", drop_c2=True" if self.drop_c2 else ""
        return (
            f"DotProductKernel({self.spec.family}, s={self.spec.s}, "
            f"l={self.spec.l}, d={self.spec.d}{extra})"
        )


def make_kernel(family, s, l=2, d=3, drop_c2=False):
    """Convenience constructor for :class:`DotProductKernel`."""
    return DotProductKernel(KernelSpec(family, s, l, d), drop_c2=drop_c2)


def _check_unit_rows(points, tol=1e-8):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    norms = np.linalg.norm(points, axis=1)
    bad = np.nonzero(np.abs(norms - 1.0) > tol)[0]
    if bad.size:
        raise DomainError(
            f"point {bad[0]} is not unit-norm: |x| = {norms[bad[0]]:.12f}"
        )
    return points


def gram(kernel, points, points2=None):
    """Kernel matrix ``K[i, j] = kappa(x_i . y_j)`` for unit vectors.

    With ``points2=None`` returns the symmetric Gram matrix of ``points``;
    inner products are symmetrized and clipped to [-1, 1] before kernel
    evaluation so that rounding in the matrix product cannot push them
    outside the kernel domain.
    """
    X = _check_unit_rows(points)
    if points2 is None:
        U = X @ X.T
        U = np.clip((U + U.T) / 2.0, -1.0, 1.0)
        K = kernel(U)
        return (K + K.T) / 2.0
    Y = _check_unit_rows(points2)
    U = np.clip(X @ Y.T, -1.0, 1.0)
    return kernel(U)


@dataclass(frozen=True)
class McOracleConfig:
    """Sample count and seed for the Monte-Carlo oracle.

    Samples are generated in fixed-size chunks, each from an independent
    Philox substream (``jumped(chunk_index)``), so the estimate is
    bit-reproducible no matter how chunks are scheduled across workers.
    """

    sample_count: int
    seed: int
    chunk_size: int = 1 << 17

    def __post_init__(self):
        if self.sample_count < 1:
            raise ConfigurationError("sample_count must be positive")


def _activation(s, z):
    # a_s(z) = max(0, z)^s with the convention 0^0 = 0 (a_0 is the step function)
    if s == 0:
        return (z > 0.0).astype(float)
    return np.where(z > 0.0, z, 0.0) ** s


def mc_estimate(spec, x, x_prime, cfg):
    """Monte-Carlo estimate of a 2-layer kernel value with its standard error.

    Draws ``w ~ N(0, I_d)`` and averages the defining integrand:
    ``c^2 * a_s(w.x) a_s(w.x')`` for RF, plus the derivative term
    ``c^2 * (x.x') * s^2 * a_{s-1}(w.x) a_{s-1}(w.x')`` for NT.

    Returns
    -------
    (estimate, std_error) : tuple of floats
        Sample mean and its standard error (sample std / sqrt(n)).
    """
    if spec.l != 2:
        raise ConfigurationError("the Monte-Carlo oracle covers 2-layer kernels only")
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    for v in (x, x_prime):
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise DomainError("mc_estimate inputs must be unit vectors")
    if x.shape != (spec.d,) or x_prime.shape != (spec.d,):
        raise ConfigurationError(f"inputs must have shape ({spec.d},)")

    c2 = spec.c_squared
    s = spec.s
    u = float(np.clip(x @ x_prime, -1.0, 1.0))
    total = 0.0
    total_sq = 0.0
    n_done = 0
    chunk_index = 0
    while n_done < cfg.sample_count:
        take = min(cfg.chunk_size, cfg.sample_count - n_done)
        rng = np.random.Generator(np.random.Philox(key=cfg.seed).jumped(chunk_index))
        W = rng.standard_normal((take, spec.d))
        g1 = W @ x
        g2 = W @ x_prime
        vals = c2 * _activation(s, g1) * _activation(s, g2)
        if spec.family == "nt":
            vals = vals + (
                c2 * u * s * s * _activation(s - 1, g1) * _activation(s - 1, g2)
            )
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        n_done += take
        chunk_index += 1

    mean = total / n_done
    if n_done > 1:
        var = max(total_sq - n_done * mean * mean, 0.0) / (n_done - 1)
        std_error = sqrt(var / n_done)
    else:
        std_error = float("inf")
    return mean, std_error
