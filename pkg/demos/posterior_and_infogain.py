"""Kernel ridge regression on the sphere: posteriors, bands, greedy design.

Fits a regressor to noisy samples of a smooth function, prints posterior
means and variances with confidence bands, then compares random and
greedy max-variance designs through their information gain.
"""

import numpy as np

from spherekern import (
    ConfidenceParams,
    confidence_band,
    effective_dimension,
    fit,
    greedy_max_variance,
    information_gain,
    make_kernel,
    predict_mean,
    predict_variance,
    sample_sphere,
    SphericalDataset,
    variance_sum_check,
)

rng = np.random.default_rng(0)
d = 3
kernel = make_kernel("nt", 1, d=d)

def target(X):
    return np.sin(3.0 * X[:, 0]) + 0.5 * X[:, 1]

X = sample_sphere(d, 48, seed=1)
noise = 0.1
Y = target(X) + noise * rng.standard_normal(len(X))
model = fit(kernel, SphericalDataset(X, Y, noise_scale=noise), lam=0.3)

X_test = sample_sphere(d, 5, seed=2)
mean = predict_mean(model, X_test)
var = predict_variance(model, X_test)
params = ConfidenceParams(norm_bound=2.0, noise_scale=noise, delta=0.05)
half_width = confidence_band(model, X_test, params)
lower, upper = mean - half_width, mean + half_width
print("test point: truth, mean, sd, band")
for i in range(len(X_test)):
    print(f"  {i}: {target(X_test)[i]:+.3f}  {mean[i]:+.3f}  "
          f"{np.sqrt(var[i]):.3f}  [{lower[i]:+.3f}, {upper[i]:+.3f}]")
covered = np.mean((target(X_test) >= lower) & (target(X_test) <= upper))
print(f"band coverage on test points: {covered:.0%}")

# Information gain of the training set, and the effective number of
# directions the data actually pins down.
lam = 0.3
print(f"\ninformation gain: {information_gain(kernel, X, lam):.3f}")
print(f"effective dimension: {effective_dimension(kernel, X, lam):.3f} of n={len(X)}")

# Greedy max-variance design concentrates gain faster than random points.
grid = sample_sphere(d, 1024, seed=3)
trace = greedy_max_variance(kernel, grid, 32, lam=1.0)
random_pts = sample_sphere(d, 32, seed=4)
print(f"\n32-point info gain: greedy {trace.info_gain[-1]:.3f} "
      f"vs random {information_gain(kernel, random_pts, 1.0):.3f}")

# The accumulated pre-selection variances respect the log-det bound.
lhs, rhs = variance_sum_check(kernel, np.asarray(trace.selected_points), 1.0)
print(f"variance sum {lhs:.3f} <= bound {rhs:.3f}")
