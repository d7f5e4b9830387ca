"""Scaled-down versions of the two synthetic scaling experiments.

Runs the sup-error decay experiment and the information-gain growth
experiment at small sizes, printing fitted exponents next to the
theoretical predictions.  Full-size runs go through the command line
(error-rate / mig-growth subcommands).
"""

import numpy as np

from spherekern import (
    error_rate_experiment,
    mig_growth_experiment,
    theoretical_error_exponent,
    theoretical_mig_exponent,
)

# Sup-error decay for in-RKHS targets, a few (family, s) settings.
print("sup-error decay, d = 3, n = 2..256, 3 repetitions")
for family, s in (("nt", 1), ("rf", 1), ("nt", 2)):
    report = error_rate_experiment(
        family, s, 3, n_grid=2 ** np.arange(1, 9), repetitions=3,
        eval_sample=2000, master_seed=0, workers=1,
    )
    theo = theoretical_error_exponent(family, s, 3)
    print(f"  {family} s={s}: fitted {report.mean_exponent:+.3f} "
          f"(std {report.exponent_std:.3f}), theory {theo:+.3f}")

# Information-gain growth along the greedy design.
print("\ngreedy information-gain growth, d = 3, n = 2..512")
for family, s in (("nt", 1), ("rf", 1)):
    report = mig_growth_experiment(
        family, s, 3, n_grid=2 ** np.arange(1, 10),
        candidate_grid_size=2048, seed=0,
    )
    theo = theoretical_mig_exponent(family, s, 3)
    print(f"  {family} s={s}: fitted {report.fitted_exponent:.3f}, "
          f"theory ceiling {theo:.3f}")
    print(f"    gains: {[round(float(v), 2) for v in report.info_gain]}")
