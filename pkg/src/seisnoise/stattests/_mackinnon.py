"""Response-surface approximations to the Dickey-Fuller tau distribution.

Coefficients are MacKinnon's (1994) asymptotic p-value surfaces for a single
I(1) series.  Keys: "none" (no deterministic terms), "drift" (constant),
"trend" (constant and linear trend).
"""
from __future__ import annotations

import numpy as np
from scipy.optimize import brentq
from scipy.stats import norm

# cut-off between the left-tail and the large-p polynomial
_TAU_STAR = {"none": -1.04, "drift": -1.61, "trend": -2.89}
_TAU_MIN = {"none": -19.04, "drift": -18.83, "trend": -16.18}
_TAU_MAX = {"none": np.inf, "drift": 2.74, "trend": 0.7}

_SMALL_P = {
    "none": (0.6344, 1.2378, 3.2496e-2),
    "drift": (2.1659, 1.4412, 3.8269e-2),
    "trend": (3.2512, 1.6047, 4.9588e-2),
}
_LARGE_P = {
    "none": (0.4797, 9.3557e-1, -0.6999e-1, 3.3066e-2),
    "drift": (1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2),
    "trend": (2.5261, 6.1654e-1, -3.7956e-1, -6.0285e-2),
}


def tau_pvalue(tau: float, deterministic: str) -> float:
    """Left-tail probability of the Dickey-Fuller tau statistic."""
    if tau > _TAU_MAX[deterministic]:
        return 1.0
    if tau < _TAU_MIN[deterministic]:
        return 0.0
    if tau <= _TAU_STAR[deterministic]:
        c = _SMALL_P[deterministic]
    else:
        c = _LARGE_P[deterministic]
    z = sum(ci * tau**i for i, ci in enumerate(c))
    return float(norm.cdf(z))


def tau_critical(alpha: float, deterministic: str) -> float:
    """Critical tau such that ``tau_pvalue(tau) == alpha``."""
    hi = min(_TAU_MAX[deterministic], 5.0)
    lo = _TAU_MIN[deterministic]
    return float(brentq(lambda t: tau_pvalue(t, deterministic) - alpha, lo, hi, xtol=1e-10))
