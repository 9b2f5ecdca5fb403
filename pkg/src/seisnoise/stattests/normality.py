"""Shapiro-Wilk W test using Royston's (1992) approximations for weights and p-value."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import norm

from ..errors import ArgumentError, DegenerateInputError
from ..series import as_series
from .outcome import TestOutcome

# polynomials in u = 1/sqrt(n) for the two most extreme weights
_C1 = (0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)


def _poly(c, x):
    return sum(ci * x**i for i, ci in enumerate(c))


@dataclass(frozen=True)
class SwWeights:
    coefficients: np.ndarray
    sample_size: int


@lru_cache(maxsize=64)
def _weights(n: int) -> np.ndarray:
    if n == 3:
        a = np.array([-np.sqrt(0.5), 0.0, np.sqrt(0.5)])
        return a
    i = np.arange(1, n + 1)
    m = norm.ppf((i - 0.375) / (n + 0.25))
    mm = m @ m
    u = 1.0 / np.sqrt(n)
    an = _poly(_C1, u) + m[-1] / np.sqrt(mm)
    a = np.empty(n)
    if n > 5:
        an1 = _poly(_C2, u) + m[-2] / np.sqrt(mm)
        phi = (mm - 2 * m[-1] ** 2 - 2 * m[-2] ** 2) / (1 - 2 * an**2 - 2 * an1**2)
        a[2:-2] = m[2:-2] / np.sqrt(phi)
        a[-1], a[-2] = an, an1
        a[0], a[1] = -an, -an1
    else:
        phi = (mm - 2 * m[-1] ** 2) / (1 - 2 * an**2)
        a[1:-1] = m[1:-1] / np.sqrt(phi)
        a[-1], a[0] = an, -an
    return a


def sw_weights(n: int) -> SwWeights:
    if not 3 <= n <= 5000:
        raise ArgumentError(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    w = _weights(n).copy()
    w.setflags(write=False)
    return SwWeights(w, n)


def _lognormal_params(n: int):
    """Location/scale of the normalizing transform of W, and the transform itself."""
    if n >= 12:
        ln = np.log(n)
        mu = 0.0038915 * ln**3 - 0.083751 * ln**2 - 0.31082 * ln - 1.5861
        sigma = np.exp(0.0030302 * ln**2 - 0.082676 * ln - 0.4803)
        return mu, sigma, None
    gamma = -2.273 + 0.459 * n
    mu = 0.5440 - 0.39978 * n + 0.025054 * n**2 - 0.0006714 * n**3
    sigma = np.exp(1.3822 - 0.77857 * n + 0.062767 * n**2 - 0.0020322 * n**3)
    return mu, sigma, gamma


def sw_pvalue(w: float, n: int) -> float:
    if n == 3:
        p = 6.0 / np.pi * (np.arcsin(np.sqrt(w)) - np.arcsin(np.sqrt(0.75)))
        return float(np.clip(p, 0.0, 1.0))
    if w >= 1.0:
        return 1.0
    mu, sigma, gamma = _lognormal_params(n)
    y = np.log1p(-w)
    if gamma is not None:
        if y >= gamma:
            return 0.0
        y = -np.log(gamma - y)
    return float(norm.sf((y - mu) / sigma))


def sw_critical(alpha: float, n: int) -> float:
    """W below which the test rejects at level ``alpha``."""
    if n == 3:
        return float(np.sin(alpha * np.pi / 6.0 + np.arcsin(np.sqrt(0.75))) ** 2)
    mu, sigma, gamma = _lognormal_params(n)
    y = mu + sigma * norm.isf(alpha)
    if gamma is not None:
        y = gamma - np.exp(-y)
    return float(-np.expm1(y))


def shapiro_wilk(x, alpha: float = 0.05) -> TestOutcome:
    """Shapiro-Wilk test of H0: the sample is Gaussian (rejects for small W)."""
    x = as_series(x).values
    n = x.shape[0]
    if not 3 <= n <= 5000:
        raise ArgumentError(f"Shapiro-Wilk needs 3 <= n <= 5000, got {n}")
    xs = np.sort(x)
    ss = np.sum((xs - xs.mean()) ** 2)
    if ss <= 0 or xs[-1] == xs[0]:
        raise DegenerateInputError("all values are identical")
    a = _weights(n)
    w = float(min((a @ xs) ** 2 / ss, 1.0))
    return TestOutcome(
        name="shapiro_wilk",
        statistic=w,
        tail="left",
        alpha=alpha,
        critical_lower=sw_critical(alpha, n),
        p_value=sw_pvalue(w, n),
        details={"n": n},
    )
