from __future__ import annotations

import numpy as np
from scipy.stats import chi2

from ..errors import ArgumentError
from ..series import acf, as_series
from .outcome import TestOutcome


def ljung_box(x, max_lag: int) -> tuple[float, float]:
    """Ljung-Box Q over lags 1..max_lag and its chi-square(max_lag) p-value."""
    x = as_series(x).values
    n = x.shape[0]
    r = acf(x, max_lag).coefficients[1:]
    q = n * (n + 2) * np.sum(r**2 / (n - np.arange(1, max_lag + 1)))
    return float(q), float(chi2.sf(q, max_lag))


def robust_acf_band(x: np.ndarray, max_lag: int, z: float = 1.96) -> np.ndarray:
    """Per-lag half-width z * sqrt(sum x_t^2 x_{t-k}^2) / sum x_t^2.

    Equals z/sqrt(N) for i.i.d. data but stays valid when the squares are
    autocorrelated (conditional heteroskedasticity).
    """
    xc = x - x.mean()
    x2 = xc * xc
    n = x2.shape[0]
    nfft = 1 << int(np.ceil(np.log2(n + max_lag + 1)))
    f = np.fft.rfft(x2, nfft)
    lagged = np.fft.irfft(f * np.conj(f), nfft)[1 : max_lag + 1]
    return z * np.sqrt(np.maximum(lagged, 0.0)) / x2.sum()


def default_max_lag(n: int) -> int:
    return int(max(10, min(500, n // 10)))


def whiteness_test(x, max_lag: int | None = None, alpha: float = 0.05, robust: bool = False) -> TestOutcome:
    """ACF significance test for whiteness.

    The statistic is the fraction of autocorrelations at lags 1..max_lag lying
    outside the 95% band; whiteness is rejected when it exceeds ``alpha + 0.02``.
    The band is 1.96/sqrt(N), or with ``robust=True`` the heteroskedasticity
    consistent band of :func:`robust_acf_band`.  Ljung-Box Q is attached in
    ``details`` as supporting evidence only.
    """
    x = as_series(x).values
    n = x.shape[0]
    if max_lag is None:
        max_lag = default_max_lag(n)
    if max_lag < 10:
        raise ArgumentError(f"max_lag must be at least 10, got {max_lag}")
    if n < 10 * max_lag:
        raise ArgumentError(f"need at least {10 * max_lag} samples for {max_lag} lags, got {n}")
    r = acf(x, max_lag).coefficients[1:]
    if robust:
        band = robust_acf_band(x, max_lag)
    else:
        band = np.full(max_lag, 1.96 / np.sqrt(n))
    outside = np.abs(r) > band
    frac = float(outside.mean())
    q, q_p = ljung_box(x, max_lag)
    return TestOutcome(
        name="whiteness",
        statistic=frac,
        tail="right",
        alpha=alpha,
        critical_upper=alpha + 0.02,
        details={
            "max_lag": int(max_lag),
            "n_outside": int(outside.sum()),
            "band": "robust" if robust else "iid",
            "ljung_box_q": q,
            "ljung_box_p": q_p,
        },
    )
