"""Series container and second-order statistics.

Everything here is a pure function of its inputs.  ``Series`` values are
stored as read-only float64 arrays so a series can be shared freely between
stages of the pipeline.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import ArgumentError

__all__ = [
    "Series",
    "CorrelationSequence",
    "Spectrum",
    "as_series",
    "acf",
    "pacf",
    "periodogram",
    "difference",
    "detrend",
    "durbin_levinson",
]


@dataclass(frozen=True, eq=False)
class Series:
    """A uniformly sampled real-valued record.

    Parameters
    ----------
    values : array_like
        Samples in instrument counts or arbitrary units.  Must be finite.
    sample_rate : float
        Samples per second.
    meta : mapping
        Free-form provenance (station, channel, start time, ...).
    """

    values: np.ndarray
    sample_rate: float = 1.0
    meta: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        v = np.array(self.values, dtype=float).ravel()
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise ArgumentError(f"series contains a non-finite value at index {bad}")
        rate = float(self.sample_rate)
        if not rate > 0:
            raise ArgumentError(f"sample_rate must be positive, got {self.sample_rate!r}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "sample_rate", rate)
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self):
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.sample_rate == other.sample_rate
            and np.array_equal(self.values, other.values)
            and self.meta == other.meta
        )

    def replace(self, values, **meta_updates) -> "Series":
        """New series with the same rate, ``values`` swapped in and meta extended."""
        meta = dict(self.meta)
        meta.update(meta_updates)
        return Series(values, self.sample_rate, meta)

    def head(self, n: int) -> "Series":
        return Series(self.values[:n], self.sample_rate, self.meta)


def as_series(x, sample_rate: float = 1.0) -> Series:
    """Accept a Series or anything array-like."""
    if isinstance(x, Series):
        return x
    return Series(np.asarray(x, dtype=float), sample_rate)


@dataclass(frozen=True)
class CorrelationSequence:
    lags: np.ndarray
    coefficients: np.ndarray
    n_effective: int

    @property
    def confidence_band(self) -> float:
        return 1.96 / np.sqrt(self.n_effective)

    def __getitem__(self, lag):
        return self.coefficients[lag]

    def __len__(self):
        return len(self.coefficients)


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray
    power: np.ndarray

    @property
    def df(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    def total_power(self) -> float:
        return float(np.sum(self.power) * self.df)


def _check_lag(n, max_lag, min_length=30):
    if n < min_length:
        raise ArgumentError(f"need at least {min_length} samples, got {n}")
    if not 0 <= max_lag < n:
        raise ArgumentError(f"max_lag must lie in [0, {n - 1}], got {max_lag}")


def autocovariance(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Biased (divide-by-N) autocovariance of a demeaned copy of ``x``."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    xc = x - x.mean()
    if max_lag <= 32:
        out = np.empty(max_lag + 1)
        out[0] = xc @ xc
        for k in range(1, max_lag + 1):
            out[k] = xc[k:] @ xc[:-k]
        return out / n
    nfft = 1 << int(np.ceil(np.log2(n + max_lag + 1)))
    f = np.fft.rfft(xc, nfft)
    return np.fft.irfft(f * np.conj(f), nfft)[: max_lag + 1] / n


def acf(s, max_lag: int) -> CorrelationSequence:
    """Sample autocorrelation up to ``max_lag`` using the biased estimator."""
    s = as_series(s)
    n = len(s)
    _check_lag(n, max_lag)
    gamma = autocovariance(s.values, max_lag)
    if gamma[0] == 0:
        coef = np.zeros(max_lag + 1)
    else:
        coef = gamma / gamma[0]
    coef[0] = 1.0
    return CorrelationSequence(np.arange(max_lag + 1), coef, n)


def durbin_levinson(rho: np.ndarray) -> np.ndarray:
    """Partial autocorrelations from autocorrelations ``rho[0..L]`` (rho[0] == 1)."""
    rho = np.asarray(rho, dtype=float)
    L = rho.shape[0] - 1
    out = np.zeros(L + 1)
    out[0] = 1.0
    if L == 0:
        return out
    phi = np.zeros(L + 1)
    phi[1] = rho[1]
    out[1] = rho[1]
    v = 1.0 - rho[1] ** 2
    for k in range(2, L + 1):
        if v <= 0:
            break
        num = rho[k] - phi[1:k] @ rho[k - 1:0:-1]
        pk = num / v
        new = phi.copy()
        new[1:k] = phi[1:k] - pk * phi[k - 1:0:-1]
        new[k] = pk
        phi = new
        out[k] = pk
        v *= 1.0 - pk**2
    return out


def pacf(s, max_lag: int) -> CorrelationSequence:
    """Sample partial autocorrelation via Durbin-Levinson on the sample ACF."""
    r = acf(s, max_lag)
    return CorrelationSequence(r.lags, durbin_levinson(r.coefficients), r.n_effective)


def periodogram(s, taper: bool = False) -> Spectrum:
    """One-sided periodogram of the mean-removed series.

    Scaled so that ``sum(power) * df`` equals the (biased) sample variance.
    With ``taper=True`` a Hann window is applied and the scale corrected for
    the window's energy, which keeps the Parseval sum approximately right.
    """
    s = as_series(s)
    n = len(s)
    if n < 64:
        raise ArgumentError(f"periodogram needs at least 64 samples, got {n}")
    x = s.values - s.values.mean()
    if taper:
        w = np.hanning(n)
        x = x * w
        norm = np.sum(w**2)
    else:
        norm = n
    X = np.fft.rfft(x)
    power = np.abs(X) ** 2 / (norm * s.sample_rate)
    if n % 2 == 0:
        power[1:-1] *= 2
    else:
        power[1:] *= 2
    freqs = np.fft.rfftfreq(n, d=1.0 / s.sample_rate)
    return Spectrum(freqs, power)


def difference(s, d: int = 1) -> Series:
    """Apply the first-difference operator ``d`` times."""
    s = as_series(s)
    if d < 0:
        raise ArgumentError(f"d must be non-negative, got {d}")
    if d >= len(s):
        raise ArgumentError(f"cannot difference {len(s)} samples {d} times")
    if d == 0:
        return s
    return Series(np.diff(s.values, n=d), s.sample_rate, s.meta)


def detrend(s, degree: int = 1) -> Series:
    """Subtract a least-squares polynomial of ``degree`` (0, 1 or 2) in time."""
    s = as_series(s)
    if degree not in (0, 1, 2):
        raise ArgumentError(f"degree must be 0, 1 or 2, got {degree}")
    n = len(s)
    if n <= degree + 1:
        raise ArgumentError(f"need more than {degree + 1} samples to fit degree {degree}")
    # centred, unit-scale time axis keeps the Vandermonde system well conditioned
    t = np.linspace(-1.0, 1.0, n)
    V = np.vander(t, degree + 1)
    coef, *_ = np.linalg.lstsq(V, s.values, rcond=None)
    resid = s.values - V @ coef
    return Series(resid - resid.mean(), s.sample_rate, s.meta)
