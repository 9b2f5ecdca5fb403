"""Surrogate-data test for linearity with the correlation dimension as statistic.

Surrogates follow the classic amplitude-adjusted Fourier transform (AAFT):
rank-remap the data onto a sorted Gaussian sample, phase-randomize, then
rank-remap back onto the sorted original values.  D2 is the slope of
log C(r) against log r, where C(r) is the Grassberger-Procaccia correlation
sum in a delay embedding (max-norm, Theiler window applied).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numba
import numpy as np

from .errors import ArgumentError, DegenerateInputError
from .series import Series, acf, as_series
from .stattests.outcome import TestOutcome

MIN_SURROGATE_LENGTH = 256


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


# --------------------------------------------------------------------------
# surrogates


def ft_surrogate(s, seed=None) -> Series:
    """Phase-randomized surrogate with exactly the source amplitude spectrum."""
    s = as_series(s)
    n = len(s)
    if n < MIN_SURROGATE_LENGTH:
        raise ArgumentError(f"surrogates need at least {MIN_SURROGATE_LENGTH} samples, got {n}")
    return s.replace(_phase_randomize(s.values, _rng(seed)), surrogate="ft")


def _phase_randomize(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    X = np.fft.rfft(x)
    phases = rng.uniform(0.0, 2.0 * np.pi, X.shape[0])
    phases[0] = 0.0  # keep the mean
    if n % 2 == 0:
        phases[-1] = 0.0  # Nyquist bin must stay real
    return np.fft.irfft(X * np.exp(1j * phases), n)


def aaft_surrogate(s, seed=None) -> Series:
    """Amplitude-adjusted Fourier transform surrogate.

    The output is a permutation of the input values, so its marginal
    distribution is exactly that of the source.
    """
    s = as_series(s)
    n = len(s)
    if n < MIN_SURROGATE_LENGTH:
        raise ArgumentError(f"surrogates need at least {MIN_SURROGATE_LENGTH} samples, got {n}")
    rng = _rng(seed)
    x = s.values
    ranks = np.argsort(np.argsort(x, kind="stable"), kind="stable")
    gauss = np.sort(rng.standard_normal(n))[ranks]
    y = _phase_randomize(gauss, rng)
    out = np.sort(x)[np.argsort(np.argsort(y, kind="stable"), kind="stable")]
    return s.replace(out, surrogate="aaft")


@dataclass(frozen=True)
class SurrogateEnsemble:
    originals: Series
    surrogates: list
    method: str
    seed: Optional[int]

    def __len__(self):
        return len(self.surrogates)


def surrogate_ensemble(s, n_surrogates: int, method: str = "aaft", seed=None) -> SurrogateEnsemble:
    """``n_surrogates`` surrogates, each from its own child of ``seed``."""
    s = as_series(s)
    make = {"aaft": aaft_surrogate, "ft": ft_surrogate}.get(method)
    if make is None:
        raise ArgumentError(f"unknown surrogate method {method!r}")
    children = np.random.SeedSequence(seed).spawn(n_surrogates)
    surr = [make(s, np.random.default_rng(c)) for c in children]
    return SurrogateEnsemble(s, surr, method, seed)


# --------------------------------------------------------------------------
# embedding and correlation sum


@dataclass(frozen=True)
class EmbeddingConfig:
    """Delay-embedding settings.

    ``delay=None`` picks the first lag where the ACF drops below 1/e; the
    default of 1 keeps adjacent-sample structure, where lag-one nonlinearity
    lives.  ``theiler_window=None`` means dimension * delay.
    """

    dimension: int = 5
    delay: Optional[int] = 1
    theiler_window: Optional[int] = None
    max_reference_points: int = 2000

    def resolve(self, s) -> "EmbeddingConfig":
        s = as_series(s)
        delay = self.delay if self.delay is not None else first_decorrelation_lag(s)
        theiler = self.theiler_window if self.theiler_window is not None else self.dimension * delay
        cfg = replace(self, delay=int(delay), theiler_window=int(theiler))
        cfg.validate(len(s))
        return cfg

    def validate(self, n: int):
        if self.dimension < 1 or (self.delay is not None and self.delay < 1):
            raise ArgumentError("embedding dimension and delay must be >= 1")
        if self.theiler_window is not None and self.theiler_window < 0:
            raise ArgumentError("theiler_window must be >= 0")
        if self.max_reference_points < 1:
            raise ArgumentError("max_reference_points must be >= 1")
        if self.delay is not None and (self.dimension - 1) * self.delay >= n:
            raise ArgumentError("embedding window exceeds the series length")


def first_decorrelation_lag(s, max_lag: int = 200) -> int:
    """First lag at which the sample ACF drops below 1/e."""
    s = as_series(s)
    L = min(max_lag, len(s) - 1)
    r = acf(s, L).coefficients
    below = np.flatnonzero(r[1:] < np.exp(-1.0))
    return int(below[0] + 1) if below.size else L


def embed(x: np.ndarray, dimension: int, delay: int) -> np.ndarray:
    """Delay vectors as rows: row i is (x[i], x[i+delay], ..., x[i+(m-1)delay])."""
    n = x.shape[0] - (dimension - 1) * delay
    if n < 1:
        raise ArgumentError("embedding window exceeds the series length")
    return np.ascontiguousarray(np.stack([x[k * delay : k * delay + n] for k in range(dimension)], axis=1))


@numba.njit(cache=True, fastmath=True)
def _pair_histogram(XT, ref_idx, r0, inv_step, n_bins, theiler):  # pragma: no cover - compiled
    # XT holds embedded points as columns so the distance sweep is contiguous.
    # Bin b counts pairs with r0*exp((b-1)/inv_step) < d <= r0*exp(b/inv_step).
    m, n = XT.shape
    rmax = r0 * np.exp((n_bins - 1) / inv_step)
    hist = np.zeros(n_bins, np.int64)
    d = np.empty(n)
    for a in range(ref_idx.shape[0]):
        i = ref_idx[a]
        xi = XT[0, i]
        for j in range(n):
            d[j] = abs(XT[0, j] - xi)
        for k in range(1, m):
            xi = XT[k, i]
            for j in range(n):
                d[j] = max(d[j], abs(XT[k, j] - xi))
        for j in range(max(0, i - theiler), min(n, i + theiler + 1)):
            d[j] = np.inf
        for j in range(n):
            dj = d[j]
            if dj <= rmax:
                if dj <= r0:
                    hist[0] += 1
                else:
                    b = int(np.ceil(np.log(dj / r0) * inv_step - 1e-9))
                    hist[min(b, n_bins - 1)] += 1
    return hist


def correlation_sum(X: np.ndarray, radii: np.ndarray, ref_idx: np.ndarray, theiler: int):
    """C(r) for each radius, counting pairs (reference, any point) at max-norm distance <= r.

    ``radii`` must be a geometric progression.  Returns ``(C, counts, n_pairs)``;
    temporal neighbours within ``theiler`` are excluded.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.shape[0] < 2 or radii[0] <= 0:
        raise ArgumentError("need at least two positive radii")
    ratio = radii[1:] / radii[:-1]
    if not np.allclose(ratio, ratio[0], rtol=1e-9) or ratio[0] <= 1:
        raise ArgumentError("radii must be increasing and geometrically spaced")
    n = X.shape[0]
    ref_idx = np.asarray(ref_idx, dtype=np.int64)
    XT = np.ascontiguousarray(X.T, dtype=float)
    hist = _pair_histogram(XT, ref_idx, radii[0], 1.0 / np.log(ratio[0]), radii.shape[0], int(theiler))
    counts = np.cumsum(hist)
    lo = np.maximum(ref_idx - theiler, 0)
    hi = np.minimum(ref_idx + theiler, n - 1)
    n_pairs = int(np.sum(n - (hi - lo + 1)))
    if n_pairs <= 0:
        raise ArgumentError("Theiler window excludes every pair")
    return counts / n_pairs, counts, n_pairs


@dataclass(frozen=True)
class CorrelationDimEstimate:
    d2: float
    r_fit_range: tuple
    fit_r_squared: float
    curve: np.ndarray = field(repr=False)  # columns: log r, log C(r)

    @property
    def reliable(self) -> bool:
        return self.fit_r_squared >= 0.9


# scaling-region search settings
_N_RADII = 64
_UPPER_QUANTILE = 0.2
_RADIUS_DECADES = 3.0
_MIN_PAIRS = 1000
_WINDOW_FACTOR = 8.0


def correlation_dimension(s, cfg: EmbeddingConfig = EmbeddingConfig(), seed=0) -> CorrelationDimEstimate:
    """Grassberger-Procaccia correlation dimension.

    Radii run geometrically over three decades below the 20th percentile of
    pairwise distances.  Radii supported by fewer than 1000 pairs are discarded, and
    the slope is fitted over the factor-of-8 window of radii whose local
    slopes vary least.
    """
    s = as_series(s)
    cfg = cfg.resolve(s)
    x = s.values
    if np.ptp(x) == 0:
        raise DegenerateInputError("series is constant")
    X = embed(x, cfg.dimension, cfg.delay)
    n = X.shape[0]
    if n < 2000:
        raise ArgumentError(f"need at least 2000 embedded points, got {n}")
    rng = _rng(seed)
    n_ref = min(cfg.max_reference_points, n)
    ref_idx = np.sort(rng.choice(n, size=n_ref, replace=False))

    # upper end of the radius grid from random non-neighbour pairs
    i = rng.integers(0, n, 20000)
    j = rng.integers(0, n, 20000)
    keep = np.abs(i - j) > cfg.theiler_window
    dist = np.max(np.abs(X[i[keep]] - X[j[keep]]), axis=1)
    r_hi = float(np.quantile(dist, _UPPER_QUANTILE))
    if not r_hi > 0:
        raise DegenerateInputError("median pairwise distance is zero")
    radii = r_hi * np.logspace(-_RADIUS_DECADES, 0.0, _N_RADII)

    C, counts, _ = correlation_sum(X, radii, ref_idx, cfg.theiler_window)
    ok = counts >= _MIN_PAIRS
    logr = np.log(radii[ok])
    logc = np.log(C[ok])
    curve = np.column_stack([np.log(radii[counts > 0]), np.log(C[counts > 0])])
    if logr.shape[0] < 3:
        raise DegenerateInputError("too few populated radii to estimate a slope")

    step = np.log(radii[1] / radii[0])
    width = int(np.ceil(np.log(_WINDOW_FACTOR) / step))
    width = min(width, logr.shape[0] - 1)
    local = np.diff(logc) / np.diff(logr)
    spread = [np.std(local[k : k + width]) for k in range(local.shape[0] - width + 1)]
    start = int(np.argmin(spread))
    sl = slice(start, start + width + 1)
    slope, intercept = np.polyfit(logr[sl], logc[sl], 1)
    fitted = slope * logr[sl] + intercept
    ss_res = np.sum((logc[sl] - fitted) ** 2)
    ss_tot = np.sum((logc[sl] - logc[sl].mean()) ** 2)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return CorrelationDimEstimate(
        d2=float(max(slope, 0.0)),
        r_fit_range=(float(np.exp(logr[sl][0])), float(np.exp(logr[sl][-1]))),
        fit_r_squared=float(r2),
        curve=curve,
    )


# --------------------------------------------------------------------------
# linearity test


def linearity_test(
    s,
    n_surrogates: int = 20,
    cfg: EmbeddingConfig = EmbeddingConfig(),
    seed=0,
    alpha: float = 0.05,
) -> TestOutcome:
    """Two-tailed surrogate test of H0: the data come from a linear Gaussian process.

    With up to 20 surrogates the critical interval is the min/max envelope of
    the surrogate D2 values; with more it is the empirical alpha/2 and
    1 - alpha/2 quantiles.
    """
    s = as_series(s)
    if n_surrogates < 19:
        raise ArgumentError(f"need at least 19 surrogates, got {n_surrogates}")
    cfg = cfg.resolve(s)
    seed_seq = np.random.SeedSequence(seed)
    ens_seed, ref_seed = seed_seq.spawn(2)
    ref_seed_int = int(ref_seed.generate_state(1)[0])
    data_est = correlation_dimension(s, cfg, seed=ref_seed_int)
    children = ens_seed.spawn(n_surrogates)
    surr_d2 = np.empty(n_surrogates)
    for k, child in enumerate(children):
        sur = aaft_surrogate(s, np.random.default_rng(child))
        surr_d2[k] = correlation_dimension(sur, cfg, seed=ref_seed_int).d2
    if n_surrogates <= 20:
        lower, upper = float(surr_d2.min()), float(surr_d2.max())
        rule = "envelope"
    else:
        lower, upper = (float(q) for q in np.quantile(surr_d2, [alpha / 2, 1 - alpha / 2]))
        rule = "quantile"
    return TestOutcome(
        name="linearity",
        statistic=data_est.d2,
        tail="two",
        alpha=alpha,
        critical_lower=lower,
        critical_upper=upper,
        details={
            "rule": rule,
            "surrogate_d2": [float(v) for v in surr_d2],
            "embedding": {
                "dimension": cfg.dimension,
                "delay": cfg.delay,
                "theiler_window": cfg.theiler_window,
                "max_reference_points": cfg.max_reference_points,
            },
            "fit_r_squared": data_est.fit_r_squared,
        },
    )
