"""Tests for time-varying variance.

``psr_test`` looks for time variation of the evolutionary spectrum.  The
spectrum is estimated with two windows: a rectangular data window of
``segment_length`` samples (the short-time Fourier transform) followed by a
rectangular time-smoothing window that averages ``M`` consecutive,
non-overlapping segments.  For Gaussian data each periodogram ordinate is
exponential, so the log of an M-segment average has the exact variance
trigamma(M), which plays the role of the known sigma^2 in the two-way ANOVA.

``arch_lm_test`` is Engle's Lagrange-multiplier test on squared residuals.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import polygamma
from scipy.stats import chi2

from ..errors import ArgumentError, DegenerateInputError
from ..series import as_series
from .outcome import TestOutcome

MIN_BLOCK = 1024
MIN_SEGMENTS = 4


@dataclass(frozen=True)
class PsrOutcome:
    t_component: TestOutcome
    ir_component: TestOutcome
    tir_component: TestOutcome
    n_time_blocks: int
    n_freq_points: int
    details: dict = field(default_factory=dict, compare=False)

    @property
    def reject_null(self) -> bool:
        return self.t_component.reject_null or self.ir_component.reject_null or self.tir_component.reject_null

    @property
    def components(self) -> dict[str, TestOutcome]:
        return {"T": self.t_component, "I+R": self.ir_component, "T+I+R": self.tir_component}

    def to_dict(self):
        return {
            "reject": self.reject_null,
            "n_time_blocks": self.n_time_blocks,
            "n_freq_points": self.n_freq_points,
            "details": self.details,
            "components": {k: v.to_dict() for k, v in self.components.items()},
        }

    @classmethod
    def from_dict(cls, d):
        c = d["components"]
        return cls(
            TestOutcome.from_dict("psr_T", c["T"]),
            TestOutcome.from_dict("psr_I+R", c["I+R"]),
            TestOutcome.from_dict("psr_T+I+R", c["T+I+R"]),
            d["n_time_blocks"],
            d["n_freq_points"],
            dict(d.get("details") or {}),
        )


def default_segment_length(n_freq_points: int) -> int:
    # power of two with at least two Fourier bins between grid frequencies
    return 1 << int(np.ceil(np.log2(4 * (n_freq_points + 1))))


def evolutionary_log_spectrum(x, n_time_blocks, n_freq_points, segment_length=None):
    """Log evolutionary spectrum on an ``n_time_blocks x n_freq_points`` grid.

    Returns ``(Y, freqs, n_segments)`` where ``freqs`` are in cycles/sample.
    """
    x = np.asarray(x, dtype=float)
    h = segment_length or default_segment_length(n_freq_points)
    if h < 2 * (n_freq_points + 1):
        raise ArgumentError(f"segment_length {h} cannot resolve {n_freq_points} frequencies")
    M = x.shape[0] // (n_time_blocks * h)
    if M < MIN_SEGMENTS:
        raise ArgumentError(
            f"grid too fine: {n_time_blocks} blocks of {h}-sample segments leaves "
            f"{M} segments per block (need {MIN_SEGMENTS})"
        )
    bins = np.rint(np.arange(1, n_freq_points + 1) * (h / 2) / (n_freq_points + 1)).astype(int)
    seg = x[: n_time_blocks * M * h].reshape(n_time_blocks, M, h)
    seg = seg - x.mean()
    U = np.fft.rfft(seg, axis=-1)[..., bins]
    f_hat = np.mean(np.abs(U) ** 2, axis=1) / h
    if np.any(f_hat <= 0):
        raise DegenerateInputError("zero spectral estimate; series is (locally) constant")
    return np.log(f_hat), bins / h, M


def psr_test(
    s,
    n_time_blocks: Optional[int] = None,
    n_freq_points: int = 16,
    alpha: float = 0.05,
    segment_length: Optional[int] = None,
) -> PsrOutcome:
    """Priestley-Subba Rao test of H0: the series is homoskedastic (right-tailed).

    The three components (time, interaction+residual, total) are each tested
    at ``alpha / 3`` so that the overall "any component rejects" decision
    holds the family-wise level at ``alpha``.
    """
    s = as_series(s)
    n = len(s)
    if n < 4096:
        raise ArgumentError(f"psr_test needs at least 4096 samples, got {n}")
    if n_time_blocks is None:
        n_time_blocks = n // MIN_BLOCK
    if n_time_blocks < 2 or n_freq_points < 2:
        raise ArgumentError("need at least 2 time blocks and 2 frequencies")
    if np.ptp(s.values) == 0:
        raise DegenerateInputError("series is constant")

    Y, freqs, M = evolutionary_log_spectrum(s.values, n_time_blocks, n_freq_points, segment_length)
    sigma2 = float(polygamma(1, M))
    I, J = Y.shape
    grand = Y.mean()
    row = Y.mean(axis=1)
    col = Y.mean(axis=0)
    s_t = J * np.sum((row - grand) ** 2) / sigma2
    s_ir = np.sum((Y - row[:, None] - col[None, :] + grand) ** 2) / sigma2
    s_tir = s_t + s_ir

    a = alpha / 3.0
    dfs = {"T": I - 1, "I+R": (I - 1) * (J - 1), "T+I+R": (I - 1) * J}
    stats = {"T": s_t, "I+R": s_ir, "T+I+R": s_tir}
    comps = {}
    for key in ("T", "I+R", "T+I+R"):
        df = dfs[key]
        comps[key] = TestOutcome(
            name=f"psr_{key}",
            statistic=float(stats[key]),
            tail="right",
            alpha=a,
            critical_upper=float(chi2.isf(a, df)),
            p_value=float(chi2.sf(stats[key], df)),
            details={"df": df},
        )
    details = {
        "segment_length": int(segment_length or default_segment_length(n_freq_points)),
        "segments_per_block": int(M),
        "sigma2": sigma2,
        "family_alpha": alpha,
        "frequencies": [float(f * s.sample_rate) for f in freqs],
    }
    return PsrOutcome(comps["T"], comps["I+R"], comps["T+I+R"], I, J, details)


def arch_lm_test(x, L: int = 1, alpha: float = 0.05) -> TestOutcome:
    """Engle's ARCH LM test: N R^2 from regressing x^2 on L of its own lags."""
    x = as_series(x).values
    if L < 1:
        raise ArgumentError(f"L must be at least 1, got {L}")
    if x.shape[0] < 10 * (L + 1):
        raise ArgumentError(f"series too short for ARCH order {L}")
    x2 = (x - x.mean()) ** 2
    if np.ptp(x2) == 0:
        raise DegenerateInputError("squared series is constant")
    # dividing by the mean square leaves N R^2 unchanged and keeps sums well scaled
    x2 = x2 / x2.mean()
    y = x2[L:]
    X = np.column_stack([np.ones(y.shape[0])] + [x2[L - i:-i] for i in range(1, L + 1)])
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ beta
    yc = y - y.mean()
    r2 = 1.0 - (resid @ resid) / (yc @ yc)
    stat = y.shape[0] * r2
    return TestOutcome(
        name="arch_lm",
        statistic=float(stat),
        tail="right",
        alpha=alpha,
        critical_upper=float(chi2.isf(alpha, L)),
        p_value=float(chi2.sf(stat, L)),
        details={"lags": L, "nobs": int(y.shape[0])},
    )
