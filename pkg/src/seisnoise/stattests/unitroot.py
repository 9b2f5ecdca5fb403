"""Unit-root tests: augmented Dickey-Fuller, Phillips-Perron and the AR(1) heuristic."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import ArgumentError, DegenerateInputError
from ..series import as_series
from ._mackinnon import tau_critical, tau_pvalue
from .outcome import TestOutcome

DETERMINISTIC = ("none", "drift", "trend")

# AR(1) coefficient above which a series is treated as integrated
AR1_UNIT_ROOT_THRESHOLD = 0.967


@dataclass(frozen=True)
class UnitRootConfig:
    deterministic: str = "trend"
    lag_order: Union[int, str] = "auto"

    def __post_init__(self):
        if self.deterministic not in DETERMINISTIC:
            raise ArgumentError(f"deterministic must be one of {DETERMINISTIC}")
        if self.lag_order != "auto" and (int(self.lag_order) != self.lag_order or self.lag_order < 0):
            raise ArgumentError(f"lag_order must be a non-negative integer or 'auto'")

    def resolve_lags(self, n: int) -> int:
        """Schwert's rule floor(12 (N/100)^(1/4)) unless fixed explicitly."""
        if self.lag_order == "auto":
            return int(np.floor(12.0 * (n / 100.0) ** 0.25))
        return int(self.lag_order)


def _deterministic_columns(kind: str, n: int) -> list[np.ndarray]:
    cols = []
    if kind in ("drift", "trend"):
        cols.append(np.ones(n))
    if kind == "trend":
        cols.append(np.arange(1, n + 1, dtype=float) / n)
    return cols


def _ols_t(X: np.ndarray, y: np.ndarray, col: int):
    """OLS fit returning (coef[col], se[col], residuals)."""
    # unit-norm columns so the rank check does not depend on the data scale
    # (an I(2) level column can be 1e8 times larger than the constant)
    scale = np.linalg.norm(X, axis=0)
    if np.any(scale == 0):
        raise DegenerateInputError("unit-root regression is singular (constant or collinear input)")
    Xs = X / scale
    q, r = np.linalg.qr(Xs)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-10:
        raise DegenerateInputError("unit-root regression is singular (constant or collinear input)")
    beta = np.linalg.solve(r, q.T @ y)
    resid = y - Xs @ beta
    dof = X.shape[0] - X.shape[1]
    s2 = resid @ resid / dof
    if s2 <= 0:
        raise DegenerateInputError("unit-root regression has a perfect fit")
    rinv = np.linalg.solve(r, np.eye(r.shape[0]))
    var = s2 * np.sum(rinv[col] ** 2)
    return beta[col] / scale[col], np.sqrt(var) / scale[col], resid


def _check(s, min_len=50):
    s = as_series(s)
    if len(s) < min_len:
        raise ArgumentError(f"unit-root tests need at least {min_len} samples, got {len(s)}")
    if np.ptp(s.values) == 0:
        raise DegenerateInputError("series is constant")
    return s.values


def _tau_outcome(name, stat, deterministic, alpha, **details):
    return TestOutcome(
        name=name,
        statistic=float(stat),
        tail="left",
        alpha=alpha,
        critical_lower=tau_critical(alpha, deterministic),
        p_value=tau_pvalue(stat, deterministic),
        details={"deterministic": deterministic, **details},
    )


def adf_test(s, cfg: UnitRootConfig = UnitRootConfig(), alpha: float = 0.05) -> TestOutcome:
    """Augmented Dickey-Fuller test of H0: unit root (left-tailed)."""
    y = _check(s)
    n = y.shape[0]
    k = cfg.resolve_lags(n)
    dy = np.diff(y)
    if n - 1 - k < 10 + k:
        raise ArgumentError(f"series too short for {k} augmentation lags")
    target = dy[k:]
    m = target.shape[0]
    cols = [y[k:-1]]
    cols += [dy[k - i:-i] for i in range(1, k + 1)]
    cols += _deterministic_columns(cfg.deterministic, m)
    X = np.column_stack(cols)
    gamma, se, _ = _ols_t(X, target, 0)
    return _tau_outcome("adf", gamma / se, cfg.deterministic, alpha, lags=k, nobs=m)


def newey_west_variance(u: np.ndarray, bandwidth: int) -> float:
    """Bartlett-kernel long-run variance of a zero-mean series."""
    n = u.shape[0]
    lrv = u @ u / n
    for j in range(1, bandwidth + 1):
        lrv += 2.0 * (1.0 - j / (bandwidth + 1.0)) * (u[j:] @ u[:-j]) / n
    return float(lrv)


def pp_test(s, cfg: UnitRootConfig = UnitRootConfig(), alpha: float = 0.05) -> TestOutcome:
    """Phillips-Perron Z-tau test of H0: unit root (left-tailed).

    ``cfg.lag_order`` is ignored for the regression; the Newey-West bandwidth
    is floor(4 (N/100)^(1/4)).
    """
    y = _check(s)
    n = y.shape[0]
    dy = np.diff(y)
    m = dy.shape[0]
    X = np.column_stack([y[:-1]] + _deterministic_columns(cfg.deterministic, m))
    gamma, se, u = _ols_t(X, dy, 0)
    t_stat = gamma / se
    s2 = u @ u / (m - X.shape[1])
    gamma0 = u @ u / m
    bw = int(np.floor(4.0 * (n / 100.0) ** 0.25))
    lam2 = newey_west_variance(u, bw)
    lam = np.sqrt(lam2)
    z_tau = np.sqrt(gamma0 / lam2) * t_stat - 0.5 * (lam2 - gamma0) / lam * (m * se / np.sqrt(s2))
    return _tau_outcome("pp", z_tau, cfg.deterministic, alpha, bandwidth=bw, nobs=m)


def ar1_coefficient(s) -> float:
    """Least-squares lag-1 autoregressive coefficient (regression with intercept)."""
    s = as_series(s)
    if len(s) < 100:
        raise ArgumentError(f"ar1_coefficient needs at least 100 samples, got {len(s)}")
    y = s.values
    x0 = y[:-1] - y[:-1].mean()
    x1 = y[1:] - y[1:].mean()
    denom = x0 @ x0
    if denom == 0 or np.ptp(y) == 0:
        raise DegenerateInputError("series has zero variance")
    return float(x0 @ x1 / denom)
