"""ARIMA(p, d, m) estimation, simulation and order selection.

Model on the d-times differenced series w[k]::

    (1 - sum_i phi_i B^i) w[k] = (1 + sum_j theta_j B^j) e[k],   e[k] ~ N(0, sigma2)

Estimation maximizes the conditional Gaussian likelihood: the first
``condition`` samples of w are used only as lagged regressors and pre-sample
innovations are set to zero.  Maximizing that likelihood over (phi, theta) is
a nonlinear least-squares problem, which is solved with a trust-region method
started from a Hannan-Rissanen regression.  Stationarity and invertibility are
enforced by optimizing over partial autocorrelations mapped through tanh.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import lfilter
from scipy.stats import norm

from .errors import ArgumentError, DegenerateInputError, EstimationError
from .series import Series, as_series, difference
from .stattests.outcome import TestOutcome
from .stattests.heteroskedasticity import psr_test
from .stattests.unitroot import (
    AR1_UNIT_ROOT_THRESHOLD,
    UnitRootConfig,
    adf_test,
    ar1_coefficient,
    pp_test,
)
from .stattests.whiteness import whiteness_test

log = logging.getLogger(__name__)

MAX_ORDER = 8
# roots closer to the unit circle than this are reported as boundary solutions
BOUNDARY_TOL = 1.005
# an AR root this close to an MA root is treated as a cancelling (redundant) pair
COMMON_FACTOR_TOL = 0.1


def poly_roots(coefs, sign: float) -> np.ndarray:
    """Roots of 1 + sign * sum_i c_i z^i (empty when there are no coefficients)."""
    c = np.trim_zeros(np.asarray(coefs, dtype=float), "b")
    if c.size == 0:
        return np.array([], dtype=complex)
    return np.roots(np.r_[sign * c[::-1], 1.0])


def _min_root(coefs, sign):
    r = poly_roots(coefs, sign)
    return float(np.min(np.abs(r))) if r.size else np.inf


@dataclass(frozen=True)
class ArimaModel:
    p: int
    d: int
    m: int
    ar: np.ndarray
    ma: np.ndarray
    sigma2: float
    ar_se: Optional[np.ndarray] = None
    ma_se: Optional[np.ndarray] = None
    mean: float = 0.0
    n_fit: int = 0
    log_likelihood: float = float("nan")
    aic: float = float("nan")
    bic: float = float("nan")
    ar_free: Optional[np.ndarray] = None  # False marks a coefficient pinned at zero
    ma_free: Optional[np.ndarray] = None
    fit_mean: bool = False
    flags: tuple = ()

    def __post_init__(self):
        ar = np.asarray(self.ar, dtype=float).reshape(-1)
        ma = np.asarray(self.ma, dtype=float).reshape(-1)
        if ar.shape[0] != self.p or ma.shape[0] != self.m:
            raise ArgumentError("coefficient counts must match the orders (p, m)")
        if self.d < 0 or self.p < 0 or self.m < 0:
            raise ArgumentError("orders must be non-negative")
        if not self.sigma2 > 0:
            raise ArgumentError(f"innovation variance must be positive, got {self.sigma2}")
        if _min_root(ar, -1.0) <= 1.0:
            raise ArgumentError("AR polynomial has a root on or inside the unit circle")
        if _min_root(ma, 1.0) <= 1.0:
            raise ArgumentError("MA polynomial has a root on or inside the unit circle")
        arf = np.ones(self.p, bool) if self.ar_free is None else np.asarray(self.ar_free, bool)
        maf = np.ones(self.m, bool) if self.ma_free is None else np.asarray(self.ma_free, bool)
        for name, v in (("ar", ar), ("ma", ma), ("ar_free", arf), ("ma_free", maf)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        for name in ("ar_se", "ma_se"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                v.setflags(write=False)
                object.__setattr__(self, name, v)
        object.__setattr__(self, "flags", tuple(self.flags))

    @property
    def order(self):
        return (self.p, self.d, self.m)

    @property
    def n_params(self) -> int:
        """Free parameters: unpinned coefficients, sigma2 and the mean if fitted."""
        return int(self.ar_free.sum() + self.ma_free.sum()) + 1 + int(self.fit_mean)

    @property
    def ar_roots(self):
        return poly_roots(self.ar, -1.0)

    @property
    def ma_roots(self):
        return poly_roots(self.ma, 1.0)

    def param_names(self) -> list[str]:
        return [f"ar{i + 1}" for i in range(self.p)] + [f"ma{j + 1}" for j in range(self.m)]

    def coefficients(self) -> dict[str, float]:
        return dict(zip(self.param_names(), np.r_[self.ar, self.ma].tolist()))

    def std_errors(self) -> dict[str, Optional[float]]:
        se = np.r_[
            self.ar_se if self.ar_se is not None else np.full(self.p, np.nan),
            self.ma_se if self.ma_se is not None else np.full(self.m, np.nan),
        ]
        free = np.r_[self.ar_free, self.ma_free]
        return {k: (float(v) if f and np.isfinite(v) else None) for k, v, f in zip(self.param_names(), se, free)}

    def insignificant(self, alpha: float = 0.05) -> list[str]:
        """Free coefficients whose normal-approximation interval covers zero."""
        z = norm.isf(alpha / 2)
        out = []
        coefs = self.coefficients()
        for name, se in self.std_errors().items():
            if se is None:
                continue
            if abs(coefs[name]) <= z * se:
                out.append(name)
        return out

    def to_dict(self) -> dict:
        return {
            "orders": {"p": self.p, "d": self.d, "m": self.m},
            "coefficients": self.coefficients(),
            "std_errors": self.std_errors(),
            "pinned": [k for k, f in zip(self.param_names(), np.r_[self.ar_free, self.ma_free]) if not f],
            "sigma2": self.sigma2,
            "mean": self.mean,
            "fit_mean": self.fit_mean,
            "n_fit": self.n_fit,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "bic": self.bic,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ArimaModel":
        o = d["orders"]
        p, m = o["p"], o["m"]
        names = [f"ar{i + 1}" for i in range(p)] + [f"ma{j + 1}" for j in range(m)]
        coefs = np.array([d["coefficients"][k] for k in names], dtype=float)
        ses = np.array([np.nan if d["std_errors"].get(k) is None else d["std_errors"][k] for k in names])
        pinned = set(d.get("pinned", []))
        free = np.array([k not in pinned for k in names], dtype=bool)
        return cls(
            p, o["d"], m, coefs[:p], coefs[p:], d["sigma2"], ses[:p], ses[p:],
            mean=d.get("mean", 0.0), n_fit=d.get("n_fit", 0),
            log_likelihood=_f(d.get("log_likelihood")), aic=_f(d.get("aic")), bic=_f(d.get("bic")),
            ar_free=free[:p], ma_free=free[p:], fit_mean=d.get("fit_mean", False),
            flags=tuple(d.get("flags", ())),
        )


def _f(v):
    return float("nan") if v is None else float(v)


@dataclass(frozen=True)
class FitDiagnostics:
    residuals: Series
    whiteness: TestOutcome
    insignificant_params: list
    converged: bool
    condition: int = 0
    details: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {
            "n_residuals": len(self.residuals),
            "condition": self.condition,
            "whiteness": self.whiteness.to_dict(),
            "insignificant_params": list(self.insignificant_params),
            "converged": self.converged,
            **self.details,
        }


# --------------------------------------------------------------------------
# partial-autocorrelation reparameterization


def pacf_to_ar(r: np.ndarray) -> np.ndarray:
    """Map partial autocorrelations in (-1, 1) to coefficients of a stationary AR polynomial."""
    phi = np.zeros(0)
    for k, rk in enumerate(r):
        phi = np.r_[phi - rk * phi[::-1], rk]
    return phi


def ar_to_pacf(phi: np.ndarray) -> np.ndarray:
    """Inverse of :func:`pacf_to_ar` (step-down recursion)."""
    phi = np.asarray(phi, dtype=float).copy()
    p = phi.shape[0]
    r = np.zeros(p)
    for k in range(p - 1, -1, -1):
        rk = phi[k]
        if abs(rk) >= 1:
            raise ArgumentError("coefficients are not strictly stationary")
        r[k] = rk
        if k:
            phi = (phi[:k] + rk * phi[:k][::-1]) / (1 - rk * rk)
    return r


def _to_coefs(u, p, m):
    ar = pacf_to_ar(np.tanh(u[:p]))
    ma = -pacf_to_ar(np.tanh(u[p:p + m]))
    return ar, ma


def _to_unconstrained(ar, ma):
    r = np.r_[ar_to_pacf(ar), ar_to_pacf(-np.asarray(ma))]
    return np.arctanh(np.clip(r, -0.999, 0.999))


# --------------------------------------------------------------------------
# residuals


def _residuals(w, ar, ma, c):
    """Conditional innovations e[c:], with pre-sample innovations set to zero."""
    p = ar.shape[0]
    n = w.shape[0]
    u = w[c:].copy()
    for i in range(p):
        u -= ar[i] * w[c - i - 1:n - i - 1]
    if ma.shape[0] == 0:
        return u
    return lfilter([1.0], np.r_[1.0, ma], u)


def _jacobian(w, e, ar, ma, c):
    """d e / d (ar, ma) for the conditional innovations."""
    p, m = ar.shape[0], ma.shape[0]
    n = w.shape[0]
    k = e.shape[0]
    cols = []
    for i in range(p):
        cols.append(-w[c - i - 1:n - i - 1])
    for j in range(m):
        cols.append(np.r_[np.zeros(j + 1), -e[:k - j - 1]])
    if not cols:
        return np.zeros((k, 0))
    J = np.column_stack(cols)
    if m:
        J = lfilter([1.0], np.r_[1.0, ma], J, axis=0)
    return J


def arma_residuals(model: ArimaModel, s, condition: Optional[int] = None) -> Series:
    """Innovations implied by ``model`` for the undifferenced series ``s``.

    The series is differenced ``model.d`` times, the model mean removed, and
    the first ``condition`` (default max(p, m)) differenced samples used only
    as regressors.
    """
    s = as_series(s)
    w = difference(s, model.d).values - model.mean
    c = max(model.p, model.m) if condition is None else int(condition)
    if c < model.p:
        raise ArgumentError("condition must be at least p")
    if c >= w.shape[0]:
        raise ArgumentError("series too short for the conditioning window")
    return s.replace(_residuals(w, model.ar, model.ma, c), stage="arima_residuals")


# --------------------------------------------------------------------------
# estimation


def _hannan_rissanen(w, p, m):
    """Two-stage regression start for (ar, ma)."""
    n = w.shape[0]
    if p + m == 0:
        return np.zeros(0), np.zeros(0)
    k = min(max(20, 2 * (p + m)), n // 10)
    if m:
        X = np.column_stack([w[k - i - 1:n - i - 1] for i in range(k)])
        a, *_ = np.linalg.lstsq(X, w[k:], rcond=None)
        ehat = np.r_[np.zeros(k), w[k:] - X @ a]
    else:
        ehat = np.zeros(n)
    c = k + m if m else p
    cols = [w[c - i - 1:n - i - 1] for i in range(p)] + [ehat[c - j - 1:n - j - 1] for j in range(m)]
    X = np.column_stack(cols)
    b, *_ = np.linalg.lstsq(X, w[c:], rcond=None)
    ar, ma = b[:p], b[p:]
    # pull an unstable or non-invertible start back inside the admissible region
    for _ in range(50):
        if _min_root(ar, -1.0) > 1.01 and _min_root(ma, 1.0) > 1.01:
            break
        ar, ma = 0.9 * ar, 0.9 * ma
    return ar, ma


def _loglik(sse, n_eff):
    sigma2 = sse / n_eff
    return -0.5 * n_eff * (np.log(2 * np.pi * sigma2) + 1.0), sigma2


def _fit_full(w, p, m, c, starts, max_iter):
    """Fit over partial autocorrelations; returns (ar, ma, converged)."""
    def fun(u):
        ar, ma = _to_coefs(u, p, m)
        return _residuals(w, ar, ma, c)

    def jac(u):
        ar, ma = _to_coefs(u, p, m)
        e = _residuals(w, ar, ma, c)
        J = _jacobian(w, e, ar, ma, c)
        # chain rule through the (small) transform by central differences
        T = np.empty((p + m, p + m))
        h = 1e-6
        for i in range(p + m):
            du = np.zeros(p + m)
            du[i] = h
            a1, m1 = _to_coefs(u + du, p, m)
            a0, m0 = _to_coefs(u - du, p, m)
            T[:, i] = (np.r_[a1, m1] - np.r_[a0, m0]) / (2 * h)
        return J @ T

    best = None
    for ar0, ma0 in starts:
        try:
            u0 = _to_unconstrained(ar0, ma0)
        except ArgumentError:
            continue
        res = least_squares(fun, u0, jac=jac, method="trf", max_nfev=max_iter, x_scale="jac")
        cost = float(res.fun @ res.fun)
        if best is None or cost < best[0]:
            best = (cost, res)
    if best is None:
        raise EstimationError("no admissible starting point")
    res = best[1]
    ar, ma = _to_coefs(res.x, p, m)
    return ar, ma, bool(res.success)


def _fit_masked(w, p, m, c, ar_free, ma_free, start, max_iter):
    """Fit with some coefficients pinned at zero, directly in coefficient space.

    Stepping outside the stationary/invertible region is answered with an
    inflated residual vector so the trust region contracts back.
    """
    free = np.r_[ar_free, ma_free]

    def unpack(v):
        full = np.zeros(p + m)
        full[free] = v
        return full[:p], full[p:]

    def admissible(ar, ma):
        return _min_root(ar, -1.0) > 1.0 + 1e-6 and _min_root(ma, 1.0) > 1.0 + 1e-6

    scale = np.sqrt(w @ w)

    def fun(v):
        ar, ma = unpack(v)
        if not admissible(ar, ma):
            return np.full(w.shape[0] - c, scale)
        e = _residuals(w, ar, ma, c)
        return e if np.all(np.isfinite(e)) else np.full(w.shape[0] - c, scale)

    def jac(v):
        ar, ma = unpack(v)
        if not admissible(ar, ma):
            return np.zeros((w.shape[0] - c, free.sum()))
        e = _residuals(w, ar, ma, c)
        return _jacobian(w, e, ar, ma, c)[:, free]

    v0 = np.r_[start[0], start[1]][free]
    res = least_squares(fun, v0, jac=jac, method="trf", max_nfev=max_iter)
    ar, ma = unpack(res.x)
    if not admissible(ar, ma):
        ar, ma = unpack(v0)
    return ar, ma, bool(res.success)


def fit_arma(
    s,
    p: int,
    m: int,
    *,
    demean: bool = True,
    condition: Optional[int] = None,
    ar_free=None,
    ma_free=None,
    alpha: float = 0.05,
    whiteness_lags: Optional[int] = None,
    robust_whiteness: bool = False,
    max_iter: int = 200,
    _d: int = 0,
    _n_fit: Optional[int] = None,
):
    """Fit an ARMA(p, m) model to a stationary series.

    Parameters
    ----------
    s : Series or array_like
        Already differenced as needed.
    demean : bool
        Subtract the sample mean first (counted as a fitted parameter).
    condition : int, optional
        Samples used only as regressors; defaults to max(p, m).  Use a common
        value when comparing likelihoods across orders.
    ar_free, ma_free : bool arrays, optional
        False pins the corresponding coefficient at zero.

    Returns
    -------
    (ArimaModel, FitDiagnostics)
    """
    s = as_series(s)
    if p < 0 or m < 0 or p > MAX_ORDER or m > MAX_ORDER:
        raise ArgumentError(f"orders must lie in [0, {MAX_ORDER}], got p={p}, m={m}")
    n = len(s)
    if n < 50 * (p + m + 1):
        raise ArgumentError(f"need at least {50 * (p + m + 1)} samples for ARMA({p},{m}), got {n}")
    if np.ptp(s.values) == 0:
        raise DegenerateInputError("series is constant")
    c = max(p, m) if condition is None else int(condition)
    if c < max(p, m):
        raise ArgumentError("condition must be at least max(p, m)")
    mean = float(s.values.mean()) if demean else 0.0
    w = s.values - mean
    arf = np.ones(p, bool) if ar_free is None else np.asarray(ar_free, bool)
    maf = np.ones(m, bool) if ma_free is None else np.asarray(ma_free, bool)
    if arf.shape != (p,) or maf.shape != (m,):
        raise ArgumentError("free masks must have lengths p and m")

    flags = []
    if p + m == 0 or not (arf.any() or maf.any()):
        ar, ma, converged = np.zeros(p), np.zeros(m), True
    else:
        ar0, ma0 = _hannan_rissanen(w, p, m)
        if arf.all() and maf.all():
            starts = [(ar0, ma0), (np.zeros(p), np.zeros(m))]
            ar, ma, converged = _fit_full(w, p, m, c, starts, max_iter)
        else:
            ar0, ma0 = np.where(arf, ar0, 0.0), np.where(maf, ma0, 0.0)
            for _ in range(50):
                if _min_root(ar0, -1.0) > 1.01 and _min_root(ma0, 1.0) > 1.01:
                    break
                ar0, ma0 = 0.9 * ar0, 0.9 * ma0
            ar, ma, converged = _fit_masked(w, p, m, c, arf, maf, (ar0, ma0), max_iter)

    e = _residuals(w, ar, ma, c)
    if not np.all(np.isfinite(e)):
        raise EstimationError("residual recursion diverged")
    n_eff = e.shape[0]
    ll, sigma2 = _loglik(float(e @ e), n_eff)
    if not sigma2 > 0:
        raise DegenerateInputError("model fits the data exactly")

    # standard errors from the Gauss-Newton information sigma2 (J'J)^-1
    ar_se = np.full(p, np.nan)
    ma_se = np.full(m, np.nan)
    free = np.r_[arf, maf]
    if free.any():
        J = _jacobian(w, e, ar, ma, c)[:, free]
        try:
            cov = sigma2 * np.linalg.inv(J.T @ J)
            se = np.sqrt(np.clip(np.diag(cov), 0, None))
        except np.linalg.LinAlgError:
            se = np.full(free.sum(), np.nan)
            flags.append("singular_information")
        full = np.full(p + m, np.nan)
        full[free] = se
        ar_se, ma_se = full[:p], full[p:]

    if _min_root(ar, -1.0) < BOUNDARY_TOL or _min_root(ma, 1.0) < BOUNDARY_TOL:
        flags.append("boundary")
    if not converged:
        flags.append("not_converged")

    k = int(free.sum()) + 1 + int(demean)
    model = ArimaModel(
        p, _d, m, ar, ma, sigma2, ar_se, ma_se,
        mean=mean,
        n_fit=n if _n_fit is None else _n_fit,
        log_likelihood=float(ll),
        aic=float(2 * k - 2 * ll),
        bic=float(k * np.log(n_eff) - 2 * ll),
        ar_free=arf, ma_free=maf, fit_mean=demean, flags=tuple(flags),
    )
    resid = s.replace(e, stage="arima_residuals")
    white = whiteness_test(resid, max_lag=whiteness_lags, alpha=alpha, robust=robust_whiteness)
    diag = FitDiagnostics(resid, white, model.insignificant(alpha), converged, condition=c)
    return model, diag


def fit_arima(s, p: int, d: int, m: int, **kwargs):
    """Difference ``d`` times, then fit ARMA(p, m).  No mean is fitted when d >= 1."""
    s = as_series(s)
    if not 0 <= d <= 3:
        raise ArgumentError(f"d must lie in [0, 3], got {d}")
    if d == 0:
        return fit_arma(s, p, m, **kwargs)
    kwargs.setdefault("demean", False)
    return fit_arma(difference(s, d), p, m, _d=d, _n_fit=len(s), **kwargs)


# --------------------------------------------------------------------------
# order selection


def common_factor_distance(model: ArimaModel) -> float:
    """Smallest distance between an AR root and an MA root (inf if either side is empty)."""
    a, b = model.ar_roots, model.ma_roots
    if a.size == 0 or b.size == 0:
        return np.inf
    return float(np.min(np.abs(a[:, None] - b[None, :])))


@dataclass(frozen=True)
class OrderSelection:
    model: ArimaModel
    diagnostics: FitDiagnostics
    validated: bool
    candidates: list  # (p, m, aic) for every grid point that could be fitted
    history: list  # human-readable trace of the underfit/overfit loop


def select_order(
    s,
    d: int = 0,
    p_max: int = 6,
    m_max: int = 4,
    alpha: float = 0.05,
    *,
    criterion: str = "aic",
    robust_whiteness: bool = False,
    whiteness_lags: Optional[int] = None,
    max_prune_rounds: int = 8,
) -> OrderSelection:
    """Sweep the (p, m) grid and validate candidates in information-criterion order.

    A candidate is accepted when its residuals pass the whiteness test, no AR
    root nearly cancels an MA root, and all its coefficients are significant
    at ``alpha``.  Insignificant terms are
    pinned at zero and the model is refitted and re-checked.  If nothing
    passes, the best-ranked model is returned flagged ``not_validated``.
    """
    s = as_series(s)
    if not (0 <= p_max <= MAX_ORDER and 0 <= m_max <= MAX_ORDER):
        raise ArgumentError(f"p_max and m_max must lie in [0, {MAX_ORDER}]")
    if criterion not in ("aic", "bic"):
        raise ArgumentError("criterion must be 'aic' or 'bic'")
    w = difference(s, d)
    common = dict(
        demean=(d == 0), condition=max(p_max, m_max), alpha=alpha,
        robust_whiteness=robust_whiteness, whiteness_lags=whiteness_lags, _d=d, _n_fit=len(s),
    )
    fits = []
    for p, m in itertools.product(range(p_max + 1), range(m_max + 1)):
        try:
            fits.append(fit_arma(w, p, m, **common))
        except (EstimationError, ArgumentError) as exc:
            log.debug("ARMA(%d,%d) skipped: %s", p, m, exc)
    if not fits:
        raise EstimationError("no candidate order could be fitted")
    key = (lambda f: f[0].aic) if criterion == "aic" else (lambda f: f[0].bic)
    fits.sort(key=key)
    candidates = [(f[0].p, f[0].m, f[0].aic) for f in fits]
    history = []

    for model, diag in fits:
        tag = f"ARMA({model.p},{model.m})"
        if diag.whiteness.reject_null:
            history.append(f"{tag}: residuals not white (underfit)")
            continue
        if common_factor_distance(model) < COMMON_FACTOR_TOL:
            history.append(f"{tag}: AR and MA roots nearly cancel (overfit)")
            continue
        rounds = 0
        while diag.insignificant_params and rounds < max_prune_rounds:
            rounds += 1
            drop = set(diag.insignificant_params)
            arf = np.array([f and f"ar{i + 1}" not in drop for i, f in enumerate(model.ar_free)], bool)
            maf = np.array([f and f"ma{j + 1}" not in drop for j, f in enumerate(model.ma_free)], bool)
            p2, m2 = model.p, model.m
            while p2 and not arf[p2 - 1]:
                p2 -= 1
            while m2 and not maf[m2 - 1]:
                m2 -= 1
            history.append(f"{tag}: pinning {sorted(drop)} (overfit)")
            try:
                model, diag = fit_arma(w, p2, m2, ar_free=arf[:p2], ma_free=maf[:m2], **common)
            except (EstimationError, ArgumentError) as exc:
                history.append(f"{tag}: refit failed ({exc})")
                break
            tag = f"ARMA({model.p},{model.m})"
        if diag.insignificant_params:
            history.append(f"{tag}: still has insignificant terms")
            continue
        if diag.whiteness.reject_null:
            history.append(f"{tag}: residuals not white after pruning")
            continue
        if common_factor_distance(model) < COMMON_FACTOR_TOL:
            history.append(f"{tag}: AR and MA roots nearly cancel after pruning")
            continue
        history.append(f"{tag}: accepted")
        return OrderSelection(model, diag, True, candidates, history)

    model, diag = fits[0]
    model = replace(model, flags=model.flags + ("not_validated",))
    history.append(f"no candidate validated; returning ARMA({model.p},{model.m})")
    return OrderSelection(model, diag, False, candidates, history)


# --------------------------------------------------------------------------
# integration order


@dataclass(frozen=True)
class IntegrationStage:
    d: int
    method: str  # "ar1" or "unit_root_tests"
    integrated: bool
    ar1: float
    psr_reject: Optional[bool]
    adf: Optional[TestOutcome] = None
    pp: Optional[TestOutcome] = None

    def to_dict(self):
        return {
            "d": self.d,
            "method": self.method,
            "integrated": self.integrated,
            "ar1": self.ar1,
            "psr_reject": self.psr_reject,
            "adf": None if self.adf is None else self.adf.to_dict(),
            "pp": None if self.pp is None else self.pp.to_dict(),
        }


@dataclass(frozen=True)
class IntegrationDecision:
    d: int
    still_integrating: bool
    stages: list

    def __int__(self):
        return self.d


def determine_d(s, alpha: float = 0.05, d_max: int = 3, psr_kwargs: Optional[dict] = None) -> IntegrationDecision:
    """Smallest d for which the d-times differenced series shows no unit root.

    At each stage a PSR pre-check decides the method: when it finds the
    variance time-varying, ADF/PP are unreliable and the lag-1 AR coefficient
    is compared with 0.967 instead.  Otherwise the series counts as
    stationary only when ADF and PP both reject the unit root.  The raw series
    is tested with a trend term, differenced series without deterministic
    terms.
    """
    s = as_series(s)
    if not 0 <= d_max <= 3:
        raise ArgumentError(f"d_max must lie in [0, 3], got {d_max}")
    stages = []
    for d in range(d_max + 1):
        x = difference(s, d)
        a1 = ar1_coefficient(x)
        psr_reject = None
        if len(x) >= 4096:
            psr_reject = psr_test(x, alpha=alpha, **(psr_kwargs or {})).reject_null
        if psr_reject:
            integrated = a1 > AR1_UNIT_ROOT_THRESHOLD
            stage = IntegrationStage(d, "ar1", integrated, a1, psr_reject)
        else:
            cfg = UnitRootConfig(deterministic="trend" if d == 0 else "none")
            adf = adf_test(x, cfg, alpha)
            pp = pp_test(x, cfg, alpha)
            integrated = not (adf.reject_null and pp.reject_null)
            stage = IntegrationStage(d, "unit_root_tests", integrated, a1, psr_reject, adf, pp)
        stages.append(stage)
        if not integrated:
            return IntegrationDecision(d, False, stages)
    return IntegrationDecision(d_max, True, stages)


# --------------------------------------------------------------------------
# simulation


def simulate_arima(
    model: ArimaModel,
    n: int,
    seed=None,
    innovation: str = "gaussian",
    garch=None,
    innovations: Optional[np.ndarray] = None,
    sample_rate: float = 1.0,
) -> Series:
    """Generate ``n`` samples from ``model``.

    ``innovation="garch-driven"`` draws e[k] from ``garch`` (a GarchModel)
    instead of N(0, sigma2).  ``innovations`` may supply e[k] directly, in
    which case no burn-in is applied and its length must be ``n``.
    Otherwise 10 (p + m + 1) burn-in samples of the ARMA recursion are
    discarded.  Integration starts from zero.
    """
    if n < 1:
        raise ArgumentError(f"n must be positive, got {n}")
    if innovations is not None:
        e = np.asarray(innovations, dtype=float)
        if e.shape != (n,):
            raise ArgumentError(f"innovations must have length {n}")
        burn = 0
    else:
        burn = 10 * (model.p + model.m + 1)
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        if innovation == "gaussian":
            e = np.sqrt(model.sigma2) * rng.standard_normal(n + burn)
        elif innovation == "garch-driven":
            if garch is None:
                raise ArgumentError("garch-driven innovations need a GarchModel")
            from .garch import simulate_garch

            e = simulate_garch(garch, n + burn, seed=rng).values
        else:
            raise ArgumentError(f"unknown innovation type {innovation!r}")
    w = lfilter(np.r_[1.0, model.ma], np.r_[1.0, -model.ar], e)[burn:]
    w = w + model.mean
    for _ in range(model.d):
        w = np.cumsum(w)
    return Series(w, sample_rate, {"process": f"ARIMA{model.order}"})
