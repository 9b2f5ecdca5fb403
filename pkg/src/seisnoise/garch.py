"""GARCH(P, Q) conditional-variance models.

    X[k] = sigma_k eps[k],
    sigma_k^2 = c0 + sum_{i=1..P} b_i X[k-i]^2 + sum_{j=1..Q} a_j sigma_{k-j}^2

``b`` are the ARCH coefficients (lagged squared residuals) and ``a`` the GARCH
coefficients (lagged variances).  Estimation is Gaussian quasi-ML with the
pre-sample X^2 and sigma^2 fixed at the sample variance.
"""
from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numba
import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter, lfiltic

from .errors import ArgumentError, DegenerateInputError, EstimationError
from .series import Series, as_series
from .stattests.outcome import TestOutcome
from .stattests.whiteness import whiteness_test

log = logging.getLogger(__name__)

MAX_PERSISTENCE = 1.0 - 1e-6
NEAR_INTEGRATED = 0.999
BURN_IN = 1000


@dataclass(frozen=True)
class GarchModel:
    P: int
    Q: int
    c0: float
    arch: np.ndarray  # b_1..b_P
    garch: np.ndarray  # a_1..a_Q
    c0_se: Optional[float] = None
    arch_se: Optional[np.ndarray] = None
    garch_se: Optional[np.ndarray] = None
    log_likelihood: float = float("nan")
    aic: float = float("nan")
    bic: float = float("nan")
    n_fit: int = 0
    flags: tuple = ()

    def __post_init__(self):
        b = np.asarray(self.arch, dtype=float).reshape(-1)
        a = np.asarray(self.garch, dtype=float).reshape(-1)
        if self.P < 1 or self.Q < 0:
            raise ArgumentError(f"need P >= 1 and Q >= 0, got P={self.P}, Q={self.Q}")
        if b.shape[0] != self.P or a.shape[0] != self.Q:
            raise ArgumentError("coefficient counts must match the orders (P, Q)")
        if not self.c0 > 0:
            raise ArgumentError(f"c0 must be positive, got {self.c0}")
        if np.any(b < 0) or np.any(a < 0):
            raise ArgumentError("GARCH coefficients must be non-negative")
        if not b.sum() + a.sum() < 1:
            raise ArgumentError(f"persistence must be below 1, got {b.sum() + a.sum()}")
        for name, v in (("arch", b), ("garch", a)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "c0", float(self.c0))
        object.__setattr__(self, "flags", tuple(self.flags))

    @property
    def persistence(self) -> float:
        return float(self.arch.sum() + self.garch.sum())

    @property
    def unconditional_variance(self) -> float:
        return self.c0 / (1.0 - self.persistence)

    @property
    def n_params(self) -> int:
        return 1 + self.P + self.Q

    def param_names(self):
        return ["c0"] + [f"b{i + 1}" for i in range(self.P)] + [f"a{j + 1}" for j in range(self.Q)]

    def params(self) -> np.ndarray:
        return np.r_[self.c0, self.arch, self.garch]

    def std_errors(self) -> Optional[np.ndarray]:
        if self.c0_se is None:
            return None
        return np.r_[self.c0_se, self.arch_se, self.garch_se]

    def to_dict(self):
        se = self.std_errors()
        names = self.param_names()
        return {
            "orders": {"P": self.P, "Q": self.Q},
            "coefficients": dict(zip(names, self.params().tolist())),
            "std_errors": None if se is None else dict(zip(names, [None if not np.isfinite(v) else float(v) for v in se])),
            "persistence": self.persistence,
            "log_likelihood": self.log_likelihood,
            "aic": self.aic,
            "bic": self.bic,
            "n_fit": self.n_fit,
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d):
        P, Q = d["orders"]["P"], d["orders"]["Q"]
        c = d["coefficients"]
        se = d.get("std_errors")
        kw = {}
        if se is not None:
            g = lambda k: np.nan if se.get(k) is None else se[k]  # noqa: E731
            kw = dict(
                c0_se=g("c0"),
                arch_se=np.array([g(f"b{i + 1}") for i in range(P)]),
                garch_se=np.array([g(f"a{j + 1}") for j in range(Q)]),
            )
        nan = float("nan")
        return cls(
            P, Q, c["c0"],
            np.array([c[f"b{i + 1}"] for i in range(P)]),
            np.array([c[f"a{j + 1}"] for j in range(Q)]),
            log_likelihood=nan if d.get("log_likelihood") is None else d["log_likelihood"],
            aic=nan if d.get("aic") is None else d["aic"],
            bic=nan if d.get("bic") is None else d["bic"],
            n_fit=d.get("n_fit", 0),
            flags=tuple(d.get("flags", ())),
            **kw,
        )


# --------------------------------------------------------------------------
# variance recursion and likelihood


def conditional_variance(x2: np.ndarray, c0, b, a, v0: float) -> np.ndarray:
    """sigma_k^2 for k = 0..n-1 with pre-sample X^2 and sigma^2 equal to ``v0``."""
    P, Q = len(b), len(a)
    x2ext = np.r_[np.full(P, v0), x2]
    n = x2.shape[0]
    drive = np.full(n, c0, dtype=float)
    for i in range(P):
        drive += b[i] * x2ext[P - i - 1:P - i - 1 + n]
    if Q == 0:
        return drive
    den = np.r_[1.0, -np.asarray(a, dtype=float)]
    zi = lfiltic([1.0], den, np.full(Q, v0))
    return lfilter([1.0], den, drive, zi=zi)[0]


def _nll_and_grad(theta, x2, P, Q, v0):
    c0, b, a = theta[0], theta[1:1 + P], theta[1 + P:]
    n = x2.shape[0]
    s2 = conditional_variance(x2, c0, b, a, v0)
    if np.any(s2 <= 0) or not np.all(np.isfinite(s2)):
        return np.inf, np.zeros_like(theta)
    nll = 0.5 * np.sum(np.log(s2) + x2 / s2)
    # d sigma^2 / d theta obeys the same recursion with zero pre-sample derivative
    x2ext = np.r_[np.full(P, v0), x2]
    s2ext = np.r_[np.full(Q, v0), s2]
    D = np.empty((n, 1 + P + Q))
    D[:, 0] = 1.0
    for i in range(P):
        D[:, 1 + i] = x2ext[P - i - 1:P - i - 1 + n]
    for j in range(Q):
        D[:, 1 + P + j] = s2ext[Q - j - 1:Q - j - 1 + n]
    if Q:
        D = lfilter([1.0], np.r_[1.0, -a], D, axis=0)
    w = 0.5 * (1.0 / s2 - x2 / s2**2)
    return nll, w @ D


def _numerical_hessian(theta, x2, P, Q, v0):
    k = theta.shape[0]
    H = np.empty((k, k))
    for i in range(k):
        h = 1e-5 * max(abs(theta[i]), 1e-3)
        tp, tm = theta.copy(), theta.copy()
        tp[i] += h
        tm[i] -= h
        if tm[i] < 0:  # one-sided at a zero bound
            tm[i] = theta[i]
            H[i] = (_nll_and_grad(tp, x2, P, Q, v0)[1] - _nll_and_grad(tm, x2, P, Q, v0)[1]) / h
        else:
            H[i] = (_nll_and_grad(tp, x2, P, Q, v0)[1] - _nll_and_grad(tm, x2, P, Q, v0)[1]) / (2 * h)
    return 0.5 * (H + H.T)


def _starts(P, Q):
    out = []
    for pers, share in ((0.9, 0.1), (0.5, 0.4), (0.98, 0.05), (0.2, 1.0)):
        if Q == 0:
            b = np.full(P, min(pers, 0.5) / P)
            a = np.zeros(0)
        else:
            b = np.full(P, pers * share / P)
            a = np.full(Q, pers * (1 - share) / Q)
        c0 = 1.0 - b.sum() - a.sum()
        out.append(np.r_[c0, b, a])
    return out


def fit_garch(x, P: int = 1, Q: int = 1, max_iter: int = 500):
    """Gaussian quasi-ML fit of GARCH(P, Q) to a zero-mean residual series.

    Returns ``(GarchModel, standardized)`` where ``standardized`` is
    X[k] / sigma_k.  Fits with persistence above 0.999 are flagged
    ``near_integrated_variance``; fits pressed against the stationarity
    bound are flagged ``nonstationary_variance``.
    """
    s = as_series(x)
    if P < 1 or Q < 0 or P > 4 or Q > 4:
        raise ArgumentError(f"need 1 <= P <= 4 and 0 <= Q <= 4, got P={P}, Q={Q}")
    n = len(s)
    if n < 1000:
        raise ArgumentError(f"fit_garch needs at least 1000 samples, got {n}")
    xv = s.values
    scale = float(np.sqrt(np.mean(xv**2)))
    if scale == 0:
        raise DegenerateInputError("series is identically zero")
    # fitting on unit-scale data keeps c0 comparable with the other coefficients
    z = xv / scale
    x2 = z * z
    v0 = float(np.var(z))
    if v0 == 0:
        raise DegenerateInputError("series has zero variance")
    k = 1 + P + Q
    bounds = [(1e-8, None)] + [(0.0, 1.0)] * (P + Q)
    cons = [{
        "type": "ineq",
        "fun": lambda t: MAX_PERSISTENCE - np.sum(t[1:]),
        "jac": lambda t: np.r_[0.0, -np.ones(P + Q)],
    }]
    best = None
    for t0 in _starts(P, Q):
        t0 = t0 * np.r_[v0, np.ones(P + Q)]
        try:
            with warnings.catch_warnings():
                # SLSQP may probe slightly outside the bounds and clips silently otherwise
                warnings.simplefilter("ignore", RuntimeWarning)
                res = minimize(
                    _nll_and_grad, t0, args=(x2, P, Q, v0), jac=True, method="SLSQP",
                    bounds=bounds, constraints=cons, options={"maxiter": max_iter, "ftol": 1e-12},
                )
        except (ValueError, FloatingPointError) as exc:
            log.debug("GARCH start %s failed: %s", t0, exc)
            continue
        if not np.isfinite(res.fun):
            continue
        if best is None or res.fun < best.fun:
            best = res
    if best is None:
        raise EstimationError("GARCH likelihood could not be evaluated at any start")

    theta = np.clip(best.x, [1e-8] + [0.0] * (P + Q), None)
    if theta[1:].sum() >= MAX_PERSISTENCE:
        theta[1:] *= MAX_PERSISTENCE * (1 - 1e-9) / theta[1:].sum()
    nll, _ = _nll_and_grad(theta, x2, P, Q, v0)
    flags = []
    if not best.success:
        flags.append("not_converged")
    pers = float(theta[1:].sum())
    if pers >= MAX_PERSISTENCE - 1e-5:
        flags.append("nonstationary_variance")
    if pers > NEAR_INTEGRATED:
        flags.append("near_integrated_variance")

    try:
        cov = np.linalg.inv(_numerical_hessian(theta, x2, P, Q, v0))
        se = np.sqrt(np.where(np.diag(cov) > 0, np.diag(cov), np.nan))
    except np.linalg.LinAlgError:
        se = np.full(k, np.nan)
        flags.append("singular_information")

    # back to data units: c0 scales with the variance, the likelihood with log(scale)
    ll = -nll - n * np.log(scale) - 0.5 * n * np.log(2 * np.pi)
    c0 = theta[0] * scale**2
    model = GarchModel(
        P, Q, c0, theta[1:1 + P], theta[1 + P:],
        c0_se=float(se[0] * scale**2), arch_se=se[1:1 + P], garch_se=se[1 + P:],
        log_likelihood=float(ll), aic=float(2 * k - 2 * ll), bic=float(k * np.log(n) - 2 * ll),
        n_fit=n, flags=tuple(flags),
    )
    s2 = conditional_variance(x2, theta[0], theta[1:1 + P], theta[1 + P:], v0)
    if not best.success and not np.isfinite(ll):
        raise EstimationError("GARCH optimizer failed", best=model)
    return model, s.replace(z / np.sqrt(s2), stage="garch_standardized")


def standardize(model: GarchModel, x) -> Series:
    """X[k] / sigma_k under ``model`` (pre-sample values at the sample variance)."""
    s = as_series(x)
    x2 = s.values**2
    s2 = conditional_variance(x2, model.c0, model.arch, model.garch, float(np.var(s.values)))
    return s.replace(s.values / np.sqrt(s2), stage="garch_standardized")


def constant_variance_loglik(x) -> float:
    """Gaussian log-likelihood of a zero-mean series with constant variance (the nested model)."""
    xv = as_series(x).values
    n = xv.shape[0]
    v = float(np.mean(xv**2))
    return float(-0.5 * n * (np.log(2 * np.pi * v) + 1.0))


# --------------------------------------------------------------------------
# simulation


@numba.njit(cache=True)
def _garch_path(eps, c0, b, a, v_init):  # pragma: no cover - compiled
    n = eps.shape[0]
    P, Q = b.shape[0], a.shape[0]
    x = np.empty(n)
    s2 = np.empty(n)
    for k in range(n):
        v = c0
        for i in range(P):
            v += b[i] * (x[k - i - 1] ** 2 if k - i - 1 >= 0 else v_init)
        for j in range(Q):
            v += a[j] * (s2[k - j - 1] if k - j - 1 >= 0 else v_init)
        s2[k] = v
        x[k] = np.sqrt(v) * eps[k]
    return x


def simulate_garch(model: GarchModel, n: int, seed=None, sample_rate: float = 1.0) -> Series:
    """``n`` samples of the GARCH process driven by standard Gaussian eps.

    The recursion starts at the unconditional variance and the first 1000
    samples are discarded.
    """
    if n < 1:
        raise ArgumentError(f"n must be positive, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    eps = rng.standard_normal(n + BURN_IN)
    x = _garch_path(eps, model.c0, np.asarray(model.arch, float), np.asarray(model.garch, float),
                    model.unconditional_variance)
    return Series(x[BURN_IN:], sample_rate, {"process": f"GARCH({model.P},{model.Q})"})


# --------------------------------------------------------------------------
# validation and order selection


def validate_garch(model: Optional[GarchModel], standardized, alpha: float = 0.05,
                   max_lag: Optional[int] = None) -> tuple[TestOutcome, TestOutcome]:
    """Whiteness of the standardized residuals and of their squares.

    The model is acceptable when neither test rejects.  ``model`` is not used
    in the computation; it is accepted so callers can pass fit results through.
    """
    z = as_series(standardized)
    w1 = whiteness_test(z, max_lag=max_lag, alpha=alpha)
    w2 = whiteness_test(z.replace(z.values**2), max_lag=max_lag, alpha=alpha)
    return w1, w2


@dataclass(frozen=True)
class GarchSelection:
    model: GarchModel
    standardized: Series
    whiteness: TestOutcome
    whiteness_squared: TestOutcome
    validated: bool
    candidates: list = field(default_factory=list)  # (P, Q, aic, passed)


def select_garch(x, P_max: int = 2, Q_max: int = 2, alpha: float = 0.05,
                 max_lag: Optional[int] = None) -> GarchSelection:
    """Sweep P in 1..P_max, Q in 0..Q_max; lowest AIC among validated fits wins."""
    fits = []
    for P, Q in itertools.product(range(1, P_max + 1), range(0, Q_max + 1)):
        try:
            model, z = fit_garch(x, P, Q)
        except (EstimationError, ArgumentError) as exc:
            log.debug("GARCH(%d,%d) skipped: %s", P, Q, exc)
            continue
        w1, w2 = validate_garch(model, z, alpha, max_lag)
        fits.append((model, z, w1, w2, not (w1.reject_null or w2.reject_null)))
    if not fits:
        raise EstimationError("no GARCH order could be fitted")
    fits.sort(key=lambda f: f[0].aic)
    cands = [(f[0].P, f[0].Q, f[0].aic, f[4]) for f in fits]
    for model, z, w1, w2, ok in fits:
        if ok:
            return GarchSelection(model, z, w1, w2, True, cands)
    model, z, w1, w2, _ = fits[0]
    model = replace(model, flags=model.flags + ("not_validated",))
    return GarchSelection(model, z, w1, w2, False, cands)
