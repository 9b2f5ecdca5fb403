"""End-to-end characterization: integration order, stationarity, linearity,
ARIMA model, tests on the pre-whitened residuals, and GARCH when warranted."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Optional

import numpy as np

from .arima import ArimaModel, FitDiagnostics, determine_d, select_order
from .errors import ArgumentError, SeisnoiseError
from .garch import GarchModel, select_garch
from .nonlinearity import EmbeddingConfig, linearity_test
from .series import Series, acf, as_series, difference, pacf, periodogram
from .stattests import (
    PsrOutcome,
    TestOutcome,
    UnitRootConfig,
    adf_test,
    arch_lm_test,
    pp_test,
    psr_test,
    shapiro_wilk,
    whiteness_test,
)

log = logging.getLogger(__name__)

PLOT_ACF_LAGS = 50


@dataclass(frozen=True)
class PipelineConfig:
    alpha: float = 0.05
    n_samples: int = 50000
    n_surrogates: int = 20
    sw_sample: int = 2000
    d_max: int = 3
    p_max: int = 6
    m_max: int = 4
    garch_p_max: int = 2
    garch_q_max: int = 2
    arch_lags: int = 1
    embedding_dimension: int = 5
    embedding_delay: Optional[int] = 1
    theiler_window: Optional[int] = None
    max_reference_points: int = 2000
    whiteness_lags: Optional[int] = None
    # heteroskedasticity-consistent ACF band for ARIMA residuals (see whiteness_test)
    robust_whiteness: bool = True
    run_linearity: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ArgumentError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 3 <= self.sw_sample <= 5000:
            raise ArgumentError(f"sw_sample must lie in [3, 5000], got {self.sw_sample}")
        if self.n_samples < 100:
            raise ArgumentError(f"n_samples must be at least 100, got {self.n_samples}")
        if self.n_surrogates < 19:
            raise ArgumentError(f"n_surrogates must be at least 19, got {self.n_surrogates}")
        if not 0 <= self.d_max <= 3:
            raise ArgumentError(f"d_max must lie in [0, 3], got {self.d_max}")
        if not (0 <= self.p_max <= 8 and 0 <= self.m_max <= 8):
            raise ArgumentError("p_max and m_max must lie in [0, 8]")
        if not (1 <= self.garch_p_max <= 4 and 0 <= self.garch_q_max <= 4):
            raise ArgumentError("garch_p_max must lie in [1, 4] and garch_q_max in [0, 4]")
        if self.arch_lags < 1:
            raise ArgumentError("arch_lags must be at least 1")

    @property
    def embedding(self) -> EmbeddingConfig:
        return EmbeddingConfig(self.embedding_dimension, self.embedding_delay, self.theiler_window,
                               self.max_reference_points)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ArgumentError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class CharacterizationReport:
    input: dict
    config: PipelineConfig
    integration_order: Optional[int] = None
    still_integrating: bool = False
    heteroskedastic: Optional[bool] = None
    linear: Optional[bool] = None
    gaussian: Optional[bool] = None
    arch_effect: Optional[bool] = None
    tests: dict = field(default_factory=dict)  # name -> TestOutcome | PsrOutcome
    arima: Optional[ArimaModel] = None
    garch: Optional[GarchModel] = None
    diagnostics: dict = field(default_factory=dict)
    stage_log: list = field(default_factory=list)
    complete: bool = False
    error: Optional[str] = None
    # arrays for figure reproduction; not part of the JSON report
    plot_data: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def verdicts(self) -> dict:
        return {
            "integration_order": self.integration_order,
            "heteroskedastic": self.heteroskedastic,
            "linear": self.linear,
            "gaussian": self.gaussian,
            "arch_effect": self.arch_effect,
        }

    def to_dict(self) -> dict:
        return {
            "input": dict(self.input),
            "config": self.config.to_dict(),
            "integration_order": self.integration_order,
            "still_integrating": self.still_integrating,
            "verdicts": {k: v for k, v in self.verdicts.items() if k != "integration_order"},
            "tests": {k: v.to_dict() for k, v in self.tests.items()},
            "arima": None if self.arima is None else self.arima.to_dict(),
            "garch": None if self.garch is None else self.garch.to_dict(),
            "diagnostics": self.diagnostics,
            "stage_log": list(self.stage_log),
            "complete": self.complete,
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CharacterizationReport":
        tests = {}
        for k, v in d.get("tests", {}).items():
            tests[k] = PsrOutcome.from_dict(v) if "components" in v else TestOutcome.from_dict(k, v)
        v = d.get("verdicts", {})
        return cls(
            input=dict(d["input"]),
            config=PipelineConfig.from_dict(d["config"]),
            integration_order=d.get("integration_order"),
            still_integrating=d.get("still_integrating", False),
            heteroskedastic=v.get("heteroskedastic"),
            linear=v.get("linear"),
            gaussian=v.get("gaussian"),
            arch_effect=v.get("arch_effect"),
            tests=tests,
            arima=None if d.get("arima") is None else ArimaModel.from_dict(d["arima"]),
            garch=None if d.get("garch") is None else GarchModel.from_dict(d["garch"]),
            diagnostics=dict(d.get("diagnostics", {})),
            stage_log=list(d.get("stage_log", [])),
            complete=d.get("complete", False),
            error=d.get("error"),
        )


def _acf_curve(x, label, max_lag=PLOT_ACF_LAGS, partial=False):
    n = len(x)
    L = min(max_lag, n - 1)
    r = (pacf if partial else acf)(x, L)
    return {"x": r.lags.astype(float), "y": r.coefficients, "x_label": "lag (samples)",
            "y_label": f"{'PACF' if partial else 'ACF'} of {label}"}


def _spectrum_curve(x, label):
    sp = periodogram(x)
    return {"x": sp.frequencies, "y": sp.power, "x_label": "frequency (Hz)",
            "y_label": f"power spectral density of {label} (units^2/Hz)"}


def _tag(s: Series, name: str) -> Series:
    return s.replace(s.values, stage=name)


def characterize(s, cfg: PipelineConfig = PipelineConfig()) -> CharacterizationReport:
    """Run the full characterization on the first ``cfg.n_samples`` samples of ``s``.

    Stage order: integration order, unit-root and PSR tests on the data,
    linearity of the stationarized series, ARIMA order selection, Gaussianity
    and heteroskedasticity of the residuals, then GARCH when an ARCH effect is
    found.  A stage failing on degenerate input stops the run and returns the
    partial report with ``complete=False``.
    """
    s = as_series(s)
    n_total = len(s)
    warnings_ = []
    if n_total < cfg.n_samples:
        warnings_.append(f"series has {n_total} samples, fewer than n_samples={cfg.n_samples}; using all")
        log.warning(warnings_[-1])
    x = s.head(min(n_total, cfg.n_samples))
    report = CharacterizationReport(
        input={
            "meta": {k: str(v) for k, v in sorted(x.meta.items())},
            "sample_rate": x.sample_rate,
            "n_total": n_total,
            "n_analyzed": len(x),
        },
        config=cfg,
    )
    report.diagnostics["warnings"] = warnings_
    try:
        _run(x, cfg, report)
        report.complete = True
    except SeisnoiseError as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        report.stage_log.append(f"aborted: {report.error}")
        log.warning("characterization aborted: %s", report.error)
    return report


def _run(x: Series, cfg: PipelineConfig, r: CharacterizationReport):
    alpha = cfg.alpha
    stage = r.stage_log.append

    # (1) integration order
    dec = determine_d(x, alpha=alpha, d_max=cfg.d_max)
    r.integration_order = dec.d
    r.still_integrating = dec.still_integrating
    r.diagnostics["integration_stages"] = [st.to_dict() for st in dec.stages]
    stage(f"determine_d: d={dec.d} via {', '.join(st.method for st in dec.stages)}")

    # (2) stationarity tests on data and differenced data, as tabulated
    r.tests["adf_data"] = adf_test(x, UnitRootConfig("trend"), alpha)
    r.tests["pp_data"] = pp_test(x, UnitRootConfig("trend"), alpha)
    x1 = difference(x, 1)
    r.tests["adf_differenced"] = adf_test(x1, UnitRootConfig("none"), alpha)
    r.tests["pp_differenced"] = pp_test(x1, UnitRootConfig("none"), alpha)
    stage("unit_root_tests: data (trend) and first difference (none)")
    w = difference(x, dec.d)
    r.diagnostics["differences_applied"] = dec.d
    if len(x) >= 4096:
        r.tests["psr_data"] = psr_test(x, alpha=alpha)
        r.tests["psr_differenced"] = psr_test(w, alpha=alpha)
        stage(f"psr: data and {dec.d}-differenced series")
    else:
        stage("psr: skipped on data (fewer than 4096 samples)")

    # (3) linearity of the stationarized series
    if cfg.run_linearity:
        lin = linearity_test(w, cfg.n_surrogates, cfg.embedding, seed=cfg.seed, alpha=alpha)
        r.tests["linearity"] = lin
        r.linear = not lin.reject_null
        stage(f"linearity: {'linear' if r.linear else 'non-linear'} (D2={lin.statistic:.3f})")
    else:
        stage("linearity: skipped by configuration")

    # (4) ARIMA order selection on the stationarized series
    sel = select_order(x, dec.d, cfg.p_max, cfg.m_max, alpha,
                       robust_whiteness=cfg.robust_whiteness, whiteness_lags=cfg.whiteness_lags)
    r.arima = sel.model
    diag: FitDiagnostics = sel.diagnostics
    resid = _tag(diag.residuals, "arima_residuals")
    r.tests["arima_residual_whiteness"] = diag.whiteness
    r.diagnostics["arima"] = {
        **diag.to_dict(),
        "validated": sel.validated,
        "selection_history": sel.history,
        "mse": float(np.mean(resid.values**2)),
    }
    stage(f"select_order: ARIMA{sel.model.order} ({'validated' if sel.validated else 'not validated'})")

    # (5) Gaussianity of the pre-whitened data
    sw = shapiro_wilk(resid.head(min(cfg.sw_sample, len(resid))), alpha)
    r.tests["shapiro_wilk"] = sw
    stage(f"shapiro_wilk: W={sw.statistic:.4f} on {sw.details['n']} residuals")

    # (6) heteroskedasticity of the pre-whitened data
    if len(resid) >= 4096:
        psr_res = psr_test(resid, alpha=alpha)
        r.tests["psr_residuals"] = psr_res
        r.heteroskedastic = psr_res.reject_null
    arch = arch_lm_test(resid, cfg.arch_lags, alpha)
    r.tests["arch_lm"] = arch
    r.arch_effect = arch.reject_null
    sq = resid.replace(resid.values**2, stage="squared_residuals")
    r.tests["squared_residual_whiteness"] = whiteness_test(sq, max_lag=cfg.whiteness_lags, alpha=alpha)
    stage(f"residual heteroskedasticity: psr={r.heteroskedastic}, arch_lm={r.arch_effect}")

    # (7) GARCH on the residuals when an ARCH effect is present
    gauss_basis = "arima_residuals"
    if r.arch_effect:
        gs = select_garch(resid, cfg.garch_p_max, cfg.garch_q_max, alpha, cfg.whiteness_lags)
        r.garch = gs.model
        r.tests["garch_standardized_whiteness"] = gs.whiteness
        r.tests["garch_squared_standardized_whiteness"] = gs.whiteness_squared
        r.diagnostics["garch"] = {
            "validated": gs.validated,
            "candidates": [{"P": P, "Q": Q, "aic": a, "passed": ok} for P, Q, a, ok in gs.candidates],
        }
        # the innovations of a GARCH process are Gaussian only after scaling by sigma_k
        z = gs.standardized
        sw_z = shapiro_wilk(z.head(min(cfg.sw_sample, len(z))), alpha)
        r.tests["shapiro_wilk_standardized"] = sw_z
        gauss_basis = "garch_standardized_residuals"
        r.gaussian = not sw_z.reject_null
        r.plot_data["garch_standardized_acf"] = _acf_curve(z, "GARCH standardized residuals")
        r.plot_data["garch_squared_standardized_acf"] = _acf_curve(z.replace(z.values**2), "squared GARCH standardized residuals")
        stage(f"garch: GARCH({gs.model.P},{gs.model.Q}) persistence={gs.model.persistence:.4f}")
    else:
        r.gaussian = not sw.reject_null
        stage("garch: not needed (no ARCH effect)")
    r.diagnostics["gaussian_basis"] = gauss_basis

    # figure data
    pd = r.plot_data
    for k in range(min(3, len(x) // 100)):
        xk = difference(x, k)
        label = ["raw data", "differenced data", "double-differenced data"][k]
        pd[f"acf_d{k}"] = _acf_curve(xk, label)
        pd[f"pacf_d{k}"] = _acf_curve(xk, label, partial=True)
        pd[f"periodogram_d{k}"] = _spectrum_curve(xk, label)
    pd["residual_acf"] = _acf_curve(resid, "ARIMA residuals")
    pd["squared_residual_acf"] = _acf_curve(sq, "squared ARIMA residuals")


# --------------------------------------------------------------------------
# batch


@dataclass
class BatchResult:
    reports: list  # CharacterizationReport or None per input, in input order
    failures: dict  # index -> error message
    summary: dict

    def summary_rows(self) -> list[dict]:
        return self.summary["rows"]


_PROPERTIES = ("integrating", "heteroskedastic", "nonlinear", "gaussian", "arch_effect")


def _row(i: int, r: Optional[CharacterizationReport], err: Optional[str]) -> dict:
    row: dict[str, Any] = {"index": i, "status": "ok" if err is None else "failed", "error": err or ""}
    if r is None:
        return row
    row.update(
        label=r.input.get("meta", {}).get("label", r.input.get("meta", {}).get("path", str(i))),
        d=r.integration_order,
        heteroskedastic=r.heteroskedastic,
        nonlinear=None if r.linear is None else not r.linear,
        gaussian=r.gaussian,
        arch_effect=r.arch_effect,
        complete=r.complete,
    )
    if r.arima is not None:
        row.update(arima_order=f"({r.arima.p},{r.arima.d},{r.arima.m})", aic=r.arima.aic,
                   mse=r.diagnostics.get("arima", {}).get("mse"))
        row.update({f"arima_{k}": v for k, v in r.arima.coefficients().items()})
    if r.garch is not None:
        row.update(garch_order=f"({r.garch.P},{r.garch.Q})")
        row.update({f"garch_{k}": v for k, v in zip(r.garch.param_names(), r.garch.params().tolist())})
    return row


def summarize(reports: list, failures: dict) -> dict:
    """Percentages testing positive per property plus per-input rows."""
    ok = [r for r in reports if r is not None and r.complete]
    pct = {}
    for prop in _PROPERTIES:
        vals = []
        for r in ok:
            if prop == "integrating":
                vals.append(r.integration_order is not None and r.integration_order >= 1)
            elif prop == "nonlinear":
                if r.linear is not None:
                    vals.append(not r.linear)
            else:
                v = getattr(r, prop)
                if v is not None:
                    vals.append(bool(v))
        pct[prop] = 100.0 * float(np.mean(vals)) if vals else None
    d_counts = {}
    for r in ok:
        d_counts[str(r.integration_order)] = d_counts.get(str(r.integration_order), 0) + 1
    rows = [_row(i, r, failures.get(i)) for i, r in enumerate(reports)]
    return {
        "n_inputs": len(reports),
        "n_failed": len(failures),
        "n_incomplete": sum(1 for r in reports if r is not None and not r.complete),
        "percent_positive": pct,
        "integration_order_counts": d_counts,
        "rows": rows,
    }


def _characterize_one(args):
    s, cfg = args
    return characterize(s, cfg)


def batch_characterize(inputs: list, cfg: PipelineConfig = PipelineConfig(), max_workers: int = 1) -> BatchResult:
    """Characterize every input; failures are recorded and the batch continues.

    Inputs may be Series or zero-argument callables returning a Series (so
    loading errors are caught per input).  Results keep input order.
    """
    if not inputs:
        raise ArgumentError("batch needs at least one input")
    series: list = []
    failures: dict = {}
    for i, item in enumerate(inputs):
        try:
            series.append(item() if callable(item) else as_series(item))
        except (SeisnoiseError, OSError, ValueError) as exc:
            failures[i] = f"{type(exc).__name__}: {exc}"
            series.append(None)
    todo = [(i, s) for i, s in enumerate(series) if s is not None]
    reports: list = [None] * len(inputs)
    if max_workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as ex:
            results = list(ex.map(_characterize_one, [(s, cfg) for _, s in todo]))
    else:
        results = [characterize(s, cfg) for _, s in todo]
    for (i, _), rep in zip(todo, results):
        reports[i] = rep
        if not rep.complete:
            failures[i] = rep.error
    return BatchResult(reports, failures, summarize(reports, failures))
