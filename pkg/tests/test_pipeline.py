import numpy as np
import pytest

from seisnoise.arima import ArimaModel, simulate_arima
from seisnoise.errors import ArgumentError
from seisnoise.garch import GarchModel
from seisnoise.io import report_json
from seisnoise.pipeline import CharacterizationReport, PipelineConfig, batch_characterize, characterize, summarize
from seisnoise.series import Series

from conftest import gwn

FAST = PipelineConfig(p_max=2, m_max=2, run_linearity=False)
STAGES = ["determine_d", "unit_root_tests", "psr", "linearity", "select_order", "shapiro_wilk",
          "residual heteroskedasticity", "garch"]


def i2_garch(seed, n=20000):
    m = ArimaModel(1, 2, 1, [0.5], [0.3], 1.0)
    return simulate_arima(m, n, seed=seed, innovation="garch-driven", garch=GarchModel(1, 1, 0.1, [0.2], [0.7]))


def check_invariants(r: CharacterizationReport):
    assert r.complete, r.error
    assert (r.garch is not None) == bool(r.arch_effect)
    assert r.diagnostics["differences_applied"] == r.integration_order == r.arima.d
    order = [next(i for i, s in enumerate(STAGES) if line.startswith(s)) for line in r.stage_log]
    assert order == sorted(order)
    assert len(r.stage_log) == len(STAGES)


@pytest.fixture(scope="module")
def gwn_report():
    return characterize(Series(gwn(10000, 1, 3.0), 20.0))


def test_gwn_report(gwn_report):
    r = gwn_report
    check_invariants(r)
    assert r.verdicts == {"integration_order": 0, "heteroskedastic": False, "linear": True,
                          "gaussian": True, "arch_effect": False}
    assert (r.arima.p, r.arima.d, r.arima.m) == (0, 0, 0)
    assert r.garch is None
    assert r.diagnostics["gaussian_basis"] == "arima_residuals"
    assert r.input["n_analyzed"] == 10000
    assert "series has 10000 samples" in r.diagnostics["warnings"][0]


def test_report_keys(gwn_report):
    d = gwn_report.to_dict()
    for key in ("input", "config", "integration_order", "tests", "arima", "garch", "diagnostics", "stage_log"):
        assert key in d
    for name, t in d["tests"].items():
        if "components" in t:
            t = t["components"]["T"]
        assert {"statistic", "p_value", "critical", "tail", "reject"} <= set(t), name
    assert {"orders", "coefficients", "std_errors", "sigma2", "aic", "bic"} <= set(d["arima"])


def test_dict_round_trip(gwn_report):
    again = CharacterizationReport.from_dict(gwn_report.to_dict())
    assert again.to_dict() == gwn_report.to_dict()


def test_i2_garch_report():
    r = characterize(i2_garch(2), FAST)
    check_invariants(r)
    assert r.integration_order == 2
    assert r.arch_effect and r.heteroskedastic
    assert r.diagnostics["gaussian_basis"] == "garch_standardized_residuals"
    assert "shapiro_wilk_standardized" in r.tests


def test_determinism():
    x = Series(i2_garch(3, 8000).values, 20.0)
    cfg = PipelineConfig(p_max=2, m_max=1, seed=5)
    assert report_json(characterize(x, cfg)) == report_json(characterize(x, cfg))


def test_degenerate_input_gives_incomplete_report():
    r = characterize(np.full(6000, 3.0), FAST)
    assert not r.complete
    assert "DegenerateInputError" in r.error
    assert r.stage_log[-1].startswith("aborted")


def test_n_samples_truncation():
    r = characterize(gwn(12000, 4), PipelineConfig(n_samples=6000, p_max=1, m_max=1, run_linearity=False))
    assert r.input == {"meta": {}, "sample_rate": 1.0, "n_total": 12000, "n_analyzed": 6000}


def test_plot_data(gwn_report):
    pd = gwn_report.plot_data
    for k in ("acf_d0", "pacf_d1", "periodogram_d2", "residual_acf", "squared_residual_acf"):
        assert len(pd[k]["x"]) == len(pd[k]["y"]) > 0


def test_config_validation_and_round_trip():
    cfg = PipelineConfig(alpha=0.01, embedding_delay=None)
    assert PipelineConfig.from_dict(cfg.to_dict()) == cfg
    assert cfg.embedding.delay is None
    with pytest.raises(ArgumentError):
        PipelineConfig.from_dict({"alpha": 0.05, "colour": 1})
    with pytest.raises(ArgumentError):
        PipelineConfig(alpha=1.5)
    with pytest.raises(ArgumentError):
        PipelineConfig(n_surrogates=10)


def test_batch_composition():
    null = [Series(gwn(10000, 100 + s), 20.0) for s in range(10)]
    integ = [i2_garch(200 + s, 10000) for s in range(10)]
    res = batch_characterize(null + integ, FAST)
    assert not res.failures
    for r in res.reports:
        check_invariants(r)
    pn = summarize(res.reports[:10], {})["percent_positive"]
    assert pn["integrating"] == 0.0
    # ARCH LM runs at 5%, so ten null inputs give zero rejections only ~60% of
    # the time; at most 2 of 10 is the 98.8% binomial bound
    assert pn["arch_effect"] <= 20.0
    d2 = sum(r.integration_order == 2 for r in res.reports[10:])
    arch = sum(r.arch_effect for r in res.reports[10:])
    assert d2 >= 8 and arch >= 9
    mixed = summarize(res.reports[5:15], {})["percent_positive"]
    assert abs(mixed["integrating"] - 50.0) <= 10.0
    assert abs(mixed["arch_effect"] - 50.0) <= 10.0


def test_batch_failure_policy_and_workers():
    def bad():
        raise OSError("no such file")

    good = [Series(gwn(6000, 7), 20.0), Series(gwn(6000, 8), 20.0)]
    cfg = PipelineConfig(p_max=1, m_max=1, run_linearity=False)
    res = batch_characterize([good[0], bad, good[1]], cfg)
    assert list(res.failures) == [1]
    assert res.reports[1] is None
    assert res.summary["n_failed"] == 1
    assert [row["status"] for row in res.summary_rows()] == ["ok", "failed", "ok"]
    par = batch_characterize(good, cfg, max_workers=2)
    assert [report_json(r) for r in par.reports] == [report_json(res.reports[0]), report_json(res.reports[2])]
    with pytest.raises(ArgumentError):
        batch_characterize([], cfg)
