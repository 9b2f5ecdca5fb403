import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import chi2

from seisnoise.errors import ArgumentError, DegenerateInputError
from seisnoise.garch import GarchModel, simulate_garch
from seisnoise.stattests import (
    TestOutcome,
    UnitRootConfig,
    adf_test,
    ar1_coefficient,
    arch_lm_test,
    ljung_box,
    pp_test,
    psr_test,
    shapiro_wilk,
    sw_weights,
    whiteness_test,
)
from seisnoise.stattests._mackinnon import tau_critical, tau_pvalue
from seisnoise.stattests.outcome import decide

from conftest import gwn


def ar1(n, phi, seed, burn=200):
    e = gwn(n + burn, seed)
    x = np.empty_like(e)
    x[0] = e[0]
    for k in range(1, len(e)):
        x[k] = phi * x[k - 1] + e[k]
    return x[burn:]


# --- TestOutcome decision logic


@given(
    st.floats(-50, 50, allow_nan=False),
    st.sampled_from(["left", "right", "two"]),
    st.floats(-10, 0),
    st.floats(0, 10),
)
def test_decision_consistency(stat, tail, lo, hi):
    o = TestOutcome("t", stat, tail, 0.05, lo, hi)
    expected = {"left": stat < lo, "right": stat > hi, "two": stat < lo or stat > hi}[tail]
    assert o.reject_null == expected == decide(stat, tail, lo, hi)


def test_outcome_round_trip_and_validation():
    o = TestOutcome("x", 1.5, "right", 0.05, None, 3.84, 0.22, {"lags": 1})
    assert TestOutcome.from_dict("x", o.to_dict()) == o
    with pytest.raises(ValueError):
        TestOutcome("x", 1.0, "left", 0.05)
    with pytest.raises(ValueError):
        TestOutcome("x", 1.0, "up", 0.05, 0.0, 0.0)


def test_pvalue_decision_agree_on_real_tests():
    x = ar1(3000, 0.9, 1)
    for o in (adf_test(x), pp_test(x), arch_lm_test(x), shapiro_wilk(x[:2000])):
        assert o.reject_null == (o.p_value < o.alpha)


# --- unit roots


def test_five_percent_critical_values():
    # -3.41 with a trend, -1.94 with no deterministic terms
    assert tau_critical(0.05, "trend") == pytest.approx(-3.41, abs=0.005)
    assert tau_critical(0.05, "none") == pytest.approx(-1.94, abs=0.005)
    assert tau_pvalue(-2.70, "trend") > 0.05
    assert tau_pvalue(-27.45, "none") < 0.05


def test_adf_matches_statsmodels():
    sm = pytest.importorskip("statsmodels.tsa.stattools")
    x = ar1(2000, 0.95, 2).cumsum() * 0.05 + ar1(2000, 0.7, 3)
    for det, reg in (("trend", "ct"), ("drift", "c"), ("none", "n")):
        for lags in (0, 4):
            ours = adf_test(x, UnitRootConfig(det, lags))
            ref = sm.adfuller(x, maxlag=lags, autolag=None, regression=reg)
            assert ours.statistic == pytest.approx(ref[0], rel=1e-8)
            assert ours.p_value == pytest.approx(ref[1], abs=2e-3)


def test_pp_matches_arch():
    unitroot = pytest.importorskip("arch.unitroot")
    x = ar1(3000, 0.98, 4)
    for det, trend in (("trend", "ct"), ("drift", "c"), ("none", "n")):
        ours = pp_test(x, UnitRootConfig(det))
        ref = unitroot.PhillipsPerron(x, trend=trend, lags=ours.details["bandwidth"], test_type="tau")
        assert ours.statistic == pytest.approx(ref.stat, rel=1e-8)


def test_schwert_rule():
    assert UnitRootConfig().resolve_lags(5000) == 31
    assert UnitRootConfig(lag_order=3).resolve_lags(5000) == 3
    with pytest.raises(ArgumentError):
        UnitRootConfig(deterministic="quadratic")


def test_unit_root_degenerate():
    with pytest.raises(DegenerateInputError):
        adf_test(np.ones(500))
    with pytest.raises(ArgumentError):
        pp_test(np.arange(10.0))


def test_adf_power_and_size():
    rw = np.mean([adf_test(gwn(5000, s).cumsum()).reject_null for s in range(100)])
    st_ = np.mean([adf_test(ar1(5000, 0.5, 100 + s)).reject_null for s in range(100)])
    assert rw <= 0.10
    assert st_ >= 0.99


def test_adf_pp_agree():
    agree = 0
    for s in range(100):
        x = gwn(5000, s).cumsum() if s % 2 else ar1(5000, 0.5, s)
        agree += adf_test(x).reject_null == pp_test(x).reject_null
    assert agree >= 90


def test_unit_root_size_under_garch_innovations():
    g = GarchModel(1, 1, 0.05, [0.15], [0.8])
    adf_r, pp_r = [], []
    for s in range(100):
        x = simulate_garch(g, 5000, seed=s).values.cumsum()
        adf_r.append(adf_test(x).reject_null)
        pp_r.append(pp_test(x).reject_null)
    print(f"random walk with GARCH innovations: ADF rejects {np.mean(adf_r):.2f}, PP {np.mean(pp_r):.2f}")
    # both stay interpretable as size estimates; neither collapses to always-reject
    assert np.mean(adf_r) < 0.5 and np.mean(pp_r) < 0.5


def test_ar1_coefficient():
    assert ar1_coefficient(gwn(50000, 5).cumsum()) >= 0.999
    n = 20000
    assert abs(ar1_coefficient(gwn(n, 6))) <= 3 / np.sqrt(n)
    assert ar1_coefficient(ar1(n, 0.5, 7)) == pytest.approx(0.5, abs=0.02)


# --- PSR


def test_psr_components_add_up():
    o = psr_test(gwn(16384, 8))
    assert o.t_component.statistic + o.ir_component.statistic == pytest.approx(o.tir_component.statistic, rel=1e-6)
    assert o.n_time_blocks == 16


def test_psr_critical_value_family():
    # 23.68 is the upper 5% point of chi-square(14)
    assert chi2.isf(0.05, 14) == pytest.approx(23.68, abs=0.01)
    o = psr_test(gwn(50000, 9))
    assert o.t_component.critical == pytest.approx(chi2.isf(0.05 / 3, o.n_time_blocks - 1))


def test_psr_size():
    rate = np.mean([psr_test(gwn(50000, s)).reject_null for s in range(100)])
    assert rate <= 0.10


def test_psr_variance_step_power():
    rej = 0
    for s in range(100):
        x = gwn(50000, s)
        x[25000:] *= 2.0  # variance x4
        rej += psr_test(x).reject_null
    assert rej >= 99


def test_psr_validation():
    with pytest.raises(ArgumentError):
        psr_test(gwn(1000, 0))
    with pytest.raises(DegenerateInputError):
        psr_test(np.zeros(8192))


@given(st.integers(0, 10_000), st.floats(1e-3, 1e3))
def test_psr_scale_invariant(seed, a):
    x = gwn(8192, seed)
    o1, o2 = psr_test(x), psr_test(a * x)
    assert o2.tir_component.statistic == pytest.approx(o1.tir_component.statistic, rel=1e-6, abs=1e-8)


# --- ARCH LM


@given(st.integers(0, 10_000), st.floats(1e-4, 1e4), st.integers(1, 4))
def test_arch_lm_scale_invariant(seed, a, L):
    x = gwn(1000, seed)
    assert arch_lm_test(a * x, L).statistic == pytest.approx(arch_lm_test(x, L).statistic, rel=1e-6)


def test_arch_lm_matches_statsmodels():
    diag = pytest.importorskip("statsmodels.stats.diagnostic")
    x = simulate_garch(GarchModel(1, 1, 0.1, [0.2], [0.7]), 3000, seed=3).values
    for L in (1, 3):
        ref = diag.het_arch(x - x.mean(), nlags=L)
        assert arch_lm_test(x, L).statistic == pytest.approx(ref[0], rel=1e-3)


def test_arch_lm_power():
    g = GarchModel(1, 0, 0.5, [0.5], [])
    assert np.mean([arch_lm_test(simulate_garch(g, 5000, seed=s)).reject_null for s in range(100)]) >= 0.99


def test_arch_lm_size_and_critical():
    o = arch_lm_test(gwn(5000, 1))
    assert o.critical == pytest.approx(3.84, abs=0.005)
    rate = np.mean([arch_lm_test(gwn(5000, s)).reject_null for s in range(200)])
    assert abs(rate - 0.05) <= 0.03


# --- Shapiro-Wilk


def test_sw_matches_scipy():
    from scipy.stats import shapiro

    for n, seed in ((20, 1), (200, 2), (2000, 3)):
        x = gwn(n, seed) ** 3 if seed == 2 else gwn(n, seed)
        ref = shapiro(x)
        o = shapiro_wilk(x)
        assert o.statistic == pytest.approx(ref.statistic, abs=1e-4)
        assert o.p_value == pytest.approx(ref.pvalue, abs=5e-3)


def test_sw_weights_antisymmetric():
    a = sw_weights(101).coefficients
    np.testing.assert_allclose(a, -a[::-1], atol=1e-12)
    assert np.sum(a**2) == pytest.approx(1.0, abs=1e-3)


@given(arrays(np.float64, st.integers(10, 300), elements=st.floats(-1e3, 1e3)), st.floats(1e-3, 1e3), st.floats(-1e3, 1e3))
def test_sw_affine_invariant(x, a, b):
    assume(np.ptp(x) > 1e-3)
    assert shapiro_wilk(a * x + b).statistic == pytest.approx(shapiro_wilk(x).statistic, abs=1e-9)


def test_sw_power_and_size():
    uni = np.mean([shapiro_wilk(np.random.default_rng(s).uniform(size=2000)).reject_null for s in range(100)])
    assert uni >= 0.99
    size = np.mean([shapiro_wilk(gwn(2000, s)).reject_null for s in range(200)])
    assert abs(size - 0.05) <= 0.03


def test_sw_limits():
    with pytest.raises(ArgumentError):
        shapiro_wilk(gwn(6000, 0))
    with pytest.raises(DegenerateInputError):
        shapiro_wilk(np.ones(50))


# --- whiteness


def test_ljung_box_matches_statsmodels():
    diag = pytest.importorskip("statsmodels.stats.diagnostic")
    x = ar1(3000, 0.1, 11)
    q, p = ljung_box(x, 20)
    ref = diag.acorr_ljungbox(x, lags=[20])
    assert q == pytest.approx(float(ref["lb_stat"].iloc[0]), rel=1e-8)
    assert p == pytest.approx(float(ref["lb_pvalue"].iloc[0]), rel=1e-6)


def test_whiteness_examples():
    assert not whiteness_test(gwn(50000, 12), max_lag=50).reject_null
    assert whiteness_test(ar1(50000, 0.3, 13), max_lag=50).reject_null


def test_whiteness_robust_band_on_garch():
    x = simulate_garch(GarchModel(1, 1, 0.05, [0.15], [0.8]), 50000, seed=14).values
    o = whiteness_test(x, 50, robust=True)
    assert o.details["band"] == "robust"
    assert not o.reject_null


def test_whiteness_validation():
    with pytest.raises(ArgumentError):
        whiteness_test(gwn(100, 0), max_lag=50)
    with pytest.raises(ArgumentError):
        whiteness_test(gwn(1000, 0), max_lag=5)


def test_unit_root_statistics_scale_free_on_large_i2_levels():
    # I(2) levels reach ~1e8; the regression must not be flagged as collinear
    x = gwn(50000, 77).cumsum().cumsum()
    for cfg in (UnitRootConfig("trend"), UnitRootConfig("drift")):
        a, b = adf_test(x, cfg).statistic, adf_test(1e4 * x, cfg).statistic
        assert np.isfinite(a) and a == pytest.approx(b, rel=1e-6)
        assert pp_test(x, cfg).statistic == pytest.approx(pp_test(1e4 * x, cfg).statistic, rel=1e-6)
