import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seisnoise.errors import ArgumentError
from seisnoise.nonlinearity import EmbeddingConfig, correlation_dimension
from seisnoise.synth import (
    FLAGSHIP_SIGMA2,
    KINDS,
    ProcessSpec,
    flagship_arima,
    flagship_garch,
    generate,
)


def test_flagship_constants():
    m = flagship_arima()
    assert m.order == (5, 2, 3)
    assert m.sigma2 == FLAGSHIP_SIGMA2 == 44.91
    g = flagship_garch()
    assert (g.c0, g.arch[0], g.garch[0]) == (0.31, 0.019, 0.98)
    assert g.persistence == pytest.approx(0.999)


@given(st.sampled_from(KINDS), st.integers(0, 2**31), st.integers(300, 3000))
def test_seed_determinism(kind, seed, n):
    params = {"arima": {"ar": [0.5], "ma": [0.2], "d": 1},
              "garch": {"c0": 0.1, "arch": [0.2], "garch": [0.7]},
              "arima_garch": {"ar": [0.5], "ma": [], "c0": 0.1, "arch": [0.2], "garch": [0.7]}}.get(kind, {})
    spec = ProcessSpec(kind, n, seed, params)
    a, b = generate(spec), generate(spec)
    assert a == b
    assert len(a) == n
    assert np.all(np.isfinite(a.values))


def test_gwn_variance():
    x = generate(ProcessSpec("gwn", 50000, 1, {"variance": 44.91}))
    assert np.var(x.values) == pytest.approx(44.91, rel=0.02)


def test_henon_dimension():
    x = generate(ProcessSpec("henon", 20000, 2))
    assert correlation_dimension(x, EmbeddingConfig(dimension=2, delay=1)).d2 == pytest.approx(1.2, abs=0.1)


def test_variance_step():
    x = generate(ProcessSpec("variance_step", 40000, 3, {"sigma1": 1.0, "sigma2": 2.0})).values
    assert np.var(x[20000:]) / np.var(x[:20000]) == pytest.approx(4.0, rel=0.05)


def test_bilinear_recursion():
    x = generate(ProcessSpec("bilinear", 5000, 4)).values
    assert np.isfinite(x).all()
    assert np.var(x) < 10  # second-order stationary at (0.4, 0.4)


def test_spec_validation():
    with pytest.raises(ArgumentError):
        ProcessSpec("chirp", 100)
    with pytest.raises(ArgumentError):
        ProcessSpec("gwn", 0)
    with pytest.raises(ArgumentError):
        ProcessSpec("arima", 100, parameters={"ar": [1.1]})
    with pytest.raises(ArgumentError):
        ProcessSpec("garch", 100, parameters={"c0": 0.1, "arch": [0.5], "garch": [0.6]})
    with pytest.raises(ArgumentError):
        ProcessSpec.from_dict({"kind": "gwn", "n": 10, "colour": "pink"})


def test_spec_round_trip():
    spec = ProcessSpec("arima_garch", 1000, 5, {"ar": [0.3], "d": 2, "c0": 0.2, "arch": [0.1], "garch": [0.8]}, 20.0)
    assert ProcessSpec.from_dict(spec.to_dict()) == spec
    assert generate(spec).sample_rate == 20.0
