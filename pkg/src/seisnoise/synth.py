"""Ground-truth process generators for calibration and Monte-Carlo checks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numba
import numpy as np

from .arima import ArimaModel, simulate_arima
from .errors import ArgumentError
from .garch import GarchModel, simulate_garch
from .series import Series

KINDS = ("arima", "garch", "arima_garch", "variance_step", "bilinear", "henon", "gwn")
MAP_BURN_IN = 1000

# reference coefficients of the flagship ARIMA(5,2,3)-GARCH(1,1) noise model
FLAGSHIP_AR = (1.29, -0.39, -0.17, 0.29, -0.24)
FLAGSHIP_MA = (-0.54, -0.62, 0.63)
FLAGSHIP_SIGMA2 = 44.91
FLAGSHIP_GARCH = {"c0": 0.31, "arch": (0.019,), "garch": (0.98,)}


def flagship_arima() -> ArimaModel:
    return ArimaModel(5, 2, 3, FLAGSHIP_AR, FLAGSHIP_MA, FLAGSHIP_SIGMA2)


def flagship_garch() -> GarchModel:
    g = FLAGSHIP_GARCH
    return GarchModel(1, 1, g["c0"], g["arch"], g["garch"])


@dataclass(frozen=True)
class ProcessSpec:
    """What to generate.

    ``parameters`` by kind:

    * arima: p/d/m orders implied by ``ar``, ``ma`` lists plus ``d`` and ``sigma2``
    * garch: ``c0``, ``arch`` (b list), ``garch`` (a list)
    * arima_garch: the arima keys plus the garch keys (sigma2 unused)
    * variance_step: ``sigma1``, ``sigma2`` (standard deviations before/after the midpoint)
    * bilinear: ``a`` (default 0.4), ``b`` (default 0.4), ``sigma`` (default 1)
    * henon: ``a`` (default 1.4), ``b`` (default 0.3)
    * gwn: ``variance`` (default 1)
    """

    kind: str
    n: int
    seed: Optional[int] = None
    parameters: dict = field(default_factory=dict)
    sample_rate: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ArgumentError(f"unknown process kind {self.kind!r}; expected one of {KINDS}")
        if int(self.n) != self.n or self.n < 1:
            raise ArgumentError(f"n must be a positive integer, got {self.n}")
        # building the models validates stationarity, invertibility and positivity
        if self.kind in ("arima", "arima_garch"):
            self.arima_model()
        if self.kind in ("garch", "arima_garch"):
            self.garch_model()
        pr = self.parameters
        if self.kind == "variance_step" and not (pr.get("sigma1", 1.0) > 0 and pr.get("sigma2", 2.0) > 0):
            raise ArgumentError("variance_step needs positive sigma1 and sigma2")
        if self.kind == "gwn" and not pr.get("variance", 1.0) > 0:
            raise ArgumentError("gwn variance must be positive")

    def arima_model(self) -> ArimaModel:
        pr = self.parameters
        ar = list(pr.get("ar", []))
        ma = list(pr.get("ma", []))
        return ArimaModel(len(ar), int(pr.get("d", 0)), len(ma), ar, ma, float(pr.get("sigma2", 1.0)),
                          mean=float(pr.get("mean", 0.0)))

    def garch_model(self) -> GarchModel:
        pr = self.parameters
        b = list(pr.get("arch", [0.1]))
        a = list(pr.get("garch", []))
        return GarchModel(len(b), len(a), float(pr.get("c0", 1.0)), b, a)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "n": self.n, "seed": self.seed,
                "sample_rate": self.sample_rate, "parameters": dict(self.parameters)}

    @classmethod
    def from_dict(cls, d):
        known = {"kind", "n", "seed", "sample_rate", "parameters"}
        extra = set(d) - known
        if extra:
            raise ArgumentError(f"unknown process-spec keys: {sorted(extra)}")
        return cls(d["kind"], int(d["n"]), d.get("seed"), dict(d.get("parameters", {})),
                   float(d.get("sample_rate", 1.0)))


@numba.njit(cache=True)
def _bilinear(e, a, b):  # pragma: no cover - compiled
    y = np.zeros(e.shape[0])
    for k in range(1, e.shape[0]):
        y[k] = a * y[k - 1] + b * y[k - 1] * e[k - 1] + e[k]
    return y


@numba.njit(cache=True)
def _henon(n, a, b, x0, y0):  # pragma: no cover - compiled
    out = np.empty(n)
    x, y = x0, y0
    for k in range(n):
        x, y = 1.0 - a * x * x + y, b * x
        out[k] = x
    return out


def generate(spec: ProcessSpec) -> Series:
    """Realize ``spec`` deterministically from its seed."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    pr = spec.parameters
    kind = spec.kind
    if kind == "gwn":
        x = np.sqrt(pr.get("variance", 1.0)) * rng.standard_normal(n)
    elif kind == "arima":
        x = simulate_arima(spec.arima_model(), n, seed=rng).values
    elif kind == "garch":
        x = simulate_garch(spec.garch_model(), n, seed=rng).values
    elif kind == "arima_garch":
        x = simulate_arima(spec.arima_model(), n, seed=rng, innovation="garch-driven",
                           garch=spec.garch_model()).values
    elif kind == "variance_step":
        scale = np.where(np.arange(n) < n // 2, pr.get("sigma1", 1.0), pr.get("sigma2", 2.0))
        x = scale * rng.standard_normal(n)
    elif kind == "bilinear":
        e = pr.get("sigma", 1.0) * rng.standard_normal(n + MAP_BURN_IN)
        x = _bilinear(e, float(pr.get("a", 0.4)), float(pr.get("b", 0.4)))[MAP_BURN_IN:]
    else:  # henon
        # a random start inside the basin; the burn-in settles it onto the attractor
        x0, y0 = rng.uniform(-0.1, 0.1, 2)
        x = _henon(n + MAP_BURN_IN, float(pr.get("a", 1.4)), float(pr.get("b", 0.3)), x0, y0)[MAP_BURN_IN:]
        if not np.all(np.isfinite(x)):
            raise ArgumentError("Henon orbit escaped to infinity; check a and b")
    return Series(x, spec.sample_rate, {"process": kind, "seed": spec.seed})
