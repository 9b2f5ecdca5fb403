#!/usr/bin/env python3
"""Monte Carlo size and power of the tests and of order selection.

Each experiment prints its rejection (or hit) rate over the requested seeds.
``--only`` picks experiments by name; the order-selection run on the default
grid is the slow one (about 20 s per seed at N=50000).

    python scripts/calibration.py --seeds 200 --only size
"""
import argparse
import time

import numpy as np

from seisnoise.arima import ArimaModel, select_order, simulate_arima
from seisnoise.garch import GarchModel
from seisnoise.stattests import adf_test, arch_lm_test, pp_test, psr_test, shapiro_wilk
from seisnoise.synth import ProcessSpec, generate

ARMA21 = ArimaModel(2, 0, 1, [1.2, -0.5], [0.4], 1.0)


def gwn(n, seed):
    return np.random.default_rng(seed).standard_normal(n)


def size(seeds):
    yield "ADF, random walk N=5000", [adf_test(gwn(5000, s).cumsum()).reject_null for s in seeds]
    yield "PP, random walk N=5000", [pp_test(gwn(5000, s).cumsum()).reject_null for s in seeds]
    yield "Shapiro-Wilk, GWN N=2000", [shapiro_wilk(gwn(2000, s)).reject_null for s in seeds]
    yield "ARCH LM, GWN N=5000", [arch_lm_test(gwn(5000, s)).reject_null for s in seeds]
    yield "PSR, GWN N=50000", [psr_test(gwn(50000, s)).reject_null for s in seeds]


def power(seeds):
    ar1 = ArimaModel(1, 0, 0, [0.5], [], 1.0)
    g = GarchModel(1, 1, 0.1, [0.2], [0.7])
    yield "ADF, AR(1) 0.5 N=5000", [adf_test(simulate_arima(ar1, 5000, seed=s)).reject_null for s in seeds]
    yield "ARCH LM, GARCH(1,1) N=5000", [
        arch_lm_test(generate(ProcessSpec("garch", 5000, s, {"c0": 0.1, "arch": g.arch, "garch": g.garch}))).reject_null
        for s in seeds]
    yield "PSR, variance step x4 N=50000", [
        psr_test(generate(ProcessSpec("variance_step", 50000, s, {"sigma1": 1.0, "sigma2": 2.0}))).reject_null
        for s in seeds]


def order(seeds):
    picks = []
    for s in seeds:
        sel = select_order(simulate_arima(ARMA21, 50000, seed=s), 0)
        picks.append((sel.model.p, sel.model.m))
        print(f"  seed {s}: ARMA{picks[-1]}{' validated' if sel.validated else ''}")
    yield "select_order picks (2,1), default grid", [p == (2, 1) for p in picks]


EXPERIMENTS = {"size": size, "power": power, "order": order}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--only", nargs="*", choices=sorted(EXPERIMENTS), default=["size", "power"])
    args = ap.parse_args()
    seeds = range(args.seeds)
    for name in args.only:
        t0 = time.perf_counter()
        for label, flags in EXPERIMENTS[name](seeds):
            print(f"{label:40s} rate {np.mean(flags):.3f} ({sum(flags)}/{len(flags)})")
        print(f"[{name}: {time.perf_counter() - t0:.0f} s]")


if __name__ == "__main__":
    main()
