#!/usr/bin/env python3
"""Fetch one hour of IU.ANMO BHZ (27 Feb 2010, 17:30-18:30 UTC) and characterize it.

Needs network access to the FDSN timeseries service; the download is cached,
so later runs work offline.  Writes report.json and plot data to --out.
"""
import argparse
import logging
from pathlib import Path

from seisnoise.io import DatasetRequest, emit_plot_data, fetch_fdsn, write_report
from seisnoise.pipeline import PipelineConfig, characterize

# reference values for the raw-data ADF statistic and the residual ARCH LM statistic
REFERENCE = {"adf_data": -2.70, "arch_lm": 15804.1}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--location", default="00")
    ap.add_argument("--out", type=Path, default=Path("anmo_2010-02-27"))
    ap.add_argument("--no-cache", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")

    req = DatasetRequest("IU", "ANMO", "BHZ", args.location, "2010-02-27T17:30:00", "2010-02-27T18:30:00", 20.0)
    s = fetch_fdsn(req, use_cache=not args.no_cache)
    print(f"{req.label}: {len(s)} samples (expected {req.expected_samples})")
    r = characterize(s, PipelineConfig())
    for name, t in r.tests.items():
        ref = REFERENCE.get(name)
        extra = f"  (reference {ref})" if ref is not None else ""
        print(f"{name:40s} {t.statistic:12.4g}  reject={t.reject_null}{extra}")
    print("verdicts:", r.verdicts)
    if r.arima:
        print("ARIMA", r.arima.order, "sigma2", round(r.arima.sigma2, 3))
    if r.garch:
        print(f"GARCH({r.garch.P},{r.garch.Q}) persistence {r.garch.persistence:.4f}")
    write_report(r, args.out / "report.json")
    emit_plot_data(r, args.out / "plot_data")
    print("written to", args.out)


if __name__ == "__main__":
    main()
