"""Command-line interface.

Exit codes: 0 success, 1 argument/usage error, 2 computation error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ArgumentError, FetchError, ParseError, SeisnoiseError
from .io import (
    DEFAULT_ENDPOINT,
    DatasetRequest,
    emit_plot_data,
    fetch_fdsn,
    load_pipeline_config,
    load_process_spec,
    read_csv,
    write_batch,
    write_csv,
    write_report,
)
from .pipeline import PipelineConfig, batch_characterize, characterize
from .synth import generate

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE = 0, 1, 2

log = logging.getLogger("seisnoise")


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; 2 is reserved for computation errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config(args) -> PipelineConfig:
    overrides = {"seed": args.seed, "alpha": args.alpha}
    if args.config:
        return load_pipeline_config(args.config, **overrides)
    return PipelineConfig(**{k: v for k, v in overrides.items() if v is not None})


def _cmd_characterize(args) -> int:
    cfg = _config(args)
    s = read_csv(args.input, sample_rate=args.rate)
    report = characterize(s, cfg)
    out = Path(args.out)
    path = write_report(report, out / "report.json")
    print(f"report written to {path}")
    if args.plot_data:
        paths = emit_plot_data(report, args.plot_data)
        print(f"{len(paths)} plot-data files written to {args.plot_data}")
    if not report.complete:
        print(f"characterization incomplete: {report.error}", file=sys.stderr)
        return EXIT_COMPUTE
    v = report.verdicts
    print(" ".join(f"{k}={v[k]}" for k in v))
    return EXIT_OK


def _cmd_fetch(args) -> int:
    req = DatasetRequest(args.net, args.sta, args.cha, args.loc, args.start, args.end, args.rate)
    s = fetch_fdsn(req, args.endpoint, cache_dir=args.cache_dir, use_cache=not args.no_cache)
    out = Path(args.out) if args.out else Path(f"{req.label}.{req.start.strftime('%Y%m%dT%H%M%S')}.csv")
    write_csv(s, out)
    print(f"{len(s)} samples at {s.sample_rate:g} sps written to {out} (source: {s.meta['source']})")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    spec = load_process_spec(args.spec, seed=args.seed)
    s = generate(spec)
    out = Path(args.out) if args.out else Path(args.spec).with_suffix(".csv")
    write_csv(s, out)
    print(f"{len(s)} samples of {spec.kind} written to {out}")
    return EXIT_OK


def _read_manifest(path):
    entries = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    if not entries:
        raise ArgumentError(f"manifest {path} lists no inputs")
    return entries


def _cmd_batch(args) -> int:
    cfg = _config(args)
    base = Path(args.manifest).parent
    entries = _read_manifest(args.manifest)
    loaders = []
    for e in entries:
        p = Path(e) if Path(e).is_absolute() else base / e
        loaders.append(lambda p=p: read_csv(p, sample_rate=args.rate))
    result = batch_characterize(loaders, cfg, max_workers=args.workers)
    paths = write_batch(result, args.out)
    n_fail = len(result.failures)
    print(f"{len(entries)} inputs, {n_fail} failed; summary at {paths['summary_csv']}")
    for i, msg in sorted(result.failures.items()):
        print(f"  failed: {entries[i]}: {msg}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="seisnoise", description="Statistical characterization and ARIMA-GARCH modelling of noise records.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp):
        sp.add_argument("--config", help="flat TOML file with pipeline settings")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.add_argument("--alpha", type=float, help="override the significance level")
        sp.add_argument("--rate", type=float, help="sample rate (overrides CSV header)")

    c = sub.add_parser("characterize", help="characterize one CSV record")
    c.add_argument("input")
    common(c)
    c.add_argument("--out", default=".", help="directory for report.json (default: cwd)")
    c.add_argument("--plot-data", metavar="DIR", help="also write plot-data CSVs to DIR")
    c.set_defaults(func=_cmd_characterize)

    f = sub.add_parser("fetch", help="download a record from an FDSN timeseries service")
    f.add_argument("net")
    f.add_argument("sta")
    f.add_argument("cha")
    f.add_argument("loc")
    f.add_argument("start", help="UTC start, ISO 8601")
    f.add_argument("end", help="UTC end, ISO 8601")
    f.add_argument("--rate", type=float, default=20.0, help="expected sample rate (default 20)")
    f.add_argument("--endpoint", default=DEFAULT_ENDPOINT)
    f.add_argument("--cache-dir")
    f.add_argument("--no-cache", action="store_true")
    f.add_argument("--out", help="output CSV path")
    f.set_defaults(func=_cmd_fetch)

    s = sub.add_parser("simulate", help="generate a synthetic record from a process spec")
    s.add_argument("--spec", required=True, help="TOML process specification")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", help="output CSV path (default: spec name with .csv)")
    s.set_defaults(func=_cmd_simulate)

    b = sub.add_parser("batch", help="characterize every CSV listed in a manifest")
    b.add_argument("manifest", help="text file, one CSV path per line")
    common(b)
    b.add_argument("--out", default="batch_out")
    b.add_argument("--workers", type=int, default=1)
    b.set_defaults(func=_cmd_batch)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ArgumentError, ParseError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"seisnoise: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FetchError, SeisnoiseError, OSError) as exc:
        print(f"seisnoise: error: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
