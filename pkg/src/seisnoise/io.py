"""Reading and writing series, reports, plot data and configuration files,
plus a small client for the FDSN-style timeseries web service (ASCII output)."""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import re
import tempfile
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import ArgumentError, FetchError, ParseError
from .series import Series

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

PathLike = Union[str, os.PathLike]

DEFAULT_ENDPOINT = "https://service.iris.edu/irisws/timeseries/1/query"
SIG_DIGITS = 6

_RATE_HEADER = re.compile(r"^#\s*sample_rate\s*=\s*(\S+)\s*$")


# --------------------------------------------------------------------------
# CSV


def read_csv(path: PathLike, sample_rate: Optional[float] = None) -> Series:
    """One value per line; an optional ``# sample_rate=<sps>`` header line.

    ``sample_rate`` overrides the header.  Blank lines and other ``#`` lines
    are skipped.
    """
    path = Path(path)
    header_rate = None
    values = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _RATE_HEADER.match(line)
                if m:
                    try:
                        header_rate = float(m.group(1))
                    except ValueError:
                        raise ParseError(f"bad sample_rate header {line!r}", lineno) from None
                continue
            try:
                v = float(line.split(",")[0])
            except ValueError:
                raise ParseError(f"cannot parse {line!r} as a number", lineno) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {line!r}", lineno)
            values.append(v)
    rate = sample_rate if sample_rate is not None else header_rate
    if rate is None:
        raise ParseError(f"{path}: no sample rate (add '# sample_rate=<sps>' or pass --rate)")
    if not rate > 0:
        raise ParseError(f"{path}: sample rate must be positive, got {rate}")
    if not values:
        raise ParseError(f"{path}: no samples")
    return Series(np.array(values), rate, {"path": str(path), "label": path.stem})


def write_csv(s: Series, path: PathLike) -> Path:
    """Inverse of :func:`read_csv`; values are written with full precision."""
    path = Path(path)
    lines = [f"# sample_rate={s.sample_rate!r}"] + [repr(float(v)) for v in s.values]
    _atomic_write(path, ("\n".join(lines) + "\n").encode())
    return path


def _atomic_write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --------------------------------------------------------------------------
# FDSN timeseries client


def _utc(t) -> datetime:
    if isinstance(t, datetime):
        dt = t
    else:
        try:
            dt = datetime.fromisoformat(str(t).replace("Z", "+00:00"))
        except ValueError:
            raise ArgumentError(f"cannot parse timestamp {t!r}") from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


@dataclass(frozen=True)
class DatasetRequest:
    network: str
    station: str
    channel: str
    location: str = "00"
    start: datetime = None  # type: ignore[assignment]
    end: datetime = None  # type: ignore[assignment]
    sample_rate: float = 20.0

    def __post_init__(self):
        for name in ("network", "station", "channel", "location"):
            v = str(getattr(self, name)).strip()
            if not v:
                raise ArgumentError(f"{name} must be non-empty")
            object.__setattr__(self, name, v)
        if self.start is None or self.end is None:
            raise ArgumentError("start and end are required")
        object.__setattr__(self, "start", _utc(self.start))
        object.__setattr__(self, "end", _utc(self.end))
        if not self.start < self.end:
            raise ArgumentError(f"start {self.start.isoformat()} must precede end {self.end.isoformat()}")
        if not self.sample_rate > 0:
            raise ArgumentError("sample_rate must be positive")

    @property
    def duration(self) -> float:
        return (self.end - self.start).total_seconds()

    @property
    def expected_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))

    def _iso(self, t: datetime) -> str:
        return t.strftime("%Y-%m-%dT%H:%M:%S.%f").rstrip("0").rstrip(".")

    def query_params(self) -> dict:
        return {
            "net": self.network,
            "sta": self.station,
            "cha": self.channel,
            "loc": self.location,
            "starttime": self._iso(self.start),
            "endtime": self._iso(self.end),
            "output": "ascii",
        }

    def cache_key(self) -> str:
        """Pure function of the request fields."""
        payload = json.dumps({**self.query_params(), "sample_rate": float(self.sample_rate)}, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:32]

    @property
    def label(self) -> str:
        return f"{self.network}.{self.station}.{self.location}.{self.channel}"


def default_cache_dir() -> Path:
    base = os.environ.get("SEISNOISE_CACHE") or os.path.join(
        os.environ.get("XDG_CACHE_HOME", os.path.expanduser("~/.cache")), "seisnoise")
    return Path(base)


_TS_HEADER = re.compile(r"^TIMESERIES\s+(\S+),\s*(\d+)\s+samples,\s*([0-9.eE+-]+)\s+sps", re.I)


def parse_timeseries_ascii(text: str) -> tuple[np.ndarray, dict]:
    """Parse the ASCII timeseries format: a header line then one sample per line.

    Headers of the form ``TIMESERIES <id>, <n> samples, <rate> sps, ...`` are
    checked against the number of sample lines that follow them.  Lines with
    two columns (time, value) use the last column.
    """
    values: list[float] = []
    segments: list[dict] = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        m = _TS_HEADER.match(line)
        if m or (not segments and not values and not _is_number(line.split()[-1])):
            if current is not None:
                segments.append(current)
            current = {"id": m.group(1) if m else line, "declared": int(m.group(2)) if m else None,
                       "rate": float(m.group(3)) if m else None, "count": 0}
            continue
        token = line.replace(",", " ").split()[-1]
        try:
            v = float(token)
        except ValueError:
            raise FetchError(f"line {lineno}: unparseable sample {line!r}") from None
        if not math.isfinite(v):
            raise FetchError(f"line {lineno}: non-finite sample {line!r}")
        values.append(v)
        if current is None:
            current = {"id": None, "declared": None, "rate": None, "count": 0}
        current["count"] += 1
    if current is not None:
        segments.append(current)
    for seg in segments:
        if seg["declared"] is not None and seg["declared"] != seg["count"]:
            raise FetchError(f"truncated payload: header declares {seg['declared']} samples, got {seg['count']}")
    return np.array(values, dtype=float), {"segments": segments}


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def fetch_fdsn(
    req: DatasetRequest,
    endpoint_url: str = DEFAULT_ENDPOINT,
    cache_dir: Optional[PathLike] = None,
    use_cache: bool = True,
    timeout: float = 120.0,
) -> Series:
    """Download (or load from cache) the samples for ``req``.

    The raw response body is cached under ``cache_dir`` keyed by
    :meth:`DatasetRequest.cache_key`, written via a temporary file and an
    atomic rename so concurrent fetches cannot leave a partial entry.
    """
    cache = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    entry = cache / f"{req.cache_key()}.txt"
    body = None
    source = "cache"
    if use_cache and entry.exists():
        body = entry.read_bytes()
    if body is None:
        source = endpoint_url
        url = endpoint_url + ("&" if "?" in endpoint_url else "?") + urllib.parse.urlencode(req.query_params())
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                body = resp.read()
        except urllib.error.HTTPError as exc:
            raise FetchError(f"HTTP {exc.code} from {endpoint_url}: {exc.reason}") from exc
        except (urllib.error.URLError, OSError) as exc:
            raise FetchError(f"cannot reach {endpoint_url}: {exc}") from exc
    try:
        text = body.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FetchError("response is not UTF-8 text") from exc
    values, info = parse_timeseries_ascii(text)
    if values.size == 0:
        raise FetchError("response contains no samples")
    for seg in info["segments"]:
        if seg["rate"] is not None and abs(seg["rate"] - req.sample_rate) > 1e-6 * req.sample_rate:
            raise FetchError(f"sample rate mismatch: expected {req.sample_rate}, service reports {seg['rate']}")
    expected = req.expected_samples
    if abs(values.size - expected) > 0.01 * expected:
        raise FetchError(f"sample count mismatch: expected about {expected}, got {values.size}")
    if source != "cache" and use_cache:
        _atomic_write(entry, body)
    meta = {
        "network": req.network, "station": req.station, "channel": req.channel,
        "location": req.location, "start": req.start.isoformat(), "end": req.end.isoformat(),
        "label": req.label, "source": source, "segments": len(info["segments"]),
    }
    return Series(values, req.sample_rate, meta)


# --------------------------------------------------------------------------
# reports


def _clean(obj):
    """JSON-safe copy with floats rounded to SIG_DIGITS significant digits."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return None
        return float(f"{v:.{SIG_DIGITS}g}")
    return obj


def report_json(report) -> str:
    """Deterministic JSON text for a CharacterizationReport."""
    return json.dumps(_clean(report.to_dict()), sort_keys=True, indent=2) + "\n"


def write_report(report, path: PathLike) -> Path:
    path = Path(path)
    try:
        _atomic_write(path, report_json(report).encode())
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def read_report(path: PathLike):
    from .pipeline import CharacterizationReport

    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg})", exc.lineno) from exc
    return CharacterizationReport.from_dict(d)


def _fmt(v) -> str:
    return f"{float(v):.{SIG_DIGITS}g}"


def write_xy_csv(path: PathLike, x, y, x_label: str, y_label: str) -> Path:
    path = Path(path)
    lines = [f"{x_label},{y_label}"] + [f"{_fmt(a)},{_fmt(b)}" for a, b in zip(x, y)]
    _atomic_write(path, ("\n".join(lines) + "\n").encode())
    return path


def emit_plot_data(report, out_dir: PathLike) -> list[Path]:
    """One two-column CSV per curve in ``report.plot_data``."""
    out = Path(out_dir)
    paths = []
    for name in sorted(report.plot_data):
        c = report.plot_data[name]
        paths.append(write_xy_csv(out / f"{name}.csv", c["x"], c["y"], c["x_label"], c["y_label"]))
    return paths


def write_batch(result, out_dir: PathLike) -> dict:
    """Report per successful input, ``summary.csv`` with one row per input,
    ``summary.json`` with the aggregate percentages, and trajectory CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"reports": []}
    for i, rep in enumerate(result.reports):
        if rep is not None:
            paths["reports"].append(write_report(rep, out / f"report_{i:03d}.json"))
    rows = result.summary["rows"]
    cols = []
    for row in rows:
        for k in row:
            if k not in cols:
                cols.append(k)
    buf = []
    with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (_fmt(v) if isinstance(v, float) else ("" if v is None else v)) for k, v in row.items()})
    paths["summary_csv"] = out / "summary.csv"
    agg = {k: v for k, v in result.summary.items() if k != "rows"}
    agg["failures"] = {str(k): v for k, v in sorted(result.failures.items())}
    _atomic_write(out / "summary.json", (json.dumps(_clean(agg), sort_keys=True, indent=2) + "\n").encode())
    paths["summary_json"] = out / "summary.json"
    # parameter / AIC / MSE trajectories across datasets
    traj_keys = sorted({k for row in rows for k in row if k.startswith(("arima_ar", "arima_ma", "garch_")) and k != "garch_order"}
                       | {"aic", "mse"})
    for k in traj_keys:
        xs = [row["index"] for row in rows if isinstance(row.get(k), (int, float)) and row.get(k) is not None]
        ys = [row[k] for row in rows if isinstance(row.get(k), (int, float)) and row.get(k) is not None]
        if xs:
            buf.append(write_xy_csv(out / "trajectories" / f"{k}.csv", xs, ys, "dataset index", k))
    paths["trajectories"] = buf
    return paths


# --------------------------------------------------------------------------
# configuration files


def load_toml(path: PathLike) -> dict:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_pipeline_config(path: PathLike, **overrides):
    """Flat ``key = value`` file with PipelineConfig field names; unknown keys are errors."""
    from .pipeline import PipelineConfig

    d = load_toml(path)
    nested = [k for k, v in d.items() if isinstance(v, dict)]
    if nested:
        raise ParseError(f"{path}: configuration must be flat; found tables {nested}")
    d.update({k: v for k, v in overrides.items() if v is not None})
    return PipelineConfig.from_dict(d)


def load_process_spec(path: PathLike, seed: Optional[int] = None):
    """Process spec file: top-level ``kind``, ``n``, ``seed``, ``sample_rate`` and a
    ``[parameters]`` table."""
    from .synth import ProcessSpec

    d = load_toml(path)
    if seed is not None:
        d["seed"] = seed
    try:
        return ProcessSpec.from_dict(d)
    except KeyError as exc:
        raise ParseError(f"{path}: missing key {exc}") from None
