import csv
import json
import subprocess
import sys
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from seisnoise.cli import main
from seisnoise.errors import ArgumentError, FetchError, ParseError
from seisnoise.io import (
    DatasetRequest,
    emit_plot_data,
    fetch_fdsn,
    load_pipeline_config,
    load_process_spec,
    parse_timeseries_ascii,
    read_csv,
    read_report,
    report_json,
    write_batch,
    write_csv,
    write_report,
)
from seisnoise.pipeline import PipelineConfig, batch_characterize, characterize
from seisnoise.series import Series

from conftest import gwn

FAST_TOML = "p_max = 1\nm_max = 1\nrun_linearity = false\n"


# --- CSV


def test_read_minimal_csv(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("1\n2\n3\n")
    s = read_csv(p, sample_rate=20)
    assert s.values.tolist() == [1.0, 2.0, 3.0]
    assert s.sample_rate == 20.0


def test_read_csv_header_and_override(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("# sample_rate=40\n# comment\n1.5\n\n2.5\n")
    assert read_csv(p).sample_rate == 40.0
    assert read_csv(p, sample_rate=10).sample_rate == 10.0


@pytest.mark.parametrize("body,line", [("1\nNaN\n3\n", 2), ("1\n2\nabc\n", 3), ("# sample_rate=20\n1\ninf\n", 3)])
def test_read_csv_errors(tmp_path, body, line):
    p = tmp_path / "bad.csv"
    p.write_text(body)
    with pytest.raises(ParseError) as exc:
        read_csv(p, sample_rate=1)
    assert exc.value.line == line


def test_read_csv_needs_rate(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("1\n2\n")
    with pytest.raises(ParseError):
        read_csv(p)


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=200),
       st.floats(0.01, 1000))
def test_csv_round_trip(tmp_path_factory, values, rate):
    p = tmp_path_factory.mktemp("rt") / "s.csv"
    s = Series(values, rate)
    t = read_csv(write_csv(s, p))
    assert np.array_equal(t.values, s.values)
    assert t.sample_rate == s.sample_rate


# --- FDSN client


class _Service:
    """Local stand-in for the timeseries web service."""

    def __init__(self):
        self.hits = []
        self.mode = "ok"
        svc = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                q = {k: v[0] for k, v in parse_qs(urlparse(self.path).query).items()}
                svc.hits.append(q)
                if svc.mode == "error":
                    self.send_error(500, "boom")
                    return
                start = datetime.fromisoformat(q["starttime"]).replace(tzinfo=timezone.utc)
                end = datetime.fromisoformat(q["endtime"]).replace(tzinfo=timezone.utc)
                n = int(round((end - start).total_seconds() * 20))
                declared = n + 5 if svc.mode == "truncated" else n
                rate = 40 if svc.mode == "rate" else 20
                vals = np.round(1000 * np.sin(np.arange(n) / 7.0), 3)
                lines = [f"TIMESERIES {q['net']}_{q['sta']}_{q['loc']}_{q['cha']}_D, {declared} samples, "
                         f"{rate} sps, {q['starttime']}, SLIST, FLOAT, COUNTS"]
                lines += [f"{v:.3f}" for v in vals]
                body = ("\n".join(lines) + "\n").encode()
                self.send_response(200)
                self.send_header("Content-Type", "text/plain")
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self.server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.url = f"http://127.0.0.1:{self.server.server_port}/query"
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)


@pytest.fixture
def service():
    svc = _Service()
    svc.thread.start()
    yield svc
    svc.server.shutdown()


def _req(**kw):
    base = dict(network="IU", station="ANMO", channel="BHZ", location="00",
                start="2010-02-27T17:30:00", end="2010-02-27T17:40:00")
    base.update(kw)
    return DatasetRequest(**base)


def test_table1_row1_request():
    req = _req(end="2010-02-27T18:30:00")
    assert req.expected_samples == 72000  # one hour at 20 sps
    q = req.query_params()
    assert q == {"net": "IU", "sta": "ANMO", "cha": "BHZ", "loc": "00", "starttime": "2010-02-27T17:30:00",
                 "endtime": "2010-02-27T18:30:00", "output": "ascii"}
    assert req.label == "IU.ANMO.00.BHZ"


def test_request_validation():
    with pytest.raises(ArgumentError):
        _req(end="2010-02-27T17:30:00")  # zero-length window
    with pytest.raises(ArgumentError):
        _req(station=" ")
    with pytest.raises(ArgumentError):
        _req(start="yesterday")


@given(st.sampled_from(["IU", "II", "US"]), st.sampled_from(["ANMO", "COLA"]), st.sampled_from(["00", "10"]))
def test_cache_key_pure(net, sta, loc):
    a = _req(network=net, station=sta, location=loc)
    b = _req(network=net, station=sta, location=loc)
    assert a.cache_key() == b.cache_key()
    assert a.cache_key() != _req(network=net, station=sta, location=loc, channel="BHN").cache_key()


def test_fetch_and_cache(service, tmp_path):
    req = _req()
    s1 = fetch_fdsn(req, service.url, cache_dir=tmp_path)
    assert len(s1) == 12000 and s1.sample_rate == 20.0
    assert service.hits[0]["output"] == "ascii" and service.hits[0]["loc"] == "00"
    s2 = fetch_fdsn(req, service.url, cache_dir=tmp_path)
    assert len(service.hits) == 1
    assert s2.meta["source"] == "cache"
    assert np.array_equal(s1.values, s2.values) and s1.values.tobytes() == s2.values.tobytes()
    s3 = fetch_fdsn(req, service.url, cache_dir=tmp_path, use_cache=False)
    assert len(service.hits) == 2 and np.array_equal(s3.values, s1.values)


@pytest.mark.parametrize("mode", ["error", "truncated", "rate"])
def test_fetch_failures(service, tmp_path, mode):
    service.mode = mode
    with pytest.raises(FetchError):
        fetch_fdsn(_req(), service.url, cache_dir=tmp_path)
    assert not list(tmp_path.glob("*.txt"))  # nothing cached on failure


def test_fetch_unreachable(tmp_path):
    with pytest.raises(FetchError):
        fetch_fdsn(_req(), "http://127.0.0.1:9/query", cache_dir=tmp_path, timeout=2)


def test_parse_two_column_and_plain():
    vals, info = parse_timeseries_ascii("TIMESERIES X, 2 samples, 20 sps\n2010-01-01T00:00:00 1.5\n2010-01-01T00:00:00.05 2.5\n")
    assert vals.tolist() == [1.5, 2.5]
    assert info["segments"][0]["rate"] == 20.0
    vals, _ = parse_timeseries_ascii("1\n2\n3\n")
    assert vals.tolist() == [1.0, 2.0, 3.0]


# --- reports


@pytest.fixture(scope="module")
def gwn_report():
    return characterize(Series(gwn(6000, 3), 20.0), PipelineConfig(p_max=1, m_max=1))


def test_gwn_report_json(gwn_report, tmp_path):
    d = json.loads(write_report(gwn_report, tmp_path / "r.json").read_text())
    assert d["integration_order"] == 0
    assert d["garch"] is None


def test_report_round_trip(gwn_report, tmp_path):
    p = write_report(gwn_report, tmp_path / "r.json")
    again = read_report(p)
    assert report_json(again) == p.read_text()
    assert again.verdicts == gwn_report.verdicts
    assert again.arima.order == gwn_report.arima.order
    assert again.tests.keys() == gwn_report.tests.keys()


def test_writer_deterministic_and_rounded(gwn_report):
    text = report_json(gwn_report)
    assert text == report_json(gwn_report)
    d = json.loads(text)
    assert len(repr(d["arima"]["sigma2"]).replace(".", "").lstrip("0")) <= 7


def test_read_report_bad_json(tmp_path):
    p = tmp_path / "r.json"
    p.write_text("{not json")
    with pytest.raises(ParseError):
        read_report(p)


def test_emit_plot_data(gwn_report, tmp_path):
    paths = emit_plot_data(gwn_report, tmp_path)
    assert {p.name for p in paths} >= {"acf_d0.csv", "periodogram_d1.csv", "residual_acf.csv"}
    with open(tmp_path / "periodogram_d0.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["frequency (Hz)", "power spectral density of raw data (units^2/Hz)"]
    assert all(len(r) == 2 for r in rows)


def test_write_batch(tmp_path):
    cfg = PipelineConfig(p_max=1, m_max=1, run_linearity=False)
    res = batch_characterize([Series(gwn(6000, s), 20.0) for s in range(3)], cfg)
    paths = write_batch(res, tmp_path)
    assert len(paths["reports"]) == 3
    with open(paths["summary_csv"]) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert json.loads(paths["summary_json"].read_text())["n_inputs"] == 3
    assert (tmp_path / "trajectories" / "aic.csv").exists()


# --- configuration files


def test_load_pipeline_config(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("alpha = 0.01\np_max = 3\n")
    cfg = load_pipeline_config(p, seed=9)
    assert (cfg.alpha, cfg.p_max, cfg.seed) == (0.01, 3, 9)
    p.write_text("alpha = 0.01\nbogus = 1\n")
    with pytest.raises(ArgumentError):
        load_pipeline_config(p)
    p.write_text("[pipeline]\nalpha = 0.01\n")
    with pytest.raises(ParseError):
        load_pipeline_config(p)
    p.write_text("alpha = \n")
    with pytest.raises(ParseError):
        load_pipeline_config(p)


def test_load_process_spec(tmp_path):
    p = tmp_path / "s.toml"
    p.write_text('kind = "gwn"\nn = 100\nseed = 1\n[parameters]\nvariance = 2.0\n')
    assert load_process_spec(p, seed=5).seed == 5
    p.write_text('kind = "gwn"\n')
    with pytest.raises(ParseError):
        load_process_spec(p)


# --- command line


def test_cli_characterize_in_cwd(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    write_csv(Series(gwn(3000, 4), 20.0), tmp_path / "noise.csv")
    assert main(["characterize", "noise.csv", "--alpha", "0.05"]) == 0
    d = json.loads((tmp_path / "report.json").read_text())
    assert d["config"]["alpha"] == 0.05
    assert d["integration_order"] == 0
    assert "integration_order=0" in capsys.readouterr().out


def test_cli_overrides_and_plot_data(tmp_path):
    write_csv(Series(gwn(6000, 5), 20.0), tmp_path / "n.csv")
    (tmp_path / "c.toml").write_text(FAST_TOML + "seed = 1\nalpha = 0.05\n")
    rc = main(["characterize", str(tmp_path / "n.csv"), "--config", str(tmp_path / "c.toml"),
               "--seed", "42", "--alpha", "0.01", "--out", str(tmp_path / "o"), "--plot-data", str(tmp_path / "pd")])
    assert rc == 0
    d = json.loads((tmp_path / "o" / "report.json").read_text())
    assert d["config"]["seed"] == 42 and d["config"]["alpha"] == 0.01
    assert (tmp_path / "pd" / "acf_d0.csv").exists()


def test_cli_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["characterize", "x.csv", "--bogus"])
    assert exc.value.code == 1
    assert "usage" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
    assert main(["characterize", str(tmp_path / "missing.csv")]) == 1
    (tmp_path / "bad.csv").write_text("# sample_rate=20\n1\nnan\n")
    assert main(["characterize", str(tmp_path / "bad.csv")]) == 1
    (tmp_path / "c.toml").write_text("nonsense_key = 1\n")
    (tmp_path / "ok.csv").write_text("# sample_rate=20\n1\n2\n")
    assert main(["characterize", str(tmp_path / "ok.csv"), "--config", str(tmp_path / "c.toml")]) == 1


def test_cli_computation_error(tmp_path):
    write_csv(Series(np.full(6000, 2.0), 20.0), tmp_path / "flat.csv")
    (tmp_path / "c.toml").write_text(FAST_TOML)
    rc = main(["characterize", str(tmp_path / "flat.csv"), "--config", str(tmp_path / "c.toml"), "--out", str(tmp_path)])
    assert rc == 2
    assert json.loads((tmp_path / "report.json").read_text())["complete"] is False


def test_cli_simulate_then_characterize(tmp_path):
    spec = tmp_path / "arima_garch.toml"
    spec.write_text('kind = "arima_garch"\nn = 20000\nseed = 3\nsample_rate = 20.0\n'
                    "[parameters]\nar = [0.5]\nma = [0.3]\nd = 2\nc0 = 0.1\narch = [0.2]\ngarch = [0.7]\n")
    assert main(["simulate", "--spec", str(spec)]) == 0
    out = tmp_path / "arima_garch.csv"
    assert read_csv(out).sample_rate == 20.0
    (tmp_path / "c.toml").write_text(FAST_TOML)
    assert main(["characterize", str(out), "--config", str(tmp_path / "c.toml"), "--out", str(tmp_path)]) == 0
    d = json.loads((tmp_path / "report.json").read_text())
    assert d["integration_order"] == 2
    assert d["verdicts"]["arch_effect"] is True and d["garch"] is not None


def test_cli_simulate_seed_override(tmp_path):
    spec = tmp_path / "g.toml"
    spec.write_text('kind = "gwn"\nn = 50\nseed = 3\n')
    main(["simulate", "--spec", str(spec), "--out", str(tmp_path / "a.csv")])
    main(["simulate", "--spec", str(spec), "--seed", "4", "--out", str(tmp_path / "b.csv")])
    assert not np.array_equal(read_csv(tmp_path / "a.csv").values, read_csv(tmp_path / "b.csv").values)


def test_cli_batch_continues_past_bad_path(tmp_path, capsys):
    for i in range(2):
        write_csv(Series(gwn(6000, 10 + i), 20.0), tmp_path / f"n{i}.csv")
    (tmp_path / "manifest.txt").write_text("# inputs\nn0.csv\nmissing.csv\nn1.csv\n")
    (tmp_path / "c.toml").write_text(FAST_TOML)
    rc = main(["batch", str(tmp_path / "manifest.txt"), "--config", str(tmp_path / "c.toml"), "--out", str(tmp_path / "b")])
    assert rc == 0
    summary = json.loads((tmp_path / "b" / "summary.json").read_text())
    assert summary["n_failed"] == 1 and "1" in summary["failures"]
    assert "missing.csv" in capsys.readouterr().err
    with open(tmp_path / "b" / "summary.csv") as fh:
        assert len(list(csv.DictReader(fh))) == 3


def test_cli_fetch(service, tmp_path):
    out = tmp_path / "anmo.csv"
    rc = main(["fetch", "IU", "ANMO", "BHZ", "00", "2010-02-27T17:30:00", "2010-02-27T17:35:00",
               "--endpoint", service.url, "--cache-dir", str(tmp_path / "cache"), "--out", str(out)])
    assert rc == 0
    assert len(read_csv(out)) == 6000
    service.mode = "error"
    rc = main(["fetch", "IU", "ANMO", "BHZ", "00", "2010-02-27T17:30:00", "2010-02-27T17:35:00",
               "--endpoint", service.url, "--no-cache", "--out", str(out)])
    assert rc == 2
    rc = main(["fetch", "IU", "ANMO", "BHZ", "00", "2010-02-27T17:30:00", "2010-02-27T17:30:00",
               "--endpoint", service.url])
    assert rc == 1


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "seisnoise", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "characterize" in r.stdout
