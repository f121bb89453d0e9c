import csv
import io
import json
from contextlib import redirect_stdout

import pytest

from mismatch_detect.cli import CSV_COLUMNS, main


def _run(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def test_bound_subcommand():
    code, out = _run(["bound", "--q", "4", "--n", "64", "--snr", "20"])
    assert code == 0
    assert "2.752e-05" in out


def test_bound_grid():
    code, out = _run(["bound", "--q", "4", "--n", "64", "--snr", "14:16:1"])
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "snr_db sigma wer_bound"
    assert len(rows) == 4


def test_codebook_subcommand():
    code, out = _run(["codebook", "--n", "3", "--q", "2"])
    assert code == 0
    assert out.strip() == "6"


def test_codebook_enumerate_and_verify():
    code, out = _run(["codebook", "--n", "2", "--q", "3", "--enumerate", "--verify-ab"])
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "2"
    assert lines[1:3] == ["0,2", "2,0"]
    assert lines[3] == "properties A and B: OK"


def test_trace_subcommand():
    code, out = _run(["trace", "--q", "2", "--received", "0.1,0.9,1.1,-0.2"])
    assert code == 0
    assert "pass 1:" in out
    assert "decoded=0 1 1 0" in out
    assert "iterations=1" in out


def test_usage_errors_exit_1(capsys):
    assert main(["bound", "--q", "4"]) == 1  # missing required flags
    assert main(["sweep", "--q", "4", "--n", "8"]) == 1  # missing detector
    assert main(["sweep", "--q", "4", "--n", "8", "--detector", "bogus",
                 "--snr", "20", "--trials", "10"]) == 1
    assert main(["trace", "--q", "2", "--received", "zap"]) == 1
    capsys.readouterr()


def test_runtime_errors_exit_2(capsys):
    # enumeration guard trips at runtime
    assert main(["codebook", "--n", "64", "--q", "16", "--verify-ab"]) == 2
    err = capsys.readouterr().err
    assert "guard" in err


def test_sweep_to_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    argv = ["sweep", "--q", "4", "--n", "16", "--detector", "ftd",
            "--channel", "ideal", "--snr", "16:18:1", "--trials", "500",
            "--seed", "42", "--out", str(out)]
    assert main(argv) == 0
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 4
    first = dict(zip(CSV_COLUMNS, rows[1]))
    assert first["snr_db"] == "16"
    assert first["detector"] == "ftd"
    assert first["constrained"] == "false"
    assert int(first["trials"]) == 500
    assert int(first["hist_t1"]) == 500  # FTD is single-pass
    float(first["wer"]), float(first["ci_low"]), float(first["ci_high"])
    assert "e" in first["wer"]  # scientific notation


def test_sweep_seed_determines_bytes(tmp_path):
    argv = ["sweep", "--q", "4", "--n", "16", "--detector", "kmeans-nominal",
            "--channel", "per-level", "--sigma-b", "0.1", "--snr", "17",
            "--trials", "1000", "--seed", "7", "--out"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(argv + [str(a)]) == 0
    assert main(argv + [str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_stdout_when_no_out():
    code, out = _run(["sweep", "--q", "4", "--n", "8", "--detector", "ftd",
                      "--snr", "20", "--trials", "100", "--seed", "1"])
    assert code == 0
    assert out.splitlines()[0] == ",".join(CSV_COLUMNS)


def test_sweep_config_file_with_cli_override(tmp_path):
    cfg = {"q": 4, "n": 16, "detector": "ftd", "channel": "ideal",
           "snr_start": 16.0, "snr_stop": 16.0, "snr_step": 1.0,
           "trials": 200, "seed": 3}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "o.csv"
    assert main(["sweep", "--config", str(path), "--trials", "300",
                 "--out", str(out)]) == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert int(rows[0]["trials"]) == 300  # CLI wins over the config file
    assert rows[0]["detector"] == "ftd"
