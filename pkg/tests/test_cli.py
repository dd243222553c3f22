"""Command-line interface: config validation and exit codes, sweep manifest
caching, CSV/plot round-trips, and the cheap check suites."""

import csv
import json
import os

import numpy as np
import pytest

from maglab import cli
from maglab.cli import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    ConfigError,
    load_config,
)

SWEEP_INI = """\
[model]
lam = 8.0
b = 0.0
d1 = 0.45
a = 0.2

[sweep]
lam = 8.0

[grid]
n = 96

[output]
dir = {out}
"""


def write(path, text):
    path.write_text(text)
    return str(path)


def test_load_config_defaults():
    cfg = load_config(None)
    assert cfg.model["lam"] == 30.0
    assert cfg.grid["n"] == 240
    assert cfg.sweep["lam"] == [30.0]
    assert set(cfg.checks) == {"mho", "landau", "blaschke", "partition"}


def test_load_config_rejects_unknown_keys(tmp_path):
    p = write(tmp_path / "bad.ini", "[model]\nlambda_typo = 3\n")
    with pytest.raises(ConfigError, match="unknown"):
        load_config(p)
    p2 = write(tmp_path / "bad2.ini", "[grid]\nresolution = 100\n")
    with pytest.raises(ConfigError, match="unknown"):
        load_config(p2)


def test_load_config_rejects_empty_sweep(tmp_path):
    p = write(tmp_path / "bad.ini", "[sweep]\nlam =\n")
    with pytest.raises(ConfigError, match="empty"):
        load_config(p)


def test_load_config_rejects_unknown_suite(tmp_path):
    p = write(tmp_path / "bad.ini", "[checks]\nsuites = mho nosuchsuite\n")
    with pytest.raises(ConfigError, match="nosuchsuite"):
        load_config(p)


def test_missing_config_file_exits_config_code(capsys):
    rc = cli.main(["spectrum", "--config", "/nonexistent/path.ini"])
    assert rc == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_invalid_model_exits_config_code(capsys):
    rc = cli.main(["splitting", "--a", "-0.3"])
    assert rc == EXIT_CONFIG


def test_partition_check_suite_passes(capsys):
    rc = cli.main(["partition-check"])
    assert rc == EXIT_OK
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_check_suites_registry():
    assert set(cli.CHECK_SUITES) == {"mho", "landau", "blaschke", "partition"}


def test_sweep_cache_and_plot_roundtrip(tmp_path, capsys):
    out = tmp_path / "results"
    config = write(tmp_path / "sweep.ini", SWEEP_INI.format(out=out))

    rc = cli.main(["sweep", "--config", config])
    assert rc == EXIT_OK
    captured = capsys.readouterr()
    assert "cache hit" not in captured.out

    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["points"]) == 1
    (key, entry), = manifest["points"].items()
    assert entry["status"] == "ok"
    assert (out / "points" / (key + ".json")).is_file()

    with open(out / "ratio.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == cli.RATIO_CSV_COLUMNS
    assert len(rows) == 2
    ratio = float(rows[1][rows[0].index("ratio")])
    assert 0.5 < ratio < 2.0

    # second run: all points served from the manifest cache
    rc = cli.main(["sweep", "--config", config])
    assert rc == EXIT_OK
    assert "cache hit" in capsys.readouterr().out

    # plots plus full-precision sidecar data
    rc = cli.main(["plot", "--config", config])
    assert rc == EXIT_OK
    svg = out / "ratio_vs_lambda.svg"
    sidecar = out / "ratio_vs_lambda.data.json"
    assert svg.is_file() and sidecar.is_file()
    data = json.loads(sidecar.read_text())
    ys = [y for s in data["series"] for y in s["y"]]
    assert ratio in ys                      # bit-exact round trip

    # a changed config invalidates the cache
    config2 = write(tmp_path / "sweep2.ini",
                    SWEEP_INI.format(out=out) + "\n# comment\n")
    cfg2 = load_config(config2)
    assert cfg2.config_hash != load_config(config).config_hash


def test_plot_without_results_warns(tmp_path, capsys):
    cfg = write(tmp_path / "c.ini", "[output]\ndir = %s\n" % (tmp_path / "x"))
    os.makedirs(tmp_path / "x")
    rc = cli.main(["plot", "--config", cfg])
    assert rc == EXIT_OK
    assert "no plottable results" in capsys.readouterr().err


def test_plot_rejects_broken_csv_schema(tmp_path, capsys):
    out = tmp_path / "res"
    os.makedirs(out)
    (out / "ratio.csv").write_text("lambda,b\n1.0,0.0\n")
    cfg = write(tmp_path / "c.ini", "[output]\ndir = %s\n" % out)
    rc = cli.main(["plot", "--config", cfg])
    assert rc == EXIT_CONFIG
    assert "missing column" in capsys.readouterr().err


def test_flux_refinement_helper():
    from maglab.grid_model import Grid2D, ModelParams
    params = ModelParams(lam=40.0, b=0.1, d1=0.4, a=0.15)
    coarse = Grid2D(half_extent=1.0, n=32)
    fine = cli._flux_safe(coarse, params)
    assert fine.spacing * 40.0 <= 0.45 + 1e-12
    assert fine.n % 2 == 0
    ok = Grid2D(half_extent=1.0, n=400)
    assert cli._flux_safe(ok, params) is ok
