"""Bundled experiments, sweep machinery, and the command-line front end."""
import json

import pytest

from transduce.cli import _worker_count, main, parse_grid
from transduce.config import bundled_config_path, load_config
from transduce.experiments import (EXPERIMENTS, SWEEP_COLUMNS, SweepAxisError,
                                   UnknownExperimentError, run_experiment,
                                   run_sweep, set_config_value)

SUMMARY_HEADER = "name,engine_value,reference_value,tolerance,status"


@pytest.mark.parametrize("name", sorted(EXPERIMENTS))
def test_experiment_reproduces_its_reference_rows(name, tmp_path):
    rows, out = run_experiment(name, out_dir=tmp_path)
    assert out == tmp_path / name
    failed = [r.name for r in rows if not r.passed]
    assert failed == []
    # summary plus at least one plot-ready artifact
    csvs = sorted(p.name for p in out.glob("*.csv"))
    assert "summary.csv" in csvs
    assert len(csvs) >= 2
    assert (out / "metadata.json").exists()


def test_unknown_experiment_names_the_valid_ones():
    with pytest.raises(UnknownExperimentError, match="fig2a"):
        run_experiment("does_not_exist")


def test_summary_csv_uses_crlf_and_10_digit_floats(tmp_path):
    rows, out = run_experiment("noise_budget", out_dir=tmp_path)
    raw = (out / "summary.csv").read_bytes()
    assert raw.count(b"\r\n") == len(rows) + 1
    lines = raw.decode().split("\r\n")
    assert lines[0] == SUMMARY_HEADER
    first = lines[1].split(",")
    assert first[0] == rows[0].name
    assert first[1] == format(rows[0].engine_value, ".10g")
    assert first[4] in ("pass", "fail")


def test_metadata_records_the_reproduction_context(tmp_path):
    run_experiment("s3c", out_dir=tmp_path, seed=123, workers=2)
    meta = json.loads((tmp_path / "s3c" / "metadata.json").read_text())
    assert meta["experiment"] == "s3c"
    assert meta["seed"] == 123
    assert meta["workers"] == 2
    assert set(meta) >= {"config", "timestamp_utc", "version"}


def test_artifacts_are_byte_identical_for_a_fixed_seed(tmp_path):
    _, out_a = run_experiment("fig2c", out_dir=tmp_path / "a", seed=77)
    _, out_b = run_experiment("fig2c", out_dir=tmp_path / "b", seed=77)
    for name in ("summary.csv", "fig2c_decay.csv", "fig2c_thresholds.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    _, out_c = run_experiment("fig2c", out_dir=tmp_path / "c", seed=78)
    assert ((out_a / "fig2c_decay.csv").read_bytes()
            != (out_c / "fig2c_decay.csv").read_bytes())


def test_sweep_rows_follow_the_grid_and_name_the_axis(tmp_path):
    grid = [2.5e5, 7.5e5, 2e6]
    rows, path = run_sweep("fig3d", "ensemble.d_M", grid, out_dir=tmp_path)
    assert path.name == "sweep_ensemble_d_M.csv"
    assert [r[0] for r in rows] == grid
    header = path.read_bytes().decode().split("\r\n")[0]
    assert header == ",".join(["ensemble.d_M"] + list(SWEEP_COLUMNS))
    col = list(SWEEP_COLUMNS).index("eta_optimal_storage") + 1
    etas = [r[col] for r in rows]
    assert etas[0] < etas[1] < etas[2]


def test_sweep_workers_do_not_change_the_rows(tmp_path):
    grid = [2.5e5, 7.5e5]
    rows1, _ = run_sweep("fig3d", "ensemble.d_M", grid,
                         out_dir=tmp_path / "w1", workers=1)
    rows2, _ = run_sweep("fig3d", "ensemble.d_M", grid,
                         out_dir=tmp_path / "w2", workers=2)
    assert rows1 == rows2


def test_sweep_rejects_bad_axes_before_writing_anything(tmp_path):
    with pytest.raises(SweepAxisError, match="section.field"):
        run_sweep("fig3d", "nonsense", [1.0], out_dir=tmp_path)
    assert not (tmp_path / "fig3d").exists()
    cfg = load_config(bundled_config_path())
    with pytest.raises(SweepAxisError, match="does not exist"):
        set_config_value(cfg, "ensemble.not_a_field", 1.0)
    with pytest.raises(SweepAxisError, match="not numeric"):
        set_config_value(cfg, "storage.backward", 1.0)
    with pytest.raises(SweepAxisError, match="channel"):
        set_config_value(cfg, "fields.w", 1.0)
    with pytest.raises(SweepAxisError, match="too many"):
        set_config_value(cfg, "ensemble.d_M.x", 1.0)


def test_grid_specs_cover_linear_log_and_lists():
    assert parse_grid("0:1:3") == [0.0, 0.5, 1.0]
    assert parse_grid("log:1:100:3") == pytest.approx([1.0, 10.0, 100.0])
    assert parse_grid("1e5,7.5e5") == [1e5, 7.5e5]
    assert parse_grid("5") == [5.0]
    assert parse_grid("") == []
    with pytest.raises(ValueError, match="log grid"):
        parse_grid("log:1:100")
    with pytest.raises(ValueError, match="grid"):
        parse_grid("0:1:0")


def test_cli_exit_codes_follow_the_contract(tmp_path, capsys):
    assert main(["run", "noise_budget", "--out", str(tmp_path)]) == 0
    assert "rows pass" in capsys.readouterr().out
    assert main(["run", "nope", "--out", str(tmp_path)]) == 2
    assert "valid names" in capsys.readouterr().err
    assert main(["sweep", "fig3d", "--axis", "bad", "--grid", "1:2:2",
                 "--out", str(tmp_path)]) == 2
    assert main(["sweep", "fig3d", "--axis", "ensemble.d_M",
                 "--grid", "bad:grid", "--out", str(tmp_path)]) == 2
    assert main(["validate", "--config", str(bundled_config_path())]) == 0
    broken = tmp_path / "broken.cfg"
    broken.write_text("rabi_w_mhz = 1.8\n")
    assert main(["validate", "--config", str(broken)]) == 1


def test_worker_count_comes_from_flag_then_environment(monkeypatch):
    ns = lambda w: type("Args", (), {"workers": w})()
    monkeypatch.delenv("TRANSDUCE_WORKERS", raising=False)
    assert _worker_count(ns(None)) == 1
    assert _worker_count(ns(4)) == 4
    assert _worker_count(ns(-2)) == 1
    monkeypatch.setenv("TRANSDUCE_WORKERS", "3")
    assert _worker_count(ns(None)) == 3
    assert _worker_count(ns(2)) == 2
    monkeypatch.setenv("TRANSDUCE_WORKERS", "junk")
    assert _worker_count(ns(None)) == 1
