import json
import math
import os

import numpy as np
import pandas as pd
import pytest

from main import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, main
from polyeval import NodeSequence
from result_store import ResultStore, load_points
from settings import RunConfig

SEGMENT = {"kind": "segment", "start": [-1, 0], "end": [1, 0]}


def write_config(tmp_path, name="config.json", **fields):
    data = {"domain": SEGMENT, "grids": {"generation_grid": 2000, "eval_grid": 500, "lebesgue_grid": 1000}}
    data.update(fields)
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def write_points(tmp_path, nodes, name="points.csv"):
    store = ResultStore(str(tmp_path))
    return str(store.save_points(NodeSequence(np.asarray(nodes, dtype=complex), "external"), name))


def test_generate_is_byte_reproducible(tmp_path):
    config = write_config(tmp_path, method="rm", n_target=50, seed=1)
    assert main(["generate", "--config", config, "--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(["generate", "--config", config, "--out", str(tmp_path / "b")]) == EXIT_OK
    first = (tmp_path / "a" / "points.csv").read_bytes()
    assert first == (tmp_path / "b" / "points.csv").read_bytes()
    assert first.startswith(b"index,re,im\n")
    assert main(["generate", "--config", config, "--out", str(tmp_path / "c"), "--threads", "4"]) == EXIT_OK
    assert first == (tmp_path / "c" / "points.csv").read_bytes()


def test_generate_writes_metadata(tmp_path):
    config = write_config(tmp_path, method="mh", n_target=15, seed=3)
    assert main(["generate", "--config", config, "--out", str(tmp_path)]) == EXIT_OK
    loaded = load_points(tmp_path / "points.csv")
    assert len(loaded) == 15
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["method"] == "mh"
    assert meta["seed"] == 3
    assert meta["alpha"] == pytest.approx(2.01)
    assert meta["config"]["n_target"] == 15
    assert meta["step_schedule"][9] == {"n": 10, "N_n": 102}
    assert meta["tracking"]["schedule"][10] == 102
    assert meta["tracking"]["checkpoints"][-1]["n"] == 15


def test_seed_flag_overrides_config(tmp_path):
    config = write_config(tmp_path, method="rm", n_target=10, seed=1)
    main(["generate", "--config", config, "--out", str(tmp_path / "a"), "--seed", "2"])
    meta = json.loads((tmp_path / "a" / "meta.json").read_text())
    assert meta["seed"] == 2


@pytest.mark.parametrize(
    "fields",
    [{"n_target": 0}, {"grids": {"generation_grid": 8}}, {"ensemble": 0}, {"method": "newton"}],
)
def test_invalid_configs_are_usage_errors(tmp_path, fields, capsys):
    config = write_config(tmp_path, **fields)
    assert main(["generate", "--config", config, "--out", str(tmp_path)]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_unreadable_config_is_a_usage_error(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["generate", "--config", str(broken)]) == EXIT_USAGE
    assert main(["generate", "--config", str(tmp_path / "missing.json")]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE


def test_degenerate_domain_is_a_usage_error(tmp_path):
    config = write_config(tmp_path, domain={"kind": "polygon", "vertices": [0, 1, 2]}, method="rm", n_target=5)
    assert main(["generate", "--config", config, "--out", str(tmp_path)]) == EXIT_USAGE


def test_output_path_that_is_a_file_fails_before_generating(tmp_path, capsys):
    config = write_config(tmp_path, method="rm", n_target=5)
    taken = tmp_path / "taken"
    taken.write_text("keep me")
    assert main(["generate", "--config", config, "--out", str(taken)]) == EXIT_USAGE
    assert main(["report", "--config", config, "--out", str(taken)]) == EXIT_USAGE
    assert taken.read_text() == "keep me"
    assert "Generated" not in capsys.readouterr().out


def test_missing_points_file(tmp_path):
    config = write_config(tmp_path)
    code = main(["interpolate", "--config", config, "--points", str(tmp_path / "nope.csv"), "--out", str(tmp_path)])
    assert code == EXIT_USAGE


def test_interpolate_constant_function(tmp_path, capsys):
    config = write_config(tmp_path, function="one")
    points = write_points(tmp_path, np.cos(np.pi * np.arange(10) / 9))
    assert main(["interpolate", "--config", config, "--points", points, "--out", str(tmp_path)]) == EXIT_OK
    trace = pd.read_csv(tmp_path / "error_trace.csv")
    assert list(trace.columns) == ["n", "error"]
    assert trace["error"].max() <= 1e-12
    assert "Saved error trace" in capsys.readouterr().out


def test_interpolate_rejects_poles_on_the_domain(tmp_path):
    config_path = tmp_path / "disk.json"
    config_path.write_text(json.dumps({"domain": {"kind": "disk"}, "function": "runge_complex"}))
    points = write_points(tmp_path, [0.2, -0.3j])
    assert main(["interpolate", "--config", str(config_path), "--points", points, "--out", str(tmp_path)]) == EXIT_USAGE


def test_lebesgue_single_node_and_equispaced_points(tmp_path, capsys):
    config = write_config(tmp_path, grids={"lebesgue_grid": 10_000})
    single = write_points(tmp_path, [0.25], "single.csv")
    assert main(["lebesgue", "--config", config, "--points", single, "--out", str(tmp_path / "one")]) == EXIT_OK
    series = pd.read_csv(tmp_path / "one" / "lebesgue.csv")
    assert series["lebesgue"].tolist() == [pytest.approx(1.0)]

    equispaced = write_points(tmp_path, np.linspace(-1, 1, 12), "equispaced.csv")
    assert main(["lebesgue", "--config", config, "--points", equispaced, "--out", str(tmp_path / "eq")]) == EXIT_OK
    series = pd.read_csv(tmp_path / "eq" / "lebesgue.csv")
    assert series["n"].tolist() == list(range(1, 13))
    assert series["lebesgue"].iloc[-1] == pytest.approx(51.21, rel=0.02)
    assert "log-log slope" in capsys.readouterr().out


def test_lebesgue_rejects_points_off_the_domain(tmp_path):
    config = write_config(tmp_path)
    points = write_points(tmp_path, [0.0, 2.0])
    assert main(["lebesgue", "--config", config, "--points", points, "--out", str(tmp_path)]) == EXIT_RUNTIME


def test_report_with_one_seed(tmp_path):
    config = write_config(tmp_path, method="rm", n_target=20, n_range=[5, 20], histogram_bins=10)
    assert main(["report", "--config", config, "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert len(report["seeds"]) == 1
    block = report["seeds"][0]
    assert block["status"] == "ok"
    assert block["report"]["records"]["n"] == list(range(1, 21))
    assert report["ensemble"] is None
    assert report["best_seed"] == 0
    histogram = pd.read_csv(tmp_path / "histogram.csv")
    assert list(histogram.columns) == ["bin_left", "bin_right", "density"]
    assert len(histogram) == 10


def test_report_ensemble(tmp_path):
    config = write_config(tmp_path, method="rm", n_target=20, n_range=[5, 20], seeds=[3, 4, 5])
    assert main(["report", "--config", config, "--out", str(tmp_path)]) == EXIT_OK
    report = json.loads((tmp_path / "report.json").read_text())
    assert [block["seed"] for block in report["seeds"]] == [3, 4, 5]
    ensemble = report["ensemble"]
    assert len(ensemble["per_n_mean"]) == 20
    assert math.isfinite(ensemble["mean_lebesgue_slope"])
    assert report["best_seed"] in (3, 4, 5)


def test_report_fails_only_when_every_seed_fails(tmp_path):
    config = write_config(tmp_path, method="rejection-random-leja", n_target=60, max_attempts=1, seeds=[1, 2])
    code = main(["report", "--config", config, "--out", str(tmp_path)])
    report = json.loads((tmp_path / "report.json").read_text())
    assert code == EXIT_RUNTIME
    assert [block["status"] for block in report["seeds"]] == ["failed", "failed"]
    assert all("BoundFailureError" in block["error"] for block in report["seeds"])


def test_thread_count_defaults_to_cpu_count(monkeypatch):
    monkeypatch.delenv("LEJA_THREADS", raising=False)
    monkeypatch.setattr(os, "cpu_count", lambda: 6)
    assert RunConfig.model_validate({"domain": SEGMENT}).threads == 6
    monkeypatch.setenv("LEJA_THREADS", "2")
    assert RunConfig.model_validate({"domain": SEGMENT}).threads == 2
    assert RunConfig.model_validate({"domain": SEGMENT}).generator_config().threads == 2
