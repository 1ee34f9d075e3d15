"""CLI contract: exit codes, output files, determinism."""
import json

import numpy as np
import pytest

from odeproxy.cli import main
from odeproxy.fpa import fpa_model
from odeproxy.network import save_model


def run(args):
    return main(args)


def fast(extra, out):
    return extra + ["--segments", "10", "--samples", "200", "--out", str(out)]


def default_segments(extra, out):
    # the bundled benchmark needs the default 20 segments to come out Safe
    return extra + ["--samples", "200", "--out", str(out)]


# -- errorbound -------------------------------------------------------------

def test_errorbound_outputs(tmp_path):
    assert run(fast(["errorbound"], tmp_path)) == 0
    report = json.loads((tmp_path / "errorbound.json").read_text())
    assert report["config"]["n_segments"] == 10
    assert "omega_eps" in report["error_bound"]
    assert report["comparison"]["width_ratio"] > 1.0
    assert report["notes"]  # bundled benchmark carries its input-set caveat
    seg_lines = (tmp_path / "segments.csv").read_text().strip().splitlines()
    assert len(seg_lines) == 11  # header + one row per segment
    tube_lines = (tmp_path / "tube.csv").read_text().strip().splitlines()
    assert len(tube_lines) == 11
    assert seg_lines[0].startswith("segment,t_lo,t_hi,lo_1")


def test_errorbound_custom_model_needs_problem(tmp_path):
    mpath = tmp_path / "model.json"
    save_model(fpa_model(), mpath)
    assert run(fast(["errorbound", "--model", str(mpath)], tmp_path)) == 2


def test_errorbound_custom_model_and_problem(tmp_path):
    mpath = tmp_path / "model.json"
    save_model(fpa_model(), mpath)
    ppath = tmp_path / "problem.json"
    ppath.write_text(json.dumps({
        "input_set": {"lo": [0.45, 0.72, 0.47, 0.19, -0.64],
                      "hi": [0.55, 0.88, 0.58, 0.24, -0.53]},
        "safe_set": {"lo": [0.2, 0.3], "hi": [0.6, 0.85]},
        "output_dims": [1, 2],
        "direction": "node-via-resnet"}))
    args = fast(["errorbound", "--model", str(mpath),
                 "--problem", str(ppath)], tmp_path)
    assert run(args) == 0


def test_errorbound_interval_method(tmp_path):
    args = fast(["errorbound", "--error-method", "interval"], tmp_path)
    assert run(args) == 0
    report = json.loads((tmp_path / "errorbound.json").read_text())
    assert report["error_bound"]["method"] == "interval"


# -- verify -----------------------------------------------------------------

def test_verify_safe_exit_zero(tmp_path):
    args = default_segments(["verify", "--direction", "node-via-resnet"],
                            tmp_path)
    assert run(args) == 0
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert verdict["verdict"]["result"] == "Safe"
    assert verdict["problem"]["direction"] == "node-via-resnet"


def test_verify_sander_exit_one(tmp_path):
    args = fast(["verify", "--method", "sander"], tmp_path)
    assert run(args) == 1
    verdict = json.loads((tmp_path / "verdict.json").read_text())
    assert verdict["verdict"]["result"] == "Unknown"


def test_verify_no_enclosure_exit_three(tmp_path):
    mpath = tmp_path / "stiff.json"
    mpath.write_text(json.dumps({
        "dim": 2,
        "layers": [{"type": "linear",
                    "weight": [[100.0, 0.0], [0.0, 100.0]],
                    "bias": [0.0, 0.0]}]}))
    ppath = tmp_path / "problem.json"
    ppath.write_text(json.dumps({
        "input_set": {"lo": [1.0, 1.0], "hi": [1.1, 1.1]},
        "safe_set": {"lo": [-1e9, -1e9], "hi": [1e9, 1e9]},
        "output_dims": [1, 2],
        "direction": "node-via-resnet"}))
    args = ["verify", "--model", str(mpath), "--problem", str(ppath),
            "--segments", "1", "--out", str(tmp_path)]
    assert run(args) == 3


def test_verify_bad_model_file_exit_two(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    args = fast(["verify", "--model", str(bad)], tmp_path)
    assert run(args) == 2


def test_verify_missing_file_exit_two(tmp_path):
    args = fast(["verify", "--model", str(tmp_path / "absent.json")], tmp_path)
    assert run(args) == 2


def test_verify_plot_writes_figure(tmp_path):
    args = default_segments(["verify", "--plot"], tmp_path)
    assert run(args) == 0
    assert (tmp_path / "verify.png").stat().st_size > 0


# -- compare ----------------------------------------------------------------

def test_compare_outputs(tmp_path):
    assert run(fast(["compare"], tmp_path)) == 0
    report = json.loads((tmp_path / "compare.json").read_text())
    assert report["comparison"]["volume_ratio"] > 1.0
    lines = (tmp_path / "compare.csv").read_text().strip().splitlines()
    # 5-D model: C(5,2) = 10 pairs x 3 nested boxes + header
    assert len(lines) == 31
    assert "sander_cube" in lines[3]


# -- sample -----------------------------------------------------------------

def test_sample_outputs_and_soundness(tmp_path):
    assert run(fast(["sample"], tmp_path)) == 0
    lines = (tmp_path / "samples.csv").read_text().strip().splitlines()
    assert len(lines) == 401  # header + 200 node + 200 resnet rows
    kinds = {line.split(",")[0] for line in lines[1:]}
    assert kinds == {"node", "resnet"}
    sound = json.loads((tmp_path / "soundness.json").read_text())
    for direction in ("node-via-resnet", "resnet-via-node"):
        assert sound["reports"][direction]["n_violations"] == 0


def test_sample_deterministic_bytes(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert run(fast(["sample"], out1)) == 0
    assert run(fast(["sample"], out2)) == 0
    assert (out1 / "samples.csv").read_bytes() == (out2 / "samples.csv").read_bytes()


def test_sample_zero_count_rejected(tmp_path):
    args = ["sample", "--samples", "0", "--out", str(tmp_path)]
    assert run(args) == 2


# -- misc -------------------------------------------------------------------

def test_unknown_command_rejected():
    with pytest.raises(SystemExit):
        run(["frobnicate"])


def test_reports_embed_config(tmp_path):
    assert run(fast(["compare", "--seed", "5"], tmp_path)) == 0
    report = json.loads((tmp_path / "compare.json").read_text())
    cfg = report["config"]
    assert set(cfg) >= {"n_segments", "error_method", "samples", "seed",
                        "exp_order", "bound_method"}
    assert cfg["seed"] == 5
