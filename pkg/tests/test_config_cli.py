"""Configuration parsing, presets and the command-line interface."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from sfgsim import cli
from sfgsim.config import RunConfig, parse_config, render_config
from sfgsim.errors import ConfigError
from sfgsim.presets import PRESETS


def test_minimal_config_parses():
    cfg = parse_config("kappa=0.01\ngamma1=1\n")
    assert cfg.kappa == 0.01 and cfg.gamma1 == 1.0


def test_comments_and_blank_lines():
    cfg = parse_config("# a comment\n\nkappa=0.02  # trailing\n")
    assert cfg.kappa == 0.02


def test_unknown_key_reports_line_number():
    with pytest.raises(ConfigError) as err:
        parse_config("kappa=0.01\n\nnot_a_key=1\n")
    assert "line 3" in str(err.value)
    assert err.value.line == 3


def test_unparsable_number_reports_line_number():
    with pytest.raises(ConfigError) as err:
        parse_config("kappa=banana\n")
    assert "line 1" in str(err.value)


def test_invariant_violation_names_the_invariant():
    with pytest.raises(ConfigError) as err:
        parse_config("kappa=-1\n")
    assert "kappa > 0" in str(err.value)


def test_reproduce_key():
    cfg = parse_config("reproduce=fig7\n")
    assert cfg.reproduce == "fig7"
    with pytest.raises(ConfigError):
        parse_config("reproduce=fig9\n")


def test_round_trip_is_identity():
    samples = [
        RunConfig(),
        RunConfig(command="spectrum", kappa=0.02, eps1=400 + 3j, eps2=2400,
                  n_omega=101, omega_min=-5.0, omega_max=5.0),
        RunConfig(command="simulate", mode="tw", dt=5e-4, t_max=3.0,
                  n_traj=50, seed=7, alpha1_0=707.1, alpha2_0=707.1),
        RunConfig(command="reproduce", reproduce="fig4", output="x"),
    ]
    for cfg in samples:
        text = render_config(cfg)
        again = parse_config(text)
        again.command = cfg.command  # command comes from the CLI verb
        assert again == cfg
        assert render_config(again) == text


def test_preset_parameter_fidelity():
    # literal table of the bound scenario parameters
    assert PRESETS["fig7"].parameters["run"] == {
        "kappa": 0.01, "gamma1": 1.0, "gamma2": 40.0, "gamma3": 2.0,
        "eps1": 400.0, "eps2": 2400.0,
    }
    assert PRESETS["fig8"].parameters["run"] == {
        "kappa": 0.01, "gamma1": 1.0, "gamma2": 1.0, "gamma3": 10.0,
        "eps1": 1000.0, "eps2": 1000.0,
    }
    tw = PRESETS["fig1"].parameters["run"]
    assert tw["kappa"] == 0.01
    assert tw["alpha1_0"] == pytest.approx(1000.0 / np.sqrt(2.0), rel=1e-15)
    assert tw["alpha2_0"] == pytest.approx(1000.0 / np.sqrt(2.0), rel=1e-15)
    assert tw["alpha3_0"] == 0.0
    for eps in (200, 400, 600):
        spec_params = PRESETS["fig4"].parameters[f"eps={eps}"]
        assert spec_params == {"kappa": 0.01, "gamma1": 1.0, "gamma2": 1.0,
                               "gamma3": 10.0, "eps1": float(eps), "eps2": float(eps)}
    assert PRESETS["fig1"].default_n_traj == 100_000
    assert PRESETS["fig8"].default_n_traj == 10_000


def run_cli(args, cwd):
    env = dict(os.environ, PYTHONPATH=os.pathsep.join(sys.path))
    return subprocess.run(
        [sys.executable, "-m", "sfgsim.cli", *args],
        cwd=cwd, env=env, capture_output=True, text=True,
    )


def test_cli_steady_exit_zero(tmp_path):
    r = run_cli(["steady", "--eps1", "600", "--eps2", "600",
                 "--output", "out"], tmp_path)
    assert r.returncode == 0, r.stderr
    assert "closed-form-symmetric" in r.stdout
    assert (tmp_path / "out.csv").exists()
    assert (tmp_path / "out.json").exists()


def test_cli_usage_error_is_exit_one(tmp_path):
    r = run_cli(["no-such-command"], tmp_path)
    assert r.returncode == 1
    r = run_cli(["steady", "--kappa", "-1"], tmp_path)
    assert r.returncode == 1
    assert "kappa" in r.stderr


def test_cli_spectrum_unstable_is_exit_two(tmp_path):
    r = run_cli(["spectrum", "--eps1", "1000", "--eps2", "1000"], tmp_path)
    assert r.returncode == 2
    assert "unstable" in r.stderr


def test_cli_ensemble_quality_is_exit_three(tmp_path):
    (tmp_path / "bad.cfg").write_text(
        "mode=tw\nkappa=1.0\ngamma1=0\ngamma2=0\ngamma3=0\n"
        "alpha1_0=1000000.0\nalpha2_0=1000000.0\n"
        "dt=10.0\nt_max=40.0\nn_traj=8\nsample_stride=1\nseed=0\n"
    )
    r = run_cli(["simulate", "--config", "bad.cfg"], tmp_path)
    assert r.returncode == 3
    assert "divergence" in r.stderr


def test_cli_simulate_writes_csv_and_sidecar(tmp_path):
    (tmp_path / "tw.cfg").write_text(
        "mode=tw\nkappa=0.01\ngamma1=0\ngamma2=0\ngamma3=0\n"
        "alpha1_0=500.0\nalpha2_0=500.0\n"
        "dt=0.0005\nt_max=0.05\nn_traj=64\nsample_stride=10\nseed=5\n"
    )
    r = run_cli(["simulate", "--config", "tw.cfg", "--output", "run1"], tmp_path)
    assert r.returncode == 0, r.stderr
    header = (tmp_path / "run1.csv").read_text().splitlines()[0]
    assert header.startswith("zeta")
    assert "n1" in header and "vx3" in header
    meta = json.loads((tmp_path / "run1.json").read_text())
    assert meta["command"] == "simulate"
    assert meta["n_traj"] == 64
    assert meta["n_diverged"] == 0
    assert "seed=5" in meta["config"]


def test_csv_is_reproducible_from_sidecar_alone(tmp_path):
    (tmp_path / "tw.cfg").write_text(
        "mode=tw\nkappa=0.01\ngamma1=0\ngamma2=0\ngamma3=0\n"
        "alpha1_0=500.0\nalpha2_0=500.0\n"
        "dt=0.0005\nt_max=0.05\nn_traj=64\nsample_stride=10\nseed=5\n"
    )
    r = run_cli(["simulate", "--config", "tw.cfg", "--output", "first"], tmp_path)
    assert r.returncode == 0, r.stderr
    meta = json.loads((tmp_path / "first.json").read_text())
    (tmp_path / "replay.cfg").write_text(meta["config"])
    r = run_cli(["simulate", "--config", "replay.cfg", "--output", "second"],
                tmp_path)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "first.csv").read_text() == (tmp_path / "second.csv").read_text()


def test_cli_reproduce_spectral_preset(tmp_path):
    r = run_cli(["reproduce", "fig4", "--output", "f4", "--plot-script"], tmp_path)
    assert r.returncode == 0, r.stderr
    assert "[PASS]" in r.stdout
    header = (tmp_path / "f4.csv").read_text().splitlines()[0]
    assert "vx3_eps200" in header and "vx3_eps600" in header
    meta = json.loads((tmp_path / "f4.json").read_text())
    assert meta["preset"] == "fig4"
    assert all(c["passed"] for c in meta["checks"])
    assert (tmp_path / "f4_plot.py").exists()


def test_cli_reproduce_trajectory_preset_small(tmp_path):
    r = run_cli(["reproduce", "fig8", "--n-traj", "400", "--output", "f8"],
                tmp_path)
    assert r.returncode == 0, r.stderr
    meta = json.loads((tmp_path / "f8.json").read_text())
    assert meta["metadata"]["n_traj"] == 400
    header = (tmp_path / "f8.csv").read_text().splitlines()[0]
    assert "semiclassical_n3" in header


def test_cli_flags_override_config_file(tmp_path):
    (tmp_path / "c.cfg").write_text("eps1=600.0\neps2=600.0\nkappa=0.01\n")
    r = run_cli(["steady", "--config", "c.cfg", "--eps1", "200", "--eps2", "200",
                 "--output", "o"], tmp_path)
    assert r.returncode == 0, r.stderr
    assert "-25.42" in r.stdout  # the eps=200 operating point won
