import math
import subprocess
import sys

import pytest

from neutronsim import cli, oracle
from neutronsim.config import RunManifest, parse_config
from neutronsim.harness import HarnessError, emit_oracle, read_csv, run_manifest
from neutronsim.sweep import periodic_grid


def small(experiment, **kw):
    base = {
        "interferometer": dict(n_particles=2000, warmup=200, chi=tuple(periodic_grid(8))),
        "bell": dict(n_particles=500, warmup=200, alpha=tuple(periodic_grid(2)), chi=tuple(periodic_grid(4))),
        "ozawa": dict(n_particles=500, phi=(0.0, 0.6, 1.2)),
    }[experiment]
    base.update(kw)
    return RunManifest(experiment, 77, **base)


@pytest.mark.parametrize("experiment", ["interferometer", "bell", "ozawa"])
def test_replay_is_byte_identical(tmp_path, experiment):
    a = run_manifest(small(experiment), tmp_path / "a").read_bytes()
    b = run_manifest(small(experiment, parallelism=3), tmp_path / "b").read_bytes()
    assert a == b


def test_header_and_rows(tmp_path):
    m = small("interferometer")
    meta, rows = read_csv(run_manifest(m, tmp_path))
    assert meta["seed"] == "77" and meta["config_sha256"] == m.config_hash()
    assert len(rows) == 8 and [r["stream_id"] for r in rows] == [str(i) for i in range(8)]
    for r in rows:
        assert int(r["n_O"]) + int(r["n_H"]) + int(r["n_lost"]) == int(r["n_emitted"])
        # oracle columns recomputable from the setting columns alone
        p = oracle.mzi_probabilities(m.reflectivity, float(r["chi"]))
        assert float(r["oracle_p_O"]) == pytest.approx(p.p_O, rel=1e-11, abs=1e-13)


def test_bell_csv_oracle_columns(tmp_path):
    m = small("bell")
    meta, rows = read_csv(run_manifest(m, tmp_path))
    assert {"S_grid_max", "S_printed_settings", "S_optimal_settings"} <= set(meta)
    for r in rows:
        assert float(r["oracle_E"]) == pytest.approx(math.cos(float(r["alpha"]) + float(r["chi"])), abs=1e-11)


def test_bell_csv_s_max_at_gamma_055(tmp_path):
    m = RunManifest("bell", 5, gamma=0.55, n_particles=100_000, alpha=tuple(periodic_grid(4)),
                    chi=tuple(periodic_grid(8)))
    meta, _ = read_csv(run_manifest(m, tmp_path))
    assert abs(float(meta["S_grid_max"]) - 2.05) < 0.05


def test_ozawa_csv_tracks_curves(tmp_path):
    m = RunManifest("ozawa", 5, n_particles=10_000, phi=(0.5, 0.8, 1.1))
    _, rows = read_csv(run_manifest(m, tmp_path))
    for r in rows:
        assert abs(float(r["epsilon"]) - float(r["oracle_epsilon"])) < 0.05
        assert abs(float(r["eta"]) - float(r["oracle_eta"])) < 0.05


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("NEUTRONSIM_OUTPUT_DIR", str(tmp_path / "env"))
    path = run_manifest(small("ozawa"))
    assert path == tmp_path / "env" / "ozawa.csv"


def test_explicit_output_path(tmp_path):
    path = run_manifest(small("ozawa", output="sub/run.csv"), tmp_path)
    assert path == tmp_path / "sub" / "run.csv" and path.exists()


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(HarnessError):
        run_manifest(small("ozawa"), blocker)


def test_emit_oracle(tmp_path):
    _, rows = read_csv(emit_oracle(small("ozawa"), tmp_path))
    assert float(rows[0]["eta"]) == pytest.approx(math.sqrt(2))


def test_cli_run_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "i.cfg"
    cfg.write_text("experiment = interferometer\nseed = 3\nn_particles = 500\nwarmup = 100\nchi = periodic(4)\n")
    rc = cli.main(["run-interferometer", "-c", str(cfg), "--output-dir", str(tmp_path),
                   "--set", "reflectivity=0.3", "--seed", "9", "-j", "2"])
    assert rc == 0
    meta, rows = read_csv(capsys.readouterr().out.strip())
    assert meta["seed"] == "9" and meta["reflectivity"] == "0.3" and len(rows) == 4


def test_cli_without_config(tmp_path):
    rc = cli.main(["run-ozawa", "--seed", "1", "--set", "n_particles=100", "--set", "phi=0, 1",
                   "--output-dir", str(tmp_path)])
    assert rc == 0 and (tmp_path / "ozawa.csv").exists()


def test_cli_config_errors(tmp_path, capsys):
    assert cli.main(["run-bell", "--output-dir", str(tmp_path)]) == 2
    assert "seed" in capsys.readouterr().err
    assert cli.main(["run-bell", "--seed", "1", "--set", "gamma=1.2"]) == 2
    cfg = tmp_path / "o.cfg"
    cfg.write_text("experiment = ozawa\nseed = 1\n")
    assert cli.main(["run-bell", "-c", str(cfg)]) == 2


def test_cli_emit_oracle(tmp_path):
    assert cli.main(["emit-oracle", "bell", "--seed", "1", "--output-dir", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "bell_oracle.csv")
    assert len(rows) == 64


def test_cli_failure_names_grid_point(tmp_path, capsys, monkeypatch):
    import neutronsim.sweep as sweep

    def boom(cfg):
        raise FloatingPointError("synthetic")

    monkeypatch.setattr(sweep, "run_ozawa", boom)
    rc = cli.main(["run-ozawa", "--seed", "1", "--output-dir", str(tmp_path)])
    err = capsys.readouterr().err
    assert rc == 1 and "grid point 0" in err and "phi=0" in err


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "neutronsim.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "run-bell" in out.stdout
