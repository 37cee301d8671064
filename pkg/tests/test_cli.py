import subprocess
import sys

import numpy as np
import pytest

from maxwell_relax.cli import ConfigError, ExperimentConfig, initial_field, main, parse_config
from maxwell_relax.relax_solver import read_snapshot_binary

SMALL = "cells = 64\nt_end = 0.02\n"


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_empty_config_defaults():
    cfg = parse_config("")
    assert cfg == ExperimentConfig()
    assert cfg.grid.cells == (512,) and cfg.eps_list == (0.1, 0.05, 0.025, 0.0125)
    p = cfg.params()
    assert (p.eos_A, p.eos_gamma, p.nu, p.kappa) == (1.0, 2.0, 1.0, 1.0)
    assert cfg.t_end == 0.2 and cfg.n_snapshots == 20


def test_parse_values_and_comments():
    cfg = parse_config("# header\ndim = 2\ncells = 32, 16  # inline\n\neps_list = 0.2 0.1 0.05\n"
                       "test_disable_source = yes\nphase = 0, 1.5, 3\n")
    assert cfg.grid.cells == (32, 16) and cfg.eps_list == (0.2, 0.1, 0.05)
    assert cfg.test_disable_source and cfg.phase == (0.0, 1.5, 3.0)


@pytest.mark.parametrize("text,needle", [
    ("eos_gamma = 0.9", "eos_gamma"),
    ("eps_list = 0.1,0.1", "eps_list"),
    ("eps_list = 0.1,0.2,0.05", "strictly decreasing"),
    ("cfl = 1.5", "cfl"),
    ("reconstruction = weno", "reconstruction"),
    ("dim = 2\ncells = 8,8,8", "cells"),
    ("snapshot_format = csv\ndim = 2", "snapshot_format"),
    ("nu = -1", "nu"),
])
def test_validation_errors_name_key(text, needle):
    with pytest.raises(ConfigError, match=needle):
        parse_config(text)


@pytest.mark.parametrize("text,needle", [
    ("\n\nbogus = 1", "line 3: unknown key 'bogus'"),
    ("cells 64", "line 1: expected"),
    ("cells = 6x4", "line 1: bad value for cells"),
    ("nu = 1\nnu = 2", "line 2: duplicate key"),
    ("test_disable_source = maybe", "line 1: bad value"),
])
def test_parse_errors_carry_line(text, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert needle in str(exc.value)


def test_initial_field_on_ce_manifold():
    cfg = parse_config("cells = 32\namp_v = 0.3\nphase = 0,1,2")
    f = initial_field(cfg)
    assert f.rho.min() == pytest.approx(0.9, abs=1e-3)
    from maxwell_relax.ns_solver import ce_closure
    t1, t2 = ce_closure(f.velocity, f.grid, cfg.params())
    np.testing.assert_allclose(f.tau1, t1, atol=1e-15)
    np.testing.assert_allclose(f.tau2, t2, atol=1e-15)


def test_simulate_default_twenty_snapshots(tmp_path):
    assert main(["simulate", "--out", str(tmp_path)]) == 0
    snaps = sorted(tmp_path.glob("snap_*.bin"))
    assert len(snaps) == 20 and (tmp_path / "entropy.csv").exists()
    hdr, arr = read_snapshot_binary(snaps[-1])
    assert float(hdr["time"]) == 0.2 and arr.shape == (10, 512)
    assert not (tmp_path / "FAILED").exists()


def test_simulate_vacuum_amplitude(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "amp_rho = 1.5\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    marker = (tmp_path / "o" / "FAILED").read_text()
    assert "rho" in marker and "cell (" in marker
    assert "cell (" in capsys.readouterr().err


def test_simulate_t_end_zero_and_csv(tmp_path):
    cfg = write_cfg(tmp_path, "t_end = 0\ncells = 32\nsnapshot_format = both\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    assert len(list((tmp_path / "o").glob("snap_*.bin"))) == 1
    assert len(list((tmp_path / "o").glob("snap_*.csv"))) == 1


def test_simulate_deterministic(tmp_path):
    cfg = write_cfg(tmp_path, SMALL + "amp_v = 0.2\n")
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["simulate", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "1"])
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_compare_default_eps(tmp_path):
    cfg = write_cfg(tmp_path, "cells = 128\n")
    assert main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "errors.csv").read_text().splitlines()
    assert len(rows) == 21
    vals = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
    assert np.all(np.isfinite(vals)) and np.all(vals[:, 0] == 0.1)
    assert len(list(tmp_path.glob("ns_snap_*.bin"))) == 20
    hdr, _ = read_snapshot_binary(tmp_path / "ns_snap_0000.bin")
    assert "tau2_ce" in hdr["components"]


def test_compare_self_reference_is_zero(tmp_path):
    cfg = write_cfg(tmp_path, SMALL + "test_reference = relax\namp_v = 0.1\n")
    assert main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "errors.csv").read_text().splitlines()[1:]
    assert all(float(x) == 0.0 for r in rows for x in r.split(",")[2:])


@pytest.mark.parametrize("ref", ["ns", "relax"])
def test_compare_schedule_mismatch(tmp_path, ref):
    cfg = write_cfg(tmp_path, SMALL + f"test_reference = {ref}\ntest_schedule_mismatch = 1\n")
    assert main(["compare", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_sweep_needs_three_eps(tmp_path):
    cfg = write_cfg(tmp_path, SMALL + "eps_list = 0.1, 0.05\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_sweep_small_grid_outputs(tmp_path):
    cfg = write_cfg(tmp_path, SMALL + "eps_list = 0.2, 0.1, 0.05\nrate_lo = -10\nrate_hi = 10\n")
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert (tmp_path / "verdict.txt").read_text().startswith("PASS")
    assert len((tmp_path / "rate.csv").read_text().splitlines()) == 4
    assert len((tmp_path / "errors.csv").read_text().splitlines()) == 1 + 3 * 20


@pytest.mark.slow
def test_sweep_default_passes(tmp_path):
    # the source-disabled control is part of the acceptance suite
    assert main(["sweep", "--out", str(tmp_path / "ok")]) == 0
    assert (tmp_path / "ok" / "verdict.txt").read_text().startswith("PASS")
    assert len((tmp_path / "ok" / "rate.csv").read_text().splitlines()) == 5


def test_check_exit_codes(tmp_path, capsys):
    assert main(["check", "--out", str(tmp_path)]) == 0
    assert "structure PASS" in capsys.readouterr().out
    assert len((tmp_path / "structure.csv").read_text().splitlines()) == 101
    cfg = write_cfg(tmp_path, "structure_tol = 1e-18\n")
    assert main(["check", "--config", cfg, "--out", str(tmp_path)]) == 4
    cfg = write_cfg(tmp_path, "test_corrupt_coupling = 1.0\n")
    assert main(["check", "--config", cfg, "--out", str(tmp_path)]) == 4


def test_usage_errors(tmp_path, monkeypatch):
    assert main(["frobnicate"]) == 1
    assert main(["check", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert main(["check", "--threads", "0", "--out", str(tmp_path)]) == 1
    monkeypatch.setenv("MAXWELL_RELAX_THREADS", "zero")
    assert main(["check", "--out", str(tmp_path)]) == 1
    monkeypatch.setenv("MAXWELL_RELAX_THREADS", "1")
    assert main(["check", "--out", str(tmp_path)]) == 0
    assert main(["check", "--threads", "1", "--out", str(tmp_path)]) == 0


def test_help_lists_defaults(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    assert "eps_list" in out and "0.1,0.05,0.025,0.0125" in out and "exit codes" in out


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "maxwell_relax", "check", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "PASS" in r.stdout
