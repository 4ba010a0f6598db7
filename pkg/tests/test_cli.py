import json

import pytest

from paralayer import cli, config
from paralayer.config import ConfigError


def test_config_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# reference layer\nalpha = 2\nk = 1   # amplitude\n\nE_list = 1e-2, 1e-3,1e-4\nm_max = 4\n")
    cfg = config.load(path, ["a=0.25"])
    assert cfg.alpha == 2.0 and cfg.a == 0.25 and cfg.m_max == 4
    assert cfg.E_list == [1e-2, 1e-3, 1e-4]
    assert config.load(None, config.dumps(cfg).splitlines()) == cfg


@pytest.mark.parametrize("line", ["nonsense", "foo = 1", "alpha = x", "E_list = 1e-3, 1e-2", "alpha = 0.9"])
def test_config_errors(line):
    with pytest.raises(ConfigError):
        config.load(None, [line])


def test_geometry_command(tmp_path):
    assert cli.run(["geometry", "--out", str(tmp_path), "--set", "s_max=50", "--set", "n=200"]) == 0
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["exit_status"] == 0 and man["version"] and man["wall_time"] > 0
    assert man["config"]["s_max"] == 50.0
    assert man["results"]["rho_m"] == pytest.approx(0.5)
    assert (tmp_path / "geometry.csv").exists()


def test_config_error_exit(tmp_path):
    assert cli.run(["geometry", "--out", str(tmp_path), "--set", "bogus=1"]) == 2
    assert json.loads((tmp_path / "manifest.json").read_text())["exit_status"] == 2
    assert cli.run(["geometry", "--out", str(tmp_path), "--config", str(tmp_path / "missing.cfg")]) == 2


@pytest.mark.parametrize("cmd", ["fiber", "potential"])
def test_injectivity_gate_exit(tmp_path, cmd, capsys):
    assert cli.run([cmd, "--out", str(tmp_path), "--set", "a=0.5", "--set", "s_max=50"]) == 3
    assert "injectivity" in capsys.readouterr().err
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["exit_status"] == 3 and "rho_m" in man["error"]


def test_asymptotics_six_decades_and_determinism(tmp_path):
    args = ["asymptotics", "--set", "E_list=1e-1,1e-2,1e-3,1e-4,1e-5,1e-6", "--plot", "--threads", "2"]
    assert cli.run(args + ["--out", str(tmp_path / "a")]) == 0
    assert cli.run(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "asymptotics.csv").read_bytes()
    assert a == (tmp_path / "b" / "asymptotics.csv").read_bytes()
    rows = a.decode().splitlines()[1:]
    assert len(rows) == 6
    assert all(float(x) == float(x) for r in rows for x in r.split(","))
    assert (tmp_path / "a" / "asymptotics.svg").read_text().lstrip().startswith("<?xml")


def test_spectrum1d_and_potential(tmp_path):
    assert cli.run(["spectrum1d", "--out", str(tmp_path), "--set", "E_list=1e-2,1e-3"]) == 0
    assert (tmp_path / "spectrum1d_lower.csv").read_text().startswith("E,count,asymptote,ratio")
    assert cli.run(["potential", "--out", str(tmp_path), "--set", "s_max=60", "--set", "n=300"]) == 0
    assert len((tmp_path / "potential.csv").read_text().splitlines()) == 301


def test_fiber_command(tmp_path, monkeypatch):
    monkeypatch.setenv("PARALAYER_THREADS", "2")
    args = ["fiber", "--out", str(tmp_path), "--set", "fiber_s_max=200", "--set", "m_max=3", "--set", "p=5",
            "--set", "n_u=10", "--set", "h0=0.1", "--set", "growth=1.03", "--set", "E_list=1e-1,1e-2"]
    assert cli.run(args) == 0
    lines = (tmp_path / "fiber.csv").read_text().splitlines()
    assert lines[0] == "m,bc,p,E,count"
    assert len(lines) == 1 + 4 + 3 * 2


def test_verify_reference_exits_zero(tmp_path):
    status = cli.run(["verify", "--out", str(tmp_path)])
    report = (tmp_path / "acceptance.txt").read_text()
    assert status == 0, report
