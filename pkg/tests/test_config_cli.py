import json

import pytest

from hybrid_alloc import cli, config
from hybrid_alloc.errors import ConfigError


def _kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


def test_round_trip_byte_identical(cfg):
    text = config.dumps(cfg)
    assert config.dumps(config.loads(text)) == text
    assert text == config.bundled_config_text()
    assert text == config.dumps(config.RunConfig())


def test_partial_config_fills_defaults():
    c = config.loads('{"mission": {"range": 250000}}')
    assert c.mission.range == 250000.0
    assert c.mission.m0 == 6350.0


@pytest.mark.parametrize("text, path", [
    ('{"mission": {"range": -1}}', "mission.range"),
    ('{"mission": {"rng": 1}}', "mission.rng"),
    ('{"aircraft": {"motor": {"efficiency": 1.5}}}', "aircraft.motor.efficiency"),
    ('{"scenarios": {"cases": [{"n_parallel": "two"}]}}', "scenarios.cases[0].n_parallel"),
    ('{"solver": {"max_iterations": 2.5}}', "solver.max_iterations"),
    ('{"mission": ', "<root>"),
])
def test_invalid_config_names_field(text, path):
    with pytest.raises(ConfigError) as err:
        config.loads(text)
    assert str(err.value).startswith(path)


def test_cli_malformed_config_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"mission": {"soc0": 2.0}}')
    assert cli.main(["solve", "--config", str(bad)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "config"
    assert "mission.soc0" in err["message"]


def test_cli_env_override(tmp_path, capsys, monkeypatch):
    path = tmp_path / "c.json"
    path.write_text('{"mission": {"range": 200000}}')
    monkeypatch.setenv(config.CONFIG_ENV, str(path))
    assert cli.main(["solve"]) == 0
    short = float(_kv(capsys.readouterr().out)["fuel_kg"])
    monkeypatch.delenv(config.CONFIG_ENV)
    assert cli.main(["solve"]) == 0
    assert float(_kv(capsys.readouterr().out)["fuel_kg"]) > short


def test_cli_infeasible_exit_3(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"aircraft": {"engine": {"c1": 8.8e-8, "c2": 0.0098}},
                                "mission": {"m0": 60000}}))
    assert cli.main(["solve", "--config", str(path)]) == 3
    assert json.loads(capsys.readouterr().err)["kind"] == "infeasible"


def test_cli_solve_and_no_charge(capsys):
    assert cli.main(["solve"]) == 0
    out = _kv(capsys.readouterr().out)
    assert out["structure"] == "max-boundary-min"
    assert len(out["xi"].split()) == 3 and len(out["duals"].split()) == 4
    assert cli.main(["solve", "--no-charge"]) == 0
    nc = _kv(capsys.readouterr().out)
    assert float(nc["fuel_kg"]) >= float(out["fuel_kg"])


def test_cli_trajectory_csv(tmp_path, capsys):
    path = tmp_path / "traj.csv"
    assert cli.main(["solve", "--trajectory", str(path)]) == 0
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0] == "t_s,mass_kg,charge_Ah,throttle,sfc_kg_per_kWh,arc"
    assert len(lines) == 202
    assert {ln.rsplit(",", 1)[1] for ln in lines[1:]} == {"max", "boundary", "min"}


def test_cli_check_ssc(capsys):
    assert cli.main(["check-ssc"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "rank=4 kernel_dim=0 ssc=true"


@pytest.mark.parametrize("param", ["t_f", "m0", "soc0", "soc_f"])
def test_cli_sensitivity(param, capsys):
    assert cli.main(["sensitivity", "--param", param]) == 0
    out = _kv(capsys.readouterr().out)
    assert out["parameter"] == param
    float(out["dG_dp"])


def test_cli_verify_oracle(capsys):
    assert cli.main(["verify-oracle"]) == 0
    out = capsys.readouterr().out
    assert "charging: PASS" in out and "no_charge: PASS" in out


def test_cli_sweep_fits(tmp_path):
    path = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--out", str(path)]) == 0
    rows = [ln.split(",") for ln in path.read_text().splitlines()[1:]]
    fits = [r for r in rows if r[0] == "fit"]
    assert len(fits) == 4
    assert all(float(r[6]) >= 0.999 for r in fits)


def test_cli_twelve_significant_digits():
    assert cli.fmt(1.0 / 3.0) == "0.333333333333"
    assert cli.fmt(float("nan")) == "nan"
    assert cli.fmt(True) == "true"


@pytest.mark.parametrize("command", [["solve", "--trajectory"], ["climb", "--out"],
                                     ["sweep", "--out"], ["compare", "--out"]])
def test_cli_csv_deterministic(command, tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(command + [str(a)]) == 0
    assert cli.main(command + [str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
