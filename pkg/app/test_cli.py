import csv
import json

import pytest

import cli


def test_catalog_list(capsys):
    assert cli.run(["catalog", "list"]) == cli.EXIT_OK
    assert "delta-radial-rho" in capsys.readouterr().out


def test_catalog_show_golden(capsys):
    assert cli.run(["catalog", "show", "delta-radial-rho"]) == cli.EXIT_OK
    assert capsys.readouterr().out.startswith("# delta-radial-rho")


def test_catalog_show_needs_identifier():
    assert cli.run(["catalog", "show"]) == cli.EXIT_CONFIG


def test_catalog_show_unknown(capsys):
    assert cli.run(["catalog", "show", "delta-nothing"]) == cli.EXIT_FAILED
    assert "witness" in capsys.readouterr().err


def test_spectrum_writes_json_and_csv(tmp_path):
    assert cli.run(["spectrum", "--N", "2", "--out", str(tmp_path)]) == cli.EXIT_OK
    report = json.loads((tmp_path / "spectrum-N2.json").read_text())
    assert report["ground_energy"] == "36"
    with (tmp_path / "spectrum-N2.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == cli.SPECTRUM_COLUMNS
    assert [row[3] for row in rows[1:]] == ["1", "6", "21"]


def test_bad_masses():
    assert cli.run(["catalog", "show", "delta-radial-mass", "--format", "json", "--masses", "1,2,3"]) == cli.EXIT_CONFIG


def test_potentials_at_point(capsys):
    assert cli.run(["potentials", "--d", "3", "--point", "1,1,1,1,1,1"]) == cli.EXIT_OK
    body = json.loads(capsys.readouterr().out)
    assert body["values"]["V_harmonic"] == "48"


def test_point_needs_six_values():
    assert cli.run(["geometry", "--point", "1,1,1"]) == cli.EXIT_CONFIG


def test_geometry_file(tmp_path, capsys):
    path = tmp_path / "points.json"
    path.write_text(json.dumps([{"coordinates": [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]}]))
    assert cli.run(["geometry", "--file", str(path)]) == cli.EXIT_OK
    assert "interior" in capsys.readouterr().out


def test_nbody_derive(tmp_path):
    assert cli.run(["nbody-derive", "--n", "3", "--out", str(tmp_path)]) == cli.EXIT_OK
    table = json.loads((tmp_path / "nbody-n3.json").read_text())
    assert table["slots"]["e1"] == "1/4"


def test_nbody_out_of_range(tmp_path):
    assert cli.run(["nbody-derive", "--n", "9", "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_trajectory(tmp_path):
    config = {
        "space": "P",
        "omega": 1.0,
        "initial": {"position": [2.0], "momenta": [0.1]},
        "dt": 0.01,
        "steps": 10,
    }
    path = tmp_path / "line.json"
    path.write_text(json.dumps(config))
    out = tmp_path / "out"
    assert cli.run(["trajectory", "--config", str(path), "--out", str(out)]) == cli.EXIT_OK
    assert (out / "line.csv").read_text().startswith("t,P,p_P,H,D")
    assert json.loads((out / "line.json").read_text())["steps_taken"] == 10


def test_trajectory_missing_config(tmp_path):
    assert cli.run(["trajectory", "--config", str(tmp_path / "absent.json")]) == cli.EXIT_CONFIG


def test_verify_exact(tmp_path):
    assert cli.run(["verify", "--suite", "exact", "--fast", "--seed", "5", "--out", str(tmp_path)]) == cli.EXIT_OK
    report = json.loads((tmp_path / "verify-exact.json").read_text())
    assert report["passed"] is True
    assert report["seed"] == 5


def test_unknown_command():
    with pytest.raises(SystemExit):
        cli.run(["fly"])
