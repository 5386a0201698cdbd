import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fewphoton import cli


@pytest.mark.parametrize("text,expected", [
    ("0.1", [0.1]),
    ("0.1,0.2,0.5", [0.1, 0.2, 0.5]),
    ("0:1:4", [0.0, 0.25, 0.5, 0.75, 1.0]),
])
def test_parse_grid(text, expected):
    assert cli.parse_grid(text) == pytest.approx(expected)


@pytest.mark.parametrize("text", ["", "  ", ",", "0.5,0.1", "0:1:0", "1:2", "a,b", "0.1,0.1"])
def test_parse_grid_rejects(text):
    with pytest.raises(cli.GridError):
        cli.parse_grid(text)


@given(st.floats(0, 1), st.floats(0.01, 1), st.integers(1, 50))
def test_ranged_grid_has_steps_plus_one_points(start, span, steps):
    g = cli.parse_grid(f"{start}:{start + span}:{steps}")
    assert len(g) == steps + 1 and g[0] == start


def test_empty_grid_exit_code(capsys):
    assert cli.main(["fock", "--n", "1", "--v", ""]) == cli.EXIT_GRID
    assert "empty v-grid" in capsys.readouterr().err


def test_unwritable_path(tmp_path, capsys):
    target = tmp_path / "missing" / "out.csv"
    assert cli.main(["fock", "--n", "1", "--v", "0.3", "--out", str(target)]) == cli.EXIT_PATH
    assert capsys.readouterr().err.startswith("error:")


def test_usage_error():
    assert cli.main(["fock", "--n", "7"]) == cli.EXIT_USAGE


def test_csv_is_reproducible(tmp_path):
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    args = ["fock", "--n", "2", "--v", "0.2,0.4"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--out", str(b)]) == 0
    assert cli.main(args + ["--out", str(c), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() == c.read_bytes()  # worker count does not change the numbers
    config = json.loads(a.read_text().splitlines()[0][len("# config: "):])
    assert config["quadrature"]["rel_tol"] == 1e-5
    lines = a.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    header = [ln for ln in lines if not ln.startswith("#")][0]
    assert header == "V,sector,total,pw,bs,err"
    assert len([ln for ln in lines if not ln.startswith("#")]) == 1 + 2 * 3


def test_g2_json(tmp_path):
    out = tmp_path / "g2.json"
    args = ["g2", "--v", "0.34", "--gamma-prime", "0.1", "--nbar", "0.5", "--format", "json", "--out", str(out)]
    assert cli.main(args) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["v"] == 0.34
    first = doc["rows"][0]
    assert first["gamma_x"] == 0 and first["g2"] <= 0.05


def test_eigenstate_rows(capsys):
    assert cli.main(["eigenstate", "--n", "2", "--samples", "5", "--seed", "3"]) == 0
    rows = [ln for ln in capsys.readouterr().out.splitlines() if not ln.startswith("#")]
    assert rows[0] == "x1,x2,re,im,abs" and len(rows) == 6


def test_strict_exit_on_flagged_points(tmp_path):
    # lossless resonant narrow beam: transmission vanishes, g2 is unreliable
    args = ["g2", "--v", "1.0", "--delta", "1e-4", "--nbar", "0.5", "--out", str(tmp_path / "g.csv")]
    assert cli.main(args) == cli.EXIT_OK
    assert cli.main(args + ["--strict"]) == cli.EXIT_FLAGGED
    assert "# note: denominator" in (tmp_path / "g.csv").read_text()


def test_worker_cap(monkeypatch):
    monkeypatch.setenv(cli.WORKERS_ENV, "2")
    assert cli.worker_count(16) == 2


def test_two_photon_table_shape(tmp_path):
    out = tmp_path / "f.csv"
    assert cli.main(["fock", "--n", "2", "--v", "0:1:50", "--delta", "0.1", "--gamma-prime", "0", "--out", str(out)]) == 0
    rows = [ln for ln in out.read_text().splitlines() if not ln.startswith("#")][1:]
    assert len(rows) == 3 * 51
