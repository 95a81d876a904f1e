import io
import json
import subprocess
import sys
from contextlib import redirect_stderr, redirect_stdout
from fractions import Fraction

import pytest

from linearisable import __version__
from linearisable.acceptance import _designated_runs
from linearisable.cli import main
from linearisable.orbit import Orbit
from linearisable.report import SCHEMA_VERSION, build_report, emit_json
from linearisable.runners import degree_csv


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(argv)
    return code, out.getvalue(), err.getvalue()


def test_degree_growth_projective_is_constant(corpus_path):
    code, out, _ = run(["degree-growth", "--spec", str(corpus_path("three_point_projective")),
                        "--n-max", "15", "--mode", "exact", "--seed", "7"])
    rep = json.loads(out)
    assert code == 0
    assert rep["payload"]["class"] == "Constant"
    assert rep["schema_version"] == SCHEMA_VERSION and rep["tool_version"] == __version__
    assert rep["config"]["seed"] == 7 and rep["config"]["n_max"] == 15 and rep["config"]["mode"] == "exact"


def test_confine_reports_status(corpus_path):
    code, out, _ = run(["confine", "--spec", str(corpus_path("three_point_projective"))])
    assert code == 0
    assert json.loads(out)["payload"]["status"] == "ConfinedAt(1)"


def test_missing_spec_is_usage_error():
    code, _, err = run(["degree-growth", "--spec", "missing.spec"])
    assert code == 2 and err


@pytest.mark.parametrize("argv", [
    ["degree-growth"],
    ["degree-growth", "--spec", "x.spec", "--bogus"],
    ["frobnicate"],
    ["degree-growth", "--spec", "x.spec", "--mode", "fuzzy"],
])
def test_bad_usage_exits_two(argv):
    assert run(argv)[0] == 2


def test_wrong_section_is_spec_error(corpus_path):
    assert run(["ode", "--spec", str(corpus_path("gambier"))])[0] == 2
    assert run(["derivmatch", "--spec", str(corpus_path("hamiltonian"))])[0] == 2


def test_malformed_spec_file(tmp_path):
    bad = tmp_path / "bad.spec"
    bad.write_text("[mapping]\ntype = three-point\nupdate = (x +\n")
    assert run(["degree-growth", "--spec", str(bad)])[0] == 2


def test_csv_rows():
    text = degree_csv([0, 1, 1, 1])
    lines = text.splitlines()
    assert lines[0] == "n,degree" and len(lines) == 5
    assert lines[1:] == ["0,0", "1,1", "2,1", "3,1"]


def test_csv_from_command_line(corpus_path, tmp_path):
    out = tmp_path / "deg.csv"
    code, _, _ = run(["degree-growth", "--spec", str(corpus_path("square_ratio")), "--n-max", "6",
                      "--format", "csv", "--out", str(out)])
    assert code == 0
    assert out.read_text().splitlines() == ["n,degree"] + [f"{n},{n}" for n in range(7)]


def test_json_is_byte_identical_on_rerun(corpus_path):
    argv = ["cascade", "--spec", str(corpus_path("gambier")), "--seed", "3"]
    assert run(argv)[1] == run(argv)[1]


def test_json_keys_sorted_and_rationals_as_text():
    rep = build_report("x", {"b": 1, "a": Fraction(1, 3)}, {"z": [Fraction(-2, 5)], "y": float("inf")})
    text = emit_json(rep).decode()
    data = json.loads(text)
    assert data["config"] == {"a": "1/3", "b": 1}
    assert data["payload"] == {"y": "inf", "z": ["-2/5"]}
    assert text.index('"config"') < text.index('"payload"') < text.index('"schema_version"')


def test_infinity_in_orbit_serialised():
    orb = Orbit(("x",), [(Fraction(1),), (None,), (Fraction(0),)])
    data = json.loads(emit_json(build_report("cascade", {}, {"orbit": orb.to_json()})))
    assert data["payload"]["orbit"]["steps"] == [["1/1"], ["inf"], ["0/1"]]


def test_failed_conservation_exits_one(tmp_path):
    # a vanishing z makes the derivmatch run fail at the analysis level
    spec = tmp_path / "vanish.spec"
    spec.write_text("[derivmatch]\ng = n - 3\na = 0\nM = 0\nx0 = 1\nx1 = 2\nN = 10\n")
    assert run(["derivmatch", "--spec", str(spec)])[0] == 1


@pytest.mark.parametrize("sub,fixture,extra", _designated_runs(),
                         ids=[f"{s}-{f}" for s, f, _ in _designated_runs()])
def test_every_fixture_runs(corpus_path, sub, fixture, extra):
    code, out, err = run([sub, "--spec", str(corpus_path(fixture))] + extra)
    assert code == 0, err
    assert json.loads(out)["subcommand"] == sub


def test_module_entry_point(corpus_path):
    proc = subprocess.run([sys.executable, "-m", "linearisable", "derivmatch", "--spec",
                           str(corpus_path("quadform_gconst"))], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["payload"]["K"] == "1/9"
