import json
import math
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ptlattice import ValidationError
from ptlattice.cli import COLUMNS, format_value, main, parse_value, read_csv, run, to_csv, to_json
from ptlattice.config import parse_config


def test_dimer_config():
    cfg = parse_config("command=spectrum\nlattice.N=2\nlattice.Ns=0\nlattice.gamma=0.6")
    assert cfg.command == "spectrum"
    [spec] = cfg.grid()
    assert (spec.N, spec.Ns, spec.gamma, spec.J) == (2, 0, 0.6, 1.0)


def test_missing_N_names_key():
    with pytest.raises(ValidationError) as info:
        parse_config("command=roots\nlattice.gamma=0.6")
    assert info.value.key == "lattice.N"


def test_two_point_sweep():
    cfg = parse_config("command=correspond\nlattice.N=3\nsweep.gamma=0.2,0.5")
    assert [s.gamma for s in cfg.grid()] == [0.2, 0.5]


def test_grid_order_and_comments():
    cfg = parse_config("# grid\ncommand = roots\nsweep.N = 2, 3  # two sizes\nsweep.Ns = 0,1\nlattice.gamma = 0.3\n")
    assert [(s.N, s.Ns) for s in cfg.grid()] == [(2, 0), (2, 1), (3, 0), (3, 1)]


def test_command_from_argument():
    assert parse_config("lattice.N=3", command="roots").command == "roots"
    with pytest.raises(ValidationError):
        parse_config("command=roots\nlattice.N=3", command="spectrum")


@pytest.mark.parametrize("text, key, line", [
    ("command=roots\nlattice.N=3\nlattice.gama=0.5", "lattice.gama", 3),
    ("command=roots\nlattice.N=3\nlattice.N=4", "lattice.N", 3),
    ("command=roots\nlattice.N=three", "lattice.N", 2),
    ("command=roots\nlattice.N=2.5", "lattice.N", 2),
    ("command=roots\nlattice.N=3\nlattice.gamma=nan", "lattice.gamma", 3),
    ("command=roots\nlattice.N=3\nsweep.gamma=0.1,,0.2", "sweep.gamma", 3),
    ("command=roots\nlattice.N=3\nsweep.gamma=", "sweep.gamma", 3),
])
def test_parse_errors_carry_key_and_line(text, key, line):
    with pytest.raises(ValidationError) as info:
        parse_config(text)
    assert info.value.key == key and info.value.line == line


def test_line_without_equals():
    with pytest.raises(ValidationError) as info:
        parse_config("command=roots\nlattice.N 3")
    assert info.value.line == 2


@pytest.mark.parametrize("text, key", [
    ("command=bogus\nlattice.N=3", "command"),
    ("command=roots\nlattice.N=3\nlattice.J=0", "lattice.J"),
    ("command=roots\nlattice.N=0", "lattice.N"),
    ("command=roots\nsweep.N=2,0", "sweep.N"),
    ("command=roots\nlattice.N=3\nlattice.gamma=-1", "lattice.gamma"),
    ("command=roots\nlattice.N=3\noutput.format=xml", "output.format"),
    ("command=scatter\nlattice.N=3", "sweep.k"),
    ("command=scatter\nlattice.N=3\nsweep.k=0.5,3.2", "sweep.k"),
    ("command=evolve\nevolve.k0=1.5\nevolve.sigma=5", "evolve.sites"),
    ("command=spectrum\nlattice.N=1", "lattice.N"),
])
def test_validation_errors(text, key):
    with pytest.raises(ValidationError) as info:
        parse_config(text)
    assert info.value.key == key


floats = st.floats(allow_nan=False, allow_infinity=False)


@given(floats)
def test_float_round_trip(x):
    assert parse_value(format_value(x), float) == x


def test_cell_formatting():
    assert format_value(True) == "true" and format_value(False) == "false"
    assert format_value(None) == "" and parse_value("", float) is None
    assert format_value(3) == "3" and format_value(0.1) == "0.10000000000000001"


def _write(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_spectrum_json_flags_broken_phase(tmp_path, capsys):
    cfg = _write(tmp_path, "lattice.N=2\nlattice.Ns=0\nlattice.gamma=1.25\n")
    assert main(["spectrum", "--config", cfg, "--format", "json"]) == 0
    records = json.loads(capsys.readouterr().out)
    assert len(records) == 2
    assert all(r["pt_unbroken"] is False and r["is_real"] is False for r in records)


def test_csv_rows_round_trip(tmp_path):
    for command, text in [
        ("spectrum", "lattice.N=4\nlattice.Ns=1\nsweep.gamma=0.3,1.7\n"),
        ("roots", "lattice.N=5\nlattice.Ns=2\nlattice.gamma=1.2\n"),
        ("scatter", "lattice.N=4\nlattice.Ns=1\nlattice.gamma=0.5\nsweep.k=0.7,1.3\n"),
        ("correspond", "lattice.N=5\nlattice.Ns=2\nlattice.gamma=1.2\n"),
    ]:
        result = run(parse_config(text, command=command))
        assert result.ok, result.failed_checks
        parsed = read_csv(to_csv(result.rows, command), command)
        assert len(parsed) == len(result.rows)
        for got, want in zip(parsed, result.rows):
            for col in COLUMNS[command]:
                w = want[col]
                assert got[col] == (None if w is None else type(got[col])(w))


def test_output_is_deterministic(tmp_path, monkeypatch):
    cfg = _write(tmp_path, "sweep.N=2,3,4\nsweep.Ns=0,1\nsweep.gamma=0.2,0.9\n")
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("THREADS", threads)
        out = tmp_path / f"out{threads}.csv"
        assert main(["roots", "--config", cfg, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].decode().splitlines()[0] == ",".join(COLUMNS["roots"])


def test_json_mirrors_csv(tmp_path):
    result = run(parse_config("lattice.N=3\nlattice.Ns=1\nlattice.gamma=0.4\n", command="roots"))
    records = json.loads(to_json(result.rows, "roots"))
    assert records == read_csv(to_csv(result.rows, "roots"), "roots")


def test_json_nan_becomes_null():
    row = {c: 0.0 for c in COLUMNS["correspond"]}
    row.update(N=3, Ns=1, r_abs=math.nan)
    assert json.loads(to_json([row], "correspond"))[0]["r_abs"] is None


def test_correspond_passes_on_regular_spec(tmp_path, capsys):
    cfg = _write(tmp_path, "lattice.N=5\nlattice.Ns=2\nlattice.gamma=1.2\n")
    assert main(["correspond", "--config", cfg]) == 0
    rows = read_csv(capsys.readouterr().out, "correspond")
    assert len(rows) == 5 and all(r["align_residual"] < 1e-8 for r in rows)


def test_correspond_failure_exits_nonzero(tmp_path, capsys):
    cfg = _write(tmp_path, "lattice.N=3\nlattice.Ns=1\nlattice.gamma=0.5\n")
    assert main(["correspond", "--config", cfg]) == 2
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["check"] == "invariants" and record["failures"]


def test_evolve_horizon_violation(tmp_path, capsys):
    cfg = _write(tmp_path, "evolve.k0=1.5707963267948966\nevolve.sigma=10\nevolve.sites=120\nlattice.gamma=0.5\n")
    assert main(["evolve", "--config", cfg]) == 2
    record = json.loads(capsys.readouterr().err)
    assert record["error"] == "HorizonError" and record["check"] == "lead_end_mass"


def test_evolve_run(tmp_path, capsys):
    cfg = _write(tmp_path, "evolve.k0=1.5707963267948966\nsweep.sigma=10,20\nevolve.sites=500\nlattice.gamma=0.5\n")
    assert main(["evolve", "--config", cfg]) == 0
    rows = read_csv(capsys.readouterr().out, "evolve")
    assert [r["sigma"] for r in rows] == [10.0, 20.0]
    assert rows[1]["discrepancy"] < rows[0]["discrepancy"] < 0.01


def test_validation_exit_code(tmp_path, capsys):
    cfg = _write(tmp_path, "lattice.N=3\nlattice.gama=0.5\n")
    assert main(["roots", "--config", cfg]) == 1
    record = json.loads(capsys.readouterr().err)
    assert record == {"status": "error", "error": "ValidationError", "message": "line 2: unknown key lattice.gama",
                      "key": "lattice.gama", "line": 2}


def test_missing_config_file(tmp_path, capsys):
    assert main(["roots", "--config", str(tmp_path / "nope.cfg")]) == 1
    assert json.loads(capsys.readouterr().err)["key"] == "config"


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, "lattice.N=2\nlattice.gamma=0.6\n")
    proc = subprocess.run([sys.executable, "-m", "ptlattice", "roots", "--config", cfg], capture_output=True,
                          text=True, check=False)
    assert proc.returncode == 0
    assert len(proc.stdout.splitlines()) == 3
