import json
import subprocess
import sys

import pytest

from sqcodes.cli import build_parser, main, parse_form, read_code_file
from sqcodes.codes import LinearCode
from sqcodes.errors import FieldError, ParseError, RankDeficient
from sqcodes.fq import field_new


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def parity(tmp_path):
    p = tmp_path / "parity.code"
    p.write_text("2 3 2\n1 0 1\n0 1 1\n")
    return p


@pytest.fixture
def rs16(tmp_path, capsys):
    p = tmp_path / "rs16_5.code"
    assert main(["rs", "--q", "17", "--n", "16", "--k", "5", "--out", str(p)]) == 0
    return p


def test_read_code_file(parity, tmp_path):
    C = read_code_file(parity)
    assert C == LinearCode.from_rows(field_new(2), [[1, 0, 1], [0, 1, 1]], 3)
    bad = tmp_path / "bad.code"
    bad.write_text("2 3 2\n1 0 2\n0 1 1\n")
    with pytest.raises(FieldError):
        read_code_file(bad)
    bad.write_text("2 3 2\n1 0 1\n1 0 1\n")
    with pytest.raises(RankDeficient):
        read_code_file(bad)


def test_census(capsys):
    code, out, _ = run(capsys, "census", "--q", "2", "--k", "3")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "q,k,r,count_formula,count_brute,match"
    assert len(lines) == 5
    assert all(line.endswith(",true") for line in lines[1:])


def test_census_json_counts(capsys):
    code, out, _ = run(capsys, "census", "--q", "3", "--k", "2", "--format", "json")
    rows = json.loads(out)["rows"]
    assert code == 0
    assert sum(r["count_brute"] for r in rows) == 27
    assert all(r["match"] for r in rows)


def test_expect(capsys):
    code, out, _ = run(capsys, "expect", "--q", "2", "--k", "2")
    assert code == 0 and out.strip() == "7/4 = 1.75"
    code, out, _ = run(capsys, "expect", "--q", "2", "--k", "3", "--brute")
    assert out.strip() == "117/32 = 3.65625"


def test_distinguish(capsys, rs16):
    code, out, _ = run(capsys, "distinguish", "--in", str(rs16), "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "structured" and d["deficiency"] == 6


def test_square_and_power(capsys, parity, tmp_path):
    code, out, _ = run(capsys, "square", "--in", str(parity), "--format", "json")
    assert json.loads(out)["dim_square"] == 3
    dest = tmp_path / "p.code"
    code, out, _ = run(capsys, "power", "--in", str(parity), "--d", "2", "--code-out", str(dest))
    assert out.strip() == "dim C^2 = 3"
    assert read_code_file(dest).k == 3


def test_zeros_and_decompose(capsys, tmp_path):
    f = tmp_path / "q.form"
    f.write_text("2 2\n1 1 1\n")
    code, out, _ = run(capsys, "zeros", "--in", str(f), "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["zeros_closed"] == d["zeros_brute"] == 1 and d["match"]
    code, out, _ = run(capsys, "decompose", "--in", str(f), "--format", "json")
    d = json.loads(out)
    assert d["rank"] == 2 and len(d["pairs"]) == 1
    code, out, _ = run(capsys, "zeros", "--in", str(f), "--format", "csv")
    assert out.splitlines()[0] == "name,value" and "match,true" in out


def test_parse_form_errors():
    assert parse_form("3 2\n1 2 0\n").coeffs == (1, 2, 0)
    for bad in ["", "3\n1", "3 2\n1 2\n", "3 2\n1 2 3\n", "3 2\na b c\n"]:
        with pytest.raises(ParseError):
            parse_form(bad)


def test_exit_codes(capsys, tmp_path):
    code, _, err = run(capsys, "census", "--q", "2", "--k", "6")
    assert code == 2 and "BudgetExceeded" in err
    code, _, err = run(capsys, "census", "--q", "2", "--k", "4", "--max-enum", "1000")
    assert code == 2 and "BudgetExceeded" in err
    code, out, _ = run(capsys, "census", "--q", "2", "--k", "4", "--max-enum", "1024")
    assert code == 0 and out.count("true") == 5
    code, _, err = run(capsys, "census", "--q", "6", "--k", "2")
    assert code == 1 and "NotPrimePower" in err
    bad = tmp_path / "bad.code"
    bad.write_text("2 3 2\n1 0 1\n1 0 1\n")
    code, _, err = run(capsys, "square", "--in", str(bad))
    assert code == 1 and "RankDeficient" in err
    code, _, err = run(capsys, "square", "--in", str(tmp_path / "missing.code"))
    assert code == 1 and "FileNotFoundError" in err
    code, _, err = run(capsys, "mc-square", "--q", "2", "--k", "4", "--trials", "5")
    assert code == 1 and "InputError" in err


@pytest.mark.parametrize("argv", [["census", "--q", "2", "--k", "3", "--bogus"], ["nosuch"], ["census", "--q", "2"], ["mc-dim", "--q", "2", "--k", "3", "--s", "-1"]])
def test_usage_errors_exit_1(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1


def test_every_subcommand_help_lists_its_flags():
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    for name, sp in sub.choices.items():
        text = sp.format_help()
        for action in sp._actions:
            for flag in action.option_strings:
                assert flag in text, (name, flag)


@pytest.mark.parametrize(
    "argv",
    [
        ["mc-square", "--q", "2", "--k", "6", "--t", "3", "--trials", "60", "--seed", "5"],
        ["mc-kernel", "--q", "2", "--k", "3", "--trials", "200", "--seed", "5"],
        ["mc-dim", "--q", "2", "--k", "4", "--s", "6", "--trials", "100", "--seed", "5"],
        ["mc-dual", "--q", "2", "--k", "4", "--trials", "40", "--seed", "5"],
        ["mc-models", "--q", "2", "--k", "3", "--n", "6", "--trials", "100", "--seed", "5"],
    ],
)
@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_seeded_outputs_are_byte_identical(argv, fmt, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(argv + ["--format", fmt, "--out", str(a)]) == 0
    assert main(argv + ["--format", fmt, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    if fmt == "json":
        d = json.loads(a.read_text())
        assert set(d) == {"experiment", "params", "estimates", "tallies", "bounds", "checks", "version"}


def test_timing_flag_adds_elapsed(capsys):
    code, out, _ = run(capsys, "mc-kernel", "--q", "2", "--k", "2", "--trials", "10", "--format", "json", "--timing")
    assert "elapsed_s" in json.loads(out)


def test_module_entry_point(parity):
    res = subprocess.run([sys.executable, "-m", "sqcodes", "square", "--in", str(parity)], capture_output=True, text=True)
    assert res.returncode == 0 and "dim C^2 = 3" in res.stdout
    res = subprocess.run([sys.executable, "-m", "sqcodes", "--bogus"], capture_output=True, text=True)
    assert res.returncode == 1
