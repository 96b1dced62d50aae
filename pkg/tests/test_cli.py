import json
import os
import subprocess
import sys

import pytest

from paracr.cli import EXIT_ERROR, EXIT_INADMISSIBLE, EXIT_OK, REPORT_SCHEMA, Report, dumps, main


def run(*argv, env=None):
    full_env = dict(os.environ)
    full_env.pop("PARACR_SEED", None)
    full_env.update(env or {})
    return subprocess.run(
        [sys.executable, "-m", "paracr.cli", *argv], capture_output=True, text=True, env=full_env, check=False
    )


def test_check_flat(capsys):
    assert main(["check", "p^2/4", "0"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out)
    assert data["schema"] == REPORT_SCHEMA
    assert data["invariants"]["flags"]["flat"] is True


def test_check_inadmissible(capsys):
    assert main(["check", "p^2", "p"]) == EXIT_INADMISSIBLE
    data = json.loads(capsys.readouterr().out)
    assert data["invariants"]["admissibility"]["integrable"]["status"] == "nonzero"


def test_check_parse_error(capsys):
    assert main(["check", "p^^2", "0"]) == EXIT_ERROR
    assert "at byte 2" in capsys.readouterr().err


def test_negative_expression_argument(capsys):
    assert main(["check", "p^3", "-r^2/p", "--seed", "3"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["input"]["H"] == "-r^2/p"
    assert main(["check", "-p^2", "0"]) == EXIT_OK


def test_usage_error():
    assert main(["check"]) == EXIT_ERROR


def test_text_format(capsys):
    assert main(["check", "p^2/4", "0", "--format", "text"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("paracr ") and "flat: True" in out


def test_suite_flat(capsys):
    assert main(["suite", "flat"]) == EXIT_OK


def test_suite_example(capsys):
    assert main(["suite", "example", "--f", "p^4"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["example"]["passed"] is True


def test_suite_degenerate(capsys):
    assert main(["suite", "example", "--f", "p"]) == EXIT_ERROR
    assert main(["suite", "example"]) == EXIT_ERROR


def test_monge_fit(tmp_path, capsys):
    path = tmp_path / "s.csv"
    path.write_text("".join(f"{k},{k * k}/4\n" for k in range(-3, 4)))
    assert main(["monge-fit", str(path)]) == EXIT_OK
    fit = json.loads(capsys.readouterr().out)["fit"]
    assert fit["exact"] and fit["coeffs"] == ["0", "0", "-1/4", "1", "0", "0"]
    assert main(["monge-fit", str(tmp_path / "missing.csv")]) == EXIT_ERROR


def test_eds_verify_default(capsys):
    assert main(["eds-verify"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["passed"] is True


def test_eds_verify_fixture_variants(capsys):
    assert main(["eds-verify", "--fixture", "sysend", "--variant", "all"]) == EXIT_OK
    results = json.loads(capsys.readouterr().out)["results"]
    assert [r["system"] for r in results] == ["sysend", "sysend[corrected]"]


def test_eds_verify_bad_fixture():
    assert main(["eds-verify", "--fixture", "nope.json"]) == EXIT_ERROR


def test_report_round_trip(capsys):
    main(["check", "f(p)", "-r^2*f'''(p)/f''(p)"])
    data = json.loads(capsys.readouterr().out)
    assert Report.from_json(data).to_json() == data
    main(["suite", "example", "--f", "p^3"])
    data = json.loads(capsys.readouterr().out)
    assert Report.from_json(data).to_json() == data


def test_report_schema_checked():
    with pytest.raises(ValueError):
        Report.from_json({"schema": "x"})


def test_dumps_sorted():
    assert dumps({"b": 1, "a": 2}) == '{\n  "a": 2,\n  "b": 1\n}\n'


def test_seed_from_environment():
    a = run("check", "p^2", "p", env={"PARACR_SEED": "5"})
    b = run("check", "p^2", "p", "--seed", "5")
    c = run("check", "p^2", "p")
    assert a.returncode == EXIT_INADMISSIBLE
    assert a.stdout == b.stdout != c.stdout
    assert json.loads(a.stdout)["seed"] == 5


def test_bad_seed_environment():
    assert run("check", "p", "0", env={"PARACR_SEED": "x"}).returncode != 0


def test_byte_identical_runs():
    argv = ("check", "f(p)", "-r^2*f'''(p)/f''(p)", "--seed", "42")
    first, second = run(*argv), run(*argv)
    assert first.returncode == second.returncode == EXIT_OK
    assert first.stdout == second.stdout
