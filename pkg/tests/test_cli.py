import json
import subprocess
import sys
from importlib import resources

import pytest

from cbalias.cli import EXIT_OK, EXIT_RUNTIME, EXIT_STATIC, bench_rows, load_config, main

PROGRAMS = resources.files("cbalias").joinpath("programs")
RESULTSIZE = str(PROGRAMS.joinpath("resultsize.src"))
FIB = str(PROGRAMS.joinpath("fib.src"))


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text("# sizes\nnew_size = 1024\nlegacy_size = 512  # fallback\n")
    return str(path)


@pytest.fixture
def cfg_no_legacy(tmp_path):
    path = tmp_path / "partial.toml"
    path.write_text('"new_size" = 1024\n')
    return str(path)


def src(tmp_path, text, name="prog.src"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------- run ----------


def test_run_need_text(capsys, cfg):
    code, out, _ = run(capsys, "run", RESULTSIZE, "--config", cfg, "--strategy", "need")
    assert code == EXIT_OK
    assert out == "value: 1024\ntrace: 1 event(s)\n  read new_size = 1024\n"


def test_run_need_json(capsys, cfg):
    code, out, _ = run(capsys, "run", RESULTSIZE, "--config", cfg, "--strategy", "need", "--output", "json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["value"] == 1024
    assert data["events"] == [{"type": "read", "key": "new_size", "value": 1024}]


def test_run_cbv_missing_key(capsys, cfg_no_legacy):
    code, out, _ = run(capsys, "run", RESULTSIZE, "--config", cfg_no_legacy, "--strategy", "cbv", "--output", "json")
    assert code == EXIT_RUNTIME
    data = json.loads(out)
    assert data["error"]["kind"] == "MissingKey"
    assert data["error"]["key"] == "legacy_size"
    assert data["events"] == [{"type": "read", "key": "new_size", "value": 1024}]


def test_run_cbv_missing_key_text(capsys, cfg_no_legacy):
    code, out, err = run(capsys, "run", RESULTSIZE, "--config", cfg_no_legacy, "--strategy", "cbv")
    assert code == EXIT_RUNTIME
    assert "legacy_size" in err and out == ""


def test_run_fib_par(capsys):
    code, out, _ = run(capsys, "run", FIB, "--strategy", "par", "--arg", "10", "--output", "json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["value"] == 55
    assert data["span"] == 9 and data["work"] == 88


def test_run_parse_error(capsys, tmp_path):
    code, out, _ = run(capsys, "run", src(tmp_path, "main = (1"), "--output", "json")
    assert code == EXIT_STATIC
    err = json.loads(out)["error"]
    assert err["stage"] == "parse" and (err["line"], err["column"]) == (1, 10)
    assert "')'" in err["expected"]


def test_run_type_error(capsys, tmp_path):
    code, _, err = run(capsys, "run", src(tmp_path, "main = (\\x. x + 1) true"))
    assert code == EXIT_STATIC
    assert err.startswith("typecheck error")


def test_run_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "run", str(tmp_path / "nope.src"))
    assert code == EXIT_STATIC
    assert "cannot read program" in err


def test_run_bad_config(capsys, tmp_path):
    bad = src(tmp_path, "new_size = big\n", "bad.toml")
    code, _, err = run(capsys, "run", RESULTSIZE, "--config", bad)
    assert code == EXIT_STATIC
    assert "bad.toml:1" in err


def test_run_fuel(capsys):
    code, out, _ = run(capsys, "run", FIB, "--arg", "15", "--fuel", "500", "--output", "json")
    assert code == EXIT_RUNTIME
    assert json.loads(out)["error"]["kind"] == "FuelExhausted"


def test_usage_errors(capsys):
    assert main(["run"]) == EXIT_STATIC
    assert main(["run", RESULTSIZE, "--strategy", "lazy"]) == EXIT_STATIC
    assert main(["laws", "--strategy", "cbv"]) == EXIT_STATIC
    assert main([]) == EXIT_STATIC
    capsys.readouterr()


def test_load_config(cfg):
    assert load_config(cfg).entries == {"new_size": 1024, "legacy_size": 512}
    assert load_config(None).entries == {}


# ---------- translate ----------


def test_translate_identity(capsys, tmp_path):
    code, out, _ = run(capsys, "translate", src(tmp_path, "main = \\x:int. x"), "--mode", "cba")
    assert code == EXIT_OK
    assert out == "main = unit (\\x. x)\ntype: M (M int -> M int)\n"


def test_translate_let_cba(capsys, tmp_path):
    code, out, _ = run(capsys, "translate", src(tmp_path, 'main = let x = read "k" in x'), "--mode", "cba")
    assert out.splitlines()[0] == 'main = bind (malias (read "k")) (\\x. x)'


def test_translate_let_cbn(capsys, tmp_path):
    code, out, _ = run(capsys, "translate", src(tmp_path, 'main = let x = read "k" in x'), "--mode", "cbn")
    assert out.splitlines() == ['main = (\\x. x) (read "k")', "type: M int"]


def test_translate_cbv_type(capsys, tmp_path):
    code, out, _ = run(capsys, "translate", src(tmp_path, "main = \\f:int -> int. f 1"), "--mode", "cbv")
    assert out.splitlines()[-1] == "type: M ((int -> M int) -> M int)"


def test_translate_show_types(capsys, tmp_path):
    _, out, _ = run(capsys, "translate", src(tmp_path, "main = \\x:int. x"), "--show-types")
    assert out.startswith("main = unit (\\x:M int. x)")


def test_translate_program_json(capsys):
    code, out, _ = run(capsys, "translate", RESULTSIZE, "--output", "json")
    data = json.loads(out)
    assert data["type"] == "M int"
    assert data["defs"][0]["name"] == "chooseSize"
    assert data["defs"][0]["type"] == "M (M int -> M (M int -> M int))"
    assert data["main"].count("malias") == 2


def test_translate_static_error(capsys, tmp_path):
    assert main(["translate", src(tmp_path, "main = 1 true")]) == EXIT_STATIC
    capsys.readouterr()


# ---------- laws ----------


def test_laws_pass(capsys):
    code, out, _ = run(capsys, "laws", "--strategy", "cbv", "--cases", "100", "--seed", "42")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 7
    assert all(line.endswith("PASS") for line in lines)


def test_laws_json(capsys):
    argv = ["laws", "--strategy", "need", "--cases", "40", "--seed", "1", "--output", "json"]
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["passed"] and data["seed"] == 1
    assert [r["law"] for r in data["reports"]][-1] == "need-at-most-once"
    assert run(capsys, *argv)[1] == out


def test_laws_failure_exit_code(capsys, monkeypatch):
    import cbalias.laws as laws

    monkeypatch.setattr(laws, "get_strategy", lambda sid: lambda m: laws.Pure(laws.Pure(0)))
    code, out, _ = run(capsys, "laws", "--strategy", "cbn", "--cases", "20", "--seed", "0", "--suite", "malias")
    assert code == EXIT_RUNTIME
    assert "FAIL" in out and "seed " in out


# ---------- bench-par ----------


def test_bench_rows():
    rows = bench_rows(1, 15)
    assert [r["value"] for r in rows][-1] == 610
    for r in rows:
        assert r["span"] <= r["work"]
        if r["n"] >= 5:
            assert r["speedup"] > 1


def test_bench_par_text(capsys):
    code, out, _ = run(capsys, "bench-par", "--min-n", "9", "--max-n", "10")
    assert code == EXIT_OK
    assert out.splitlines() == [
        "   n    value     work   span   speedup",
        "   9       34       54      8     6.750",
        "  10       55       88      9     9.778",
    ]


def test_bench_par_json(capsys):
    _, out, _ = run(capsys, "bench-par", "--max-n", "3", "--output", "json")
    rows = json.loads(out)["rows"]
    assert rows[0] == {"n": 1, "value": 1, "work": 0, "span": 0, "speedup": None}
    assert rows[2]["speedup"] == 1.0


def test_module_entry_point(cfg):
    proc = subprocess.run(
        [sys.executable, "-m", "cbalias", "run", RESULTSIZE, "--config", cfg, "--strategy", "cbn", "--output", "json"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert [e["key"] for e in json.loads(proc.stdout)["events"]] == ["new_size", "new_size"]
