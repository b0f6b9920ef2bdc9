import json
import shutil

import pytest

import c6proto_cli
from c6proto.modules.tables import DATA_DIR
from c6proto_cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main, parse_secret, resolve_seed


def test_version():
    assert main(['--version']) == EXIT_OK


def test_no_command():
    assert main([]) == EXIT_USAGE


def test_run_teleport(capsys):
    assert main(['--no-color', 'run', '--protocol', 'teleport', '--seed', '1']) == EXIT_OK
    assert "PROTOCOL TRANSCRIPT" in capsys.readouterr().out


def test_run_with_secret_and_phase():
    assert main(['run', '--protocol', 'qis2', '--secret', '1,0,0,1j', '--seed', '2']) == EXIT_OK
    assert main(['run', '--protocol', 'rsp', '--phi', '0.5', '--seed', '2']) == EXIT_OK


@pytest.mark.parametrize("secret", ['1,1,1', '0,0,0,0', 'a,b,c,d'])
def test_run_bad_secret(secret):
    assert main(['run', '--protocol', 'teleport', '--secret', secret]) == EXIT_USAGE


def test_run_bad_tolerance():
    assert main(['run', '--protocol', 'teleport', '--tol', '0']) == EXIT_USAGE


def test_unknown_protocol():
    assert main(['run', '--protocol', 'swap']) == EXIT_USAGE


def test_run_json_is_byte_stable(tmp_path):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(['run', '--protocol', 'qis1', '--seed', '9', '-o', str(first)]) == EXIT_OK
    assert main(['run', '--protocol', 'qis1', '--seed', '9', '-o', str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    assert json.loads(first.read_text(encoding="utf-8"))["seed"] == 9


def test_run_html_output(tmp_path):
    out = tmp_path / "run.html"
    assert main(['run', '--protocol', 'teleport', '--seed', '3', '-o', str(out)]) == EXIT_OK
    assert out.read_text(encoding="utf-8").startswith("<!DOCTYPE html>")


def test_verify_bundled_table():
    assert main(['verify', '--table', 'table1']) == EXIT_OK


def test_verify_missing_file(tmp_path):
    assert main(['verify', '--table', str(tmp_path / "nope.qt")]) == EXIT_USAGE


def test_verify_bad_assignment():
    assert main(['verify', '--table', 'table3', '--assignment', 'bob']) == EXIT_USAGE


def test_infer(tmp_path):
    out = tmp_path / "infer.json"
    assert main(['infer', '--table', 'table3', '-o', str(out)]) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["inference"]["score"] == 4


def test_fuzz(tmp_path):
    out = tmp_path / "fuzz.json"
    assert main(['fuzz', '--protocol', 'teleport', '--trials', '4', '--seed', '1', '-o', str(out)]) == EXIT_OK
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["passed"] is True
    assert data["cbits"] == {"4": 4}


def test_report_on_tampered_table(tmp_path):
    data_dir = tmp_path / "data"
    data_dir.mkdir()
    for path in DATA_DIR.iterdir():
        shutil.copy(path, data_dir / path.name)
    text = (data_dir / "table1.qt").read_text(encoding="utf-8")
    (data_dir / "table1.qt").write_text(text.replace("-b:11", "+b:11", 1), encoding="utf-8")
    out = tmp_path / "report.json"
    argv = ["--no-color", "report", "--trials", "3", "--seed", "1", "--data-dir", str(data_dir), "--json", str(out)]
    assert main(argv) == EXIT_FAILED
    data = json.loads(out.read_text(encoding="utf-8"))
    assert data["passed"] is False
    table_data = next(c for c in data["criteria"] if c["criterion"] == "T")
    assert "table 1 rows [1] undocumented" in table_data["message"]


def test_tables():
    assert main(['tables']) == EXIT_OK


def test_dense(capsys):
    assert main(['dense', '--message', '21']) == EXIT_OK
    assert "Decoded:   21 (10101)" in capsys.readouterr().out
    assert main(['dense', '--message', '40']) == EXIT_USAGE


def test_resolve_seed(monkeypatch):
    monkeypatch.delenv("QC6_SEED", raising=False)
    assert resolve_seed(5) == 5
    assert resolve_seed(None) == 2024
    monkeypatch.setenv("QC6_SEED", "77")
    assert resolve_seed(None) == 77
    monkeypatch.setenv("QC6_SEED", "x")
    with pytest.raises(ValueError):
        resolve_seed(None)


def test_parse_secret():
    assert parse_secret('random') is None
    secret = parse_secret('1, 1, 1, 1')
    assert secret.alpha == pytest.approx(0.5)


def test_color_toggle():
    main(['--no-color', 'tables'])
    assert not c6proto_cli._COLOR
    assert "\x1b[" not in c6proto_cli.ok("x")
