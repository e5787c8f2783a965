import json
import subprocess
import sys

import pytest

from permuniv.cli import main


def test_usage_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["nosuch"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["scan", "--k", "x"])
    assert exc.value.code == 1
    assert main(["universality", "--k", "3"]) == 1
    assert main(["coupling", "--k", "3", "--n", "61", "--trials", "2"]) == 1


def test_success_writes_file(tmp_path):
    out = tmp_path / "u.json"
    assert main(["universality", "--k", "3", "--n", "5", "--exhaustive", "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["summary"]["trials"] == 120


def test_presets_and_stdout(capsys):
    assert main(["coupling", "--k", "2", "--n", "square20", "--trials", "3", "--pattern", "21"]) == 0
    text = capsys.readouterr().out
    assert '"n": 80' in text


def test_violation_exit_2(monkeypatch):
    import permuniv.experiments as ex

    def broken(config, index):
        rec = ex._trial_coupling(config, index)
        rec["problems"] = "forced"
        return rec

    monkeypatch.setitem(ex.TRIAL_FUNCS, "coupling_audit", broken)
    assert main(["coupling", "--k", "1", "--n", "8", "--trials", "2"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "permuniv", "ldelta", "--k", "5", "--trials", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("trial_index,")
