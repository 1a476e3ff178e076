import json
import subprocess
import sys

import pytest

from cdimpact.cli import EXIT_INPUT, EXIT_OK, EXIT_UNRESOLVED, main

from conftest import ECU_NEW, ECU_OLD, RENAME_PRESETTING, ORM_RULE_TEXT
from test_checklist import ECU_CHECKLIST


@pytest.fixture
def ecu_files(tmp_path):
    old, new = tmp_path / "old.cd", tmp_path / "new.cd"
    old.write_text(ECU_OLD)
    new.write_text(ECU_NEW)
    return old, new


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_ecu_example(ecu_files, capsys):
    old, new = ecu_files
    code, out, err = run(["--old", old, "--new", new, "--builtin-rules"], capsys)
    assert code == EXIT_OK and out == ECU_CHECKLIST and err == ""


def test_identical_models(tmp_path, capsys):
    a, b = tmp_path / "a.cd", tmp_path / "b.cd"
    a.write_text(ECU_NEW)
    b.write_text(ECU_NEW)
    diff_out = tmp_path / "d.txt"
    code, out, _ = run(["--old", a, "--new", b, "--builtin-rules", "--diff-out", diff_out], capsys)
    assert (code, out, diff_out.read_text()) == (EXIT_OK, "", "")


def test_outputs(ecu_files, tmp_path, capsys):
    old, new = ecu_files
    out_file, js, diff = tmp_path / "c.txt", tmp_path / "c.json", tmp_path / "d.json"
    code, out, _ = run(["--old", old, "--new", new, "--builtin-rules", "--mode", "detailed", "--out", out_file,
                        "--json-out", js, "--diff-out", diff, "--diff-format", "json"], capsys)
    assert code == EXIT_OK and out == ""
    assert "Severity: critical" in out_file.read_text()
    assert [s["rule"] for s in json.loads(js.read_text())["sections"]] == ["ORM file analysis",
                                                                          "Property file analysis"]
    assert json.loads(diff.read_text())["differences"][0]["kind"] == "AddedClass"


def test_filters(ecu_files, capsys):
    old, new = ecu_files
    _, out, _ = run(["--old", old, "--new", new, "--builtin-rules", "--relevant-for", "ui"], capsys)
    assert out.startswith("Property file analysis:")
    _, out, _ = run(["--old", old, "--new", new, "--builtin-rules", "--min-severity", "critical"], capsys)
    assert out.startswith("ORM file analysis:") and "Property" not in out


def test_user_rules_and_presettings(tmp_path, capsys):
    old, new = tmp_path / "o.cd", tmp_path / "n.cd"
    old.write_text("package de { <<persistent>> class TroubleCd { <<persistent>> name: String [1] } }")
    new.write_text("package de { <<persistent>> class TroubleCd { <<persistent>> newName: String [1] } }")
    ups, rules, ext, orm = (tmp_path / n for n in ("p.ups", "r.ir", "e.irx", "m.orm"))
    ups.write_text(RENAME_PRESETTING)
    rules.write_text(ORM_RULE_TEXT)
    ext.write_text('define condition addedActiveClass = pc.addedClass() && pc.elementHasStereotype("active");\n'
                   "define placeholder ORMFileExcerpt = orm.excerpt();\n")
    orm.write_text("property de.TroubleCd#name -> column NAME\n")
    code, out, err = run(["--old", old, "--new", new, "--presettings", ups, "--rules", rules,
                          "--extensions", ext, "--orm-file", orm], capsys)
    assert code == EXIT_OK, err
    assert out == ("ORM File Analysis:\n=====\n- Rename entry in mapping file. Excerpt from file: property "
                   "de.TroubleCd#name -> column NAME (Causing model change: Renamed attribute "
                   "'de.TroubleCd#name' to 'newName')\n")


def test_malformed_rules(ecu_files, tmp_path, capsys):
    old, new = ecu_files
    bad = tmp_path / "bad.ir"
    bad.write_text('impactRule "x" {\n  description = "d"\n  impact { pc.addedClass( => "h" }\n}\n')
    code, out, err = run(["--old", old, "--new", new, "--rules", bad], capsys)
    assert code == EXIT_INPUT and out == ""
    assert "bad.ir:3:" in err


def test_malformed_model(ecu_files, tmp_path, capsys):
    old, _ = ecu_files
    bad = tmp_path / "bad.cd"
    bad.write_text("package p { class }")
    code, _, err = run(["--old", old, "--new", bad, "--builtin-rules"], capsys)
    assert code == EXIT_INPUT and "bad.cd:1:" in err


def test_unresolved_fail_policy(ecu_files, tmp_path, capsys):
    old, new = ecu_files
    rules = tmp_path / "r.ir"
    rules.write_text('impactRule "x" { description = "d" impact { pc.addedClass() => "see {missing}" } }')
    code, _, err = run(["--old", old, "--new", new, "--rules", rules, "--unresolved", "fail"], capsys)
    assert code == EXIT_UNRESOLVED and "missing" in err
    code, out, err = run(["--old", old, "--new", new, "--rules", rules], capsys)
    assert code == EXIT_OK and "{missing:unresolved}" in out and "warning" in err


@pytest.mark.parametrize("extra,msg", [([], "--rules"), (["--builtin-rules", "--threshold", "0"], "threshold"),
                                       (["--builtin-rules", "--same"], "different")])
def test_usage_errors(ecu_files, capsys, extra, msg):
    old, new = ecu_files
    if "--same" in extra:
        extra = [e for e in extra if e != "--same"]
        new = old
    code, _, err = run(["--old", old, "--new", new, *extra], capsys)
    assert code == EXIT_INPUT and msg in err


def test_missing_file(tmp_path, capsys):
    code, _, err = run(["--old", tmp_path / "a.cd", "--new", tmp_path / "b.cd", "--builtin-rules"], capsys)
    assert code == EXIT_INPUT and err.startswith("error:")


def test_synthetic_zero_edits(tmp_path, capsys):
    old, new, man = tmp_path / "o.cd", tmp_path / "n.cd", tmp_path / "m.txt"
    code, _, _ = run(["--old", old, "--new", new, "--gen-synthetic", "10,0,1", "--out", man], capsys)
    assert code == EXIT_OK and man.read_text() == "" and old.read_text() == new.read_text()


def test_synthetic_deterministic_and_recoverable(tmp_path, capsys):
    outputs = []
    for run_id in range(2):
        d = tmp_path / str(run_id)
        d.mkdir()
        code, _, _ = run(["--old", d / "o.cd", "--new", d / "n.cd", "--gen-synthetic", "50,10,7",
                          "--out", d / "m.txt"], capsys)
        assert code == EXIT_OK
        outputs.append([(d / f).read_bytes() for f in ("o.cd", "n.cd", "m.txt")])
    assert outputs[0] == outputs[1]
    d = tmp_path / "0"
    code, _, _ = run(["--old", d / "o.cd", "--new", d / "n.cd", "--builtin-rules", "--diff-out", d / "diff.txt"],
                     capsys)
    assert code == EXIT_OK
    assert sorted((d / "diff.txt").read_text().splitlines()) == sorted((d / "m.txt").read_text().splitlines())


def test_bad_synthetic_argument(tmp_path, capsys):
    with pytest.raises(SystemExit):
        main(["--old", str(tmp_path / "o"), "--new", str(tmp_path / "n"), "--gen-synthetic", "1,2"])


def test_console_script_module(ecu_files):
    old, new = ecu_files
    p = subprocess.run([sys.executable, "-m", "cdimpact.cli", "--old", str(old), "--new", str(new),
                        "--builtin-rules"], capture_output=True, text=True)
    assert p.returncode == 0 and p.stdout == ECU_CHECKLIST
