"""Command-line interface: exit codes and report formats."""
import json
from pathlib import Path

from wrightkit.cli import main

FIXTURES = Path(__file__).parent / "fixtures"


def fx(name: str) -> str:
    return str(FIXTURES / name)


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_clean_unit(capsys):
    code, out, err = run(capsys, "check", fx("abc.wright"))
    assert code == 0
    assert "0 error(s)" in out


def test_check_missing_file_is_input_error(capsys):
    code, _, err = run(capsys, "check", "nosuchfile.wright")
    assert code == 2
    assert "nosuchfile.wright" in err


def test_check_syntax_error_is_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.wright"
    bad.write_text("Style Broken\nComponent C\n  Port P = a ->\nEnd Style\n")
    code, _, err = run(capsys, "check", str(bad))
    assert code == 2


def test_verify_pass_and_fail(capsys):
    assert run(capsys, "verify", fx("client_serveur.wright"))[0] == 0
    code, out, err = run(capsys, "verify", fx("bogus.wright"))
    assert code == 1
    assert "FAILS" in out
    assert "counterexample" in err


def test_verify_resource_bound(capsys):
    code, _, _ = run(capsys, "verify", fx("abc.wright"), "--max-states", "2")
    assert code == 3


def test_verify_jobs_flag_does_not_change_reports(capsys):
    _, base, _ = run(capsys, "--format", "json", "verify", fx("abc.wright"))
    _, jobs, _ = run(capsys, "--format", "json", "verify", fx("abc.wright"),
                     "--jobs", "4")
    assert json.loads(base)["reports"] == json.loads(jobs)["reports"]


def test_verify_json_matches_library(capsys):
    from wrightkit.parser import parse_wright
    from wrightkit.refinement import verify_configuration

    code, out, _ = run(capsys, "--format", "json", "verify",
                       fx("bogus.wright"))
    assert code == 1
    payload = json.loads(out)
    unit = parse_wright((FIXTURES / "bogus.wright").read_text())
    assert payload["schemaVersion"] == 1
    assert payload["reports"] == [r.to_json()
                                  for r in verify_configuration(unit)]


def test_export_csp_writes_script(tmp_path, capsys):
    out_file = tmp_path / "abc.fdr2"
    code, _, _ = run(capsys, "export-csp", fx("abc.wright"),
                     "-o", str(out_file))
    assert code == 0
    assert "assert OutputG [FD= COMPOutput" in out_file.read_text()


def test_gen_ada_writes_code(tmp_path, capsys):
    out_file = tmp_path / "out.adb"
    code, _, _ = run(capsys, "gen-ada", fx("diner.wright"),
                     "-o", str(out_file))
    assert code == 0
    assert out_file.read_text().startswith("procedure Diner is")


def test_gen_ada_on_style_is_input_error(capsys):
    assert run(capsys, "gen-ada", fx("clientserver.wright"),
               "-o", "/tmp/ignored.adb")[0] == 2


def test_check_assembly_exit_codes(capsys):
    assert run(capsys, "check-assembly", fx("gab1.json"))[0] == 0
    code, _, err = run(capsys, "check-assembly", fx("gab2.json"),
                       "--suite", "uml")
    assert code == 1
    assert "UML-service_offert_requis" in err


def test_check_assembly_wrong_suite_is_input_error(capsys):
    assert run(capsys, "check-assembly", fx("healthcare.json"),
               "--suite", "uml")[0] == 2


def test_check_assembly_json_output(capsys):
    code, out, _ = run(capsys, "--format", "json", "check-assembly",
                       fx("healthcare.json"))
    assert code == 0
    payload = json.loads(out)
    assert payload["dialect"] == "Ugatze"
    assert payload["suites"] == ["ugatze", "qos"]
    assert payload["diagnostics"] == []
