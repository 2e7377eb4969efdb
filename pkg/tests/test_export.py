"""FDR2 script export: determinism and report/assert correspondence."""
from pathlib import Path

import pytest

from wrightkit.fdr_export import emit_fdr_script
from wrightkit.parser import parse_wright
from wrightkit.refinement import verify_configuration

FIXTURES = Path(__file__).parent / "fixtures"
CONFIGURATIONS = ["abc", "calculformule", "client_serveur", "diner",
                  "gestionparking"]
STYLES = ["double", "bogus", "clientserver", "pipeconn"]


def load(name):
    return parse_wright((FIXTURES / f"{name}.wright").read_text())


@pytest.mark.parametrize("name", CONFIGURATIONS + STYLES)
def test_export_is_deterministic(name):
    unit = load(name)
    script = emit_fdr_script(unit)
    assert script == emit_fdr_script(unit)
    assert script.endswith("\n")


@pytest.mark.parametrize("name", CONFIGURATIONS + STYLES)
def test_asserts_mirror_verification_reports(name):
    unit = load(name)
    script = emit_fdr_script(unit)
    asserts = [line for line in script.splitlines()
               if line.startswith("assert ")]
    reports = verify_configuration(unit)
    assert asserts == [f"assert {r.spec_name} [FD= {r.impl_name}"
                       for r in reports]


def test_style_scripts_omit_attachment_checks():
    script = emit_fdr_script(load("clientserver"))
    assert "PLUS" not in script
    assert script.splitlines()[-1] == "-- End Style"


def test_calculformule_port_projection_processes():
    lines = emit_fdr_script(load("calculformule")).splitlines()
    assert "assert InG [FD= COMPIn" in lines
    assert "assert OutG [FD= COMPOut" in lines
    assert "PORTOutDETR = SKIP" in lines
