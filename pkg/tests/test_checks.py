"""Static semantic checks on the shipped examples and crafted violations."""
from pathlib import Path

import pytest

from wrightkit.checks import check_static, has_errors
from wrightkit.parser import parse_wright

FIXTURES = Path(__file__).parent / "fixtures"
CLEAN = ["double", "double_fail", "bogus", "clientserver", "pipeconn",
         "calculformule", "abc", "client_serveur", "gestionparking"]


@pytest.mark.parametrize("name", CLEAN)
def test_examples_are_clean(name):
    unit = parse_wright((FIXTURES / f"{name}.wright").read_text())
    assert check_static(unit) == []


def test_port_shared_by_attachments_is_flagged_softly():
    unit = parse_wright((FIXTURES / "diner.wright").read_text())
    diags = check_static(unit)
    assert diags, "expected findings on the shared fork ports"
    assert {d.rule_id for d in diags} == {"W-R6"}
    assert all(d.severity == "warning" for d in diags)
    assert not has_errors(diags)


def test_unknown_type_in_instance_is_an_error():
    unit = parse_wright(
        "Configuration Broken\n"
        "Component C\n"
        "  Port P = a -> §\n"
        "  Computation = P.a -> §\n"
        "Instances\n"
        "  c1 : Missing\n"
        "Attachments\n"
        "End Configuration\n")
    diags = check_static(unit)
    assert has_errors(diags)


def test_dangling_attachment_is_an_error():
    unit = parse_wright(
        "Configuration Broken\n"
        "Component C\n"
        "  Port P = a -> §\n"
        "  Computation = P.a -> §\n"
        "Connector N\n"
        "  Role R = a -> §\n"
        "  Glue = R.a -> §\n"
        "Instances\n"
        "  c1 : C\n"
        "  n1 : N\n"
        "Attachments\n"
        "  c1.Nope as n1.R\n"
        "End Configuration\n")
    assert has_errors(check_static(unit))
