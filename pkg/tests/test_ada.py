"""Ada generation, re-parsing, and well-formedness checking."""
from pathlib import Path

import pytest

from wrightkit.ada import (
    StyleNotTranslatable,
    UnattachedInterface,
    check_wellformed,
    generate_ada,
    generate_ada_text,
    output_filename,
    parse_ada,
)
from wrightkit.parser import parse_wright

FIXTURES = Path(__file__).parent / "fixtures"
CONFIGURATIONS = ["client_serveur", "diner", "gestionparking"]


def load(name):
    return parse_wright((FIXTURES / f"{name}.wright").read_text())


@pytest.mark.parametrize("name", CONFIGURATIONS)
def test_generated_code_reparses_and_is_wellformed(name):
    text = generate_ada_text(load(name))
    unit = parse_ada(text)
    assert check_wellformed(unit) == []


@pytest.mark.parametrize("name", CONFIGURATIONS)
def test_generation_is_deterministic(name):
    unit = load(name)
    assert generate_ada_text(unit) == generate_ada_text(unit)


def test_output_filename_is_lowercased_configuration_name():
    assert output_filename(load("client_serveur")) == "client_serveur.adb"
    assert output_filename(load("gestionparking")) == "gestionparking.adb"


def test_styles_are_not_translatable():
    with pytest.raises(StyleNotTranslatable):
        generate_ada(load("clientserver"))


def test_unattached_signalled_event_is_rejected():
    unit = parse_wright(
        "Configuration Orphan\n"
        "Component C\n"
        "  Port P = _a -> §\n"
        "  Computation = _P.a -> §\n"
        "Instances\n"
        "  c1 : C\n"
        "Attachments\n"
        "End Configuration\n")
    with pytest.raises(UnattachedInterface):
        generate_ada(unit)


BAD_ADA = """\
procedure Demo is
  task T is
    entry E;
  end T;
  task body T is
  begin
    loop
      accept Other;
    end loop;
  end T;
begin
  null;
end Demo;
"""


def test_wellformedness_flags_foreign_accepts():
    problems = check_wellformed(parse_ada(BAD_ADA))
    assert problems
    assert any("Other" in p for p in problems)
