"""Parser and pretty-printer round trips."""
from pathlib import Path

import pytest

from wrightkit.model import normalize_process
from wrightkit.parser import (
    WrightSyntaxError,
    format_process,
    format_unit,
    parse_process,
    parse_wright,
)

FIXTURES = Path(__file__).parent / "fixtures"
ALL_UNITS = sorted(p.name for p in FIXTURES.glob("*.wright"))


@pytest.mark.parametrize("name", ALL_UNITS)
def test_format_parse_fixpoint(name):
    unit = parse_wright((FIXTURES / name).read_text())
    printed = format_unit(unit)
    reparsed = parse_wright(printed)
    assert format_unit(reparsed) == printed
    assert reparsed == unit


@pytest.mark.parametrize("text", [
    "a -> b -> §",
    "(a -> P [] b -> §)",
    "(read?x -> P |~| _write!3 -> §)",
    "_e!x!y -> §",
])
def test_process_round_trip(text):
    expr = parse_process(text)
    assert parse_process(format_process(expr)) == expr


@pytest.mark.parametrize("text", [
    "a -> b -> §",
    "((a -> §) [] (b -> §))",
    "(a -> P |~| §)",
])
def test_normalize_idempotent(text):
    once = normalize_process(parse_process(text))
    assert normalize_process(once) == once


@pytest.mark.parametrize("bad", [
    "",
    "Component NoBody",
    "Style X\nComponent C\n  Port P = a ->\nEnd Style",
    "Configuration C\nInstances\nx : Missing\nEnd Configuration garbage",
])
def test_syntax_errors(bad):
    with pytest.raises(WrightSyntaxError):
        parse_wright(bad)
