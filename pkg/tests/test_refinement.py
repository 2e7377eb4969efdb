"""Refinement engine behavior beyond the acceptance gate."""
from pathlib import Path

from wrightkit.parser import parse_process, parse_wright
from wrightkit.refinement import (
    check_deadlock_free,
    fd_model,
    refines_fd,
    verify_configuration,
)
from wrightkit.semantics import lts_of_behavior

FIXTURES = Path(__file__).parent / "fixtures"


def model(text: str, **defs):
    return fd_model(lts_of_behavior(
        "P", parse_process(text),
        tuple((k, parse_process(v)) for k, v in defs.items())))


def test_internal_choice_refined_by_branch():
    spec = model("(a -> § |~| b -> §)")
    assert refines_fd(spec, model("a -> §")).holds
    assert not refines_fd(model("a -> §"), spec).holds


def test_external_choice_not_refined_by_internal():
    assert not refines_fd(model("(a -> § [] b -> §)"),
                          model("(a -> § |~| b -> §)")).holds


def test_deadlock_detection():
    stuck = lts_of_behavior("P", parse_process("(a -> § [] b -> STOP)"), ())
    verdict = check_deadlock_free(stuck)
    assert not verdict.holds
    assert verdict.counterexample.trace == ("b",)
    assert check_deadlock_free(
        lts_of_behavior("P", parse_process("a -> §"), ())).holds


def test_state_budget_reports_resource_counterexamples():
    unit = parse_wright((FIXTURES / "abc.wright").read_text())
    reports = verify_configuration(unit, max_states=1)
    assert reports
    for report in reports:
        assert not report.verdict.holds
        assert report.verdict.counterexample.kind == "resource"


def test_verify_is_deterministic():
    unit = parse_wright((FIXTURES / "gestionparking.wright").read_text())
    first = verify_configuration(unit)
    second = verify_configuration(unit)
    assert [(r.property_id, r.subject, r.verdict) for r in first] \
        == [(r.property_id, r.subject, r.verdict) for r in second]
    assert all(r.verdict.holds for r in first)
