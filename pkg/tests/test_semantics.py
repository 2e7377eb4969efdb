"""Transition-system construction and operators."""
import pytest

from wrightkit.parser import parse_process
from wrightkit.semantics import (
    Lts,
    StateBudgetExceeded,
    TAU,
    TICK,
    determinize,
    hide,
    lts_of_behavior,
    parallel,
    project,
    traces_up_to,
)


def behavior_lts(text: str, **defs) -> Lts:
    return lts_of_behavior("P", parse_process(text),
                           tuple((k, parse_process(v))
                                 for k, v in defs.items()))


def test_prefix_traces():
    lts = behavior_lts("a -> b -> §")
    assert traces_up_to(lts, 4) == frozenset(
        {(), ("a",), ("a", "b"), ("a", "b", TICK)})


def test_recursion_is_finite():
    lts = behavior_lts("a -> P", P="a -> P")
    assert ("a", "a", "a") in traces_up_to(lts, 3)


def test_hide_removes_labels():
    lts = hide(behavior_lts("a -> b -> §"), {"a"})
    assert ("b",) in traces_up_to(lts, 3)
    assert all("a" not in t for t in traces_up_to(lts, 3))


def test_project_keeps_only_selected_labels():
    lts = project(behavior_lts("a -> b -> a -> §"), {"a"})
    assert ("a", "a") in traces_up_to(lts, 4)
    assert all("b" not in t for t in traces_up_to(lts, 4))


def test_determinize_is_idempotent_on_traces():
    lts = behavior_lts("(a -> b -> § |~| a -> c -> §)")
    det = determinize(lts)
    assert traces_up_to(det, 5) == traces_up_to(determinize(det), 5)
    assert traces_up_to(det, 5) == traces_up_to(lts, 5)


def test_parallel_synchronizes_shared_events():
    p = behavior_lts("a -> b -> §")
    q = behavior_lts("a -> c -> §")
    traces = traces_up_to(parallel(p, q), 4)
    assert all(not t or t[0] == "a" for t in traces)
    assert ("a", "b", "c") in traces or ("a", "c", "b") in traces


def test_state_budget_is_enforced():
    with pytest.raises(StateBudgetExceeded):
        lts_of_behavior("P", parse_process("a -> b -> c -> a -> §"), (),
                        max_states=2)
