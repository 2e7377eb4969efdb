"""Finite operational semantics for CSP-Wright processes.

Builds labeled transition systems from behavior trees and provides the
semantic operators used by verification and export: alphabets, projection,
determinization, alphabet augmentation, renaming, parallel composition and
hiding.
"""
from __future__ import annotations

from dataclasses import dataclass
from collections.abc import Callable, Iterable, Mapping, Sequence

from .model import (
    Configuration,
    EventExpr,
    ExternalChoice,
    Internal,
    InternalChoice,
    Observed,
    Prefix,
    ProcessExpr,
    ProcessRef,
    Signalled,
    Stop,
    Success,
    SuccessTick,
    event_name,
    iter_events,
)

# Transition labels: plain event-name strings plus two reserved sentinels.
TAU = "τ"      # internal step
TICK = "√"     # successful termination

# Sentinel for parallel(): synchronize on the intersection of the universes.
AUTO = object()

DEFAULT_MAX_STATES = 100_000


class StateBudgetExceeded(RuntimeError):
    def __init__(self, max_states: int):
        super().__init__(f"state budget exceeded ({max_states} states)")
        self.max_states = max_states


class UnguardedRecursion(ValueError):
    pass


class UnresolvedRef(KeyError):
    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


# ---------------------------------------------------------------------------
# Alphabets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlphabetInfo:
    all: frozenset[str]
    initialized: frozenset[str]
    observed: frozenset[str]


def resolve_ref(name: str, env: Mapping[str, ProcessExpr]) -> ProcessExpr:
    if name in env:
        return env[name]
    # recursion back to the enclosing Computation/Glue is case-insensitive
    for key, val in env.items():
        if key.lower() == name.lower() and key.lower() in ("computation", "glue"):
            return val
    raise UnresolvedRef(name)


def behavior_env(
    self_name: str,
    behavior: ProcessExpr,
    local_defs: Iterable[tuple[str, ProcessExpr]] = (),
) -> dict[str, ProcessExpr]:
    """Environment for a named behavior: itself plus its local definitions."""
    env = {name: proc for name, proc in local_defs}
    env[self_name] = behavior
    return env


def alphabet(expr: ProcessExpr, env: Mapping[str, ProcessExpr] | None = None) -> AlphabetInfo:
    env = env or {}
    seen_exprs: set[int] = set()
    visited_refs: set[str] = set()
    all_names: set[str] = set()
    initialized: set[str] = set()
    observed: set[str] = set()

    def walk(e: ProcessExpr):
        if isinstance(e, (Success, Stop)):
            return
        if isinstance(e, ProcessRef):
            key = e.name.lower()
            if key in visited_refs:
                return
            visited_refs.add(key)
            walk(resolve_ref(e.name, env))
            return
        if isinstance(e, Prefix):
            ev = e.event
            if not isinstance(ev, SuccessTick):
                name = event_name(ev)
                all_names.add(name)
                if isinstance(ev, Observed):
                    observed.add(name)
                else:   # Signalled and Internal: the process itself drives them
                    initialized.add(name)
            walk(e.target)
            return
        if isinstance(e, (ExternalChoice, InternalChoice)):
            for b in e.branches:
                walk(b)
            return
        raise TypeError(f"not a process expression: {e!r}")

    walk(expr)
    return AlphabetInfo(frozenset(all_names), frozenset(initialized), frozenset(observed))


# ---------------------------------------------------------------------------
# Labeled transition systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lts:
    num_states: int
    initial: int
    transitions: tuple[tuple[int, str, int], ...]
    event_universe: frozenset[str]

    def successors(self) -> list[list[tuple[str, int]]]:
        out: list[list[tuple[str, int]]] = [[] for _ in range(self.num_states)]
        for src, label, dst in self.transitions:
            out[src].append((label, dst))
        return out

    def labels_used(self) -> frozenset[str]:
        return frozenset(
            lab for _, lab, _ in self.transitions if lab not in (TAU, TICK))


def _initial_moves(
    expr: ProcessExpr,
    env: Mapping[str, ProcessExpr],
    unfolding: set[str],
) -> list[tuple[str, object]]:
    """Labelled moves of an expression; target ``None`` is the success sink."""
    if isinstance(expr, Success):
        return [(TICK, None)]
    if isinstance(expr, Stop):
        return []
    if isinstance(expr, ProcessRef):
        key = expr.name.lower()
        if key in unfolding:
            raise UnguardedRecursion(
                f"process reference cycle with no event: {expr.name}")
        return _initial_moves(
            resolve_ref(expr.name, env), env, unfolding | {key})
    if isinstance(expr, Prefix):
        if isinstance(expr.event, SuccessTick):
            return [(TICK, None)]
        return [(event_name(expr.event), expr.target)]
    if isinstance(expr, InternalChoice):
        return [(TAU, b) for b in expr.branches]
    if isinstance(expr, ExternalChoice):
        moves: list[tuple[str, object]] = []
        for b in expr.branches:
            moves.extend(_initial_moves(b, env, unfolding))
        return moves
    raise TypeError(f"not a process expression: {expr!r}")


def _canonical(expr: ProcessExpr, env: Mapping[str, ProcessExpr]) -> ProcessExpr:
    seen: set[str] = set()
    while isinstance(expr, ProcessRef):
        key = expr.name.lower()
        if key in seen:
            raise UnguardedRecursion(
                f"process reference cycle with no event: {expr.name}")
        seen.add(key)
        expr = resolve_ref(expr.name, env)
    return expr


def build_lts(
    expr: ProcessExpr,
    env: Mapping[str, ProcessExpr] | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> Lts:
    """Expand a behavior tree into a finite LTS.

    States are keyed by the structural identity of the residual expression,
    which keeps name-guarded recursion finite. The success event leads to a
    shared sink state with no outgoing transitions.
    """
    env = env or {}
    if max_states <= 0:
        raise ValueError("max_states must be positive")
    info = alphabet(expr, env)

    state_of: dict[ProcessExpr, int] = {}
    transitions: list[tuple[int, str, int]] = []
    sink_id: int | None = None
    next_id = 0

    def alloc() -> int:
        nonlocal next_id
        sid = next_id
        next_id += 1
        if next_id > max_states:
            raise StateBudgetExceeded(max_states)
        return sid

    def state_for(e: ProcessExpr) -> int:
        e = _canonical(e, env)
        if e in state_of:
            return state_of[e]
        sid = alloc()
        state_of[e] = sid
        pending.append((sid, e))
        return sid

    def sink() -> int:
        nonlocal sink_id
        if sink_id is None:
            sink_id = alloc()
        return sink_id

    pending: list[tuple[int, ProcessExpr]] = []
    initial = state_for(expr)
    while pending:
        sid, e = pending.pop()
        for label, target in _initial_moves(e, env, set()):
            dst = sink() if target is None else state_for(target)
            transitions.append((sid, label, dst))

    return Lts(next_id, initial, tuple(transitions), info.all)


def lts_of_behavior(
    name: str,
    behavior: ProcessExpr,
    local_defs: Iterable[tuple[str, ProcessExpr]] = (),
    max_states: int = DEFAULT_MAX_STATES,
) -> Lts:
    return build_lts(behavior, behavior_env(name, behavior, local_defs), max_states)


# ---------------------------------------------------------------------------
# Operators on LTSs
# ---------------------------------------------------------------------------

def relabel(p: Lts, fn: Callable[[str], str], universe: frozenset[str]) -> Lts:
    trans = tuple(
        (src, lab if lab in (TAU, TICK) else fn(lab), dst)
        for src, lab, dst in p.transitions)
    return Lts(p.num_states, p.initial, trans, universe)


def rename(p: Lts, fn: Callable[[str], str]) -> Lts:
    return relabel(p, fn, frozenset(fn(e) for e in p.event_universe))


def project(p: Lts, events: Iterable[str]) -> Lts:
    """Restrict observations to ``events``; other events become internal."""
    keep = frozenset(events)
    return relabel(
        p,
        lambda lab: lab if lab in keep else TAU,
        p.event_universe & keep)


def hide(p: Lts, hidden: Iterable[str]) -> Lts:
    hid = frozenset(hidden)
    return relabel(
        p,
        lambda lab: TAU if lab in hid else lab,
        p.event_universe - hid)


def augment(p: Lts, extra: Iterable[str]) -> Lts:
    return Lts(p.num_states, p.initial, p.transitions,
               p.event_universe | frozenset(extra))


def tau_closure(states: frozenset[int], succ: list[list[tuple[str, int]]]) -> frozenset[int]:
    out = set(states)
    stack = list(states)
    while stack:
        s = stack.pop()
        for lab, dst in succ[s]:
            if lab == TAU and dst not in out:
                out.add(dst)
                stack.append(dst)
    return frozenset(out)


def determinize(p: Lts, max_states: int = DEFAULT_MAX_STATES) -> Lts:
    """Subset construction over visible labels (success included)."""
    succ = p.successors()
    init = tau_closure(frozenset([p.initial]), succ)
    ids: dict[frozenset[int], int] = {init: 0}
    pending = [init]
    transitions: list[tuple[int, str, int]] = []
    while pending:
        macro = pending.pop()
        sid = ids[macro]
        targets: dict[str, set[int]] = {}
        for s in macro:
            for lab, dst in succ[s]:
                if lab != TAU:
                    targets.setdefault(lab, set()).add(dst)
        for lab in sorted(targets):
            nxt = tau_closure(frozenset(targets[lab]), succ)
            if nxt not in ids:
                ids[nxt] = len(ids)
                if len(ids) > max_states:
                    raise StateBudgetExceeded(max_states)
                pending.append(nxt)
            transitions.append((sid, lab, ids[nxt]))
    return Lts(len(ids), 0, tuple(transitions), p.event_universe)


def compose(
    parts: Sequence[Lts],
    syncs: Sequence[Iterable[str]],
    tick_parties: Iterable[int] | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> tuple[Lts, dict[int, tuple[int, ...]]]:
    """Generalized parallel product.

    A visible event ``e`` is taken jointly by every operand whose sync set
    contains ``e``; if no sync set contains it, any single operand performs it
    alone. Internal steps always interleave. Success is a joint step of all
    operands listed in ``tick_parties`` (default: all of them); the other
    operands neither drive nor block termination.

    Returns the product LTS plus a map from product state id to the tuple of
    operand states (used to report which operand is blocked in a deadlock).
    """
    sync_sets = [frozenset(s) for s in syncs]
    if len(sync_sets) != len(parts):
        raise ValueError("one sync set per operand required")
    tick_set = set(range(len(parts))) if tick_parties is None else set(tick_parties)
    succs = [p.successors() for p in parts]

    init = tuple(p.initial for p in parts)
    ids: dict[tuple[int, ...], int] = {init: 0}
    pending = [init]
    transitions: list[tuple[int, str, int]] = []
    sink_id: int | None = None

    def state_id(t: tuple[int, ...]) -> int:
        if t not in ids:
            ids[t] = len(ids)
            if len(ids) > max_states + 1:
                raise StateBudgetExceeded(max_states)
            pending.append(t)
        return ids[t]

    while pending:
        state = pending.pop()
        sid = ids[state]
        local = [succs[i][state[i]] for i in range(len(parts))]
        # internal steps interleave
        for i, moves in enumerate(local):
            for lab, dst in moves:
                if lab == TAU:
                    nxt = state[:i] + (dst,) + state[i + 1:]
                    transitions.append((sid, TAU, state_id(nxt)))
        # visible events
        labels = {lab for moves in local for lab, _ in moves
                  if lab not in (TAU, TICK)}
        for lab in sorted(labels):
            participants = [i for i in range(len(parts)) if lab in sync_sets[i]]
            if participants:
                choices = []
                for i in participants:
                    opts = [dst for l2, dst in local[i] if l2 == lab]
                    if not opts:
                        choices = None
                        break
                    choices.append((i, opts))
                if choices is None:
                    continue
                combos: list[tuple[int, ...]] = [state]
                for i, opts in choices:
                    combos = [c[:i] + (dst,) + c[i + 1:]
                              for c in combos for dst in opts]
                for nxt in combos:
                    transitions.append((sid, lab, state_id(nxt)))
            else:
                for i, moves in enumerate(local):
                    for l2, dst in moves:
                        if l2 == lab:
                            nxt = state[:i] + (dst,) + state[i + 1:]
                            transitions.append((sid, lab, state_id(nxt)))
        # joint success among the tick parties
        if tick_set and all(
                any(l2 == TICK for l2, _ in local[i]) for i in tick_set):
            if sink_id is None:
                sink_key = tuple(-1 for _ in parts)
                sink_id = state_id(sink_key)
                pending.remove(sink_key)
            transitions.append((sid, TICK, sink_id))

    universe = frozenset().union(*(p.event_universe for p in parts))
    lts = Lts(len(ids), 0, tuple(transitions), universe)
    return lts, {v: k for k, v in ids.items()}


def parallel(p: Lts, q: Lts, sync=AUTO, max_states: int = DEFAULT_MAX_STATES) -> Lts:
    """Binary parallel composition sharing the events in ``sync``."""
    if sync is AUTO:
        sync = p.event_universe & q.event_universe
    lts, _ = compose([p, q], [sync, sync], max_states=max_states)
    return lts


# ---------------------------------------------------------------------------
# Configuration-level qualification
# ---------------------------------------------------------------------------

def qualify_event_fn(prefix: str) -> Callable[[str], str]:
    return lambda name: f"{prefix}.{name}"


def qualify_configuration(
    config: Configuration,
    max_states: int = DEFAULT_MAX_STATES,
) -> dict[str, Lts]:
    """Per instance, the computation/glue LTS with globally unique event names.

    Component instance ``N``: ``P.e`` becomes ``N.P.e`` and a bare ``e``
    becomes ``N.e``. Connector instance: each glue event ``R.e`` is renamed
    to ``M.Q.e`` when some attachment binds role ``R`` of this instance to
    port ``Q`` of component instance ``M``; unattached roles keep the
    ``instance.R.e`` form.
    """
    out: dict[str, Lts] = {}
    for inst in config.component_instances:
        ctype = config.component_type(inst.type_name)
        if ctype is None:
            continue
        lts = lts_of_behavior("Computation", ctype.computation, ctype.local_defs,
                              max_states)
        out[inst.name] = rename(lts, qualify_event_fn(inst.name))
    for inst in config.connector_instances:
        ntype = config.connector_type(inst.type_name)
        if ntype is None:
            continue
        bound: dict[str, tuple[str, str]] = {}
        for att in config.attachments:
            if att.connector_instance == inst.name:
                bound[att.role] = (att.component_instance, att.port)

        def rename_glue(name: str, bound=bound, inst=inst) -> str:
            role, dot, rest = name.partition(".")
            if dot and role in bound:
                m, q = bound[role]
                return f"{m}.{q}.{rest}"
            return f"{inst.name}.{name}"

        lts = lts_of_behavior("Glue", ntype.glue, ntype.local_defs, max_states)
        out[inst.name] = rename(lts, rename_glue)
    return out


def traces_up_to(p: Lts, depth: int) -> frozenset[tuple[str, ...]]:
    """All visible traces (success included) of length ≤ depth. Test helper."""
    succ = p.successors()
    seen: set[tuple[tuple[str, ...], int]] = set()
    traces: set[tuple[str, ...]] = {()}
    stack: list[tuple[tuple[str, ...], int]] = [((), p.initial)]
    while stack:
        trace, s = stack.pop()
        if (trace, s) in seen:
            continue
        seen.add((trace, s))
        for lab, dst in succ[s]:
            if lab == TAU:
                stack.append((trace, dst))
            elif len(trace) < depth:
                ext = trace + (lab if lab != TICK else TICK,)
                traces.add(ext)
                stack.append((ext, dst))
    return frozenset(traces)
