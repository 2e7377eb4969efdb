"""FDR2 script generation for Wright units.

The emitted script mirrors the structure checked by
:func:`wrightkit.refinement.verify_configuration`: every ``assert S [FD= I``
line corresponds 1-to-1, in order, with one PropertyReport.

Ordering conventions (deterministic, independent of hashing):
* the global ``channel`` line lists unqualified event names in reverse order
  of first syntactic occurrence;
* per-interface alphabets (``ALPHA_<Port>``, ``ALPHA_<Role>``) likewise;
* type-level alphabets (``ALPHA_<Comp>``, ``ALPHA_<Conn>``) list qualified
  events, component ones in first-occurrence order, connector ones reversed.
"""
from __future__ import annotations

from .model import (
    ComponentType,
    Configuration,
    ConnectorType,
    NamedBehavior,
    ExternalChoice,
    InternalChoice,
    Internal,
    Observed,
    Prefix,
    ProcessExpr,
    ProcessRef,
    Stop,
    Success,
    SuccessTick,
    event_name,
    iter_events,
)
from .semantics import (
    DEFAULT_MAX_STATES,
    TICK,
    Lts,
    behavior_env,
    build_lts,
    determinize,
    lts_of_behavior,
    project,
)


# ---------------------------------------------------------------------------
# Event collection
# ---------------------------------------------------------------------------

def _first_occurrence(exprs, *, qualified: bool) -> list[str]:
    seen: list[str] = []
    for expr in exprs:
        for ev in iter_events(expr):
            if isinstance(ev, (SuccessTick, Internal)):
                continue
            name = event_name(ev)
            if not qualified:
                name = name.rpartition(".")[2]
            if name not in seen:
                seen.append(name)
    return seen


def _behavior_exprs(nb: NamedBehavior):
    return [nb.behavior] + [p for _, p in nb.local_defs]


def _interface_events(nb: NamedBehavior) -> list[str]:
    """Unqualified event names of a port/role, reverse first occurrence."""
    return list(reversed(_first_occurrence(_behavior_exprs(nb), qualified=False)))


def _observed_events(nb: NamedBehavior) -> list[str]:
    seen: list[str] = []
    for expr in _behavior_exprs(nb):
        for ev in iter_events(expr):
            if isinstance(ev, Observed):
                name = event_name(ev).rpartition(".")[2]
                if name not in seen:
                    seen.append(name)
    return seen


def _global_channel_events(unit: Configuration) -> list[str]:
    exprs: list[ProcessExpr] = []
    for comp in unit.component_types:
        for port in comp.ports:
            exprs.extend(_behavior_exprs(port))
        exprs.append(comp.computation)
        exprs.extend(p for _, p in comp.local_defs)
    for conn in unit.connector_types:
        for role in conn.roles:
            exprs.extend(_behavior_exprs(role))
        exprs.append(conn.glue)
        exprs.extend(p for _, p in conn.local_defs)
    return list(reversed(_first_occurrence(exprs, qualified=False)))


# ---------------------------------------------------------------------------
# Process rendering
# ---------------------------------------------------------------------------

def _render(expr: ProcessExpr, refs: dict[str, str]) -> str:
    if isinstance(expr, Success):
        return "SKIP"
    if isinstance(expr, Stop):
        return "STOP"
    if isinstance(expr, ProcessRef):
        if expr.name in refs:
            return refs[expr.name]
        low = expr.name.lower()
        for key, val in refs.items():
            if key.lower() == low:
                return val
        return expr.name
    if isinstance(expr, Prefix):
        if isinstance(expr.event, SuccessTick):
            return "SKIP"
        return f"({event_name(expr.event)} -> {_render(expr.target, refs)})"
    if isinstance(expr, (ExternalChoice, InternalChoice)):
        op = "[]" if isinstance(expr, ExternalChoice) else "|~|"
        parts = [_render(b, refs) for b in expr.branches]
        out = parts[-1]
        for left in reversed(parts[:-1]):
            out = f"({left} {op} {out})"
        return out
    raise TypeError(f"not a process expression: {expr!r}")


def _render_lts(lts: Lts, root_name: str, priority: list[str]) -> str:
    """Render a (deterministic) transition system as an FDR process term.

    Branches are ordered by the first occurrence of their (unqualified) event
    in the original behavior text; termination renders last as SKIP. States
    revisited other than through the initial state get auxiliary bindings,
    which the corpus never needs; they render inline via their chain."""
    succ = lts.successors()

    def rank(label: str) -> tuple[int, str]:
        base = label.rpartition(".")[2]
        try:
            return (priority.index(base), label)
        except ValueError:
            return (len(priority), label)

    def render_state(state: int, path: tuple[int, ...]) -> str:
        if state == lts.initial and path:
            return root_name
        if state in path:
            return root_name  # conservative tie-off for non-root cycles
        moves = sorted(succ[state], key=lambda m: rank(m[0]))
        if not moves:
            return "STOP"
        parts = []
        for label, dst in moves:
            if label == TICK:
                parts.append("SKIP")
            else:
                parts.append(
                    f"({label} -> {render_state(dst, path + (state,))})")
        # SKIP branch goes last
        parts.sort(key=lambda s: s == "SKIP")
        out = parts[-1]
        for left in reversed(parts[:-1]):
            out = f"({left} [] {out})"
        return out

    return render_state(lts.initial, ())


def _refs_for(nb: NamedBehavior, own: str) -> dict[str, str]:
    refs = {nb.name: own}
    for name, _ in nb.local_defs:
        refs[name] = name
    return refs


def _set(items) -> str:
    return "{" + ", ".join(items) + "}"


def _bar_set(items) -> str:
    return "{|" + ", ".join(items) + "|}"


# ---------------------------------------------------------------------------
# Sections
# ---------------------------------------------------------------------------

_PREAMBLE = """\
-- FDR compression functions
transparent diamond
transparent normalise
-- Wright defined processes
channel abstractEvent
DFA = abstractEvent -> DFA |~| SKIP
quant_semi({},_) = SKIP
quant_semi(S,PARAM) = |~| i:S @ PARAM(i) ; quant_semi(diff(S,{i}),PARAM)
power_set({}) = {}
power_set(S) = { union(y,{x}) | x <- S, y <- power_set(diff(S,{x}))}"""


def _port_detr(port: NamedBehavior, max_states: int) -> Lts:
    base = lts_of_behavior(port.name, port.behavior, port.local_defs, max_states)
    observed = set(_observed_events(port))
    return determinize(project(base, frozenset(observed)), max_states)


def _component_section(comp: ComponentType, max_states: int) -> list[str]:
    out = [f"-- Component {comp.name}"]
    comp_exprs = [comp.computation] + [p for _, p in comp.local_defs]
    alpha_comp = _first_occurrence(comp_exprs, qualified=True)
    out.append(f"ALPHA_{comp.name} = {_bar_set(alpha_comp)}")
    comp_refs = {"Computation": f"Computation{comp.name}"}
    for name, _ in comp.local_defs:
        comp_refs[name] = name
    for name, proc in comp.local_defs:
        out.append(f"{name} = {_render(proc, comp_refs)}")
    out.append(f"Computation{comp.name} = {_render(comp.computation, comp_refs)}")
    out.append("--Port Process")
    for port in comp.ports:
        events = _interface_events(port)
        out.append(f"ALPHA_{port.name} = {_set(events)}")
        if _observed_events(port):
            out.append(f"ALPHA_{port.name}I = {{}}")
        else:
            out.append("-- no events observed!")
        refs = _refs_for(port, f"PORT{port.name}")
        for name, proc in port.local_defs:
            out.append(f"{name} = {_render(proc, refs)}")
        out.append(f"PORT{port.name} = {_render(port.behavior, refs)}")
        out.append(
            f"{port.name}G = PORT{port.name}"
            f"[[ x <-{port.name}.x | x <- ALPHA_{port.name} ]]")
    for port in comp.ports:
        out.append(f"channel {port.name}: {_set(_interface_events(port))}")
    out.append("--Deterministic Process restricted to the observed event")
    for port in comp.ports:
        detr = _port_detr(port, max_states)
        out.append(
            f"PORT{port.name}DETR = "
            f"{_render_lts(detr, f'PORT{port.name}DETR', _interface_events(port)[::-1])}")
    for port in comp.ports:
        others = [p for p in comp.ports if p.name != port.name]
        inner = f"Computation{comp.name}"
        for other in reversed(others):
            events = _set(_interface_events(other))
            inner = (f"(PORT{other.name}DETR"
                     f"[[ x <- {other.name}.x | x <- {events} ]]"
                     f" [| diff({{|{other.name}|}}, {{}}) |] {inner})")
        out.append(
            f"COMP{port.name} = ({inner})"
            f"\\ diff(ALPHA_{comp.name}, {{|{port.name}|}})")
        out.append(f"assert {port.name}G [FD= COMP{port.name}")
    return out


def _connector_section(conn: ConnectorType, max_states: int,
                       with_det: bool) -> list[str]:
    out = [f"-- Connector {conn.name}",
           "-- generated definitions (to split long sets)"]
    glue_exprs = [conn.glue] + [p for _, p in conn.local_defs]
    alpha_conn = list(reversed(_first_occurrence(glue_exprs, qualified=True)))
    out.append(f"ALPHA_{conn.name} = {_set(alpha_conn)}")
    glue_refs = {"Glue": f"Glue{conn.name}"}
    for name, _ in conn.local_defs:
        glue_refs[name] = name
    for name, proc in conn.local_defs:
        out.append(f"{name} = {_render(proc, glue_refs)}")
    out.append(f"Glue{conn.name} = {_render(conn.glue, glue_refs)}")
    for role in conn.roles:
        events = _interface_events(role)
        out.append(f"ALPHA_{role.name} = {_set(events)}")
        refs = _refs_for(role, f"ROLE{role.name}")
        for name, proc in role.local_defs:
            out.append(f"{name} = {_render(proc, refs)}")
        out.append(f"ROLE{role.name} = {_render(role.behavior, refs)}")
        out.append(
            f"{role.name}A = ROLE{role.name} "
            f"[[ x <- abstractEvent | x <- ALPHA_{role.name} ]]")
        out.append(f"assert DFA [FD= {role.name}A")
    if with_det:
        for role in conn.roles:
            base = lts_of_behavior(role.name, role.behavior, role.local_defs,
                                   max_states)
            det = determinize(base, max_states)
            out.append(
                f"ROLE{role.name}DET = "
                f"{_render_lts(det, f'ROLE{role.name}DET', _interface_events(role)[::-1])}")
    for role in conn.roles:
        out.append(f"channel {role.name}: {_set(_interface_events(role))}")
    inner = f"Glue{conn.name}"
    for role in reversed(conn.roles):
        events = _set(_interface_events(role))
        inner = (f"( ROLE{role.name}[[ x <- {role.name}.x | x <- {events} ]]"
                 f" [| diff({{|{role.name}|}}, {{}}) |] {inner})")
    out.append(f"{conn.name} = ( {inner})")
    out.append(
        f"{conn.name}A = {conn.name} "
        f"[[ x <- abstractEvent | x <- ALPHA_{conn.name} ]]")
    out.append(f"assert DFA [FD= {conn.name}A")
    return out


def _attachment_section(unit: Configuration) -> list[str]:
    out = ["--Attachment Test"]
    for att in unit.attachments:
        ctype = unit.component_type(unit.instance(att.component_instance).type_name)
        ntype = unit.connector_type(unit.instance(att.connector_instance).type_name)
        port = next(p for p in ctype.ports if p.name == att.port)
        role = next(r for r in ntype.roles if r.name == att.role)
        n, m = att.component_instance, att.connector_instance
        p, r = port.name, role.name
        out.append(f"{n}_{p}PLUS = PORT{p} [| diff(ALPHA_{r}, ALPHA_{p}) |] STOP")
        out.append(f"{m}_{r}PLUS = ROLE{r} [| diff(ALPHA_{p}, ALPHA_{r}) |] STOP")
        out.append(
            f"{n}_{p}PLUSDET = {n}_{p}PLUS"
            f" [| union(ALPHA_{p}, ALPHA_{r}) |] ROLE{r}DET")
        out.append(f"assert {m}_{r}PLUS [FD= {n}_{p}PLUSDET")
    return out


def emit_fdr_script(unit: Configuration,
                    max_states: int = DEFAULT_MAX_STATES) -> str:
    """Emit the FDR2 verification script for a checked unit."""
    kind = "Style" if unit.is_style else "Configuration"
    lines = [_PREAMBLE, f"-- {kind} {unit.name}", "-- Types declarations",
             "-- events for abstract specification",
             "channel " + ", ".join(_global_channel_events(unit))]
    for comp in unit.component_types:
        lines.extend(_component_section(comp, max_states))
    for conn in unit.connector_types:
        lines.extend(_connector_section(conn, max_states,
                                        with_det=not unit.is_style))
    if unit.is_style:
        lines.append("-- No constraints")
        lines.append("-- End Style")
    else:
        lines.extend(_attachment_section(unit))
        lines.append("-- End Configuration")
    return "\n".join(lines) + "\n"
