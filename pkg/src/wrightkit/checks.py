"""Static semantics for parsed Wright units.

Rule identifiers:
* W-R1..W-R6   — configuration-level naming, declaration and attachment rules;
* MM-P1..MM-P17 — metamodel constraints on types, behaviors and their linkage
  (overlaps with the W rules are reported once, under the W identifier);
* W-P4         — unique initializer per event within a connector;
* W-REF        — unresolved process reference;
* W-UNSUPPORTED — constraint content beyond comments.
"""
from __future__ import annotations

import re

from .model import (
    ComponentType,
    Configuration,
    ConnectorType,
    Diagnostic,
    ExternalChoice,
    InternalChoice,
    Internal,
    NamedBehavior,
    Observed,
    Prefix,
    ProcessExpr,
    SuccessTick,
    iter_events,
    iter_refs,
)
from .semantics import alphabet, behavior_env

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def _valid_identifier(name: str) -> bool:
    return bool(_IDENT.match(name))


def _err(rule: str, location: str, message: str) -> Diagnostic:
    return Diagnostic(rule, "error", location, message)


def _warn(rule: str, location: str, message: str) -> Diagnostic:
    return Diagnostic(rule, "warning", location, message)


def _behavior_exprs(unit: Configuration):
    """Yield (location, owner kind, behavior name, expr, env) for every
    process expression in the unit."""
    for comp in unit.component_types:
        base = f"component {comp.name}"
        for port in comp.ports:
            env = behavior_env(port.name, port.behavior, port.local_defs)
            yield f"{base}/port {port.name}", "port", port.behavior, env
            for dname, dexpr in port.local_defs:
                yield f"{base}/port {port.name}/where {dname}", "port", dexpr, env
        env = behavior_env("Computation", comp.computation, comp.local_defs)
        yield f"{base}/computation", "computation", comp.computation, env
        for dname, dexpr in comp.local_defs:
            yield f"{base}/where {dname}", "computation", dexpr, env
    for conn in unit.connector_types:
        base = f"connector {conn.name}"
        for role in conn.roles:
            env = behavior_env(role.name, role.behavior, role.local_defs)
            yield f"{base}/role {role.name}", "role", role.behavior, env
            for dname, dexpr in role.local_defs:
                yield f"{base}/role {role.name}/where {dname}", "role", dexpr, env
        env = behavior_env("Glue", conn.glue, conn.local_defs)
        yield f"{base}/glue", "glue", conn.glue, env
        for dname, dexpr in conn.local_defs:
            yield f"{base}/where {dname}", "glue", dexpr, env


def _external_choice_violations(expr: ProcessExpr):
    if isinstance(expr, Prefix):
        yield from _external_choice_violations(expr.target)
    elif isinstance(expr, InternalChoice):
        for b in expr.branches:
            yield from _external_choice_violations(b)
    elif isinstance(expr, ExternalChoice):
        for b in expr.branches:
            if isinstance(b, Prefix) and not isinstance(
                    b.event, (Observed, SuccessTick)):
                yield b.event
            yield from _external_choice_violations(b)


def check_static(unit: Configuration) -> list[Diagnostic]:
    diags: list[Diagnostic] = []

    comp_names = [c.name for c in unit.component_types]
    conn_names = [c.name for c in unit.connector_types]
    inst_names = [i.name for i in unit.component_instances + unit.connector_instances]

    # ---- Rule 1: one architectural element per configuration-level name ----
    seen: dict[str, str] = {}
    for kind, names in (("component type", comp_names),
                        ("connector type", conn_names),
                        ("instance", inst_names)):
        for name in names:
            if name in seen:
                diags.append(_err(
                    "W-R1", f"{kind} {name}",
                    f"name '{name}' already designates a {seen[name]}"))
            else:
                seen[name] = kind

    # ---- Rule 2: instance types declared with matching kind ----
    for inst in unit.component_instances:
        if inst.type_name not in comp_names:
            diags.append(_err(
                "W-R2", f"instance {inst.name}",
                f"component type '{inst.type_name}' is not declared"))
    for inst in unit.connector_instances:
        if inst.type_name not in conn_names:
            diags.append(_err(
                "W-R2", f"instance {inst.name}",
                f"connector type '{inst.type_name}' is not declared"))

    comp_inst = {i.name: i for i in unit.component_instances}
    conn_inst = {i.name: i for i in unit.connector_instances}

    # ---- Rules 3-5: attachments reference declared instances, in shape ----
    for att in unit.attachments:
        loc = (f"attachment {att.component_instance}.{att.port}"
               f"/{att.connector_instance}.{att.role}")
        left = att.component_instance
        right = att.connector_instance
        if left not in comp_inst and left not in conn_inst:
            diags.append(_err("W-R3", loc, f"instance '{left}' is not declared"))
            continue
        if right not in conn_inst and right not in comp_inst:
            diags.append(_err("W-R3", loc, f"instance '{right}' is not declared"))
            continue
        if left not in comp_inst or right not in conn_inst:
            diags.append(_err(
                "W-R5", loc,
                "attachment must bind a component instance's port to a "
                "connector instance's role"))
            continue
        ctype = unit.component_type(comp_inst[left].type_name)
        ntype = unit.connector_type(conn_inst[right].type_name)
        if ctype is not None and all(p.name != att.port for p in ctype.ports):
            diags.append(_err(
                "W-R4", loc,
                f"port '{att.port}' is not declared by component type "
                f"'{ctype.name}'"))
        if ntype is not None and all(r.name != att.role for r in ntype.roles):
            diags.append(_err(
                "W-R4", loc,
                f"role '{att.role}' is not declared by connector type "
                f"'{ntype.name}'"))

    # ---- Rule 6: every instantiated port/role attached exactly once ----
    if not unit.is_style:
        for inst in unit.component_instances:
            ctype = unit.component_type(inst.type_name)
            if ctype is None:
                continue
            for port in ctype.ports:
                count = sum(1 for a in unit.attachments
                            if a.component_instance == inst.name
                            and a.port == port.name)
                loc = f"instance {inst.name}/port {port.name}"
                if count == 0:
                    diags.append(_warn(
                        "W-R6", loc, "port is not attached to any role"))
                elif count > 1:
                    # a port shared by several connectors (e.g. one fork used
                    # by two diners) is tolerated with a warning
                    diags.append(_warn(
                        "W-R6", loc, f"port is attached {count} times"))
        for inst in unit.connector_instances:
            ntype = unit.connector_type(inst.type_name)
            if ntype is None:
                continue
            for role in ntype.roles:
                count = sum(1 for a in unit.attachments
                            if a.connector_instance == inst.name
                            and a.role == role.name)
                loc = f"instance {inst.name}/role {role.name}"
                if count == 0:
                    diags.append(_warn(
                        "W-R6", loc, "role is not attached to any port"))
                elif count > 1:
                    diags.append(_err(
                        "W-R6", loc, f"role is attached {count} times"))

    # ---- MM-P1/11/12: valid identifiers ----
    def check_name(name: str, loc: str):
        if not _valid_identifier(name):
            diags.append(_err("MM-P1", loc, f"invalid identifier '{name}'"))

    check_name(unit.name, f"unit {unit.name}")
    for comp in unit.component_types:
        check_name(comp.name, f"component {comp.name}")
        for port in comp.ports:
            check_name(port.name, f"component {comp.name}/port {port.name}")
    for conn in unit.connector_types:
        check_name(conn.name, f"connector {conn.name}")
        for role in conn.roles:
            check_name(role.name, f"connector {conn.name}/role {role.name}")
    for name in inst_names:
        check_name(name, f"instance {name}")

    # ---- MM-P2/MM-P3: distinct port/role names within one type ----
    for comp in unit.component_types:
        dup = {n for n in [p.name for p in comp.ports]
               if [p.name for p in comp.ports].count(n) > 1}
        for n in sorted(dup):
            diags.append(_err(
                "MM-P2", f"component {comp.name}",
                f"duplicate port name '{n}'"))
    for conn in unit.connector_types:
        dup = {n for n in [r.name for r in conn.roles]
               if [r.name for r in conn.roles].count(n) > 1}
        for n in sorted(dup):
            diags.append(_err(
                "MM-P3", f"connector {conn.name}",
                f"duplicate role name '{n}'"))

    # ---- MM-P5: no instances/attachments without corresponding types ----
    if not unit.is_style:
        if not unit.component_types and (
                unit.component_instances or unit.attachments):
            diags.append(_err(
                "MM-P5", f"unit {unit.name}",
                "configuration without component types cannot declare "
                "component instances or attachments"))
        if not unit.connector_types and (
                unit.connector_instances or unit.attachments):
            diags.append(_err(
                "MM-P5", f"unit {unit.name}",
                "configuration without connector types cannot declare "
                "connector instances or attachments"))

    # ---- behavior-level checks ----
    for loc, owner, expr, env in _behavior_exprs(unit):
        # process references resolve
        for ref in iter_refs(expr):
            if ref in env:
                continue
            if ref.lower() in ("computation", "glue") and any(
                    k.lower() == ref.lower() for k in env):
                continue
            if ref == "STOP":
                continue
            diags.append(_err(
                "W-REF", loc, f"unresolved process reference '{ref}'"))
        # external choices offer only observed/success events
        for ev in _external_choice_violations(expr):
            diags.append(_err(
                "MM-P13", loc,
                "external choice branch starts with a non-observed event "
                f"'{getattr(ev, 'name', ev)}'"))
        # ports/roles contain no internal processing steps
        if owner in ("port", "role"):
            rule = "MM-P14" if owner == "port" else "MM-P15"
            for ev in iter_events(expr):
                if isinstance(ev, Internal):
                    diags.append(_err(
                        rule, loc,
                        f"internal event '{ev.name}' is not allowed in a "
                        f"{owner} behavior"))

    # ---- MM-P16/MM-P17: interface alphabets covered by the coordinator ----
    def qualified_coverage(rule: str, owner_loc: str,
                           interfaces: tuple[NamedBehavior, ...],
                           coordinator: ProcessExpr, coordinator_env) -> None:
        try:
            coord_alpha = alphabet(coordinator, coordinator_env).all
        except KeyError:
            return  # unresolved refs already reported
        for iface in interfaces:
            try:
                ialpha = alphabet(
                    iface.behavior,
                    behavior_env(iface.name, iface.behavior, iface.local_defs),
                ).all
            except KeyError:
                continue
            missing = sorted(
                f"{iface.name}.{e}" for e in ialpha
                if f"{iface.name}.{e}" not in coord_alpha)
            for name in missing:
                diags.append(_err(
                    rule, f"{owner_loc}/{iface.name}",
                    f"interface event '{name}' does not occur in the "
                    "coordinating process"))

    for comp in unit.component_types:
        qualified_coverage(
            "MM-P16", f"component {comp.name}", comp.ports, comp.computation,
            behavior_env("Computation", comp.computation, comp.local_defs))
    for conn in unit.connector_types:
        qualified_coverage(
            "MM-P17", f"connector {conn.name}", conn.roles, conn.glue,
            behavior_env("Glue", conn.glue, conn.local_defs))

    # ---- unique initializer per event within a connector ----
    for conn in unit.connector_types:
        initializers: dict[str, str] = {}

        def claim(qualified: str, who: str, conn=conn):
            if qualified in initializers:
                diags.append(_err(
                    "W-P4", f"connector {conn.name}",
                    f"event '{qualified}' is initialized by both "
                    f"{initializers[qualified]} and {who}"))
            else:
                initializers[qualified] = who

        for role in conn.roles:
            try:
                info = alphabet(
                    role.behavior,
                    behavior_env(role.name, role.behavior, role.local_defs))
            except KeyError:
                continue
            for e in sorted(info.initialized):
                claim(f"{role.name}.{e}", f"role {role.name}")
        try:
            glue_info = alphabet(
                conn.glue, behavior_env("Glue", conn.glue, conn.local_defs))
        except KeyError:
            glue_info = None
        if glue_info is not None:
            for e in sorted(glue_info.initialized):
                claim(e, "the glue")

    # ---- unsupported constraint content ----
    if unit.constraint_text.strip():
        diags.append(_warn(
            "W-UNSUPPORTED", f"unit {unit.name}",
            "constraint content beyond comments is not supported"))

    return diags


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diags)
