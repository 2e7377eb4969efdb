"""Failures-divergences models, refinement checking, and the consistency
properties over parsed Wright units (port/computation projection, connector
and role deadlock freedom, port/role compatibility, unattached-interface
termination)."""
from __future__ import annotations

from dataclasses import dataclass
from collections import deque
from collections.abc import Iterable, Mapping

from .model import (
    ComponentType,
    Configuration,
    ConnectorType,
    ExternalChoice,
    InternalChoice,
    NamedBehavior,
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
from .semantics import (
    AUTO,
    DEFAULT_MAX_STATES,
    Lts,
    StateBudgetExceeded,
    TAU,
    TICK,
    alphabet,
    augment,
    behavior_env,
    build_lts,
    compose,
    determinize,
    hide,
    lts_of_behavior,
    parallel,
    project,
    rename,
    tau_closure,
)

# ---------------------------------------------------------------------------
# Failures-divergences models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FdModel:
    """Normalized automaton annotated with stable refusals and divergence."""
    num_macros: int
    initial: int
    # deterministic transition map per macro: label -> macro
    transitions: tuple[tuple[tuple[str, int], ...], ...]
    divergent: tuple[bool, ...]
    # maximal refusal sets over sigma ∪ {√} per macro (empty for divergent)
    max_refusals: tuple[tuple[frozenset[str], ...], ...]
    sigma: frozenset[str]

    def succ(self, macro: int) -> dict[str, int]:
        return dict(self.transitions[macro])


def _tau_cycle_states(p: Lts) -> set[int]:
    """States lying on a cycle of internal steps (divergence sources)."""
    tau_succ: list[list[int]] = [[] for _ in range(p.num_states)]
    for src, lab, dst in p.transitions:
        if lab == TAU:
            tau_succ[src].append(dst)
    # iterative Tarjan SCC over the internal-step graph
    index = {}
    low = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    result: set[int] = set()
    counter = 0
    for root in range(p.num_states):
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            advanced = False
            for j in range(pi, len(tau_succ[node])):
                nxt = tau_succ[node][j]
                if nxt not in index:
                    work[-1] = (node, j + 1)
                    work.append((nxt, 0))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                scc = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    scc.append(w)
                    if w == node:
                        break
                if len(scc) > 1 or any(node in tau_succ[node] for node in scc):
                    result.update(scc)
    return result


def _maximal_sets(sets: Iterable[frozenset[str]]) -> tuple[frozenset[str], ...]:
    unique = list(dict.fromkeys(sets))
    out = [s for s in unique
           if not any(s < other for other in unique)]
    return tuple(sorted(out, key=lambda s: (len(s), sorted(s))))


def fd_model(p: Lts, max_states: int = DEFAULT_MAX_STATES) -> FdModel:
    succ = p.successors()
    sigma = p.event_universe | p.labels_used()
    full = sigma | {TICK}
    div_sources = _tau_cycle_states(p)

    init = tau_closure(frozenset([p.initial]), succ)
    ids: dict[frozenset[int], int] = {init: 0}
    divergent: list[bool] = []
    refusals: list[tuple[frozenset[str], ...]] = []
    ordered: list[frozenset[int]] = [init]

    # breadth-first construction in id order for determinism
    trans_rows: dict[int, tuple[tuple[str, int], ...]] = {}
    queue = deque([init])
    while queue:
        macro = queue.popleft()
        mid = ids[macro]
        if mid in trans_rows:
            continue
        targets: dict[str, set[int]] = {}
        for s in macro:
            for lab, dst in succ[s]:
                if lab != TAU:
                    targets.setdefault(lab, set()).add(dst)
        row = []
        for lab in sorted(targets):
            nxt = tau_closure(frozenset(targets[lab]), succ)
            if nxt not in ids:
                ids[nxt] = len(ids)
                if len(ids) > max_states:
                    raise StateBudgetExceeded(max_states)
                ordered.append(nxt)
                queue.append(nxt)
            row.append((lab, ids[nxt]))
        trans_rows[mid] = tuple(row)

    for macro in ordered:
        is_div = any(s in div_sources for s in macro)
        divergent.append(is_div)
        if is_div:
            refusals.append(())
            continue
        macro_refusals = []
        for s in macro:
            moves = succ[s]
            if any(lab == TAU for lab, _ in moves):
                continue  # unstable
            offered = {lab for lab, _ in moves}
            macro_refusals.append(frozenset(full - offered))
        refusals.append(_maximal_sets(macro_refusals))

    trans_full = tuple(trans_rows[i] for i in range(len(ordered)))
    return FdModel(
        num_macros=len(ordered),
        initial=0,
        transitions=trans_full,
        divergent=tuple(divergent),
        max_refusals=tuple(refusals),
        sigma=sigma,
    )


# ---------------------------------------------------------------------------
# Refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Counterexample:
    kind: str                      # "trace" | "refusal" | "divergence"
    trace: tuple[str, ...]
    refused: frozenset[str] = frozenset()


@dataclass(frozen=True)
class RefinementVerdict:
    holds: bool
    counterexample: Counterexample | None = None

    @staticmethod
    def ok() -> "RefinementVerdict":
        return RefinementVerdict(True, None)


def refines_fd(
    spec: FdModel,
    impl: FdModel,
    max_depth: int | None = None,
) -> RefinementVerdict:
    """Does ``impl`` refine ``spec`` in the failures-divergences order?

    Checks trace containment, refusal containment after each trace, and
    divergence containment; below a divergent spec state anything is allowed.
    The first violation on the shortest (then lexicographically smallest)
    trace is reported.
    """
    pad = (spec.sigma | {TICK}) - (impl.sigma | {TICK})
    visited: set[tuple[int, int]] = set()
    queue: deque[tuple[int, int, tuple[str, ...]]] = deque(
        [(spec.initial, impl.initial, ())])
    while queue:
        s, i, trace = queue.popleft()
        if (s, i) in visited:
            continue
        visited.add((s, i))
        if spec.divergent[s]:
            continue  # chaotic: anything refines a divergent point
        if impl.divergent[i]:
            return RefinementVerdict(
                False, Counterexample("divergence", trace))
        spec_refusals = spec.max_refusals[s]
        for refusal in impl.max_refusals[i]:
            padded = refusal | pad
            if not any(padded <= allowed for allowed in spec_refusals):
                return RefinementVerdict(
                    False, Counterexample("refusal", trace, padded))
        if max_depth is not None and len(trace) >= max_depth:
            continue
        spec_succ = spec.succ(s)
        for lab, idst in impl.transitions[i]:
            if lab not in spec_succ:
                return RefinementVerdict(
                    False, Counterexample("trace", trace + (lab,)))
            queue.append((spec_succ[lab], idst, trace + (lab,)))
    return RefinementVerdict.ok()


def deadlock_free_spec(universe: Iterable[str],
                       max_states: int = DEFAULT_MAX_STATES) -> Lts:
    """The canonical deadlock-free process over an alphabet: at every step it
    internally picks some event or terminates."""
    events = sorted(set(universe))
    if not events:
        expr: ProcessExpr = Success()
    else:
        branches: list[ProcessExpr] = [
            Prefix(Observed(e), ProcessRef("DF")) for e in events]
        branches.append(Success())
        expr = InternalChoice(tuple(branches))
    return build_lts(expr, {"DF": expr}, max_states)


def check_deadlock_free(p: Lts, max_states: int = DEFAULT_MAX_STATES) -> RefinementVerdict:
    df = deadlock_free_spec(p.event_universe | p.labels_used(), max_states)
    return refines_fd(fd_model(df, max_states), fd_model(p, max_states))


# ---------------------------------------------------------------------------
# Wright properties
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PropertyReport:
    property_id: int
    subject: str                 # element path, e.g. "component Atype/port Output"
    verdict: RefinementVerdict
    spec_name: str = ""
    impl_name: str = ""

    def to_json(self) -> dict:
        out = {
            "property": self.property_id,
            "subject": self.subject,
            "holds": self.verdict.holds,
            "specProcess": self.spec_name,
            "implProcess": self.impl_name,
        }
        ce = self.verdict.counterexample
        if ce is not None:
            out["counterexample"] = {
                "kind": ce.kind,
                "trace": list(ce.trace),
                "refused": sorted(ce.refused),
            }
        return out


def _qualify(prefix: str):
    return lambda name: f"{prefix}.{name}"


def check_property1(
    component: ComponentType,
    max_states: int = DEFAULT_MAX_STATES,
) -> list[PropertyReport]:
    """Each port must be a projection of the computation, assuming the
    environment honors the other ports' observed behavior."""
    comp_lts = lts_of_behavior("Computation", component.computation,
                               component.local_defs, max_states)
    reports = []
    for port in component.ports:
        parts = [comp_lts]
        syncs: list[frozenset[str]] = [comp_lts.labels_used()]
        for other in component.ports:
            if other.name == port.name:
                continue
            observed = alphabet(
                other.behavior,
                behavior_env(other.name, other.behavior, other.local_defs),
            ).observed
            env_lts = lts_of_behavior(other.name, other.behavior,
                                      other.local_defs, max_states)
            env_det = determinize(project(env_lts, observed), max_states)
            parts.append(rename(env_det, _qualify(other.name)))
            syncs.append(frozenset(f"{other.name}.{e}" for e in observed))
        composition, _ = compose(parts, syncs, tick_parties=[0],
                                 max_states=max_states)
        keep_prefix = f"{port.name}."
        hidden = hide(
            composition,
            {e for e in composition.event_universe
             if not e.startswith(keep_prefix)})

        hidden_fd = fd_model(hidden, max_states)
        port_lts = rename(
            lts_of_behavior(port.name, port.behavior, port.local_defs,
                            max_states),
            _qualify(port.name))
        subject = f"component {component.name}/port {port.name}"
        names = dict(spec_name=f"{port.name}G", impl_name=f"COMP{port.name}")
        if any(hidden_fd.divergent):
            # hiding introduced livelock; the port (divergence-free) is not refined
            reports.append(PropertyReport(
                1, subject,
                RefinementVerdict(False, Counterexample("divergence", ())),
                **names))
            continue
        impl = determinize(hidden, max_states)
        spec = augment(port_lts,
                       (impl.event_universe | impl.labels_used())
                       - port_lts.event_universe)
        verdict = refines_fd(fd_model(spec, max_states),
                             fd_model(impl, max_states))
        reports.append(PropertyReport(1, subject, verdict, **names))
    return reports


def _externals_to_internal(
    expr: ProcessExpr,
    glue_driven: frozenset[str] = frozenset(),
) -> ProcessExpr:
    """Read a role's multi-way external choice as the attached component's
    decision: an external choice offering two or more distinct events becomes
    an internal choice (recursively).

    Events the glue itself initiates are exempt: a choice the glue resolves
    stays external for the role (``glue_driven`` holds those event names in
    the role's own, unqualified spelling)."""
    if isinstance(expr, Prefix):
        return Prefix(expr.event, _externals_to_internal(expr.target, glue_driven))
    if isinstance(expr, InternalChoice):
        return InternalChoice(tuple(
            _externals_to_internal(b, glue_driven) for b in expr.branches))
    if isinstance(expr, ExternalChoice):
        branches = tuple(
            _externals_to_internal(b, glue_driven) for b in expr.branches)
        event_branches = [
            b for b in branches
            if isinstance(b, Prefix) and not isinstance(b.event, SuccessTick)]
        all_glue_driven = event_branches and all(
            event_name(b.event) in glue_driven for b in event_branches)
        if len(event_branches) >= 2 and not all_glue_driven:
            return InternalChoice(branches)
        return ExternalChoice(branches)
    return expr


def _commit_choices(expr: ProcessExpr) -> ProcessExpr:
    """Like :func:`_externals_to_internal`, but an external choice that offers
    termination next to at least one event is also owner-resolved: the process
    may silently commit to terminating instead of offering its events."""
    if isinstance(expr, Prefix):
        return Prefix(expr.event, _commit_choices(expr.target))
    if isinstance(expr, InternalChoice):
        return InternalChoice(tuple(_commit_choices(b) for b in expr.branches))
    if isinstance(expr, ExternalChoice):
        branches = tuple(_commit_choices(b) for b in expr.branches)
        events = sum(
            1 for b in branches
            if isinstance(b, Prefix) and not isinstance(b.event, SuccessTick))
        successes = sum(
            1 for b in branches
            if isinstance(b, Success)
            or (isinstance(b, Prefix) and isinstance(b.event, SuccessTick)))
        if events >= 2 or (events >= 1 and successes >= 1):
            return InternalChoice(branches)
        return ExternalChoice(branches)
    return expr


def _decision_lts(behavior: NamedBehavior, max_states: int) -> Lts:
    """The interface's behavior with its choices owner-resolved."""
    expr = _commit_choices(behavior.behavior)
    defs = tuple((n, _commit_choices(p)) for n, p in behavior.local_defs)
    return build_lts(expr, behavior_env(behavior.name, expr, defs), max_states)


def _glue_driven_events(connector: ConnectorType, role_name: str) -> frozenset[str]:
    """Unqualified names of the role's events that the glue initiates."""
    driven: set[str] = set()
    exprs = [connector.glue] + [p for _, p in connector.local_defs]
    for expr in exprs:
        for ev in iter_events(expr):
            if isinstance(ev, Signalled) and "." in ev.name:
                owner, _, base = ev.name.partition(".")
                if owner == role_name:
                    driven.add(base)
    return frozenset(driven)


def _role_decision_lts(
    role: NamedBehavior,
    max_states: int,
    glue_driven: frozenset[str] = frozenset(),
) -> Lts:
    behavior = _externals_to_internal(role.behavior, glue_driven)
    defs = tuple((n, _externals_to_internal(p, glue_driven))
                 for n, p in role.local_defs)
    base = build_lts(behavior, behavior_env(role.name, behavior, defs),
                     max_states)
    return rename(base, _qualify(role.name))


def connector_composition(
    connector: ConnectorType,
    max_states: int = DEFAULT_MAX_STATES,
) -> tuple[Lts, dict[int, tuple[int, ...]], list[Lts]]:
    """Glue in parallel with every role (renamed onto the glue's namespace)."""
    glue_lts = lts_of_behavior("Glue", connector.glue, connector.local_defs,
                               max_states)
    role_ltss = [
        _role_decision_lts(r, max_states, _glue_driven_events(connector, r.name))
        for r in connector.roles]
    parts = [glue_lts] + role_ltss
    syncs = [glue_lts.event_universe | glue_lts.labels_used()]
    syncs += [r.event_universe | r.labels_used() for r in role_ltss]
    product, origin = compose(parts, syncs, max_states=max_states)
    return product, origin, parts


def _deadlock_attempts(
    product: Lts,
    origin: Mapping[int, tuple[int, ...]],
    parts: list[Lts],
) -> tuple[tuple[str, ...], tuple[str, ...]] | None:
    """Shortest visible trace to a stuck product state, plus the pending
    event offers of the blocked role operands."""
    succ = product.successors()
    part_succ = [p.successors() for p in parts]
    best: tuple[tuple[str, ...], tuple[str, ...]] | None = None
    visited = {product.initial}
    queue: deque[tuple[int, tuple[str, ...]]] = deque([(product.initial, ())])
    depth_found: int | None = None
    while queue:
        state, trace = queue.popleft()
        if depth_found is not None and len(trace) > depth_found:
            break
        if not succ[state]:
            locals_ = origin[state]
            if locals_[0] != -1:  # not the success sink
                attempts: set[str] = set()
                for idx in range(1, len(parts)):
                    for lab, _ in part_succ[idx][locals_[idx]]:
                        if lab not in (TAU, TICK):
                            attempts.add(lab)
                cand = (trace, tuple(sorted(attempts)))
                depth_found = len(trace)
                if best is None or (-len(cand[1]), cand[1], cand[0]) < (
                        -len(best[1]), best[1], best[0]):
                    best = cand
                continue
        for lab, dst in sorted(succ[state], key=lambda m: m[0]):
            if dst not in visited:
                visited.add(dst)
                queue.append(
                    (dst, trace if lab == TAU else trace + (lab,)))
    return best


def check_property2(
    connector: ConnectorType,
    max_states: int = DEFAULT_MAX_STATES,
) -> PropertyReport:
    product, origin, parts = connector_composition(connector, max_states)
    verdict = check_deadlock_free(product, max_states)
    if not verdict.holds and verdict.counterexample is not None \
            and verdict.counterexample.kind == "refusal":
        found = _deadlock_attempts(product, origin, parts)
        if found is not None:
            trace, attempts = found
            verdict = RefinementVerdict(
                False,
                Counterexample("refusal", trace + attempts,
                               verdict.counterexample.refused))
    return PropertyReport(
        2, f"connector {connector.name}", verdict,
        spec_name="DFA", impl_name=f"{connector.name}A")


def check_property3(
    connector: ConnectorType,
    role: NamedBehavior,
    max_states: int = DEFAULT_MAX_STATES,
) -> PropertyReport:
    lts = lts_of_behavior(role.name, role.behavior, role.local_defs, max_states)
    return PropertyReport(
        3, f"connector {connector.name}/role {role.name}",
        check_deadlock_free(lts, max_states),
        spec_name="DFA", impl_name=f"{role.name}A")


def check_property8(
    port: NamedBehavior,
    role: NamedBehavior,
    max_states: int = DEFAULT_MAX_STATES,
    subject: str = "",
    spec_name: str = "",
    impl_name: str = "",
) -> PropertyReport:
    """Port/role compatibility: the augmented role must be refined by the
    augmented port constrained to the role's deterministic behavior.

    Port and role specifications describe obligations whose choices the owner
    resolves, so their external choices over event branches are read as
    internal decisions on both sides (the deterministic constraint keeps the
    role's as-written trace structure)."""
    p = _decision_lts(port, max_states)
    r_det_src = lts_of_behavior(role.name, role.behavior, role.local_defs,
                                max_states)
    r = _decision_lts(role, max_states)
    ap = p.event_universe | p.labels_used()
    ar = r.event_universe | r.labels_used()
    spec = augment(r, ap - ar)
    impl = parallel(augment(p, ar - ap), determinize(r_det_src, max_states),
                    AUTO, max_states)
    verdict = refines_fd(fd_model(spec, max_states), fd_model(impl, max_states))
    return PropertyReport(
        8, subject or f"port {port.name}/role {role.name}", verdict,
        spec_name=spec_name, impl_name=impl_name)


def check_property11(
    behavior: NamedBehavior,
    subject: str,
    max_states: int = DEFAULT_MAX_STATES,
) -> PropertyReport:
    """An unattached port/role must be compatible with silent success."""
    report = check_property8(
        behavior, NamedBehavior("SKIP", Success()), max_states,
        subject=subject, spec_name="SKIP", impl_name=behavior.name)
    return PropertyReport(11, subject, report.verdict,
                          spec_name="SKIP", impl_name=behavior.name)


def unattached_interfaces(unit: Configuration) -> list[tuple[str, NamedBehavior]]:
    """(subject, behavior) for every port/role of an instantiated type with no
    attachment, in declaration order."""
    out: list[tuple[str, NamedBehavior]] = []
    for inst in unit.component_instances:
        ctype = unit.component_type(inst.type_name)
        if ctype is None:
            continue
        for port in ctype.ports:
            if not any(a.component_instance == inst.name and a.port == port.name
                       for a in unit.attachments):
                out.append((f"instance {inst.name}/port {port.name}", port))
    for inst in unit.connector_instances:
        ntype = unit.connector_type(inst.type_name)
        if ntype is None:
            continue
        for role in ntype.roles:
            if not any(a.connector_instance == inst.name and a.role == role.name
                       for a in unit.attachments):
                out.append((f"instance {inst.name}/role {role.name}", role))
    return out


def verify_configuration(
    unit: Configuration,
    max_states: int = DEFAULT_MAX_STATES,
) -> list[PropertyReport]:
    """All property reports for a unit, in the order the exported script lists
    its refinement assertions: per component each port's projection check,
    per connector each role's deadlock check then the connector's, then one
    compatibility check per attachment, then termination checks for
    unattached interfaces. Styles produce only the first two groups."""
    reports: list[PropertyReport] = []

    def guarded(_prop_id: int, _subject: str, _fn, *args, **kwargs) -> None:
        """Run one check; a blown state budget becomes a 'resource' report so
        the remaining checks still run."""
        try:
            result = _fn(*args, **kwargs)
        except StateBudgetExceeded:
            reports.append(PropertyReport(
                _prop_id, _subject,
                RefinementVerdict(False, Counterexample("resource", ()))))
            return
        if isinstance(result, list):
            reports.extend(result)
        else:
            reports.append(result)

    for comp in unit.component_types:
        guarded(1, f"component {comp.name}", check_property1, comp, max_states)
    for conn in unit.connector_types:
        for role in conn.roles:
            guarded(3, f"connector {conn.name}/role {role.name}",
                    check_property3, conn, role, max_states)
        guarded(2, f"connector {conn.name}", check_property2, conn, max_states)
    if unit.is_style:
        return reports
    for att in unit.attachments:
        inst = unit.instance(att.component_instance)
        ninst = unit.instance(att.connector_instance)
        ctype = unit.component_type(inst.type_name) if inst else None
        ntype = unit.connector_type(ninst.type_name) if ninst else None
        if ctype is None or ntype is None:
            continue
        port = next((p for p in ctype.ports if p.name == att.port), None)
        role = next((r for r in ntype.roles if r.name == att.role), None)
        if port is None or role is None:
            continue
        subject = (f"attachment {att.component_instance}.{att.port}"
                   f"/{att.connector_instance}.{att.role}")
        guarded(
            8, subject, check_property8, port, role, max_states,
            subject=subject,
            spec_name=f"{att.connector_instance}_{att.role}PLUS",
            impl_name=f"{att.component_instance}_{att.port}PLUSDET")
    for subject, behavior in unattached_interfaces(unit):
        guarded(11, subject, check_property11, behavior, subject, max_states)
    return reports
