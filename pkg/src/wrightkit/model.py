"""Shared domain types: architectural units, CSP behavior trees, assemblies, diagnostics.

All values are immutable after construction (frozen dataclasses) and safe to
share between concurrent workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field


# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Observed:
    """An event the process watches for; may be qualified (``port.event``)."""
    name: str
    data: tuple[tuple[str, str], ...] = ()   # (direction '?'|'!', payload text)


@dataclass(frozen=True)
class Signalled:
    """An event the process initiates (written with a leading underscore)."""
    name: str
    data: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Internal:
    """A purely internal processing step (written with a leading dash)."""
    name: str


@dataclass(frozen=True)
class SuccessTick:
    """The success event (written §, SKIP, TICK or V)."""


EventExpr = Observed | Signalled | Internal | SuccessTick


def event_name(e: EventExpr) -> str:
    """Base name of an event with data tags stripped; '√' for success."""
    if isinstance(e, SuccessTick):
        return "√"
    return e.name


# ---------------------------------------------------------------------------
# Process expressions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Prefix:
    event: EventExpr
    target: "ProcessExpr"


@dataclass(frozen=True)
class ExternalChoice:
    branches: tuple["ProcessExpr", ...]


@dataclass(frozen=True)
class InternalChoice:
    branches: tuple["ProcessExpr", ...]


@dataclass(frozen=True)
class ProcessRef:
    name: str


@dataclass(frozen=True)
class Success:
    """The successfully terminating process (§ / SKIP)."""


@dataclass(frozen=True)
class Stop:
    """The deadlocked process; only user-writable via ``V -> STOP``."""


ProcessExpr = Prefix | ExternalChoice | InternalChoice | ProcessRef | Success | Stop


class MixedChoice(ValueError):
    """A flat operator chain mixes [] and |~| without parentheses."""


def normalize_process(expr: ProcessExpr) -> ProcessExpr:
    """Canonicalize a behavior tree.

    * ``V -> STOP`` (and bare §/SKIP/TICK) become :class:`Success`;
    * a prefix whose target is ``V -> STOP`` becomes ``Prefix(event, Success)``;
    * nested choices of the same kind are flattened into one n-ary node.

    Idempotent, and preserves the multiset of non-success event occurrences.
    """
    if isinstance(expr, (Success, Stop, ProcessRef)):
        return expr
    if isinstance(expr, Prefix):
        if isinstance(expr.event, SuccessTick):
            tgt = expr.target
            if isinstance(tgt, Stop) or (isinstance(tgt, ProcessRef) and tgt.name == "STOP"):
                return Success()
            return Prefix(expr.event, normalize_process(expr.target))
        return Prefix(expr.event, normalize_process(expr.target))
    if isinstance(expr, (ExternalChoice, InternalChoice)):
        kind = type(expr)
        flat: list[ProcessExpr] = []
        for b in expr.branches:
            nb = normalize_process(b)
            if isinstance(nb, kind):
                flat.extend(nb.branches)
            else:
                flat.append(nb)
        if len(flat) == 1:
            return flat[0]
        return kind(tuple(flat))
    raise TypeError(f"not a process expression: {expr!r}")


def iter_events(expr: ProcessExpr):
    """Yield every event occurrence in syntactic order."""
    if isinstance(expr, Prefix):
        yield expr.event
        yield from iter_events(expr.target)
    elif isinstance(expr, (ExternalChoice, InternalChoice)):
        for b in expr.branches:
            yield from iter_events(b)


def iter_refs(expr: ProcessExpr):
    """Yield every process-name reference in syntactic order."""
    if isinstance(expr, ProcessRef):
        yield expr.name
    elif isinstance(expr, Prefix):
        yield from iter_refs(expr.target)
    elif isinstance(expr, (ExternalChoice, InternalChoice)):
        for b in expr.branches:
            yield from iter_refs(b)


# ---------------------------------------------------------------------------
# Architectural units
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NamedBehavior:
    """A port or role: a name plus a CSP behavior and local definitions."""
    name: str
    behavior: ProcessExpr
    local_defs: tuple[tuple[str, ProcessExpr], ...] = ()

    @property
    def defs(self) -> dict[str, ProcessExpr]:
        return dict(self.local_defs)


@dataclass(frozen=True)
class ComponentType:
    name: str
    ports: tuple[NamedBehavior, ...]
    computation: ProcessExpr
    local_defs: tuple[tuple[str, ProcessExpr], ...] = ()

    @property
    def defs(self) -> dict[str, ProcessExpr]:
        return dict(self.local_defs)


@dataclass(frozen=True)
class ConnectorType:
    name: str
    roles: tuple[NamedBehavior, ...]
    glue: ProcessExpr
    local_defs: tuple[tuple[str, ProcessExpr], ...] = ()

    @property
    def defs(self) -> dict[str, ProcessExpr]:
        return dict(self.local_defs)


@dataclass(frozen=True)
class Instance:
    name: str
    type_name: str
    kind: str  # "component" | "connector"


@dataclass(frozen=True)
class Attachment:
    component_instance: str
    port: str
    connector_instance: str
    role: str


@dataclass(frozen=True)
class Configuration:
    """A parsed Wright unit; styles carry no instances or attachments."""
    name: str
    component_types: tuple[ComponentType, ...] = ()
    connector_types: tuple[ConnectorType, ...] = ()
    component_instances: tuple[Instance, ...] = ()
    connector_instances: tuple[Instance, ...] = ()
    attachments: tuple[Attachment, ...] = ()
    is_style: bool = False
    # Non-empty content of a Constraints section (unsupported; flagged W-UNSUPPORTED).
    constraint_text: str = ""

    def component_type(self, name: str) -> ComponentType | None:
        return next((c for c in self.component_types if c.name == name), None)

    def connector_type(self, name: str) -> ConnectorType | None:
        return next((c for c in self.connector_types if c.name == name), None)

    def instance(self, name: str) -> Instance | None:
        for i in self.component_instances + self.connector_instances:
            if i.name == name:
                return i
        return None


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    severity: str            # "error" | "warning"
    location: str            # element path or "line:col"
    message: str

    def to_json(self) -> dict:
        return {
            "ruleId": self.rule_id,
            "severity": self.severity,
            "location": self.location,
            "message": self.message,
        }


# ---------------------------------------------------------------------------
# Assemblies (component-and-connector descriptions with typed interfaces)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Signature:
    name: str
    params: tuple[tuple[str, str], ...]   # (base type, mode in|out|inout)
    result: str

    def pretty(self) -> str:
        args = ", ".join(f"{t} {m}" for t, m in self.params)
        return f"{self.name}({args}) : {self.result}"


@dataclass(frozen=True)
class Characteristic:
    name: str
    direction: str        # "increasing" | "decreasing"
    domain_kind: str      # "numeric-real" | "numeric-integer" | "ordinal"
    unit: str
    ordinal_values: tuple[str, ...] = ()
    value_formula: str = ""
    invariant_text: str = ""


@dataclass(frozen=True)
class NumericConstraint:
    characteristic: Characteristic
    op: str               # "<" | "<=" | ">" | ">="
    value: float


@dataclass(frozen=True)
class OrdinalConstraint:
    characteristic: Characteristic
    op: str
    value: str


@dataclass(frozen=True)
class Quality:
    name: str
    numeric: tuple[NumericConstraint, ...] = ()
    ordinal: tuple[OrdinalConstraint, ...] = ()


@dataclass(frozen=True)
class QoSProfile:
    required: tuple[Quality, ...] = ()
    provided: tuple[Quality, ...] = ()


INTERFACE_PORT_KINDS = frozenset({"ProvidedInterface", "RequiredInterface"})
OPERATION_POINT_KINDS = frozenset({"PIOP", "UIOP"})
DATA_POINT_KINDS = frozenset({"IIP", "OIP"})
PORT_KINDS = INTERFACE_PORT_KINDS | OPERATION_POINT_KINDS | DATA_POINT_KINDS


@dataclass(frozen=True)
class AssemblyPort:
    name: str
    kind: str
    operations: tuple[Signature, ...] = ()
    protocol: str | None = None


@dataclass(frozen=True)
class AssemblyComponent:
    name: str
    ports: tuple[AssemblyPort, ...]
    kind: str | None = None           # Filter | ClientServer | FilterClientServer
    profile: QoSProfile | None = None

    def port(self, name: str) -> AssemblyPort | None:
        return next((p for p in self.ports if p.name == name), None)


@dataclass(frozen=True)
class AssemblyRole:
    name: str
    end: str                          # client|serveur|source|sink|sourceShared|sinkShared
    operations: tuple[Signature, ...] = ()


@dataclass(frozen=True)
class AssemblyConnector:
    name: str
    kind: str
    roles: tuple[AssemblyRole, ...]
    buffer_size: int | None = None

    def role(self, name: str) -> AssemblyRole | None:
        return next((r for r in self.roles if r.name == name), None)


@dataclass(frozen=True)
class AssemblyAttachment:
    component: str
    port: str
    connector: str
    role: str


@dataclass(frozen=True)
class Assembly:
    dialect: str                      # "UML" | "Ugatze"
    types: tuple[str, ...]
    components: tuple[AssemblyComponent, ...]
    connectors: tuple[AssemblyConnector, ...]
    attachments: tuple[AssemblyAttachment, ...] = field(default=())

    def component(self, name: str) -> AssemblyComponent | None:
        return next((c for c in self.components if c.name == name), None)

    def connector(self, name: str) -> AssemblyConnector | None:
        return next((c for c in self.connectors if c.name == name), None)
