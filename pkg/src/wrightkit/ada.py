"""Translation of a Wright configuration into a concurrent Ada-subset program.

Each component/connector instance becomes a task; observed events become
entries and ``accept`` statements; signalled events become entry calls on the
task at the other end of the attachment; internal events become procedure
stubs. Recursion of a Computation/Glue back to itself is realized by the
task's outer ``loop``; a success branch becomes ``exit`` (or a ``terminate``
select alternative).

Choice branches are rendered in source order everywhere: for a binary
internal choice the left branch is the ``then`` arm, for an n-ary one the
i-th branch is ``when i``, and select alternatives keep the written order
with ``terminate`` last.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    Attachment,
    Configuration,
    Diagnostic,
    ExternalChoice,
    Instance,
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
)


class StyleNotTranslatable(Exception):
    """Raised when asked to generate code for a style (no instances)."""


class UnattachedInterface(Exception):
    """A signalled event's port/role has no (unique) attachment."""

    def __init__(self, instance: str, interface: str, reason: str = "unattached"):
        self.instance = instance
        self.interface = interface
        self.reason = reason
        super().__init__(f"{reason}: {instance}.{interface}")


class UntranslatableProcess(Exception):
    """A behavior uses a construct with no task-statement translation."""


# ---------------------------------------------------------------------------
# Program representation
# ---------------------------------------------------------------------------

@dataclass
class AdaStmt:
    pass


@dataclass
class NullStmt(AdaStmt):
    pass


@dataclass
class ExitStmt(AdaStmt):
    pass


@dataclass
class AcceptStmt(AdaStmt):
    entry: str


@dataclass
class EntryCallStmt(AdaStmt):
    task: str
    entry: str


@dataclass
class ProcedureCallStmt(AdaStmt):
    name: str


@dataclass
class LoopStmt(AdaStmt):
    body: list[AdaStmt]


@dataclass
class IfElseStmt(AdaStmt):
    condition: str
    then_stmts: list[AdaStmt]
    else_stmts: list[AdaStmt]


@dataclass
class CaseStmt(AdaStmt):
    selector: str
    alternatives: list[list[AdaStmt]]  # 1-based arms; others => null implied


@dataclass
class SelectStmt(AdaStmt):
    # each alternative starts with an AcceptStmt
    alternatives: list[list[AdaStmt]]
    terminate: bool = False


@dataclass
class AdaDecl:
    pass


@dataclass
class FunctionStub(AdaDecl):
    name: str
    return_type: str
    return_literal: str


@dataclass
class ProcedureStub(AdaDecl):
    name: str


@dataclass
class TaskSpec(AdaDecl):
    name: str
    entries: list[str]


@dataclass
class TaskBody(AdaDecl):
    name: str
    statements: list[AdaStmt]


@dataclass
class AdaUnit:
    procedure_name: str
    declarations: list[AdaDecl] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Entry derivation and event translation
# ---------------------------------------------------------------------------

def _coordinator(instance: Instance, config: Configuration) -> ProcessExpr:
    if instance.kind == "component":
        return config.component_type(instance.type_name).computation
    return config.connector_type(instance.type_name).glue


def _split(name: str) -> tuple[str, str]:
    iface, _, base = name.rpartition(".")
    return iface, base


def _flatten(name: str) -> str:
    return name.replace(".", "_")


def derive_entries(instance: Instance, config: Configuration) -> list[str]:
    """Entry names of an instance's task: flattened observed events of its
    Computation/Glue, first syntactic occurrence, duplicates removed."""
    entries: list[str] = []
    sources: dict[str, str] = {}
    proc = _coordinator(instance, config)
    from .model import iter_events
    for ev in iter_events(proc):
        if not isinstance(ev, Observed):
            continue
        entry = _flatten(ev.name)
        if entry in entries:
            if sources[entry] != ev.name:
                raise UntranslatableProcess(
                    f"entry name collision in {instance.name}: "
                    f"{sources[entry]} and {ev.name} both map to {entry}")
            continue
        entries.append(entry)
        sources[entry] = ev.name
    return entries


def _attachment_index(config: Configuration) -> dict[tuple[str, str, str], list[Attachment]]:
    idx: dict[tuple[str, str, str], list[Attachment]] = {}
    for att in config.attachments:
        idx.setdefault(("component", att.component_instance, att.port), []).append(att)
        idx.setdefault(("connector", att.connector_instance, att.role), []).append(att)
    return idx


def _task_name(instance: Instance) -> str:
    prefix = "Component" if instance.kind == "component" else "Connector"
    return f"{prefix}_{instance.name}"


def translate_event(ev, instance: Instance, config: Configuration) -> AdaStmt:
    """One CSP event of the instance's coordinator as a task statement."""
    if isinstance(ev, Observed):
        return AcceptStmt(_flatten(ev.name))
    if isinstance(ev, Internal):
        return ProcedureCallStmt(ev.name)
    if not isinstance(ev, Signalled):
        raise UntranslatableProcess(f"cannot translate event {ev!r}")
    iface, base = _split(ev.name)
    if not iface:
        raise UnattachedInterface(instance.name, ev.name,
                                  "signalled event has no interface qualifier")
    atts = _attachment_index(config).get((instance.kind, instance.name, iface), [])
    if not atts:
        raise UnattachedInterface(instance.name, iface)
    if len(atts) > 1:
        raise UnattachedInterface(instance.name, iface, "ambiguously attached")
    att = atts[0]
    if instance.kind == "component":
        return EntryCallStmt(f"Connector_{att.connector_instance}",
                             f"{att.role}_{base}")
    return EntryCallStmt(f"Component_{att.component_instance}",
                         f"{att.port}_{base}")


# ---------------------------------------------------------------------------
# Process-to-statements translation
# ---------------------------------------------------------------------------

class _BodyBuilder:
    def __init__(self, instance: Instance, config: Configuration):
        self.instance = instance
        self.config = config
        self.uses_binary_ic = False
        self.uses_nary_ic = False

    def translate(self, expr: ProcessExpr) -> list[AdaStmt]:
        if isinstance(expr, ProcessRef):
            # recursion back to the coordinator: realized by the outer loop
            if expr.name.lower() in ("computation", "glue"):
                return []
            raise UntranslatableProcess(
                f"{self.instance.name}: process reference {expr.name!r} "
                "has no task translation (only self-recursion is supported)")
        if isinstance(expr, Success):
            return [ExitStmt()]
        if isinstance(expr, Stop):
            raise UntranslatableProcess(
                f"{self.instance.name}: STOP has no task translation")
        if isinstance(expr, Prefix):
            if isinstance(expr.event, SuccessTick):
                return [ExitStmt()] + self.translate(expr.target)
            head = translate_event(expr.event, self.instance, self.config)
            return [head] + self.translate(expr.target)
        if isinstance(expr, InternalChoice):
            arms = [self._arm(b) for b in expr.branches]
            if len(arms) == 2:
                self.uses_binary_ic = True
                return [IfElseStmt("condition_interne", arms[0], arms[1])]
            self.uses_nary_ic = True
            return [CaseStmt("condition_interne1", arms)]
        if isinstance(expr, ExternalChoice):
            alternatives: list[list[AdaStmt]] = []
            terminate = False
            for branch in expr.branches:
                if isinstance(branch, Success) or (
                        isinstance(branch, Prefix)
                        and isinstance(branch.event, SuccessTick)):
                    terminate = True
                    continue
                arm = self._arm(branch)
                if not (arm and isinstance(arm[0], AcceptStmt)):
                    raise UntranslatableProcess(
                        f"{self.instance.name}: external-choice branch must "
                        "start with an observed event")
                alternatives.append(arm)
            return [SelectStmt(alternatives, terminate)]
        raise UntranslatableProcess(f"cannot translate {expr!r}")

    def _arm(self, branch: ProcessExpr) -> list[AdaStmt]:
        stmts = self.translate(branch)
        return stmts if stmts else [NullStmt()]


# ---------------------------------------------------------------------------
# Whole-program generation
# ---------------------------------------------------------------------------

def _internal_event_names(config: Configuration) -> list[str]:
    from .model import iter_events
    names: list[str] = []
    procs = [c.computation for c in config.component_types]
    procs += [c.glue for c in config.connector_types]
    for proc in procs:
        for ev in iter_events(proc):
            if isinstance(ev, Internal) and ev.name not in names:
                names.append(ev.name)
    return names


def _ordered_instances(config: Configuration) -> list[Instance]:
    return list(config.component_instances) + list(config.connector_instances)


def generate_ada(config: Configuration) -> AdaUnit:
    """Build the Ada program for a configuration."""
    if config.is_style:
        raise StyleNotTranslatable(
            f"{config.name} is a style; only configurations have instances "
            "to translate into tasks")
    instances = _ordered_instances(config)

    bodies: list[TaskBody] = []
    any_binary = any_nary = False
    for inst in instances:
        builder = _BodyBuilder(inst, config)
        stmts = builder.translate(_coordinator(inst, config))
        any_binary = any_binary or builder.uses_binary_ic
        any_nary = any_nary or builder.uses_nary_ic
        bodies.append(TaskBody(_task_name(inst), [LoopStmt(stmts)]))

    unit = AdaUnit(config.name)
    if any_binary:
        unit.declarations.append(
            FunctionStub("condition_interne", "Boolean", "true"))
    if any_nary:
        unit.declarations.append(
            FunctionStub("condition_interne1", "Integer", "1"))
    for name in _internal_event_names(config):
        unit.declarations.append(ProcedureStub(name))
    for inst in instances:
        unit.declarations.append(
            TaskSpec(_task_name(inst), derive_entries(inst, config)))
    unit.declarations.extend(bodies)
    return unit


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _render_stmts(stmts: list[AdaStmt], indent: int, out: list[str]) -> None:
    pad = "  " * indent
    for s in stmts:
        if isinstance(s, NullStmt):
            out.append(f"{pad}null;")
        elif isinstance(s, ExitStmt):
            out.append(f"{pad}exit;")
        elif isinstance(s, AcceptStmt):
            out.append(f"{pad}accept {s.entry};")
        elif isinstance(s, EntryCallStmt):
            out.append(f"{pad}{s.task}.{s.entry};")
        elif isinstance(s, ProcedureCallStmt):
            out.append(f"{pad}{s.name};")
        elif isinstance(s, LoopStmt):
            out.append(f"{pad}loop")
            _render_stmts(s.body, indent + 1, out)
            out.append(f"{pad}end loop;")
        elif isinstance(s, IfElseStmt):
            out.append(f"{pad}if {s.condition} then")
            _render_stmts(s.then_stmts, indent + 1, out)
            out.append(f"{pad}else")
            _render_stmts(s.else_stmts, indent + 1, out)
            out.append(f"{pad}end if;")
        elif isinstance(s, CaseStmt):
            out.append(f"{pad}case {s.selector} is")
            for i, arm in enumerate(s.alternatives, 1):
                out.append(f"{pad}  when {i} =>")
                _render_stmts(arm, indent + 2, out)
            out.append(f"{pad}  when others =>")
            out.append(f"{pad}    null;")
            out.append(f"{pad}end case;")
        elif isinstance(s, SelectStmt):
            out.append(f"{pad}select")
            for i, arm in enumerate(s.alternatives):
                if i:
                    out.append(f"{pad}or")
                _render_stmts(arm, indent + 1, out)
            if s.terminate:
                out.append(f"{pad}or")
                out.append(f"{pad}  terminate;")
            out.append(f"{pad}end select;")
        else:
            raise TypeError(f"unknown statement {s!r}")


def render_ada(unit: AdaUnit) -> str:
    out = [f"procedure {unit.procedure_name} is"]
    for d in unit.declarations:
        if isinstance(d, FunctionStub):
            out.append(f"  function {d.name} return {d.return_type} is")
            out.append("  begin")
            out.append(f"    return {d.return_literal};")
            out.append(f"  end {d.name};")
        elif isinstance(d, ProcedureStub):
            out.append(f"  procedure {d.name} is")
            out.append("  begin")
            out.append("    null;")
            out.append(f"  end {d.name};")
        elif isinstance(d, TaskSpec):
            if not d.entries:
                out.append(f"  task {d.name};")
            else:
                out.append(f"  task {d.name} is")
                for e in d.entries:
                    out.append(f"    entry {e};")
                out.append(f"  end {d.name};")
        elif isinstance(d, TaskBody):
            out.append(f"  task body {d.name} is")
            out.append("  begin")
            _render_stmts(d.statements, 2, out)
            out.append(f"  end {d.name};")
        else:
            raise TypeError(f"unknown declaration {d!r}")
    out.append("begin")
    out.append("  null;")
    out.append(f"end {unit.procedure_name};")
    return "\n".join(out) + "\n"


def generate_ada_text(config: Configuration) -> str:
    return render_ada(generate_ada(config))


def output_filename(config: Configuration) -> str:
    return config.name.lower() + ".adb"


# ---------------------------------------------------------------------------
# Re-parsing the rendered subset and well-formedness checks
# ---------------------------------------------------------------------------

def _tokenize_ada(text: str) -> list[str]:
    tokens: list[str] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c.isalnum() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(text[i:j])
            i = j
        elif text.startswith("=>", i):
            tokens.append("=>")
            i += 2
        elif c in ".;()":
            tokens.append(c)
            i += 1
        else:
            raise SyntaxError(f"unexpected character {c!r} in Ada text")
    return tokens


class _AdaParser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        return self.toks[i] if i < len(self.toks) else "<eof>"

    def expect(self, tok: str) -> str:
        if self.peek() != tok:
            raise SyntaxError(f"expected {tok!r}, got {self.peek()!r} "
                              f"at token {self.pos}")
        self.pos += 1
        return tok

    def ident(self) -> str:
        t = self.peek()
        if not (t and (t[0].isalpha()) and all(
                ch.isalnum() or ch == "_" for ch in t)):
            raise SyntaxError(f"expected identifier, got {t!r}")
        self.pos += 1
        return t

    def parse_unit(self) -> AdaUnit:
        self.expect("procedure")
        name = self.ident()
        self.expect("is")
        unit = AdaUnit(name)
        while self.peek() != "begin":
            unit.declarations.append(self.parse_decl())
        self.expect("begin")
        self.expect("null")
        self.expect(";")
        self.expect("end")
        end_name = self.ident()
        if end_name != name:
            raise SyntaxError(f"procedure {name} ends as {end_name}")
        self.expect(";")
        if self.pos != len(self.toks):
            raise SyntaxError("trailing tokens after procedure end")
        return unit

    def parse_decl(self) -> AdaDecl:
        t = self.peek()
        if t == "function":
            self.pos += 1
            name = self.ident()
            self.expect("return")
            rtype = self.ident()
            self.expect("is")
            self.expect("begin")
            self.expect("return")
            literal = self.peek()
            self.pos += 1
            self.expect(";")
            self.expect("end")
            if self.ident() != name:
                raise SyntaxError(f"function {name} end-name mismatch")
            self.expect(";")
            return FunctionStub(name, rtype, literal)
        if t == "procedure":
            self.pos += 1
            name = self.ident()
            self.expect("is")
            self.expect("begin")
            self.expect("null")
            self.expect(";")
            self.expect("end")
            if self.ident() != name:
                raise SyntaxError(f"procedure {name} end-name mismatch")
            self.expect(";")
            return ProcedureStub(name)
        if t == "task" and self.peek(1) != "body":
            self.pos += 1
            name = self.ident()
            if self.peek() == ";":
                self.pos += 1
                return TaskSpec(name, [])
            self.expect("is")
            entries = []
            while self.peek() == "entry":
                self.pos += 1
                entries.append(self.ident())
                self.expect(";")
            self.expect("end")
            if self.ident() != name:
                raise SyntaxError(f"task {name} end-name mismatch")
            self.expect(";")
            return TaskSpec(name, entries)
        if t == "task":
            self.pos += 1
            self.expect("body")
            name = self.ident()
            self.expect("is")
            self.expect("begin")
            stmts = self.parse_stmts({"end"})
            self.expect("end")
            if self.ident() != name:
                raise SyntaxError(f"task body {name} end-name mismatch")
            self.expect(";")
            return TaskBody(name, stmts)
        raise SyntaxError(f"unexpected declaration start {t!r}")

    def parse_stmts(self, stop: set[str]) -> list[AdaStmt]:
        stmts: list[AdaStmt] = []
        while self.peek() not in stop:
            stmts.append(self.parse_stmt())
        return stmts

    def parse_stmt(self) -> AdaStmt:
        t = self.peek()
        if t == "null":
            self.pos += 1
            self.expect(";")
            return NullStmt()
        if t == "exit":
            self.pos += 1
            self.expect(";")
            return ExitStmt()
        if t == "return":
            self.pos += 1
            self.ident()
            self.expect(";")
            return ProcedureCallStmt("return")  # flagged by checks
        if t == "accept":
            self.pos += 1
            name = self.ident()
            self.expect(";")
            return AcceptStmt(name)
        if t == "loop":
            self.pos += 1
            body = self.parse_stmts({"end"})
            self.expect("end")
            self.expect("loop")
            self.expect(";")
            return LoopStmt(body)
        if t == "if":
            self.pos += 1
            cond = self.ident()
            self.expect("then")
            then_stmts = self.parse_stmts({"else", "end"})
            else_stmts: list[AdaStmt] = []
            if self.peek() == "else":
                self.pos += 1
                else_stmts = self.parse_stmts({"end"})
            self.expect("end")
            self.expect("if")
            self.expect(";")
            return IfElseStmt(cond, then_stmts, else_stmts)
        if t == "case":
            self.pos += 1
            selector = self.ident()
            self.expect("is")
            arms: list[list[AdaStmt]] = []
            saw_others = False
            while self.peek() == "when":
                self.pos += 1
                choice = self.peek()
                self.pos += 1
                self.expect("=>")
                body = self.parse_stmts({"when", "end"})
                if choice == "others":
                    saw_others = True
                else:
                    arms.append(body)
            self.expect("end")
            self.expect("case")
            self.expect(";")
            if not saw_others:
                raise SyntaxError("case without others alternative")
            return CaseStmt(selector, arms)
        if t == "select":
            self.pos += 1
            alternatives: list[list[AdaStmt]] = []
            terminate = False
            while True:
                if self.peek() == "terminate":
                    self.pos += 1
                    self.expect(";")
                    terminate = True
                else:
                    alternatives.append(self.parse_stmts({"or", "end"}))
                if self.peek() == "or":
                    self.pos += 1
                    continue
                break
            self.expect("end")
            self.expect("select")
            self.expect(";")
            return SelectStmt(alternatives, terminate)
        # entry call Task.entry; or procedure call name;
        name = self.ident()
        if self.peek() == ".":
            self.pos += 1
            entry = self.ident()
            self.expect(";")
            return EntryCallStmt(name, entry)
        self.expect(";")
        return ProcedureCallStmt(name)


def parse_ada(text: str) -> AdaUnit:
    """Re-parse rendered output under the supported Ada subset."""
    return _AdaParser(_tokenize_ada(text)).parse_unit()


def _walk_stmts(stmts: list[AdaStmt]):
    for s in stmts:
        yield s
        if isinstance(s, LoopStmt):
            yield from _walk_stmts(s.body)
        elif isinstance(s, IfElseStmt):
            yield from _walk_stmts(s.then_stmts)
            yield from _walk_stmts(s.else_stmts)
        elif isinstance(s, CaseStmt):
            for arm in s.alternatives:
                yield from _walk_stmts(arm)
        elif isinstance(s, SelectStmt):
            for arm in s.alternatives:
                yield from _walk_stmts(arm)


def check_wellformed(unit: AdaUnit) -> list[str]:
    """Static well-formedness of the generated program: distinct names,
    spec/body pairing, stub discipline, rendezvous discipline."""
    problems: list[str] = []
    subprograms = [d for d in unit.declarations
                   if isinstance(d, (FunctionStub, ProcedureStub))]
    specs = [d for d in unit.declarations if isinstance(d, TaskSpec)]
    bodies = [d for d in unit.declarations if isinstance(d, TaskBody)]

    sub_names = [d.name for d in subprograms]
    spec_names = [d.name for d in specs]
    body_names = [d.name for d in bodies]
    if len(set(sub_names)) != len(sub_names):
        problems.append("duplicate subprogram names")
    if len(set(spec_names)) != len(spec_names):
        problems.append("duplicate task names")
    if set(sub_names) & set(spec_names):
        problems.append("subprogram and task names overlap")
    if sorted(spec_names) != sorted(body_names):
        problems.append("task specs and bodies do not pair up")
    for spec in specs:
        if len(set(spec.entries)) != len(spec.entries):
            problems.append(f"duplicate entries in task {spec.name}")

    entries = {s.name: set(s.entries) for s in specs}
    for body in bodies:
        own = entries.get(body.name, set())
        for s in _walk_stmts(body.statements):
            if isinstance(s, AcceptStmt) and s.entry not in own:
                problems.append(
                    f"{body.name} accepts {s.entry} which is not its entry")
            if isinstance(s, ProcedureCallStmt):
                if s.name == "return":
                    problems.append(f"return statement in task body {body.name}")
                elif s.name not in sub_names:
                    problems.append(
                        f"{body.name} calls undeclared procedure {s.name}")
            if isinstance(s, EntryCallStmt):
                if s.task == body.name:
                    problems.append(f"{body.name} calls its own entry")
                elif s.task not in entries:
                    problems.append(
                        f"{body.name} calls entry of unknown task {s.task}")
                elif s.entry not in entries[s.task]:
                    problems.append(
                        f"{body.name} calls undeclared entry "
                        f"{s.task}.{s.entry}")
                elif s.task.split("_", 1)[0] == body.name.split("_", 1)[0]:
                    problems.append(
                        f"{body.name} calls same-kind task {s.task}")
    return problems
