"""Recursive-descent front end for the Wright architecture language.

Lexing notes:
* ``//`` starts a line comment;
* ``_name`` at token start marks a signalled event, ``-name`` an internal one;
* data tags (``?x``, ``!x``, ``!1``, ``!(2*x)``) are attached to the preceding
  event name and kept only for round-tripping;
* structural keywords (Configuration, Component, Port, Instances, ...) are
  matched case-insensitively and are not reserved inside process expressions.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import (
    Attachment,
    ComponentType,
    Configuration,
    ConnectorType,
    EventExpr,
    ExternalChoice,
    Instance,
    Internal,
    InternalChoice,
    MixedChoice,
    NamedBehavior,
    Observed,
    Prefix,
    ProcessExpr,
    ProcessRef,
    Signalled,
    SourceSpan,
    Stop,
    Success,
    SuccessTick,
    normalize_process,
)


class WrightSyntaxError(SyntaxError):
    def __init__(self, message: str, span: SourceSpan, expected: tuple[str, ...] = ()):
        at = f"{span.line}:{span.column}"
        if expected:
            message = f"{message} (expected one of: {', '.join(expected)})"
        super().__init__(f"{at}: {message}")
        self.span = span
        self.expected = expected


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Token:
    kind: str          # ID INT SIGNAL TAG ARROW EC IC LPAREN RPAREN LBRACE RBRACE
    #                    EQ COLON DOT MINUS SECTION EOF
    value: object
    line: int
    column: int

    @property
    def span(self) -> SourceSpan:
        length = len(self.value) if isinstance(self.value, str) else 1
        return SourceSpan(self.line, self.column, max(1, length))


def _is_ident_start(c: str) -> bool:
    return c.isalpha()


def _is_ident_char(c: str) -> bool:
    return c.isalnum() or c == "_"


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg: str):
        raise WrightSyntaxError(msg, SourceSpan(line, col))

    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col

        def emit(kind: str, value, width: int):
            nonlocal i, col
            toks.append(Token(kind, value, start_line, start_col))
            i += width
            col += width

        if text.startswith("->", i):
            emit("ARROW", "->", 2)
            continue
        if text.startswith("[]", i):
            emit("EC", "[]", 2)
            continue
        if text.startswith("|~|", i):
            emit("IC", "|~|", 3)
            continue
        if c == "~":
            emit("IC", "~", 1)
            continue
        if c == "§":
            emit("SECTION", "§", 1)
            continue
        if c == "(":
            emit("LPAREN", "(", 1)
            continue
        if c == ")":
            emit("RPAREN", ")", 1)
            continue
        if c == "{":
            emit("LBRACE", "{", 1)
            continue
        if c == "}":
            emit("RBRACE", "}", 1)
            continue
        if c == "=":
            emit("EQ", "=", 1)
            continue
        if c == ":":
            emit("COLON", ":", 1)
            continue
        if c == ".":
            emit("DOT", ".", 1)
            continue
        if c == ";":
            emit("SEMI", ";", 1)
            continue
        if c == ",":
            emit("COMMA", ",", 1)
            continue
        if c == "-":
            emit("MINUS", "-", 1)
            continue
        if c in "?!":
            # data tag: direction plus identifier, integer, or balanced parens
            j = i + 1
            if j < n and text[j] == "(":
                depth = 0
                k = j
                while k < n:
                    if text[k] == "(":
                        depth += 1
                    elif text[k] == ")":
                        depth -= 1
                        if depth == 0:
                            break
                    elif text[k] == "\n":
                        err("unterminated data tag")
                    k += 1
                if k >= n:
                    err("unterminated data tag")
                payload = text[j : k + 1]
                emit("TAG", (c, payload), (k + 1) - i)
                continue
            k = j
            while k < n and _is_ident_char(text[k]):
                k += 1
            if k == j:
                err(f"expected data value after '{c}'")
            emit("TAG", (c, text[j:k]), k - i)
            continue
        if c == "_":
            j = i + 1
            if j < n and _is_ident_start(text[j]):
                k = j
                while k < n and _is_ident_char(text[k]):
                    k += 1
                emit("SIGNAL", text[j:k], k - i)
                continue
            err("'_' must introduce an event name")
        if _is_ident_start(c):
            k = i
            while k < n and _is_ident_char(text[k]):
                k += 1
            emit("ID", text[i:k], k - i)
            continue
        if c.isdigit():
            k = i
            while k < n and text[k].isdigit():
                k += 1
            emit("INT", text[i:k], k - i)
            continue
        err(f"unexpected character {c!r}")
    toks.append(Token("EOF", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_STRUCTURAL = {
    "configuration", "style", "component", "connector", "port", "role",
    "computation", "glue", "instances", "attachments", "as", "end",
    "constraints", "where",
}

_SUCCESS_WORDS = {"skip", "tick"}


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0

    # -- token plumbing ----------------------------------------------------
    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at_keyword(self, *words: str) -> bool:
        t = self.peek()
        return t.kind == "ID" and t.value.lower() in words

    def expect_keyword(self, word: str) -> Token:
        if not self.at_keyword(word):
            t = self.peek()
            raise WrightSyntaxError(f"got {t.value!r}", t.span, (word,))
        return self.next()

    def expect(self, kind: str, what: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise WrightSyntaxError(f"got {t.value!r}", t.span, (what,))
        return self.next()

    def expect_id(self, what: str = "identifier") -> Token:
        return self.expect("ID", what)

    # -- unit --------------------------------------------------------------
    def parse_unit(self) -> Configuration:
        t = self.peek()
        if self.at_keyword("configuration"):
            self.next()
            return self.parse_body(is_style=False)
        if self.at_keyword("style"):
            self.next()
            return self.parse_body(is_style=True)
        raise WrightSyntaxError(
            f"got {t.value!r}", t.span, ("Configuration", "Style"))

    def parse_body(self, is_style: bool) -> Configuration:
        name = self.expect_id("unit name").value
        comp_types: list[ComponentType] = []
        conn_types: list[ConnectorType] = []
        while True:
            if self.at_keyword("component"):
                comp_types.append(self.parse_component())
            elif self.at_keyword("connector"):
                conn_types.append(self.parse_connector())
            else:
                break
        comp_instances: list[Instance] = []
        conn_instances: list[Instance] = []
        attachments: list[Attachment] = []
        constraint_text = ""
        if is_style:
            if self.at_keyword("constraints"):
                self.next()
                constraint_text = self.skip_until_keyword("end")
            self.expect_keyword("end")
            self.expect_keyword("style")
        else:
            self.expect_keyword("instances")
            declared = {c.name: "component" for c in comp_types}
            declared.update({c.name: "connector" for c in conn_types})
            while not self.at_keyword("attachments", "end"):
                comp_instances, conn_instances = self.parse_instance(
                    declared, comp_instances, conn_instances)
            self.expect_keyword("attachments")
            while not self.at_keyword("end"):
                attachments.append(self.parse_attachment())
            self.expect_keyword("end")
            self.expect_keyword("configuration")
        self.expect("EOF", "end of input")
        return Configuration(
            name=name,
            component_types=tuple(comp_types),
            connector_types=tuple(conn_types),
            component_instances=tuple(comp_instances),
            connector_instances=tuple(conn_instances),
            attachments=tuple(attachments),
            is_style=is_style,
            constraint_text=constraint_text,
        )

    def skip_until_keyword(self, word: str) -> str:
        """Consume tokens up to (not including) a keyword; return their text."""
        parts: list[str] = []
        while not self.at_keyword(word) and self.peek().kind != "EOF":
            t = self.next()
            v = t.value
            parts.append(v if isinstance(v, str) else f"{v[0]}{v[1]}")
        return " ".join(parts)

    # -- types ---------------------------------------------------------
    def parse_component(self) -> ComponentType:
        self.expect_keyword("component")
        name = self.expect_id("component name").value
        ports: list[NamedBehavior] = []
        while self.at_keyword("port"):
            self.next()
            pname = self.expect_id("port name").value
            self.expect("EQ", "=")
            behavior = self.parse_process()
            defs = self.parse_where()
            ports.append(NamedBehavior(pname, behavior, defs))
        self.expect_keyword("computation")
        self.expect("EQ", "=")
        computation = self.parse_process()
        defs = self.parse_where()
        return ComponentType(name, tuple(ports), computation, defs)

    def parse_connector(self) -> ConnectorType:
        self.expect_keyword("connector")
        name = self.expect_id("connector name").value
        roles: list[NamedBehavior] = []
        while self.at_keyword("role"):
            self.next()
            rname = self.expect_id("role name").value
            self.expect("EQ", "=")
            behavior = self.parse_process()
            defs = self.parse_where()
            roles.append(NamedBehavior(rname, behavior, defs))
        self.expect_keyword("glue")
        self.expect("EQ", "=")
        glue = self.parse_process()
        defs = self.parse_where()
        return ConnectorType(name, tuple(roles), glue, defs)

    def parse_where(self) -> tuple[tuple[str, ProcessExpr], ...]:
        if not self.at_keyword("where"):
            return ()
        self.next()
        self.expect("LBRACE", "{")
        defs: list[tuple[str, ProcessExpr]] = []
        while self.peek().kind != "RBRACE":
            name = self.expect_id("process name").value
            self.expect("EQ", "=")
            defs.append((name, self.parse_process()))
            while self.peek().kind == "SEMI":
                self.next()
        self.expect("RBRACE", "}")
        return tuple(defs)

    # -- instances and attachments --------------------------------------
    def parse_instance(self, declared, comp_instances, conn_instances):
        iname = self.expect_id("instance name").value
        self.expect("COLON", ":")
        kind = None
        if self.at_keyword("component"):
            self.next()
            kind = "component"
        elif self.at_keyword("connector"):
            self.next()
            kind = "connector"
        tname_tok = self.expect_id("type name")
        tname = tname_tok.value
        if kind is None:
            kind = declared.get(tname)
        if kind is None:
            # type unknown: default to component; static checks will flag W-R2
            kind = "component"
        inst = Instance(iname, tname, kind)
        if kind == "connector":
            conn_instances = conn_instances + [inst]
        else:
            comp_instances = comp_instances + [inst]
        return comp_instances, conn_instances

    def parse_attachment(self) -> Attachment:
        ci = self.expect_id("component instance").value
        self.expect_separator()
        port = self.expect_id("port name").value
        self.expect_keyword("as")
        ni = self.expect_id("connector instance").value
        self.expect_separator()
        role = self.expect_id("role name").value
        return Attachment(ci, port, ni, role)

    def expect_separator(self):
        t = self.peek()
        if t.kind in ("MINUS", "DOT"):
            self.next()
            return
        raise WrightSyntaxError(f"got {t.value!r}", t.span, ("-", "."))

    # -- process expressions ---------------------------------------------
    def parse_process(self) -> ProcessExpr:
        first = self.parse_term()
        op_kind = self.peek().kind
        if op_kind not in ("EC", "IC"):
            return normalize_process(first)
        branches = [first]
        while self.peek().kind in ("EC", "IC"):
            t = self.peek()
            if t.kind != op_kind:
                raise MixedChoice(
                    f"{t.line}:{t.column}: cannot mix [] and |~| without parentheses")
            self.next()
            branches.append(self.parse_term())
        node = (ExternalChoice if op_kind == "EC" else InternalChoice)(tuple(branches))
        return normalize_process(node)

    def parse_term(self) -> ProcessExpr:
        t = self.peek()
        if t.kind == "LPAREN":
            self.next()
            inner = self.parse_process()
            self.expect("RPAREN", ")")
            return inner
        if t.kind == "SECTION":
            self.next()
            return Success()
        if t.kind == "MINUS":
            # internal event prefix: -name -> target
            self.next()
            name = self.expect_id("internal event name").value
            self.expect("ARROW", "->")
            return Prefix(Internal(name), self.parse_term())
        if t.kind == "SIGNAL":
            self.next()
            event = self.parse_event_tail(t.value, signalled=True)
            self.expect("ARROW", "->")
            return Prefix(event, self.parse_term())
        if t.kind == "ID":
            word = t.value
            low = word.lower()
            if low in _SUCCESS_WORDS:
                self.next()
                return Success()
            if word == "V":
                self.next()
                self.expect("ARROW", "->")
                return Prefix(SuccessTick(), self.parse_term())
            if word == "STOP":
                self.next()
                return Stop()
            if word == "§":
                self.next()
                return Success()
            # event prefix or process reference
            self.next()
            if self.peek().kind in ("DOT", "TAG") or self.peek().kind == "ARROW":
                if self.peek().kind == "ARROW":
                    self.next()
                    return Prefix(Observed(word), self.parse_term())
                event = self.parse_event_tail(word, signalled=False)
                self.expect("ARROW", "->")
                return Prefix(event, self.parse_term())
            return ProcessRef(word)
        raise WrightSyntaxError(
            f"got {t.value!r}", t.span,
            ("event", "process name", "(", "§", "SKIP"))

    def parse_event_tail(self, first: str, signalled: bool) -> EventExpr:
        name = first
        if self.peek().kind == "DOT":
            self.next()
            name = f"{first}.{self.expect_id('event name').value}"
        tags: list[tuple[str, str]] = []
        while self.peek().kind == "TAG":
            tags.append(self.next().value)
        cls = Signalled if signalled else Observed
        return cls(name, tuple(tags))


def parse_wright(text: str) -> Configuration:
    """Parse one Wright unit (Configuration or Style) from source text."""
    return _Parser(text).parse_unit()


def parse_process(text: str) -> ProcessExpr:
    """Parse a bare process expression (used for fragments in tests/tools)."""
    p = _Parser(text)
    expr = p.parse_process()
    p.expect("EOF", "end of input")
    return expr


# ---------------------------------------------------------------------------
# Pretty printer (round-trip support)
# ---------------------------------------------------------------------------

def format_event(e: EventExpr) -> str:
    if isinstance(e, SuccessTick):
        return "V"
    if isinstance(e, Internal):
        return f"-{e.name}"
    tags = "".join(f"{d}{v}" for d, v in getattr(e, "data", ()))
    prefix = "_" if isinstance(e, Signalled) else ""
    return f"{prefix}{e.name}{tags}"


def format_process(expr: ProcessExpr) -> str:
    if isinstance(expr, Success):
        return "§"
    if isinstance(expr, Stop):
        return "STOP"
    if isinstance(expr, ProcessRef):
        return expr.name
    if isinstance(expr, Prefix):
        if isinstance(expr.event, SuccessTick):
            return f"V -> {format_process(expr.target)}"
        tgt = expr.target
        rendered = format_process(tgt)
        if isinstance(tgt, (ExternalChoice, InternalChoice)):
            rendered = f"({rendered})"
        return f"{format_event(expr.event)} -> {rendered}"
    if isinstance(expr, (ExternalChoice, InternalChoice)):
        op = " [] " if isinstance(expr, ExternalChoice) else " |~| "
        parts = []
        for b in expr.branches:
            r = format_process(b)
            if isinstance(b, (ExternalChoice, InternalChoice)):
                r = f"({r})"
            parts.append(r)
        return op.join(parts)
    raise TypeError(f"not a process expression: {expr!r}")


def format_unit(unit: Configuration) -> str:
    out: list[str] = []
    kw = "Style" if unit.is_style else "Configuration"
    out.append(f"{kw} {unit.name}")

    def emit_defs(defs: tuple[tuple[str, ProcessExpr], ...], indent: str):
        if not defs:
            return
        out.append(f"{indent}where {{")
        for name, proc in defs:
            out.append(f"{indent}  {name} = {format_process(proc)}")
        out.append(f"{indent}}}")

    for ct in unit.component_types:
        out.append(f"Component {ct.name}")
        for port in ct.ports:
            out.append(f"  Port {port.name} = {format_process(port.behavior)}")
            emit_defs(port.local_defs, "  ")
        out.append(f"  Computation = {format_process(ct.computation)}")
        emit_defs(ct.local_defs, "  ")
    for ct in unit.connector_types:
        out.append(f"Connector {ct.name}")
        for role in ct.roles:
            out.append(f"  Role {role.name} = {format_process(role.behavior)}")
            emit_defs(role.local_defs, "  ")
        out.append(f"  Glue = {format_process(ct.glue)}")
        emit_defs(ct.local_defs, "  ")
    if unit.is_style:
        out.append("Constraints")
        out.append("End Style")
    else:
        out.append("Instances")
        for inst in unit.component_instances:
            out.append(f"  {inst.name} : Component {inst.type_name}")
        for inst in unit.connector_instances:
            out.append(f"  {inst.name} : Connector {inst.type_name}")
        out.append("Attachments")
        for att in unit.attachments:
            out.append(
                f"  {att.component_instance}.{att.port} As "
                f"{att.connector_instance}.{att.role}")
        out.append("End Configuration")
    return "\n".join(out) + "\n"
