"""Component-assembly contract checking.

Assemblies arrive as JSON documents (see ``parse_assembly``) in one of two
dialects:

* ``UML`` — components with provided/required interface ports carrying
  operation signatures, linked by binary assembly connectors with a server
  and a client end;
* ``Ugatze`` — components with information points (IIP/OIP) and operation
  points (PIOP/UIOP), linked by pipes, shared-data accesses, and operation
  interactions.

Each checker returns Diagnostics whose ruleId names the violated rule; the
full catalogue is documented in the README.
"""
from __future__ import annotations

import json

from .model import (
    Assembly,
    AssemblyAttachment,
    AssemblyComponent,
    AssemblyConnector,
    AssemblyPort,
    AssemblyRole,
    Characteristic,
    DATA_POINT_KINDS,
    Diagnostic,
    NumericConstraint,
    OPERATION_POINT_KINDS,
    OrdinalConstraint,
    PORT_KINDS,
    QoSProfile,
    Quality,
    Signature,
)


class FormatError(Exception):
    """Malformed assembly document."""

    def __init__(self, path: str, reason: str):
        self.path = path
        self.reason = reason
        super().__init__(f"{path}: {reason}")


class WrongDialect(Exception):
    """Checker applied to an assembly of another dialect."""


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _require(cond: bool, path: str, reason: str) -> None:
    if not cond:
        raise FormatError(path, reason)


def _parse_signature(obj, path: str) -> Signature:
    _require(isinstance(obj, dict), path, "operation must be an object")
    _require(isinstance(obj.get("name"), str), path, "operation needs a name")
    params = []
    for i, p in enumerate(obj.get("params", [])):
        ppath = f"{path}.params[{i}]"
        _require(isinstance(p, dict) and isinstance(p.get("type"), str)
                 and isinstance(p.get("mode"), str),
                 ppath, "parameter needs type and mode")
        params.append((p["type"], p["mode"]))
    return Signature(obj["name"], tuple(params), obj.get("result", "void"))


def _parse_characteristic(obj, path: str) -> Characteristic:
    _require(isinstance(obj, dict), path, "characteristic must be an object")
    for key in ("name", "direction", "domain", "unit"):
        _require(isinstance(obj.get(key), str), path,
                 f"characteristic needs string field {key!r}")
    return Characteristic(obj["name"], obj["direction"], obj["domain"],
                          obj["unit"],
                          tuple(obj.get("ordinalValues", [])),
                          obj.get("values", ""), obj.get("invariant", ""))


def _parse_quality(obj, path: str) -> Quality:
    _require(isinstance(obj, dict) and isinstance(obj.get("name"), str),
             path, "quality needs a name")
    numeric = []
    for i, c in enumerate(obj.get("numeric", [])):
        cpath = f"{path}.numeric[{i}]"
        _require(isinstance(c, dict) and c.get("op") in ("<", "<=", ">", ">="),
                 cpath, "numeric constraint needs op <,<=,> or >=")
        _require(isinstance(c.get("value"), (int, float)), cpath,
                 "numeric constraint needs a number value")
        numeric.append(NumericConstraint(
            _parse_characteristic(c.get("characteristic"), cpath),
            c["op"], float(c["value"])))
    ordinal = []
    for i, c in enumerate(obj.get("ordinal", [])):
        cpath = f"{path}.ordinal[{i}]"
        _require(isinstance(c, dict) and isinstance(c.get("op"), str),
                 cpath, "ordinal constraint needs op")
        _require(isinstance(c.get("value"), str), cpath,
                 "ordinal constraint needs a string value")
        ordinal.append(OrdinalConstraint(
            _parse_characteristic(c.get("characteristic"), cpath),
            c["op"], c["value"]))
    return Quality(obj["name"], tuple(numeric), tuple(ordinal))


def _parse_profile(obj, path: str) -> QoSProfile:
    _require(isinstance(obj, dict), path, "profile must be an object")
    return QoSProfile(
        tuple(_parse_quality(q, f"{path}.required[{i}]")
              for i, q in enumerate(obj.get("required", []))),
        tuple(_parse_quality(q, f"{path}.provided[{i}]")
              for i, q in enumerate(obj.get("provided", []))))


def parse_assembly(text: str) -> Assembly:
    """Parse and validate the JSON assembly format."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError("$", f"invalid JSON: {exc}") from None
    _require(isinstance(doc, dict), "$", "document must be an object")
    dialect = doc.get("dialect")
    _require(dialect in ("UML", "Ugatze"), "$.dialect",
             "dialect must be 'UML' or 'Ugatze'")
    types = doc.get("types", [])
    _require(isinstance(types, list) and all(isinstance(t, str) for t in types),
             "$.types", "types must be a list of strings")

    components = []
    for i, c in enumerate(doc.get("components", [])):
        path = f"$.components[{i}]"
        _require(isinstance(c, dict) and isinstance(c.get("name"), str),
                 path, "component needs a name")
        ports = []
        for j, p in enumerate(c.get("ports", [])):
            ppath = f"{path}.ports[{j}]"
            _require(isinstance(p, dict) and isinstance(p.get("name"), str),
                     ppath, "port needs a name")
            _require(p.get("kind") in PORT_KINDS, ppath,
                     f"port kind must be one of {sorted(PORT_KINDS)}")
            ops = tuple(_parse_signature(o, f"{ppath}.operations[{k}]")
                        for k, o in enumerate(p.get("operations", [])))
            protocol = p.get("protocol")
            _require(protocol is None or isinstance(protocol, str),
                     ppath, "protocol must be a string")
            ports.append(AssemblyPort(p["name"], p["kind"], ops, protocol))
        _require(len({p.name for p in ports}) == len(ports), path,
                 "duplicate port names")
        profile = (_parse_profile(c["profile"], f"{path}.profile")
                   if "profile" in c else None)
        components.append(AssemblyComponent(
            c["name"], tuple(ports), c.get("kind"), profile))
    _require(len({c.name for c in components}) == len(components),
             "$.components", "duplicate component names")

    connectors = []
    for i, c in enumerate(doc.get("connectors", [])):
        path = f"$.connectors[{i}]"
        _require(isinstance(c, dict) and isinstance(c.get("name"), str),
                 path, "connector needs a name")
        _require(isinstance(c.get("kind"), str), path, "connector needs a kind")
        roles = []
        for j, r in enumerate(c.get("roles", [])):
            rpath = f"{path}.roles[{j}]"
            _require(isinstance(r, dict) and isinstance(r.get("name"), str)
                     and isinstance(r.get("end"), str),
                     rpath, "role needs name and end")
            ops = tuple(_parse_signature(o, f"{rpath}.operations[{k}]")
                        for k, o in enumerate(r.get("operations", [])))
            roles.append(AssemblyRole(r["name"], r["end"], ops))
        _require(len({r.name for r in roles}) == len(roles), path,
                 "duplicate role names")
        buffer_size = c.get("bufferSize")
        _require(buffer_size is None or isinstance(buffer_size, int),
                 path, "bufferSize must be an integer")
        connectors.append(AssemblyConnector(
            c["name"], c["kind"], tuple(roles), buffer_size))
    _require(len({c.name for c in connectors}) == len(connectors),
             "$.connectors", "duplicate connector names")

    assembly = Assembly(dialect, tuple(types), tuple(components),
                        tuple(connectors))
    attachments = []
    for i, a in enumerate(doc.get("attachments", [])):
        path = f"$.attachments[{i}]"
        _require(isinstance(a, dict), path, "attachment must be an object")
        for key in ("component", "port", "connector", "role"):
            _require(isinstance(a.get(key), str), path,
                     f"attachment needs string field {key!r}")
        comp = assembly.component(a["component"])
        _require(comp is not None, path,
                 f"unknown component {a['component']!r}")
        _require(comp.port(a["port"]) is not None, path,
                 f"unknown port {a['component']}.{a['port']}")
        conn = assembly.connector(a["connector"])
        _require(conn is not None, path,
                 f"unknown connector {a['connector']!r}")
        _require(conn.role(a["role"]) is not None, path,
                 f"unknown role {a['connector']}.{a['role']}")
        attachments.append(AssemblyAttachment(
            a["component"], a["port"], a["connector"], a["role"]))
    return Assembly(dialect, tuple(types), tuple(components),
                    tuple(connectors), tuple(attachments))


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _ports_on_role(asm: Assembly, conn: AssemblyConnector,
                   role: AssemblyRole) -> list[tuple[AssemblyComponent, AssemblyPort]]:
    out = []
    for att in asm.attachments:
        if att.connector == conn.name and att.role == role.name:
            comp = asm.component(att.component)
            out.append((comp, comp.port(att.port)))
    return out


def _attached(asm: Assembly, comp: AssemblyComponent,
              port: AssemblyPort) -> list[AssemblyAttachment]:
    return [a for a in asm.attachments
            if a.component == comp.name and a.port == port.name]


def _connected(asm: Assembly, c1: str, c2: str) -> bool:
    """Two components are connected iff they attach to the same connector."""
    for conn in asm.connectors:
        members = {a.component for a in asm.attachments
                   if a.connector == conn.name}
        if c1 in members and c2 in members:
            return True
    return False


def _diag(rule: str, location: str, message: str,
          severity: str = "error") -> Diagnostic:
    return Diagnostic(rule, severity, location, message)


# ---------------------------------------------------------------------------
# UML suite
# ---------------------------------------------------------------------------

def check_uml(asm: Assembly) -> list[Diagnostic]:
    if asm.dialect != "UML":
        raise WrongDialect(f"check_uml on {asm.dialect} assembly")
    out: list[Diagnostic] = []

    for comp in asm.components:
        if comp.kind not in (None, "ComposantUML"):
            out.append(_diag("UML-composants_admis", comp.name,
                             f"component kind {comp.kind!r} is not admitted"))
        if not comp.ports:
            out.append(_diag("UML-aumoinsInterface", comp.name,
                             "component declares no interface"))
        if len(comp.ports) == 1 and comp.ports[0].kind != "ProvidedInterface":
            out.append(_diag("UML-uneseuleInterfaceOfferte", comp.name,
                             "a single-interface component must offer it"))
        for port in comp.ports:
            if port.kind not in ("ProvidedInterface", "RequiredInterface"):
                out.append(_diag(
                    "UML-interfaceRequiseOfferte",
                    f"{comp.name}.{port.name}",
                    f"interface kind must be provided or required, "
                    f"got {port.kind!r}"))

    for conn in asm.connectors:
        if conn.kind not in ("AssemblageUML",):
            out.append(_diag("UML-connecteurs_admis", conn.name,
                             f"connector kind {conn.kind!r} is not admitted"))
        if len(conn.roles) != 2:
            out.append(_diag("UML-binaire", conn.name,
                             f"assembly connector must be binary, "
                             f"has {len(conn.roles)} roles"))
        for role in conn.roles:
            ports = _ports_on_role(asm, conn, role)
            where = f"{conn.name}.{role.name}"
            if role.end == "server":
                if len(ports) != 1:
                    out.append(_diag("UML-un_port_offert", where,
                                     f"server end must attach exactly one "
                                     f"port, found {len(ports)}"))
                for comp, port in ports:
                    if port.kind != "ProvidedInterface":
                        out.append(_diag(
                            "UML-interface_offerte", where,
                            f"{comp.name}.{port.name} attached to the server "
                            "end is not a provided interface"))
            elif role.end == "client":
                if len(ports) != 1:
                    out.append(_diag("UML-un_port_requis", where,
                                     f"client end must attach exactly one "
                                     f"port, found {len(ports)}"))
                for comp, port in ports:
                    if port.kind != "RequiredInterface":
                        out.append(_diag(
                            "UML-interface_requise", where,
                            f"{comp.name}.{port.name} attached to the client "
                            "end is not a required interface"))
            else:
                out.append(_diag("UML-connecteurs_admis", where,
                                 f"role end must be server or client, "
                                 f"got {role.end!r}"))

        # a connector must not link two ports of the same component
        members = [a.component for a in asm.attachments
                   if a.connector == conn.name]
        if len(members) > len(set(members)):
            out.append(_diag("UML-appellant_appele", conn.name,
                             "connector links two interfaces of the same "
                             "component"))

    for comp in asm.components:
        for port in comp.ports:
            if (port.kind == "RequiredInterface"
                    and not _attached(asm, comp, port)):
                out.append(_diag("UML-interface_requise_satisfaite",
                                 f"{comp.name}.{port.name}",
                                 "required interface is not attached"))

    # attachment-level signature contracts
    for att in asm.attachments:
        comp = asm.component(att.component)
        port = comp.port(att.port)
        role = asm.connector(att.connector).role(att.role)
        where = f"{att.component}.{att.port}~{att.connector}.{att.role}"
        if not role.operations:
            continue  # roles without declared operations skip Rc1/Rc2
        if len(role.operations) != len(port.operations):
            out.append(_diag("UML-Rc1", where,
                             f"attached port and role expose "
                             f"{len(port.operations)} vs "
                             f"{len(role.operations)} operations"))
        elif set(role.operations) != set(port.operations):
            out.append(_diag("UML-Rc2", where,
                             "attached port and role operations differ"))

    # per connector: required services must be offered
    for conn in asm.connectors:
        provided: set[Signature] = set()
        required: list[tuple[str, Signature]] = []
        for role in conn.roles:
            for comp, port in _ports_on_role(asm, conn, role):
                if port.kind == "ProvidedInterface":
                    provided.update(port.operations)
                elif port.kind == "RequiredInterface":
                    required.extend((f"{comp.name}.{port.name}", s)
                                    for s in port.operations)
        missing = [(w, s) for w, s in required if s not in provided]
        if missing:
            names = ", ".join(sorted({s.name for _, s in missing}))
            out.append(_diag("UML-service_offert_requis", conn.name,
                             f"required service(s) not offered across the "
                             f"connector: {names}"))
    return out


# ---------------------------------------------------------------------------
# QoS suite
# ---------------------------------------------------------------------------

def _same_characteristic(c1: Characteristic, c2: Characteristic) -> bool:
    return (c1.name == c2.name and c1.direction == c2.direction
            and c1.domain_kind == c2.domain_kind)


_NUMERIC_RELATION = {
    ">=": lambda provided, required: provided >= required,
    ">": lambda provided, required: provided > required,
    "<=": lambda provided, required: provided <= required,
    "<": lambda provided, required: provided < required,
}


def check_qos(asm: Assembly) -> list[Diagnostic]:
    """Every quality a component requires must be assured by some connected
    component's provided quality."""
    out: list[Diagnostic] = []
    for comp in asm.components:
        if comp.profile is None:
            continue
        neighbors = [c for c in asm.components
                     if c is not comp and c.profile is not None
                     and _connected(asm, comp.name, c.name)]
        for quality in comp.profile.required:
            verdict = _quality_satisfied(quality, neighbors)
            if verdict is True:
                continue
            if verdict == "ordinal":
                out.append(_diag(
                    "QOS-ordinal", f"{comp.name}:{quality.name}",
                    "required ordinal constraint matches in characteristic "
                    "and operator but not in value", severity="warning"))
            elif verdict == "unit":
                out.append(_diag(
                    "QOS-unit", f"{comp.name}:{quality.name}",
                    "required constraint matches a provided characteristic "
                    "except for its unit"))
            else:
                out.append(_diag(
                    "QOS-CQualite", f"{comp.name}:{quality.name}",
                    f"required quality {quality.name} is not assured by any "
                    "connected component"))
    return out


def _quality_satisfied(required: Quality,
                       neighbors: list[AssemblyComponent]):
    """True, or the most specific failure tag over all candidate qualities:
    'ordinal' < 'unit' < False."""
    best = False
    for neighbor in neighbors:
        for provided in neighbor.profile.provided:
            tag = _quality_against(required, provided)
            if tag is True:
                return True
            if tag == "ordinal":
                best = "ordinal"
            elif tag == "unit" and best is False:
                best = "unit"
    return best


def _quality_against(required: Quality, provided: Quality):
    unit_clash = False
    for need in required.numeric:
        hit = unit_hit = False
        for have in provided.numeric:
            if not _same_characteristic(need.characteristic,
                                        have.characteristic):
                continue
            if need.characteristic.unit != have.characteristic.unit:
                unit_hit = True
                continue
            if (need.op == have.op
                    and _NUMERIC_RELATION[need.op](have.value, need.value)):
                hit = True
                break
        if not hit:
            if unit_hit:
                unit_clash = True
                continue
            return False
    ordinal_clash = False
    for need in required.ordinal:
        hit = near = False
        for have in provided.ordinal:
            if (_same_characteristic(need.characteristic, have.characteristic)
                    and need.characteristic.unit == have.characteristic.unit
                    and need.op == have.op):
                if need.value == have.value:
                    hit = True
                    break
                near = True
        if not hit:
            if near:
                ordinal_clash = True
                continue
            return False
    if unit_clash:
        return "unit"
    if ordinal_clash:
        return "ordinal"
    return True


# ---------------------------------------------------------------------------
# Ugatze suite
# ---------------------------------------------------------------------------

_UGATZE_KINDS = ("Filter", "ClientServer", "FilterClientServer")


def check_ugatze(asm: Assembly) -> list[Diagnostic]:
    if asm.dialect != "Ugatze":
        raise WrongDialect(f"check_ugatze on {asm.dialect} assembly")
    out: list[Diagnostic] = []

    if len(asm.components) < 2:
        out.append(_diag("UG-numberComponent", "$",
                         "an interaction graph needs at least two components"))

    for comp in asm.components:
        if comp.kind not in _UGATZE_KINDS:
            out.append(_diag("UG-componentType", comp.name,
                             f"component kind {comp.kind!r} is not a Ugatze "
                             "component type"))
            continue
        if not comp.ports:
            out.append(_diag("UG-haveAtLeastone", comp.name,
                             "component declares no interaction point"))
        kinds = {p.kind for p in comp.ports}
        if comp.kind == "Filter" and not kinds <= DATA_POINT_KINDS:
            out.append(_diag("UG-PortType1", comp.name,
                             "a filter may only expose IIP/OIP points"))
        if comp.kind == "ClientServer" and comp.ports \
                and not kinds & OPERATION_POINT_KINDS:
            out.append(_diag("UG-PortType2", comp.name,
                             "a client-server component needs a UIOP or "
                             "PIOP point"))
        if comp.kind == "FilterClientServer" and comp.ports:
            if not kinds & DATA_POINT_KINDS:
                out.append(_diag("UG-PortType1", comp.name,
                                 "a filter-client-server component needs an "
                                 "IIP or OIP point"))
            if not kinds & OPERATION_POINT_KINDS:
                out.append(_diag("UG-PortType2", comp.name,
                                 "a filter-client-server component needs a "
                                 "UIOP or PIOP point"))

    for comp in asm.components:
        if _connected(asm, comp.name, comp.name):
            # connected(c, c) here means: two attachments of the same
            # component share a connector
            conns = [c.name for c in asm.connectors
                     if sum(1 for a in asm.attachments
                            if a.connector == c.name
                            and a.component == comp.name) > 1]
            if conns:
                out.append(_diag("UG-failedAttachement", comp.name,
                                 f"component is attached to itself via "
                                 f"{', '.join(conns)}"))

    for conn in asm.connectors:
        if conn.kind == "Pipe":
            out.extend(_check_pipe(asm, conn))
        elif conn.kind == "OperationInteraction":
            out.extend(_check_operation_interaction(asm, conn))
        elif conn.kind == "DataAccess":
            out.extend(_check_data_access(asm, conn))
        else:
            out.append(_diag("UG-componentType", conn.name,
                             f"connector kind {conn.kind!r} is not a Ugatze "
                             "interaction type"))

    out.extend(_check_ugatze_attachment_properties(asm))
    return out


def _check_pipe(asm: Assembly, conn: AssemblyConnector) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    if len(conn.roles) != 2:
        out.append(_diag("UG-exactlyTwoRoles", conn.name,
                         f"a pipe has exactly two roles, "
                         f"found {len(conn.roles)}"))
    if conn.buffer_size is not None and conn.buffer_size < 0:
        out.append(_diag("UG-bufferpositive", conn.name,
                         f"pipe buffer size must be >= 0, "
                         f"got {conn.buffer_size}"))
    wanted = {"sink": "IIP", "source": "OIP"}
    for role in conn.roles:
        where = f"{conn.name}.{role.name}"
        ports = _ports_on_role(asm, conn, role)
        if not ports:
            out.append(_diag("UG-noDanglingRoles", where,
                             "pipe role is not attached"))
            continue
        if len(ports) != 1:
            out.append(_diag("UG-oneAttachment", where,
                             f"pipe role must attach exactly one point, "
                             f"found {len(ports)}"))
        want = wanted.get(role.end)
        for comp, port in ports:
            if want and port.kind != want:
                out.append(_diag("UG-precondition1", where,
                                 f"{role.end} role must attach an {want}, "
                                 f"but {comp.name}.{port.name} is "
                                 f"{port.kind}"))
    return out


def _check_operation_interaction(asm: Assembly,
                                 conn: AssemblyConnector) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    if len(conn.roles) != 2:
        out.append(_diag("UG-exactlyTwoRoles", conn.name,
                         f"an operation interaction has exactly two roles, "
                         f"found {len(conn.roles)}"))
    wanted = {"server": "PIOP", "client": "UIOP"}
    for role in conn.roles:
        where = f"{conn.name}.{role.name}"
        ports = _ports_on_role(asm, conn, role)
        if not ports:
            out.append(_diag("UG-noDanglingRoles", where,
                             "operation-interaction role is not attached"))
            continue
        if len(ports) != 1:
            out.append(_diag("UG-oneAttachment", where,
                             f"role must attach exactly one point, "
                             f"found {len(ports)}"))
        want = wanted.get(role.end)
        for comp, port in ports:
            if want and port.kind != want:
                out.append(_diag(
                    "UG-attachedPortsArePIOP" if want == "PIOP"
                    else "UG-attachedPortsAreUIOP", where,
                    f"{role.end} role must attach a {want}, but "
                    f"{comp.name}.{port.name} is {port.kind}"))
            # each attached operation point serves exactly one interaction
            uses = [a for a in asm.attachments
                    if a.component == comp.name and a.port == port.name]
            if len(uses) > 1:
                out.append(_diag("UG-connectorIndependence", where,
                                 f"{comp.name}.{port.name} serves "
                                 f"{len(uses)} interactions"))
    return out


def _check_data_access(asm: Assembly,
                       conn: AssemblyConnector) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    if len(conn.roles) < 2:
        out.append(_diag("UG-numberRoles", conn.name,
                         "a shared-data access needs at least two roles"))
    ends = {r.end for r in conn.roles}
    if not {"sourceShared", "sinkShared"} <= ends:
        out.append(_diag("UG-typerole", conn.name,
                         "a shared-data access needs a sourceShared and a "
                         "sinkShared role"))
    wanted = {"sourceShared": "OIP", "sinkShared": "IIP"}
    for role in conn.roles:
        where = f"{conn.name}.{role.name}"
        ports = _ports_on_role(asm, conn, role)
        if not ports:
            out.append(_diag("UG-atLeastOneAttachment", where,
                             "shared-data role is not attached"))
            continue
        want = wanted.get(role.end)
        for comp, port in ports:
            if want and port.kind != want:
                out.append(_diag(
                    "UG-attachedPortsAreOIP" if want == "OIP"
                    else "UG-attachedPortsAreIIP", where,
                    f"{role.end} role must attach an {want}, but "
                    f"{comp.name}.{port.name} is {port.kind}"))
    return out


def _check_ugatze_attachment_properties(asm: Assembly) -> list[Diagnostic]:
    """Data interactions require equal protocol strings across the connector;
    operation interactions require equal operation signatures."""
    out: list[Diagnostic] = []
    for conn in asm.connectors:
        pairs: list[tuple[AssemblyComponent, AssemblyPort]] = []
        for role in conn.roles:
            pairs.extend(_ports_on_role(asm, conn, role))
        if conn.kind in ("Pipe", "DataAccess"):
            protocols = {p.protocol for _, p in pairs if p.protocol is not None}
            if len(protocols) > 1:
                out.append(_diag(
                    "UG-protocol", conn.name,
                    "attached points disagree on protocol: "
                    + ", ".join(sorted(map(repr, protocols)))))
        elif conn.kind == "OperationInteraction":
            signatures = {p.operations for _, p in pairs if p.operations}
            if len(signatures) > 1:
                out.append(_diag(
                    "UG-signature", conn.name,
                    "required and provided operation signatures differ"))
    return out
