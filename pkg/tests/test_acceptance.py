"""Acceptance gate: one test per acceptance criterion, each printing a single
pass/fail line."""
from __future__ import annotations

import functools
import itertools
import json
import random
import time
from pathlib import Path

from wrightkit import assembly as asm_mod
from wrightkit.ada import (
    check_wellformed,
    generate_ada_text,
    parse_ada,
    _tokenize_ada,
    TaskSpec,
)
from wrightkit.fdr_export import emit_fdr_script
from wrightkit.model import NamedBehavior
from wrightkit.parser import parse_process, parse_wright
from wrightkit.refinement import (
    check_property1,
    check_property2,
    check_property3,
    check_property8,
    fd_model,
    refines_fd,
    verify_configuration,
)
from wrightkit.semantics import (
    Lts,
    TAU,
    TICK,
    determinize,
    lts_of_behavior,
    parallel,
    project,
    traces_up_to,
)

FIXTURES = Path(__file__).parent / "fixtures"


def load_wright(name: str):
    return parse_wright((FIXTURES / f"{name}.wright").read_text())


def load_json(name: str) -> str:
    return (FIXTURES / f"{name}.json").read_text()


def criterion(number: int):
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            try:
                fn()
            except BaseException:
                print(f"criterion {number}: FAIL")
                raise
            print(f"criterion {number}: PASS")
        return run
    return wrap


# ---------------------------------------------------------------------------
# 1. Doubling component: per-port consistency
# ---------------------------------------------------------------------------

@criterion(1)
def test_criterion_01():
    start = time.monotonic()
    ctype = load_wright("double").component_types[0]
    reports = {r.subject.split("/port ")[1]: r.verdict.holds
               for r in check_property1(ctype)}
    assert reports == {"Input": True, "Output": True}

    ftype = load_wright("double_fail").component_types[0]
    freports = {r.subject.split("/port ")[1]: r.verdict.holds
                for r in check_property1(ftype)}
    assert freports["Output"] is False
    assert time.monotonic() - start < 1.0


# ---------------------------------------------------------------------------
# 2. Connector deadlock freedom
# ---------------------------------------------------------------------------

@criterion(2)
def test_criterion_02():
    start = time.monotonic()
    bogus = load_wright("bogus").connector_types[0]
    report = check_property2(bogus)
    assert not report.verdict.holds
    trace = report.verdict.counterexample.trace
    assert len(trace) >= 2
    assert all(e.endswith(".get") for e in trace[-2:])
    assert time.monotonic() - start < 1.0

    for name in ("clientserver", "pipeconn"):
        t0 = time.monotonic()
        conn = load_wright(name).connector_types[0]
        assert check_property2(conn).verdict.holds, name
        for role in conn.roles:
            assert check_property3(conn, role).verdict.holds, (name, role.name)
        assert time.monotonic() - t0 < 1.0


# ---------------------------------------------------------------------------
# 3. Port/role compatibility triple
# ---------------------------------------------------------------------------

@criterion(3)
def test_criterion_03():
    src = parse_process("_write!x -> Source [] _close -> §")
    source = NamedBehavior("Source", src, (("Source", src),))
    out3 = NamedBehavior("Output3", parse_process(
        "_write!1 -> _write!2 -> _write!3 -> _close -> §"))
    bad_expr = parse_process("_write!x -> BadOutput [] §")
    bad = NamedBehavior("BadOutput", bad_expr, (("BadOutput", bad_expr),))

    assert check_property8(out3, source).verdict.holds is True
    assert check_property8(bad, source).verdict.holds is False
    assert check_property8(source, source).verdict.holds is True


# ---------------------------------------------------------------------------
# 4. Three-component pipeline: report/assert correspondence
# ---------------------------------------------------------------------------

ABC_ASSERTS = [
    ("OutputG", "COMPOutput"),
    ("InputG", "COMPInput"),
    ("DFA", "OriginA"),
    ("DFA", "TargetA"),
    ("DFA", "CtypeA"),
    ("C_OriginPLUS", "A_OutputPLUSDET"),
    ("C_TargetPLUS", "B_InputPLUSDET"),
]


@criterion(4)
def test_criterion_04():
    unit = load_wright("abc")
    reports = verify_configuration(unit)
    assert len(reports) == 7
    assert [(r.spec_name, r.impl_name) for r in reports] == ABC_ASSERTS
    assert all(r.verdict.holds for r in reports)

    script = emit_fdr_script(unit)
    asserts = [line for line in script.splitlines()
               if line.startswith("assert ")]
    assert asserts == [f"assert {s} [FD= {i}" for s, i in ABC_ASSERTS]


# ---------------------------------------------------------------------------
# 5. Client/server connector script golden
# ---------------------------------------------------------------------------

@criterion(5)
def test_criterion_05():
    script = emit_fdr_script(load_wright("clientserver"))
    golden = (FIXTURES / "clientserver.fdr2").read_text()
    assert script.split() == golden.split()
    lines = script.splitlines()
    assert "ROLEClient = ((request -> (result -> ROLEClient)) |~| SKIP)" \
        in lines
    assert ("CSconnectorA = CSconnector "
            "[[ x <- abstractEvent | x <- ALPHA_CSconnector ]]") in lines
    assert "assert DFA [FD= CSconnectorA" in lines


# ---------------------------------------------------------------------------
# 6. Ada generation goldens
# ---------------------------------------------------------------------------

ADA_NAME_SETS = {
    "client_serveur": {
        "Component_client1": {"port_Client_reponse"},
        "Component_serveur1": {"port_Serveur_requete"},
        "Connector_appel_cs": {"Appelant_requete", "Appele_reponse"},
    },
    "diner": {
        "Component_p1": set(),
        "Component_p2": set(),
        "Component_f1": {"Manche_prend", "Manche_depose"},
        "Component_f2": {"Manche_prend", "Manche_depose"},
        "Connector_m11": {"Mangeur_prendre", "Mangeur_deposer"},
        "Connector_m12": {"Mangeur_prendre", "Mangeur_deposer"},
        "Connector_m21": {"Mangeur_prendre", "Mangeur_deposer"},
        "Connector_m22": {"Mangeur_prendre", "Mangeur_deposer"},
    },
    "gestionparking": {
        "Component_acces1": {"r1_voitureArrive", "r1_reponsePositive",
                             "r1_reponseNegative"},
        "Component_acces2": {"r1_voitureArrive", "r1_reponsePositive",
                             "r1_reponseNegative"},
        "Component_afficheur1": {"ecran_maj"},
        "Connector_parking1": {"acces1_reservation", "acces1_liberation",
                               "acces2_reservation", "acces2_liberation"},
    },
}


@criterion(6)
def test_criterion_06():
    for name, expected_names in ADA_NAME_SETS.items():
        text = generate_ada_text(load_wright(name))
        golden = (FIXTURES / f"{name}.adb").read_text()
        assert _tokenize_ada(text) == _tokenize_ada(golden), name

        unit = parse_ada(text)
        assert check_wellformed(unit) == [], name
        specs = {d.name: set(d.entries) for d in unit.declarations
                 if isinstance(d, TaskSpec)}
        assert specs == expected_names, name


# ---------------------------------------------------------------------------
# 7. Assembly contract suites
# ---------------------------------------------------------------------------

@criterion(7)
def test_criterion_07():
    gab1 = asm_mod.parse_assembly(load_json("gab1"))
    assert asm_mod.check_uml(gab1) == []

    gab2_diags = asm_mod.check_uml(asm_mod.parse_assembly(load_json("gab2")))
    assert len(gab2_diags) == 1
    assert gab2_diags[0].rule_id == "UML-service_offert_requis"
    assert "transferer" in gab2_diags[0].message

    hotel = asm_mod.parse_assembly(load_json("hotel"))
    assert asm_mod.check_uml(hotel) == []

    video = asm_mod.parse_assembly(load_json("videocamera"))
    assert asm_mod.check_qos(video) == []
    doc = json.loads(load_json("videocamera"))
    constraint = doc["components"][2]["profile"]["required"][0]["numeric"][1]
    assert constraint["characteristic"]["name"] == "TauxDeTransfert"
    constraint["value"] = 35
    mutant_diags = asm_mod.check_qos(asm_mod.parse_assembly(json.dumps(doc)))
    assert [d.rule_id for d in mutant_diags] == ["QOS-CQualite"]

    health_text = load_json("healthcare")
    health = asm_mod.parse_assembly(health_text)
    assert asm_mod.check_ugatze(health) == []

    def ugatze_mutant(edit):
        doc = json.loads(health_text)
        edit(doc)
        return asm_mod.check_ugatze(asm_mod.parse_assembly(json.dumps(doc)))

    def sink_on_oip(doc):
        port = doc["components"][2]["ports"][0]
        assert port["name"] == "diagnosis"
        port["kind"] = "OIP"

    def one_component(doc):
        doc["components"] = doc["components"][:1]
        doc["connectors"] = []
        doc["attachments"] = []

    def protocol_mismatch(doc):
        port = doc["components"][1]["ports"][1]
        assert port["name"] == "patient_test_data"
        port["protocol"] = "byte"

    def signature_mismatch(doc):
        port = doc["components"][2]["ports"][1]
        assert port["name"] == "prescription"
        port["operations"][0]["result"] = "integer_ugatze"

    for edit, rule in ((sink_on_oip, "UG-precondition1"),
                       (one_component, "UG-numberComponent"),
                       (protocol_mismatch, "UG-protocol"),
                       (signature_mismatch, "UG-signature")):
        diags = ugatze_mutant(edit)
        assert [d.rule_id for d in diags] == [rule], edit.__name__


# ---------------------------------------------------------------------------
# 8. Property-based engine validation
# ---------------------------------------------------------------------------

ORACLE_SIGMA = ("a", "b", "c")


def random_lts(rng: random.Random) -> Lts:
    num_states = rng.randint(1, 5)
    sink = num_states  # extra terminal state for successful termination
    transitions = []
    for _ in range(rng.randint(0, 8)):
        src = rng.randrange(num_states)
        label = rng.choice(ORACLE_SIGMA + (TAU, TICK))
        dst = sink if label == TICK else rng.randrange(num_states)
        transitions.append((src, label, dst))
    return Lts(num_states + 1, 0, tuple(sorted(set(transitions))),
               frozenset(ORACLE_SIGMA))


def oracle_sets(p: Lts, depth: int):
    """Failures and divergences up to trace length ``depth``, by exhaustive
    exploration of the raw transition graph."""
    succ = p.successors()
    full = frozenset(ORACLE_SIGMA) | {TICK}

    # states that can reach an internal-action cycle by internal actions only
    tau_succ = [[d for lab, d in row if lab == TAU] for row in succ]
    divergent_states = set()
    for s in range(p.num_states):
        seen, stack = set(), list(tau_succ[s])
        while stack:
            t = stack.pop()
            if t == s:
                divergent_states.add(s)
                break
            if t in seen:
                continue
            seen.add(t)
            stack.extend(tau_succ[t])
    # close under internal reachability of a divergent state
    changed = True
    while changed:
        changed = False
        for s in range(p.num_states):
            if s not in divergent_states \
                    and any(t in divergent_states for t in tau_succ[s]):
                divergent_states.add(s)
                changed = True

    failures: set[tuple[tuple[str, ...], frozenset[str]]] = set()
    divergences: set[tuple[str, ...]] = set()
    seen: set[tuple[int, tuple[str, ...]]] = set()
    stack = [(p.initial, ())]
    while stack:
        state, trace = stack.pop()
        if (state, trace) in seen:
            continue
        seen.add((state, trace))
        if state in divergent_states:
            divergences.add(trace)
            continue
        enabled = {lab for lab, _ in succ[state]}
        if TAU not in enabled:  # stable
            refusable = full - enabled
            for k in range(len(refusable) + 1):
                for sub in itertools.combinations(sorted(refusable), k):
                    failures.add((trace, frozenset(sub)))
        for lab, dst in succ[state]:
            if lab == TAU:
                stack.append((dst, trace))
            elif len(trace) < depth:
                stack.append((dst, trace + (lab,)))

    # divergence closure: after divergence everything is possible and refusable
    frontier = list(divergences)
    while frontier:
        trace = frontier.pop()
        for k in range(len(full) + 1):
            for sub in itertools.combinations(sorted(full), k):
                failures.add((trace, frozenset(sub)))
        if len(trace) < depth:
            for lab in sorted(full):
                ext = trace + (lab,)
                if ext not in divergences:
                    divergences.add(ext)
                    frontier.append(ext)
    return failures, divergences


def oracle_refines(spec: Lts, impl: Lts, depth: int) -> bool:
    sf, sd = oracle_sets(spec, depth)
    impl_f, impl_d = oracle_sets(impl, depth)
    return impl_f <= sf and impl_d <= sd


def random_process_text(rng: random.Random, depth: int) -> str:
    if depth == 0:
        return rng.choice(["§", "a -> §", "b -> §", "c -> §"])
    roll = rng.random()
    if roll < 0.45:
        return f"{rng.choice(ORACLE_SIGMA)} -> {random_process_text(rng, depth - 1)}"
    op = rng.choice(["[]", "|~|"])
    return (f"({random_process_text(rng, depth - 1)} {op} "
            f"{random_process_text(rng, depth - 1)})")


def straight_line_lts(events: str) -> Lts:
    transitions = tuple((i, e, i + 1) for i, e in enumerate(events))
    return Lts(len(events) + 1, 0, transitions, frozenset(events))


@criterion(8)
def test_criterion_08():
    rng = random.Random(20260823)

    # refinement engine vs exhaustive failures/divergences oracle
    disagreements = 0
    for _ in range(500):
        spec, impl = random_lts(rng), random_lts(rng)
        verdict = refines_fd(fd_model(spec), fd_model(impl), max_depth=6)
        expected = oracle_refines(spec, impl, 6)
        if verdict.holds and not expected:
            disagreements += 1
        elif not verdict.holds and expected:
            # the engine may have found a deeper counterexample
            ce_depth = len(verdict.counterexample.trace)
            if ce_depth <= 6 or not oracle_refines(spec, impl, ce_depth):
                disagreements += 1
    assert disagreements == 0

    # determinization preserves trace sets
    for _ in range(500):
        expr = parse_process(random_process_text(rng, rng.randint(1, 4)))
        lts = lts_of_behavior("P", expr, ())
        assert traces_up_to(lts, 6) == traces_up_to(determinize(lts), 6)

    # projection law on a straight-line trace
    lts = straight_line_lts("acadbcabc")
    projected = project(lts, {"a", "b"})
    assert max(traces_up_to(projected, 9), key=len) == tuple("aabab")

    # projection composes through alphabet intersection
    for _ in range(100):
        events = "".join(rng.choice(ORACLE_SIGMA + ("d",))
                         for _ in range(rng.randint(0, 8)))
        first = frozenset(rng.sample(("a", "b", "c", "d"), rng.randint(0, 4)))
        second = frozenset(rng.sample(("a", "b", "c", "d"), rng.randint(0, 4)))
        lts = straight_line_lts(events)
        twice = project(project(lts, first), second)
        once = project(lts, first & second)
        assert traces_up_to(twice, 9) == traces_up_to(once, 9)

    # parallel composition is symmetric (identical normal forms)
    for _ in range(100):
        p, q = random_lts(rng), random_lts(rng)
        assert fd_model(parallel(p, q)) == fd_model(parallel(q, p))
