"""Assembly parsing and contract suites."""
import json
import random
from pathlib import Path

import pytest

from wrightkit.assembly import (
    FormatError,
    WrongDialect,
    check_qos,
    check_ugatze,
    check_uml,
    parse_assembly,
)

FIXTURES = Path(__file__).parent / "fixtures"


def load(name: str) -> str:
    return (FIXTURES / f"{name}.json").read_text()


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["gab1", "gab2", "hotel", "videocamera",
                                  "healthcare"])
def test_fixtures_parse(name):
    assembly = parse_assembly(load(name))
    assert assembly.components and assembly.connectors


@pytest.mark.parametrize("text,fragment", [
    ("not json", "invalid JSON"),
    ("[]", "document must be an object"),
    ('{"dialect": "Darwin"}', "dialect"),
    ('{"dialect": "UML", "components": [{"name": "C", '
     '"ports": [{"name": "P", "kind": "Plug"}]}]}', "port kind"),
    ('{"dialect": "UML", "components": [{"name": "C", "ports": []}], '
     '"connectors": [], '
     '"attachments": [{"component": "C", "port": "P", '
     '"connector": "N", "role": "R"}]}', "unknown port"),
])
def test_format_errors(text, fragment):
    with pytest.raises(FormatError) as err:
        parse_assembly(text)
    assert fragment in str(err.value)


def test_wrong_dialect_is_rejected():
    uml = parse_assembly(load("gab1"))
    ugatze = parse_assembly(load("healthcare"))
    with pytest.raises(WrongDialect):
        check_ugatze(uml)
    with pytest.raises(WrongDialect):
        check_uml(ugatze)


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------

def test_qos_verdict_is_permutation_invariant():
    doc = json.loads(load("videocamera"))
    doc["components"][2]["profile"]["required"][0]["numeric"][1]["value"] = 35
    rng = random.Random(7)
    baseline = None
    for _ in range(10):
        rng.shuffle(doc["components"])
        rng.shuffle(doc["connectors"])
        rng.shuffle(doc["attachments"])
        found = sorted((d.rule_id, d.location)
                       for d in check_qos(parse_assembly(json.dumps(doc))))
        if baseline is None:
            baseline = found
        assert found == baseline
    assert baseline == [("QOS-CQualite", "VideoPlayer:PerformanceAcceptable")]


def test_adding_a_violation_preserves_existing_findings():
    doc = json.loads(load("gab2"))
    base = {(d.rule_id, d.location)
            for d in check_uml(parse_assembly(json.dumps(doc)))}
    # add an interface-less component as a second, independent violation
    doc["components"].append({"name": "Empty", "kind": "ComposantUML",
                              "ports": []})
    worse = {(d.rule_id, d.location)
             for d in check_uml(parse_assembly(json.dumps(doc)))}
    assert base < worse
    assert ("UML-aumoinsInterface", "Empty") in worse


def test_signatures_are_param_order_sensitive():
    doc = json.loads(load("hotel"))
    # swap the two parameters of getRoomInfo on the provided side only
    port = doc["components"][3]["ports"][0]
    op = next(o for o in port["operations"] if o["name"] == "getRoomInfo")
    op["params"][0]["type"] = "Time"
    diags = check_uml(parse_assembly(json.dumps(doc)))
    assert any(d.rule_id in ("UML-Rc2", "UML-service_offert_requis")
               for d in diags)


def test_qos_connectivity_is_not_transitive():
    doc = json.loads(load("videocamera"))
    # VideoPlayer needs TauxDeTransfert >= 25; Camera-level qualities must not
    # satisfy it because Camera and VideoPlayer share no connector.
    doc["components"][0]["profile"]["provided"].append(
        {"name": "PerformanceExcellente",
         "numeric": [
             {"characteristic": {"name": "TempsDeReponse",
                                 "direction": "decreasing",
                                 "domain": "numeric-real", "unit": "msec"},
              "op": "<=", "value": 1},
             {"characteristic": {"name": "TauxDeTransfert",
                                 "direction": "increasing",
                                 "domain": "numeric-real",
                                 "unit": "image/sec"},
              "op": ">=", "value": 100}]})
    doc["components"][1]["profile"]["provided"] = []
    diags = check_qos(parse_assembly(json.dumps(doc)))
    assert [d.rule_id for d in diags] == ["QOS-CQualite"]
    assert diags[0].location == "VideoPlayer:PerformanceAcceptable"


def test_mismatched_units_are_reported_distinctly():
    doc = json.loads(load("videocamera"))
    provided = doc["components"][1]["profile"]["provided"][0]["numeric"]
    provided[1]["characteristic"]["unit"] = "frame/sec"
    diags = check_qos(parse_assembly(json.dumps(doc)))
    assert [d.rule_id for d in diags] == ["QOS-unit"]


def test_ugatze_negative_buffer_and_dangling_role():
    doc = json.loads(load("healthcare"))
    doc["connectors"][0]["bufferSize"] = -1
    doc["attachments"] = [a for a in doc["attachments"]
                          if not (a["connector"] == "pipe"
                                  and a["role"] == "source")]
    rules = {d.rule_id
             for d in check_ugatze(parse_assembly(json.dumps(doc)))}
    assert rules == {"UG-bufferpositive", "UG-noDanglingRoles"}
