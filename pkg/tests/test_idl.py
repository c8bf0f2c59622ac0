import copy
import json

import pytest
from hypothesis import given, strategies as st

from webverbs.idl import (
    ContractTypeError, DuplicateVerb, ManifestError, ManifestSchemaError, ManifestSyntaxError, MissingBinding,
    PolicyTagConflict, UnknownType, load_manifest, load_manifest_file, parse_manifest, serialize_manifest,
    validate_spec,
)
from webverbs.suite import MANIFESTS
from webverbs.types import STRING, ListType, RecordType

MAPS_TEXT = (MANIFESTS / "maps_example.verbs.json").read_text()
ALL_MANIFESTS = sorted(MANIFESTS.glob("*.verbs.json"))


def maps_doc():
    return json.loads(MAPS_TEXT)


def load_doc(doc):
    return load_manifest(json.dumps(doc, indent=2), "m.verbs.json")


def codes(exc_info):
    return [d.code for d in exc_info.value.diagnostics]


def test_get_direction_manifest():
    [spec] = parse_manifest(MAPS_TEXT)
    assert spec.qname == "maps_example::get_direction"
    assert [n for n, _ in spec.params] == ["source", "destination"]
    assert spec.params[0][1] == STRING
    assert isinstance(spec.result, RecordType)
    assert spec.result.field_names == ["travel_seconds", "distance_meters", "distance_display", "route"]
    assert spec.result.field_type("route") == ListType(STRING)
    assert set(spec.bindings) == {"api", "browser"}
    assert spec.browser.script[0].op == "navigate"
    assert len(spec.browser.script) >= 6


@pytest.mark.parametrize("path", ALL_MANIFESTS, ids=lambda p: p.name)
def test_bundled_manifests_validate(path):
    m = load_manifest_file(path)
    assert m.verbs
    for spec in m.verbs:
        assert validate_spec(spec) == []


def test_empty_manifest():
    assert parse_manifest("") == []
    assert parse_manifest("  \n") == []


def test_deterministic_double_parse():
    assert parse_manifest(MAPS_TEXT) == parse_manifest(MAPS_TEXT)


@pytest.mark.parametrize("path", ALL_MANIFESTS, ids=lambda p: p.name)
def test_serialize_fixed_point(path):
    m1 = load_manifest_file(path)
    text = serialize_manifest(m1)
    m2 = load_manifest(text)
    assert m2.verbs == m1.verbs
    assert serialize_manifest(m2) == text


# -- rejections ------------------------------------------------------------


def test_policy_conflict():
    doc = maps_doc()
    doc["verbs"][0]["policy"] = ["read_only", "side_effecting"]
    with pytest.raises(PolicyTagConflict):
        load_doc(doc)
    doc["verbs"][0]["policy"] = ["payment"]
    with pytest.raises(PolicyTagConflict):
        load_doc(doc)


def test_syntax_error_has_position():
    text = MAPS_TEXT.replace('"result": "DirectionResult",', '"result": "DirectionResult"', 1)
    with pytest.raises(ManifestSyntaxError) as ei:
        load_manifest(text, "m.verbs.json")
    d = ei.value.diagnostics[0]
    assert d.pos.line > 1 and d.pos.col >= 1
    assert d.format().startswith(f"m.verbs.json:{d.pos.line}:{d.pos.col}: error:")


def test_duplicate_verb():
    doc = maps_doc()
    doc["verbs"].append(copy.deepcopy(doc["verbs"][0]))
    with pytest.raises(DuplicateVerb):
        load_doc(doc)


def test_unknown_type():
    doc = maps_doc()
    doc["verbs"][0]["result"] = "Directions"
    with pytest.raises(UnknownType):
        load_doc(doc)


def test_contract_not_boolean():
    doc = maps_doc()
    doc["verbs"][0]["postconditions"] = ["result.distance_meters + 1"]
    with pytest.raises(ContractTypeError) as ei:
        load_doc(doc)
    assert "expected bool" in str(ei.value)


def test_missing_binding():
    doc = maps_doc()
    doc["verbs"][0]["bindings"] = {}
    with pytest.raises(MissingBinding):
        load_doc(doc)


def test_bad_param_reference_named():
    doc = maps_doc()
    doc["verbs"][0]["postconditions"] = ["params.sourcex != \"\""]
    with pytest.raises(ManifestError) as ei:
        load_doc(doc)
    diags = ei.value.diagnostics
    assert len(diags) == 1
    assert "sourcex" in diags[0].message
    # the diagnostic points into the postconditions array, not at the verb
    assert diags[0].pos.line > 40


def test_output_map_coverage():
    doc = maps_doc()
    del doc["verbs"][0]["bindings"]["browser"]["output_map"]["route"]
    with pytest.raises(ManifestSchemaError) as ei:
        load_doc(doc)
    assert codes(ei) == ["coverage"]
    assert "route" in ei.value.diagnostics[0].message


def test_result_must_be_record():
    doc = maps_doc()
    doc["verbs"][0]["result"] = "int"
    with pytest.raises(ManifestError) as ei:
        load_doc(doc)
    assert "bad_result" in codes(ei)


@pytest.mark.parametrize("mutate,code", [
    (lambda v: v.update(name="Get-Direction"), "bad_name"),
    (lambda v: v.update(doc="  "), "missing_doc"),
    (lambda v: v["params"].append({"name": "source", "type": "string"}), "duplicate_param"),
    (lambda v: v["bindings"]["api"].update(path="/directions/{nope}"), "bad_placeholder"),
    (lambda v: v["bindings"]["browser"]["script"].pop(0), "bad_binding"),
    (lambda v: v["bindings"]["browser"]["script"][1].update(locator="route-form//x"), "bad_locator"),
    (lambda v: v["bindings"]["browser"]["script"][7].update(capture="duration"), "duplicate_capture"),
    (lambda v: v["bindings"]["api"]["query"].update(extra={"param": "missing"}), None),
])
def test_invariant_violations(mutate, code):
    doc = maps_doc()
    mutate(doc["verbs"][0])
    with pytest.raises(ManifestError) as ei:
        load_doc(doc)
    if code is not None:
        assert code in codes(ei)
    for d in ei.value.diagnostics:
        assert d.pos.line >= 1 and d.pos.col >= 1


def test_schema_errors_collected():
    doc = maps_doc()
    doc["verbs"][0]["params"] = "source"
    doc["site"]["category"] = "weather"
    with pytest.raises(ManifestSchemaError) as ei:
        load_doc(doc)
    assert len(ei.value.diagnostics) >= 2


# -- generated manifests ---------------------------------------------------

ident = st.from_regex(r"[a-z][a-z0-9_]{0,6}", fullmatch=True)
prim = st.sampled_from(["int", "string", "money", "bool", "list<string>", "optional<int>"])


@st.composite
def manifests(draw):
    site = draw(ident)
    fields = draw(st.lists(st.tuples(ident, prim), min_size=1, max_size=4, unique_by=lambda f: f[0]))
    params = draw(st.lists(st.tuples(ident, st.sampled_from(["int", "string"])), max_size=3, unique_by=lambda p: p[0]))
    verbs = []
    for vname in draw(st.lists(ident, min_size=1, max_size=3, unique=True)):
        pre = [f"params.{p} >= 0" for p, t in params if t == "int"]
        verbs.append({
            "name": vname,
            "doc": draw(st.text(min_size=1, max_size=30).filter(str.strip)),
            "params": [{"name": p, "type": t} for p, t in params],
            "result": "Out",
            "preconditions": pre,
            "postconditions": [],
            "policy": draw(st.sampled_from([["read_only"], ["side_effecting", "payment"]])),
            "bindings": {"api": {
                "method": "GET", "path": "/" + vname,
                "query": {p: {"param": p} for p, _ in params},
                "response_map": {f: f"data.{f}" for f, _ in fields},
            }},
        })
    return {
        "site": {"id": site, "name": site.title(), "category": draw(st.sampled_from(["travel", "media", "other"]))},
        "types": [{"name": "Out", "kind": "record", "fields": [{"name": f, "type": t} for f, t in fields]}],
        "verbs": verbs,
    }


@given(manifests())
def test_generated_manifest_fixed_point(doc):
    m1 = load_doc(doc)
    text = serialize_manifest(m1)
    m2 = load_manifest(text)
    assert m2.verbs == m1.verbs
    assert serialize_manifest(m2) == text
    assert all(validate_spec(s) == [] for s in m2.verbs)
