import json
from dataclasses import replace

import pytest
from hypothesis import assume, given, settings, strategies as st

from conftest import GOLDEN
from webverbs.contracts import (
    GENESIS, TraceFormatError, append_entry, check_policy, dumps_trace, eval_predicate,
    eval_predicate_detail, loads_trace, new_trace, typed_from_json, typed_to_json, verify_text, verify_trace,
)
from webverbs.execute import ExecutionContext, PolicyError, run
from webverbs.mockweb import MockWeb
from webverbs.registry import UnknownVerb
from webverbs.suite import SUITE_DIR
from webverbs.types import UNIT_VALUE, EnumValue, Money, Record
from webverbs.wfl import parse_expr, parse_workflow

TAGS = ["read_only", "side_effecting", "requires_auth", "payment"]
GOLDEN_TRACES = sorted(GOLDEN.glob("*.trace.json"))
CHECKOUT = (SUITE_DIR / "workflows" / "checkout.wfl").read_text()
CHECKOUT_NEEDS = {"side_effecting", "payment", "requires_auth"}


def params(**kw):
    return Record("s::v::params", tuple(kw.items()))


# -- predicates ------------------------------------------------------------


@pytest.mark.parametrize("src,holds", [
    ('params.source != ""', True),
    ("params.n >= 1 && params.n <= 10", True),
    ("params.n > 5", False),
    ("len(params.xs) == params.n", False),
])
def test_predicates(src, holds):
    p = params(source="a", n=3, xs=(1, 2))
    assert eval_predicate(parse_expr(src), p) is holds


def test_predicate_runtime_error_is_failure():
    out = eval_predicate_detail(parse_expr("10 / params.n > 1"), params(n=0))
    assert not out.holds and out.reason.startswith("div_zero")


def test_predicate_sees_result():
    result = Record("s::R", (("count", 2), ("items", (1, 2))))
    assert eval_predicate(parse_expr("result.count == len(result.items)"), params(), result)


# -- policy ----------------------------------------------------------------

tag_sets = st.frozensets(st.sampled_from(TAGS))


@given(tag_sets, tag_sets, tag_sets)
def test_policy_monotone(tags, grants, extra):
    if check_policy(tags, grants):
        assert check_policy(tags, grants | extra)
    assert check_policy(tags, grants) == (tags <= grants)


@settings(max_examples=40, deadline=None)
@given(tag_sets)
def test_policy_monotone_at_run_level(reg, pack_sites, grants):
    ctx = ExecutionContext(reg, MockWeb(list(pack_sites.values())), grants=grants)
    try:
        value, trace = run(parse_workflow(CHECKOUT), ctx)
    except PolicyError as exc:
        assert not CHECKOUT_NEEDS <= grants
        assert exc.trace.entries[-1].status == "policy_denied"
        assert verify_trace(exc.trace, reg) == []
        return
    assert CHECKOUT_NEEDS <= grants
    assert value.get("order_id") == "ord-0001"


# -- hash chain ------------------------------------------------------------


def _entry(trace, verb="maps_example::get_direction", **kw):
    fields = dict(verb=verb, binding="api", inputs=(("source", "a"), ("destination", "b")),
                  output=None, status="binding_error", primitive_steps=1, started=1, ended=2)
    fields.update(kw)
    return append_entry(trace, **fields)


def test_chain_links():
    t = _entry(_entry(new_trace("return 1;", ["read_only"])))
    a, b = t.entries
    assert a.prev_hash == GENESIS and b.prev_hash == a.entry_hash
    assert (a.seq, b.seq) == (1, 2)
    assert a.entry_hash == a.compute_hash()
    assert t.head_hash != new_trace("return 2;", ["read_only"]).head_hash


def test_empty_trace_verifies(reg):
    t = new_trace("", ["read_only"])
    assert verify_text(dumps_trace(t), reg) == []


def test_run_continued_after_failure(reg):
    t = _entry(_entry(new_trace("", ["read_only"])), started=3, ended=4)
    kinds = [v.kind for v in verify_trace(t, reg)]
    assert kinds == ["status"]


def test_unknown_verb_raises(reg):
    t = _entry(new_trace("", ["read_only"]), verb="maps_example::teleport", inputs=())
    with pytest.raises(UnknownVerb):
        verify_trace(t, reg)


# -- typed JSON ------------------------------------------------------------

values = st.recursive(
    st.one_of(
        st.none(), st.booleans(), st.integers(-(2**63), 2**63 - 1), st.text(max_size=8),
        st.floats(allow_nan=False), st.builds(Money, st.integers(-10**9, 10**9), st.sampled_from(["USD", "EUR"])),
        st.builds(EnumValue, st.just("s::E"), st.sampled_from(["a", "b"])), st.just(UNIT_VALUE),
    ),
    lambda inner: st.one_of(
        st.lists(inner, max_size=3).map(tuple),
        st.dictionaries(st.from_regex(r"[a-z]{1,4}", fullmatch=True), inner, max_size=3)
        .map(lambda d: Record("s::R", tuple(d.items()))),
    ),
    max_leaves=8,
)


@given(values)
def test_typed_json_round_trip(v):
    doc = json.loads(json.dumps(typed_to_json(v)))
    assert typed_from_json(doc) == v


def test_typed_json_rejects():
    for bad in [{"$money": "12 usd"}, {"$what": 1}, {"$record": "s::R"}, 1.5]:
        with pytest.raises((ValueError, TypeError)):
            typed_from_json(bad)


@pytest.mark.parametrize("text", [
    "", "[]", '{"format": "webverbs-trace/2"}',
    json.dumps({"format": "webverbs-trace/1", "program_digest": "x", "grants": [], "entries": [], "head_hash": "00"}),
    json.dumps({"format": "webverbs-trace/1", "program_digest": "x", "grants": [], "entries": [{}], "head_hash": "0" * 64}),
])
def test_loads_trace_rejects(text):
    with pytest.raises(TraceFormatError):
        loads_trace(text)


# -- golden traces ---------------------------------------------------------


def test_golden_set_complete():
    assert len(GOLDEN_TRACES) == 54


@pytest.mark.parametrize("path", GOLDEN_TRACES, ids=lambda p: p.name)
def test_golden_trace_verifies(reg, path):
    text = path.read_text()
    assert verify_text(text, reg) == []
    assert dumps_trace(loads_trace(text).trace) == text


def test_golden_regeneration_is_byte_identical(reg):
    from webverbs.suite import load_suite, run_task
    for task in load_suite():
        for mode in ("api_only", "browser_only"):
            r = run_task(task, reg, mode)
            assert dumps_trace(r.trace) == (GOLDEN / f"{task.id}.{mode}.trace.json").read_text(), (task.id, mode)


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(GOLDEN_TRACES), st.data())
def test_byte_flip_detected(reg, path, data):
    raw = bytearray(path.read_bytes())
    i = data.draw(st.integers(0, len(raw) - 1))
    new = data.draw(st.integers(0x20, 0x7e))
    assume(raw[i] < 0x80 and raw[i] != new)
    raw[i] = new
    try:
        found = verify_text(raw.decode("utf-8"), reg)
    except UnknownVerb:
        return  # the verb name itself was altered and its hash could not be checked first
    assert found, f"flip at byte {i} went unnoticed"


ENTRY_FIELDS = {
    "verb": "maps_example::get_directio", "binding": "browser", "status": "post_failed", "detail": "x",
    "effect_committed": True, "primitive_steps": 2, "started": 0, "ended": 999, "seq": 7,
}


@pytest.mark.parametrize("field", sorted(ENTRY_FIELDS))
def test_field_edit_breaks_chain(reg, field):
    path = GOLDEN / "hotel_ranking.api_only.trace.json"
    doc = json.loads(path.read_text())
    doc["entries"][3][field] = ENTRY_FIELDS[field]
    found = verify_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", reg)
    assert any(v.kind in ("hash_chain", "seq") and v.seq == (7 if field == "seq" else 4) for v in found)


def test_output_edit_breaks_chain_even_with_rehash(reg):
    # re-hashing the edited entry moves the break to the next link
    loaded = loads_trace((GOLDEN / "hotel_ranking.api_only.trace.json").read_text())
    entries = list(loaded.trace.entries)
    out = entries[2].output
    forged = replace(entries[2], output=Record(out.type_qname, tuple(
        (n, 1 if n == "distance_meters" else v) for n, v in out.fields)))
    entries[2] = replace(forged, entry_hash=forged.compute_hash())
    t = replace(loaded.trace, entries=tuple(entries))
    found = verify_trace(t, reg, stored_head=loaded.head_hash)
    assert [(v.seq, v.kind) for v in found] == [(4, "hash_chain")]


def test_grants_edit_breaks_head(reg):
    path = GOLDEN / "checkout.api_only.trace.json"
    doc = json.loads(path.read_text())
    doc["grants"] = ["read_only"]
    found = verify_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", reg)
    kinds = {v.kind for v in found}
    assert "hash_chain" in kinds and "policy" in kinds
