import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from conftest import edit_site
from webverbs.contracts import verify_trace
from webverbs.execute import (
    ArgumentError, BindingUnavailable, ContractError, ExecutionContext, HttpTransport, PolicyError, TickClock,
    VerbExecutionError, effective_grants, invoke_verb, run, to_text,
)
from webverbs.mockweb import BackgroundServer, MockWeb
from webverbs.suite import SITE_PACK, read_catalog
from webverbs.types import EnumValue, Money
from webverbs.wfl import parse_workflow

ALL_GRANTS = frozenset({"read_only", "side_effecting", "requires_auth", "payment"})


def ctx_for(reg, world, grants=("read_only",), pref="api_first", **kw):
    return ExecutionContext(reg, world, grants=frozenset(grants), binding_preference=pref, **kw)


def _rows(site, catalog):
    return read_catalog(SITE_PACK, site, catalog)


def read_only_calls():
    calls = []
    for r in _rows("libshelf_example", "books"):
        calls.append(("libshelf_example::get_book", {"isbn": r["isbn"]}))
    for g in sorted({r["genre"] for r in _rows("libshelf_example", "books")}):
        calls.append(("libshelf_example::search_books", {"genre": g, "limit": 3}))
    for r in _rows("maps_example", "directions"):
        calls.append(("maps_example::get_direction", {"source": r["from"], "destination": r["to"]}))
    for c in sorted({r["category"] for r in _rows("shopmart_example", "products")}):
        calls.append(("shopmart_example::search_products", {"category": c, "limit": 5}))
    calls.append(("shopmart_example::view_cart", {}))
    for r in _rows("skywatch_example", "forecasts"):
        calls.append(("skywatch_example::get_forecast", {"city": r["city"]}))
    for r in _rows("stayfinder_example", "entities"):
        calls.append(("stayfinder_example::get_entity", {"name": r["name"]}))
        calls.append(("stayfinder_example::ask", {"query": r["location"], "entity_type": r["entity_type"], "limit": 4}))
    for r in _rows("tunebox_example", "tracks"):
        calls.append(("tunebox_example::get_track", {"track_id": r["track_id"]}))
        calls.append(("tunebox_example::search_tracks", {"artist": r["artist"], "limit": 2}))
    return calls


READ_ONLY_CALLS = read_only_calls()


def test_call_table_covers_every_read_only_verb(reg):
    ro = {q for q, s in reg.verbs.items() if s.policy_tags == {"read_only"}}
    assert {q for q, _ in READ_ONLY_CALLS} == ro


# -- dual bindings ---------------------------------------------------------


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(READ_ONLY_CALLS))
def test_dual_binding_equivalence(reg, pack_sites, call):
    qname, args = call
    spec = reg.lookup(qname)
    world = MockWeb(list(pack_sites.values()))
    api = invoke_verb(spec, args, ctx_for(reg, world, pref="api_only"))
    browser = invoke_verb(spec, args, ctx_for(reg, world, pref="browser_only"))
    assert api.result == browser.result
    assert api.primitive_steps == 1
    assert browser.primitive_steps == len(spec.browser.script)
    assert world.browser_steps == browser.primitive_steps


@pytest.mark.parametrize("pref", ["api_only", "browser_only"])
def test_side_effecting_equivalence(reg, world, pref):
    ctx = ctx_for(reg, world, ALL_GRANTS, pref)
    add = invoke_verb(reg.lookup("shopmart_example::add_to_cart"), {"product_id": "lamp-arc", "quantity": 2}, ctx)
    order = invoke_verb(reg.lookup("shopmart_example::place_order"), {}, ctx)
    assert add.result.get("cart_count") == 2
    assert order.result.get("order_id") == "ord-0001"
    assert [e.effect_committed for e in ctx.trace.entries] == [True, True]
    assert world.api("shopmart_example", "GET", "/cart")[1]["item_count"] == 0


@pytest.mark.parametrize("pref", ["api_only", "browser_only"])
def test_missing_entity_is_binding_error(reg, world, pref):
    ctx = ctx_for(reg, world, pref=pref)
    with pytest.raises(VerbExecutionError) as ei:
        invoke_verb(reg.lookup("maps_example::get_direction"), {"source": "Atlantis", "destination": "North Museum"}, ctx)
    [e] = ctx.trace.entries
    assert e.status == "binding_error" and e.binding == pref.split("_")[0]
    assert e.primitive_steps >= 1
    assert not e.effect_committed
    assert ei.value.seq == 1


# -- gate ordering ---------------------------------------------------------


def test_policy_checked_before_preconditions(reg, world):
    ctx = ctx_for(reg, world)
    # quantity 0 also violates a precondition, but policy wins
    with pytest.raises(PolicyError):
        invoke_verb(reg.lookup("shopmart_example::add_to_cart"), {"product_id": "", "quantity": 0}, ctx)
    [e] = ctx.trace.entries
    assert (e.status, e.binding, e.primitive_steps, e.output) == ("policy_denied", "none", 0, None)
    assert "side_effecting" in e.detail
    assert world.browser_steps == 0
    assert world.api("shopmart_example", "GET", "/cart")[1]["item_count"] == 0


def test_precondition_blocks_binding(reg, world):
    ctx = ctx_for(reg, world, pref="browser_first")
    with pytest.raises(ContractError) as ei:
        invoke_verb(reg.lookup("maps_example::get_direction"), {"source": "Glacier Inn", "destination": ""}, ctx)
    assert (ei.value.phase, ei.value.index) == ("pre", 1)
    [e] = ctx.trace.entries
    assert (e.status_text, e.binding, e.primitive_steps) == ("pre_failed:1", "none", 0)
    assert world.browser_steps == 0


def negative_distance(doc, pair=("Hotel Aurora", "North Museum")):
    # the catalog is symmetric, so both directions change together
    for row in doc["catalogs"]["directions"]["rows"]:
        if {row["from"], row["to"]} == set(pair):
            row["distance_meters"] = -5


def test_postcondition_failure(reg, pack_copy):
    edit_site(pack_copy, "maps_example", negative_distance)
    world = MockWeb.from_pack(pack_copy)
    ctx = ctx_for(reg, world)
    with pytest.raises(ContractError) as ei:
        invoke_verb(reg.lookup("maps_example::get_direction"), {"source": "Hotel Aurora", "destination": "North Museum"}, ctx)
    assert (ei.value.phase, ei.value.index) == ("post", 0)
    [e] = ctx.trace.entries
    assert e.status_text == "post_failed:0"
    assert e.output.get("distance_meters") == -5
    assert verify_trace(ctx.trace, reg) == []


@pytest.mark.parametrize("pref,drop,ok", [
    ("api_only", "api", False),
    ("browser_only", "browser", False),
    ("api_first", "api", True),
    ("browser_first", "browser", True),
])
def test_binding_selection(reg, world, pref, drop, ok):
    spec = dataclasses.replace(reg.lookup("skywatch_example::get_forecast"), **{drop: None})
    ctx = ctx_for(reg, world, pref=pref)
    if ok:
        out = invoke_verb(spec, {"city": "Juneau"}, ctx)
        assert out.binding_used != drop
    else:
        with pytest.raises(BindingUnavailable):
            invoke_verb(spec, {"city": "Juneau"}, ctx)
        [e] = ctx.trace.entries
        assert (e.status, e.binding, e.primitive_steps) == ("binding_error", "none", 0)


def test_argument_validation(reg, world):
    spec = reg.lookup("maps_example::get_direction")
    with pytest.raises(ArgumentError):
        invoke_verb(spec, {"source": "a"}, ctx_for(reg, world))
    with pytest.raises(ArgumentError):
        invoke_verb(spec, {"source": "a", "destination": 3}, ctx_for(reg, world))


def test_context_validation(reg, world):
    with pytest.raises(ValueError):
        ExecutionContext(reg, world, grants=frozenset({"admin"}))
    with pytest.raises(ValueError):
        ExecutionContext(reg, world, binding_preference="fastest")


# -- programs --------------------------------------------------------------


def test_pure_program(reg, world):
    value, trace = run(parse_workflow("return 1 + 2;"), ctx_for(reg, world))
    assert value == 3
    assert len(trace.entries) == 0
    assert verify_trace(trace, reg) == []


def test_policy_error_carries_trace_and_position(reg, world):
    src = 'grant read_only;\nlet c = shopmart_example::add_to_cart(product_id = "lamp-arc", quantity = 1);\n'
    with pytest.raises(PolicyError) as ei:
        run(parse_workflow(src), ctx_for(reg, world))
    err = ei.value
    assert (err.pos.line, err.pos.col) == (2, 9)
    assert err.describe().startswith("2:9: policy: shopmart_example::add_to_cart needs")
    assert [e.status for e in err.trace.entries] == ["policy_denied"]
    assert verify_trace(err.trace, reg) == []


def test_effective_grants():
    prog = parse_workflow("grant read_only, side_effecting;\nreturn 1;")
    assert effective_grants(prog) == {"read_only", "side_effecting"}
    assert effective_grants(prog, ["read_only", "payment"]) == {"read_only"}


DIRECTIONS = 'grant read_only;\nreturn maps_example::get_direction(source = "Glacier Inn", destination = "North Museum");'


def test_runs_are_deterministic(reg, pack_sites):
    traces = []
    for _ in range(3):
        world = MockWeb(list(pack_sites.values()))
        _, t = run(parse_workflow(DIRECTIONS), ctx_for(reg, world))
        traces.append(t)
    assert traces[0] == traces[1] == traces[2]
    assert traces[0].head_hash == traces[2].head_hash


def test_tick_clock():
    c = TickClock()
    assert [c(), c(), c()] == [1, 2, 3]


def test_http_transport_matches_in_process(reg, world, pack_sites):
    _, local = run(parse_workflow(DIRECTIONS), ctx_for(reg, MockWeb(list(pack_sites.values()))))
    with BackgroundServer(world, port=0) as srv:
        ctx = ctx_for(reg, world, transport=HttpTransport(srv.base_url))
        value, remote = run(parse_workflow(DIRECTIONS), ctx)
    assert value.get("distance_meters") == 8580
    assert remote == local


def test_to_text():
    assert to_text(True) == "true"
    assert to_text(Money(24900, "USD")) == "249.00 USD"
    assert to_text(EnumValue("s::E", "rain")) == "rain"
    with pytest.raises(ArgumentError):
        to_text((1, 2))
