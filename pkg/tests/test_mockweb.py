import json
import threading
import urllib.request

import pytest
from hypothesis import given, strategies as st

from conftest import GOLDEN, edit_site
from webverbs.mockweb import (
    ActionFailed, BackgroundServer, IllegalAction, LocatorNotFound, ParseError, SiteSchemaError,
    UnknownSite, format_distance, load_site_pack, parse_distance, read_text,
)
from webverbs.suite import SITE_PACK, read_catalog
from webverbs.types import Money, ValueParseError

GI_NM = {"travel_seconds": 1089, "distance_meters": 8580, "distance_display": "8.58 km", "route": ["C St", "Tudor Rd"]}


def directions(world, src, dst):
    return world.api("maps_example", "GET", "/directions", {"from": src, "to": dst})


# -- site pack -------------------------------------------------------------


def test_pack_loads():
    sites = {s.site_id for s in load_site_pack(SITE_PACK)}
    assert sites == {"libshelf_example", "maps_example", "shopmart_example", "skywatch_example",
                     "stayfinder_example", "tunebox_example"}


@pytest.mark.parametrize("mutate,needle", [
    (lambda d: d["routes"][0].update(catalog="roads"), "roads"),
    (lambda d: d["pages"][0]["elements"][0]["children"][3]["action"].update(target="/nowhere"), "/nowhere"),
    (lambda d: d["pages"][0]["elements"][0]["children"][1].update(spl="source-input"), "source-input"),
    (lambda d: d["pages"][1]["elements"][0]["children"][0].update(bind="seconds"), "seconds"),
    (lambda d: d["catalogs"]["directions"]["rows"][0].update(distance_meters="far"), "distance_meters"),
    (lambda d: d.pop("routes"), "unknown route"),
])
def test_site_validation(pack_copy, mutate, needle):
    edit_site(pack_copy, "maps_example", mutate)
    with pytest.raises(SiteSchemaError) as ei:
        load_site_pack(pack_copy)
    assert needle in str(ei.value)
    assert "maps_example.site.json:" in str(ei.value)


def test_symmetric_catalog_rejects_asymmetric_pair(pack_copy):
    def dup_reverse(d):
        rows = d["catalogs"]["directions"]["rows"]
        r = dict(rows[0])
        r["from"], r["to"] = r["to"], r["from"]
        r["distance_meters"] += 1
        rows.append(r)
    edit_site(pack_copy, "maps_example", dup_reverse)
    with pytest.raises(SiteSchemaError):
        load_site_pack(pack_copy)


# -- API routes ------------------------------------------------------------


def test_directions_query(world):
    assert directions(world, "Glacier Inn", "North Museum") == (200, GI_NM)
    # the catalog is symmetric in (from, to)
    assert directions(world, "North Museum", "Glacier Inn") == (200, GI_NM)


@pytest.mark.parametrize("params,status,error", [
    ({"from": "Glacier Inn"}, 400, "bad_params"),
    ({"from": "Nowhere", "to": "North Museum"}, 404, "not_found"),
    ({"from": "Glacier Inn", "to": "North Museum", "mode": "walking"}, 400, "bad_params"),
])
def test_directions_errors(world, params, status, error):
    got, doc = world.api("maps_example", "GET", "/directions", params)
    assert (got, doc["error"]) == (status, error)


def test_unknown_route_and_site(world):
    assert world.api("maps_example", "GET", "/nope")[0] == 404
    assert world.api("nosuch", "GET", "/")[0] == 404
    with pytest.raises(UnknownSite):
        world.browser("nosuch")


def test_int_param_coercion(world):
    status, doc = world.api("stayfinder_example", "GET", "/ask", {"query": "Anchorage", "entity_type": "museum", "limit": "x"})
    assert status == 400 and "limit" in doc["message"]
    status, doc = world.api("stayfinder_example", "GET", "/ask", {"query": "Anchorage", "entity_type": "museum", "limit": "2"})
    assert status == 200 and len(doc["items"]) == 2


def test_every_catalog_row_is_served(world):
    for row in read_catalog(SITE_PACK, "maps_example", "directions"):
        status, doc = directions(world, row["from"], row["to"])
        assert status == 200
        assert doc["distance_meters"] == row["distance_meters"]


def test_cart_and_orders(world):
    status, doc = world.api("shopmart_example", "POST", "/cart", {"product_id": "desk-oak", "quantity": 2})
    assert status == 200 and doc["cart_count"] == 2
    assert doc["cart_total"] == {"amount_minor": 65800, "currency": "USD"}
    # carts are per session
    assert world.api("shopmart_example", "GET", "/cart", {}, "other")[1]["item_count"] == 0
    status, order = world.api("shopmart_example", "POST", "/orders", {})
    assert status == 200 and order["order_id"] == "ord-0001"
    assert world.api("shopmart_example", "GET", "/cart", {})[1]["item_count"] == 0
    assert world.api("shopmart_example", "POST", "/orders", {})[0] == 400


@pytest.mark.parametrize("params", [{"product_id": "nope"}, {"product_id": "desk-oak", "quantity": 0}])
def test_cart_rejects(world, params):
    assert world.api("shopmart_example", "POST", "/cart", params)[0] in (400, 404)
    assert world.api("shopmart_example", "GET", "/cart", {})[1]["item_count"] == 0


def test_cart_concurrent_adds(world):
    def add():
        for _ in range(50):
            assert world.api("shopmart_example", "POST", "/cart", {"product_id": "lamp-arc", "quantity": 1})[0] == 200

    threads = [threading.Thread(target=add) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    doc = world.api("shopmart_example", "GET", "/cart", {})[1]
    assert doc["item_count"] == 400
    assert doc["lines"] == [{**doc["lines"][0], "quantity": 400}]


# -- browser ---------------------------------------------------------------


def test_browser_directions(world):
    b = world.browser("maps_example")
    b.navigate("/directions")
    b.fill("route-form/source-input", "Glacier Inn")
    b.fill("route-form/dest-input", "North Museum")
    b.click("route-form/submit")
    assert b.page == "/directions/result"
    assert b.read("result-panel/distance", "as_distance") == 8580
    assert b.read("result-panel/duration", "as_int") == 1089
    assert b.read_list("result-panel/route", item=("text", "as_string")) == ("C St", "Tudor Rd")
    assert b.steps == 7 and world.browser_steps == 7
    assert b.mutations == 0


def test_locator_errors(world):
    b = world.browser("maps_example")
    with pytest.raises(LocatorNotFound):
        b.fill("route-form/source-input", "x")  # no page yet
    b.navigate("/directions")
    with pytest.raises(LocatorNotFound) as ei:
        b.fill("route-form/src-input", "x")
    assert ei.value.failed_at == "route-form/src-input"
    with pytest.raises(LocatorNotFound):
        b.resolve("route-form//submit")
    with pytest.raises(IllegalAction):
        b.click("route-form/source-input")
    with pytest.raises(IllegalAction):
        b.select("route-form/mode-select", "flying")
    with pytest.raises(LocatorNotFound):
        b.navigate("/missing")
    assert b.steps == 6  # failed actions still count


def test_submit_without_required_field(world):
    b = world.browser("maps_example")
    b.navigate("/directions")
    b.fill("route-form/source-input", "Glacier Inn")
    with pytest.raises(ActionFailed) as ei:
        b.click("route-form/submit")
    assert ei.value.error.status == 400


def test_list_row_out_of_range(world):
    b = world.browser("maps_example")
    b.navigate("/directions")
    b.fill("route-form/source-input", "Glacier Inn")
    b.fill("route-form/dest-input", "North Museum")
    b.click("route-form/submit")
    assert b.resolve("result-panel/route/1/text").text() == "Tudor Rd"
    with pytest.raises(LocatorNotFound):
        b.resolve("result-panel/route/2/text")


def test_locator_snapshot():
    import importlib.util
    spec = importlib.util.spec_from_file_location("make_golden", SITE_PACK.parents[3] / "scripts" / "make_golden.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    assert mod.locator_snapshot() == json.loads((GOLDEN / "locators.json").read_text())


# -- text parsing ----------------------------------------------------------


@pytest.mark.parametrize("text,mode,want", [
    ("42", "as_int", 42),
    (" -7 ", "as_int", -7),
    ("249.00 USD", "as_money", Money(24900, "USD")),
    ("850 m", "as_distance", 850),
    ("8.58 km", "as_distance", 8580),
    ("12 km", "as_distance", 12000),
    ("anything", "as_string", "anything"),
])
def test_read_text(text, mode, want):
    assert read_text(text, mode) == want


@pytest.mark.parametrize("text,mode", [
    ("4.2", "as_int"), ("", "as_int"), ("249 dollars", "as_money"), ("8.5805 km", "as_distance"),
    ("1.5 m", "as_distance"), ("x", "as_what"),
])
def test_read_text_rejects(text, mode):
    with pytest.raises(ParseError):
        read_text(text, mode)


@given(st.integers(-10**9, 10**9))
def test_distance_round_trip(m):
    assert parse_distance(format_distance(m)) == m


def test_distance_formatting():
    assert format_distance(850) == "850 m"
    assert format_distance(8580) == "8.58 km"
    assert format_distance(12000) == "12 km"
    with pytest.raises(ValueParseError):
        parse_distance("km")


# -- HTTP facade -----------------------------------------------------------


def test_http_server(world):
    with BackgroundServer(world, port=0) as srv:
        url = f"{srv.base_url}/maps_example/directions?from=Glacier%20Inn&to=North%20Museum"
        with urllib.request.urlopen(url) as resp:
            assert resp.status == 200
            assert json.loads(resp.read()) == GI_NM
        with pytest.raises(urllib.error.HTTPError) as ei:
            urllib.request.urlopen(f"{srv.base_url}/maps_example/directions?from=Glacier%20Inn")
        assert ei.value.code == 400
        assert json.loads(ei.value.read())["error"] == "bad_params"
