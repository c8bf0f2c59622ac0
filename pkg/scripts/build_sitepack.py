"""Write the bundled site pack (``*.site.json``) and verb manifests (``*.verbs.json``).

The output is committed; rerun after editing the tables below:

    python3 scripts/build_sitepack.py
"""

from __future__ import annotations

import json
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "webverbs" / "data"

# -- maps / stayfinder -------------------------------------------------------

# (x, y) positions in meters on a city grid
HOTELS = {
    "Hotel Aurora": (1200, 3400),
    "Glacier Inn": (4100, 900),
    "Harbor Lodge": (300, 700),
    "Midnight Sun Suites": (2600, 2500),
    "Spruce Hotel": (5200, 4300),
}
MUSEUMS = {
    "North Museum": (1800, 5200),
    "Anchorage Art Hall": (2200, 2100),
    "Aviation Heritage Museum": (6100, 1500),
    "Native Heritage Center": (7400, 4800),
    "Science Dome": (900, 1900),
    "Railroad Museum": (2900, 400),
}
STREETS = ["4th Ave", "C St", "Northern Lights Blvd", "Tudor Rd", "Glenn Hwy", "Minnesota Dr", "Benson Blvd"]


def distance_m(a, b) -> int:
    # grid distance with a detour factor, rounded to 10 m
    raw = 1.3 * (abs(a[0] - b[0]) + abs(a[1] - b[1]))
    return int(round(raw / 10.0)) * 10


def fmt_distance(m: int) -> str:
    if m < 1000:
        return f"{m} m"
    whole, frac = divmod(m, 1000)
    return f"{whole} km" if frac == 0 else f"{whole}.{frac:03d}".rstrip("0") + " km"


def directions_rows():
    rows = []
    hotels = list(HOTELS)
    museums = list(MUSEUMS)
    for i, h in enumerate(hotels):
        for j, m in enumerate(museums):
            d = distance_m(HOTELS[h], MUSEUMS[m])
            route = [STREETS[(i + j) % len(STREETS)], STREETS[(2 * i + 3 * j + 1) % len(STREETS)]]
            if route[0] == route[1]:
                route = route[:1]
            cells = {
                "travel_seconds": d * 3 // 25 + 60,
                "distance_meters": d,
                "distance_display": fmt_distance(d),
                "route": route,
            }
            rows.append({"from": h, "to": m, **cells})
            rows.append({"from": m, "to": h, **cells})
    return rows


ENTITIES = [
    # name, type, location, rating_x10, address
    ("Hotel Aurora", "hotel", "Anchorage", 44, "120 W 4th Ave"),
    ("Glacier Inn", "hotel", "Anchorage", 41, "800 E Tudor Rd"),
    ("Harbor Lodge", "hotel", "Anchorage", 38, "15 Ship Creek Ave"),
    ("Midnight Sun Suites", "hotel", "Anchorage", 46, "500 C St"),
    ("Spruce Hotel", "hotel", "Anchorage", 40, "2200 Glenn Hwy"),
    ("Chena River Hotel", "hotel", "Fairbanks", 43, "9 Airport Way"),
    ("North Museum", "museum", "Anchorage", 47, "625 C St"),
    ("Anchorage Art Hall", "museum", "Anchorage", 42, "121 W 7th Ave"),
    ("Aviation Heritage Museum", "museum", "Anchorage", 45, "4721 Aircraft Dr"),
    ("Native Heritage Center", "museum", "Anchorage", 49, "8800 Heritage Center Dr"),
    ("Science Dome", "museum", "Anchorage", 39, "4000 Lake Otis Pkwy"),
    ("Railroad Museum", "museum", "Anchorage", 36, "411 W 1st Ave"),
]

# -- shopmart ----------------------------------------------------------------

# category -> [(product_id suffix, name, price, rating_x10)]
PRODUCTS = {
    "desk": [("oak", "Oak Desk", "329.00", 48), ("pine", "Pine Desk", "189.00", 42), ("metal", "Metal Desk", "129.00", 36)],
    "chair": [("ergo", "Ergo Chair", "279.00", 47), ("mesh", "Mesh Chair", "149.00", 43), ("folding", "Folding Chair", "39.00", 30)],
    "lamp": [("arc", "Arc Lamp", "119.00", 46), ("desk", "Desk Lamp", "45.00", 41), ("clip", "Clip Lamp", "19.00", 33)],
    "bookshelf": [("walnut", "Walnut Bookshelf", "249.00", 45), ("ladder", "Ladder Shelf", "99.00", 40), ("cube", "Cube Shelf", "59.00", 35)],
    "rug": [("wool", "Wool Rug", "199.00", 44), ("jute", "Jute Rug", "89.00", 40), ("cotton", "Cotton Rug", "49.00", 34)],
    "side_table": [("marble", "Marble Side Table", "159.00", 45), ("oak", "Oak Side Table", "69.00", 41), ("metal", "Metal Side Table", "35.00", 32)],
    "cabinet": [("teak", "Teak Cabinet", "229.00", 46), ("filing", "Filing Cabinet", "119.00", 42), ("plastic", "Plastic Cabinet", "55.00", 31)],
}


def product_rows():
    rows = []
    for cat, items in PRODUCTS.items():
        for suffix, name, price, rating in items:
            rows.append({
                "product_id": f"{cat.replace('_', '-')}-{suffix}",
                "name": name,
                "category": cat,
                "price": f"{price} USD",
                "rating_x10": rating,
            })
    return rows


# -- libshelf / tunebox / skywatch ------------------------------------------

BOOKS = [
    ("978-0-000001-1", "Cold Light", "Mara Quill", "science", 2019, 3),
    ("978-0-000002-8", "The Tundra Atlas", "Ben Okafor", "science", 2021, 0),
    ("978-0-000003-5", "Salmon Runs", "Ada Lindqvist", "nature", 2015, 5),
    ("978-0-000004-2", "Northern Circuits", "Mara Quill", "science", 2023, 2),
    ("978-0-000005-9", "Winter Bread", "Ilse Brandt", "cooking", 2018, 4),
    ("978-0-000006-6", "Ice Fog Stories", "Tomas Reyes", "fiction", 2020, 1),
    ("978-0-000007-3", "Aurora Mechanics", "Ben Okafor", "science", 2017, 6),
    ("978-0-000008-0", "The Long Night", "Tomas Reyes", "fiction", 2022, 2),
    ("978-0-000009-7", "Kelp and Stone", "Ada Lindqvist", "nature", 2024, 7),
    ("978-0-000010-3", "Smokehouse", "Ilse Brandt", "cooking", 2016, 0),
]

TRACKS = [
    ("trk-001", "Glass Harbor", "The Tidelines", "indie", 214, 98120),
    ("trk-002", "Paper Moons", "The Tidelines", "indie", 187, 143002),
    ("trk-003", "North Wind Waltz", "Ola Fen", "folk", 251, 40210),
    ("trk-004", "Low Tide", "The Tidelines", "indie", 199, 77455),
    ("trk-005", "Copper River", "Ola Fen", "folk", 305, 61877),
    ("trk-006", "Static Bloom", "Vanta", "electronic", 242, 210554),
    ("trk-007", "Night Shift", "Vanta", "electronic", 228, 188730),
    ("trk-008", "Snowline", "Ola Fen", "folk", 176, 25003),
    ("trk-009", "Afterglow Loop", "Vanta", "electronic", 263, 99001),
    ("trk-010", "Harbor Lights", "The Tidelines", "indie", 233, 51200),
]

FORECASTS = [
    ("Anchorage", "cloudy", 8, -1, 40),
    ("Fairbanks", "snow", -4, -15, 70),
    ("Juneau", "rain", 9, 3, 90),
    ("Seattle", "rain", 13, 7, 80),
    ("Honolulu", "sunny", 28, 21, 10),
    ("Denver", "sunny", 15, 2, 5),
    ("Boston", "fog", 11, 6, 30),
    ("Phoenix", "sunny", 31, 18, 0),
]
CONDITIONS = ["sunny", "cloudy", "rain", "snow", "fog"]


# -- helpers -----------------------------------------------------------------


def text(spl, bind, fmt="text"):
    return {"kind": "text_node", "spl": spl, "bind": bind, "format": fmt}


def text_input(spl, name):
    return {"kind": "text_input", "spl": spl, "name": name}


def button(spl, target, route=None):
    action = {"target": target}
    if route:
        action["route"] = route
    return {"kind": "button", "spl": spl, "action": action}


def group(spl, *children):
    return {"kind": "group", "spl": spl, "children": list(children)}


def region(spl, bind, *item):
    return {"kind": "list_region", "spl": spl, "bind": bind, "item": list(item)}


def param(name):
    return {"param": name}


def lit(value):
    return {"literal": value}


def step(op, **kw):
    return {"op": op, **kw}


def verb(name, doc, params, result, pre, post, policy, api, browser):
    return {
        "name": name, "doc": doc,
        "params": [{"name": n, "type": t} for n, t in params],
        "result": result, "preconditions": pre, "postconditions": post, "policy": policy,
        "bindings": {"api": api, "browser": browser},
    }


def record(name, fields):
    return {"name": name, "kind": "record", "fields": [{"name": n, "type": t} for n, t in fields]}


def list_query(path, catalog, params, filters, sort, fields, limit_param="limit"):
    return {
        "method": "GET", "path": path, "kind": "query", "catalog": catalog,
        "params": params, "filters": filters, "sort": sort,
        "limit_param": limit_param, "result": "list", "fields": fields,
    }


def one_query(path, catalog, key, fields):
    return {
        "method": "GET", "path": path, "kind": "query", "catalog": catalog,
        "params": {key: {"type": "string"}},
        "filters": [{"field": key, "op": "eq", "param": key}],
        "result": "one", "fields": fields,
    }


LIMIT = {"type": "int", "required": False, "default": 20, "min": 1}


# -- sites -------------------------------------------------------------------


def maps_site():
    return {
        "site_id": "maps_example", "name": "Maps Example", "category": "travel",
        "catalogs": {"directions": {
            "name_field": "from",
            "fields": {"from": "string", "to": "string", "travel_seconds": "int",
                       "distance_meters": "int", "distance_display": "string", "route": "list<string>"},
            "symmetric": ["from", "to"],
            "rows": directions_rows(),
        }},
        "routes": [{
            "method": "GET", "path": "/directions", "kind": "query", "catalog": "directions",
            "params": {"from": {"type": "string"}, "to": {"type": "string"},
                       "mode": {"type": "string", "required": False, "default": "driving", "choices": ["driving"]}},
            "filters": [{"field": "from", "op": "eq", "param": "from"}, {"field": "to", "op": "eq", "param": "to"}],
            "result": "one",
            "fields": ["travel_seconds", "distance_meters", "distance_display", "route"],
        }],
        "pages": [
            {"path": "/directions", "elements": [group(
                "route-form",
                text_input("source-input", "from"),
                text_input("dest-input", "to"),
                {"kind": "select", "spl": "mode-select", "name": "mode", "options": ["driving"]},
                button("submit", "/directions/result", "GET /directions"),
            )]},
            {"path": "/directions/result", "elements": [group(
                "result-panel",
                text("duration", "travel_seconds", "int"),
                text("distance", "distance_meters", "distance"),
                text("distance-text", "distance_display"),
                region("route", "route", text("text", ".")),
            )]},
        ],
    }


def maps_manifest():
    get_direction = verb(
        "get_direction",
        "Gets travel information between two locations: driving time, distance and the route taken.",
        [("source", "string"), ("destination", "string")],
        "DirectionResult",
        ['params.source != ""', 'params.destination != ""'],
        ["result.distance_meters >= 0", "result.travel_seconds >= 0"],
        ["read_only"],
        {"method": "GET", "path": "/directions",
         "query": {"from": param("source"), "to": param("destination"), "mode": lit("driving")},
         "body": {},
         "response_map": {f: f for f in ("travel_seconds", "distance_meters", "distance_display", "route")}},
        {"script": [
            step("navigate", path="/directions"),
            step("fill", locator="route-form/source-input", value=param("source")),
            step("fill", locator="route-form/dest-input", value=param("destination")),
            step("select", locator="route-form/mode-select", option=lit("driving")),
            step("click", locator="route-form/submit"),
            step("wait_for", locator="result-panel"),
            step("read", locator="result-panel/duration", capture="duration", mode="as_int"),
            step("read", locator="result-panel/distance", capture="distance", mode="as_distance"),
            step("read", locator="result-panel/distance-text", capture="distance_text", mode="as_string"),
            step("read_list", locator="result-panel/route", capture="route",
                 item={"locator": "text", "mode": "as_string"}),
        ], "output_map": {"travel_seconds": "duration", "distance_meters": "distance",
                          "distance_display": "distance_text", "route": "route"}},
    )
    return {
        "site": {"id": "maps_example", "name": "Maps Example", "category": "travel"},
        "types": [record("DirectionResult", [("travel_seconds", "int"), ("distance_meters", "int"),
                                             ("distance_display", "string"), ("route", "list<string>")])],
        "verbs": [get_direction],
    }


ENTITY_FIELDS = ["name", "entity_type", "location", "rating_x10", "address"]


def entity_items():
    return [
        text("name", "name"), text("type", "entity_type"), text("location", "location"),
        text("rating", "rating_x10", "int"), text("address", "address"),
    ]


ENTITY_READ_FIELDS = {
    "name": {"locator": "name", "mode": "as_string"},
    "entity_type": {"locator": "type", "mode": "as_string"},
    "location": {"locator": "location", "mode": "as_string"},
    "rating_x10": {"locator": "rating", "mode": "as_int"},
    "address": {"locator": "address", "mode": "as_string"},
}


def stayfinder_site():
    return {
        "site_id": "stayfinder_example", "name": "StayFinder Example", "category": "travel",
        "catalogs": {"entities": {
            "name_field": "name",
            "fields": {"name": "string", "entity_type": "string", "location": "string",
                       "rating_x10": "int", "address": "string"},
            "rows": [dict(zip(ENTITY_FIELDS, e)) for e in ENTITIES],
        }},
        "routes": [
            list_query("/ask", "entities",
                       {"query": {"type": "string"},
                        "entity_type": {"type": "string", "choices": ["hotel", "museum"]}, "limit": LIMIT},
                       [{"field": "location", "op": "contains", "param": "query"},
                        {"field": "entity_type", "op": "eq", "param": "entity_type"}],
                       [], ENTITY_FIELDS),
            one_query("/entity", "entities", "name", ENTITY_FIELDS),
        ],
        "pages": [
            {"path": "/ask", "elements": [group(
                "ask-form",
                text_input("query-input", "query"),
                {"kind": "select", "spl": "type-select", "name": "entity_type", "options": ["hotel", "museum"]},
                text_input("limit-input", "limit"),
                button("submit", "/ask/answers", "GET /ask"),
            )]},
            {"path": "/ask/answers", "elements": [group(
                "answers",
                text("count", "count", "int"),
                region("items", "items", *entity_items()),
            )]},
            {"path": "/entity-lookup", "elements": [group(
                "lookup-form", text_input("name-input", "name"), button("submit", "/entity", "GET /entity"),
            )]},
            {"path": "/entity", "elements": [group("entity-card", *entity_items())]},
        ],
    }


def stayfinder_manifest():
    ask = verb(
        "ask",
        "Asks the stay finder for places of one kind, hotel or museum, in a location, ranked by name.",
        [("query", "string"), ("entity_type", "string"), ("limit", "int")],
        "AskResult",
        ['params.query != ""', "params.limit >= 1"],
        ["result.count == len(result.items)", "result.count <= params.limit"],
        ["read_only"],
        {"method": "GET", "path": "/ask",
         "query": {"query": param("query"), "entity_type": param("entity_type"), "limit": param("limit")},
         "body": {}, "response_map": {"items": "items", "count": "count"}},
        {"script": [
            step("navigate", path="/ask"),
            step("fill", locator="ask-form/query-input", value=param("query")),
            step("select", locator="ask-form/type-select", option=param("entity_type")),
            step("fill", locator="ask-form/limit-input", value=param("limit")),
            step("click", locator="ask-form/submit"),
            step("wait_for", locator="answers"),
            step("read", locator="answers/count", capture="count", mode="as_int"),
            step("read_list", locator="answers/items", capture="items", fields=ENTITY_READ_FIELDS),
        ], "output_map": {"items": "items", "count": "count"}},
    )
    get_entity = verb(
        "get_entity",
        "Looks up one hotel or museum by its exact name and returns its address and rating.",
        [("name", "string")],
        "Entity",
        ['params.name != ""'],
        ["result.name == params.name"],
        ["read_only"],
        {"method": "GET", "path": "/entity", "query": {"name": param("name")}, "body": {},
         "response_map": {f: f for f in ENTITY_FIELDS}},
        {"script": [
            step("navigate", path="/entity-lookup"),
            step("fill", locator="lookup-form/name-input", value=param("name")),
            step("click", locator="lookup-form/submit"),
            step("wait_for", locator="entity-card"),
            *[step("read", locator=f"entity-card/{spec['locator']}", capture=f, mode=spec["mode"])
              for f, spec in ENTITY_READ_FIELDS.items()],
        ], "output_map": {f: f for f in ENTITY_FIELDS}},
    )
    return {
        "site": {"id": "stayfinder_example", "name": "StayFinder Example", "category": "travel"},
        "types": [
            record("Entity", [("name", "string"), ("entity_type", "string"), ("location", "string"),
                              ("rating_x10", "int"), ("address", "string")]),
            record("AskResult", [("items", "list<Entity>"), ("count", "int")]),
        ],
        "verbs": [ask, get_entity],
    }


PRODUCT_FIELDS = ["product_id", "name", "category", "price", "rating_x10"]
PRODUCT_READ_FIELDS = {
    "product_id": {"locator": "product-id", "mode": "as_string"},
    "name": {"locator": "name", "mode": "as_string"},
    "category": {"locator": "category", "mode": "as_string"},
    "price": {"locator": "price", "mode": "as_money"},
    "rating_x10": {"locator": "rating", "mode": "as_int"},
}


def shopmart_site():
    cart_lines = region("lines", "lines",
                        text("product-id", "product_id"), text("name", "name"),
                        text("quantity", "quantity", "int"), text("line-total", "line_total", "money"))
    return {
        "site_id": "shopmart_example", "name": "ShopMart Example", "category": "ecommerce",
        "catalogs": {"products": {
            "name_field": "name",
            "fields": {"product_id": "string", "name": "string", "category": "string",
                       "price": "money", "rating_x10": "int"},
            "rows": product_rows(),
        }},
        "routes": [
            list_query("/products", "products",
                       {"category": {"type": "string", "required": False},
                        "q": {"type": "string", "required": False}, "limit": LIMIT},
                       [{"field": "category", "op": "eq", "param": "category"},
                        {"field": "name", "op": "contains", "param": "q"}],
                       [{"field": "price", "dir": "asc"}], PRODUCT_FIELDS),
            {"method": "POST", "path": "/cart", "kind": "cart_add", "catalog": "products",
             "params": {"product_id": {"type": "string"}, "quantity": {"type": "int", "min": 1}},
             "id_field": "product_id", "price_field": "price"},
            {"method": "GET", "path": "/cart", "kind": "cart_view", "catalog": "products", "params": {},
             "id_field": "product_id", "price_field": "price"},
            {"method": "POST", "path": "/orders", "kind": "order_place", "catalog": "products", "params": {},
             "id_field": "product_id", "price_field": "price"},
        ],
        "pages": [
            {"path": "/shop", "elements": [
                group("nav", button("cart-link", "/cart")),
                group("search-form",
                      text_input("category-input", "category"),
                      text_input("limit-input", "limit"),
                      button("submit", "/shop/results", "GET /products")),
            ]},
            {"path": "/shop/results", "elements": [group(
                "results",
                text("count", "count", "int"),
                region("items", "items",
                       text("product-id", "product_id"), text("name", "name"), text("category", "category"),
                       text("price", "price", "money"), text("rating", "rating_x10", "int")),
            )]},
            {"path": "/product", "elements": [group(
                "cart-form",
                text_input("product-input", "product_id"),
                text_input("quantity-input", "quantity"),
                button("add", "/cart/added", "POST /cart"),
            )]},
            {"path": "/cart/added", "elements": [group(
                "added",
                text("product-id", "product_id"), text("quantity", "quantity", "int"),
                text("cart-count", "cart_count", "int"), text("cart-total", "cart_total", "money"),
            )]},
            {"path": "/cart", "on_load": "GET /cart", "elements": [
                group("cart", cart_lines, text("item-count", "item_count", "int"), text("total", "total", "money")),
                group("checkout", button("review", "/checkout")),
            ]},
            {"path": "/checkout", "on_load": "GET /cart", "elements": [group(
                "review",
                text("item-count", "item_count", "int"), text("total", "total", "money"),
                button("confirm", "/order/confirmation", "POST /orders"),
            )]},
            {"path": "/order/confirmation", "elements": [group(
                "confirmation",
                text("order-id", "order_id"), text("item-count", "item_count", "int"),
                text("total", "total", "money"),
            )]},
        ],
    }


def shopmart_manifest():
    search = verb(
        "search_products",
        "Searches the store's products in one category, cheapest first, returning price and rating.",
        [("category", "string"), ("limit", "int")],
        "ProductList",
        ['params.category != ""', "params.limit >= 1"],
        ["result.count == len(result.items)", "result.count <= params.limit"],
        ["read_only"],
        {"method": "GET", "path": "/products",
         "query": {"category": param("category"), "limit": param("limit")}, "body": {},
         "response_map": {"items": "items", "count": "count"}},
        {"script": [
            step("navigate", path="/shop"),
            step("fill", locator="search-form/category-input", value=param("category")),
            step("fill", locator="search-form/limit-input", value=param("limit")),
            step("click", locator="search-form/submit"),
            step("wait_for", locator="results"),
            step("read", locator="results/count", capture="count", mode="as_int"),
            step("read_list", locator="results/items", capture="items", fields=PRODUCT_READ_FIELDS),
        ], "output_map": {"items": "items", "count": "count"}},
    )
    add = verb(
        "add_to_cart",
        "Adds a quantity of one product to the shopping cart and reports the cart size and total.",
        [("product_id", "string"), ("quantity", "int")],
        "CartUpdate",
        ['params.product_id != ""', "params.quantity >= 1"],
        ["result.quantity == params.quantity", "result.cart_count >= params.quantity"],
        ["side_effecting"],
        {"method": "POST", "path": "/cart", "query": {},
         "body": {"product_id": param("product_id"), "quantity": param("quantity")},
         "response_map": {f: f for f in ("product_id", "quantity", "cart_count", "cart_total")}},
        {"script": [
            step("navigate", path="/product"),
            step("fill", locator="cart-form/product-input", value=param("product_id")),
            step("fill", locator="cart-form/quantity-input", value=param("quantity")),
            step("click", locator="cart-form/add"),
            step("wait_for", locator="added"),
            step("read", locator="added/product-id", capture="product_id", mode="as_string"),
            step("read", locator="added/quantity", capture="quantity", mode="as_int"),
            step("read", locator="added/cart-count", capture="cart_count", mode="as_int"),
            step("read", locator="added/cart-total", capture="cart_total", mode="as_money"),
        ], "output_map": {f: f for f in ("product_id", "quantity", "cart_count", "cart_total")}},
    )
    view = verb(
        "view_cart",
        "Shows the current shopping cart: each line with quantity and line total, plus the cart total.",
        [],
        "Cart",
        [],
        ["result.item_count >= 0", "result.total.amount_minor >= 0"],
        ["read_only"],
        {"method": "GET", "path": "/cart", "query": {}, "body": {},
         "response_map": {"lines": "lines", "item_count": "item_count", "total": "total"}},
        {"script": [
            step("navigate", path="/shop"),
            step("click", locator="nav/cart-link"),
            step("wait_for", locator="cart"),
            step("read_list", locator="cart/lines", capture="lines", fields={
                "product_id": {"locator": "product-id", "mode": "as_string"},
                "name": {"locator": "name", "mode": "as_string"},
                "quantity": {"locator": "quantity", "mode": "as_int"},
                "line_total": {"locator": "line-total", "mode": "as_money"},
            }),
            step("read", locator="cart/item-count", capture="item_count", mode="as_int"),
            step("read", locator="cart/total", capture="total", mode="as_money"),
        ], "output_map": {"lines": "lines", "item_count": "item_count", "total": "total"}},
    )
    order = verb(
        "place_order",
        "Places an order for everything in the shopping cart, charging the cart total, and empties the cart.",
        [],
        "Order",
        [],
        ["result.item_count >= 1", 'result.order_id != ""'],
        ["side_effecting", "payment", "requires_auth"],
        {"method": "POST", "path": "/orders", "query": {}, "body": {},
         "response_map": {"order_id": "order_id", "item_count": "item_count", "total": "total"}},
        {"script": [
            step("navigate", path="/cart"),
            step("click", locator="checkout/review"),
            step("wait_for", locator="review"),
            step("click", locator="review/confirm"),
            step("wait_for", locator="confirmation"),
            step("read", locator="confirmation/order-id", capture="order_id", mode="as_string"),
            step("read", locator="confirmation/item-count", capture="item_count", mode="as_int"),
            step("read", locator="confirmation/total", capture="total", mode="as_money"),
        ], "output_map": {"order_id": "order_id", "item_count": "item_count", "total": "total"}},
    )
    return {
        "site": {"id": "shopmart_example", "name": "ShopMart Example", "category": "ecommerce"},
        "types": [
            record("Product", [("product_id", "string"), ("name", "string"), ("category", "string"),
                               ("price", "money"), ("rating_x10", "int")]),
            record("ProductList", [("items", "list<Product>"), ("count", "int")]),
            record("CartUpdate", [("product_id", "string"), ("quantity", "int"), ("cart_count", "int"),
                                  ("cart_total", "money")]),
            record("CartLine", [("product_id", "string"), ("name", "string"), ("quantity", "int"),
                                ("line_total", "money")]),
            record("Cart", [("lines", "list<CartLine>"), ("item_count", "int"), ("total", "money")]),
            record("Order", [("order_id", "string"), ("item_count", "int"), ("total", "money")]),
        ],
        "verbs": [search, add, view, order],
    }


BOOK_FIELDS = ["isbn", "title", "author", "genre", "year", "available_copies"]
BOOK_READ = {
    "isbn": {"locator": "isbn", "mode": "as_string"},
    "title": {"locator": "title", "mode": "as_string"},
    "author": {"locator": "author", "mode": "as_string"},
    "genre": {"locator": "genre", "mode": "as_string"},
    "year": {"locator": "year", "mode": "as_int"},
    "available_copies": {"locator": "copies", "mode": "as_int"},
}


def book_nodes():
    return [text("isbn", "isbn"), text("title", "title"), text("author", "author"),
            text("genre", "genre"), text("year", "year", "int"), text("copies", "available_copies", "int")]


def libshelf_site():
    return {
        "site_id": "libshelf_example", "name": "LibShelf Example", "category": "knowledge",
        "catalogs": {"books": {
            "name_field": "title",
            "fields": {"isbn": "string", "title": "string", "author": "string", "genre": "string",
                       "year": "int", "available_copies": "int"},
            "rows": [dict(zip(BOOK_FIELDS, b)) for b in BOOKS],
        }},
        "routes": [
            list_query("/books", "books",
                       {"genre": {"type": "string"}, "limit": LIMIT},
                       [{"field": "genre", "op": "eq", "param": "genre"}],
                       [{"field": "year", "dir": "desc"}], BOOK_FIELDS),
            one_query("/books/{isbn}", "books", "isbn", BOOK_FIELDS),
        ],
        "pages": [
            {"path": "/search", "elements": [group(
                "search-form", text_input("genre-input", "genre"), text_input("limit-input", "limit"),
                button("submit", "/search/results", "GET /books"),
            )]},
            {"path": "/search/results", "elements": [group(
                "results", text("count", "count", "int"), region("items", "items", *book_nodes()),
            )]},
            {"path": "/catalog", "elements": [group(
                "isbn-form", text_input("isbn-input", "isbn"), button("submit", "/book", "GET /books/{isbn}"),
            )]},
            {"path": "/book", "elements": [group("book", *book_nodes())]},
        ],
    }


def libshelf_manifest():
    search = verb(
        "search_books",
        "Finds library books in a genre, newest first, with author, year and available copies.",
        [("genre", "string"), ("limit", "int")],
        "BookList",
        ['params.genre != ""', "params.limit >= 1"],
        ["result.count == len(result.items)", "result.count <= params.limit"],
        ["read_only"],
        {"method": "GET", "path": "/books", "query": {"genre": param("genre"), "limit": param("limit")},
         "body": {}, "response_map": {"items": "items", "count": "count"}},
        {"script": [
            step("navigate", path="/search"),
            step("fill", locator="search-form/genre-input", value=param("genre")),
            step("fill", locator="search-form/limit-input", value=param("limit")),
            step("click", locator="search-form/submit"),
            step("wait_for", locator="results"),
            step("read", locator="results/count", capture="count", mode="as_int"),
            step("read_list", locator="results/items", capture="items", fields=BOOK_READ),
        ], "output_map": {"items": "items", "count": "count"}},
    )
    get_book = verb(
        "get_book",
        "Gets one library book by ISBN, including how many copies are available to borrow.",
        [("isbn", "string")],
        "Book",
        ['params.isbn != ""'],
        ["result.isbn == params.isbn", "result.available_copies >= 0"],
        ["read_only"],
        {"method": "GET", "path": "/books/{isbn}", "query": {}, "body": {},
         "response_map": {f: f for f in BOOK_FIELDS}},
        {"script": [
            step("navigate", path="/catalog"),
            step("fill", locator="isbn-form/isbn-input", value=param("isbn")),
            step("click", locator="isbn-form/submit"),
            step("wait_for", locator="book"),
            *[step("read", locator=f"book/{s['locator']}", capture=f, mode=s["mode"]) for f, s in BOOK_READ.items()],
        ], "output_map": {f: f for f in BOOK_FIELDS}},
    )
    return {
        "site": {"id": "libshelf_example", "name": "LibShelf Example", "category": "knowledge"},
        "types": [
            record("Book", [("isbn", "string"), ("title", "string"), ("author", "string"), ("genre", "string"),
                            ("year", "int"), ("available_copies", "int")]),
            record("BookList", [("items", "list<Book>"), ("count", "int")]),
        ],
        "verbs": [search, get_book],
    }


TRACK_FIELDS = ["track_id", "title", "artist", "genre", "duration_seconds", "plays"]
TRACK_READ = {
    "track_id": {"locator": "track-id", "mode": "as_string"},
    "title": {"locator": "title", "mode": "as_string"},
    "artist": {"locator": "artist", "mode": "as_string"},
    "genre": {"locator": "genre", "mode": "as_string"},
    "duration_seconds": {"locator": "duration", "mode": "as_int"},
    "plays": {"locator": "plays", "mode": "as_int"},
}


def track_nodes():
    return [text("track-id", "track_id"), text("title", "title"), text("artist", "artist"),
            text("genre", "genre"), text("duration", "duration_seconds", "int"), text("plays", "plays", "int")]


def tunebox_site():
    return {
        "site_id": "tunebox_example", "name": "TuneBox Example", "category": "media",
        "catalogs": {"tracks": {
            "name_field": "title",
            "fields": {"track_id": "string", "title": "string", "artist": "string", "genre": "string",
                       "duration_seconds": "int", "plays": "int"},
            "rows": [dict(zip(TRACK_FIELDS, t)) for t in TRACKS],
        }},
        "routes": [
            list_query("/tracks", "tracks", {"artist": {"type": "string"}, "limit": LIMIT},
                       [{"field": "artist", "op": "eq", "param": "artist"}],
                       [{"field": "plays", "dir": "desc"}], TRACK_FIELDS),
            one_query("/tracks/{track_id}", "tracks", "track_id", TRACK_FIELDS),
        ],
        "pages": [
            {"path": "/browse", "elements": [group(
                "artist-form", text_input("artist-input", "artist"), text_input("limit-input", "limit"),
                button("submit", "/browse/tracks", "GET /tracks"),
            )]},
            {"path": "/browse/tracks", "elements": [group(
                "tracks", text("count", "count", "int"), region("items", "items", *track_nodes()),
            )]},
            {"path": "/track", "elements": [group(
                "track-form", text_input("id-input", "track_id"),
                button("submit", "/track/detail", "GET /tracks/{track_id}"),
            )]},
            {"path": "/track/detail", "elements": [group("detail", *track_nodes())]},
        ],
    }


def tunebox_manifest():
    search = verb(
        "search_tracks",
        "Lists an artist's music tracks, most played first, with duration and play count.",
        [("artist", "string"), ("limit", "int")],
        "TrackList",
        ['params.artist != ""', "params.limit >= 1"],
        ["result.count == len(result.items)", "result.count <= params.limit"],
        ["read_only"],
        {"method": "GET", "path": "/tracks", "query": {"artist": param("artist"), "limit": param("limit")},
         "body": {}, "response_map": {"items": "items", "count": "count"}},
        {"script": [
            step("navigate", path="/browse"),
            step("fill", locator="artist-form/artist-input", value=param("artist")),
            step("fill", locator="artist-form/limit-input", value=param("limit")),
            step("click", locator="artist-form/submit"),
            step("wait_for", locator="tracks"),
            step("read", locator="tracks/count", capture="count", mode="as_int"),
            step("read_list", locator="tracks/items", capture="items", fields=TRACK_READ),
        ], "output_map": {"items": "items", "count": "count"}},
    )
    get_track = verb(
        "get_track",
        "Gets one music track by its track id, with artist, duration and play count.",
        [("track_id", "string")],
        "Track",
        ['params.track_id != ""'],
        ["result.track_id == params.track_id", "result.duration_seconds > 0"],
        ["read_only"],
        {"method": "GET", "path": "/tracks/{track_id}", "query": {}, "body": {},
         "response_map": {f: f for f in TRACK_FIELDS}},
        {"script": [
            step("navigate", path="/track"),
            step("fill", locator="track-form/id-input", value=param("track_id")),
            step("click", locator="track-form/submit"),
            step("wait_for", locator="detail"),
            *[step("read", locator=f"detail/{s['locator']}", capture=f, mode=s["mode"]) for f, s in TRACK_READ.items()],
        ], "output_map": {f: f for f in TRACK_FIELDS}},
    )
    return {
        "site": {"id": "tunebox_example", "name": "TuneBox Example", "category": "media"},
        "types": [
            record("Track", [("track_id", "string"), ("title", "string"), ("artist", "string"),
                             ("genre", "string"), ("duration_seconds", "int"), ("plays", "int")]),
            record("TrackList", [("items", "list<Track>"), ("count", "int")]),
        ],
        "verbs": [search, get_track],
    }


FORECAST_FIELDS = ["city", "condition", "high_c", "low_c", "precip_pct"]


def skywatch_site():
    return {
        "site_id": "skywatch_example", "name": "SkyWatch Example", "category": "other",
        "catalogs": {"forecasts": {
            "name_field": "city",
            "fields": {"city": "string", "condition": "string", "high_c": "int", "low_c": "int",
                       "precip_pct": "int"},
            "rows": [dict(zip(FORECAST_FIELDS, f)) for f in FORECASTS],
        }},
        "routes": [one_query("/forecast", "forecasts", "city", FORECAST_FIELDS)],
        "pages": [
            {"path": "/forecast", "elements": [group(
                "city-form", text_input("city-input", "city"),
                button("submit", "/forecast/today", "GET /forecast"),
            )]},
            {"path": "/forecast/today", "elements": [group(
                "forecast",
                text("city", "city"), text("condition", "condition"), text("high", "high_c", "int"),
                text("low", "low_c", "int"), text("precip", "precip_pct", "int"),
            )]},
        ],
    }


def skywatch_manifest():
    get_forecast = verb(
        "get_forecast",
        "Gets today's weather forecast for a city: condition, high and low temperature, chance of precipitation.",
        [("city", "string")],
        "Forecast",
        ['params.city != ""'],
        ["result.city == params.city", "result.low_c <= result.high_c",
         "result.precip_pct >= 0 && result.precip_pct <= 100"],
        ["read_only"],
        {"method": "GET", "path": "/forecast", "query": {"city": param("city")}, "body": {},
         "response_map": {f: f for f in FORECAST_FIELDS}},
        {"script": [
            step("navigate", path="/forecast"),
            step("fill", locator="city-form/city-input", value=param("city")),
            step("click", locator="city-form/submit"),
            step("wait_for", locator="forecast"),
            step("read", locator="forecast/city", capture="city", mode="as_string"),
            step("read", locator="forecast/condition", capture="condition", mode="as_string"),
            step("read", locator="forecast/high", capture="high_c", mode="as_int"),
            step("read", locator="forecast/low", capture="low_c", mode="as_int"),
            step("read", locator="forecast/precip", capture="precip_pct", mode="as_int"),
        ], "output_map": {f: f for f in FORECAST_FIELDS}},
    )
    return {
        "site": {"id": "skywatch_example", "name": "SkyWatch Example", "category": "other"},
        "types": [
            {"name": "Condition", "kind": "enum", "variants": CONDITIONS},
            record("Forecast", [("city", "string"), ("condition", "Condition"), ("high_c", "int"),
                                ("low_c", "int"), ("precip_pct", "int")]),
        ],
        "verbs": [get_forecast],
    }


SITES = [
    (maps_site, maps_manifest),
    (stayfinder_site, stayfinder_manifest),
    (shopmart_site, shopmart_manifest),
    (libshelf_site, libshelf_manifest),
    (tunebox_site, tunebox_manifest),
    (skywatch_site, skywatch_manifest),
]


def dump(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def main() -> None:
    for site_fn, manifest_fn in SITES:
        site = site_fn()
        dump(DATA / "sitepack" / f"{site['site_id']}.site.json", site)
        dump(DATA / "manifests" / f"{site['site_id']}.verbs.json", manifest_fn())
        print("wrote", site["site_id"])


if __name__ == "__main__":
    main()
