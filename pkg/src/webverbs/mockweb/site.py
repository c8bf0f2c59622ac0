"""Site definitions: catalogs, API routes and page templates.

Site file layout (``*.site.json``)::

    {"site_id": "maps_example", "name": "...", "category": "travel",
     "catalogs": {"directions": {"name_field": "from",
                                 "fields": {"from": "string", "distance_meters": "int", ...},
                                 "symmetric": ["from", "to"],
                                 "rows": [{...}, ...]}},
     "routes": [{"method": "GET", "path": "/directions", "kind": "query", ...}],
     "pages": [{"path": "/directions", "on_load": null, "elements": [...]}]}

Catalog field types are ``string``, ``int``, ``money`` or ``list<string>``;
money cells are written as display strings ("249.00 USD").

Query routes::

    {"method": "GET", "path": "/books/{isbn}", "kind": "query", "catalog": "books",
     "params": {"isbn": {"type": "string"}, "limit": {"type": "int", "required": false, "default": 10, "min": 1}},
     "filters": [{"field": "isbn", "op": "eq", "param": "isbn"}],
     "sort": [{"field": "price", "dir": "asc"}],
     "limit_param": "limit", "result": "one" | "list", "fields": ["isbn", ...]}

List results are ``{"items": [...], "count": n}``.  Mutation routes use
``kind`` ``cart_add``, ``cart_view`` or ``order_place`` over a product
catalog (``catalog``, ``id_field``, ``price_field``).
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .. import jsonpos
from ..jsonpos import Pos
from ..types import Money, NAME_RE, ValueParseError, format_money, parse_money

CATEGORIES = ("ecommerce", "travel", "knowledge", "media", "other")
CELL_TYPES = ("string", "int", "money", "list<string>")
ELEMENT_KINDS = ("group", "text_input", "select", "button", "text_node", "list_region")
TEXT_FORMATS = ("text", "int", "money", "distance")
MUTATION_KINDS = ("cart_add", "cart_view", "order_place")


# -- errors ----------------------------------------------------------------


class SiteSchemaError(Exception):
    def __init__(self, file: str, problems: list[tuple[Pos, str]]):
        self.file = file
        self.problems = problems
        lines = [f"{file}:{p.line}:{p.col}: error: {msg}" for p, msg in problems]
        super().__init__("\n".join(lines))


class ApiError(Exception):
    status = 400
    code = "bad_request"

    def __init__(self, message: str):
        self.message = message
        super().__init__(message)

    def document(self) -> dict:
        return {"error": self.code, "message": self.message}


class RouteNotFound(ApiError):
    status = 404
    code = "route_not_found"


class BadParams(ApiError):
    status = 400
    code = "bad_params"


class NotFound(ApiError):
    status = 404
    code = "not_found"


# -- display helpers -------------------------------------------------------


def format_distance(meters: int) -> str:
    """Exact display form: "850 m" below a kilometre, else decimal km."""
    if abs(meters) < 1000:
        return f"{meters} m"
    sign = "-" if meters < 0 else ""
    whole, frac = divmod(abs(meters), 1000)
    if frac == 0:
        return f"{sign}{whole} km"
    return f"{sign}{whole}.{frac:03d}".rstrip("0") + " km"


_DIST_RE = re.compile(r"^(-?)(\d+)(?:\.(\d+))?\s*(km|m)$")


def parse_distance(text: str) -> int:
    """``"<int> m"`` or ``"<decimal> km"`` to whole meters; fractional meters are rejected."""
    m = _DIST_RE.match(text.strip())
    if not m:
        raise ValueParseError(f"not a distance: {text!r}")
    sign, whole, frac, unit = m.groups()
    if unit == "m":
        if frac:
            raise ValueParseError(f"fractional meters in {text!r}")
        meters = int(whole)
    else:
        frac = frac or ""
        if len(frac.rstrip("0")) > 3:
            raise ValueParseError(f"{text!r} is not a whole number of meters")
        meters = int(whole) * 1000 + int((frac + "000")[:3])
    return -meters if sign else meters


def cell_to_json(value: Any) -> Any:
    if isinstance(value, Money):
        return {"amount_minor": value.amount_minor, "currency": value.currency}
    if isinstance(value, tuple):
        return [cell_to_json(v) for v in value]
    return value


# -- definitions -----------------------------------------------------------


@dataclass(frozen=True)
class Catalog:
    name: str
    fields: dict  # field -> cell type
    name_field: str
    rows: tuple  # tuple of dicts (cells already typed)
    symmetric: tuple | None = None

    def field_type(self, name: str) -> str | None:
        return self.fields.get(name)


@dataclass(frozen=True)
class RouteParam:
    name: str
    type: str  # "string" | "int"
    required: bool = True
    default: Any = None
    minimum: int | None = None
    choices: tuple | None = None


@dataclass(frozen=True)
class Route:
    method: str
    path: str
    kind: str
    catalog: str
    params: tuple  # RouteParam
    filters: tuple = ()  # (field, op, param)
    sort: tuple = ()  # (field, dir)
    limit_param: str | None = None
    result: str = "list"
    fields: tuple = ()
    id_field: str | None = None
    price_field: str | None = None

    @property
    def key(self) -> str:
        return f"{self.method} {self.path}"

    def param(self, name: str) -> RouteParam | None:
        for p in self.params:
            if p.name == name:
                return p
        return None

    def match(self, method: str, path: str) -> dict | None:
        if method != self.method:
            return None
        want = self.path.strip("/").split("/")
        got = path.strip("/").split("/")
        if len(want) != len(got):
            return None
        captured = {}
        for w, g in zip(want, got):
            if w.startswith("{") and w.endswith("}"):
                if not g:
                    return None
                captured[w[1:-1]] = g
            elif w != g:
                return None
        return captured


@dataclass(frozen=True)
class Element:
    kind: str
    spl: str | None = None
    children: tuple = ()
    name: str | None = None  # form field name for inputs and selects
    options: tuple = ()
    action: dict | None = None  # {"route": "GET /x", "target": "/page"}
    bind: str | None = None
    format: str = "text"
    text: str | None = None
    item: tuple = ()  # list_region item template


@dataclass(frozen=True)
class Page:
    path: str
    elements: tuple
    on_load: str | None = None  # route key


@dataclass(eq=False)
class SiteDefinition:
    site_id: str
    name: str
    category: str
    catalogs: dict
    routes: tuple
    pages: dict  # path -> Page
    source: str | None = None
    # guards per-site mutations (order numbering, cart writes)
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def route(self, key: str) -> Route | None:
        for r in self.routes:
            if r.key == key:
                return r
        return None

    def find_route(self, method: str, path: str) -> tuple[Route, dict]:
        for r in self.routes:
            captured = r.match(method, path)
            if captured is not None:
                return r, captured
        raise RouteNotFound(f"no route for {method} {path} on {self.site_id}")


# -- loading and validation ------------------------------------------------


class _SiteLoader:
    def __init__(self, text: str, file: str):
        self.text = text
        self.file = file
        self.problems: list[tuple[Pos, str]] = []
        self._positions: dict[int, Pos] = {}

    def err(self, where, message: str):
        pos = where if isinstance(where, Pos) else jsonpos.pos_of(where)
        self.problems.append((pos, message))

    def load(self) -> SiteDefinition | None:
        try:
            doc = jsonpos.loads(self.text)
        except jsonpos.JSONPosError as exc:
            self.err(exc.pos, f"invalid JSON: {exc.message}")
            return None
        if not isinstance(doc, dict):
            self.err(Pos(1, 1), "site file must be a JSON object")
            return None
        site_id = doc.get("site_id")
        if not isinstance(site_id, str) or not NAME_RE.match(site_id):
            self.err(doc, f"site_id {site_id!r} must match [a-z][a-z0-9_]*")
            return None
        category = doc.get("category", "other")
        if category not in CATEGORIES:
            self.err(doc.key_pos("category"), f"category {category!r} must be one of {', '.join(CATEGORIES)}")
        catalogs = {}
        for cname, cobj in (doc.get("catalogs") or {}).items():
            cat = self.load_catalog(cname, cobj)
            if cat is not None:
                catalogs[cname] = cat
        routes = []
        for robj in doc.get("routes") or []:
            r = self.load_route(robj, catalogs)
            if r is not None:
                if any(x.key == r.key for x in routes):
                    self.err(robj, f"duplicate route {r.key}")
                routes.append(r)
        pages = {}
        for pobj in doc.get("pages") or []:
            page = self.load_page(pobj)
            if page is None:
                continue
            if page.path in pages:
                self.err(pobj, f"duplicate page {page.path}")
            pages[page.path] = page
        site = SiteDefinition(site_id, doc.get("name", site_id), category, catalogs, tuple(routes), pages, self.file)
        self.check_pages(site, doc)
        return site

    # catalogs

    def load_catalog(self, cname, cobj) -> Catalog | None:
        if not isinstance(cobj, dict):
            self.err(Pos(1, 1), f"catalog {cname!r} must be an object")
            return None
        fields = cobj.get("fields") or {}
        for f, t in fields.items():
            if t not in CELL_TYPES:
                self.err(fields.key_pos(f), f"catalog {cname}: field {f!r} has unsupported type {t!r}")
        name_field = cobj.get("name_field", "name")
        if fields.get(name_field) != "string":
            self.err(cobj, f"catalog {cname}: name_field {name_field!r} must be a string field")
        rows = []
        currencies = set()
        for robj in cobj.get("rows") or []:
            row = {}
            for f, t in fields.items():
                if f not in robj:
                    self.err(robj, f"catalog {cname}: row is missing field {f!r}")
                    continue
                try:
                    row[f] = self.cell(robj[f], t)
                except ValueParseError as exc:
                    self.err(robj.key_pos(f), f"catalog {cname}: field {f!r}: {exc}")
                    continue
                if isinstance(row[f], Money):
                    currencies.add(row[f].currency)
            for f in robj:
                if f not in fields:
                    self.err(robj.key_pos(f), f"catalog {cname}: unknown field {f!r}")
            rows.append(row)
        if len(currencies) > 1:
            self.err(cobj, f"catalog {cname}: money values mix currencies {', '.join(sorted(currencies))}")
        symmetric = cobj.get("symmetric")
        if symmetric is not None:
            self.check_symmetric(cname, cobj, fields, rows, tuple(symmetric))
        return Catalog(cname, dict(fields), name_field, tuple(rows), tuple(symmetric) if symmetric else None)

    @staticmethod
    def cell(raw, t):
        if t == "string" and isinstance(raw, str):
            return raw
        if t == "int" and isinstance(raw, int) and not isinstance(raw, bool):
            return raw
        if t == "money" and isinstance(raw, str):
            return parse_money(raw)
        if t == "list<string>" and isinstance(raw, list) and all(isinstance(x, str) for x in raw):
            return tuple(raw)
        raise ValueParseError(f"expected {t}, got {raw!r}")

    def check_symmetric(self, cname, cobj, fields, rows, pair):
        a, b = pair
        if a not in fields or b not in fields:
            self.err(cobj, f"catalog {cname}: symmetric key fields {a!r}, {b!r} must exist")
            return
        index = {}
        for row in rows:
            key = (row.get(a), row.get(b))
            if key in index:
                self.err(cobj, f"catalog {cname}: duplicate entry ({key[0]}, {key[1]})")
            index[key] = row
        values = [f for f in fields if f not in pair]
        for (x, y), row in index.items():
            other = index.get((y, x))
            if other is None:
                self.err(cobj, f"catalog {cname}: entry ({x}, {y}) has no reverse entry ({y}, {x})")
            elif any(row.get(f) != other.get(f) for f in values):
                self.err(cobj, f"catalog {cname}: entries ({x}, {y}) and ({y}, {x}) disagree")

    # routes

    def load_route(self, robj, catalogs) -> Route | None:
        method = robj.get("method")
        path = robj.get("path")
        kind = robj.get("kind", "query")
        if method not in ("GET", "POST") or not isinstance(path, str) or not path.startswith("/"):
            self.err(robj, "route needs method GET/POST and a path starting with '/'")
            return None
        where = f"route {method} {path}"
        cname = robj.get("catalog")
        cat = catalogs.get(cname)
        if cat is None:
            self.err(robj, f"{where}: unknown catalog {cname!r}")
            return None
        params = []
        for pname, pobj in (robj.get("params") or {}).items():
            ptype = pobj.get("type", "string")
            if ptype not in ("string", "int"):
                self.err(pobj, f"{where}: param {pname!r} type must be string or int")
            choices = pobj.get("choices")
            params.append(RouteParam(
                pname, ptype, pobj.get("required", True), pobj.get("default"), pobj.get("min"),
                tuple(choices) if choices else None,
            ))
        names = {p.name for p in params}
        for seg in re.findall(r"\{([^{}]*)\}", path):
            if seg not in names:
                self.err(robj, f"{where}: path placeholder {{{seg}}} is not a declared param")
        if kind in MUTATION_KINDS:
            id_field = robj.get("id_field", "product_id")
            price_field = robj.get("price_field", "price")
            if cat.field_type(id_field) != "string" or cat.field_type(price_field) != "money":
                self.err(robj, f"{where}: {kind} needs a string id_field and money price_field on {cname}")
            return Route(method, path, kind, cname, tuple(params), id_field=id_field, price_field=price_field)
        if kind != "query":
            self.err(robj, f"{where}: unknown route kind {kind!r}")
            return None
        filters = []
        for fobj in robj.get("filters") or []:
            f, op, p = fobj.get("field"), fobj.get("op"), fobj.get("param")
            if cat.field_type(f) is None:
                self.err(fobj, f"{where}: filter on unknown field {cname}.{f}")
            if op not in ("eq", "contains"):
                self.err(fobj, f"{where}: filter op must be eq or contains")
            if p not in names:
                self.err(fobj, f"{where}: filter param {p!r} is not declared")
            filters.append((f, op, p))
        sort = []
        for sobj in robj.get("sort") or []:
            f, d = sobj.get("field"), sobj.get("dir", "asc")
            if cat.field_type(f) not in ("string", "int", "money"):
                self.err(sobj, f"{where}: cannot sort by {cname}.{f}")
            if d not in ("asc", "desc"):
                self.err(sobj, f"{where}: sort dir must be asc or desc")
            sort.append((f, d))
        limit_param = robj.get("limit_param")
        if limit_param is not None and limit_param not in names:
            self.err(robj, f"{where}: limit_param {limit_param!r} is not declared")
        result = robj.get("result", "list")
        if result not in ("one", "list"):
            self.err(robj, f"{where}: result must be one or list")
        out_fields = tuple(robj.get("fields") or cat.fields)
        for f in out_fields:
            if cat.field_type(f) is None:
                self.err(robj, f"{where}: projects unknown field {cname}.{f}")
        return Route(method, path, "query", cname, tuple(params), tuple(filters), tuple(sort),
                     limit_param, result, out_fields)

    # pages

    def load_element(self, eobj) -> Element | None:
        kind = eobj.get("kind")
        if kind not in ELEMENT_KINDS:
            self.err(eobj, f"unknown element kind {kind!r}")
            return None
        spl = eobj.get("spl")
        if spl is not None and (not isinstance(spl, str) or not spl or "/" in spl or spl.isdigit()):
            self.err(eobj, f"bad spl segment {spl!r}")
        children = tuple(c for c in (self.load_element(x) for x in eobj.get("children") or []) if c)
        item = tuple(c for c in (self.load_element(x) for x in eobj.get("item") or []) if c)
        fmt = eobj.get("format", "text")
        if fmt not in TEXT_FORMATS:
            self.err(eobj, f"unknown text format {fmt!r}")
        el = Element(
            kind, spl, children, eobj.get("name"), tuple(eobj.get("options") or ()),
            eobj.get("action"), eobj.get("bind"), fmt, eobj.get("text"), item,
        )
        if kind in ("text_input", "select") and (not el.name or not el.spl):
            self.err(eobj, f"{kind} needs a form name and an spl")
        if kind == "select" and not el.options:
            self.err(eobj, "select needs options")
        if kind == "button" and not (isinstance(el.action, dict) and el.action.get("target")):
            self.err(eobj, "button needs an action with a target page")
        if kind == "text_node" and el.bind is None and el.text is None:
            self.err(eobj, "text_node needs bind or text")
        if kind == "list_region" and (el.bind is None or not el.item):
            self.err(eobj, "list_region needs bind and an item template")
        self.check_siblings(eobj, children + item)
        self._positions[id(el)] = jsonpos.pos_of(eobj)
        return el

    def check_siblings(self, where, elements):
        seen = set()
        for el in elements:
            if el.spl is None:
                continue
            if el.spl in seen:
                self.err(where, f"spl segment {el.spl!r} is not unique among siblings")
            seen.add(el.spl)

    def load_page(self, pobj) -> Page | None:
        path = pobj.get("path")
        if not isinstance(path, str) or not path.startswith("/"):
            self.err(pobj, "page path must start with '/'")
            return None
        elements = tuple(e for e in (self.load_element(x) for x in pobj.get("elements") or []) if e)
        self.check_siblings(pobj, elements)
        return Page(path, elements, pobj.get("on_load"))

    def check_pages(self, site: SiteDefinition, doc):
        # which route documents can be displayed on which page
        shown: dict[str, list[Route]] = {p: [] for p in site.pages}
        for page in site.pages.values():
            if page.on_load is not None:
                r = site.route(page.on_load)
                if r is None:
                    self.err(doc, f"page {page.path}: on_load route {page.on_load!r} does not exist")
                else:
                    shown[page.path].append(r)
            for el in _walk(page.elements):
                if el.kind != "button":
                    continue
                target = el.action.get("target")
                if target not in site.pages:
                    self.err(self._positions.get(id(el), Pos(1, 1)), f"button {el.spl!r}: unknown target page {target!r}")
                    continue
                rkey = el.action.get("route")
                if rkey is not None:
                    r = site.route(rkey)
                    if r is None:
                        self.err(self._positions.get(id(el), Pos(1, 1)), f"button {el.spl!r}: unknown route {rkey!r}")
                    else:
                        shown[target].append(r)
        for path, routes in shown.items():
            for r in routes:
                shape = route_shape(site, r)
                self.check_binds(site.pages[path].elements, shape, f"page {path} ({r.key})")

    def check_binds(self, elements, shape, where):
        for el in elements:
            if el.kind == "text_node" and el.bind is not None:
                if _shape_at(shape, el.bind) is None:
                    self.err(self._positions.get(id(el), Pos(1, 1)), f"{where}: text_node binds unknown field {el.bind!r}")
            elif el.kind == "list_region":
                sub = _shape_at(shape, el.bind)
                if not (isinstance(sub, tuple) and sub[0] == "list"):
                    self.err(self._positions.get(id(el), Pos(1, 1)), f"{where}: list_region binds non-list {el.bind!r}")
                else:
                    self.check_binds(el.item, sub[1], where)
            self.check_binds(el.children, shape, where)


def _walk(elements):
    for el in elements:
        yield el
        yield from _walk(el.children)
        yield from _walk(el.item)


def route_shape(site: SiteDefinition, r: Route):
    """Response shape: dict of field -> "scalar" or ("list", item shape)."""
    cat = site.catalogs[r.catalog]

    def cell_shape(t):
        return ("list", "scalar") if t == "list<string>" else "scalar"

    if r.kind == "query":
        row = {f: cell_shape(cat.field_type(f)) for f in r.fields}
        return row if r.result == "one" else {"items": ("list", row), "count": "scalar"}
    if r.kind == "cart_add":
        return dict.fromkeys(("product_id", "quantity", "cart_count", "cart_total"), "scalar")
    if r.kind == "cart_view":
        line = dict.fromkeys(("product_id", "name", "quantity", "line_total"), "scalar")
        return {"lines": ("list", line), "item_count": "scalar", "total": "scalar"}
    return dict.fromkeys(("order_id", "item_count", "total"), "scalar")


def _shape_at(shape, path: str):
    if path == ".":
        return shape
    cur = shape
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            return None
        cur = cur[part]
    return cur


def load_site(path) -> SiteDefinition:
    p = Path(path)
    loader = _SiteLoader(p.read_text(encoding="utf-8"), str(p))
    site = loader.load()
    if loader.problems:
        raise SiteSchemaError(str(p), loader.problems)
    return site


def load_site_text(text: str, name: str = "<site>") -> SiteDefinition:
    loader = _SiteLoader(text, name)
    site = loader.load()
    if loader.problems:
        raise SiteSchemaError(name, loader.problems)
    return site


def load_site_pack(directory) -> list[SiteDefinition]:
    """All ``*.site.json`` files in ``directory``, in file-name order."""
    sites = [load_site(p) for p in sorted(Path(directory).glob("*.site.json"))]
    seen = set()
    for s in sites:
        if s.site_id in seen:
            raise SiteSchemaError(s.source or "", [(Pos(1, 1), f"duplicate site id {s.site_id}")])
        seen.add(s.site_id)
    return sites


# -- session state ---------------------------------------------------------


@dataclass
class SessionState:
    """Per-session mutable state: carts and placed orders, keyed by site."""

    session_id: str = "default"
    carts: dict = field(default_factory=dict)  # site_id -> {product_id: quantity}
    orders: dict = field(default_factory=dict)  # site_id -> list of order docs
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def cart(self, site_id: str) -> dict:
        return self.carts.setdefault(site_id, {})


# -- route engine ----------------------------------------------------------


def _coerce(p: RouteParam, raw: Any):
    if p.type == "int":
        if isinstance(raw, bool):
            raise BadParams(f"param {p.name!r} must be an int")
        if isinstance(raw, int):
            value = raw
        elif isinstance(raw, str) and re.fullmatch(r"-?\d+", raw.strip()):
            value = int(raw.strip())
        else:
            raise BadParams(f"param {p.name!r} must be an int, got {raw!r}")
        if p.minimum is not None and value < p.minimum:
            raise BadParams(f"param {p.name!r} must be >= {p.minimum}")
        return value
    if not isinstance(raw, str):
        raise BadParams(f"param {p.name!r} must be a string, got {raw!r}")
    if p.choices is not None and raw not in p.choices:
        raise BadParams(f"param {p.name!r} must be one of {', '.join(p.choices)}")
    return raw


def _bind_params(route: Route, raw: dict) -> dict:
    for name in raw:
        if route.param(name) is None:
            raise BadParams(f"unknown param {name!r} for {route.key}")
    out = {}
    for p in route.params:
        if p.name in raw and raw[p.name] is not None:
            out[p.name] = _coerce(p, raw[p.name])
        elif p.required:
            raise BadParams(f"missing required param {p.name!r}")
        elif p.default is not None:
            out[p.name] = p.default
    return out


def _sort_key(value):
    return value.amount_minor if isinstance(value, Money) else value


class _Desc:
    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return other.v < self.v

    def __eq__(self, other):
        return self.v == other.v


def run_query(site: SiteDefinition, route: Route, params: dict) -> dict:
    cat = site.catalogs[route.catalog]
    rows = list(cat.rows)
    for f, op, p in route.filters:
        if p not in params:
            continue
        want = params[p]
        if op == "eq":
            rows = [r for r in rows if r[f] == want]
        else:
            needle = str(want).lower()
            rows = [r for r in rows if needle in str(r[f]).lower()]

    def key(row):
        parts = []
        for f, d in route.sort:
            v = _sort_key(row[f])
            parts.append(v if d == "asc" else _Desc(v))
        parts.append(row[cat.name_field])
        return parts

    rows.sort(key=key)
    if route.limit_param and route.limit_param in params:
        rows = rows[: params[route.limit_param]]
    projected = [{f: cell_to_json(r[f]) for f in route.fields} for r in rows]
    if route.result == "one":
        if not projected:
            raise NotFound(f"no {route.catalog} entry matches {params}")
        return projected[0]
    return {"items": projected, "count": len(projected)}


def _product(site: SiteDefinition, route: Route, product_id: str) -> dict:
    cat = site.catalogs[route.catalog]
    for row in cat.rows:
        if row[route.id_field] == product_id:
            return row
    raise BadParams(f"unknown product id {product_id!r}")


def _cart_doc(site, route, cart: dict) -> dict:
    cat = site.catalogs[route.catalog]
    lines = []
    total = None
    count = 0
    for pid, qty in cart.items():
        row = _product(site, route, pid)
        price = row[route.price_field]
        line_total = Money(price.amount_minor * qty, price.currency)
        total = line_total if total is None else Money(total.amount_minor + line_total.amount_minor, total.currency)
        count += qty
        lines.append({
            "product_id": pid, "name": row[cat.name_field], "quantity": qty,
            "line_total": cell_to_json(line_total),
        })
    if total is None:
        total = Money(0, _site_currency(cat))
    return {"lines": lines, "item_count": count, "total": cell_to_json(total)}


def _site_currency(cat: Catalog) -> str:
    for row in cat.rows:
        for v in row.values():
            if isinstance(v, Money):
                return v.currency
    return "USD"


def run_mutation(site: SiteDefinition, route: Route, params: dict, session: SessionState) -> dict:
    with site.lock, session.lock:
        cart = session.cart(site.site_id)
        if route.kind == "cart_add":
            pid = params.get("product_id")
            qty = params.get("quantity", 1)
            if not isinstance(qty, int) or qty < 1:
                raise BadParams("quantity must be >= 1")
            _product(site, route, pid)
            cart[pid] = cart.get(pid, 0) + qty
            doc = _cart_doc(site, route, cart)
            return {"product_id": pid, "quantity": qty, "cart_count": doc["item_count"], "cart_total": doc["total"]}
        if route.kind == "cart_view":
            return _cart_doc(site, route, cart)
        # order_place
        if not cart:
            raise BadParams("cart is empty")
        doc = _cart_doc(site, route, cart)
        orders = session.orders.setdefault(site.site_id, [])
        order = {"order_id": f"ord-{len(orders) + 1:04d}", "item_count": doc["item_count"], "total": doc["total"]}
        orders.append(order)
        cart.clear()
        return order


def api_call(site: SiteDefinition, method: str, path: str, params: dict | None, session: SessionState) -> dict:
    """Execute one API route; raises ApiError subclasses on 4xx outcomes."""
    route, captured = site.find_route(method, path)
    raw = dict(params or {})
    for k, v in captured.items():
        if k in raw and raw[k] != v:
            raise BadParams(f"param {k!r} given in both path and query")
        raw[k] = v
    bound = _bind_params(route, raw)
    if route.kind == "query":
        return run_query(site, route, bound)
    return run_mutation(site, route, bound, session)


def api_response(site: SiteDefinition, method: str, path: str, params, session) -> tuple[int, dict]:
    try:
        return 200, api_call(site, method, path, params, session)
    except ApiError as exc:
        return exc.status, exc.document()


def render_cell_text(value: Any, fmt: str) -> str:
    """Display text for a bound page value."""
    if value is None:
        return ""
    if fmt == "money":
        if isinstance(value, dict):
            value = Money(value["amount_minor"], value["currency"])
        return format_money(value)
    if fmt == "distance":
        return format_distance(value)
    return str(value)
