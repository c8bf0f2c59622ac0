"""Verb manifests: parsing, validation and canonical serialization.

A manifest is a UTF-8 JSON document (``*.verbs.json``)::

    {
      "site":  {"id": "maps_example", "name": "Maps Example", "category": "travel"},
      "types": [{"name": "DirectionResult", "kind": "record",
                 "fields": [{"name": "distance_meters", "type": "int"}, ...]},
                {"name": "Condition", "kind": "enum", "variants": ["sunny", "rain"]}],
      "verbs": [{"name": "get_direction",
                 "doc": "Gets travel information between two locations.",
                 "params": [{"name": "source", "type": "string"}, ...],
                 "result": "DirectionResult",
                 "preconditions": ["params.source != \\"\\""],
                 "postconditions": ["result.distance_meters >= 0"],
                 "policy": ["read_only"],
                 "bindings": {"api": {...}, "browser": {...}}}]
    }

Type names without a ``site::`` prefix belong to the manifest's site.
Contract predicates use the workflow expression grammar.

API binding::

    {"method": "GET", "path": "/books/{isbn}",
     "query": {"limit": {"param": "limit"}}, "body": {},
     "response_map": {"<result field>": "<dotted response path>"}}

Browser binding::

    {"script": [{"op": "navigate", "path": "/directions"},
                {"op": "fill", "locator": "route-form/source-input", "value": {"param": "source"}},
                {"op": "select", "locator": "...", "option": {"literal": "driving"}},
                {"op": "click", "locator": "..."},
                {"op": "wait_for", "locator": "..."},
                {"op": "read", "locator": "...", "capture": "dist", "mode": "as_distance"},
                {"op": "read_list", "locator": "...", "capture": "items",
                 "fields": {"name": {"locator": "name", "mode": "as_string"}}},
                {"op": "read_list", "locator": "...", "capture": "steps",
                 "item": {"locator": "text", "mode": "as_string"}}],
     "output_map": {"<result field>": "<capture name>"}}
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any

from . import jsonpos
from .jsonpos import Pos, PosDict
from .types import (
    BOOL, INT, MONEY, STRING, EnumType, ListType, NAME_RE, OptionalType, RecordType, TypeExpr,
    TypeRef, ValueParseError, is_resolved, iter_named_types, parse_type, type_to_text,
)
from .wfl.checker import POLICY_TAGS, check_predicate
from .wfl.parser import ParseError, parse_expr

SITE_CATEGORIES = ("ecommerce", "travel", "knowledge", "media", "other")
EFFECT_TAGS = ("read_only", "side_effecting")
PARSE_MODES = ("as_string", "as_int", "as_money", "as_distance")
STEP_OPS = ("navigate", "fill", "click", "select", "wait_for", "read", "read_list")
PLACEHOLDER_RE = re.compile(r"\{([^{}]*)\}")

MODE_TYPES = {"as_string": STRING, "as_int": INT, "as_money": MONEY, "as_distance": INT}


# -- diagnostics -----------------------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    pos: Pos
    severity: str = "error"
    file: str | None = None

    def format(self, file: str | None = None) -> str:
        name = file or self.file or "<manifest>"
        return f"{name}:{self.pos.line}:{self.pos.col}: {self.severity}: {self.message}"

    def __str__(self):
        return self.format()


class ManifestError(Exception):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(d.format() for d in self.diagnostics))


class ManifestSyntaxError(ManifestError):
    pass


class ManifestSchemaError(ManifestError):
    pass


class DuplicateVerb(ManifestError):
    pass


class UnknownType(ManifestError):
    pass


class ContractTypeError(ManifestError):
    pass


class MissingBinding(ManifestError):
    pass


class PolicyTagConflict(ManifestError):
    pass


_ERROR_CLASSES = {
    "syntax": ManifestSyntaxError,
    "duplicate_verb": DuplicateVerb,
    "unknown_type": UnknownType,
    "contract_type": ContractTypeError,
    "missing_binding": MissingBinding,
    "policy_conflict": PolicyTagConflict,
}


def _raise_for(diags: list[Diagnostic]) -> None:
    errors = [d for d in diags if d.severity == "error"]
    if errors:
        cls = _ERROR_CLASSES.get(errors[0].code, ManifestSchemaError)
        raise cls(errors)


# -- spec data -------------------------------------------------------------


@dataclass(frozen=True)
class SiteMeta:
    site_id: str
    display_name: str
    category: str


@dataclass(frozen=True)
class Source:
    """Where a filled value comes from: a verb parameter or a literal."""

    kind: str  # "param" | "literal"
    value: Any

    def to_json(self):
        return {self.kind: self.value}


@dataclass(frozen=True)
class ApiBinding:
    method: str
    path_template: str
    query: tuple[tuple[str, Source], ...] = ()
    body: tuple[tuple[str, Source], ...] = ()
    response_map: tuple[tuple[str, str], ...] = ()

    def placeholders(self) -> list[str]:
        return PLACEHOLDER_RE.findall(self.path_template)


@dataclass(frozen=True)
class ActionStep:
    op: str
    locator: str | None = None
    path: str | None = None
    source: Source | None = None
    capture: str | None = None
    mode: str | None = None
    # read_list: either per-field (field, relative locator, mode) triples or one scalar item
    fields: tuple[tuple[str, str, str], ...] | None = None
    item: tuple[str, str] | None = None


@dataclass(frozen=True)
class BrowserBinding:
    script: tuple[ActionStep, ...]
    output_map: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Predicate:
    source: str
    expr: Any = field(compare=False, repr=False, default=None)


@dataclass(frozen=True)
class VerbSpec:
    qname: str
    doc: str
    params: tuple[tuple[str, TypeExpr], ...]
    result: TypeExpr
    preconditions: tuple[Predicate, ...] = ()
    postconditions: tuple[Predicate, ...] = ()
    policy_tags: frozenset = frozenset({"read_only"})
    api: ApiBinding | None = None
    browser: BrowserBinding | None = None
    site: SiteMeta | None = field(default=None, compare=False, repr=False)
    pos: Pos = field(default=Pos(1, 1), compare=False, repr=False)
    locs: dict = field(default_factory=dict, compare=False, repr=False, hash=False)
    source_file: str | None = field(default=None, compare=False, repr=False)

    @property
    def site_id(self) -> str:
        return self.qname.split("::", 1)[0]

    @property
    def verb_name(self) -> str:
        return self.qname.split("::", 1)[-1]

    @property
    def bindings(self) -> dict:
        out = {}
        if self.api is not None:
            out["api"] = self.api
        if self.browser is not None:
            out["browser"] = self.browser
        return out

    def params_record(self) -> RecordType:
        return RecordType(f"{self.qname}::params", self.params)

    def loc(self, key: str) -> Pos:
        return self.locs.get(key, self.pos)


@dataclass(frozen=True)
class Manifest:
    site: SiteMeta
    types: tuple[TypeExpr, ...]
    verbs: tuple[VerbSpec, ...]


# -- validation ------------------------------------------------------------


def _locator_ok(loc: Any) -> bool:
    return isinstance(loc, str) and bool(loc) and all(seg for seg in loc.split("/"))


def validate_spec(spec: VerbSpec) -> list[Diagnostic]:
    """All invariant violations and cross-check failures of one verb spec."""
    diags: list[Diagnostic] = []

    def err(code, message, key=None):
        diags.append(Diagnostic(code, f"{spec.qname}: {message}", spec.loc(key) if key else spec.pos))

    site_id, _, verb_name = spec.qname.partition("::")
    if not NAME_RE.match(site_id) or not NAME_RE.match(verb_name):
        err("bad_name", "qualified name must be site::verb with [a-z][a-z0-9_]* parts")
    if not spec.doc or not spec.doc.strip():
        err("missing_doc", "doc must be a nonempty description")

    seen = set()
    for name, ptype in spec.params:
        if name in seen:
            err("duplicate_param", f"duplicate parameter {name!r}", "params")
        seen.add(name)
        if not NAME_RE.match(name or ""):
            err("bad_name", f"bad parameter name {name!r}", "params")
        for t in iter_named_types(ptype):
            if isinstance(t, TypeRef):
                err("unknown_type", f"parameter {name!r} has unknown type {t.name!r}", "params")
    if not isinstance(spec.result, RecordType):
        if isinstance(spec.result, TypeRef):
            err("unknown_type", f"unknown result type {spec.result.name!r}", "result")
        else:
            err("bad_result", f"result must be a record type, got {spec.result}", "result")
    else:
        for t in iter_named_types(spec.result):
            if isinstance(t, TypeRef):
                err("unknown_type", f"result refers to unknown type {t.name!r}", "result")

    unknown_tags = sorted(set(spec.policy_tags) - set(POLICY_TAGS))
    if unknown_tags:
        err("bad_policy", f"unknown policy tag(s) {', '.join(unknown_tags)}", "policy")
    effects = [t for t in EFFECT_TAGS if t in spec.policy_tags]
    if len(effects) != 1:
        what = "both read_only and side_effecting" if len(effects) == 2 else "neither read_only nor side_effecting"
        err("policy_conflict", f"verb is tagged {what}; exactly one is required", "policy")

    if spec.api is None and spec.browser is None:
        err("missing_binding", "at least one binding (api or browser) is required", "bindings")

    param_names = {n for n, _ in spec.params}
    result_ok = isinstance(spec.result, RecordType) and is_resolved(spec.result) and not any(
        isinstance(t, TypeRef) for t in iter_named_types(spec.result)
    )
    params_ok = not any(
        isinstance(t, TypeRef) for _, pt in spec.params for t in iter_named_types(pt)
    )
    if params_ok:
        params_rec = spec.params_record() if len(param_names) == len(spec.params) else None
        for kind, preds in (("preconditions", spec.preconditions), ("postconditions", spec.postconditions)):
            for i, pred in enumerate(preds):
                key = f"{kind}[{i}]"
                try:
                    expr = pred.expr if pred.expr is not None else parse_expr(pred.source)
                except ParseError as exc:
                    err("contract_syntax", f"{key}: {exc.message} (at {exc.pos})", key)
                    continue
                if params_rec is None:
                    continue
                result_t = spec.result if kind == "postconditions" else None
                if kind == "postconditions" and not result_ok:
                    continue
                t, errors = check_predicate(expr, params_rec, result_t)
                for e in errors:
                    err("bad_reference", f"{key}: {e.message}", key)
                if not errors and t is not None and t != BOOL:
                    err("contract_type", f"{key}: predicate has type {t}, expected bool", key)

    if spec.api is not None:
        diags += _validate_api(spec, param_names, result_ok)
    if spec.browser is not None:
        diags += _validate_browser(spec, param_names, result_ok)
    return diags


def _validate_source(spec, src: Source | None, param_names, what, key, err):
    if src is None:
        err("bad_source", f"{what}: missing value source", key)
    elif src.kind == "param" and src.value not in param_names:
        err("bad_placeholder", f"{what}: references undeclared parameter {src.value!r}", key)
    elif src.kind not in ("param", "literal"):
        err("bad_source", f"{what}: value source must be param or literal", key)


def _validate_api(spec: VerbSpec, param_names, result_ok) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    key = "bindings.api"

    def err(code, message, k=key):
        diags.append(Diagnostic(code, f"{spec.qname}: api binding: {message}", spec.loc(k)))

    api = spec.api
    if api.method not in ("GET", "POST"):
        err("bad_binding", f"method must be GET or POST, got {api.method!r}")
    if not api.path_template.startswith("/"):
        err("bad_binding", f"path must start with '/': {api.path_template!r}")
    for ph in api.placeholders():
        if ph not in param_names:
            err("bad_placeholder", f"path placeholder {{{ph}}} names no declared parameter")
    for where, pairs in (("query", api.query), ("body", api.body)):
        for name, src in pairs:
            _validate_source(spec, src, param_names, f"{where} field {name!r}", key, lambda c, m, k: err(c, m, k))
    if api.body and api.method == "GET":
        err("bad_binding", "GET bindings cannot send a body")
    if result_ok:
        fields = spec.result.field_names
        mapped = [f for f, _ in api.response_map]
        for f in fields:
            if f not in mapped:
                err("coverage", f"response_map does not produce result field {f!r}")
        for f in mapped:
            if f not in fields:
                err("coverage", f"response_map maps unknown result field {f!r}")
    return diags


def _capture_type_ok(step: ActionStep, ftype: TypeExpr) -> bool:
    if step.op == "read":
        want = MODE_TYPES[step.mode]
        if isinstance(ftype, OptionalType):
            ftype = ftype.elem
        return ftype == want or (step.mode == "as_string" and isinstance(ftype, EnumType))
    if not isinstance(ftype, ListType):
        return False
    elem = ftype.elem
    if step.item is not None:
        mode = step.item[1]
        return elem == MODE_TYPES[mode] or (mode == "as_string" and isinstance(elem, EnumType))
    if not isinstance(elem, RecordType):
        return False
    if sorted(f for f, _, _ in step.fields) != sorted(elem.field_names):
        return False
    for fname, _, mode in step.fields:
        ft = elem.field_type(fname)
        if not (ft == MODE_TYPES[mode] or (mode == "as_string" and isinstance(ft, EnumType))):
            return False
    return True


def _validate_browser(spec: VerbSpec, param_names, result_ok) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    key = "bindings.browser"

    def err(code, message, k=key):
        diags.append(Diagnostic(code, f"{spec.qname}: browser binding: {message}", spec.loc(k)))

    script = spec.browser.script
    if not script:
        err("bad_binding", "script is empty")
        return diags
    if script[0].op != "navigate":
        err("bad_binding", f"first step must be navigate, got {script[0].op}", f"{key}.script[0]")
    captures: dict[str, ActionStep] = {}
    for i, step in enumerate(script):
        k = f"{key}.script[{i}]"
        if step.op not in STEP_OPS:
            err("bad_step", f"step {i}: unknown op {step.op!r}", k)
            continue
        if step.op == "navigate":
            if not (isinstance(step.path, str) and step.path.startswith("/")):
                err("bad_step", f"step {i}: navigate needs a path starting with '/'", k)
            continue
        if not _locator_ok(step.locator):
            err("bad_locator", f"step {i}: locator {step.locator!r} is not a nonempty slash-separated path", k)
        if step.op in ("fill", "select"):
            _validate_source(spec, step.source, param_names, f"step {i} ({step.op})", k, lambda c, m, kk: err(c, m, kk))
        if step.op in ("read", "read_list"):
            if not step.capture:
                err("bad_step", f"step {i}: {step.op} needs a capture name", k)
            elif step.capture in captures:
                err("duplicate_capture", f"step {i}: capture {step.capture!r} is already defined", k)
            else:
                captures[step.capture] = step
        if step.op == "read" and step.mode not in PARSE_MODES:
            err("bad_step", f"step {i}: unknown parse mode {step.mode!r}", k)
            captures.pop(step.capture, None)
        if step.op == "read_list":
            if (step.fields is None) == (step.item is None):
                err("bad_step", f"step {i}: read_list needs exactly one of 'fields' or 'item'", k)
                captures.pop(step.capture, None)
                continue
            parts = step.fields or ((None, *step.item),)
            for _, rel, mode in parts:
                if not _locator_ok(rel):
                    err("bad_locator", f"step {i}: item locator {rel!r} is not a valid path", k)
                if mode not in PARSE_MODES:
                    err("bad_step", f"step {i}: unknown parse mode {mode!r}", k)
                    captures.pop(step.capture, None)
    if result_ok:
        fields = spec.result.field_names
        mapped = dict(spec.browser.output_map)
        for f in fields:
            if f not in mapped:
                err("coverage", f"output_map does not assemble result field {f!r}")
        for f, cap in mapped.items():
            if f not in fields:
                err("coverage", f"output_map assembles unknown result field {f!r}")
                continue
            step = captures.get(cap)
            if step is None:
                err("coverage", f"result field {f!r} maps to unknown capture {cap!r}")
            elif not _capture_type_ok(step, spec.result.field_type(f)):
                err("capture_type", f"capture {cap!r} cannot produce field {f!r} of type {spec.result.field_type(f)}")
    return diags


# -- parsing ---------------------------------------------------------------


class _Loader:
    def __init__(self, text: str, filename: str | None):
        self.text = text
        self.filename = filename
        self.diags: list[Diagnostic] = []

    def err(self, code: str, message: str, where) -> None:
        pos = where if isinstance(where, Pos) else jsonpos.pos_of(where)
        self.diags.append(Diagnostic(code, message, pos, file=self.filename))

    def need(self, obj, key, kind, where=None):
        if not isinstance(obj, dict) or key not in obj:
            self.err("schema", f"missing required key {key!r}", where if where is not None else obj)
            return None
        value = obj[key]
        if not isinstance(value, kind):
            names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
            self.err("schema", f"key {key!r} must be {names}", obj.key_pos(key) if isinstance(obj, PosDict) else obj)
            return None
        return value

    def load(self) -> Manifest | None:
        try:
            doc = jsonpos.loads(self.text)
        except jsonpos.JSONPosError as exc:
            self.err("syntax", f"invalid JSON: {exc.message}", exc.pos)
            return None
        if not isinstance(doc, dict):
            self.err("schema", "manifest must be a JSON object", Pos(1, 1))
            return None
        site = self.load_site(doc)
        if site is None:
            return None
        types = self.load_types(doc, site.site_id)
        verbs = []
        seen: dict[str, Pos] = {}
        for vobj in doc.get("verbs", []) if isinstance(doc.get("verbs", []), list) else []:
            spec = self.load_verb(vobj, site, types)
            if spec is None:
                continue
            if spec.qname in seen:
                self.err("duplicate_verb", f"verb {spec.qname} is declared twice (first at {seen[spec.qname]}); overloading is not supported", spec.pos)
                continue
            seen[spec.qname] = spec.pos
            for d in validate_spec(spec):
                self.diags.append(Diagnostic(d.code, d.message, d.pos, d.severity, self.filename))
            verbs.append(spec)
        if not isinstance(doc.get("verbs", []), list):
            self.err("schema", "'verbs' must be an array", doc.key_pos("verbs"))
        return Manifest(site, tuple(types[n] for n in types), tuple(verbs))

    def load_site(self, doc) -> SiteMeta | None:
        s = self.need(doc, "site", dict)
        if s is None:
            return None
        sid = self.need(s, "id", str)
        name = s.get("name", sid)
        category = s.get("category", "other")
        if sid is None:
            return None
        if not NAME_RE.match(sid):
            self.err("bad_name", f"site id {sid!r} must match [a-z][a-z0-9_]*", s.key_pos("id"))
        if category not in SITE_CATEGORIES:
            self.err("schema", f"site category {category!r} must be one of {', '.join(SITE_CATEGORIES)}", s.key_pos("category"))
        return SiteMeta(sid, name if isinstance(name, str) else sid, category)

    def load_types(self, doc, site_id: str) -> dict[str, TypeExpr]:
        raw = doc.get("types", [])
        if not isinstance(raw, list):
            self.err("schema", "'types' must be an array", doc.key_pos("types"))
            return {}
        decls: dict[str, PosDict] = {}
        for tobj in raw:
            name = self.need(tobj, "name", str)
            if name is None:
                continue
            qname = f"{site_id}::{name}"
            if qname in decls:
                self.err("duplicate_type", f"type {name!r} is declared twice", tobj)
                continue
            decls[qname] = tobj
        built: dict[str, TypeExpr] = {}
        building: set[str] = set()

        def lookup(qname):
            if qname in built:
                return built[qname]
            if qname not in decls or qname in building:
                if qname in building:
                    self.err("schema", f"type {qname} is recursive", decls[qname])
                return None
            building.add(qname)
            t = build(qname, decls[qname])
            building.discard(qname)
            if t is not None:
                built[qname] = t
            return t

        def build(qname, tobj):
            kind = tobj.get("kind", "record")
            if kind == "enum":
                variants = self.need(tobj, "variants", list)
                if variants is None:
                    return None
                try:
                    return EnumType(qname, tuple(variants))
                except ValueError as exc:
                    self.err("schema", str(exc), tobj)
                    return None
            if kind != "record":
                self.err("schema", f"type kind must be record or enum, got {kind!r}", tobj)
                return None
            fields = []
            for fobj in self.need(tobj, "fields", list) or []:
                fname = self.need(fobj, "name", str)
                ftext = self.need(fobj, "type", str)
                if fname is None or ftext is None:
                    continue
                ft = self.parse_type_text(ftext, lookup, site_id, fobj)
                if ft is not None:
                    fields.append((fname, ft))
            try:
                return RecordType(qname, tuple(fields))
            except ValueError as exc:
                self.err("schema", str(exc), tobj)
                return None

        for qname in decls:
            lookup(qname)
        self._type_lookup = lookup
        return {q: built[q] for q in decls if q in built}

    def parse_type_text(self, text, lookup, site_id, where) -> TypeExpr | None:
        try:
            t = parse_type(text, lookup, site_id)
        except (ValueParseError, ValueError) as exc:
            self.err("schema", f"bad type {text!r}: {exc}", where)
            return None
        for named in iter_named_types(t):
            if isinstance(named, TypeRef):
                self.err("unknown_type", f"unknown type {named.name!r}", where)
                return None
        return t

    def load_source(self, obj, key, where) -> Source | None:
        raw = obj.get(key) if isinstance(obj, dict) else None
        if isinstance(raw, dict) and len(raw) == 1:
            (kind, value), = raw.items()
            if kind in ("param", "literal"):
                return Source(kind, value)
        self.err("schema", f"{key!r} must be {{\"param\": name}} or {{\"literal\": value}}", where)
        return None

    def load_api(self, obj) -> ApiBinding | None:
        method = self.need(obj, "method", str)
        path = self.need(obj, "path", str)
        if method is None or path is None:
            return None
        pairs = {}
        for key in ("query", "body"):
            raw = obj.get(key, {})
            if not isinstance(raw, dict):
                self.err("schema", f"{key!r} must be an object", obj)
                raw = {}
            pairs[key] = []
            for name, src in raw.items():
                if isinstance(src, dict) and len(src) == 1 and next(iter(src)) in ("param", "literal"):
                    (kind, value), = src.items()
                    pairs[key].append((name, Source(kind, value)))
                else:
                    self.err("schema", f"{key} field {name!r} needs a param or literal source", obj.key_pos(name))
        rmap = obj.get("response_map", {})
        if not isinstance(rmap, dict) or not all(isinstance(v, str) for v in rmap.values()):
            self.err("schema", "'response_map' must map result fields to response paths", obj)
            rmap = {}
        return ApiBinding(method, path, tuple(pairs["query"]), tuple(pairs["body"]), tuple(rmap.items()))

    def load_step(self, sobj) -> ActionStep | None:
        op = self.need(sobj, "op", str)
        if op is None:
            return None
        if op not in STEP_OPS:
            self.err("bad_step", f"unknown step op {op!r}", sobj)
            return None
        if op == "navigate":
            return ActionStep(op, path=sobj.get("path"))
        locator = sobj.get("locator")
        if op in ("fill", "select"):
            src = self.load_source(sobj, "value" if op == "fill" else "option", sobj)
            return ActionStep(op, locator=locator, source=src)
        if op == "read":
            return ActionStep(op, locator=locator, capture=sobj.get("capture"), mode=sobj.get("mode"))
        if op == "read_list":
            fields = None
            item = None
            if "fields" in sobj:
                raw = sobj["fields"]
                if not isinstance(raw, dict):
                    self.err("schema", "'fields' must be an object", sobj)
                    return None
                fields = tuple(
                    (f, spec.get("locator"), spec.get("mode")) if isinstance(spec, dict) else (f, None, None)
                    for f, spec in raw.items()
                )
            if "item" in sobj:
                raw = sobj["item"]
                if not isinstance(raw, dict):
                    self.err("schema", "'item' must be an object", sobj)
                    return None
                item = (raw.get("locator"), raw.get("mode"))
            return ActionStep(op, locator=locator, capture=sobj.get("capture"), fields=fields, item=item)
        return ActionStep(op, locator=locator)

    def load_browser(self, obj) -> BrowserBinding | None:
        raw = self.need(obj, "script", list)
        if raw is None:
            return None
        steps = []
        locs = {}
        for i, sobj in enumerate(raw):
            step = self.load_step(sobj)
            if step is None:
                return None
            steps.append(step)
            locs[i] = jsonpos.pos_of(sobj)
        omap = obj.get("output_map", {})
        if not isinstance(omap, dict) or not all(isinstance(v, str) for v in omap.values()):
            self.err("schema", "'output_map' must map result fields to capture names", obj)
            omap = {}
        self._step_locs = locs
        return BrowserBinding(tuple(steps), tuple(omap.items()))

    def load_verb(self, vobj, site: SiteMeta, types) -> VerbSpec | None:
        if not isinstance(vobj, PosDict):
            self.err("schema", "each verb must be an object", Pos(1, 1))
            return None
        n_before = len(self.diags)
        name = self.need(vobj, "name", str)
        if name is None:
            return None
        qname = f"{site.site_id}::{name}"
        doc = vobj.get("doc", "")
        locs = {
            key: vobj.key_pos(key)
            for key in ("params", "result", "policy", "bindings", "preconditions", "postconditions")
        }
        lookup = self._type_lookup
        params = []
        for pobj in vobj.get("params", []) or []:
            pname = self.need(pobj, "name", str)
            ptext = self.need(pobj, "type", str)
            if pname is None or ptext is None:
                continue
            pt = self.parse_type_text(ptext, lookup, site.site_id, pobj)
            if pt is None:
                return None
            params.append((pname, pt))
        rtext = self.need(vobj, "result", str)
        if rtext is None:
            return None
        result = self.parse_type_text(rtext, lookup, site.site_id, vobj.key_pos("result"))
        if result is None:
            return None
        preds = {}
        for kind in ("preconditions", "postconditions"):
            out = []
            raw = vobj.get(kind, [])
            if not isinstance(raw, list) or not all(isinstance(p, str) for p in raw):
                self.err("schema", f"{kind!r} must be an array of strings", locs[kind])
                raw = []
            for i, src in enumerate(raw):
                locs[f"{kind}[{i}]"] = locs[kind]
                try:
                    out.append(Predicate(src, parse_expr(src)))
                except ParseError as exc:
                    self.err("contract_syntax", f"{qname}: {kind}[{i}]: {exc.message}", locs[kind])
            preds[kind] = tuple(out)
        policy = vobj.get("policy", [])
        if not isinstance(policy, list) or not all(isinstance(p, str) for p in policy):
            self.err("schema", "'policy' must be an array of tags", locs["policy"])
            policy = []
        bobj = vobj.get("bindings", {})
        api = browser = None
        if not isinstance(bobj, dict):
            self.err("schema", "'bindings' must be an object", locs["bindings"])
            bobj = {}
        for key in bobj:
            if key not in ("api", "browser"):
                self.err("schema", f"unknown binding kind {key!r}", bobj.key_pos(key))
        if isinstance(bobj.get("api"), dict):
            api = self.load_api(bobj["api"])
            locs["bindings.api"] = jsonpos.pos_of(bobj["api"])
        if isinstance(bobj.get("browser"), dict):
            browser = self.load_browser(bobj["browser"])
            locs["bindings.browser"] = jsonpos.pos_of(bobj["browser"])
            for i, p in getattr(self, "_step_locs", {}).items():
                locs[f"bindings.browser.script[{i}]"] = p
        if len(self.diags) > n_before:
            return None
        return VerbSpec(
            qname=qname,
            doc=doc if isinstance(doc, str) else "",
            params=tuple(params),
            result=result,
            preconditions=preds["preconditions"],
            postconditions=preds["postconditions"],
            policy_tags=frozenset(policy),
            api=api,
            browser=browser,
            site=site,
            pos=vobj.pos,
            locs=locs,
            source_file=self.filename,
        )


def load_manifest(text: str, filename: str | None = None) -> Manifest:
    """Parse and validate a manifest; raises ManifestError with diagnostics."""
    if not text.strip():
        return Manifest(SiteMeta("", "", "other"), (), ())
    loader = _Loader(text, filename)
    manifest = loader.load()
    _raise_for(loader.diags)
    assert manifest is not None
    return manifest


def parse_manifest(text: str, filename: str | None = None) -> list[VerbSpec]:
    return list(load_manifest(text, filename).verbs)


def load_manifest_file(path) -> Manifest:
    from pathlib import Path

    p = Path(path)
    return load_manifest(p.read_text(encoding="utf-8"), str(p))


# -- canonical serialization -----------------------------------------------


def _step_json(step: ActionStep) -> dict:
    out: dict[str, Any] = {"op": step.op}
    if step.op == "navigate":
        out["path"] = step.path
        return out
    out["locator"] = step.locator
    if step.op == "fill":
        out["value"] = step.source.to_json()
    elif step.op == "select":
        out["option"] = step.source.to_json()
    elif step.op == "read":
        out["capture"] = step.capture
        out["mode"] = step.mode
    elif step.op == "read_list":
        out["capture"] = step.capture
        if step.fields is not None:
            out["fields"] = {f: {"locator": loc, "mode": m} for f, loc, m in step.fields}
        else:
            out["item"] = {"locator": step.item[0], "mode": step.item[1]}
    return out


def manifest_to_json(m: Manifest) -> dict:
    site = m.site.site_id
    types = []
    for t in m.types:
        short = t.qname.split("::", 1)[1]
        if isinstance(t, EnumType):
            types.append({"name": short, "kind": "enum", "variants": list(t.variants)})
        else:
            types.append({
                "name": short,
                "kind": "record",
                "fields": [{"name": n, "type": type_to_text(ft, site)} for n, ft in t.fields],
            })
    verbs = []
    for v in m.verbs:
        bindings: dict[str, Any] = {}
        if v.api is not None:
            bindings["api"] = {
                "method": v.api.method,
                "path": v.api.path_template,
                "query": {n: s.to_json() for n, s in v.api.query},
                "body": {n: s.to_json() for n, s in v.api.body},
                "response_map": dict(v.api.response_map),
            }
        if v.browser is not None:
            bindings["browser"] = {
                "script": [_step_json(s) for s in v.browser.script],
                "output_map": dict(v.browser.output_map),
            }
        verbs.append({
            "name": v.verb_name,
            "doc": v.doc,
            "params": [{"name": n, "type": type_to_text(t, site)} for n, t in v.params],
            "result": type_to_text(v.result, site),
            "preconditions": [p.source for p in v.preconditions],
            "postconditions": [p.source for p in v.postconditions],
            "policy": sorted(v.policy_tags),
            "bindings": bindings,
        })
    return {
        "site": {"id": site, "name": m.site.display_name, "category": m.site.category},
        "types": types,
        "verbs": verbs,
    }


def serialize_manifest(m: Manifest) -> str:
    return json.dumps(manifest_to_json(m), indent=2, ensure_ascii=False) + "\n"
