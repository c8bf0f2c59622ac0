"""Semantic types and runtime values shared by verbs, workflows and contracts.

Types are immutable dataclasses.  Primitive, list and optional types compare
structurally; record and enum types compare nominally by qualified name.

Runtime values use plain Python objects where the mapping is unambiguous:

    int     -> int (never bool)
    float   -> float
    bool    -> bool
    string  -> str
    money   -> Money
    record  -> Record
    list    -> tuple
    optional-> None (absent) or the inner value (present)
    enum    -> EnumValue

Nested optionals are not allowed, so ``None`` is never ambiguous.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from decimal import InvalidOperation
from typing import Any, Iterator, Union

MAX_DEPTH = 64
INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

PRIMITIVE_KINDS = ("int", "float", "bool", "string", "money")
CURRENCY_RE = re.compile(r"^[A-Z]{3}$")
NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")


class TypeErrorBase(Exception):
    pass


class UnresolvedType(TypeErrorBase):
    """A type refers to a record or enum name that was never bound."""

    def __init__(self, name: str):
        super().__init__(f"unresolved type {name!r}")
        self.name = name


class DepthError(TypeErrorBase):
    def __init__(self, what: str = "value"):
        super().__init__(f"{what} nesting exceeds maximum depth {MAX_DEPTH}")


class ValueParseError(ValueError):
    pass


# -- types -----------------------------------------------------------------


@dataclass(frozen=True)
class Prim:
    kind: str

    def __post_init__(self):
        if self.kind not in PRIMITIVE_KINDS + ("unit",):
            raise ValueError(f"unknown primitive kind {self.kind!r}")

    def __str__(self):
        return self.kind


@dataclass(frozen=True)
class ListType:
    elem: "TypeExpr"

    def __post_init__(self):
        _check_type_depth(self)

    def __str__(self):
        return f"list<{self.elem}>"


@dataclass(frozen=True)
class OptionalType:
    elem: "TypeExpr"

    def __post_init__(self):
        if isinstance(self.elem, OptionalType):
            raise ValueError("nested optional types are not supported")
        _check_type_depth(self)

    def __str__(self):
        return f"optional<{self.elem}>"


@dataclass(frozen=True, eq=False)
class RecordType:
    qname: str
    fields: tuple[tuple[str, "TypeExpr"], ...]

    def __post_init__(self):
        seen = set()
        for name, _ in self.fields:
            if not name:
                raise ValueError(f"{self.qname}: empty field name")
            if name in seen:
                raise ValueError(f"{self.qname}: duplicate field {name!r}")
            seen.add(name)

    def __eq__(self, other):
        return isinstance(other, RecordType) and other.qname == self.qname

    def __hash__(self):
        return hash(("record", self.qname))

    def field_type(self, name: str) -> "TypeExpr | None":
        for fname, ftype in self.fields:
            if fname == name:
                return ftype
        return None

    @property
    def field_names(self) -> list[str]:
        return [name for name, _ in self.fields]

    def __str__(self):
        return self.qname


@dataclass(frozen=True, eq=False)
class EnumType:
    qname: str
    variants: tuple[str, ...]

    def __post_init__(self):
        if not self.variants:
            raise ValueError(f"{self.qname}: enum needs at least one variant")
        if len(set(self.variants)) != len(self.variants):
            raise ValueError(f"{self.qname}: duplicate enum variant")

    def __eq__(self, other):
        return isinstance(other, EnumType) and other.qname == self.qname

    def __hash__(self):
        return hash(("enum", self.qname))

    def __str__(self):
        return self.qname


@dataclass(frozen=True)
class TypeRef:
    """Placeholder for a named type that has not been resolved yet."""

    name: str

    def __str__(self):
        return self.name


TypeExpr = Union[Prim, ListType, OptionalType, RecordType, EnumType, TypeRef]

INT = Prim("int")
FLOAT = Prim("float")
BOOL = Prim("bool")
STRING = Prim("string")
MONEY = Prim("money")
UNIT = Prim("unit")


def _type_depth(t, limit=MAX_DEPTH + 1) -> int:
    depth = 1
    while isinstance(t, (ListType, OptionalType)) and depth <= limit:
        t = t.elem
        depth += 1
    return depth


def _check_type_depth(t):
    if _type_depth(t) > MAX_DEPTH:
        raise DepthError("type")


def type_equal(a: TypeExpr, b: TypeExpr) -> bool:
    """Structural equality for primitives/lists/optionals, nominal otherwise."""
    return a == b


def is_resolved(t: TypeExpr) -> bool:
    if isinstance(t, TypeRef):
        return False
    if isinstance(t, (ListType, OptionalType)):
        return is_resolved(t.elem)
    return True


# -- values ----------------------------------------------------------------


@dataclass(frozen=True)
class Money:
    amount_minor: int
    currency: str

    def __post_init__(self):
        if isinstance(self.amount_minor, bool) or not isinstance(self.amount_minor, int):
            raise TypeError("money amount must be an integer number of minor units")
        if not CURRENCY_RE.match(self.currency):
            raise ValueError(f"bad currency code {self.currency!r}")


@dataclass(frozen=True)
class EnumValue:
    type_qname: str
    variant: str


@dataclass(frozen=True)
class Record:
    type_qname: str
    fields: tuple[tuple[str, Any], ...]

    def __getitem__(self, name: str):
        for fname, value in self.fields:
            if fname == name:
                return value
        raise KeyError(name)

    def get(self, name: str, default=None):
        try:
            return self[name]
        except KeyError:
            return default

    def keys(self) -> list[str]:
        return [name for name, _ in self.fields]

    def replace(self, name: str, value) -> "Record":
        if name not in self.keys():
            raise KeyError(name)
        return Record(self.type_qname, tuple((n, value if n == name else v) for n, v in self.fields))


class _Unit:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNIT"


UNIT_VALUE = _Unit()


def make_record(t: RecordType, **values) -> Record:
    return Record(t.qname, tuple((name, values[name]) for name in t.field_names))


def check_value(v: Any, t: TypeExpr) -> bool:
    """True iff ``v`` inhabits ``t``.  Raises UnresolvedType / DepthError."""
    if value_depth(v) > MAX_DEPTH:
        raise DepthError()
    return _check(v, t, 0)


def _check(v: Any, t: TypeExpr, _depth: int) -> bool:
    if _depth >= MAX_DEPTH:
        raise DepthError()
    if isinstance(t, TypeRef):
        raise UnresolvedType(t.name)
    if isinstance(t, Prim):
        k = t.kind
        if k == "int":
            return isinstance(v, int) and not isinstance(v, bool) and INT_MIN <= v <= INT_MAX
        if k == "float":
            return isinstance(v, float)
        if k == "bool":
            return isinstance(v, bool)
        if k == "string":
            return isinstance(v, str)
        if k == "money":
            return isinstance(v, Money)
        if k == "unit":
            return v is UNIT_VALUE
        return False
    if isinstance(t, ListType):
        if not isinstance(v, tuple):
            return False
        # resolve element type even for empty lists
        if not is_resolved(t.elem):
            raise UnresolvedType(str(t.elem))
        return all(_check(item, t.elem, _depth + 1) for item in v)
    if isinstance(t, OptionalType):
        if v is None:
            if not is_resolved(t.elem):
                raise UnresolvedType(str(t.elem))
            return True
        return _check(v, t.elem, _depth + 1)
    if isinstance(t, EnumType):
        return isinstance(v, EnumValue) and v.type_qname == t.qname and v.variant in t.variants
    if isinstance(t, RecordType):
        if not isinstance(v, Record) or v.type_qname != t.qname:
            return False
        if v.keys() != t.field_names:
            return False
        return all(
            _check(fv, ft, _depth + 1) for (_, fv), (_, ft) in zip(v.fields, t.fields)
        )
    return False


def value_depth(v: Any) -> int:
    """Nesting depth of a value (scalars are depth 1), capped just above MAX_DEPTH."""
    stack = [(v, 1)]
    deepest = 0
    while stack:
        cur, d = stack.pop()
        deepest = max(deepest, d)
        if d > MAX_DEPTH:
            return d
        if isinstance(cur, tuple):
            stack.extend((item, d + 1) for item in cur)
        elif isinstance(cur, Record):
            stack.extend((fv, d + 1) for _, fv in cur.fields)
    return deepest


# -- rendering -------------------------------------------------------------


def format_money(m: Money) -> str:
    sign = "-" if m.amount_minor < 0 else ""
    whole, minor = divmod(abs(m.amount_minor), 100)
    return f"{sign}{whole}.{minor:02d} {m.currency}"


def _render_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def render_value(v: Any) -> str:
    """Canonical text form used by the CLI and the audit hash layout."""
    if v is None:
        return "none"
    if v is UNIT_VALUE:
        return "unit"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return _render_float(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, Money):
        return format_money(v)
    if isinstance(v, EnumValue):
        return f"{v.type_qname}.{v.variant}"
    if isinstance(v, tuple):
        return "[" + ", ".join(render_value(item) for item in v) + "]"
    if isinstance(v, Record):
        inner = ", ".join(f"{name}: {render_value(fv)}" for name, fv in v.fields)
        return f"{v.type_qname}{{{inner}}}"
    raise TypeError(f"not a runtime value: {v!r}")


def parse_money(text: str) -> Money:
    m = re.fullmatch(r"(-?)(\d+)(?:\.(\d{1,2}))? ([A-Z]{3})", text.strip())
    if not m:
        raise ValueParseError(f"not a money amount: {text!r}")
    sign, whole, frac, cur = m.groups()
    frac = (frac or "").ljust(2, "0")
    amount = int(whole) * 100 + int(frac)
    return Money(-amount if sign else amount, cur)


def parse_value(text: str, t: TypeExpr) -> Any:
    """Inverse of render_value for primitive and money types."""
    if not isinstance(t, Prim):
        raise ValueParseError(f"parse_value supports primitive types only, got {t}")
    k = t.kind
    try:
        if k == "int":
            if not re.fullmatch(r"-?\d+", text):
                raise ValueParseError(f"not an int: {text!r}")
            return int(text)
        if k == "float":
            return float(text)
        if k == "bool":
            if text not in ("true", "false"):
                raise ValueParseError(f"not a bool: {text!r}")
            return text == "true"
        if k == "string":
            out = json.loads(text)
            if not isinstance(out, str):
                raise ValueParseError(f"not a string literal: {text!r}")
            return out
        if k == "money":
            return parse_money(text)
    except (ValueError, InvalidOperation) as exc:
        if isinstance(exc, ValueParseError):
            raise
        raise ValueParseError(str(exc)) from exc
    raise ValueParseError(f"cannot parse {k}")


# -- JSON interchange ------------------------------------------------------


def value_to_json(v: Any) -> Any:
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, float):
        return v if math.isfinite(v) else _render_float(v)
    if isinstance(v, Money):
        return {"amount_minor": v.amount_minor, "currency": v.currency}
    if isinstance(v, EnumValue):
        return v.variant
    if isinstance(v, tuple):
        return [value_to_json(item) for item in v]
    if isinstance(v, Record):
        return {name: value_to_json(fv) for name, fv in v.fields}
    if v is UNIT_VALUE:
        return None
    raise TypeError(f"not a runtime value: {v!r}")


def value_from_json(obj: Any, t: TypeExpr, _depth: int = 0) -> Any:
    """Build a Value of type ``t`` from a JSON-like document.

    Accepts Money instances and Records as already-converted leaves so that
    browser captures and API documents share one conversion path.
    """
    if _depth >= MAX_DEPTH:
        raise DepthError()
    if isinstance(t, TypeRef):
        raise UnresolvedType(t.name)
    if isinstance(t, OptionalType):
        return None if obj is None else value_from_json(obj, t.elem, _depth + 1)
    if isinstance(t, Prim):
        k = t.kind
        if k == "int" and isinstance(obj, int) and not isinstance(obj, bool):
            if not INT_MIN <= obj <= INT_MAX:
                raise ValueParseError(f"int out of range: {obj}")
            return obj
        if k == "float":
            if isinstance(obj, (int, float)) and not isinstance(obj, bool):
                return float(obj)
            if obj in ("nan", "inf", "-inf"):
                return float(obj)
        if k == "bool" and isinstance(obj, bool):
            return obj
        if k == "string" and isinstance(obj, str):
            return obj
        if k == "money":
            if isinstance(obj, Money):
                return obj
            if isinstance(obj, dict) and set(obj) == {"amount_minor", "currency"}:
                try:
                    return Money(obj["amount_minor"], obj["currency"])
                except (TypeError, ValueError) as exc:
                    raise ValueParseError(str(exc)) from exc
        if k == "unit" and obj is None:
            return UNIT_VALUE
        raise ValueParseError(f"expected {k}, got {obj!r}")
    if isinstance(t, ListType):
        if not isinstance(obj, (list, tuple)):
            raise ValueParseError(f"expected list, got {obj!r}")
        return tuple(value_from_json(item, t.elem, _depth + 1) for item in obj)
    if isinstance(t, EnumType):
        if isinstance(obj, EnumValue) and obj.type_qname == t.qname:
            return obj
        if isinstance(obj, str) and obj in t.variants:
            return EnumValue(t.qname, obj)
        raise ValueParseError(f"{obj!r} is not a variant of {t.qname}")
    if isinstance(t, RecordType):
        if isinstance(obj, Record) and obj.type_qname == t.qname:
            return obj
        if not isinstance(obj, dict):
            raise ValueParseError(f"expected {t.qname} object, got {obj!r}")
        missing = [n for n in t.field_names if n not in obj]
        if missing:
            raise ValueParseError(f"{t.qname}: missing field(s) {', '.join(missing)}")
        extra = [n for n in obj if t.field_type(n) is None]
        if extra:
            raise ValueParseError(f"{t.qname}: unknown field(s) {', '.join(extra)}")
        return Record(
            t.qname, tuple((n, value_from_json(obj[n], ft, _depth + 1)) for n, ft in t.fields)
        )
    raise ValueParseError(f"cannot convert to {t}")


# -- type syntax -----------------------------------------------------------

_TYPE_TOKEN = re.compile(r"\s*(<|>|,|[A-Za-z_][A-Za-z0-9_]*(?:::[A-Za-z_][A-Za-z0-9_]*)?)")


def parse_type(text: str, lookup=None, default_site: str | None = None) -> TypeExpr:
    """Parse ``int``, ``list<T>``, ``optional<T>``, ``Name`` or ``site::Name``.

    Named types are resolved through ``lookup(qname)``; names without a site
    prefix are qualified with ``default_site``.  Unknown names stay TypeRef.
    """
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TYPE_TOKEN.match(text, pos)
        if not m:
            raise ValueParseError(f"bad type syntax at offset {pos}: {text!r}")
        tokens.append(m.group(1))
        pos = m.end()
    if not tokens:
        raise ValueParseError("empty type")
    it = _TokenStream(tokens)
    t = _parse_type_tokens(it, lookup, default_site)
    if it.peek() is not None:
        raise ValueParseError(f"trailing tokens in type {text!r}")
    return t


class _TokenStream:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise ValueParseError("unexpected end of type")
        self.i += 1
        return tok


def _parse_type_tokens(it: _TokenStream, lookup, default_site, depth=0) -> TypeExpr:
    if depth > MAX_DEPTH:
        raise DepthError("type")
    tok = it.next()
    if tok in PRIMITIVE_KINDS:
        return Prim(tok)
    if tok in ("list", "optional"):
        if it.next() != "<":
            raise ValueParseError(f"expected '<' after {tok}")
        inner = _parse_type_tokens(it, lookup, default_site, depth + 1)
        if it.next() != ">":
            raise ValueParseError(f"expected '>' closing {tok}")
        return ListType(inner) if tok == "list" else OptionalType(inner)
    if tok in ("<", ">", ","):
        raise ValueParseError(f"unexpected {tok!r} in type")
    qname = tok if "::" in tok or default_site is None else f"{default_site}::{tok}"
    found = lookup(qname) if lookup else None
    return found if found is not None else TypeRef(qname)


def type_to_text(t: TypeExpr, site: str | None = None) -> str:
    """Inverse of parse_type; names in ``site`` are written unqualified."""
    if isinstance(t, Prim):
        return t.kind
    if isinstance(t, ListType):
        return f"list<{type_to_text(t.elem, site)}>"
    if isinstance(t, OptionalType):
        return f"optional<{type_to_text(t.elem, site)}>"
    name = t.qname if isinstance(t, (RecordType, EnumType)) else t.name
    if site and name.startswith(site + "::"):
        return name[len(site) + 2 :]
    return name


def iter_named_types(t: TypeExpr) -> Iterator[TypeExpr]:
    """Yield every record/enum/ref reachable from ``t`` (records expanded once)."""
    seen: set[str] = set()
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, (ListType, OptionalType)):
            stack.append(cur.elem)
        elif isinstance(cur, (RecordType, EnumType, TypeRef)):
            key = str(cur)
            if key in seen:
                continue
            seen.add(key)
            yield cur
            if isinstance(cur, RecordType):
                stack.extend(ft for _, ft in cur.fields)


def orderable(t: TypeExpr) -> bool:
    return isinstance(t, Prim) and t.kind in ("int", "float", "string", "money")
