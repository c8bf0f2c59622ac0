"""Static type checker for workflow programs and contract predicates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from ..jsonpos import Pos
from ..types import (
    BOOL, FLOAT, INT, MONEY, STRING, UNIT, EnumType, ListType, Money, OptionalType, Prim,
    RecordType, TypeExpr, orderable, type_equal,
)
from . import ast

POLICY_TAGS = ("read_only", "side_effecting", "requires_auth", "payment")
LOCAL_SITE = "workflow"
PREDICATE_BUILTINS = {"len"}


class VerbLike(Protocol):
    qname: str
    params: tuple
    result: TypeExpr
    policy_tags: frozenset


class RegistryLike(Protocol):
    def get_verb(self, qname: str) -> VerbLike | None: ...
    def get_type(self, qname: str) -> TypeExpr | None: ...


@dataclass(frozen=True)
class WorkflowTypeError:
    pos: Pos
    message: str
    expected: TypeExpr | None = None
    found: TypeExpr | None = None

    def __str__(self):
        return f"{self.pos}: {self.message}"


@dataclass
class CheckResult:
    errors: list[WorkflowTypeError]
    return_type: TypeExpr = UNIT
    local_types: dict[str, RecordType] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.errors


@dataclass
class _Binding:
    type: TypeExpr
    mutable: bool


MONEY_FIELDS = {"amount_minor": INT, "currency": STRING}


def _show(t) -> str:
    return str(t) if t is not None else "?"


class Checker:
    def __init__(self, reg: RegistryLike | None, predicate_mode: bool = False):
        self.reg = reg
        self.errors: list[WorkflowTypeError] = []
        self.scopes: list[dict[str, _Binding]] = [{}]
        self.local_types: dict[str, RecordType] = {}
        self.returns: list[tuple[TypeExpr, Pos]] = []
        self.predicate_mode = predicate_mode

    # -- helpers ----------------------------------------------------------

    def error(self, pos, message, expected=None, found=None):
        self.errors.append(WorkflowTypeError(pos, message, expected, found))

    def mismatch(self, pos, expected, found, what=""):
        prefix = f"{what}: " if what else ""
        self.error(pos, f"{prefix}expected {_show(expected)}, found {_show(found)}", expected, found)

    def lookup_var(self, name: str) -> _Binding | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return None

    def bind(self, name: str, t: TypeExpr, mutable: bool, pos: Pos) -> None:
        if self.lookup_var(name) is not None:
            self.error(pos, f"variable {name!r} is already bound")
            return
        self.scopes[-1][name] = _Binding(t, mutable)

    def named_type(self, name: str) -> TypeExpr | None:
        if "::" not in name:
            return self.local_types.get(name)
        if name.startswith(LOCAL_SITE + "::"):
            return self.local_types.get(name.split("::", 1)[1])
        return self.reg.get_type(name) if self.reg is not None else None

    def resolve_type(self, t: ast.TypeSyntax) -> TypeExpr | None:
        if isinstance(t, ast.TypeApp):
            inner = self.resolve_type(t.arg)
            if inner is None:
                return None
            if t.ctor == "list":
                return ListType(inner)
            if isinstance(inner, OptionalType):
                self.error(t.pos, "nested optional types are not supported")
                return None
            return OptionalType(inner)
        if t.name in ("int", "float", "bool", "string", "money"):
            return Prim(t.name)
        found = self.named_type(t.name)
        if found is None:
            self.error(t.pos, f"unknown type {t.name!r}")
        return found

    # -- program ----------------------------------------------------------

    def check_program(self, prog: ast.WorkflowProgram) -> CheckResult:
        for tag in prog.grants:
            if tag not in POLICY_TAGS:
                self.error(prog.grants_pos, f"unknown policy tag {tag!r} in grant header")
        for decl in prog.types:
            self.declare_type(decl)
        returns = self.check_block(prog.statements, new_scope=False)
        rtype: TypeExpr = UNIT
        if self.returns:
            rtype = self.returns[0][0]
            for t, pos in self.returns[1:]:
                if not type_equal(t, rtype):
                    self.mismatch(pos, rtype, t, "return type")
            if not returns:
                pos = prog.statements[-1].pos if prog.statements else Pos(1, 1)
                self.error(pos, "program may finish without returning a value")
        return CheckResult(self.errors, rtype, dict(self.local_types))

    def declare_type(self, decl: ast.TypeDecl) -> None:
        if decl.name in self.local_types:
            self.error(decl.pos, f"type {decl.name!r} is already declared")
            return
        fields = []
        seen = set()
        for fname, fsyn in decl.fields:
            if fname in seen:
                self.error(decl.pos, f"duplicate field {fname!r} in type {decl.name}")
                continue
            seen.add(fname)
            ftype = self.resolve_type(fsyn)
            if ftype is not None:
                fields.append((fname, ftype))
        if not decl.fields:
            self.error(decl.pos, f"type {decl.name} has no fields")
        self.local_types[decl.name] = RecordType(f"{LOCAL_SITE}::{decl.name}", tuple(fields))

    def check_block(self, stmts, new_scope: bool = True) -> bool:
        """Check statements; True if the block definitely returns."""
        if new_scope:
            self.scopes.append({})
        returned = False
        for stmt in stmts:
            if returned:
                self.error(stmt.pos, "unreachable statement after return")
                break
            returned = self.check_stmt(stmt)
        if new_scope:
            self.scopes.pop()
        return returned

    def check_stmt(self, s) -> bool:
        if isinstance(s, ast.Let):
            expected = self.resolve_type(s.annotation) if s.annotation is not None else None
            t = self.expr(s.value, expected)
            if expected is not None and t is not None and not type_equal(t, expected):
                self.mismatch(s.value.pos, expected, t, f"let {s.name}")
            bound = expected if expected is not None else t
            if bound is not None and bound == UNIT:
                self.error(s.value.pos, "expression has no value")
                bound = None
            if bound is not None:
                self.bind(s.name, bound, True, s.pos)
            else:
                # keep later uses from cascading
                self.scopes[-1].setdefault(s.name, _Binding(None, True))
            return False
        if isinstance(s, ast.Assign):
            target_t = self.assign_target(s)
            t = self.expr(s.value, target_t)
            if target_t is not None and t is not None and not type_equal(t, target_t):
                self.mismatch(s.value.pos, target_t, t, f"assignment to {'.'.join(s.target)}")
            return False
        if isinstance(s, ast.For):
            self.no_side_effects(s.iterable, "loop iterable")
            t = self.expr(s.iterable)
            elem = None
            if t is not None:
                if isinstance(t, ListType):
                    elem = t.elem
                else:
                    self.mismatch(s.iterable.pos, "list", t, "for")
            if self.lookup_var(s.var) is not None:
                self.error(s.pos, f"variable {s.var!r} is already bound")
            self.scopes.append({s.var: _Binding(elem, False)})
            self.check_block(s.body, new_scope=False)
            self.scopes.pop()
            return False
        if isinstance(s, ast.If):
            self.no_side_effects(s.cond, "if condition")
            t = self.expr(s.cond)
            if t is not None and t != BOOL:
                self.mismatch(s.cond.pos, BOOL, t, "if condition")
            r1 = self.check_block(s.then)
            r2 = self.check_block(s.orelse)
            return r1 and r2 and bool(s.orelse)
        if isinstance(s, ast.Return):
            t = self.expr(s.value)
            if t is not None:
                if t == UNIT:
                    self.error(s.value.pos, "expression has no value")
                else:
                    self.returns.append((t, s.value.pos))
            return True
        if isinstance(s, ast.ExprStmt):
            if isinstance(s.expr, ast.BuiltinCall) and s.expr.name == "push":
                self.check_push(s.expr)
            else:
                self.expr(s.expr)
            return False
        raise TypeError(f"unknown statement {s!r}")

    def assign_target(self, s: ast.Assign) -> TypeExpr | None:
        name = s.target[0]
        binding = self.lookup_var(name)
        if binding is None:
            self.error(s.pos, f"assignment to unbound variable {name!r}")
            return None
        if not binding.mutable:
            self.error(s.pos, f"cannot assign to loop variable {name!r}")
            return None
        t = binding.type
        for fname in s.target[1:]:
            if t is None:
                return None
            if not isinstance(t, RecordType):
                self.error(s.pos, f"field assignment on non-record type {t}")
                return None
            ft = t.field_type(fname)
            if ft is None:
                self.error(s.pos, f"type {t} has no field {fname!r}")
                return None
            t = ft
        return t

    def no_side_effects(self, e, where: str) -> None:
        for node in ast.walk_exprs(e):
            if isinstance(node, ast.VerbCall) and self.reg is not None:
                spec = self.reg.get_verb(node.qname)
                if spec is not None and "side_effecting" in spec.policy_tags:
                    self.error(node.pos, f"side-effecting verb {node.qname} not allowed in {where}")

    # -- expressions ------------------------------------------------------

    def expr(self, e, expected: TypeExpr | None = None) -> TypeExpr | None:
        if isinstance(e, ast.Literal):
            v = e.value
            if isinstance(v, bool):
                return BOOL
            if isinstance(v, int):
                return INT
            if isinstance(v, float):
                return FLOAT
            if isinstance(v, str):
                return STRING
            if isinstance(v, Money):
                return MONEY
            self.error(e.pos, f"bad literal {v!r}")
            return None
        if isinstance(e, ast.Var):
            if self.predicate_mode and e.name not in ("params", "result"):
                self.error(e.pos, f"predicates may only reference params.* and result.*, not {e.name!r}")
                return None
            b = self.lookup_var(e.name)
            if b is None and self.predicate_mode:
                self.error(e.pos, "result is only available in postconditions")
                return None
            if b is None:
                self.error(e.pos, f"unbound variable {e.name!r}")
                return None
            return b.type
        if isinstance(e, ast.FieldAccess):
            return self.field_access(e)
        if isinstance(e, ast.VerbCall):
            return self.verb_call(e)
        if isinstance(e, ast.BuiltinCall):
            return self.builtin(e, expected)
        if isinstance(e, ast.Binary):
            return self.binary(e)
        if isinstance(e, ast.Unary):
            t = self.expr(e.operand)
            if t is None:
                return None
            if e.op == "!":
                if t != BOOL:
                    self.mismatch(e.operand.pos, BOOL, t, "operand of '!'")
                    return None
                return BOOL
            if t not in (INT, FLOAT, MONEY):
                self.mismatch(e.operand.pos, "int, float or money", t, "operand of '-'")
                return None
            return t
        if isinstance(e, ast.ListLiteral):
            return self.list_literal(e, expected)
        if isinstance(e, ast.RecordLiteral):
            return self.record_literal(e)
        if isinstance(e, ast.EnumLiteral):
            t = self.named_type(e.type_name)
            if not isinstance(t, EnumType):
                self.error(e.pos, f"unknown enum type {e.type_name!r}")
                return None
            if e.variant not in t.variants:
                self.error(e.pos, f"{e.type_name} has no variant {e.variant!r}")
                return None
            return t
        raise TypeError(f"unknown expression {e!r}")

    def field_access(self, e: ast.FieldAccess) -> TypeExpr | None:
        t = self.expr(e.obj)
        if t is None:
            return None
        if t == MONEY:
            if e.field in MONEY_FIELDS:
                return MONEY_FIELDS[e.field]
            self.error(e.pos, f"money has no field {e.field!r}")
            return None
        if not isinstance(t, RecordType):
            self.error(e.pos, f"field access .{e.field} on non-record type {t}", found=t)
            return None
        ft = t.field_type(e.field)
        if ft is None:
            path = _path_text(e)
            self.error(e.pos, f"unknown field {path!r}: type {t} has no field {e.field!r}")
            return None
        return ft

    def verb_call(self, e: ast.VerbCall) -> TypeExpr | None:
        if self.predicate_mode:
            self.error(e.pos, "verb calls are not allowed in predicates")
            return None
        spec = self.reg.get_verb(e.qname) if self.reg is not None else None
        if spec is None:
            self.error(e.pos, f"unknown verb {e.qname!r}")
            for _, arg in e.args:
                self.expr(arg)
            return None
        params = dict(spec.params)
        seen = set()
        for name, arg in e.args:
            if name in seen:
                self.error(arg.pos, f"{e.qname}: argument {name!r} given twice")
                continue
            seen.add(name)
            if name not in params:
                self.error(arg.pos, f"{e.qname}: unknown argument {name!r}")
                self.expr(arg)
                continue
            t = self.expr(arg, params[name])
            if t is not None and not type_equal(t, params[name]):
                self.mismatch(arg.pos, params[name], t, f"{e.qname} argument {name!r}")
        missing = [n for n, _ in spec.params if n not in seen]
        if missing:
            self.error(e.pos, f"{e.qname}: missing argument(s) {', '.join(missing)}")
        return spec.result

    def binary(self, e: ast.Binary) -> TypeExpr | None:
        op = e.op
        if op in ("&&", "||"):
            self.no_side_effects(e.rhs, f"right operand of '{op}'")
        lt = self.expr(e.lhs)
        rt = self.expr(e.rhs)
        if lt is None or rt is None:
            return None
        if op in ("&&", "||"):
            ok = True
            for side, t in ((e.lhs, lt), (e.rhs, rt)):
                if t != BOOL:
                    self.mismatch(side.pos, BOOL, t, f"operand of '{op}'")
                    ok = False
            return BOOL if ok else None
        if op in ("==", "!="):
            if not type_equal(lt, rt):
                self.mismatch(e.rhs.pos, lt, rt, f"operand of '{op}'")
                return None
            if lt == UNIT:
                self.error(e.pos, "cannot compare values of type unit")
                return None
            return BOOL
        if op in ("<", "<=", ">", ">="):
            if not orderable(lt):
                self.mismatch(e.lhs.pos, "int, float, string or money", lt, f"operand of '{op}'")
                return None
            if not type_equal(lt, rt):
                self.mismatch(e.rhs.pos, lt, rt, f"operand of '{op}'")
                return None
            return BOOL
        # arithmetic
        allowed = (INT, FLOAT, MONEY) if op in ("+", "-") else (INT, FLOAT)
        if lt not in allowed:
            self.mismatch(e.lhs.pos, " or ".join(str(a) for a in allowed), lt, f"operand of '{op}'")
            return None
        if not type_equal(lt, rt):
            self.mismatch(e.rhs.pos, lt, rt, f"operand of '{op}'")
            return None
        return lt

    def list_literal(self, e: ast.ListLiteral, expected) -> TypeExpr | None:
        elem_expected = expected.elem if isinstance(expected, ListType) else None
        if not e.items:
            if elem_expected is None:
                self.error(e.pos, "cannot infer the element type of an empty list; add a type annotation")
                return None
            return expected
        first = self.expr(e.items[0], elem_expected)
        if first is None:
            for item in e.items[1:]:
                self.expr(item, elem_expected)
            return None
        ok = True
        for item in e.items[1:]:
            t = self.expr(item, first)
            if t is not None and not type_equal(t, first):
                self.mismatch(item.pos, first, t, "list element")
                ok = False
        if first == UNIT:
            self.error(e.pos, "list elements have no value")
            return None
        return ListType(first) if ok else None

    def record_literal(self, e: ast.RecordLiteral) -> TypeExpr | None:
        t = self.named_type(e.type_name)
        if not isinstance(t, RecordType):
            self.error(e.pos, f"unknown record type {e.type_name!r}")
            for _, fe in e.fields:
                self.expr(fe)
            return None
        seen = set()
        for fname, fe in e.fields:
            ft = t.field_type(fname)
            if fname in seen:
                self.error(fe.pos, f"field {fname!r} given twice")
                continue
            seen.add(fname)
            if ft is None:
                self.error(fe.pos, f"type {t} has no field {fname!r}")
                self.expr(fe)
                continue
            vt = self.expr(fe, ft)
            if vt is not None and not type_equal(vt, ft):
                self.mismatch(fe.pos, ft, vt, f"field {fname!r}")
        missing = [n for n in t.field_names if n not in seen]
        if missing:
            self.error(e.pos, f"{t}: missing field(s) {', '.join(missing)}")
        return t

    # -- builtins ---------------------------------------------------------

    def check_push(self, e: ast.BuiltinCall) -> None:
        if len(e.args) != 2:
            self.error(e.pos, f"push takes 2 arguments, got {len(e.args)}")
            for a in e.args:
                self.expr(a)
            return
        target, item = e.args
        if not isinstance(target, ast.Var):
            self.error(target.pos, "push target must be a let-bound list variable")
            self.expr(item)
            return
        binding = self.lookup_var(target.name)
        if binding is None:
            self.error(target.pos, f"unbound variable {target.name!r}")
            self.expr(item)
            return
        if not binding.mutable:
            self.error(target.pos, f"cannot push to loop variable {target.name!r}")
        lt = binding.type
        if lt is None:
            self.expr(item)
            return
        if not isinstance(lt, ListType):
            self.mismatch(target.pos, "list", lt, "push target")
            self.expr(item)
            return
        it = self.expr(item, lt.elem)
        if it is not None and not type_equal(it, lt.elem):
            self.mismatch(item.pos, lt.elem, it, "pushed element")

    def builtin(self, e: ast.BuiltinCall, expected) -> TypeExpr | None:
        name = e.name
        if self.predicate_mode and name not in PREDICATE_BUILTINS:
            self.error(e.pos, f"builtin {name} is not allowed in predicates")
            return None
        if name == "push":
            self.error(e.pos, "push is only valid as a statement")
            return None
        arity = {
            "len": 1, "sum": 1, "sum_money": 1, "sort_by": 2, "sort_by_desc": 2,
            "min_by": 2, "max_by": 2, "cartesian": 1, "range": 2, "concat": 2,
            "map_field": 2, "is_present": 1, "get_or": 2,
        }[name]
        if len(e.args) != arity:
            self.error(e.pos, f"{name} takes {arity} argument(s), got {len(e.args)}")
            for a in e.args:
                self.expr(a)
            return None

        if name in ("sort_by", "sort_by_desc", "min_by", "max_by", "map_field"):
            lt = self.expr(e.args[0])
            fld = e.args[1]
            if not (isinstance(fld, ast.Literal) and isinstance(fld.value, str)):
                self.error(fld.pos, f"{name}: field name must be a string literal")
                return None
            if lt is None:
                return None
            if not (isinstance(lt, ListType) and isinstance(lt.elem, RecordType)):
                self.mismatch(e.args[0].pos, "list of records", lt, name)
                return None
            ft = lt.elem.field_type(fld.value)
            if ft is None:
                self.error(fld.pos, f"{name}: type {lt.elem} has no field {fld.value!r}")
                return None
            if name == "map_field":
                return ListType(ft)
            if not orderable(ft):
                self.mismatch(fld.pos, "int, float, string or money field", ft, name)
                return None
            return lt if name.startswith("sort") else lt.elem

        if name == "get_or":
            ot = self.expr(e.args[0])
            if ot is None:
                self.expr(e.args[1])
                return None
            if not isinstance(ot, OptionalType):
                self.mismatch(e.args[0].pos, "optional", ot, name)
                self.expr(e.args[1])
                return None
            dt = self.expr(e.args[1], ot.elem)
            if dt is not None and not type_equal(dt, ot.elem):
                self.mismatch(e.args[1].pos, ot.elem, dt, name)
                return None
            return ot.elem

        arg_types = [self.expr(a) for a in e.args]
        if any(t is None for t in arg_types):
            return None
        a0 = arg_types[0]
        if name == "len":
            if not isinstance(a0, ListType):
                self.mismatch(e.args[0].pos, "list", a0, name)
                return None
            return INT
        if name in ("sum", "sum_money"):
            want = ListType(INT if name == "sum" else MONEY)
            if not type_equal(a0, want):
                self.mismatch(e.args[0].pos, want, a0, name)
                return None
            return want.elem
        if name == "cartesian":
            if not (isinstance(a0, ListType) and isinstance(a0.elem, ListType)):
                self.mismatch(e.args[0].pos, "list of lists", a0, name)
                return None
            return a0
        if name in ("range", "concat"):
            want = INT if name == "range" else STRING
            for a, t in zip(e.args, arg_types):
                if t != want:
                    self.mismatch(a.pos, want, t, name)
                    return None
            return ListType(INT) if name == "range" else STRING
        if name == "is_present":
            if not isinstance(a0, OptionalType):
                self.mismatch(e.args[0].pos, "optional", a0, name)
                return None
            return BOOL
        raise AssertionError(name)


def _path_text(e) -> str:
    parts = []
    while isinstance(e, ast.FieldAccess):
        parts.append(e.field)
        e = e.obj
    if isinstance(e, ast.Var):
        parts.append(e.name)
    return ".".join(reversed(parts))


def check_program(prog: ast.WorkflowProgram, reg: RegistryLike | None) -> CheckResult:
    return Checker(reg).check_program(prog)


def type_check(prog: ast.WorkflowProgram, reg: RegistryLike | None) -> list[WorkflowTypeError]:
    """All type errors in ``prog``; empty iff the program is well-typed."""
    return check_program(prog, reg).errors


def check_predicate(
    expr, params: RecordType, result: TypeExpr | None
) -> tuple[TypeExpr | None, list[WorkflowTypeError]]:
    """Type a contract predicate against a verb signature.

    ``params`` is the record of declared parameters; ``result`` is the result
    type for postconditions and None for preconditions.
    """
    c = Checker(None, predicate_mode=True)
    c.scopes[0]["params"] = _Binding(params, False)
    if result is not None:
        c.scopes[0]["result"] = _Binding(result, False)
    t = c.expr(expr)
    return t, c.errors
