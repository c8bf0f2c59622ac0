"""Tree-walking evaluator for workflow programs.

Values are immutable, so assignment and ``push`` rebind names; aliasing
cannot happen.  Verb calls are delegated to a hook supplied by the caller.

Dynamic failures of a well-typed program are limited to ``WorkflowRuntimeError``
kinds listed in ``RUNTIME_KINDS`` plus whatever the verb hook raises.
``RuntimeTypeMismatch`` signals a checker/interpreter disagreement and should
never fire for programs that passed ``type_check``.
"""

from __future__ import annotations

import itertools
from typing import Any, Callable

from ..jsonpos import Pos
from ..types import (
    INT_MAX, INT_MIN, UNIT_VALUE, EnumValue, Money, Record, RecordType,
)
from . import ast

RUNTIME_KINDS = ("div_zero", "empty_extremal", "mixed_currency", "int_overflow", "empty_sum")


class WorkflowRuntimeError(Exception):
    def __init__(self, kind: str, message: str, pos: Pos | None = None):
        assert kind in RUNTIME_KINDS
        super().__init__(f"{pos}: {kind}: {message}" if pos else f"{kind}: {message}")
        self.kind = kind
        self.message = message
        self.pos = pos


class RuntimeTypeMismatch(Exception):
    """A value of the wrong kind reached an operation."""


class _Return(Exception):
    def __init__(self, value):
        self.value = value


VerbHook = Callable[[str, dict, ast.VerbCall], Any]


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _check_int(v: int, pos) -> int:
    if not INT_MIN <= v <= INT_MAX:
        raise WorkflowRuntimeError("int_overflow", "integer result exceeds 64 bits", pos)
    return v


def _same_currency(a: Money, b: Money, pos) -> None:
    if a.currency != b.currency:
        raise WorkflowRuntimeError("mixed_currency", f"{a.currency} vs {b.currency}", pos)


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _order_key(v):
    if isinstance(v, Money):
        return v.amount_minor
    return v


class Interpreter:
    def __init__(
        self,
        types: dict[str, RecordType] | None = None,
        verb_hook: VerbHook | None = None,
        type_lookup: Callable[[str], Any] | None = None,
    ):
        self.local_types = types or {}
        self.verb_hook = verb_hook
        self.type_lookup = type_lookup
        self.scopes: list[dict[str, Any]] = [{}]
        self.current_pos: Pos | None = None

    # -- environment ------------------------------------------------------

    def lookup(self, name: str):
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise RuntimeTypeMismatch(f"unbound variable {name!r}")

    def rebind(self, name: str, value) -> None:
        for scope in reversed(self.scopes):
            if name in scope:
                scope[name] = value
                return
        raise RuntimeTypeMismatch(f"unbound variable {name!r}")

    def record_type(self, name: str) -> RecordType:
        if "::" not in name:
            t = self.local_types.get(name)
        elif name.startswith("workflow::"):
            t = self.local_types.get(name.split("::", 1)[1])
        else:
            t = self.type_lookup(name) if self.type_lookup else None
        if not isinstance(t, RecordType):
            raise RuntimeTypeMismatch(f"unknown record type {name!r}")
        return t

    # -- statements -------------------------------------------------------

    def run(self, prog: ast.WorkflowProgram):
        try:
            self.exec_block(prog.statements, new_scope=False)
        except _Return as r:
            return r.value
        return UNIT_VALUE

    def exec_block(self, stmts, new_scope: bool = True) -> None:
        if new_scope:
            self.scopes.append({})
        try:
            for s in stmts:
                self.exec_stmt(s)
        finally:
            if new_scope:
                self.scopes.pop()

    def exec_stmt(self, s) -> None:
        self.current_pos = s.pos
        if isinstance(s, ast.Let):
            self.scopes[-1][s.name] = self.eval(s.value)
        elif isinstance(s, ast.Assign):
            value = self.eval(s.value)
            name, path = s.target[0], s.target[1:]
            self.rebind(name, self._update(self.lookup(name), path, value))
        elif isinstance(s, ast.For):
            items = self.eval(s.iterable)
            if not isinstance(items, tuple):
                raise RuntimeTypeMismatch(f"for over non-list {items!r}")
            for item in items:
                self.scopes.append({s.var: item})
                try:
                    self.exec_block(s.body, new_scope=False)
                finally:
                    self.scopes.pop()
        elif isinstance(s, ast.If):
            cond = self.eval(s.cond)
            if not isinstance(cond, bool):
                raise RuntimeTypeMismatch(f"if condition {cond!r} is not bool")
            self.exec_block(s.then if cond else s.orelse)
        elif isinstance(s, ast.Return):
            raise _Return(self.eval(s.value))
        elif isinstance(s, ast.ExprStmt):
            e = s.expr
            if isinstance(e, ast.BuiltinCall) and e.name == "push":
                target, item = e.args
                lst = self.lookup(target.name)
                if not isinstance(lst, tuple):
                    raise RuntimeTypeMismatch("push target is not a list")
                value = self.eval(item)
                self.rebind(target.name, lst + (value,))
            else:
                self.eval(e)
        else:
            raise RuntimeTypeMismatch(f"unknown statement {s!r}")

    def _update(self, current, path, value):
        if not path:
            return value
        if not isinstance(current, Record):
            raise RuntimeTypeMismatch("field assignment on non-record")
        return current.replace(path[0], self._update(current[path[0]], path[1:], value))

    # -- expressions ------------------------------------------------------

    def eval(self, e):
        if isinstance(e, ast.Literal):
            return e.value
        if isinstance(e, ast.Var):
            return self.lookup(e.name)
        if isinstance(e, ast.FieldAccess):
            obj = self.eval(e.obj)
            if isinstance(obj, Record):
                try:
                    return obj[e.field]
                except KeyError:
                    raise RuntimeTypeMismatch(f"no field {e.field!r}") from None
            if isinstance(obj, Money) and e.field in ("amount_minor", "currency"):
                return getattr(obj, e.field)
            raise RuntimeTypeMismatch(f"field access on {obj!r}")
        if isinstance(e, ast.Binary):
            return self.binary(e)
        if isinstance(e, ast.Unary):
            v = self.eval(e.operand)
            if e.op == "!":
                if not isinstance(v, bool):
                    raise RuntimeTypeMismatch("'!' on non-bool")
                return not v
            if _is_int(v):
                return _check_int(-v, e.pos)
            if isinstance(v, float):
                return -v
            if isinstance(v, Money):
                return Money(_check_int(-v.amount_minor, e.pos), v.currency)
            raise RuntimeTypeMismatch(f"'-' on {v!r}")
        if isinstance(e, ast.VerbCall):
            args = {name: self.eval(arg) for name, arg in e.args}
            if self.verb_hook is None:
                raise RuntimeTypeMismatch("verb call without a verb hook")
            return self.verb_hook(e.qname, args, e)
        if isinstance(e, ast.BuiltinCall):
            return self.builtin(e)
        if isinstance(e, ast.ListLiteral):
            return tuple(self.eval(item) for item in e.items)
        if isinstance(e, ast.RecordLiteral):
            t = self.record_type(e.type_name)
            values = {name: self.eval(fe) for name, fe in e.fields}
            return Record(t.qname, tuple((n, values[n]) for n in t.field_names))
        if isinstance(e, ast.EnumLiteral):
            return EnumValue(e.type_name, e.variant)
        raise RuntimeTypeMismatch(f"unknown expression {e!r}")

    def binary(self, e: ast.Binary):
        op = e.op
        if op in ("&&", "||"):
            lhs = self.eval(e.lhs)
            if not isinstance(lhs, bool):
                raise RuntimeTypeMismatch(f"'{op}' on non-bool")
            if (op == "&&" and not lhs) or (op == "||" and lhs):
                return lhs
            rhs = self.eval(e.rhs)
            if not isinstance(rhs, bool):
                raise RuntimeTypeMismatch(f"'{op}' on non-bool")
            return rhs
        a = self.eval(e.lhs)
        b = self.eval(e.rhs)
        if op in ("==", "!="):
            if type(a) is not type(b) and not (a is None or b is None):
                raise RuntimeTypeMismatch(f"comparing {type(a).__name__} with {type(b).__name__}")
            return (a == b) if op == "==" else (a != b)
        if type(a) is not type(b):
            raise RuntimeTypeMismatch(f"'{op}' on {type(a).__name__} and {type(b).__name__}")
        if op in ("<", "<=", ">", ">="):
            if isinstance(a, Money):
                _same_currency(a, b, e.pos)
                a, b = a.amount_minor, b.amount_minor
            elif not isinstance(a, (int, float, str)) or isinstance(a, bool):
                raise RuntimeTypeMismatch(f"ordering on {type(a).__name__}")
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            return a >= b
        if isinstance(a, Money):
            if op not in ("+", "-"):
                raise RuntimeTypeMismatch(f"'{op}' on money")
            _same_currency(a, b, e.pos)
            amount = a.amount_minor + b.amount_minor if op == "+" else a.amount_minor - b.amount_minor
            return Money(_check_int(amount, e.pos), a.currency)
        if _is_int(a):
            if op == "+":
                return _check_int(a + b, e.pos)
            if op == "-":
                return _check_int(a - b, e.pos)
            if op == "*":
                return _check_int(a * b, e.pos)
            if b == 0:
                raise WorkflowRuntimeError("div_zero", "integer division by zero", e.pos)
            return _check_int(_trunc_div(a, b), e.pos)
        if isinstance(a, float):
            if op == "+":
                return a + b
            if op == "-":
                return a - b
            if op == "*":
                return a * b
            if b == 0.0:
                raise WorkflowRuntimeError("div_zero", "float division by zero", e.pos)
            return a / b
        raise RuntimeTypeMismatch(f"'{op}' on {type(a).__name__}")

    # -- builtins ---------------------------------------------------------

    def builtin(self, e: ast.BuiltinCall):
        name = e.name
        if name in ("sort_by", "sort_by_desc", "min_by", "max_by", "map_field"):
            items = self.eval(e.args[0])
            fld = e.args[1].value
            if not isinstance(items, tuple) or not all(isinstance(r, Record) for r in items):
                raise RuntimeTypeMismatch(f"{name} on non-record list")
            if name == "map_field":
                return tuple(r[fld] for r in items)
            keys = [r[fld] for r in items]
            if any(isinstance(k, Money) for k in keys):
                for k in keys[1:]:
                    _same_currency(keys[0], k, e.pos)
            if name.startswith("sort"):
                # sorted() stays stable under reverse=True, so ties keep input order
                order = sorted(
                    range(len(items)),
                    key=lambda i: _order_key(keys[i]),
                    reverse=name == "sort_by_desc",
                )
                return tuple(items[i] for i in order)
            if not items:
                raise WorkflowRuntimeError("empty_extremal", f"{name} of an empty list", e.pos)
            best = 0
            for i in range(1, len(items)):
                k, kb = _order_key(keys[i]), _order_key(keys[best])
                if (name == "min_by" and k < kb) or (name == "max_by" and k > kb):
                    best = i
            return items[best]
        if name == "get_or":
            v = self.eval(e.args[0])
            d = self.eval(e.args[1])
            return d if v is None else v
        args = [self.eval(a) for a in e.args]
        if name == "len":
            if not isinstance(args[0], tuple):
                raise RuntimeTypeMismatch("len of non-list")
            return len(args[0])
        if name == "sum":
            if not all(_is_int(x) for x in args[0]):
                raise RuntimeTypeMismatch("sum of non-int list")
            return _check_int(sum(args[0]), e.pos)
        if name == "sum_money":
            items = args[0]
            if not items:
                raise WorkflowRuntimeError("empty_sum", "sum_money of an empty list", e.pos)
            if not all(isinstance(x, Money) for x in items):
                raise RuntimeTypeMismatch("sum_money of non-money list")
            for m in items[1:]:
                _same_currency(items[0], m, e.pos)
            return Money(_check_int(sum(m.amount_minor for m in items), e.pos), items[0].currency)
        if name == "cartesian":
            lists = args[0]
            if not all(isinstance(x, tuple) for x in lists):
                raise RuntimeTypeMismatch("cartesian of non-list-of-lists")
            return tuple(tuple(combo) for combo in itertools.product(*lists))
        if name == "range":
            lo, hi = args
            if not (_is_int(lo) and _is_int(hi)):
                raise RuntimeTypeMismatch("range of non-ints")
            return tuple(range(lo, hi))
        if name == "concat":
            if not all(isinstance(x, str) for x in args):
                raise RuntimeTypeMismatch("concat of non-strings")
            return args[0] + args[1]
        if name == "is_present":
            return args[0] is not None
        raise RuntimeTypeMismatch(f"unknown builtin {name}")
