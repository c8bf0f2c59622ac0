"""Workflow program syntax tree.

Nodes are frozen dataclasses.  Source positions are excluded from equality so
that a parse of a pretty-printed program compares equal to the original.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Union

from ..jsonpos import Pos

NOPOS = Pos(1, 1)


def _pos():
    return field(default=NOPOS, compare=False, repr=False)


# -- type syntax -----------------------------------------------------------


@dataclass(frozen=True)
class TypeName:
    """``int``, ``money``, ``Name`` or ``site::Name``."""

    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class TypeApp:
    """``list<T>`` or ``optional<T>``."""

    ctor: str
    arg: "TypeSyntax"
    pos: Pos = _pos()


TypeSyntax = Union[TypeName, TypeApp]


# -- expressions -----------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    """value is int, float, bool, str, or ("money", minor, currency)."""

    value: Any
    pos: Pos = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class FieldAccess:
    obj: "Expr"
    field: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class VerbCall:
    qname: str
    args: tuple[tuple[str, "Expr"], ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class BuiltinCall:
    name: str
    args: tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or "-"
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class ListLiteral:
    items: tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class RecordLiteral:
    type_name: str
    fields: tuple[tuple[str, "Expr"], ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class EnumLiteral:
    type_name: str
    variant: str
    pos: Pos = _pos()


Expr = Union[
    Literal, Var, FieldAccess, VerbCall, BuiltinCall, Binary, Unary,
    ListLiteral, RecordLiteral, EnumLiteral,
]


# -- statements ------------------------------------------------------------


@dataclass(frozen=True)
class Let:
    name: str
    value: Expr
    annotation: TypeSyntax | None = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assign:
    target: tuple[str, ...]  # variable name followed by field path
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class For:
    var: str
    iterable: Expr
    body: tuple["Stmt", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()
    pos: Pos = _pos()


@dataclass(frozen=True)
class Return:
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    pos: Pos = _pos()


Stmt = Union[Let, Assign, For, If, Return, ExprStmt]


@dataclass(frozen=True)
class TypeDecl:
    """Program-local record type: ``type Name = { field: T, ... };``."""

    name: str
    fields: tuple[tuple[str, TypeSyntax], ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class WorkflowProgram:
    grants: tuple[str, ...] = ()
    types: tuple[TypeDecl, ...] = ()
    statements: tuple[Stmt, ...] = ()
    source: str = field(default="", compare=False, repr=False)
    grants_pos: Pos = _pos()


def walk_exprs(node) -> "list[Expr]":
    """Every expression node under ``node`` (statements or expressions), preorder."""
    out = []
    stack = [node]
    while stack:
        cur = stack.pop()
        if isinstance(cur, (list, tuple)):
            stack.extend(reversed(cur))
            continue
        if isinstance(cur, WorkflowProgram):
            stack.append(cur.statements)
        elif isinstance(cur, (Let, Return, ExprStmt, Assign)):
            stack.append(cur.value if not isinstance(cur, ExprStmt) else cur.expr)
        elif isinstance(cur, For):
            stack.extend([cur.body, cur.iterable])
        elif isinstance(cur, If):
            stack.extend([cur.orelse, cur.then, cur.cond])
        else:
            out.append(cur)
            if isinstance(cur, FieldAccess):
                stack.append(cur.obj)
            elif isinstance(cur, VerbCall):
                stack.extend(reversed([e for _, e in cur.args]))
            elif isinstance(cur, (BuiltinCall,)):
                stack.extend(reversed(cur.args))
            elif isinstance(cur, Binary):
                stack.extend([cur.rhs, cur.lhs])
            elif isinstance(cur, Unary):
                stack.append(cur.operand)
            elif isinstance(cur, ListLiteral):
                stack.extend(reversed(cur.items))
            elif isinstance(cur, RecordLiteral):
                stack.extend(reversed([e for _, e in cur.fields]))
    return out
