"""Pretty-printer; ``parse_workflow(print_program(p)) == p`` for parsed programs."""

from __future__ import annotations

import json

from ..types import Money, format_money
from . import ast
from .parser import PRECEDENCE, UNARY_PREC

INDENT = "    "


def print_type(t: ast.TypeSyntax) -> str:
    if isinstance(t, ast.TypeApp):
        return f"{t.ctor}<{print_type(t.arg)}>"
    return t.name


def _literal(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, str):
        return json.dumps(v, ensure_ascii=False)
    if isinstance(v, Money):
        return format_money(v)
    raise TypeError(f"cannot print literal {v!r}")


def print_expr(e, parent_prec: int = 0, right: bool = False) -> str:
    if isinstance(e, ast.Literal):
        text = _literal(e.value)
        # a negative literal binds like a unary operator
        if text.startswith("-") and parent_prec > UNARY_PREC:
            return f"({text})"
        return text
    if isinstance(e, ast.Var):
        return e.name
    if isinstance(e, ast.FieldAccess):
        return f"{print_expr(e.obj, UNARY_PREC + 1)}.{e.field}"
    if isinstance(e, ast.VerbCall):
        args = ", ".join(f"{n} = {print_expr(a)}" for n, a in e.args)
        return f"{e.qname}({args})"
    if isinstance(e, ast.BuiltinCall):
        return f"{e.name}({', '.join(print_expr(a) for a in e.args)})"
    if isinstance(e, ast.ListLiteral):
        return "[" + ", ".join(print_expr(a) for a in e.items) + "]"
    if isinstance(e, ast.RecordLiteral):
        fields = ", ".join(f"{n} = {print_expr(a)}" for n, a in e.fields)
        return f"new {e.type_name} {{ {fields} }}" if fields else f"new {e.type_name} {{}}"
    if isinstance(e, ast.EnumLiteral):
        return f"{e.type_name}.{e.variant}"
    if isinstance(e, ast.Unary):
        operand = print_expr(e.operand, UNARY_PREC)
        if e.op == "-" and isinstance(e.operand, ast.Literal) and not operand.startswith("("):
            operand = f"({operand})"
        text = f"{e.op}{operand}"
        return f"({text})" if parent_prec > UNARY_PREC else text
    if isinstance(e, ast.Binary):
        prec = PRECEDENCE[e.op]
        text = f"{print_expr(e.lhs, prec)} {e.op} {print_expr(e.rhs, prec, right=True)}"
        if prec < parent_prec or (right and prec == parent_prec):
            return f"({text})"
        return text
    raise TypeError(f"not an expression: {e!r}")


def _target(path: tuple[str, ...]) -> str:
    return ".".join(path)


def print_stmt(s, depth: int = 0) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, ast.Let):
        ann = f": {print_type(s.annotation)}" if s.annotation is not None else ""
        return [f"{pad}let {s.name}{ann} = {print_expr(s.value)};"]
    if isinstance(s, ast.Assign):
        return [f"{pad}{_target(s.target)} = {print_expr(s.value)};"]
    if isinstance(s, ast.Return):
        return [f"{pad}return {print_expr(s.value)};"]
    if isinstance(s, ast.ExprStmt):
        return [f"{pad}{print_expr(s.expr)};"]
    if isinstance(s, ast.For):
        lines = [f"{pad}for {s.var} in {print_expr(s.iterable)} {{"]
        for inner in s.body:
            lines += print_stmt(inner, depth + 1)
        return lines + [f"{pad}}}"]
    if isinstance(s, ast.If):
        lines = [f"{pad}if {print_expr(s.cond)} {{"]
        for inner in s.then:
            lines += print_stmt(inner, depth + 1)
        if s.orelse:
            lines.append(f"{pad}}} else {{")
            for inner in s.orelse:
                lines += print_stmt(inner, depth + 1)
        return lines + [f"{pad}}}"]
    raise TypeError(f"not a statement: {s!r}")


def print_program(p: ast.WorkflowProgram) -> str:
    lines = []
    if p.grants:
        lines.append(f"grant {', '.join(p.grants)};")
    for decl in p.types:
        fields = ", ".join(f"{n}: {print_type(t)}" for n, t in decl.fields)
        lines.append(f"type {decl.name} = {{ {fields} }};")
    for s in p.statements:
        lines += print_stmt(s)
    return "\n".join(lines) + ("\n" if lines else "")
