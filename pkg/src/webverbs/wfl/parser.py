"""Recursive-descent parser for workflow programs.

See docs/grammar.md for the EBNF.  Binary operators are parsed by
precedence climbing; all of them are left-associative.
"""

from __future__ import annotations

from ..jsonpos import Pos
from ..types import INT_MAX, INT_MIN, Money
from . import ast
from .lexer import LexError, Token, tokenize

BUILTINS = {
    "len", "sum", "sum_money", "push", "sort_by", "sort_by_desc", "min_by", "max_by",
    "cartesian", "range", "concat", "map_field", "is_present", "get_or",
}

# lowest to highest
PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "<": 3, "<=": 3, ">": 3, ">=": 3, "==": 3, "!=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5,
}
UNARY_PREC = 6


class ParseError(Exception):
    """Syntax error with position and the set of tokens that would have fit."""

    def __init__(self, pos: Pos, expected, found: str):
        self.pos = pos
        self.expected = tuple(sorted(set(expected)))
        self.found = found
        # lexer failures carry no expectation, just the complaint
        self.message = f"expected {', '.join(self.expected)}; found {found}" if self.expected else found
        super().__init__(f"{pos}: {self.message}")


class Parser:
    def __init__(self, text: str):
        try:
            self.tokens = tokenize(text)
        except LexError as exc:
            raise ParseError(exc.pos, [], exc.message) from None
        self.i = 0
        self.text = text

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tok
        if tok.kind != "eof":
            self.i += 1
        return tok

    def fail(self, *expected: str):
        raise ParseError(self.tok.pos, expected, self.tok.describe())

    def expect_op(self, op: str) -> Token:
        if not self.tok.is_op(op):
            self.fail(repr(op))
        return self.advance()

    def expect_kw(self, kw: str) -> Token:
        if not self.tok.is_kw(kw):
            self.fail(repr(kw))
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            self.fail(what)
        return self.advance()

    # -- program ----------------------------------------------------------

    def program(self) -> ast.WorkflowProgram:
        grants: tuple[str, ...] = ()
        grants_pos = self.tok.pos
        if self.tok.is_kw("grant"):
            self.advance()
            names = [self.expect_ident("policy tag").text]
            while self.tok.is_op(","):
                self.advance()
                names.append(self.expect_ident("policy tag").text)
            self.expect_op(";")
            grants = tuple(names)
        types = []
        while self.tok.is_kw("type"):
            types.append(self.type_decl())
        stmts = []
        while self.tok.kind != "eof":
            stmts.append(self.statement(top=True))
        return ast.WorkflowProgram(grants, tuple(types), tuple(stmts), self.text, grants_pos)

    def type_decl(self) -> ast.TypeDecl:
        pos = self.expect_kw("type").pos
        name = self.expect_ident("type name").text
        self.expect_op("=")
        self.expect_op("{")
        fields = []
        if not self.tok.is_op("}"):
            while True:
                fname = self.expect_ident("field name").text
                self.expect_op(":")
                fields.append((fname, self.type_syntax()))
                if self.tok.is_op(","):
                    self.advance()
                    continue
                break
        self.expect_op("}")
        self.expect_op(";")
        return ast.TypeDecl(name, tuple(fields), pos)

    def type_syntax(self, depth: int = 0) -> ast.TypeSyntax:
        tok = self.tok
        if tok.kind != "ident":
            self.fail("type")
        self.advance()
        if tok.text in ("list", "optional") and self.tok.is_op("<"):
            self.advance()
            inner = self.type_syntax(depth + 1)
            self.expect_op(">")
            return ast.TypeApp(tok.text, inner, tok.pos)
        name = tok.text
        if self.tok.is_op("::"):
            self.advance()
            name = f"{name}::{self.expect_ident('type name').text}"
        return ast.TypeName(name, tok.pos)

    # -- statements -------------------------------------------------------

    def block(self) -> tuple[ast.Stmt, ...]:
        self.expect_op("{")
        stmts = []
        while not self.tok.is_op("}"):
            if self.tok.kind == "eof":
                self.fail("'}'", "statement")
            stmts.append(self.statement())
        self.advance()
        return tuple(stmts)

    def statement(self, top: bool = False) -> ast.Stmt:
        tok = self.tok
        if tok.is_kw("let"):
            self.advance()
            name = self.expect_ident("variable name").text
            annotation = None
            if self.tok.is_op(":"):
                self.advance()
                annotation = self.type_syntax()
            self.expect_op("=")
            value = self.expr()
            self.expect_op(";")
            return ast.Let(name, value, annotation, tok.pos)
        if tok.is_kw("for"):
            self.advance()
            var = self.expect_ident("loop variable").text
            self.expect_kw("in")
            iterable = self.expr()
            body = self.block()
            return ast.For(var, iterable, body, tok.pos)
        if tok.is_kw("if"):
            return self.if_statement()
        if tok.is_kw("return"):
            self.advance()
            value = self.expr()
            self.expect_op(";")
            return ast.Return(value, tok.pos)
        if tok.is_kw("type"):
            self.fail("statement")
        expr = self.expr()
        if self.tok.is_op("=", "+=", "-="):
            op = self.advance().text
            target = self._lvalue(expr, tok)
            value = self.expr()
            if op != "=":
                value = ast.Binary(op[0], _lvalue_expr(target, tok.pos), value, tok.pos)
            self.expect_op(";")
            return ast.Assign(target, value, tok.pos)
        self.expect_op(";")
        return ast.ExprStmt(expr, tok.pos)

    def _lvalue(self, expr, start: Token) -> tuple[str, ...]:
        path = []
        while isinstance(expr, ast.FieldAccess):
            path.append(expr.field)
            expr = expr.obj
        if not isinstance(expr, ast.Var):
            raise ParseError(start.pos, ["variable or field path"], "expression")
        return (expr.name, *reversed(path))

    def if_statement(self) -> ast.If:
        tok = self.expect_kw("if")
        cond = self.expr()
        then = self.block()
        orelse: tuple[ast.Stmt, ...] = ()
        if self.tok.is_kw("else"):
            self.advance()
            if self.tok.is_kw("if"):
                orelse = (self.if_statement(),)
            else:
                orelse = self.block()
        return ast.If(cond, then, orelse, tok.pos)

    # -- expressions ------------------------------------------------------

    def expr(self, min_prec: int = 1):
        lhs = self.unary()
        while self.tok.kind == "op" and PRECEDENCE.get(self.tok.text, 0) >= min_prec:
            op_tok = self.advance()
            prec = PRECEDENCE[op_tok.text]
            rhs = self.expr(prec + 1)
            lhs = ast.Binary(op_tok.text, lhs, rhs, op_tok.pos)
        return lhs

    def unary(self):
        tok = self.tok
        if tok.is_op("!"):
            self.advance()
            return ast.Unary("!", self.unary(), tok.pos)
        if tok.is_op("-"):
            self.advance()
            nxt = self.tok
            if nxt.kind in ("int", "float", "money") and not self.peek().is_op("."):
                self.advance()
                return ast.Literal(self._number(nxt, negate=True), tok.pos)
            return ast.Unary("-", self.unary(), tok.pos)
        return self.postfix()

    def _number(self, tok: Token, negate: bool = False):
        if tok.kind == "int":
            value = -tok.value if negate else tok.value
            if not INT_MIN <= value <= INT_MAX:
                raise ParseError(tok.pos, ["64-bit integer"], tok.text)
            return value
        if tok.kind == "float":
            return -tok.value if negate else tok.value
        minor, currency = tok.value
        return Money(-minor if negate else minor, currency)

    def postfix(self):
        node = self.primary()
        while self.tok.is_op("."):
            self.advance()
            name = self.expect_ident("field name")
            node = ast.FieldAccess(node, name.text, name.pos)
        return node

    def primary(self):
        tok = self.tok
        if tok.kind in ("int", "float", "money"):
            self.advance()
            return ast.Literal(self._number(tok), tok.pos)
        if tok.kind == "string":
            self.advance()
            return ast.Literal(tok.value, tok.pos)
        if tok.is_kw("true", "false"):
            self.advance()
            return ast.Literal(tok.text == "true", tok.pos)
        if tok.is_op("("):
            self.advance()
            inner = self.expr()
            self.expect_op(")")
            return inner
        if tok.is_op("["):
            self.advance()
            items = []
            if not self.tok.is_op("]"):
                items.append(self.expr())
                while self.tok.is_op(","):
                    self.advance()
                    items.append(self.expr())
            self.expect_op("]")
            return ast.ListLiteral(tuple(items), tok.pos)
        if tok.is_kw("new"):
            return self.record_literal()
        if tok.kind == "ident":
            self.advance()
            if self.tok.is_op("::"):
                self.advance()
                member = self.expect_ident("verb or type name")
                qname = f"{tok.text}::{member.text}"
                if self.tok.is_op("("):
                    return ast.VerbCall(qname, self.named_args(), tok.pos)
                if self.tok.is_op(".") and self.peek().kind == "ident":
                    self.advance()
                    variant = self.advance()
                    return ast.EnumLiteral(qname, variant.text, tok.pos)
                self.fail("'('", "'.'")
            if self.tok.is_op("("):
                if tok.text not in BUILTINS:
                    raise ParseError(tok.pos, ["builtin name"], repr(tok.text))
                self.advance()
                args = []
                if not self.tok.is_op(")"):
                    args.append(self.expr())
                    while self.tok.is_op(","):
                        self.advance()
                        args.append(self.expr())
                self.expect_op(")")
                return ast.BuiltinCall(tok.text, tuple(args), tok.pos)
            return ast.Var(tok.text, tok.pos)
        self.fail("expression")

    def named_args(self) -> tuple[tuple[str, object], ...]:
        self.expect_op("(")
        args = []
        if not self.tok.is_op(")"):
            while True:
                name = self.expect_ident("argument name").text
                self.expect_op("=")
                args.append((name, self.expr()))
                if self.tok.is_op(","):
                    self.advance()
                    continue
                break
        self.expect_op(")")
        return tuple(args)

    def record_literal(self):
        tok = self.expect_kw("new")
        name = self.expect_ident("type name").text
        if self.tok.is_op("::"):
            self.advance()
            name = f"{name}::{self.expect_ident('type name').text}"
        self.expect_op("{")
        fields = []
        if not self.tok.is_op("}"):
            while True:
                fname = self.expect_ident("field name").text
                self.expect_op("=")
                fields.append((fname, self.expr()))
                if self.tok.is_op(","):
                    self.advance()
                    continue
                break
        self.expect_op("}")
        return ast.RecordLiteral(name, tuple(fields), tok.pos)


def _lvalue_expr(target: tuple[str, ...], pos: Pos):
    node = ast.Var(target[0], pos)
    for name in target[1:]:
        node = ast.FieldAccess(node, name, pos)
    return node


def parse_workflow(text: str) -> ast.WorkflowProgram:
    return Parser(text).program()


def parse_expr(text: str):
    """Parse a standalone expression (used for contract predicates)."""
    p = Parser(text)
    node = p.expr()
    if p.tok.kind != "eof":
        p.fail("end of input")
    return node
