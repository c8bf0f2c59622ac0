import json

import pytest
from hypothesis import given, settings

from strategies import programs, typed_programs
from conftest import CONFORMANCE
from webverbs.execute import ExecutionContext, IllTypedProgram, RuntimeFault, run
from webverbs.types import INT, ListType, render_value
from webverbs.wfl import ParseError, ast, check_program, parse_expr, parse_workflow, print_expr, print_program

EXPECTED = json.loads((CONFORMANCE / "expected.json").read_text())


def run_source(src, reg, world, grants=("read_only",)):
    ctx = ExecutionContext(reg, world, grants=frozenset(grants))
    return run(parse_workflow(src), ctx)


def runtime_kind(src, reg, world):
    with pytest.raises(RuntimeFault) as ei:
        run_source(src, reg, world)
    return ei.value.kind


# -- printer / parser ------------------------------------------------------


@settings(max_examples=300)
@given(programs)
def test_print_parse_fixed_point(prog):
    text = print_program(prog)
    again = parse_workflow(text)
    assert again == prog
    assert print_program(again) == text


@settings(max_examples=200, deadline=None)
@given(typed_programs())
def test_typed_print_parse_fixed_point(prog):
    text = print_program(prog)
    assert parse_workflow(text) == prog


def test_corpus_files_are_canonical_after_one_print():
    for path in sorted((CONFORMANCE / "valid").glob("*.wfl")):
        once = print_program(parse_workflow(path.read_text()))
        assert print_program(parse_workflow(once)) == once, path.name


@pytest.mark.parametrize("src", ["a - (b - c)", "(a - b) - c", "-(1 + 2) * 3", "!(a && b) || c", "a.b.c + 1"])
def test_expression_round_trip(src):
    e = parse_expr(src)
    assert parse_expr(print_expr(e)) == e


def test_precedence_shapes():
    e = parse_expr("1 + 2 * 3 - 4")
    assert e.op == "-" and e.lhs.op == "+" and e.lhs.rhs.op == "*"
    e = parse_expr("a || b && c == d")
    assert e.op == "||" and e.rhs.op == "&&" and e.rhs.rhs.op == "=="


def test_nested_accumulation_shape():
    prog = parse_workflow((CONFORMANCE / "valid" / "hotel_ranking_loops.wfl").read_text())
    outer = next(s for s in prog.statements if isinstance(s, ast.For))
    inner = next(s for s in outer.body if isinstance(s, ast.For))
    acc = next(s for s in inner.body if isinstance(s, ast.Assign))
    assert (outer.var, inner.var) == ("hotel", "museum")
    assert acc.target == ("totalDistance",)
    assert isinstance(acc.value, ast.Binary) and acc.value.op == "+"
    assert acc.value.lhs == ast.Var("totalDistance")
    assert acc.pos.line == 10


# -- conformance corpus ----------------------------------------------------


@pytest.mark.parametrize("name", sorted(EXPECTED["valid"]))
def test_conformance_valid(name, reg, world):
    src = (CONFORMANCE / "valid" / name).read_text()
    value, trace = run_source(src, reg, world)
    assert render_value(value) == EXPECTED["valid"][name]


@pytest.mark.parametrize("name", sorted(EXPECTED["invalid"]))
def test_conformance_invalid(name, reg):
    src = (CONFORMANCE / "invalid" / name).read_text()
    want = EXPECTED["invalid"][name]
    try:
        prog = parse_workflow(src)
    except ParseError as e:
        assert want["stage"] == "syntax"
        assert [f"{e.pos}: {e.message}"] == want["diagnostics"]
        return
    assert want["stage"] == "type"
    got = [str(err) for err in check_program(prog, reg).errors]
    assert got == want["diagnostics"]


def test_corpus_is_complete():
    on_disk = {p.name for p in (CONFORMANCE / "valid").glob("*.wfl")}
    assert on_disk == set(EXPECTED["valid"])
    on_disk = {p.name for p in (CONFORMANCE / "invalid").glob("*.wfl")}
    assert on_disk == set(EXPECTED["invalid"])


# -- checker ---------------------------------------------------------------


def test_for_over_int(reg):
    [err] = check_program(parse_workflow("for x in 3 {}"), reg).errors
    assert "expected list, found int" in err.message
    assert (err.pos.line, err.pos.col) == (1, 10)


def test_return_type_and_locals(reg):
    res = check_program(parse_workflow("let xs = [1, 2]; return xs;"), reg)
    assert res.ok and res.return_type == ListType(INT)
    assert res.local_types == {}


def test_ill_typed_program_never_runs(reg, world):
    with pytest.raises(IllTypedProgram):
        run_source('return 1 + "a";', reg, world)
    assert world.browser_steps == 0


def test_all_errors_reported(reg):
    res = check_program(parse_workflow('let a: int = "x";\nlet b: string = 1;\nreturn c;'), reg)
    assert [e.pos.line for e in res.errors] == [1, 2, 3]


# -- runtime ---------------------------------------------------------------


@pytest.mark.parametrize("src,kind", [
    ("let z = 0; return 1 / z;", "div_zero"),
    ("let xs: list<workflow::P> = []; return min_by(xs, \"v\");", "empty_extremal"),
    ("return 1.00 USD + 1.00 EUR;", "mixed_currency"),
    ("let m = [1.00 USD, 2.00 NOK]; return sum_money(m);", "mixed_currency"),
    ("let big = 9223372036854775807; return big + 1;", "int_overflow"),
    ("let small = -9223372036854775807; return small - 2;", "int_overflow"),
    ("let m: list<money> = []; return sum_money(m);", "empty_sum"),
])
def test_runtime_errors(src, kind, reg, world):
    src = "type P = { v: int };\n" + src
    assert runtime_kind(src, reg, world) == kind


def test_runtime_error_position(reg, world):
    with pytest.raises(RuntimeFault) as ei:
        run_source("let z = 0;\nlet q = 7;\nreturn q / z;", reg, world)
    assert (ei.value.pos.line, ei.value.pos.col) == (3, 10)
    assert "div_zero" in ei.value.describe()


@pytest.mark.parametrize("src,want", [
    ("return -7 / 2;", "-3"),
    ("return 7 / -2;", "-3"),
    ("let none: list<int> = []; return sum(none);", "0"),
    ("return 2 + 3 * 4 - 1;", "13"),
    ("return 1.50 USD - 2.00 USD;", "-0.50 USD"),
    ("return range(2, 5);", "[2, 3, 4]"),
    ("return range(5, 2);", "[]"),
    ('return concat("ab", "c");', '"abc"'),
    ("return cartesian([[1, 2], [3]]);", "[[1, 3], [2, 3]]"),
    ("let xs: list<list<int>> = []; return cartesian(xs);", "[[]]"),
    ("return 1.00 USD < 1.01 USD;", "true"),
    ('return "b" > "a";', "true"),
])
def test_evaluation(src, want, reg, world):
    value, _ = run_source(src, reg, world)
    assert render_value(value) == want


STABLE = """
type P = { k: int, tag: string };
let xs = [new P { k = 2, tag = "a" }, new P { k = 1, tag = "b" }, new P { k = 2, tag = "c" }, new P { k = 1, tag = "d" }];
"""


@pytest.mark.parametrize("tail,want", [
    ('return map_field(sort_by(xs, "k"), "tag");', '["b", "d", "a", "c"]'),
    ('return map_field(sort_by_desc(xs, "k"), "tag");', '["a", "c", "b", "d"]'),
    ('return min_by(xs, "k").tag;', '"b"'),
    ('return max_by(xs, "k").tag;', '"a"'),
])
def test_stability_and_first_extremal(tail, want, reg, world):
    value, _ = run_source(STABLE + tail, reg, world)
    assert render_value(value) == want


def test_short_circuit_skips_division(reg, world):
    value, _ = run_source("let z = 0; return z == 0 || 1 / z > 0;", reg, world)
    assert value is True


def test_local_records_are_values(reg, world):
    src = """
type P = { k: int, tag: string };
let a = new P { k = 1, tag = "x" };
let b = a;
b.k = 5;
return [a.k, b.k];
"""
    value, _ = run_source(src, reg, world)
    assert value == (1, 5)


def test_no_return_is_unit(reg, world):
    value, trace = run_source("let a = 1;", reg, world)
    assert render_value(value) == "unit"
    assert len(trace.entries) == 0


def test_cartesian_count_and_order(reg, world):
    src = "let xs = range(0, 3);\nreturn cartesian([xs, xs, xs, xs, xs, xs, xs]);"
    value, _ = run_source(src, reg, world)
    assert len(value) == 3 ** 7 == 2187
    assert list(value) == sorted(value)  # row-major means lexicographic here
    assert value[0] == (0,) * 7 and value[1] == (0,) * 6 + (1,)


@pytest.mark.parametrize("name", ["furniture.wfl", "hotel_ranking.wfl", "furniture_cart.wfl"])
def test_case_study_programs_check(reg, suite_dir, name):
    prog = parse_workflow((suite_dir / "workflows" / name).read_text())
    assert check_program(prog, reg).errors == []
