"""Well-typed programs only fail with declared runtime or execution errors."""

from hypothesis import given, settings

from strategies import typed_programs
from webverbs.contracts import verify_trace
from webverbs.execute import ExecError, ExecutionContext, run
from webverbs.mockweb import MockWeb
from webverbs.types import check_value
from webverbs.wfl import check_program


@settings(max_examples=1000, deadline=None)
@given(prog=typed_programs())
def test_well_typed_programs_do_not_go_wrong(reg, pack_sites, prog):
    checked = check_program(prog, reg)
    assert checked.ok, checked.errors
    ctx = ExecutionContext(reg, MockWeb(list(pack_sites.values())), grants=frozenset({"read_only"}))
    try:
        value, trace = run(prog, ctx)
    except ExecError as e:
        # anything that is not an ExecError (RuntimeTypeMismatch, KeyError, ...) fails the test
        assert e.trace is not None
        assert verify_trace(e.trace, reg) == []
        return
    assert check_value(value, checked.return_type)
    assert verify_trace(trace, reg) == []
