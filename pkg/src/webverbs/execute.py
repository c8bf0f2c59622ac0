"""Run type-checked workflows, dispatching verb calls to API or browser bindings.

``invoke_verb`` is the fixed pipeline for one call: policy gate,
preconditions, binding selection, execution, result typing, postconditions,
trace append.  Every outcome, including failures, lands in the trace before
the error is raised.
"""

from __future__ import annotations

import itertools
import json
import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from typing import Any, Callable
from urllib.parse import quote, unquote, urlencode

from .contracts import AuditTrace, append_entry, check_policy, first_failing, new_trace, params_record
from .idl import VerbSpec
from .mockweb import BrowserError, MockWeb
from .types import (
    EnumValue, Money, TypeErrorBase, ValueParseError, check_value, format_money,
    value_from_json, value_to_json,
)
from .wfl import ast
from .wfl.checker import POLICY_TAGS, check_program
from .wfl.interp import Interpreter, WorkflowRuntimeError

PREFERENCES = ("api_first", "browser_first", "api_only", "browser_only")


# -- errors ----------------------------------------------------------------


class ExecError(Exception):
    """Base for run failures; carries the trace and the failing position."""

    kind = "error"

    def __init__(self, message: str, seq: int | None = None):
        super().__init__(message)
        self.message = message
        self.seq = seq
        self.pos = None
        self.trace: AuditTrace | None = None

    def describe(self) -> str:
        where = f"{self.pos}: " if self.pos is not None else ""
        inv = f" (invocation {self.seq})" if self.seq is not None else ""
        return f"{where}{self.kind}: {self.message}{inv}"


class PolicyError(ExecError):
    kind = "policy"


class ContractError(ExecError):
    kind = "contract"

    def __init__(self, phase: str, index: int, message: str, seq=None):
        super().__init__(message, seq)
        self.phase = phase
        self.index = index


class VerbExecutionError(ExecError):
    kind = "verb_execution"


class BindingUnavailable(VerbExecutionError):
    kind = "binding_unavailable"


class RuntimeFault(ExecError):
    """A dynamic workflow error (div_zero, empty_extremal, mixed_currency, ...)."""

    def __init__(self, err: WorkflowRuntimeError):
        super().__init__(err.message)
        self.kind = err.kind
        self.pos = err.pos


class ArgumentError(ValueError):
    pass


# -- clocks ----------------------------------------------------------------


class TickClock:
    """Logical clock: 1, 2, 3, ... so traces are byte-stable."""

    def __init__(self):
        self._it = itertools.count(1)

    def __call__(self) -> int:
        return next(self._it)


def wall_clock() -> int:
    return time.time_ns() // 1_000_000


# -- transports ------------------------------------------------------------


class InProcessTransport:
    def __init__(self, world: MockWeb):
        self.world = world

    def request(self, site_id, method, path, query: dict, body: dict | None, session_id: str):
        params = dict(query)
        if body:
            params.update(body)
        path = "/".join(unquote(s) for s in path.split("/"))
        return self.world.api(site_id, method, path, params, session_id)


class HttpTransport:
    def __init__(self, base_url: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def request(self, site_id, method, path, query: dict, body: dict | None, session_id: str):
        url = f"{self.base_url}/{quote(site_id)}{path}"
        if query:
            url += "?" + urlencode(query)
        data = json.dumps(body or {}).encode("utf-8") if method == "POST" else None
        req = urllib.request.Request(url, data=data, method=method)
        req.add_header("X-Session", session_id)
        if data is not None:
            req.add_header("Content-Type", "application/json")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                return resp.status, json.loads(resp.read())
        except urllib.error.HTTPError as exc:
            try:
                doc = json.loads(exc.read())
            except ValueError:
                doc = {"error": "http", "message": str(exc)}
            return exc.code, doc


# -- context ---------------------------------------------------------------


@dataclass
class ExecutionContext:
    registry: Any
    world: MockWeb
    grants: frozenset = frozenset({"read_only"})
    binding_preference: str = "api_first"
    transport: Any = None
    clock: Callable[[], int] = field(default_factory=TickClock)
    session_id: str = "default"
    trace: AuditTrace = field(default_factory=lambda: new_trace("", ()))

    def __post_init__(self):
        self.grants = frozenset(self.grants)
        unknown = self.grants - set(POLICY_TAGS)
        if unknown:
            raise ValueError(f"unknown grant(s): {', '.join(sorted(unknown))}")
        if self.binding_preference not in PREFERENCES:
            raise ValueError(f"binding preference must be one of {', '.join(PREFERENCES)}")
        if self.transport is None:
            self.transport = InProcessTransport(self.world)
        if not self.trace.entries:
            self.trace = new_trace("", self.grants)


@dataclass(frozen=True)
class VerbOutcome:
    result: Any
    primitive_steps: int
    binding_used: str
    duration: int  # clock units; milliseconds with the wall clock


def effective_grants(prog: ast.WorkflowProgram, requested=None) -> frozenset:
    """Header grants, narrowed by an explicit request when one is given."""
    header = frozenset(prog.grants)
    return header if requested is None else header & frozenset(requested)


# -- value plumbing --------------------------------------------------------


def to_text(v) -> str:
    """Form/query text for a parameter value."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, str)):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Money):
        return format_money(v)
    if isinstance(v, EnumValue):
        return v.variant
    raise ArgumentError(f"cannot send {v!r} as text")


def _doc_at(doc, path: str):
    if path in ("", "."):
        return doc
    cur = doc
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            raise ValueParseError(f"response has no {path!r}")
        cur = cur[part]
    return cur


def _source_value(src, args):
    return args[src.value] if src.kind == "param" else src.value


class _BindingFailure(Exception):
    def __init__(self, message, steps, committed=False):
        super().__init__(message)
        self.steps = steps
        self.committed = committed


def _run_api(spec: VerbSpec, args: dict, ctx: ExecutionContext):
    api = spec.api
    path = api.path_template
    for name in api.placeholders():
        path = path.replace("{" + name + "}", quote(to_text(args[name]), safe=""))
    query = {n: to_text(_source_value(s, args)) for n, s in api.query}
    body = {n: value_to_json(_source_value(s, args)) for n, s in api.body} if api.method == "POST" else None
    status, doc = ctx.transport.request(spec.site_id, api.method, path, query, body, ctx.session_id)
    if status != 200:
        msg = doc.get("message", "") if isinstance(doc, dict) else ""
        raise _BindingFailure(f"api {api.method} {path} answered {status}: {msg}", 1)
    fields = {}
    try:
        for fname, dpath in api.response_map:
            fields[fname] = _doc_at(doc, dpath)
        return value_from_json(fields, spec.result), 1
    except (ValueParseError, TypeErrorBase) as exc:
        raise _BindingFailure(f"api response does not fit {spec.result}: {exc}", 1) from None


def _run_browser(spec: VerbSpec, args: dict, ctx: ExecutionContext):
    session = ctx.world.browser(spec.site_id, ctx.session_id)
    captures = {}
    try:
        for step in spec.browser.script:
            text = to_text(_source_value(step.source, args)) if step.source is not None else None
            value = session.act(step, text)
            if step.capture:
                captures[step.capture] = value
    except BrowserError as exc:
        raise _BindingFailure(f"browser step {session.steps}: {exc}", session.steps, session.mutations > 0) from None
    try:
        fields = {f: captures[c] for f, c in spec.browser.output_map}
        return value_from_json(fields, spec.result), session.steps
    except (ValueParseError, TypeErrorBase, KeyError) as exc:
        raise _BindingFailure(f"browser captures do not fit {spec.result}: {exc}", session.steps, session.mutations > 0) from None


def _choose_binding(spec: VerbSpec, pref: str) -> str | None:
    has = {"api": spec.api is not None, "browser": spec.browser is not None}
    first, _, mode = pref.partition("_")
    other = "browser" if first == "api" else "api"
    if has[first]:
        return first
    if mode == "first" and has[other]:
        return other
    return None


# -- invocation ------------------------------------------------------------


def invoke_verb(spec: VerbSpec, args: dict, ctx: ExecutionContext) -> VerbOutcome:
    names = [n for n, _ in spec.params]
    if sorted(args) != sorted(names):
        raise ArgumentError(f"{spec.qname} takes ({', '.join(names)}), got ({', '.join(sorted(args))})")
    for n, t in spec.params:
        if not check_value(args[n], t):
            raise ArgumentError(f"{spec.qname}: argument {n} is not a {t}")
    inputs = tuple((n, args[n]) for n in names)
    started = ctx.clock()

    def log(status, *, binding="none", output=None, index=None, detail="", committed=False, steps=0):
        ctx.trace = append_entry(
            ctx.trace, verb=spec.qname, binding=binding, inputs=inputs, output=output, status=status,
            status_index=index, detail=detail, effect_committed=committed, primitive_steps=steps,
            started=started, ended=ctx.clock(),
        )
        return len(ctx.trace.entries)

    # (1) policy
    if not check_policy(spec.policy_tags, ctx.grants):
        missing = ", ".join(sorted(set(spec.policy_tags) - ctx.grants))
        seq = log("policy_denied", detail=f"missing grant(s): {missing}")
        raise PolicyError(f"{spec.qname} needs grant(s) {missing}", seq)

    # (2) preconditions
    params = params_record(spec, args)
    fail = first_failing(spec.preconditions, params)
    if fail is not None:
        i, reason = fail
        seq = log("pre_failed", index=i, detail=f"{spec.preconditions[i].source}: {reason}")
        raise ContractError("pre", i, f"{spec.qname} precondition {i} failed: {spec.preconditions[i].source}", seq)

    # (3) binding selection
    binding = _choose_binding(spec, ctx.binding_preference)
    if binding is None:
        seq = log("binding_error", detail=f"no binding for preference {ctx.binding_preference}")
        raise BindingUnavailable(f"{spec.qname} has no binding usable under {ctx.binding_preference}", seq)

    # (4) execution and (5) typing
    side = "side_effecting" in spec.policy_tags
    try:
        if binding == "api":
            result, steps = _run_api(spec, args, ctx)
        else:
            result, steps = _run_browser(spec, args, ctx)
    except _BindingFailure as exc:
        seq = log("binding_error", binding=binding, detail=str(exc), steps=exc.steps, committed=side and exc.committed)
        raise VerbExecutionError(f"{spec.qname}: {exc}", seq) from None
    if not check_value(result, spec.result):
        seq = log("binding_error", binding=binding, detail="result failed type check", steps=steps, committed=side)
        raise VerbExecutionError(f"{spec.qname}: result is not a {spec.result}", seq)

    # (6) postconditions; effects are not rolled back
    fail = first_failing(spec.postconditions, params, result)
    if fail is not None:
        i, reason = fail
        seq = log("post_failed", binding=binding, output=result, index=i,
                  detail=f"{spec.postconditions[i].source}: {reason}", committed=side, steps=steps)
        raise ContractError("post", i, f"{spec.qname} postcondition {i} failed: {spec.postconditions[i].source}", seq)

    # (7) trace
    log("ok", binding=binding, output=result, committed=side, steps=steps)
    last = ctx.trace.entries[-1]
    return VerbOutcome(result, steps, binding, last.ended - last.started)


# -- programs --------------------------------------------------------------


class IllTypedProgram(ValueError):
    def __init__(self, errors):
        self.errors = errors
        super().__init__("; ".join(f"{e.pos}: {e.message}" for e in errors))


def run(prog: ast.WorkflowProgram, ctx: ExecutionContext):
    """Evaluate ``prog``; returns (value, trace) or raises ExecError with ``.trace`` set."""
    checked = check_program(prog, ctx.registry)
    if checked.errors:
        raise IllTypedProgram(checked.errors)
    ctx.trace = new_trace(prog.source or "", ctx.grants)

    def hook(qname, args, node):
        spec = ctx.registry.lookup(qname)
        try:
            return invoke_verb(spec, args, ctx).result
        except ExecError as exc:
            exc.pos = node.pos
            raise

    interp = Interpreter(types=checked.local_types, verb_hook=hook, type_lookup=ctx.registry.get_type)
    try:
        value = interp.run(prog)
    except WorkflowRuntimeError as exc:
        err = RuntimeFault(exc)
        err.trace = ctx.trace
        raise err from None
    except ExecError as exc:
        exc.trace = ctx.trace
        raise
    return value, ctx.trace
