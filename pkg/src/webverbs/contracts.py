"""Contract predicates, the policy gate, and the hash-chained audit trace.

Entry hash layout (UTF-8, one ``key=value`` line each, in this order)::

    seq=<decimal>
    verb=<qname>
    binding=<api|browser|none>
    input.<name>=<render_value>        one line per input, in parameter order
    output=<render_value | "absent">
    status=<status>[:<index>]
    detail=<JSON string>
    effect_committed=<true|false>
    primitive_steps=<decimal>
    started=<decimal>
    ended=<decimal>
    prev_hash=<64 hex digits>

``entry_hash`` is SHA-256 over those bytes.  The first entry links to 32
zero bytes.  ``head_hash`` covers the program digest, the sorted grants,
the entry count and the last entry hash, so the trace header is sealed too.

Trace files store values in a self-describing JSON form (see
``typed_to_json``) so hashes can be recomputed without a registry.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from typing import Any

from .types import (
    EnumValue, Money, Record, UNIT_VALUE, ValueParseError, check_value, parse_money, render_value,
)
from .wfl.interp import Interpreter, RuntimeTypeMismatch, WorkflowRuntimeError

GENESIS = bytes(32)
TRACE_FORMAT = "webverbs-trace/1"
STATUSES = ("ok", "policy_denied", "pre_failed", "post_failed", "binding_error")


# -- predicates ------------------------------------------------------------


@dataclass(frozen=True)
class PredicateOutcome:
    holds: bool
    reason: str = ""


def eval_predicate_detail(expr, params: Record, result: Any = None) -> PredicateOutcome:
    interp = Interpreter()
    interp.scopes[0]["params"] = params
    if result is not None:
        interp.scopes[0]["result"] = result
    try:
        value = interp.eval(expr)
    except WorkflowRuntimeError as exc:
        return PredicateOutcome(False, f"{exc.kind}: {exc.message}")
    except RuntimeTypeMismatch as exc:
        return PredicateOutcome(False, f"ill-typed: {exc}")
    if value is not True and value is not False:
        return PredicateOutcome(False, f"predicate produced {render_value(value)}, not a bool")
    return PredicateOutcome(value, "" if value else "predicate is false")


def eval_predicate(expr, params: Record, result: Any = None) -> bool:
    """Dynamic errors count as failure rather than propagating."""
    return eval_predicate_detail(expr, params, result).holds


def check_policy(tags, grants) -> bool:
    return set(tags) <= set(grants)


def params_record(spec, args: dict) -> Record:
    return Record(f"{spec.qname}::params", tuple((n, args[n]) for n, _ in spec.params))


def first_failing(preds, params: Record, result: Any = None) -> tuple[int, str] | None:
    for i, pred in enumerate(preds):
        out = eval_predicate_detail(pred.expr, params, result)
        if not out.holds:
            return i, out.reason
    return None


# -- typed JSON ------------------------------------------------------------


def typed_to_json(v: Any) -> Any:
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, int):
        return v
    if isinstance(v, float):
        return {"$float": repr(v) if math.isfinite(v) else render_value(v)}
    if isinstance(v, Money):
        return {"$money": render_value(v)}
    if isinstance(v, EnumValue):
        return {"$enum": v.type_qname, "variant": v.variant}
    if isinstance(v, tuple):
        return [typed_to_json(x) for x in v]
    if isinstance(v, Record):
        return {"$record": v.type_qname, "fields": {n: typed_to_json(x) for n, x in v.fields}}
    if v is UNIT_VALUE:
        return {"$unit": True}
    raise TypeError(f"not a runtime value: {v!r}")


def typed_from_json(obj: Any) -> Any:
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, list):
        return tuple(typed_from_json(x) for x in obj)
    if isinstance(obj, dict):
        keys = set(obj)
        if keys == {"$float"} and isinstance(obj["$float"], str):
            return float(obj["$float"])
        if keys == {"$money"} and isinstance(obj["$money"], str):
            return parse_money(obj["$money"])
        if keys == {"$enum", "variant"}:
            return EnumValue(obj["$enum"], obj["variant"])
        if keys == {"$record", "fields"} and isinstance(obj["fields"], dict):
            return Record(obj["$record"], tuple((n, typed_from_json(x)) for n, x in obj["fields"].items()))
        if keys == {"$unit"}:
            return UNIT_VALUE
    raise ValueParseError(f"malformed typed value {obj!r}")


# -- audit entries ---------------------------------------------------------


@dataclass(frozen=True)
class AuditEntry:
    seq: int
    verb: str
    binding: str  # "api" | "browser" | "none"
    inputs: tuple  # ((name, value), ...)
    output: Any  # Value, or None when absent
    status: str
    status_index: int | None = None
    detail: str = ""
    effect_committed: bool = False
    primitive_steps: int = 0
    started: int = 0
    ended: int = 0
    prev_hash: bytes = GENESIS
    entry_hash: bytes = b""

    @property
    def status_text(self) -> str:
        return self.status if self.status_index is None else f"{self.status}:{self.status_index}"

    def canonical_bytes(self) -> bytes:
        lines = [
            f"seq={self.seq}",
            f"verb={self.verb}",
            f"binding={self.binding}",
            *[f"input.{n}={render_value(v)}" for n, v in self.inputs],
            f"output={'absent' if self.output is None else render_value(self.output)}",
            f"status={self.status_text}",
            f"detail={json.dumps(self.detail, ensure_ascii=False)}",
            f"effect_committed={'true' if self.effect_committed else 'false'}",
            f"primitive_steps={self.primitive_steps}",
            f"started={self.started}",
            f"ended={self.ended}",
            f"prev_hash={self.prev_hash.hex()}",
        ]
        return ("\n".join(lines) + "\n").encode("utf-8")

    def compute_hash(self) -> bytes:
        return hashlib.sha256(self.canonical_bytes()).digest()


@dataclass(frozen=True)
class AuditTrace:
    program_digest: str
    grants: tuple = ()
    entries: tuple = ()

    @property
    def head_hash(self) -> bytes:
        return compute_head(self.program_digest, self.grants, self.entries)

    def __len__(self):
        return len(self.entries)


def compute_head(program_digest: str, grants, entries) -> bytes:
    last = entries[-1].entry_hash if entries else GENESIS
    text = f"program={program_digest}\ngrants={','.join(sorted(grants))}\nentries={len(entries)}\nlast={last.hex()}\n"
    return hashlib.sha256(text.encode("utf-8")).digest()


def program_digest(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


def new_trace(source: str, grants) -> AuditTrace:
    return AuditTrace(program_digest(source), tuple(sorted(set(grants))), ())


def append_entry(trace: AuditTrace, **fields) -> AuditTrace:
    """Append one entry, assigning seq and linking the hash chain."""
    prev = trace.entries[-1].entry_hash if trace.entries else GENESIS
    seq = len(trace.entries) + 1
    fields.setdefault("inputs", ())
    if isinstance(fields["inputs"], dict):
        fields["inputs"] = tuple(fields["inputs"].items())
    entry = AuditEntry(seq=seq, prev_hash=prev, **fields)
    entry = replace(entry, entry_hash=entry.compute_hash())
    return replace(trace, entries=trace.entries + (entry,))


# -- serialization ---------------------------------------------------------


def entry_to_json(e: AuditEntry) -> dict:
    return {
        "seq": e.seq,
        "verb": e.verb,
        "binding": e.binding,
        "inputs": {n: typed_to_json(v) for n, v in e.inputs},
        "output": typed_to_json(e.output),
        "status": e.status,
        "status_index": e.status_index,
        "detail": e.detail,
        "effect_committed": e.effect_committed,
        "primitive_steps": e.primitive_steps,
        "started": e.started,
        "ended": e.ended,
        "prev_hash": e.prev_hash.hex(),
        "entry_hash": e.entry_hash.hex(),
    }


def trace_to_json(t: AuditTrace) -> dict:
    return {
        "format": TRACE_FORMAT,
        "program_digest": t.program_digest,
        "grants": list(t.grants),
        "entries": [entry_to_json(e) for e in t.entries],
        "head_hash": t.head_hash.hex(),
    }


def dumps_trace(t: AuditTrace) -> str:
    return json.dumps(trace_to_json(t), indent=2, ensure_ascii=False) + "\n"


class TraceFormatError(ValueError):
    pass


_ENTRY_KEYS = list(entry_to_json(AuditEntry(1, "", "none", (), None, "ok")).keys())


def _hex32(s, what) -> bytes:
    if not isinstance(s, str) or len(s) != 64:
        raise TraceFormatError(f"{what} must be 64 hex digits")
    try:
        return bytes.fromhex(s)
    except ValueError:
        raise TraceFormatError(f"{what} must be 64 hex digits") from None


def _entry_from_json(obj) -> AuditEntry:
    if not isinstance(obj, dict) or list(obj) != _ENTRY_KEYS:
        raise TraceFormatError("entry keys differ from the canonical layout")
    ints = ("seq", "primitive_steps", "started", "ended")
    for k in ints:
        if not isinstance(obj[k], int) or isinstance(obj[k], bool):
            raise TraceFormatError(f"{k} must be an integer")
    if obj["status_index"] is not None and (not isinstance(obj["status_index"], int) or isinstance(obj["status_index"], bool)):
        raise TraceFormatError("status_index must be an integer or null")
    if not isinstance(obj["effect_committed"], bool):
        raise TraceFormatError("effect_committed must be a bool")
    if not isinstance(obj["inputs"], dict):
        raise TraceFormatError("inputs must be an object")
    for k in ("verb", "binding", "status", "detail"):
        if not isinstance(obj[k], str):
            raise TraceFormatError(f"{k} must be a string")
    try:
        inputs = tuple((n, typed_from_json(v)) for n, v in obj["inputs"].items())
        output = typed_from_json(obj["output"])
    except (ValueParseError, ValueError, TypeError) as exc:
        raise TraceFormatError(f"bad value: {exc}") from None
    return AuditEntry(
        obj["seq"], obj["verb"], obj["binding"], inputs, output, obj["status"], obj["status_index"],
        obj["detail"], obj["effect_committed"], obj["primitive_steps"], obj["started"], obj["ended"],
        _hex32(obj["prev_hash"], "prev_hash"), _hex32(obj["entry_hash"], "entry_hash"),
    )


@dataclass(frozen=True)
class LoadedTrace:
    trace: AuditTrace
    head_hash: bytes  # as stored


def trace_from_json(doc) -> LoadedTrace:
    keys = ["format", "program_digest", "grants", "entries", "head_hash"]
    if not isinstance(doc, dict) or list(doc) != keys:
        raise TraceFormatError("trace keys differ from the canonical layout")
    if doc["format"] != TRACE_FORMAT:
        raise TraceFormatError(f"unknown trace format {doc['format']!r}")
    if not isinstance(doc["program_digest"], str):
        raise TraceFormatError("program_digest must be a string")
    if not isinstance(doc["grants"], list) or not all(isinstance(g, str) for g in doc["grants"]):
        raise TraceFormatError("grants must be a list of tags")
    if not isinstance(doc["entries"], list):
        raise TraceFormatError("entries must be a list")
    entries = tuple(_entry_from_json(e) for e in doc["entries"])
    trace = AuditTrace(doc["program_digest"], tuple(doc["grants"]), entries)
    return LoadedTrace(trace, _hex32(doc["head_hash"], "head_hash"))


def loads_trace(text: str) -> LoadedTrace:
    try:
        doc = json.loads(text)
    except ValueError as exc:
        raise TraceFormatError(f"invalid JSON: {exc}") from None
    return trace_from_json(doc)


# -- verification ----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    seq: int | None
    kind: str
    message: str

    def __str__(self):
        where = f"entry {self.seq}" if self.seq is not None else "trace"
        return f"{where}: {self.kind}: {self.message}"


def verify_text(text: str, reg) -> list[Violation]:
    """Verify a serialized trace, including byte-level canonical form."""
    try:
        loaded = loads_trace(text)
    except TraceFormatError as exc:
        return [Violation(None, "malformed", str(exc))]
    out = verify_trace(loaded.trace, reg, stored_head=loaded.head_hash)
    if dumps_trace(loaded.trace) != text:
        out.append(Violation(None, "non_canonical", "file bytes differ from the canonical serialization"))
    return out


def verify_trace(trace: AuditTrace, reg, stored_head: bytes | None = None) -> list[Violation]:
    """Chain, ordering, typing, contract replay and policy checks; [] iff clean.

    Raises registry.UnknownVerb when an entry with an intact hash names a
    verb the registry does not know.
    """
    from .registry import UnknownVerb

    out: list[Violation] = []
    prev = GENESIS
    chain_ok: dict[int, bool] = {}
    last_time = None
    for i, e in enumerate(trace.entries):
        ok = True
        if e.seq != i + 1:
            out.append(Violation(e.seq, "seq", f"expected seq {i + 1}, found {e.seq}"))
            ok = False
        if e.prev_hash != prev:
            out.append(Violation(e.seq, "hash_chain", "prev_hash does not match the previous entry hash"))
            ok = False
        if e.compute_hash() != e.entry_hash:
            out.append(Violation(e.seq, "hash_chain", "entry_hash does not match the entry contents"))
            ok = False
        chain_ok[i] = ok
        prev = e.entry_hash
        if e.started > e.ended or (last_time is not None and e.started < last_time):
            out.append(Violation(e.seq, "timestamps", "timestamps go backwards"))
        last_time = e.ended
    if stored_head is not None and stored_head != trace.head_hash:
        out.append(Violation(None, "hash_chain", "head_hash does not seal the recorded header and entries"))
    if list(trace.grants) != sorted(set(trace.grants)):
        out.append(Violation(None, "grants", "grants must be sorted and unique"))

    for i, e in enumerate(trace.entries):
        spec = reg.get_verb(e.verb)
        if spec is None:
            if chain_ok[i]:
                raise UnknownVerb(e.verb)
            continue
        out += _verify_entry(e, spec, trace.grants, is_last=(i == len(trace.entries) - 1))
    return out


def _verify_entry(e: AuditEntry, spec, grants, is_last: bool) -> list[Violation]:
    out: list[Violation] = []

    def bad(kind, msg):
        out.append(Violation(e.seq, kind, msg))

    if e.status not in STATUSES:
        bad("status", f"unknown status {e.status!r}")
        return out
    if (e.status_index is not None) != (e.status in ("pre_failed", "post_failed")):
        bad("status", "status index present on the wrong status")
    if e.status != "ok" and not is_last:
        bad("status", f"run continued after a {e.status} entry")

    # typing
    names = [n for n, _ in e.inputs]
    if names != [n for n, _ in spec.params]:
        bad("input_type", f"inputs {names} do not match parameters {[n for n, _ in spec.params]}")
        return out
    for (n, v), (_, t) in zip(e.inputs, spec.params):
        if not check_value(v, t):
            bad("input_type", f"input {n} = {render_value(v)} is not a {t}")
    has_output = e.status in ("ok", "post_failed")
    if has_output:
        if e.output is None or not check_value(e.output, spec.result):
            bad("output_type", f"output is not a {spec.result}")
    elif e.output is not None:
        bad("output_type", f"{e.status} entry carries an output")
    if out:
        return out

    # policy
    allowed = check_policy(spec.policy_tags, grants)
    if e.status == "policy_denied" and allowed:
        bad("policy", "recorded policy_denied but the grants cover the verb's tags")
    if e.status != "policy_denied" and not allowed:
        missing = ", ".join(sorted(set(spec.policy_tags) - set(grants)))
        bad("policy", f"verb ran without grant(s) {missing}")

    # steps and effects
    side = "side_effecting" in spec.policy_tags
    if e.status in ("policy_denied", "pre_failed"):
        if e.primitive_steps != 0 or e.binding != "none":
            bad("steps", f"{e.status} entry executed {e.primitive_steps} primitive step(s)")
        if e.effect_committed:
            bad("effect", f"{e.status} entry claims a committed effect")
    else:
        if e.binding == "none" and e.status == "binding_error":
            # no usable binding was available; nothing ran
            if e.primitive_steps != 0:
                bad("steps", "entry without a binding recorded primitive steps")
        elif e.binding not in ("api", "browser"):
            bad("binding", f"binding {e.binding!r} is not api or browser")
        elif has_output:
            want = 1 if e.binding == "api" else len(spec.browser.script) if spec.browser else None
            if e.primitive_steps != want:
                bad("steps", f"{e.binding} binding should take {want} step(s), recorded {e.primitive_steps}")
        if e.effect_committed and not side:
            bad("effect", "read_only verb claims a committed effect")
        if has_output and side and not e.effect_committed:
            bad("effect", "side_effecting verb completed without effect_committed")

    # contract replay
    if e.status == "policy_denied":
        return out
    params = params_record(spec, dict(e.inputs))
    pre_fail = first_failing(spec.preconditions, params)
    if e.status == "pre_failed":
        if pre_fail is None or pre_fail[0] != e.status_index:
            bad("contract_replay", f"recorded pre_failed:{e.status_index} but replay gives {_fmt(pre_fail, 'pre')}")
        return out
    if pre_fail is not None:
        bad("contract_replay", f"recorded {e.status_text} but precondition {pre_fail[0]} fails on replay")
        return out
    if not has_output:
        return out
    post_fail = first_failing(spec.postconditions, params, e.output)
    if e.status == "ok" and post_fail is not None:
        bad("contract_replay", f"recorded ok but postcondition {post_fail[0]} fails on replay ({post_fail[1]})")
    if e.status == "post_failed" and (post_fail is None or post_fail[0] != e.status_index):
        bad("contract_replay", f"recorded post_failed:{e.status_index} but replay gives {_fmt(post_fail, 'post')}")
    return out


def _fmt(fail, kind) -> str:
    return "all true" if fail is None else f"{kind}_failed:{fail[0]}"


__all__ = [
    "AuditEntry", "AuditTrace", "GENESIS", "LoadedTrace", "PredicateOutcome", "TraceFormatError",
    "Violation", "append_entry", "check_policy", "dumps_trace", "eval_predicate", "eval_predicate_detail",
    "first_failing", "loads_trace", "new_trace", "params_record", "program_digest", "trace_to_json",
    "typed_from_json", "typed_to_json", "verify_text", "verify_trace",
]
