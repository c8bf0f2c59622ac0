"""webverbs command line: ingest, search, check, run, verify, bench.

Exit codes: 0 success; 1 syntax/type/manifest errors or unreadable input;
2 runtime, contract or policy failure (a failing bench also exits 2).
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import ExitStack
from pathlib import Path

from . import contracts
from .execute import (
    PREFERENCES, ExecError, ExecutionContext, HttpTransport, TickClock, effective_grants, run, wall_clock,
)
from .idl import ManifestError
from .mockweb import DEFAULT_PORT, BackgroundServer, MockWeb, SiteSchemaError
from .registry import RegistryError, load_registry
from .suite import MANIFESTS, SITE_PACK, SUITE_DIR, bench, load_suite, strip_timing
from .types import render_value
from .wfl.checker import POLICY_TAGS, check_program
from .wfl.parser import ParseError, parse_workflow

EXIT_OK, EXIT_STATIC, EXIT_RUNTIME = 0, 1, 2


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _registry(args):
    return load_registry(args.manifests or [MANIFESTS])


def _grants(text: str | None):
    if text is None:
        return None
    tags = {t.strip() for t in text.split(",") if t.strip()}
    bad = tags - set(POLICY_TAGS)
    if bad:
        raise argparse.ArgumentTypeError(f"unknown policy tag(s): {', '.join(sorted(bad))}")
    return frozenset(tags)


def _load_program(path: Path, reg):
    """(prog, exit code); prints positioned diagnostics on failure."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        _err(f"{path}: {exc.strerror}")
        return None, EXIT_STATIC
    try:
        prog = parse_workflow(text)
    except ParseError as exc:
        _err(f"{path}:{exc.pos.line}:{exc.pos.col}: error: {exc.message}")
        return None, EXIT_STATIC
    errors = check_program(prog, reg).errors
    for e in errors:
        _err(f"{path}:{e.pos.line}:{e.pos.col}: error: {e.message}")
    return (None, EXIT_STATIC) if errors else (prog, EXIT_OK)


# -- commands --------------------------------------------------------------


def cmd_ingest(args) -> int:
    try:
        reg = _registry(args)
    except ManifestError as exc:
        for d in exc.diagnostics:
            _err(d.format())
        return EXIT_STATIC
    except RegistryError as exc:
        _err(str(exc))
        return EXIT_STATIC
    for site_id in sorted(reg.sites):
        names = sorted(q for q in reg.verbs if q.startswith(site_id + "::"))
        print(f"{site_id}: {len(names)} verb(s): {', '.join(n.split('::', 1)[1] for n in names)}")
    print(f"{len(reg.verbs)} verbs, {len(reg.index)} index terms")
    if args.site_pack:
        try:
            world = MockWeb.from_pack(args.site_pack)
        except SiteSchemaError as exc:
            _err(str(exc))
            return EXIT_STATIC
        missing = sorted({q.split("::")[0] for q in reg.verbs} - set(world.sites))
        if missing:
            _err(f"no site definition for: {', '.join(missing)}")
            return EXIT_STATIC
        print(f"site pack ok: {len(world.sites)} site(s)")
    return EXIT_OK


def cmd_search(args) -> int:
    reg = _registry(args)
    try:
        hits = reg.search(args.query, args.k)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_STATIC
    for qname, score in hits:
        print(f"{score:8.4f}  {qname}")
    if not hits:
        _err("no matching verbs")
    return EXIT_OK


def cmd_check(args) -> int:
    reg = _registry(args)
    prog, code = _load_program(Path(args.workflow), reg)
    if prog is not None:
        print(f"{args.workflow}: ok")
    return code


def cmd_run(args) -> int:
    reg = _registry(args)
    prog, code = _load_program(Path(args.workflow), reg)
    if prog is None:
        return code
    world = MockWeb.from_pack(args.site_pack or SITE_PACK)
    with ExitStack() as stack:
        transport = None
        if args.port is not None:
            server = stack.enter_context(BackgroundServer(world, "127.0.0.1", args.port))
            transport = HttpTransport(server.base_url)
        ctx = ExecutionContext(
            reg, world, grants=effective_grants(prog, args.grants), binding_preference=args.binding,
            transport=transport, clock=TickClock() if args.logical_clock else wall_clock,
        )
        try:
            value, trace = run(prog, ctx)
        except ExecError as exc:
            _err(f"{args.workflow}:{exc.describe()}")
            _write_trace(args.trace_out, exc.trace)
            return EXIT_RUNTIME
    _write_trace(args.trace_out, trace)
    print(render_value(value))
    return EXIT_OK


def _write_trace(path, trace) -> None:
    if path and trace is not None:
        Path(path).write_text(contracts.dumps_trace(trace), encoding="utf-8")


def cmd_verify(args) -> int:
    reg = _registry(args)
    try:
        text = Path(args.trace).read_text(encoding="utf-8")
    except OSError as exc:
        _err(f"{args.trace}: {exc.strerror}")
        return EXIT_STATIC
    try:
        violations = contracts.verify_text(text, reg)
    except RegistryError as exc:
        _err(f"{args.trace}: {exc}")
        return EXIT_RUNTIME
    for v in violations:
        _err(f"{args.trace}: {v}")
    if not violations:
        print(f"{args.trace}: ok")
    return EXIT_OK if not violations else EXIT_RUNTIME


def cmd_bench(args) -> int:
    reg = _registry(args)
    tasks = load_suite(args.suite)
    pack = args.site_pack or SITE_PACK
    reports = []
    for i in range(args.repeat):
        trace_dir = Path(args.trace_dir) / f"run{i + 1}" if args.trace_dir else None
        reports.append(bench(tasks, reg, pack, trace_dir))
    report = reports[0]
    stable = all(strip_timing(r) == strip_timing(report) for r in reports[1:])
    report["repeat"] = args.repeat
    report["deterministic"] = stable
    print(f"{'task':<24} {'status':<6} {'calls':>5} {'browser':>8} {'api':>5} {'ratio':>7} {'ms':>8}")
    for t in report["tasks"]:
        ratio = "-" if t["compression_ratio"] is None else f"{t['compression_ratio']:.2f}"
        print(f"{t['id']:<24} {t['status']:<6} {t['verb_calls']:>5} {t['primitive_steps_browser']:>8} "
              f"{t['primitive_steps_api']:>5} {ratio:>7} {t['wall_ms']:>8.1f}")
        for f in t["failures"]:
            print(f"    {f}")
    s = report["summary"]
    print(f"{s['passed']}/{s['tasks']} passed; min compression ratio {s['min_compression_ratio']}; "
          f"repeats identical: {stable}")
    Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK if s["failed"] == 0 and stable else EXIT_RUNTIME


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="webverbs", description="Typed web verbs: registry, workflows and audit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifests", action="append", metavar="PATH",
                        help="manifest file or directory (repeatable; default: bundled manifests)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("ingest", parents=[common], help="validate and index manifests")
    s.add_argument("--site-pack", metavar="DIR", help="also load this site pack and check coverage")
    s.set_defaults(func=cmd_ingest)

    s = sub.add_parser("search", parents=[common], help="rank verbs for a query")
    s.add_argument("query")
    s.add_argument("-k", type=int, default=5)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("check", parents=[common], help="parse and type-check a workflow")
    s.add_argument("workflow")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("run", parents=[common], help="run a workflow against the mock web")
    s.add_argument("workflow")
    s.add_argument("--grants", type=_grants, help="comma-separated tags; narrows the workflow's grant header")
    s.add_argument("--binding", choices=PREFERENCES, default="api_first")
    s.add_argument("--trace-out", metavar="FILE")
    s.add_argument("--site-pack", metavar="DIR")
    s.add_argument("--port", type=int, nargs="?", const=DEFAULT_PORT, default=None,
                   help=f"serve the site pack over HTTP and call the API binding through it "
                        f"(default port {DEFAULT_PORT}; 0 picks a free port)")
    s.add_argument("--logical-clock", action="store_true", help="timestamps 1, 2, 3, ... instead of epoch ms")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("verify", parents=[common], help="verify an audit trace")
    s.add_argument("trace")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("bench", parents=[common], help="run the task suite in api_only and browser_only modes")
    s.add_argument("--suite", default=str(SUITE_DIR), metavar="DIR")
    s.add_argument("--site-pack", metavar="DIR")
    s.add_argument("--repeat", type=int, default=1)
    s.add_argument("--report", default="bench_report.json", metavar="FILE")
    s.add_argument("--trace-dir", metavar="DIR", help="write every run's trace here")
    s.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "repeat", 1) < 1:
        _err("--repeat must be at least 1")
        return EXIT_STATIC
    try:
        return args.func(args)
    except ManifestError as exc:
        for d in exc.diagnostics:
            _err(d.format())
        return EXIT_STATIC
    except (RegistryError, SiteSchemaError) as exc:
        _err(str(exc))
        return EXIT_STATIC


if __name__ == "__main__":
    sys.exit(main())
