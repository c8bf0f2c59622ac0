"""Task suite, brute-force case-study oracles and the bench harness.

The oracles read site-pack JSON directly and never touch the verb layer,
so agreement with a workflow run is a genuine cross-check.
"""

from __future__ import annotations

import itertools
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .contracts import AuditTrace, dumps_trace, typed_to_json, verify_trace
from .execute import ExecError, ExecutionContext, TickClock, effective_grants, run
from .mockweb import MockWeb
from .registry import Registry
from .types import Money, parse_money
from .wfl.parser import parse_workflow

DATA_DIR = Path(__file__).parent / "data"
SITE_PACK = DATA_DIR / "sitepack"
MANIFESTS = DATA_DIR / "manifests"
SUITE_DIR = DATA_DIR / "suite"

FURNITURE_CATEGORIES = ("desk", "chair", "lamp", "bookshelf", "rug", "side_table", "cabinet")
FURNITURE_BUDGET = Money(100000, "USD")
BENCH_MODES = ("api_only", "browser_only")


# -- raw catalog access ----------------------------------------------------


def read_catalog(pack_dir, site_id: str, catalog: str) -> list[dict]:
    doc = json.loads((Path(pack_dir) / f"{site_id}.site.json").read_text(encoding="utf-8"))
    return list(doc["catalogs"][catalog]["rows"])


# -- hotel ranking ---------------------------------------------------------


class MissingPair(LookupError):
    def __init__(self, hotel: str, museum: str):
        super().__init__(f"no directions row from {hotel!r} to {museum!r}")
        self.hotel = hotel
        self.museum = museum


def oracle_hotel_ranking(directions: list[dict], hotels: list[str], museums: list[str]) -> list[tuple[str, int]]:
    """[(hotel, total meters)] ascending by total, ties by name."""
    dist = {(r["from"], r["to"]): r["distance_meters"] for r in directions}
    totals = []
    for h in hotels:
        total = 0
        for m in museums:
            if (h, m) not in dist:
                raise MissingPair(h, m)
            total += dist[(h, m)]
        totals.append((h, total))
    return sorted(totals, key=lambda ht: (ht[1], ht[0]))


def hotel_ranking_from_pack(pack_dir=SITE_PACK, location: str = "Anchorage") -> list[tuple[str, int]]:
    entities = read_catalog(pack_dir, "stayfinder_example", "entities")
    pick = lambda kind: [e["name"] for e in entities if e["entity_type"] == kind and e["location"] == location]
    return oracle_hotel_ranking(read_catalog(pack_dir, "maps_example", "directions"), pick("hotel"), pick("museum"))


# -- furniture -------------------------------------------------------------


class Infeasible(ValueError):
    pass


@dataclass(frozen=True)
class FurnitureChoice:
    product_ids: tuple[str, ...]
    total_cost: Money
    total_rating: int


def oracle_furniture(products: list[dict], budget: Money, categories=FURNITURE_CATEGORIES) -> FurnitureChoice:
    """Exhaustive search; the first combination (row-major) with the best rating under budget wins."""
    groups = []
    for c in categories:
        rows = [p for p in products if p["category"] == c]
        if not rows:
            raise ValueError(f"no products in category {c!r}")
        groups.append(rows)
    best = None
    best_score = -1
    best_cost = None
    for combo in itertools.product(*groups):
        prices = [parse_money(p["price"]) if isinstance(p["price"], str) else p["price"] for p in combo]
        if any(m.currency != budget.currency for m in prices):
            raise ValueError("mixed currencies in catalog")
        cost = sum(m.amount_minor for m in prices)
        score = sum(p["rating_x10"] for p in combo)
        if cost <= budget.amount_minor and score > best_score:
            best, best_score, best_cost = combo, score, cost
    if best is None:
        raise Infeasible(f"no combination fits within {budget.amount_minor} minor units")
    return FurnitureChoice(tuple(p["product_id"] for p in best), Money(best_cost, budget.currency), best_score)


def greedy_furniture(products: list[dict], categories=FURNITURE_CATEGORIES) -> FurnitureChoice:
    """Highest-rated item per category; the baseline the budget search must beat."""
    picks = [max((p for p in products if p["category"] == c), key=lambda p: p["rating_x10"]) for c in categories]
    cost = sum(parse_money(p["price"]).amount_minor for p in picks)
    return FurnitureChoice(tuple(p["product_id"] for p in picks), Money(cost, "USD"), sum(p["rating_x10"] for p in picks))


def furniture_from_pack(pack_dir=SITE_PACK, budget: Money = FURNITURE_BUDGET) -> FurnitureChoice:
    # candidate order follows the product listing (price ascending), like the workflow sees it
    rows = sorted(read_catalog(pack_dir, "shopmart_example", "products"), key=lambda p: parse_money(p["price"]).amount_minor)
    return oracle_furniture(rows, budget)


# oracle outputs reduced to plain data, and the matching projection of a workflow value
ORACLES = {
    "hotel_ranking": (
        lambda pack: [list(x) for x in hotel_ranking_from_pack(pack)],
        lambda v: [[r["hotel"], r["total_meters"]] for r in v],
    ),
    "furniture": (
        lambda pack: (lambda c: [list(c.product_ids), c.total_cost.amount_minor, c.total_rating])(furniture_from_pack(pack)),
        lambda v: [list(v["product_ids"]), v["total_cost"].amount_minor, v["total_rating"]],
    ),
}


# -- suite -----------------------------------------------------------------


@dataclass(frozen=True)
class TaskCase:
    id: str
    workflow: Path
    grants: tuple[str, ...]
    expected: Path
    oracle: str | None = None
    tags: tuple[str, ...] = ()
    description: str = ""


def load_suite(suite_dir=SUITE_DIR) -> list[TaskCase]:
    suite_dir = Path(suite_dir)
    doc = json.loads((suite_dir / "tasks.json").read_text(encoding="utf-8"))
    tasks = []
    seen = set()
    for t in doc["tasks"]:
        if t["id"] in seen:
            raise ValueError(f"duplicate task id {t['id']!r}")
        seen.add(t["id"])
        if t.get("oracle") is not None and t["oracle"] not in ORACLES:
            raise ValueError(f"task {t['id']}: unknown oracle {t['oracle']!r}")
        tasks.append(TaskCase(
            t["id"], suite_dir / t["workflow"], tuple(t["grants"]), suite_dir / t["expected"],
            t.get("oracle"), tuple(t.get("tags", ())), t.get("description", ""),
        ))
    return tasks


@dataclass
class ModeRun:
    ok: bool
    value: object = None
    trace: AuditTrace | None = None
    steps: int = 0
    world_steps: int = 0
    error: str = ""
    wall_ms: float = 0.0


def run_task(task: TaskCase, reg: Registry, mode: str, pack_dir=SITE_PACK, transport=None) -> ModeRun:
    """One isolated run: fresh site state, logical clock."""
    source = task.workflow.read_text(encoding="utf-8")
    prog = parse_workflow(source)
    world = MockWeb.from_pack(pack_dir)
    ctx = ExecutionContext(
        reg, world, grants=effective_grants(prog, task.grants), binding_preference=mode,
        transport=transport, clock=TickClock(), session_id=f"bench-{task.id}",
    )
    t0 = time.perf_counter()
    try:
        value, trace = run(prog, ctx)
    except ExecError as exc:
        return ModeRun(False, trace=exc.trace, error=exc.describe(), wall_ms=(time.perf_counter() - t0) * 1000)
    wall = (time.perf_counter() - t0) * 1000
    steps = sum(e.primitive_steps for e in trace.entries)
    return ModeRun(True, value, trace, steps, world.browser_steps, wall_ms=wall)


@dataclass
class TaskResult:
    id: str
    status: str
    verb_calls: int = 0
    primitive_steps_browser: int = 0
    primitive_steps_api: int = 0
    wall_ms: float = 0.0
    compression_ratio: float | None = None
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "id": self.id, "status": self.status, "verb_calls": self.verb_calls,
            "primitive_steps_browser": self.primitive_steps_browser,
            "primitive_steps_api": self.primitive_steps_api,
            "wall_ms": round(self.wall_ms, 3),
            "compression_ratio": None if self.compression_ratio is None else round(self.compression_ratio, 4),
            "failures": self.failures,
        }


def bench_task(task: TaskCase, reg: Registry, pack_dir=SITE_PACK, trace_dir=None) -> TaskResult:
    failures = []
    try:
        expected = json.loads(task.expected.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        expected = None
        failures.append(f"expected file unreadable: {exc}")
    oracle_value = ORACLES[task.oracle][0](pack_dir) if task.oracle else None
    runs = {}
    for mode in BENCH_MODES:
        r = runs[mode] = run_task(task, reg, mode, pack_dir)
        if trace_dir is not None and r.trace is not None:
            Path(trace_dir).mkdir(parents=True, exist_ok=True)
            (Path(trace_dir) / f"{task.id}.{mode}.trace.json").write_text(dumps_trace(r.trace), encoding="utf-8")
        if not r.ok:
            failures.append(f"{mode}: {r.error}")
            continue
        if expected is not None and typed_to_json(r.value) != expected:
            failures.append(f"{mode}: output differs from {task.expected.name}")
        if task.oracle and ORACLES[task.oracle][1](r.value) != oracle_value:
            failures.append(f"{mode}: output differs from oracle {task.oracle}")
        bad = verify_trace(r.trace, reg)
        if bad:
            failures.append(f"{mode}: trace does not verify ({bad[0].kind}: {bad[0].message})")
        if mode == "browser_only" and r.steps != r.world_steps:
            failures.append(f"browser steps in trace ({r.steps}) != executed actions ({r.world_steps})")
    api, browser = runs["api_only"], runs["browser_only"]
    res = TaskResult(task.id, "fail" if failures else "pass", failures=failures,
                     wall_ms=api.wall_ms + browser.wall_ms)
    if api.ok and browser.ok:
        res.verb_calls = len(browser.trace.entries)
        res.primitive_steps_browser = browser.steps
        res.primitive_steps_api = api.steps
    if not failures and res.verb_calls:
        res.compression_ratio = res.primitive_steps_browser / res.verb_calls
    return res


def bench(tasks: list[TaskCase], reg: Registry, pack_dir=SITE_PACK, trace_dir=None) -> dict:
    results = [bench_task(t, reg, pack_dir, trace_dir) for t in tasks]
    passed = sum(r.status == "pass" for r in results)
    ratios = [r.compression_ratio for r in results if r.compression_ratio is not None]
    return {
        "format": "webverbs-bench/1",
        "modes": list(BENCH_MODES),
        "tasks": [r.to_json() for r in results],
        "summary": {
            "tasks": len(results),
            "passed": passed,
            "failed": len(results) - passed,
            "min_compression_ratio": round(min(ratios), 4) if ratios else None,
            "total_verb_calls": sum(r.verb_calls for r in results),
        },
    }


def strip_timing(report: dict) -> dict:
    """The report minus wall-clock fields, for determinism comparisons."""
    out = json.loads(json.dumps(report))
    for t in out["tasks"]:
        t.pop("wall_ms", None)
    return out
