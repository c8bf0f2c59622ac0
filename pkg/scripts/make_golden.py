"""Regenerate tests/golden: one trace per suite task and mode, plus a locator snapshot.

Traces use the logical clock, so reruns are byte-identical unless the
site pack, manifests or workflows change.

    python3 scripts/make_golden.py
"""

import json
from pathlib import Path

from webverbs.contracts import dumps_trace
from webverbs.mockweb import MockWeb
from webverbs.registry import load_registry
from webverbs.suite import BENCH_MODES, MANIFESTS, SITE_PACK, load_suite, run_task

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"


def locator_snapshot() -> dict:
    world = MockWeb.from_pack(SITE_PACK)
    out = {}
    for site_id, site in sorted(world.sites.items()):
        pages = {}
        for path, page in sorted(site.pages.items()):
            if "{" in path:
                continue
            b = world.browser(site_id, "snapshot")
            b._enter(path)
            pages[path] = b.locators()
        out[site_id] = pages
    return out


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    reg = load_registry([MANIFESTS])
    n = 0
    for task in load_suite():
        for mode in BENCH_MODES:
            r = run_task(task, reg, mode)
            if not r.ok:
                raise SystemExit(f"{task.id} ({mode}) failed: {r.error}")
            (GOLDEN / f"{task.id}.{mode}.trace.json").write_text(dumps_trace(r.trace))
            n += 1
    (GOLDEN / "locators.json").write_text(json.dumps(locator_snapshot(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {n} traces and locators.json to {GOLDEN}")


if __name__ == "__main__":
    main()
