import itertools
import json
import shutil
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from webverbs.suite import (
    FURNITURE_BUDGET, Infeasible, MissingPair, SITE_PACK, bench, furniture_from_pack, greedy_furniture,
    hotel_ranking_from_pack, load_suite, oracle_furniture, oracle_hotel_ranking, read_catalog, strip_timing,
)
from webverbs.types import Money

ROOT = SITE_PACK.parents[3]


# -- hotel ranking oracle --------------------------------------------------


def test_hotel_ranking_on_pack():
    assert hotel_ranking_from_pack() == [
        ("Midnight Sun Suites", 26780), ("Glacier Inn", 33020), ("Hotel Aurora", 33280),
        ("Spruce Hotel", 37440), ("Harbor Lodge", 41340),
    ]


def test_hotel_ranking_edges():
    rows = [{"from": "B", "to": "M", "distance_meters": 5}, {"from": "A", "to": "M", "distance_meters": 5}]
    assert oracle_hotel_ranking(rows, ["B", "A"], []) == [("A", 0), ("B", 0)]
    assert oracle_hotel_ranking(rows, ["B", "A"], ["M"]) == [("A", 5), ("B", 5)]
    assert oracle_hotel_ranking(rows, ["B"], ["M"]) == [("B", 5)]
    with pytest.raises(MissingPair) as ei:
        oracle_hotel_ranking(rows, ["A", "C"], ["M"])
    assert (ei.value.hotel, ei.value.museum) == ("C", "M")


@given(st.permutations(range(5)), st.permutations(range(3)))
def test_hotel_ranking_order_independent(hp, mp):
    hotels = [f"h{i}" for i in range(5)]
    museums = [f"m{j}" for j in range(3)]
    rows = [{"from": h, "to": m, "distance_meters": (7 * i + 3 * j) % 11}
            for i, h in enumerate(hotels) for j, m in enumerate(museums)]
    base = oracle_hotel_ranking(rows, hotels, museums)
    assert oracle_hotel_ranking(rows, [hotels[i] for i in hp], [museums[j] for j in mp]) == base


# -- furniture oracle ------------------------------------------------------


def test_furniture_on_pack():
    c = furniture_from_pack()
    assert c.product_ids == ("desk-oak", "chair-mesh", "lamp-arc", "bookshelf-ladder", "rug-jute",
                             "side-table-oak", "cabinet-filing")
    assert c.total_cost == Money(97300, "USD") and c.total_rating == 300
    greedy = greedy_furniture(read_catalog(SITE_PACK, "shopmart_example", "products"))
    assert greedy.total_cost.amount_minor > FURNITURE_BUDGET.amount_minor  # greedy overshoots


def _cheapest_total(products, cats):
    return sum(min(int(p["price"].split()[0].replace(".", "")) for p in products if p["category"] == c) for c in cats)


def test_furniture_budget_edges():
    products = read_catalog(SITE_PACK, "shopmart_example", "products")
    floor = _cheapest_total(products, ("desk", "chair", "lamp", "bookshelf", "rug", "side_table", "cabinet"))
    assert furniture_from_pack(budget=Money(floor, "USD")).total_cost == Money(floor, "USD")
    with pytest.raises(Infeasible):
        furniture_from_pack(budget=Money(floor - 1, "USD"))
    with pytest.raises(Infeasible):
        furniture_from_pack(budget=Money(0, "USD"))


catalog_rows = st.lists(
    st.tuples(st.sampled_from("abc"), st.integers(1, 50), st.integers(0, 9)), min_size=1, max_size=9,
)


@given(catalog_rows, st.integers(0, 150))
def test_furniture_matches_independent_search(rows, budget):
    cats = sorted({c for c, _, _ in rows})
    products = [{"product_id": f"p{i}", "category": c, "price": f"{p}.00 USD", "rating_x10": r}
                for i, (c, p, r) in enumerate(rows)]
    # independent: enumerate every feasible pick, best score, earliest in row-major order
    groups = [[p for p in products if p["category"] == c] for c in cats]
    feasible = [combo for combo in itertools.product(*groups)
                if sum(int(p["price"][:-7]) * 100 for p in combo) <= budget * 100]
    try:
        got = oracle_furniture(products, Money(budget * 100, "USD"), cats)
    except Infeasible:
        assert not feasible
        return
    best = max(sum(p["rating_x10"] for p in c) for c in feasible)
    first = next(c for c in feasible if sum(p["rating_x10"] for p in c) == best)
    assert got.product_ids == tuple(p["product_id"] for p in first)
    assert got.total_rating == best


# -- suite and bench -------------------------------------------------------


def test_suite_loads(suite_dir):
    tasks = load_suite(suite_dir)
    assert len(tasks) == 27
    assert {t.oracle for t in tasks} == {None, "hotel_ranking", "furniture"}
    for t in tasks:
        assert t.workflow.exists() and t.expected.exists()


def test_bench_all_pass(reg, suite_dir):
    report = bench(load_suite(suite_dir), reg)
    assert report["summary"]["failed"] == 0, [t for t in report["tasks"] if t["failures"]]
    assert report["summary"]["min_compression_ratio"] >= 3
    again = bench(load_suite(suite_dir), reg)
    assert strip_timing(again) == strip_timing(report)


def test_bench_catches_wrong_expected(reg, suite_dir, tmp_path):
    copy = tmp_path / "suite"
    shutil.copytree(suite_dir, copy)
    path = copy / "expected" / "directions_single.json"
    doc = json.loads(path.read_text())
    doc["fields"]["distance_meters"] += 1
    path.write_text(json.dumps(doc))
    tasks = [t for t in load_suite(copy) if t.id in ("directions_single", "forecast_single")]
    report = bench(tasks, reg)
    status = {t["id"]: t["status"] for t in report["tasks"]}
    assert status == {"directions_single": "fail", "forecast_single": "pass"}


def test_load_suite_rejects_unknown_oracle(suite_dir, tmp_path):
    copy = tmp_path / "suite"
    shutil.copytree(suite_dir, copy)
    doc = json.loads((copy / "tasks.json").read_text())
    doc["tasks"][0]["oracle"] = "psychic"
    (copy / "tasks.json").write_text(json.dumps(doc))
    with pytest.raises(ValueError):
        load_suite(copy)


def test_frozen_expectations_are_current():
    proc = subprocess.run([sys.executable, str(ROOT / "scripts" / "freeze_expected.py"), "--check"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
