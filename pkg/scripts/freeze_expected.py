"""Compute every suite task's expected output straight from the site-pack catalogs.

Nothing here goes through manifests, bindings or the workflow interpreter:
each task is re-derived in plain Python and written as typed JSON.  Run
after changing the site pack or a task, then review the diff.

    python3 scripts/freeze_expected.py [--check]
"""

import argparse
import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
PACK = ROOT / "src/webverbs/data/sitepack"
SUITE = ROOT / "src/webverbs/data/suite"


def rows(site, catalog):
    doc = json.loads((PACK / f"{site}.site.json").read_text())
    return doc["catalogs"][catalog]["rows"]


def minor(text):
    amount, cur = text.split()
    whole, frac = amount.split(".")
    assert cur == "USD"
    return int(whole) * 100 + int(frac)


def money(m):
    return {"$money": f"{m // 100}.{m % 100:02d} USD"}


def rec(qname, **fields):
    return {"$record": qname, "fields": fields}


def enum(qname, variant):
    return {"$enum": qname, "variant": variant}


ENT = rows("stayfinder_example", "entities")
DIR = {(r["from"], r["to"]): r for r in rows("maps_example", "directions")}
PROD = rows("shopmart_example", "products")
BOOKS = rows("libshelf_example", "books")
TRACKS = rows("tunebox_example", "tracks")
FC = {r["city"]: r for r in rows("skywatch_example", "forecasts")}
CATS = ["desk", "chair", "lamp", "bookshelf", "rug", "side_table", "cabinet"]


def ask(location, kind):
    hits = [e for e in ENT if location.lower() in e["location"].lower() and e["entity_type"] == kind]
    return sorted(hits, key=lambda e: e["name"])


def products(cat):
    return sorted((p for p in PROD if p["category"] == cat), key=lambda p: (minor(p["price"]), p["name"]))


def entity(e):
    return rec("stayfinder_example::Entity", **{k: e[k] for k in ("name", "entity_type", "location", "rating_x10", "address")})


def product(p):
    return rec("shopmart_example::Product", product_id=p["product_id"], name=p["name"], category=p["category"],
               price=money(minor(p["price"])), rating_x10=p["rating_x10"])


def direction(a, b):
    r = DIR[(a, b)]
    return rec("maps_example::DirectionResult", travel_seconds=r["travel_seconds"], distance_meters=r["distance_meters"],
               distance_display=r["distance_display"], route=list(r["route"]))


def book(b):
    return rec("libshelf_example::Book", **{k: b[k] for k in ("isbn", "title", "author", "genre", "year", "available_copies")})


def books(genre):
    return sorted((b for b in BOOKS if b["genre"] == genre), key=lambda b: (-b["year"], b["isbn"]))


def track(t):
    return rec("tunebox_example::Track", **{k: t[k] for k in ("track_id", "title", "artist", "genre", "duration_seconds", "plays")})


def tracks(artist):
    return sorted((t for t in TRACKS if t["artist"] == artist), key=lambda t: (-t["plays"], t["track_id"]))


def forecast(city):
    r = FC[city]
    return rec("skywatch_example::Forecast", city=city, condition=enum("skywatch_example::Condition", r["condition"]),
               high_c=r["high_c"], low_c=r["low_c"], precip_pct=r["precip_pct"])


class Cart:
    def __init__(self):
        self.lines = []  # [product, qty] in insertion order

    def add(self, pid, qty):
        p = next(p for p in PROD if p["product_id"] == pid)
        for line in self.lines:
            if line[0] is p:
                line[1] += qty
                break
        else:
            self.lines.append([p, qty])
        return rec("shopmart_example::CartUpdate", product_id=pid, quantity=qty,
                   cart_count=self.count(), cart_total=money(self.total()))

    def count(self):
        return sum(q for _, q in self.lines)

    def total(self):
        return sum(minor(p["price"]) * q for p, q in self.lines)

    def view(self):
        lines = [rec("shopmart_example::CartLine", product_id=p["product_id"], name=p["name"], quantity=q,
                     line_total=money(minor(p["price"]) * q)) for p, q in self.lines]
        return rec("shopmart_example::Cart", lines=lines, item_count=self.count(), total=money(self.total()))


def best_furniture():
    import itertools
    best, best_score, best_cost = None, -1, None
    for combo in itertools.product(*[products(c) for c in CATS]):
        cost = sum(minor(p["price"]) for p in combo)
        score = sum(p["rating_x10"] for p in combo)
        if cost <= 100000 and score > best_score:
            best, best_score, best_cost = combo, score, cost
    return best, best_score, best_cost


def t_hotel_ranking():
    hotels = [h["name"] for h in ask("Anchorage", "hotel")]
    museums = [m["name"] for m in ask("Anchorage", "museum")]
    totals = [(h, sum(DIR[(h, m)]["distance_meters"] for m in museums)) for h in hotels]
    totals.sort(key=lambda x: (x[1], x[0]))
    return [rec("workflow::Ranked", hotel=h, total_meters=t) for h, t in totals]


def t_furniture():
    best, score, cost = best_furniture()
    return rec("workflow::Choice", product_ids=[p["product_id"] for p in best], total_cost=money(cost), total_rating=score)


def t_furniture_cart():
    cart = Cart()
    for p in best_furniture()[0]:
        cart.add(p["product_id"], 1)
    return cart.view()


def t_directions_round_trip():
    out, back = DIR[("Glacier Inn", "Science Dome")], DIR[("Science Dome", "Glacier Inn")]
    return rec("workflow::Trip", out_meters=out["distance_meters"], back_meters=back["distance_meters"],
               total_seconds=out["travel_seconds"] + back["travel_seconds"],
               same_distance=out["distance_meters"] == back["distance_meters"])


def t_nearest_museum():
    legs = [(m["name"], DIR[("Harbor Lodge", m["name"])]["distance_meters"]) for m in ask("Anchorage", "museum")]
    name, meters = min(legs, key=lambda x: x[1])  # min() keeps the first on ties
    return rec("workflow::Leg", museum=name, meters=meters)


def t_top_rated_hotel():
    hotels = ask("Anchorage", "hotel") + ask("Fairbanks", "hotel")
    return max(hotels, key=lambda h: h["rating_x10"])["name"]


def t_supplies_budget():
    return money(sum(min(minor(p["price"]) for p in products(c)) for c in CATS))


def t_top_rated_per_category():
    picks = [max(products(c), key=lambda p: p["rating_x10"]) for c in CATS]
    cost = sum(minor(p["price"]) for p in picks)
    return rec("workflow::Greedy", product_ids=[p["product_id"] for p in picks], total_cost=money(cost),
               within_budget=cost <= 100000)


def t_cart_two_items():
    cart = Cart()
    cart.add("lamp-desk", 2)
    last = cart.add("rug-jute", 1)
    view = cart.view()
    return -1 if view["fields"]["total"] != last["fields"]["cart_total"] else view["fields"]["item_count"]


def t_checkout():
    cart = Cart()
    cart.add("chair-mesh", 1)
    cart.add("lamp-clip", 3)
    return rec("shopmart_example::Order", order_id="ord-0001", item_count=cart.count(), total=money(cart.total()))


def t_available_books():
    return [b["title"] for g in ("nature", "science") for b in books(g) if b["available_copies"] > 0]


def t_artist_playtime():
    ts = tracks("The Tidelines")
    total = sum(t["duration_seconds"] for t in ts)
    return rec("workflow::Playtime", tracks=len(ts), minutes=total // 60, seconds=total % 60)


def t_track_details():
    top = tracks("Vanta")[:1]
    return track(max(top, key=lambda t: t["plays"]))


def t_warmest_city():
    return max(["Anchorage", "Seattle", "Honolulu", "Denver", "Phoenix"], key=lambda c: FC[c]["high_c"])


def t_rainy_cities():
    return [c for c in ["Anchorage", "Fairbanks", "Juneau", "Seattle", "Boston"] if FC[c]["condition"] in ("rain", "snow")]


def t_museum_day():
    hotel = max(ask("Anchorage", "hotel"), key=lambda h: h["rating_x10"])
    legs = [(m["name"], DIR[(hotel["name"], m["name"])]["distance_meters"]) for m in ask("Anchorage", "museum")]
    museum, meters = min(legs, key=lambda x: x[1])
    f = FC[hotel["location"]]
    return rec("workflow::Plan", hotel=hotel["name"], museum=museum, meters=meters,
               condition=enum("skywatch_example::Condition", f["condition"]), go=f["precip_pct"] < 50)


def t_reading_playlist():
    return [f"{b['title']} / {t['title']}" for b, t in zip(books("fiction"), tracks("Ola Fen"))]


TASKS = {
    "hotel_ranking": t_hotel_ranking,
    "furniture": t_furniture,
    "furniture_cart": t_furniture_cart,
    "directions_single": lambda: direction("Hotel Aurora", "North Museum"),
    "directions_round_trip": t_directions_round_trip,
    "nearest_museum": t_nearest_museum,
    "ask_hotels": lambda: [h["name"] for h in ask("Anchorage", "hotel")][:10],
    "ask_museum_count": lambda: len(ask("anchorage", "museum")[:20]),
    "entity_lookup": lambda: entity(next(e for e in ENT if e["name"] == "Chena River Hotel")),
    "top_rated_hotel": t_top_rated_hotel,
    "cheapest_desk": lambda: product(min(products("desk"), key=lambda p: minor(p["price"]))),
    "supplies_budget": t_supplies_budget,
    "top_rated_per_category": t_top_rated_per_category,
    "cart_two_items": t_cart_two_items,
    "cart_empty": lambda: Cart().view(),
    "checkout": t_checkout,
    "books_by_genre": lambda: [b["title"] for b in books("science")][:10],
    "book_details": lambda: book(next(b for b in BOOKS if b["isbn"] == "978-0-000006-6")),
    "available_books": t_available_books,
    "tracks_by_artist": lambda: rec("tunebox_example::TrackList", items=[track(t) for t in tracks("Ola Fen")],
                                    count=len(tracks("Ola Fen"))),
    "artist_playtime": t_artist_playtime,
    "track_details": t_track_details,
    "forecast_single": lambda: forecast("Fairbanks"),
    "warmest_city": t_warmest_city,
    "rainy_cities": t_rainy_cities,
    "museum_day": t_museum_day,
    "reading_playlist": t_reading_playlist,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--check", action="store_true", help="compare with committed files instead of writing")
    args = ap.parse_args()
    tasks = json.loads((SUITE / "tasks.json").read_text())["tasks"]
    missing = {t["id"] for t in tasks} - set(TASKS)
    if missing:
        sys.exit(f"no freezer for: {', '.join(sorted(missing))}")
    stale = []
    for t in tasks:
        text = json.dumps(TASKS[t["id"]](), indent=2) + "\n"
        path = SUITE / t["expected"]
        if args.check:
            if not path.exists() or path.read_text() != text:
                stale.append(t["id"])
        else:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
    if stale:
        sys.exit(f"stale expected files: {', '.join(stale)}")
    print(f"{'checked' if args.check else 'wrote'} {len(tasks)} expected files")


if __name__ == "__main__":
    main()
