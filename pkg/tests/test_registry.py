import json
import math
import threading

import pytest
from hypothesis import given, settings, strategies as st

from webverbs.idl import load_manifest
from webverbs.registry import DuplicateQname, Registry, UnknownVerb, ingest_manifest, load_registry, tokenize
from webverbs.suite import MANIFESTS


def tiny_manifest(site, docs):
    verbs = [{
        "name": name, "doc": doc, "params": [], "result": "Out", "policy": ["read_only"],
        "bindings": {"api": {"method": "GET", "path": "/" + name, "response_map": {"n": "n"}}},
    } for name, doc in docs.items()]
    doc = {"site": {"id": site, "name": site, "category": "other"},
           "types": [{"name": "Out", "kind": "record", "fields": [{"name": "n", "type": "int"}]}],
           "verbs": verbs}
    return load_manifest(json.dumps(doc), f"{site}.verbs.json")


@pytest.fixture
def tiny():
    return ingest_manifest(Registry(), tiny_manifest("s", {"a": "red fish", "b": "red red cat", "c": "dog"}))


def test_hand_computed_scores(tiny):
    # tokens: s::a -> {s, a, red, fish}; s::b -> {s, b, red x2, cat}; s::c -> {s, c, dog}
    # N = 3, df(red) = 2, df(fish) = 1
    got = tiny.search("red fish", k=5)
    assert [q for q, _ in got] == ["s::a", "s::b"]
    assert got[0][1] == pytest.approx(math.log(2.5) + math.log(4))
    assert got[1][1] == pytest.approx(2 * math.log(2.5))


def test_shared_token_everywhere_still_counts(tiny):
    # "s" appears in every verb, idf = ln 2, ties broken by qname
    got = tiny.search("s", k=2)
    assert got == [("s::a", pytest.approx(math.log(2))), ("s::b", pytest.approx(math.log(2)))]


def test_no_match(tiny):
    assert tiny.search("zebra") == []
    assert tiny.search("") == []


def test_k_must_be_positive(tiny):
    with pytest.raises(ValueError):
        tiny.search("red", k=0)


def test_directions_query(reg):
    got = reg.search("directions between two locations", k=3)
    assert got[0][0] == "maps_example::get_direction"
    # between, two, locations each occur once in one verb out of 12; "directions" matches nothing
    assert got[0][1] == pytest.approx(3 * math.log(1 + 12 / 1))


@pytest.mark.parametrize("qname", sorted(load_registry([MANIFESTS]).verbs))
def test_self_retrieval(reg, qname):
    assert reg.search(reg.lookup(qname).doc, k=1)[0][0] == qname


def test_tokenize():
    assert tokenize("Get_Direction: 2 Cities!") == ["get", "direction", "2", "cities"]


@settings(max_examples=60)
@given(st.permutations(tokenize("find books by genre and hotel reviews near a museum")))
def test_query_permutation_invariant(reg, words):
    base = reg.search("find books by genre and hotel reviews near a museum", k=12)
    got = reg.search(" ".join(words), k=12)
    assert [q for q, _ in got] == [q for q, _ in base]
    assert [s for _, s in got] == pytest.approx([s for _, s in base])


def test_lookup_and_unknown(reg):
    assert reg.lookup("maps_example::get_direction").qname == "maps_example::get_direction"
    with pytest.raises(UnknownVerb) as ei:
        reg.lookup("maps_example::get_directions")
    assert isinstance(ei.value, KeyError)
    assert "get_directions" in str(ei.value)


def test_duplicate_qname(tiny):
    with pytest.raises(DuplicateQname) as ei:
        ingest_manifest(tiny, tiny_manifest("s", {"b": "again"}))
    assert "s::b" in str(ei.value)
    assert "s.verbs.json" in str(ei.value)


def test_ingest_is_persistent(tiny):
    before = tiny.search("red")
    bigger = ingest_manifest(tiny, tiny_manifest("t", {"red": "red red red"}))
    assert len(tiny) == 3 and len(bigger) == 4
    assert tiny.search("red") == before
    assert bigger.search("red")[0][0] == "t::red"


def test_registry_types_and_sites(reg):
    assert reg.get_type("maps_example::DirectionResult") is reg.get_verb("maps_example::get_direction").result
    assert reg.sites["maps_example"].category == "travel"
    assert len(reg) == 12


def test_concurrent_readers_and_writer(tiny):
    snapshots = [tiny]
    errors = []
    expected = tiny.search("red fish")

    def writer():
        cur = tiny
        for i in range(50):
            cur = ingest_manifest(cur, tiny_manifest(f"w{i}", {"v": "red fish"}))
            snapshots.append(cur)

    def reader():
        try:
            for _ in range(200):
                assert tiny.search("red fish") == expected
                latest = snapshots[-1]
                hits = latest.search("fish", k=100)
                assert len(hits) == len(latest) - 2  # every verb except s::b and s::c
        except AssertionError as e:  # pragma: no cover
            errors.append(e)

    threads = [threading.Thread(target=writer)] + [threading.Thread(target=reader) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert len(snapshots[-1]) == 53
