"""Global verb namespace with lexical TF-IDF retrieval over verb docs.

A Registry is an immutable snapshot: ``ingest`` returns a new registry and
never touches the old one, so any number of threads can read a snapshot
while a single writer builds the next one.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .idl import Manifest, SiteMeta, VerbSpec, load_manifest_file
from .types import EnumType, RecordType, TypeExpr, iter_named_types

TOKEN_RE = re.compile(r"[a-z0-9]+")


class RegistryError(Exception):
    pass


class DuplicateQname(RegistryError):
    def __init__(self, qname: str, first: str, second: str):
        self.qname = qname
        super().__init__(f"duplicate verb {qname}: declared at {first} and again at {second}")


class UnknownVerb(RegistryError, KeyError):
    def __init__(self, qname: str):
        self.qname = qname
        super().__init__(f"unknown verb {qname!r}")

    def __str__(self):
        return self.args[0]


def tokenize(text: str) -> list[str]:
    return TOKEN_RE.findall(text.lower())


def _where(spec: VerbSpec) -> str:
    return f"{spec.source_file or '<memory>'}:{spec.pos.line}:{spec.pos.col}"


@dataclass(frozen=True)
class Registry:
    verbs: dict = field(default_factory=dict)  # qname -> VerbSpec
    sites: dict = field(default_factory=dict)  # site_id -> SiteMeta
    types: dict = field(default_factory=dict)  # qname -> RecordType | EnumType
    # inverted index: token -> {qname: term count}
    index: dict = field(default_factory=dict, repr=False)

    def __len__(self):
        return len(self.verbs)

    # protocol used by the workflow checker and interpreter
    def get_verb(self, qname: str) -> VerbSpec | None:
        return self.verbs.get(qname)

    def get_type(self, qname: str) -> TypeExpr | None:
        return self.types.get(qname)

    def lookup(self, qname: str) -> VerbSpec:
        return lookup(self, qname)

    def search(self, query: str, k: int = 5):
        return search(self, query, k)

    def ingest(self, specs: Iterable[VerbSpec], types: Iterable[TypeExpr] = ()) -> "Registry":
        return ingest(self, specs, types)


def _verb_tokens(spec: VerbSpec) -> Counter:
    return Counter(tokenize(spec.doc) + tokenize(spec.qname))


def ingest(reg: Registry, specs: Iterable[VerbSpec], types: Iterable[TypeExpr] = ()) -> Registry:
    specs = list(specs)
    verbs = dict(reg.verbs)
    sites = dict(reg.sites)
    all_types = dict(reg.types)
    index = {tok: dict(post) for tok, post in reg.index.items()}
    for spec in specs:
        if spec.qname in verbs:
            raise DuplicateQname(spec.qname, _where(verbs[spec.qname]), _where(spec))
        verbs[spec.qname] = spec
        site = spec.site or SiteMeta(spec.site_id, spec.site_id, "other")
        sites.setdefault(site.site_id, site)
        for tok, n in _verb_tokens(spec).items():
            index.setdefault(tok, {})[spec.qname] = n
        for t in (*[pt for _, pt in spec.params], spec.result):
            for named in iter_named_types(t):
                if isinstance(named, (RecordType, EnumType)):
                    all_types.setdefault(named.qname, named)
    for t in types:
        all_types.setdefault(t.qname, t)
    return Registry(verbs, sites, all_types, index)


def ingest_manifest(reg: Registry, manifest: Manifest) -> Registry:
    new = ingest(reg, manifest.verbs, manifest.types)
    if manifest.site.site_id:
        new.sites.setdefault(manifest.site.site_id, manifest.site)
    return new


def load_registry(paths: Iterable[str | Path]) -> Registry:
    """Build a registry from manifest files and/or directories of them."""
    files: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            files += sorted(p.glob("*.verbs.json"))
        else:
            files.append(p)
    reg = Registry()
    for f in files:
        reg = ingest_manifest(reg, load_manifest_file(f))
    return reg


def lookup(reg: Registry, qname: str) -> VerbSpec:
    spec = reg.verbs.get(qname)
    if spec is None:
        raise UnknownVerb(qname)
    return spec


def idf(reg: Registry, token: str) -> float:
    df = len(reg.index.get(token, ()))
    if df == 0:
        return 0.0
    return math.log(1 + len(reg.verbs) / df)


def score(reg: Registry, query: str, qname: str) -> float:
    total = 0.0
    for tok in tokenize(query):
        tf = reg.index.get(tok, {}).get(qname, 0)
        if tf:
            total += tf * idf(reg, tok)
    return total


def search(reg: Registry, query: str, k: int = 5) -> list[tuple[str, float]]:
    """Top-k verbs by TF-IDF; ties go to the smaller qname.

    Query tokens are summed with repetition, so a token that appears twice in
    the query counts twice.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scores: dict[str, float] = {}
    for tok in tokenize(query):
        postings = reg.index.get(tok)
        if not postings:
            continue
        w = idf(reg, tok)
        for qname, tf in postings.items():
            scores[qname] = scores.get(qname, 0.0) + tf * w
    ranked = sorted(((q, s) for q, s in scores.items() if s > 0), key=lambda qs: (-qs[1], qs[0]))
    return ranked[:k]
