"""Duplicate detection and merging within a record set.

Two records are duplicates when their normalized titles agree (strict mode)
or have token-Jaccard similarity at or above a threshold (fuzzy mode), and,
unless disabled, their first authors share a surname. Abstracts are not
compared because databases frequently carry different abstracts for the
same paper. The pairwise relation is closed transitively into clusters.
"""
from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

from .records import BibRecord, RecordSet, _union_ordered, make_record_set
from .text import normalize_title, surname

__all__ = [
    "DedupMode",
    "DedupPolicy",
    "DedupReport",
    "dedup",
    "normalize_title",
    "title_similarity",
]


class DedupMode(str, Enum):
    STRICT = "strict"
    FUZZY = "fuzzy"


@dataclass(frozen=True)
class DedupPolicy:
    mode: DedupMode = DedupMode.STRICT
    title_similarity_threshold: float = 0.90
    require_author_match: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", DedupMode(self.mode))
        if not 0.0 <= self.title_similarity_threshold <= 1.0:
            raise ValueError("title_similarity_threshold must lie in [0, 1]")

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "title_similarity_threshold": self.title_similarity_threshold,
            "require_author_match": self.require_author_match,
        }


@dataclass(frozen=True)
class DedupReport:
    clusters: tuple[tuple[str, ...], ...]
    survivors: dict[str, str]  # smallest member id of a cluster -> survivor id
    removed_count: int
    # pairs with title similarity at or above the threshold that were either
    # merged without identical titles or kept apart by the author check
    near_duplicates: tuple[tuple[str, str, float], ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return {
            "clusters": [
                {"members": list(c), "survivor": self.survivors[c[0]]} for c in self.clusters
            ],
            "removed_count": self.removed_count,
            "near_duplicates_for_review": [
                {"a": a, "b": b, "title_similarity": round(s, 4)} for a, b, s in self.near_duplicates
            ],
        }


def title_similarity(a: str, b: str) -> float:
    """Jaccard similarity of the token sets of two normalized titles."""
    ta, tb = set(normalize_title(a).split()), set(normalize_title(b).split())
    if not ta and not tb:
        return 1.0
    return len(ta & tb) / len(ta | tb)


class _UnionFind:
    def __init__(self, items: Iterable[str]):
        self.parent = {x: x for x in items}

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller id becomes root so the structure is order independent
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def _candidate_pairs(token_sets: dict[str, frozenset[str]], threshold: float) -> list[tuple[str, str]]:
    """Id pairs (sorted, lo < hi) that may reach ``threshold`` Jaccard similarity.

    Uses prefix filtering: with tokens ordered by ascending document
    frequency, two sets with Jaccard >= t must share a token within the first
    ``|x| - ceil(t*|x|) + 1`` tokens of each.
    """
    ids = sorted(token_sets)
    if threshold <= 0.0:
        return [(a, b) for i, a in enumerate(ids) for b in ids[i + 1 :]]
    freq: dict[str, int] = defaultdict(int)
    for toks in token_sets.values():
        for t in toks:
            freq[t] += 1
    empties = [i for i in ids if not token_sets[i]]
    pairs = {(a, b) for i, a in enumerate(empties) for b in empties[i + 1 :]}
    index: dict[str, list[str]] = defaultdict(list)
    for rid in ids:
        toks = sorted(token_sets[rid], key=lambda t: (freq[t], t))
        if not toks:
            continue
        prefix = len(toks) - math.ceil(threshold * len(toks) - 1e-9) + 1
        for t in toks[:prefix]:
            for other in index[t]:
                pairs.add((other, rid) if other < rid else (rid, other))
            index[t].append(rid)
    return sorted(pairs)


def _authors_agree(a: BibRecord, b: BibRecord) -> bool:
    sa = surname(a.first_author) if a.first_author else ""
    sb = surname(b.first_author) if b.first_author else ""
    return sa == sb


def _pick_survivor(members: list[BibRecord]) -> BibRecord:
    return min(members, key=lambda r: (-r.filled_field_count(), r.record_id))


def _absorb(survivor: BibRecord, others: list[BibRecord]) -> BibRecord:
    keywords = survivor.keywords
    subjects = set(survivor.subject_areas)
    sources = set(survivor.source_databases)
    for other in sorted(others, key=lambda r: r.record_id):
        keywords = _union_ordered(keywords, other.keywords)
        subjects |= other.subject_areas
        sources |= other.source_databases
    return replace(
        survivor,
        keywords=keywords,
        subject_areas=frozenset(subjects),
        source_databases=frozenset(sources),
    )


def dedup(
    records: RecordSet | Iterable[BibRecord], policy: DedupPolicy | None = None
) -> tuple[RecordSet, DedupReport]:
    """Collapse duplicate records; returns the reduced set and a report."""
    policy = policy or DedupPolicy()
    if not isinstance(records, RecordSet):
        records = make_record_set("deduplicated", records)
    recs = list(records)
    uf = _UnionFind(r.record_id for r in recs)
    near: list[tuple[str, str, float]] = []
    threshold = policy.title_similarity_threshold

    if policy.mode is DedupMode.STRICT:
        groups: dict[tuple[str, str], list[BibRecord]] = defaultdict(list)
        for r in recs:
            key_author = surname(r.first_author) if (policy.require_author_match and r.first_author) else ""
            groups[(normalize_title(r.title), key_author)].append(r)
        for members in groups.values():
            for other in members[1:]:
                uf.union(members[0].record_id, other.record_id)

    norm = {r.record_id: normalize_title(r.title) for r in recs}
    token_sets = {rid: frozenset(t.split()) for rid, t in norm.items()}
    by_id = {r.record_id: r for r in recs}
    for ida, idb in _candidate_pairs(token_sets, threshold):
        ta, tb = token_sets[ida], token_sets[idb]
        sim = 1.0 if not (ta or tb) else len(ta & tb) / len(ta | tb)
        if sim < threshold:
            continue
        if policy.require_author_match and not _authors_agree(by_id[ida], by_id[idb]):
            # similar titles, different first authors: never merged, worth a look
            near.append((ida, idb, sim))
            continue
        if sim < 1.0 or (policy.mode is DedupMode.STRICT and norm[ida] != norm[idb]):
            near.append((ida, idb, sim))
        if policy.mode is DedupMode.FUZZY:
            uf.union(ida, idb)

    by_root: dict[str, list[BibRecord]] = defaultdict(list)
    for r in recs:
        by_root[uf.find(r.record_id)].append(r)

    kept: list[BibRecord] = []
    clusters: list[tuple[str, ...]] = []
    survivors: dict[str, str] = {}
    removed = 0
    for members in by_root.values():
        if len(members) == 1:
            kept.append(members[0])
            continue
        survivor = _pick_survivor(members)
        others = [m for m in members if m.record_id != survivor.record_id]
        kept.append(_absorb(survivor, others))
        ids = tuple(sorted(m.record_id for m in members))
        clusters.append(ids)
        survivors[ids[0]] = survivor.record_id
        removed += len(members) - 1

    clusters.sort()
    result = RecordSet(
        name=records.name,
        records=tuple(kept),
        search_config=records.search_config,
        created_date=records.created_date,
    )
    report = DedupReport(
        clusters=tuple(clusters),
        survivors=survivors,
        removed_count=removed,
        near_duplicates=tuple(sorted(near)),
    )
    return result, report
