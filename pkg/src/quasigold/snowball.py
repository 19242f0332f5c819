"""One-step forward snowballing over a citation table."""
from __future__ import annotations

import csv
import io
import warnings
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Any

from .metrics import ValidationReport, validate_search
from .records import RecordSet

CITATIONS_HEADER = ("citing_id", "cited_id")


class SnowballError(ValueError):
    pass


class CircularValidationWarning(UserWarning):
    """The snowball seeds overlap the QGS used to validate the snowball sample."""


@dataclass(frozen=True)
class CitationTable:
    edges: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        edges = frozenset((str(a), str(b)) for a, b in self.edges)
        selfs = sorted(a for a, b in edges if a == b)
        if selfs:
            raise SnowballError(f"self-citations are not allowed: {selfs[:5]}")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> CitationTable:
        return cls(frozenset(pairs))

    @classmethod
    def from_csv(cls, stream: IO[str] | str) -> CitationTable:
        text = stream if isinstance(stream, str) else stream.read()
        reader = csv.DictReader(io.StringIO(text.lstrip("﻿")))
        header = [h.strip() for h in (reader.fieldnames or [])]
        if header[:2] != list(CITATIONS_HEADER):
            raise SnowballError(f"citation CSV must start with header {','.join(CITATIONS_HEADER)}, got {header}")
        reader.fieldnames = header
        pairs = []
        for line_no, row in enumerate(reader, start=2):
            a, b = (row.get("citing_id") or "").strip(), (row.get("cited_id") or "").strip()
            if not a or not b:
                raise SnowballError(f"line {line_no}: empty citing_id or cited_id")
            pairs.append((a, b))
        return cls.from_pairs(pairs)

    @classmethod
    def load(cls, path: str | Path) -> CitationTable:
        return cls.from_csv(Path(path).read_text(encoding="utf-8-sig"))

    def to_csv(self) -> str:
        lines = [",".join(CITATIONS_HEADER)] + [f"{a},{b}" for a, b in sorted(self.edges)]
        return "\n".join(lines) + "\n"

    def __len__(self) -> int:
        return len(self.edges)


def forward_snowball(
    seeds: Iterable[str], citations: CitationTable, corpus: RecordSet, name: str | None = None
) -> RecordSet:
    """Records citing any seed, each once, never including a seed."""
    seed_ids = frozenset(seeds)
    unknown = sorted(s for s in seed_ids if s not in corpus)
    if unknown:
        raise SnowballError(f"unknown seed id(s): {unknown[:5]}")
    citing = {a for a, b in citations.edges if b in seed_ids} - seed_ids
    unresolved = sorted(c for c in citing if c not in corpus)
    if unresolved:
        raise SnowballError(
            f"{len(unresolved)} citing id(s) not in corpus {corpus.name!r} (deduplicate first?): {unresolved[:5]}"
        )
    return corpus.subset(citing, name=name or f"forward snowball of {len(seed_ids)} seeds")


def evaluate_snowball(
    snowball_result: RecordSet,
    qgs: Any,
    seeds: Iterable[str] | None = None,
    threshold: Any = None,
) -> ValidationReport:
    """Validate a snowball sample against a QGS.

    When ``seeds`` overlap the QGS the validation is circular; a
    :class:`CircularValidationWarning` is emitted and recorded in the report.
    """
    notes = []
    if seeds is not None:
        qgs_ids = qgs.ids if hasattr(qgs, "ids") else frozenset(qgs)
        shared = frozenset(seeds) & qgs_ids
        if shared:
            msg = (
                f"circular validation: {len(shared)} snowball seed(s) are QGS members; "
                "the QGS must be disjoint from the initial set"
            )
            warnings.warn(msg, CircularValidationWarning, stacklevel=2)
            notes.append(msg)
    return validate_search(qgs, snowball_result, threshold, warnings=notes)
