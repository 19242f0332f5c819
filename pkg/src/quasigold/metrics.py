"""Recall, precision, search validation and multi-set overlap regions.

Membership is by ``record_id``; deduplicate before computing any of these.
Percentages are rounded half-up to two decimals.
"""
from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from fractions import Fraction
from itertools import combinations
from typing import Any

from .records import RecordSet

DEFAULT_THRESHOLD = (70.0, 80.0)
MAX_OVERLAP_SETS = 6


class MetricsError(ValueError):
    """Undefined metric (empty denominator) or invalid overlap input."""


class Verdict(str, Enum):
    ACCEPT = "accept"
    REVISE = "revise"


def _ids(items: Any) -> frozenset[str]:
    if isinstance(items, RecordSet):
        return items.ids
    ids = getattr(items, "ids", None)
    if ids is not None:
        return frozenset(ids)
    return frozenset(items)


def percent(fraction: Fraction | float) -> float:
    """Fraction in [0, 1] to a percentage rounded half-up to 2 decimals."""
    if isinstance(fraction, Fraction):
        value = Decimal(fraction.numerator * 100) / Decimal(fraction.denominator)
    else:
        value = Decimal(repr(fraction)) * 100
    return float(value.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def recall_fraction(qgs: Any, result: Any) -> Fraction:
    q = _ids(qgs)
    if not q:
        raise MetricsError("recall is undefined for an empty QGS")
    return Fraction(len(q & _ids(result)), len(q))


def precision_fraction(qgs: Any, result: Any) -> Fraction:
    r = _ids(result)
    if not r:
        raise MetricsError("precision is undefined for an empty result set")
    return Fraction(len(_ids(qgs) & r), len(r))


def recall(qgs: Any, result: Any) -> float:
    """Share of QGS members present in ``result``."""
    return float(recall_fraction(qgs, result))


def precision(qgs: Any, result: Any) -> float:
    """Share of ``result`` that belongs to the QGS."""
    return float(precision_fraction(qgs, result))


@dataclass(frozen=True)
class ValidationReport:
    qgs_size: int
    result_size: int
    found: frozenset[str]
    missed: frozenset[str]
    recall_percent: float
    precision_percent: float | None
    threshold: tuple[float, float]
    verdict: Verdict
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "qgs_size": self.qgs_size,
            "result_size": self.result_size,
            "found_count": len(self.found),
            "missed_count": len(self.missed),
            "found": sorted(self.found),
            "missed": sorted(self.missed),
            "recall_percent": self.recall_percent,
            "precision_percent": self.precision_percent,
            "threshold": list(self.threshold),
            "verdict": self.verdict.value,
            "warnings": list(self.warnings),
        }


def parse_threshold(value: str | float | Sequence[float] | None) -> tuple[float, float]:
    """``70`` -> (70, 80); ``"70,85"`` -> (70, 85). The upper bound never drops below the lower."""
    if value is None:
        return DEFAULT_THRESHOLD
    if isinstance(value, str):
        parts = [float(p) for p in value.split(",") if p.strip()]
    elif isinstance(value, (int, float)):
        parts = [float(value)]
    else:
        parts = [float(p) for p in value]
    if not parts or len(parts) > 2:
        raise MetricsError(f"threshold must be 'low' or 'low,high', got {value!r}")
    low = parts[0]
    high = parts[1] if len(parts) == 2 else max(low, DEFAULT_THRESHOLD[1])
    if not 0 <= low <= high <= 100:
        raise MetricsError(f"threshold must satisfy 0 <= low <= high <= 100, got {low}, {high}")
    return (low, high)


def validate_search(
    qgs: Any,
    result: Any,
    threshold: str | float | Sequence[float] | None = None,
    warnings: Iterable[str] = (),
) -> ValidationReport:
    """Recall/precision of a search result against a QGS and an accept/revise verdict.

    The verdict is ``accept`` iff recall (unrounded) reaches the lower threshold.
    """
    low, high = parse_threshold(threshold)
    q, r = _ids(qgs), _ids(result)
    rec = recall_fraction(q, r)
    found = q & r
    return ValidationReport(
        qgs_size=len(q),
        result_size=len(r),
        found=found,
        missed=q - r,
        recall_percent=percent(rec),
        precision_percent=percent(Fraction(len(found), len(r))) if r else None,
        threshold=(low, high),
        verdict=Verdict.ACCEPT if rec * 100 >= Fraction(low) else Verdict.REVISE,
        warnings=tuple(warnings),
    )


# --------------------------------------------------------------------------
# Overlap
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SourceContribution:
    overall: float
    overlap: float
    exclusive: float


@dataclass(frozen=True)
class OverlapReport:
    """Venn-region counts plus per-set contribution metrics.

    Contributions use the union of all given sets as the reference
    population, since the true set of relevant papers is unknown.
    """

    set_names: tuple[str, ...]
    region_counts: dict[frozenset[str], int]
    union_size: int
    contributions: dict[str, SourceContribution] = field(default_factory=dict)

    def signature_label(self, signature: frozenset[str]) -> str:
        return "&".join(n for n in self.set_names if n in signature)

    def regions(self) -> list[tuple[str, int]]:
        """(label, count) for every non-empty signature, in a stable order."""
        ordered = sorted(
            self.region_counts.items(),
            key=lambda kv: (len(kv[0]), [self.set_names.index(n) for n in self.set_names if n in kv[0]]),
        )
        return [(self.signature_label(sig), count) for sig, count in ordered]

    def to_csv(self) -> str:
        lines = ["signature,count"]
        lines += [f"{label},{count}" for label, count in self.regions()]
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict[str, Any]:
        return {
            "set_names": list(self.set_names),
            "union_size": self.union_size,
            "reference_population": "union of the given sets",
            "regions": [{"signature": label, "count": count} for label, count in self.regions()],
            "contributions": {
                name: {"overall": c.overall, "overlap": c.overlap, "exclusive": c.exclusive}
                for name, c in self.contributions.items()
            },
        }


def overlap(sets: Sequence[RecordSet], names: Sequence[str] | None = None) -> OverlapReport:
    """Count records in exactly each combination of sets (2 to 6 sets)."""
    if len(sets) < 2:
        raise MetricsError("overlap needs at least two sets")
    if len(sets) > MAX_OVERLAP_SETS:
        raise MetricsError(f"overlap supports at most {MAX_OVERLAP_SETS} sets")
    set_names = tuple(names) if names is not None else tuple(s.name for s in sets)
    if len(set(set_names)) != len(set_names):
        raise MetricsError(f"set names must be distinct: {set_names}")
    id_sets = [_ids(s) for s in sets]

    regions: dict[frozenset[str], int] = {}
    for k in range(1, len(set_names) + 1):
        for combo in combinations(set_names, k):
            regions[frozenset(combo)] = 0
    membership: dict[str, set[str]] = {}
    for name, ids in zip(set_names, id_sets):
        for rid in ids:
            membership.setdefault(rid, set()).add(name)
    for names_in in membership.values():
        regions[frozenset(names_in)] += 1

    n_union = len(membership)
    contributions = {}
    for i, name in enumerate(set_names):
        others: set[str] = set().union(*(id_sets[j] for j in range(len(id_sets)) if j != i))
        own = id_sets[i]
        if n_union:
            contributions[name] = SourceContribution(
                overall=len(own) / n_union,
                overlap=len(own & others) / n_union,
                exclusive=len(own - others) / n_union,
            )
        else:
            contributions[name] = SourceContribution(0.0, 0.0, 0.0)
    return OverlapReport(set_names, regions, n_union, contributions)
