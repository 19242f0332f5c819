"""Quasi-gold standards: attested membership, provenance and quality characteristics."""
from __future__ import annotations

import json
import math
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from .records import BibRecord, RecordSet, StudyDesign


class QGSError(ValueError):
    pass


class Origin(str, Enum):
    MANUAL_SEARCH = "manual-search"
    INFORMAL_SEARCH = "informal-search"
    EXPERT_RECOMMENDATION = "expert-recommendation"
    EXISTING_SLS = "existing-SLS"
    SNOWBALL = "snowball"


@dataclass(frozen=True)
class Attestation:
    """Selection-phase outcomes; ``None`` means the phase was not recorded."""

    phase1_passed: bool = True
    phase2_passed: bool | None = None
    phase3_passed: bool | None = None

    @property
    def passes_recorded(self) -> bool:
        return self.phase1_passed and self.phase2_passed is not False and self.phase3_passed is not False

    @property
    def fully_attested(self) -> bool:
        return self.phase1_passed is True and self.phase2_passed is True and self.phase3_passed is True


@dataclass(frozen=True)
class QGSMember:
    record_id: str
    attestation: Attestation = Attestation()
    origin: Origin = Origin.EXISTING_SLS

    def __post_init__(self) -> None:
        object.__setattr__(self, "origin", Origin(self.origin))
        if not self.attestation.phase1_passed:
            raise QGSError(f"QGS member {self.record_id!r} must pass phase 1")


@dataclass(frozen=True)
class QGS:
    members: tuple[QGSMember, ...] = ()
    source_note: str = ""

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.members, key=lambda m: m.record_id))
        seen = set()
        for m in ordered:
            if m.record_id in seen:
                raise QGSError(f"duplicate QGS member {m.record_id!r}")
            seen.add(m.record_id)
        object.__setattr__(self, "members", ordered)

    @classmethod
    def from_ids(
        cls, ids: Iterable[str], origin: Origin | str = Origin.EXISTING_SLS, source_note: str = ""
    ) -> QGS:
        """QGS whose members passed all three phases, sharing one origin."""
        full = Attestation(True, True, True)
        return cls(tuple(QGSMember(i, full, Origin(origin)) for i in ids), source_note)

    @property
    def ids(self) -> frozenset[str]:
        return frozenset(m.record_id for m in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, record_id: object) -> bool:
        return record_id in self.ids

    def unresolved(self, records: RecordSet) -> list[str]:
        return sorted(i for i in self.ids if i not in records)

    def require_resolved(self, records: RecordSet) -> None:
        missing = self.unresolved(records)
        if missing:
            raise QGSError(f"{len(missing)} QGS member(s) not found in {records.name!r}: {missing[:5]}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "source_note": self.source_note,
            "members": [
                {
                    "record_id": m.record_id,
                    "phase1_passed": m.attestation.phase1_passed,
                    "phase2_passed": m.attestation.phase2_passed,
                    "phase3_passed": m.attestation.phase3_passed,
                    "origin": m.origin.value,
                }
                for m in self.members
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> QGS:
        members = []
        for m in data.get("members", []):
            if isinstance(m, str):
                members.append(QGSMember(m, Attestation(True, True, True)))
                continue
            members.append(
                QGSMember(
                    record_id=m["record_id"],
                    attestation=Attestation(
                        bool(m.get("phase1_passed", True)), m.get("phase2_passed"), m.get("phase3_passed")
                    ),
                    origin=Origin(m.get("origin", Origin.EXISTING_SLS.value)),
                )
            )
        return cls(tuple(members), data.get("source_note", ""))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def load(cls, path: str | Path) -> QGS:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def candidate_pool(source_set: RecordSet) -> RecordSet:
    """Records of an existing study that are not informal surveys."""
    return source_set.subset(
        (r.record_id for r in source_set if r.study_design is not StudyDesign.INFORMAL_SURVEY),
        name=f"{source_set.name} (systematic candidates)",
    )


def build_qgs_from_sls(
    source_set: RecordSet, selection: Mapping[str, Attestation], source_note: str = ""
) -> QGS:
    """Members are candidates whose attestation passes every recorded phase.

    Informal surveys are dropped regardless of attestation. Candidates with no
    attestation entry are not members.
    """
    unknown = sorted(i for i in selection if i not in source_set)
    if unknown:
        raise QGSError(f"attestation references unknown record ids: {unknown[:5]}")
    pool = candidate_pool(source_set)
    members = [
        QGSMember(rid, att, Origin.EXISTING_SLS)
        for rid, att in selection.items()
        if rid in pool and att.passes_recorded
    ]
    return QGS(tuple(members), source_note or source_set.name)


def split_qgs(qgs: QGS, formation_fraction: float, seed: int) -> tuple[QGS, QGS]:
    """Seeded random split into a search-formation part and a validation part."""
    if not 0.0 <= formation_fraction <= 1.0:
        raise QGSError("formation_fraction must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(qgs.members))
    k = round(formation_fraction * len(qgs.members))
    members = list(qgs.members)
    formation = tuple(members[i] for i in sorted(order[:k]))
    validation = tuple(members[i] for i in sorted(order[k:]))
    return QGS(formation, qgs.source_note), QGS(validation, qgs.source_note)


# --------------------------------------------------------------------------
# Diversity
# --------------------------------------------------------------------------

DIMENSIONS = ("venue", "year", "first_author", "publisher", "source_database")


def _dimension_value(record: BibRecord, dimension: str) -> str | None:
    if dimension == "venue":
        return record.venue
    if dimension == "year":
        return None if record.year is None else str(record.year)
    if dimension == "first_author":
        return record.first_author
    if dimension == "publisher":
        return record.publisher
    if dimension == "source_database":
        return "+".join(sorted(record.source_databases)) or None
    raise KeyError(dimension)


def normalized_entropy(counts: Iterable[int]) -> float:
    """Shannon entropy of the count distribution divided by log(distinct values).

    Zero when there is at most one distinct value.
    """
    values = [c for c in counts if c > 0]
    k = len(values)
    if k <= 1:
        return 0.0
    total = sum(values)
    h = -math.fsum((c / total) * math.log(c / total) for c in values)
    return h / math.log(k)


@dataclass(frozen=True)
class DimensionProfile:
    distribution: dict[str, int]
    missing: int

    @property
    def distinct_count(self) -> int:
        return len(self.distribution)

    @property
    def normalized_entropy(self) -> float:
        return normalized_entropy(self.distribution.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "distribution": dict(sorted(self.distribution.items())),
            "missing": self.missing,
            "distinct_count": self.distinct_count,
            "normalized_entropy": self.normalized_entropy,
        }


@dataclass(frozen=True)
class DiversityProfile:
    """Per-dimension spread of QGS members.

    A dimension is unavailable when no member carries a value for it.
    Members lacking a value are counted in ``missing`` and excluded from the
    entropy, so ``sum(distribution) + missing == |QGS|``.
    """

    dimensions: dict[str, DimensionProfile]
    unavailable: tuple[str, ...]

    @property
    def summary_score(self) -> float | None:
        if not self.dimensions:
            return None
        return sum(d.normalized_entropy for d in self.dimensions.values()) / len(self.dimensions)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dimensions": {k: v.to_dict() for k, v in self.dimensions.items()},
            "unavailable": list(self.unavailable),
            "summary_score": self.summary_score,
        }


def diversity(qgs: QGS, records: RecordSet) -> DiversityProfile:
    if not len(qgs):
        raise QGSError("diversity is undefined for an empty QGS")
    qgs.require_resolved(records)
    members = [records[i] for i in sorted(qgs.ids)]
    dims: dict[str, DimensionProfile] = {}
    unavailable = []
    for dim in DIMENSIONS:
        values = [_dimension_value(r, dim) for r in members]
        present = Counter(v for v in values if v)
        if not present:
            unavailable.append(dim)
            continue
        dims[dim] = DimensionProfile(dict(present), missing=len(values) - sum(present.values()))
    return DiversityProfile(dims, tuple(unavailable))


# --------------------------------------------------------------------------
# Quality report
# --------------------------------------------------------------------------

FLAG_EMPTY = "empty-qgs"
FLAG_SINGLE_ORIGIN = "single-origin-existing-sls"


@dataclass(frozen=True)
class QualityReport:
    size: int
    relevance: float | None
    size_comparison: dict[str, dict[str, Any]]
    diversity: DiversityProfile | None
    origins: dict[str, int]
    flags: tuple[str, ...] = field(default=())
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return {
            "size": self.size,
            "relevance": self.relevance,
            "size_comparison": self.size_comparison,
            "diversity": None if self.diversity is None else self.diversity.to_dict(),
            "origins": self.origins,
            "flags": list(self.flags),
            "notes": list(self.notes),
        }


def qgs_quality_report(
    qgs: QGS, records: RecordSet, reference_sizes: Mapping[str, int] | None = None
) -> QualityReport:
    """Relevance, size and diversity of a QGS. No pass/fail thresholds are applied."""
    size = len(qgs)
    comparison = {
        name: {"reference_size": ref, "ratio": (size / ref) if ref else None}
        for name, ref in sorted((reference_sizes or {}).items())
    }
    origins = dict(sorted(Counter(m.origin.value for m in qgs.members).items()))
    if size == 0:
        return QualityReport(
            size=0,
            relevance=None,
            size_comparison=comparison,
            diversity=None,
            origins=origins,
            flags=(FLAG_EMPTY,),
            notes=("all metrics unavailable for an empty QGS",),
        )
    relevance = sum(m.attestation.fully_attested for m in qgs.members) / size
    flags = []
    notes = []
    if set(origins) == {Origin.EXISTING_SLS.value}:
        flags.append(FLAG_SINGLE_ORIGIN)
        notes.append(
            "every member comes from an existing study; its search weaknesses carry over. "
            "Consider supplementing with manual search, informal search or expert recommendations."
        )
    return QualityReport(
        size=size,
        relevance=relevance,
        size_comparison=comparison,
        diversity=diversity(qgs, records),
        origins=origins,
        flags=tuple(flags),
        notes=tuple(notes),
    )
