"""Canonical bibliographic records and provenance-tagged record sets."""
from __future__ import annotations

import datetime as _dt
import hashlib
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import TYPE_CHECKING, Any

from .text import normalize_title

if TYPE_CHECKING:
    from .query import SearchConfig

YEAR_MIN = 1900
YEAR_MAX = 2100


class DocType(str, Enum):
    JOURNAL_ARTICLE = "journal-article"
    CONFERENCE_PAPER = "conference-paper"
    BOOK_CHAPTER = "book-chapter"
    REPORT = "report"
    THESIS = "thesis"
    OTHER = "other"

    @classmethod
    def coerce(cls, value: str | DocType | None) -> DocType:
        if isinstance(value, DocType):
            return value
        if not value:
            return cls.OTHER
        try:
            return cls(value.strip().lower())
        except ValueError:
            return cls.OTHER


class StudyDesign(str, Enum):
    SYSTEMATIC_REVIEW = "systematic-review"
    SYSTEMATIC_MAPPING = "systematic-mapping"
    INFORMAL_SURVEY = "informal-survey"
    PRIMARY_STUDY = "primary-study"
    UNKNOWN = "unknown"

    @classmethod
    def coerce(cls, value: str | StudyDesign | None) -> StudyDesign:
        if isinstance(value, StudyDesign):
            return value
        if not value:
            return cls.UNKNOWN
        try:
            return cls(value.strip().lower())
        except ValueError:
            return cls.UNKNOWN


def title_hash_id(title: str, year: int | None) -> str:
    key = f"{normalize_title(title)}|{'' if year is None else year}"
    return "t:" + hashlib.sha1(key.encode("utf-8")).hexdigest()[:16]


def compute_record_id(
    title: str, year: int | None, doi: str | None = None, database_id: str | None = None
) -> str:
    """Stable identifier: DOI, else database ID, else a hash of title + year."""
    if doi and doi.strip():
        return "doi:" + normalize_doi(doi)
    if database_id and database_id.strip():
        return "db:" + database_id.strip()
    return title_hash_id(title, year)


def normalize_doi(doi: str) -> str:
    doi = doi.strip().lower()
    for prefix in ("https://doi.org/", "http://doi.org/", "https://dx.doi.org/", "http://dx.doi.org/", "doi:"):
        if doi.startswith(prefix):
            doi = doi[len(prefix) :]
    return doi.strip()


@dataclass(frozen=True)
class BibRecord:
    record_id: str
    title: str
    doi: str | None = None
    abstract: str | None = None
    keywords: tuple[str, ...] = ()
    authors: tuple[str, ...] = ()
    year: int | None = None
    venue: str | None = None
    publisher: str | None = None
    doc_type: DocType = DocType.OTHER
    peer_reviewed: bool | None = None
    subject_areas: frozenset[str] = frozenset()
    source_databases: frozenset[str] = frozenset()
    study_design: StudyDesign = StudyDesign.UNKNOWN
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self) -> None:
        if not self.title or not self.title.strip():
            raise ValueError(f"record {self.record_id!r}: title must be non-empty")
        if self.year is not None and not YEAR_MIN <= self.year <= YEAR_MAX:
            raise ValueError(f"record {self.record_id!r}: year {self.year} outside [{YEAR_MIN}, {YEAR_MAX}]")
        # accept lists/sets from callers, store immutable forms
        object.__setattr__(self, "keywords", tuple(self.keywords))
        object.__setattr__(self, "authors", tuple(self.authors))
        object.__setattr__(self, "subject_areas", frozenset(self.subject_areas))
        object.__setattr__(self, "source_databases", frozenset(self.source_databases))
        object.__setattr__(self, "doc_type", DocType.coerce(self.doc_type))
        object.__setattr__(self, "study_design", StudyDesign.coerce(self.study_design))

    @classmethod
    def create(
        cls,
        title: str,
        *,
        year: int | None = None,
        doi: str | None = None,
        database_id: str | None = None,
        record_id: str | None = None,
        **kwargs: Any,
    ) -> BibRecord:
        """Build a record, deriving ``record_id`` when it is not given."""
        if record_id is None:
            record_id = compute_record_id(title, year, doi, database_id)
        return cls(record_id=record_id, title=title, year=year, doi=doi, **kwargs)

    @property
    def first_author(self) -> str | None:
        return self.authors[0] if self.authors else None

    def filled_field_count(self) -> int:
        """Number of non-empty metadata fields, used to rank duplicate survivors."""
        count = 0
        for f in fields(self):
            if f.name in ("record_id", "raw"):
                continue
            value = getattr(self, f.name)
            if value is None or value == "" or value == () or value == frozenset():
                continue
            if value is DocType.OTHER or value is StudyDesign.UNKNOWN:
                continue
            count += 1
        return count


def _first_non_empty(a: Any, b: Any) -> Any:
    if a is None or a == "" or a == () or a is DocType.OTHER or a is StudyDesign.UNKNOWN:
        return b
    return a


def _union_ordered(a: Iterable[str], b: Iterable[str]) -> tuple[str, ...]:
    seen = dict.fromkeys(a)
    for item in b:
        seen.setdefault(item, None)
    return tuple(seen)


def merge_records(first: BibRecord, second: BibRecord) -> BibRecord:
    """Merge ``second`` into ``first``: set-like fields unite, scalars keep the first non-empty."""
    kwargs: dict[str, Any] = {}
    for f in fields(first):
        name = f.name
        a, b = getattr(first, name), getattr(second, name)
        if name in ("record_id",):
            kwargs[name] = a
        elif name == "keywords":
            kwargs[name] = _union_ordered(a, b)
        elif name in ("subject_areas", "source_databases"):
            kwargs[name] = a | b
        elif name == "raw":
            kwargs[name] = {**b, **a}
        else:
            kwargs[name] = _first_non_empty(a, b)
    return BibRecord(**kwargs)


@dataclass(frozen=True)
class RecordSet:
    """A named set of records with unique ``record_id`` values.

    Records are held in canonical order (sorted by ``record_id``), so two
    sets built from the same records compare equal regardless of input order.
    """

    name: str
    records: tuple[BibRecord, ...] = ()
    search_config: SearchConfig | None = None
    created_date: _dt.date = field(default_factory=_dt.date.today, compare=False)

    def __post_init__(self) -> None:
        ordered = tuple(sorted(self.records, key=lambda r: r.record_id))
        index: dict[str, BibRecord] = {}
        for rec in ordered:
            if rec.record_id in index:
                raise ValueError(f"record set {self.name!r}: duplicate record_id {rec.record_id!r}")
            index[rec.record_id] = rec
        object.__setattr__(self, "records", ordered)
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[BibRecord]:
        return iter(self.records)

    def __contains__(self, record_id: object) -> bool:
        return record_id in self._index  # type: ignore[attr-defined]

    def __getitem__(self, record_id: str) -> BibRecord:
        return self._index[record_id]  # type: ignore[attr-defined]

    def get(self, record_id: str) -> BibRecord | None:
        return self._index.get(record_id)  # type: ignore[attr-defined]

    @property
    def ids(self) -> frozenset[str]:
        return frozenset(self._index)  # type: ignore[attr-defined]

    def subset(self, ids: Iterable[str], name: str | None = None) -> RecordSet:
        wanted = set(ids)
        return RecordSet(
            name=name or self.name,
            records=tuple(r for r in self.records if r.record_id in wanted),
            search_config=self.search_config,
            created_date=self.created_date,
        )

    def with_name(self, name: str) -> RecordSet:
        return replace(self, name=name)


def make_record_set(
    name: str,
    records: Iterable[BibRecord],
    config: SearchConfig | None = None,
    created_date: _dt.date | None = None,
) -> RecordSet:
    """Assemble a record set, merging records that share a ``record_id``.

    Colliding records merge field-wise: keywords, subject areas and source
    databases are united; for every other field the first non-empty value
    in input order wins.
    """
    merged: dict[str, BibRecord] = {}
    for rec in records:
        prior = merged.get(rec.record_id)
        merged[rec.record_id] = rec if prior is None else merge_records(prior, rec)
    return RecordSet(
        name=name,
        records=tuple(merged.values()),
        search_config=config,
        created_date=created_date or _dt.date.today(),
    )


def union(name: str, sets: Iterable[RecordSet]) -> RecordSet:
    return make_record_set(name, (r for s in sets for r in s))
