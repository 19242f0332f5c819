"""Parsers for bibliographic exports (BibTeX, RIS, CSV) and the canonical CSV format.

Every parser is tolerant: a malformed entry produces a :class:`ParseDiagnostic`
and parsing continues with the next entry. The only fatal case is a CSV
column mapping that does not name an existing title column, which raises
:class:`IngestError`.
"""
from __future__ import annotations

import csv
import io
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any

from .latex import latex_to_unicode
from .records import (
    YEAR_MAX,
    YEAR_MIN,
    BibRecord,
    DocType,
    RecordSet,
    StudyDesign,
    make_record_set,
)

CANONICAL_HEADER = (
    "record_id",
    "doi",
    "title",
    "abstract",
    "keywords",
    "authors",
    "year",
    "venue",
    "publisher",
    "doc_type",
    "subject_areas",
    "source_databases",
    "study_design",
)
LIST_SEPARATOR = ";"


class IngestError(Exception):
    """Fatal ingestion problem (bad configuration or unreadable file)."""


@dataclass(frozen=True)
class ParseDiagnostic:
    line: int | None
    message: str

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line is not None else ""
        return where + self.message


@dataclass
class ParseResult:
    records: list[BibRecord] = field(default_factory=list)
    diagnostics: list[ParseDiagnostic] = field(default_factory=list)

    def __iter__(self):
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)


def _read_text(stream: IO[str] | str) -> str:
    text = stream if isinstance(stream, str) else stream.read()
    return text.lstrip("﻿")


_YEAR_RE = re.compile(r"^\s*(\d{4})")


def parse_year(value: str | None) -> int | None:
    """Leading four-digit year within the accepted range, else ``None``."""
    if not value:
        return None
    m = _YEAR_RE.match(value)
    if not m:
        return None
    year = int(m.group(1))
    return year if YEAR_MIN <= year <= YEAR_MAX else None


def _clean(value: str | None) -> str | None:
    if value is None:
        return None
    value = " ".join(value.split())
    return value or None


def _split_list(value: str | None, separators: Sequence[str] = (LIST_SEPARATOR,)) -> tuple[str, ...]:
    if not value:
        return ()
    for sep in separators:
        if sep in value:
            parts = value.split(sep)
            break
    else:
        parts = [value]
    return tuple(p for p in (" ".join(x.split()) for x in parts) if p)


# --------------------------------------------------------------------------
# BibTeX
# --------------------------------------------------------------------------

_BIB_TYPES = {
    "article": DocType.JOURNAL_ARTICLE,
    "inproceedings": DocType.CONFERENCE_PAPER,
    "conference": DocType.CONFERENCE_PAPER,
    "incollection": DocType.BOOK_CHAPTER,
    "techreport": DocType.REPORT,
    "phdthesis": DocType.THESIS,
    "mastersthesis": DocType.THESIS,
}
_ENTRY_START_RE = re.compile(r"^[ \t]*@[ \t]*([A-Za-z]+)[ \t]*([{(])", re.MULTILINE)
_FIELD_NAME_RE = re.compile(r"[A-Za-z0-9_:.+\-]+")


class _BibSyntaxError(Exception):
    pass


class _EntryReader:
    """Cursor over a single ``@type{...}`` chunk."""

    def __init__(self, text: str, pos: int, closer: str, macros: dict[str, str]):
        self.text = text
        self.pos = pos
        self.closer = closer
        self.macros = macros

    def _skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        if self.pos >= len(self.text):
            raise _BibSyntaxError("unexpected end of entry (unbalanced braces?)")
        return self.text[self.pos]

    def read_key(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in ",=" + self.closer:
            self.pos += 1
        if self.pos < len(self.text) and self.text[self.pos] == "=":
            # no citation key; rewind so the first field is read normally
            self.pos = start
            return ""
        key = self.text[start : self.pos].strip()
        if self.pos < len(self.text) and self.text[self.pos] == ",":
            self.pos += 1
        return key

    def _braced(self) -> str:
        depth = 0
        start = self.pos + 1
        while True:
            ch = self._peek()
            if ch == "\\":
                self.pos += 2
                continue
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    self.pos += 1
                    return self.text[start : self.pos - 1]
            self.pos += 1

    def _quoted(self) -> str:
        depth = 0
        self.pos += 1
        start = self.pos
        while True:
            ch = self._peek()
            if ch == "\\":
                self.pos += 2
                continue
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth < 0:
                    raise _BibSyntaxError("unbalanced '}' inside quoted value")
            elif ch == '"' and depth == 0:
                self.pos += 1
                return self.text[start : self.pos - 1]
            self.pos += 1

    def _value(self) -> str:
        parts = []
        while True:
            self._skip_ws()
            ch = self._peek()
            if ch == "{":
                parts.append(self._braced())
            elif ch == '"':
                parts.append(self._quoted())
            else:
                m = _FIELD_NAME_RE.match(self.text, self.pos)
                if not m:
                    raise _BibSyntaxError(f"unexpected character {ch!r} in value")
                word = m.group(0)
                self.pos = m.end()
                parts.append(word if word.isdigit() else self.macros.get(word.lower(), word))
            self._skip_ws()
            if self.pos < len(self.text) and self.text[self.pos] == "#":
                self.pos += 1
                continue
            return "".join(parts)

    def read_fields(self) -> dict[str, str]:
        result: dict[str, str] = {}
        while True:
            self._skip_ws()
            ch = self._peek()
            if ch == self.closer:
                self.pos += 1
                return result
            m = _FIELD_NAME_RE.match(self.text, self.pos)
            if not m:
                raise _BibSyntaxError(f"expected field name, found {ch!r}")
            name = m.group(0).lower()
            self.pos = m.end()
            self._skip_ws()
            if self._peek() != "=":
                raise _BibSyntaxError(f"expected '=' after field {name!r}")
            self.pos += 1
            result[name] = self._value()
            self._skip_ws()
            ch = self._peek()
            if ch == ",":
                self.pos += 1
            elif ch != self.closer:
                raise _BibSyntaxError(f"expected ',' or end of entry after field {name!r}")


def _bib_authors(value: str) -> tuple[str, ...]:
    # split on "and" only outside braces so {Smith and Sons} stays one name
    names, depth, start = [], 0, 0
    for m in re.finditer(r"[{}]|\s+and\s+", value, re.IGNORECASE):
        tok = m.group(0)
        if tok == "{":
            depth += 1
        elif tok == "}":
            depth -= 1
        elif depth == 0:
            names.append(value[start : m.start()])
            start = m.end()
    names.append(value[start:])
    return tuple(n for n in (latex_to_unicode(x) for x in names) if n)


def _bib_record(
    entry_type: str, key: str, values: dict[str, str], source: str | None
) -> BibRecord | str:
    title = latex_to_unicode(values.get("title", ""))
    if not title:
        return "entry has no title"
    year_raw = values.get("year")
    year = parse_year(year_raw)
    doi = _clean(values.get("doi"))
    venue = values.get("journal") or values.get("booktitle")
    keywords = tuple(dict.fromkeys(_split_list(latex_to_unicode(values.get("keywords", "")), (";", ","))))
    raw = {"entry_type": entry_type, "key": key, **values}
    return BibRecord.create(
        title,
        year=year,
        doi=doi,
        abstract=_clean(latex_to_unicode(values["abstract"])) if "abstract" in values else None,
        keywords=keywords,
        authors=_bib_authors(values.get("author", "")),
        venue=_clean(latex_to_unicode(venue)) if venue else None,
        publisher=_clean(latex_to_unicode(values["publisher"])) if "publisher" in values else None,
        doc_type=_BIB_TYPES.get(entry_type, DocType.OTHER),
        source_databases=frozenset([source]) if source else frozenset(),
        raw=raw,
    )


def parse_bibtex(stream: IO[str] | str, source: str | None = None) -> ParseResult:
    """Parse BibTeX text into records.

    Entries are split at each line beginning with ``@type{`` before parsing,
    so a brace-unbalanced entry is reported and cannot swallow its neighbours.
    ``@string`` macros are expanded; ``@comment`` and ``@preamble`` are skipped.
    """
    text = _read_text(stream)
    result = ParseResult()
    macros: dict[str, str] = {}
    starts = list(_ENTRY_START_RE.finditer(text))
    for i, m in enumerate(starts):
        end = starts[i + 1].start() if i + 1 < len(starts) else len(text)
        chunk = text[: end]
        line = text.count("\n", 0, m.start()) + 1
        entry_type = m.group(1).lower()
        closer = "}" if m.group(2) == "{" else ")"
        if entry_type in ("comment", "preamble"):
            continue
        reader = _EntryReader(chunk, m.end(), closer, macros)
        try:
            if entry_type == "string":
                macros.update({k: v for k, v in reader.read_fields().items()})
                continue
            key = reader.read_key()
            values = reader.read_fields()
        except _BibSyntaxError as exc:
            result.diagnostics.append(ParseDiagnostic(line, f"malformed @{entry_type} entry: {exc}"))
            continue
        if "year" in values and parse_year(values["year"]) is None:
            result.diagnostics.append(ParseDiagnostic(line, f"unparseable year {values['year']!r}"))
        rec = _bib_record(entry_type, key, values, source)
        if isinstance(rec, str):
            result.diagnostics.append(ParseDiagnostic(line, rec))
        else:
            result.records.append(rec)
    return result


# --------------------------------------------------------------------------
# RIS
# --------------------------------------------------------------------------

_RIS_LINE_RE = re.compile(r"^([A-Z][A-Z0-9])  -(?: (.*))?$")
_RIS_TYPES = {
    "JOUR": DocType.JOURNAL_ARTICLE,
    "JFULL": DocType.JOURNAL_ARTICLE,
    "MGZN": DocType.JOURNAL_ARTICLE,
    "CONF": DocType.CONFERENCE_PAPER,
    "CPAPER": DocType.CONFERENCE_PAPER,
    "CHAP": DocType.BOOK_CHAPTER,
    "RPRT": DocType.REPORT,
    "THES": DocType.THESIS,
}
_RIS_TITLE = ("TI", "T1")
_RIS_ABSTRACT = ("AB", "N2")
_RIS_AUTHOR = ("AU", "A1")
_RIS_YEAR = ("PY", "Y1")
_RIS_VENUE = ("T2", "JO", "JF", "SO", "J2")


def _ris_record(tags: dict[str, list[str]], source: str | None) -> BibRecord | str:
    def first(names: Iterable[str]) -> str | None:
        for n in names:
            if tags.get(n):
                return _clean(tags[n][0])
        return None

    title = first(_RIS_TITLE)
    if not title:
        return "record has no TI/T1 title"
    authors = tuple(a for n in _RIS_AUTHOR for a in (_clean(x) for x in tags.get(n, [])) if a)
    keywords = tuple(dict.fromkeys(k for k in (_clean(x) for x in tags.get("KW", [])) if k))
    ty = (first(["TY"]) or "").upper()
    sources = set()
    if source:
        sources.add(source)
    db = first(["DB"])
    if db:
        sources.add(db)
    return BibRecord.create(
        title,
        year=parse_year(first(_RIS_YEAR)),
        doi=first(["DO"]),
        database_id=first(["AN"]),
        abstract=first(_RIS_ABSTRACT),
        keywords=keywords,
        authors=authors,
        venue=first(_RIS_VENUE),
        publisher=first(["PB"]),
        doc_type=_RIS_TYPES.get(ty, DocType.OTHER),
        source_databases=frozenset(sources),
        raw={k: list(v) for k, v in tags.items()},
    )


def parse_ris(stream: IO[str] | str, source: str | None = None) -> ParseResult:
    """Parse RIS text. Records run from ``TY`` to ``ER``; AU and KW repeat.

    Untagged lines inside a record continue the previous tag's value. Lines
    outside any record are ignored with a diagnostic.
    """
    text = _read_text(stream)
    result = ParseResult()
    tags: dict[str, list[str]] | None = None
    start_line = 0
    last_tag: str | None = None

    def finish(line_no: int) -> None:
        assert tags is not None
        rec = _ris_record(tags, source)
        if isinstance(rec, str):
            result.diagnostics.append(ParseDiagnostic(start_line, rec + "; skipped"))
        else:
            year_raw = tags.get("PY") or tags.get("Y1")
            if year_raw and parse_year(year_raw[0]) is None:
                result.diagnostics.append(ParseDiagnostic(start_line, f"unparseable year {year_raw[0]!r}"))
            result.records.append(rec)

    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip()
        m = _RIS_LINE_RE.match(line)
        if m:
            tag, value = m.group(1), (m.group(2) or "").strip()
            if tag == "TY":
                if tags is not None:
                    result.diagnostics.append(ParseDiagnostic(start_line, "record not terminated by ER"))
                    finish(line_no)
                tags, start_line, last_tag = {"TY": [value]}, line_no, "TY"
            elif tag == "ER":
                if tags is None:
                    result.diagnostics.append(ParseDiagnostic(line_no, "ER outside a record; ignored"))
                else:
                    finish(line_no)
                tags, last_tag = None, None
            elif tags is None:
                result.diagnostics.append(ParseDiagnostic(line_no, f"{tag} line outside a record; ignored"))
            else:
                tags.setdefault(tag, []).append(value)
                last_tag = tag
        elif line.strip():
            if tags is not None and last_tag is not None:
                tags[last_tag][-1] = f"{tags[last_tag][-1]} {line.strip()}".strip()
            else:
                result.diagnostics.append(ParseDiagnostic(line_no, "stray line outside a record; ignored"))
    if tags is not None:
        result.diagnostics.append(ParseDiagnostic(start_line, "record not terminated by ER"))
        finish(start_line)
    return result


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------

_CSV_DOC_TYPES = {
    "article": DocType.JOURNAL_ARTICLE,
    "review": DocType.JOURNAL_ARTICLE,
    "letter": DocType.JOURNAL_ARTICLE,
    "note": DocType.JOURNAL_ARTICLE,
    "article in press": DocType.JOURNAL_ARTICLE,
    "conference paper": DocType.CONFERENCE_PAPER,
    "conference review": DocType.CONFERENCE_PAPER,
    "book chapter": DocType.BOOK_CHAPTER,
    "report": DocType.REPORT,
    "thesis": DocType.THESIS,
    "dissertation": DocType.THESIS,
}


def map_doc_type(value: str | None) -> DocType:
    if not value:
        return DocType.OTHER
    key = value.strip().lower()
    return _CSV_DOC_TYPES.get(key) or DocType.coerce(key)


@dataclass(frozen=True)
class CsvColumnMap:
    """Column headers for each canonical field; ``None`` means not present.

    Defaults follow the Scopus CSV export.
    """

    title: str = "Title"
    authors: str | None = "Authors"
    year: str | None = "Year"
    venue: str | None = "Source title"
    abstract: str | None = "Abstract"
    author_keywords: str | None = "Author Keywords"
    index_keywords: str | None = "Index Keywords"
    doi: str | None = "DOI"
    database_id: str | None = "EID"
    doc_type: str | None = "Document Type"
    publisher: str | None = "Publisher"
    source: str | None = "Source"
    subject_areas: str | None = None
    study_design: str | None = None
    record_id: str | None = None
    author_separators: tuple[str, ...] = (";", ",")

    @classmethod
    def canonical(cls) -> CsvColumnMap:
        return cls(
            title="title",
            authors="authors",
            year="year",
            venue="venue",
            abstract="abstract",
            author_keywords="keywords",
            index_keywords=None,
            doi="doi",
            database_id=None,
            doc_type="doc_type",
            publisher="publisher",
            source="source_databases",
            subject_areas="subject_areas",
            study_design="study_design",
            record_id="record_id",
            author_separators=(";",),
        )


def parse_csv(
    stream: IO[str] | str, mapping: CsvColumnMap | None = None, source: str | None = None
) -> ParseResult:
    """Parse a database CSV export, one record per data row.

    Raises :class:`IngestError` when the mapped title column is absent.
    """
    mapping = mapping or CsvColumnMap()
    text = _read_text(stream)
    result = ParseResult()
    if not text.strip():
        return result
    reader = csv.DictReader(io.StringIO(text, newline=""))
    header = [h.strip() for h in (reader.fieldnames or [])]
    reader.fieldnames = header
    if mapping.title not in header:
        raise IngestError(f"title column {mapping.title!r} not found in CSV header {header}")

    def cell(row: dict[str, Any], column: str | None) -> str | None:
        if column is None:
            return None
        value = row.get(column)
        return _clean(value) if isinstance(value, str) else None

    for line_no, row in enumerate(reader, start=2):
        title = cell(row, mapping.title)
        if not title:
            result.diagnostics.append(ParseDiagnostic(line_no, "row has no title; skipped"))
            continue
        year_raw = cell(row, mapping.year)
        year = parse_year(year_raw)
        if year_raw and year is None:
            result.diagnostics.append(ParseDiagnostic(line_no, f"unparseable year {year_raw!r}"))
        keywords = _split_list(cell(row, mapping.author_keywords)) + _split_list(
            cell(row, mapping.index_keywords)
        )
        sources = set(_split_list(cell(row, mapping.source)))
        if source:
            sources.add(source)
        raw_id = cell(row, mapping.record_id)
        doc_type_raw = cell(row, mapping.doc_type)
        result.records.append(
            BibRecord.create(
                title,
                record_id=raw_id or None,
                year=year,
                doi=cell(row, mapping.doi),
                database_id=cell(row, mapping.database_id),
                abstract=cell(row, mapping.abstract),
                keywords=tuple(dict.fromkeys(keywords)),
                authors=_split_list(cell(row, mapping.authors), mapping.author_separators),
                venue=cell(row, mapping.venue),
                publisher=cell(row, mapping.publisher),
                doc_type=map_doc_type(doc_type_raw),
                subject_areas=frozenset(_split_list(cell(row, mapping.subject_areas))),
                source_databases=frozenset(sources),
                study_design=StudyDesign.coerce(cell(row, mapping.study_design)),
                raw={k: v for k, v in row.items() if k is not None},
            )
        )
    return result


# --------------------------------------------------------------------------
# Canonical CSV and file dispatch
# --------------------------------------------------------------------------


def _join(values: Iterable[str]) -> str:
    return f"{LIST_SEPARATOR} ".join(values)


def write_canonical_csv(records: Iterable[BibRecord], stream: IO[str]) -> None:
    """Write records (sorted by ``record_id``) with the fixed canonical header."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CANONICAL_HEADER)
    for r in sorted(records, key=lambda r: r.record_id):
        writer.writerow(
            [
                r.record_id,
                r.doi or "",
                r.title,
                r.abstract or "",
                _join(r.keywords),
                _join(r.authors),
                "" if r.year is None else r.year,
                r.venue or "",
                r.publisher or "",
                r.doc_type.value,
                _join(sorted(r.subject_areas)),
                _join(sorted(r.source_databases)),
                r.study_design.value,
            ]
        )


def to_canonical_csv(records: Iterable[BibRecord]) -> str:
    buf = io.StringIO()
    write_canonical_csv(records, buf)
    return buf.getvalue()


def is_canonical_csv(text: str) -> bool:
    first = text.lstrip("﻿").split("\n", 1)[0].strip()
    return first == ",".join(CANONICAL_HEADER)


def parse_file(path: str | Path, source: str | None = None, mapping: CsvColumnMap | None = None) -> ParseResult:
    """Dispatch on extension: ``.bib``, ``.ris`` or ``.csv`` (canonical or Scopus-style)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    suffix = path.suffix.lower()
    if suffix in (".bib", ".bibtex"):
        return parse_bibtex(text, source)
    if suffix == ".ris":
        return parse_ris(text, source)
    if suffix in (".csv", ".txt"):
        if mapping is None and is_canonical_csv(text):
            mapping = CsvColumnMap.canonical()
        return parse_csv(text, mapping, source)
    raise IngestError(f"unsupported file type: {path.name}")


def load_record_set(
    path: str | Path, name: str | None = None, source: str | None = None, mapping: CsvColumnMap | None = None
) -> tuple[RecordSet, list[ParseDiagnostic]]:
    parsed = parse_file(path, source, mapping)
    return make_record_set(name or Path(path).stem, parsed.records), parsed.diagnostics
