"""Boolean search strings: parsing, field-scoped phrase evaluation and filters.

Grammar (keywords case-insensitive)::

    query    := or_expr
    or_expr  := and_expr ("OR" and_expr)*
    and_expr := unary ("AND" ["NOT"] unary)*
    unary    := "NOT" unary | primary
    primary  := PHRASE | WORD | "(" query ")" | SCOPE ":" primary | SCOPE "(" query ")"
    SCOPE    := "TITLE" | "TITLE-ABS-KEY"

OR binds loosest and NOT tightest. A phrase matches when its token sequence
occurs contiguously inside one searched field (title, abstract, or a single
keyword). There is no stemming: ``"testing"`` does not match ``test``.
"""
from __future__ import annotations

import datetime as _dt
import functools
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Union

from .records import BibRecord, DocType, RecordSet, StudyDesign
from .text import contains_sequence, tokenize


class Scope(str, Enum):
    TITLE = "TITLE"
    TITLE_ABS_KEY = "TITLE-ABS-KEY"

    @classmethod
    def parse(cls, value: str | Scope) -> Scope:
        if isinstance(value, Scope):
            return value
        key = value.strip().upper().replace("_", "-")
        return cls(key)


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


@dataclass(frozen=True)
class Phrase:
    text: str

    @property
    def tokens(self) -> tuple[str, ...]:
        return tokenize(self.text)


@dataclass(frozen=True)
class And:
    children: tuple[Node, ...]


@dataclass(frozen=True)
class Or:
    children: tuple[Node, ...]


@dataclass(frozen=True)
class Not:
    child: Node


@dataclass(frozen=True)
class Scoped:
    scope: Scope
    child: Node


Node = Union[Phrase, And, Or, Not, Scoped]


@dataclass(frozen=True)
class Query:
    root: Node
    text: str | None = None

    def __str__(self) -> str:
        return format_query(self.root)

    def phrases(self) -> list[Phrase]:
        return [p for _, p in iter_phrases(self.root)]


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

# "TITLE: x" or the database form "TITLE(x)"
_SCOPE_RE = re.compile(r"(TITLE-ABS-KEY|TITLE)\s*(?::|(?=\())", re.IGNORECASE)
_WORD_RE = re.compile(r'[^\s()"]+')


@dataclass(frozen=True)
class _Tok:
    kind: str  # PHRASE WORD AND OR NOT LPAREN RPAREN SCOPE EOF
    value: str
    offset: int


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch == "(":
            toks.append(_Tok("LPAREN", ch, i))
            i += 1
        elif ch == ")":
            toks.append(_Tok("RPAREN", ch, i))
            i += 1
        elif ch == '"':
            end = text.find('"', i + 1)
            if end < 0:
                raise QuerySyntaxError("unbalanced quote", i)
            phrase = text[i + 1 : end]
            if not tokenize(phrase):
                raise QuerySyntaxError("empty phrase", i)
            toks.append(_Tok("PHRASE", phrase, i))
            i = end + 1
        else:
            m = _SCOPE_RE.match(text, i)
            if m:
                toks.append(_Tok("SCOPE", m.group(1).upper(), i))
                i = m.end()
                continue
            m = _WORD_RE.match(text, i)
            assert m is not None
            word = m.group(0)
            upper = word.upper()
            if upper in ("AND", "OR", "NOT"):
                toks.append(_Tok(upper, word, i))
            else:
                if not tokenize(word):
                    raise QuerySyntaxError(f"unexpected {word!r}", i)
                toks.append(_Tok("WORD", word, i))
            i = m.end()
    toks.append(_Tok("EOF", "", n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def _take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def parse(self) -> Node:
        node = self.or_expr()
        if self.cur.kind != "EOF":
            tok = self.cur
            what = "unbalanced ')'" if tok.kind == "RPAREN" else f"unexpected {tok.value!r}"
            raise QuerySyntaxError(what, tok.offset)
        return node

    def or_expr(self) -> Node:
        children = [self.and_expr()]
        while self.cur.kind == "OR":
            self._take()
            children.append(self.and_expr())
        return children[0] if len(children) == 1 else Or(tuple(_flatten(children, Or)))

    def and_expr(self) -> Node:
        children = [self.unary()]
        while self.cur.kind == "AND":
            self._take()
            children.append(self.unary())
        return children[0] if len(children) == 1 else And(tuple(_flatten(children, And)))

    def unary(self) -> Node:
        if self.cur.kind == "NOT":
            self._take()
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Node:
        tok = self.cur
        if tok.kind == "PHRASE" or tok.kind == "WORD":
            self._take()
            return Phrase(tok.value)
        if tok.kind == "LPAREN":
            self._take()
            node = self.or_expr()
            if self.cur.kind != "RPAREN":
                raise QuerySyntaxError("expected ')'", self.cur.offset)
            self._take()
            return node
        if tok.kind == "SCOPE":
            self._take()
            return Scoped(Scope(tok.value), self.primary())
        if tok.kind == "EOF":
            raise QuerySyntaxError("unexpected end of input", tok.offset)
        raise QuerySyntaxError(f"dangling operator {tok.value!r}" if tok.kind in ("AND", "OR") else
                               f"unexpected {tok.value!r}", tok.offset)


def _flatten(children: list[Node], kind: type) -> list[Node]:
    out: list[Node] = []
    for c in children:
        if isinstance(c, kind):
            out.extend(c.children)  # type: ignore[attr-defined]
        else:
            out.append(c)
    return out


def parse_query(text: str) -> Query:
    """Parse a search string; raises :class:`QuerySyntaxError` with a character offset."""
    return Query(_Parser(text).parse(), text)


def format_query(node: Node) -> str:
    """Render an AST back to search-string syntax (parses to an equal tree)."""
    if isinstance(node, Phrase):
        return '"' + node.text.replace('"', "") + '"'
    if isinstance(node, Not):
        return "NOT " + _wrap(node.child)
    if isinstance(node, Scoped):
        return f"{node.scope.value}:({format_query(node.child)})"
    sep = " AND " if isinstance(node, And) else " OR "
    return sep.join(_wrap(c) for c in node.children)


def _wrap(node: Node) -> str:
    if isinstance(node, (And, Or)):
        return "(" + format_query(node) + ")"
    return format_query(node)


NodePath = tuple[int, ...]


def iter_phrases(node: Node, path: NodePath = ()) -> Iterable[tuple[NodePath, Phrase]]:
    if isinstance(node, Phrase):
        yield path, node
    elif isinstance(node, (Not, Scoped)):
        yield from iter_phrases(node.child, path + (0,))
    else:
        for i, c in enumerate(node.children):
            yield from iter_phrases(c, path + (i,))


def top_level_conjuncts(node: Node) -> list[tuple[NodePath, Node]]:
    """Mandatory AND-ed components of the query root (the root itself if not an AND).

    Scope markers wrapping the root are looked through.
    """
    path: NodePath = ()
    while isinstance(node, Scoped):
        node, path = node.child, path + (0,)
    if isinstance(node, And):
        return [(path + (i,), c) for i, c in enumerate(node.children)]
    return [(path, node)]


def conjunct_label(index: int) -> str:
    """``0 -> 'A'``, ``1 -> 'B'`` ... ``26 -> 'AA'``."""
    label = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        label = chr(ord("A") + rem) + label
    return label


# --------------------------------------------------------------------------
# Search configuration and evaluation
# --------------------------------------------------------------------------

SYSTEMATIC_DESIGNS = frozenset({StudyDesign.SYSTEMATIC_REVIEW, StudyDesign.SYSTEMATIC_MAPPING})


@dataclass(frozen=True)
class SearchConfig:
    """Database-side search settings.

    Empty ``sources`` means no source restriction. With ``lenient_unlabeled``
    (the default), records with no subject areas, no source databases or an
    unknown study design pass the corresponding filter instead of failing it.
    """

    sources: frozenset[str] = frozenset()
    field_scope: Scope = Scope.TITLE_ABS_KEY
    subject_area_filter: frozenset[str] | None = None
    doc_type_filter: frozenset[DocType] | None = None
    cutoff_date: _dt.date | None = None
    year_range: tuple[int, int] | None = None
    require_systematic: bool = False
    lenient_unlabeled: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "sources", frozenset(self.sources))
        object.__setattr__(self, "field_scope", Scope.parse(self.field_scope))
        if self.subject_area_filter is not None:
            object.__setattr__(self, "subject_area_filter", frozenset(self.subject_area_filter))
        if self.doc_type_filter is not None:
            object.__setattr__(self, "doc_type_filter", frozenset(DocType.coerce(d) for d in self.doc_type_filter))
        if self.year_range is not None:
            lo, hi = self.year_range
            if lo > hi:
                raise ValueError(f"year_range min {lo} exceeds max {hi}")
            object.__setattr__(self, "year_range", (int(lo), int(hi)))

    def to_dict(self) -> dict[str, Any]:
        return {
            "sources": sorted(self.sources),
            "field_scope": self.field_scope.value,
            "subject_area_filter": None if self.subject_area_filter is None else sorted(self.subject_area_filter),
            "doc_type_filter": None if self.doc_type_filter is None else sorted(d.value for d in self.doc_type_filter),
            "cutoff_date": None if self.cutoff_date is None else self.cutoff_date.isoformat(),
            "year_range": None if self.year_range is None else list(self.year_range),
            "require_systematic": self.require_systematic,
            "lenient_unlabeled": self.lenient_unlabeled,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SearchConfig:
        cutoff = data.get("cutoff_date")
        return cls(
            sources=frozenset(data.get("sources") or ()),
            field_scope=Scope.parse(data.get("field_scope", Scope.TITLE_ABS_KEY.value)),
            subject_area_filter=None if data.get("subject_area_filter") is None else frozenset(data["subject_area_filter"]),
            doc_type_filter=None if data.get("doc_type_filter") is None else frozenset(data["doc_type_filter"]),
            cutoff_date=None if cutoff is None else _dt.date.fromisoformat(cutoff),
            year_range=None if data.get("year_range") is None else tuple(data["year_range"]),  # type: ignore[arg-type]
            require_systematic=bool(data.get("require_systematic", False)),
            lenient_unlabeled=bool(data.get("lenient_unlabeled", True)),
        )


@dataclass(frozen=True)
class PhraseTrace:
    text: str
    scope: Scope
    fields: frozenset[str]  # "title", "abstract", "keywords"

    @property
    def matched(self) -> bool:
        return bool(self.fields)


@dataclass(frozen=True)
class MatchResult:
    matched: bool
    boolean_match: bool
    clause_trace: Mapping[NodePath, PhraseTrace]
    filter_trace: Mapping[str, bool]
    node_values: Mapping[NodePath, bool] = field(repr=False, default_factory=dict)

    @property
    def failed_filters(self) -> list[str]:
        return [name for name, ok in self.filter_trace.items() if not ok]


@dataclass(frozen=True)
class _FieldTokens:
    title: tuple[str, ...]
    abstract: tuple[str, ...]
    keywords: tuple[tuple[str, ...], ...]


@functools.lru_cache(maxsize=65536)
def _field_tokens(title: str, abstract: str | None, keywords: tuple[str, ...]) -> _FieldTokens:
    return _FieldTokens(tokenize(title), tokenize(abstract), tuple(tokenize(k) for k in keywords))


def phrase_fields(phrase: Phrase, record: BibRecord, scope: Scope) -> frozenset[str]:
    """Fields in which ``phrase`` occurs as a contiguous token sequence."""
    ft = _field_tokens(record.title, record.abstract, record.keywords)
    needle = phrase.tokens
    hits = set()
    if contains_sequence(ft.title, needle):
        hits.add("title")
    if scope is Scope.TITLE_ABS_KEY:
        if contains_sequence(ft.abstract, needle):
            hits.add("abstract")
        if any(contains_sequence(k, needle) for k in ft.keywords):
            hits.add("keywords")
    return frozenset(hits)


def _eval(
    node: Node,
    record: BibRecord,
    scope: Scope,
    path: NodePath,
    trace: dict[NodePath, PhraseTrace],
    values: dict[NodePath, bool],
) -> bool:
    # no short-circuiting: every phrase gets a trace entry
    if isinstance(node, Phrase):
        hits = phrase_fields(node, record, scope)
        trace[path] = PhraseTrace(node.text, scope, hits)
        result = bool(hits)
    elif isinstance(node, Scoped):
        result = _eval(node.child, record, node.scope, path + (0,), trace, values)
    elif isinstance(node, Not):
        result = not _eval(node.child, record, scope, path + (0,), trace, values)
    else:
        results = [_eval(c, record, scope, path + (i,), trace, values) for i, c in enumerate(node.children)]
        result = all(results) if isinstance(node, And) else any(results)
    values[path] = result
    return result


def check_filters(record: BibRecord, config: SearchConfig) -> dict[str, bool]:
    """Pass/fail of each active filter, in a fixed order."""
    lenient = config.lenient_unlabeled
    out: dict[str, bool] = {}
    if config.sources:
        if record.source_databases:
            out["source"] = bool(record.source_databases & config.sources)
        else:
            out["source"] = lenient
    if config.cutoff_date is not None:
        # year granularity: records from the cutoff year itself pass
        out["cutoff"] = record.year is None or record.year <= config.cutoff_date.year
    if config.year_range is not None:
        lo, hi = config.year_range
        out["year_range"] = record.year is None or lo <= record.year <= hi
    if config.doc_type_filter is not None:
        out["doc_type"] = record.doc_type in config.doc_type_filter
    if config.require_systematic:
        if record.study_design is StudyDesign.UNKNOWN:
            out["study_design"] = lenient
        else:
            out["study_design"] = record.study_design in SYSTEMATIC_DESIGNS
    if config.subject_area_filter is not None:
        if record.subject_areas:
            out["subject_area"] = bool(record.subject_areas & config.subject_area_filter)
        else:
            out["subject_area"] = lenient
    return out


def evaluate(query: Query | Node, record: BibRecord, config: SearchConfig | None = None) -> MatchResult:
    """Evaluate a query and the configured filters against one record."""
    config = config or SearchConfig()
    root = query.root if isinstance(query, Query) else query
    trace: dict[NodePath, PhraseTrace] = {}
    values: dict[NodePath, bool] = {}
    boolean = _eval(root, record, config.field_scope, (), trace, values)
    filters = check_filters(record, config)
    return MatchResult(
        matched=boolean and all(filters.values()),
        boolean_match=boolean,
        clause_trace=trace,
        filter_trace=filters,
        node_values=values,
    )


def matches(query: Query | Node, record: BibRecord, config: SearchConfig | None = None) -> bool:
    return evaluate(query, record, config).matched


def run_search(
    query: Query | Node, corpus: RecordSet, config: SearchConfig | None = None, name: str | None = None
) -> RecordSet:
    """Records of ``corpus`` matched by ``query`` under ``config``."""
    config = config or SearchConfig()
    hits = tuple(r for r in corpus if evaluate(query, r, config).matched)
    if name is None:
        text = format_query(query.root if isinstance(query, Query) else query)
        name = f"search[{config.field_scope.value}]: {text}"
    return RecordSet(name=name, records=hits, search_config=config, created_date=corpus.created_date)


def parse_cutoff(value: str) -> _dt.date:
    """``YYYY`` or ``YYYY-MM`` (or a full ISO date) to a date.

    A bare year maps to December 31st so that the whole year is inside the cutoff.
    """
    value = value.strip()
    if re.fullmatch(r"\d{4}", value):
        return _dt.date(int(value), 12, 31)
    if re.fullmatch(r"\d{4}-\d{1,2}", value):
        y, m = value.split("-")
        return _dt.date(int(y), int(m), 1)
    return _dt.date.fromisoformat(value)


def with_config(config: SearchConfig, **changes: Any) -> SearchConfig:
    return replace(config, **changes)
