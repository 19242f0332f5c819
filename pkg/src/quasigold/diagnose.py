"""Explain why QGS members were missed by a search, and try query edits.

Every cause carries evidence that can be re-checked from the record, the
query and the search configuration alone. Causes are reported in a fixed
order: source coverage, date, document type, study design, subject area,
absent terms, generic-term excluders.
"""
from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from typing import Any, Union

from .metrics import ValidationReport, validate_search
from .qgs import QGS
from .query import (
    And,
    Node,
    NodePath,
    Not,
    Or,
    Phrase,
    Query,
    Scope,
    Scoped,
    SearchConfig,
    conjunct_label,
    evaluate,
    format_query,
    iter_phrases,
    run_search,
    top_level_conjuncts,
)
from .records import RecordSet
from .text import tokenize

DEFAULT_GENERIC_TERMS = ("software", "quality")


class DiagnosisError(ValueError):
    pass


class CauseKind(str, Enum):
    SOURCE_NOT_SEARCHED = "SOURCE_NOT_SEARCHED"
    AFTER_CUTOFF = "AFTER_CUTOFF"
    YEAR_OUT_OF_RANGE = "YEAR_OUT_OF_RANGE"
    DOC_TYPE_EXCLUDED = "DOC_TYPE_EXCLUDED"
    STUDY_DESIGN_EXCLUDED = "STUDY_DESIGN_EXCLUDED"
    SUBJECT_AREA_FILTER = "SUBJECT_AREA_FILTER"
    TERM_ABSENT = "TERM_ABSENT"
    GENERIC_TERM_EXCLUDER = "GENERIC_TERM_EXCLUDER"
    UNEXPLAINED = "UNEXPLAINED"


# filter name in SearchConfig trace -> cause
_FILTER_CAUSES = (
    ("source", CauseKind.SOURCE_NOT_SEARCHED),
    ("cutoff", CauseKind.AFTER_CUTOFF),
    ("year_range", CauseKind.YEAR_OUT_OF_RANGE),
    ("doc_type", CauseKind.DOC_TYPE_EXCLUDED),
    ("study_design", CauseKind.STUDY_DESIGN_EXCLUDED),
    ("subject_area", CauseKind.SUBJECT_AREA_FILTER),
)

UNEXPLAINED_NOTE = (
    "record satisfies the query and all filters but is absent from the result: "
    "likely not indexed at search time, or an engine inconsistency (indistinguishable from exports)"
)


@dataclass(frozen=True)
class Cause:
    kind: CauseKind
    evidence: Mapping[str, Any] = field(default_factory=dict)

    @property
    def label(self) -> str:
        conjunct = self.evidence.get("conjunct")
        return f"{self.kind.value}({conjunct})" if conjunct else self.kind.value

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "label": self.label, "evidence": dict(self.evidence)}


@dataclass(frozen=True)
class MissDiagnosis:
    record_id: str
    causes: tuple[Cause, ...]

    def __post_init__(self) -> None:
        if not self.causes:
            raise DiagnosisError(f"diagnosis of {self.record_id!r} has no cause")
        kinds = [c.kind for c in self.causes]
        if CauseKind.UNEXPLAINED in kinds and len(kinds) > 1:
            raise DiagnosisError("UNEXPLAINED must appear alone")

    def to_dict(self) -> dict[str, Any]:
        return {"record_id": self.record_id, "causes": [c.to_dict() for c in self.causes]}


def _strip_scope(node: Node) -> Node:
    while isinstance(node, Scoped):
        node = node.child
    return node


def _generic_phrase(node: Node, generic_tokens: set[tuple[str, ...]]) -> Phrase | None:
    inner = _strip_scope(node)
    if isinstance(inner, Phrase) and inner.tokens in generic_tokens:
        return inner
    return None


def generic_excluders(query: Query, generic_terms: Iterable[str] = DEFAULT_GENERIC_TERMS) -> list[str]:
    """Lint: generic single-phrase terms that the query makes mandatory."""
    generic = {tokenize(t) for t in generic_terms}
    found = []
    for _, node in top_level_conjuncts(query.root):
        p = _generic_phrase(node, generic)
        if p is not None:
            found.append(p.text)
    return found


def _node_at(root: Node, path: NodePath) -> Node:
    node = root
    for i in path:
        node = node.children[i] if isinstance(node, (And, Or)) else node.child  # type: ignore[union-attr]
    return node


def _filter_evidence(name: str, record: Any, config: SearchConfig) -> dict[str, Any]:
    if name == "source":
        return {"record_sources": sorted(record.source_databases), "searched_sources": sorted(config.sources)}
    if name == "cutoff":
        return {"year": record.year, "cutoff_year": config.cutoff_date.year, "cutoff_date": config.cutoff_date.isoformat()}
    if name == "year_range":
        return {"year": record.year, "year_range": list(config.year_range)}
    if name == "doc_type":
        return {"doc_type": record.doc_type.value, "allowed": sorted(d.value for d in config.doc_type_filter)}
    if name == "study_design":
        return {"study_design": record.study_design.value}
    if name == "subject_area":
        return {"record_areas": sorted(record.subject_areas), "filter": sorted(config.subject_area_filter)}
    return {}


def diagnose_record(
    record: Any,
    query: Query,
    config: SearchConfig,
    generic_terms: Iterable[str] = DEFAULT_GENERIC_TERMS,
) -> MissDiagnosis:
    """Causes explaining why ``record`` is not in the search result."""
    result = evaluate(query, record, config)
    if result.matched:
        return MissDiagnosis(record.record_id, (Cause(CauseKind.UNEXPLAINED, {"note": UNEXPLAINED_NOTE}),))

    causes: list[Cause] = []
    for name, kind in _FILTER_CAUSES:
        if result.filter_trace.get(name) is False:
            causes.append(Cause(kind, {"filter": name, **_filter_evidence(name, record, config)}))

    generic = {tokenize(t) for t in generic_terms}
    absent: list[Cause] = []
    excluders: list[Cause] = []
    for index, (path, node) in enumerate(top_level_conjuncts(query.root)):
        if result.node_values[path]:
            continue
        label = conjunct_label(index)
        phrases = [(p, result.clause_trace[p]) for p, _ in iter_phrases(node, path)]
        gp = _generic_phrase(node, generic)
        if gp is not None:
            excluders.append(
                Cause(
                    CauseKind.GENERIC_TERM_EXCLUDER,
                    {"conjunct": label, "conjunct_index": index, "phrase": gp.text, "scope": phrases[0][1].scope.value},
                )
            )
            continue
        absent.append(
            Cause(
                CauseKind.TERM_ABSENT,
                {
                    "conjunct": label,
                    "conjunct_index": index,
                    "conjunct_text": format_query(node),
                    "alternatives": [t.text for _, t in phrases],
                    "matched_alternatives": {t.text: sorted(t.fields) for _, t in phrases if t.matched},
                    "scope": config.field_scope.value,
                },
            )
        )
    causes.extend(absent)
    causes.extend(excluders)
    return MissDiagnosis(record.record_id, tuple(causes))


def diagnose_misses(
    qgs: QGS,
    result: RecordSet,
    query: Query,
    config: SearchConfig,
    corpus: RecordSet,
    generic_terms: Iterable[str] = DEFAULT_GENERIC_TERMS,
) -> list[MissDiagnosis]:
    """Diagnose every QGS member absent from ``result``, sorted by record id."""
    qgs.require_resolved(corpus)
    missed = sorted(qgs.ids - result.ids)
    return [diagnose_record(corpus[rid], query, config, generic_terms) for rid in missed]


def tally(diagnoses: Iterable[MissDiagnosis]) -> dict[str, int]:
    """Count of diagnosed misses per cause label, e.g. ``{"TERM_ABSENT(A)": 33}``."""
    counts: Counter[str] = Counter()
    for d in diagnoses:
        for label in dict.fromkeys(c.label for c in d.causes):
            counts[label] += 1
    return dict(sorted(counts.items()))


# --------------------------------------------------------------------------
# Counterfactual query edits
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class AddOrDisjunct:
    phrase: str
    conjunct_index: int

    def describe(self) -> str:
        return f'add OR "{self.phrase}" to conjunct {conjunct_label(self.conjunct_index)}'


@dataclass(frozen=True)
class RemoveAndConjunct:
    index: int

    def describe(self) -> str:
        return f"remove AND conjunct {conjunct_label(self.index)}"


@dataclass(frozen=True)
class ChangeScope:
    scope: Scope

    def describe(self) -> str:
        return f"change scope to {Scope.parse(self.scope).value}"


@dataclass(frozen=True)
class ChangeFilter:
    changes: Mapping[str, Any]

    def describe(self) -> str:
        return "change filter " + ", ".join(f"{k}={v!r}" for k, v in sorted(self.changes.items()))


QueryEdit = Union[AddOrDisjunct, RemoveAndConjunct, ChangeScope, ChangeFilter]


def _replace_at(root: Node, path: NodePath, new: Node) -> Node:
    if not path:
        return new
    head, rest = path[0], path[1:]
    if isinstance(root, (And, Or)):
        children = list(root.children)
        children[head] = _replace_at(children[head], rest, new)
        return type(root)(tuple(children))
    if isinstance(root, Not):
        return Not(_replace_at(root.child, rest, new))
    if isinstance(root, Scoped):
        return Scoped(root.scope, _replace_at(root.child, rest, new))
    raise DiagnosisError(f"invalid path {path}")


def _with_disjunct(node: Node, phrase: Phrase) -> Node:
    if isinstance(node, Scoped):
        return Scoped(node.scope, _with_disjunct(node.child, phrase))
    if isinstance(node, Or):
        return Or(node.children + (phrase,))
    return Or((node, phrase))


def apply_edit(query: Query, config: SearchConfig, edit: QueryEdit) -> tuple[Query, SearchConfig]:
    """Return the edited query and configuration; raises :class:`DiagnosisError` on a malformed edit."""
    root = query.root
    if isinstance(edit, AddOrDisjunct):
        if not tokenize(edit.phrase):
            raise DiagnosisError("cannot add an empty phrase")
        conjuncts = top_level_conjuncts(root)
        if not 0 <= edit.conjunct_index < len(conjuncts):
            raise DiagnosisError(f"conjunct index {edit.conjunct_index} out of range (query has {len(conjuncts)})")
        path, node = conjuncts[edit.conjunct_index]
        new_root = _replace_at(root, path, _with_disjunct(node, Phrase(edit.phrase)))
        return Query(new_root), config
    if isinstance(edit, RemoveAndConjunct):
        conjuncts = top_level_conjuncts(root)
        if len(conjuncts) < 2:
            raise DiagnosisError("cannot remove the only conjunct of a query")
        if not 0 <= edit.index < len(conjuncts):
            raise DiagnosisError(f"conjunct index {edit.index} out of range (query has {len(conjuncts)})")
        and_path = conjuncts[0][0][:-1]
        and_node = _node_at(root, and_path)
        assert isinstance(and_node, And)
        kept = tuple(c for i, c in enumerate(and_node.children) if i != edit.index)
        replacement = kept[0] if len(kept) == 1 else And(kept)
        return Query(_replace_at(root, and_path, replacement)), config
    if isinstance(edit, ChangeScope):
        try:
            scope = Scope.parse(edit.scope)
        except ValueError as exc:
            raise DiagnosisError(str(exc)) from exc
        return Query(root, query.text), replace(config, field_scope=scope)
    if isinstance(edit, ChangeFilter):
        allowed = {f.name for f in fields(SearchConfig)}
        unknown = sorted(set(edit.changes) - allowed)
        if unknown:
            raise DiagnosisError(f"unknown filter field(s): {unknown}")
        try:
            return Query(root, query.text), replace(config, **edit.changes)
        except (TypeError, ValueError) as exc:
            raise DiagnosisError(f"invalid filter change: {exc}") from exc
    raise DiagnosisError(f"unsupported edit: {edit!r}")


@dataclass(frozen=True)
class CounterfactualReport:
    edit: str
    query_before: str
    query_after: str
    config_before: SearchConfig
    config_after: SearchConfig
    before: ValidationReport
    after: ValidationReport

    @property
    def size_delta(self) -> int:
        return self.after.result_size - self.before.result_size

    @property
    def recall_delta(self) -> float:
        return round(self.after.recall_percent - self.before.recall_percent, 2)

    def to_dict(self) -> dict[str, Any]:
        return {
            "edit": self.edit,
            "query_before": self.query_before,
            "query_after": self.query_after,
            "config_before": self.config_before.to_dict(),
            "config_after": self.config_after.to_dict(),
            "before": self.before.to_dict(),
            "after": self.after.to_dict(),
            "result_size_before": self.before.result_size,
            "result_size_after": self.after.result_size,
            "result_size_delta": self.size_delta,
            "recall_delta": self.recall_delta,
            "newly_found": sorted(self.after.found - self.before.found),
        }


def counterfactual_search(
    query: Query,
    edit: QueryEdit,
    corpus: RecordSet,
    config: SearchConfig,
    qgs: QGS,
    threshold: Sequence[float] | str | float | None = None,
) -> CounterfactualReport:
    """Recall, precision and result size before and after one query edit."""
    new_query, new_config = apply_edit(query, config, edit)
    before = validate_search(qgs, run_search(query, corpus, config), threshold)
    after = validate_search(qgs, run_search(new_query, corpus, new_config), threshold)
    return CounterfactualReport(
        edit=edit.describe(),
        query_before=format_query(query.root),
        query_after=format_query(new_query.root),
        config_before=config,
        config_after=new_config,
        before=before,
        after=after,
    )
