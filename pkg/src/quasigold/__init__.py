"""Validate systematic-review search strategies against quasi-gold standards."""

__version__ = "0.1.0"

from .records import BibRecord, DocType, RecordSet, StudyDesign, make_record_set  # noqa: E402
from .ingest import parse_bibtex, parse_csv, parse_ris, CsvColumnMap  # noqa: E402
from .dedup import DedupPolicy, dedup, normalize_title  # noqa: E402
from .query import Query, Scope, SearchConfig, evaluate, parse_query, run_search  # noqa: E402
from .metrics import overlap, precision, recall, validate_search  # noqa: E402
from .qgs import QGS, Attestation, Origin, build_qgs_from_sls, diversity, qgs_quality_report  # noqa: E402
from .diagnose import counterfactual_search, diagnose_misses, tally  # noqa: E402
from .snowball import CitationTable, evaluate_snowball, forward_snowball  # noqa: E402
from .simgen import SimConfig, estimator_experiment, generate  # noqa: E402

__all__ = [
    "BibRecord",
    "DocType",
    "RecordSet",
    "StudyDesign",
    "make_record_set",
    "parse_bibtex",
    "parse_csv",
    "parse_ris",
    "CsvColumnMap",
    "DedupPolicy",
    "dedup",
    "normalize_title",
    "Query",
    "Scope",
    "SearchConfig",
    "evaluate",
    "parse_query",
    "run_search",
    "overlap",
    "precision",
    "recall",
    "validate_search",
    "QGS",
    "Attestation",
    "Origin",
    "build_qgs_from_sls",
    "diversity",
    "qgs_quality_report",
    "counterfactual_search",
    "diagnose_misses",
    "tally",
    "CitationTable",
    "evaluate_snowball",
    "forward_snowball",
    "SimConfig",
    "estimator_experiment",
    "generate",
]
