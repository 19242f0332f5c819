"""Command-line front end.

Exit status: 0 on success, 1 on usage errors, 2 on data errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from collections.abc import Sequence
from dataclasses import replace
from pathlib import Path
from typing import Any

from .dedup import DedupMode, DedupPolicy, dedup
from .diagnose import (
    AddOrDisjunct,
    ChangeFilter,
    ChangeScope,
    DiagnosisError,
    RemoveAndConjunct,
    counterfactual_search,
    diagnose_misses,
    DEFAULT_GENERIC_TERMS,
    generic_excluders,
    tally,
)
from .ingest import IngestError, load_record_set, parse_file, to_canonical_csv
from .metrics import MetricsError, overlap, validate_search
from .qgs import QGS, QGSError, qgs_quality_report
from .query import (
    Query,
    QuerySyntaxError,
    Scope,
    SearchConfig,
    format_query,
    parse_cutoff,
    parse_query,
    run_search,
)
from .records import RecordSet, make_record_set
from .report import PHRASE_SEMANTICS_NOTE, PipelineRun, envelope, to_csv, to_json, to_text, use_color
from .simgen import SimConfig, SimulationError, estimator_experiment, generate, load_sim_config
from .snowball import CitationTable, SnowballError, evaluate_snowball, forward_snowball

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

DATA_ERRORS = (
    IngestError,
    QGSError,
    MetricsError,
    QuerySyntaxError,
    SnowballError,
    SimulationError,
    DiagnosisError,
    OSError,
    ValueError,
    KeyError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# Argument groups
# --------------------------------------------------------------------------


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--report", metavar="PATH", help="write the report here instead of stdout")
    p.add_argument(
        "--deterministic", action="store_true", help="omit the timestamp so identical runs give identical reports"
    )


def _add_dedup(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dedup", choices=("strict", "fuzzy"), help="deduplicate each input after loading")
    p.add_argument("--similarity", type=float, default=0.90, help="fuzzy title-similarity threshold")
    p.add_argument("--no-author-match", action="store_true", help="do not require equal first-author surnames")


def _add_search(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--query", help="boolean search string")
    g.add_argument("--query-file", help="file holding the search string")
    p.add_argument("--scope", choices=("title", "title-abs-key"), default="title-abs-key")
    p.add_argument("--subject-area", nargs="+", action="extend", metavar="NAME")
    p.add_argument("--cutoff", metavar="YYYY[-MM]")
    p.add_argument("--doc-type", nargs="+", action="extend", metavar="TYPE")
    p.add_argument("--source", dest="sources", nargs="+", action="extend", metavar="DB",
                   help="databases searched; records indexed only elsewhere do not match")
    p.add_argument("--year-range", nargs=2, type=int, metavar=("MIN", "MAX"))
    p.add_argument("--require-systematic", action="store_true")
    p.add_argument("--strict-unlabeled", action="store_true",
                   help="records without subject areas/sources/study design fail those filters")


def _add_threshold(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold", default="70,80", metavar="LOW[,HIGH]", help="recall acceptance threshold in percent")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="quasigold", description="Validate literature-search strategies against a quasi-gold standard.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse exports into one canonical CSV")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--source-db", help="database name recorded on every record")
    p.add_argument("--name", default="corpus")
    p.add_argument("--out", help="canonical CSV output")
    _add_dedup(p)
    _add_output(p)

    p = sub.add_parser("dedup", help="detect and merge duplicate records")
    p.add_argument("input")
    p.add_argument("--out", help="canonical CSV of the deduplicated set")
    _add_dedup(p)
    p.set_defaults(dedup="strict")
    _add_output(p)

    p = sub.add_parser("search", help="run a boolean query over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", help="canonical CSV of the result set")
    _add_search(p)
    _add_dedup(p)
    _add_output(p)

    p = sub.add_parser("validate", help="recall/precision of a result set against a QGS")
    p.add_argument("--qgs", required=True)
    p.add_argument("--result", required=True)
    _add_threshold(p)
    _add_dedup(p)
    _add_output(p)

    p = sub.add_parser("overlap", help="Venn-region counts across 2-6 sets")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--names", nargs="+")
    p.add_argument("--out", help="signature,count CSV")
    _add_dedup(p)
    _add_output(p)

    p = sub.add_parser("diagnose", help="explain why QGS members were missed")
    p.add_argument("--qgs", required=True)
    p.add_argument("--result", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--generic-term", nargs="+", action="extend", metavar="TERM")
    _add_search(p)
    _add_dedup(p)
    _add_output(p)

    p = sub.add_parser("qgs-quality", help="relevance, size and diversity of a QGS")
    p.add_argument("--qgs", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--reference-size", nargs="+", action="extend", metavar="NAME=N", default=[])
    _add_output(p)

    p = sub.add_parser("snowball", help="one-step forward snowballing")
    p.add_argument("--seeds", required=True, help="QGS JSON or a text file with one record id per line")
    p.add_argument("--citations", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--qgs", help="evaluate the sample against this QGS")
    p.add_argument("--out", help="canonical CSV of the snowball sample")
    _add_threshold(p)
    _add_dedup(p)
    _add_output(p)

    p = sub.add_parser("simulate", help="generate a synthetic corpus and optionally run an estimator experiment")
    p.add_argument("--config", help="SimConfig as JSON or TOML")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    p.add_argument("--out", help="canonical CSV of the corpus")
    p.add_argument("--ground-truth", help="record_id,relevant,lagged CSV")
    p.add_argument("--sampler", choices=("uniform", "single-venue", "single-year"))
    p.add_argument("--qgs-size", type=int)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--cluster")
    _add_search(p, required=False)
    _add_output(p)

    p = sub.add_parser("counterfactual", help="recall/precision before and after one query edit")
    p.add_argument("--qgs", required=True)
    p.add_argument("--corpus", required=True)
    _add_search(p)
    e = p.add_mutually_exclusive_group(required=True)
    e.add_argument("--add-or", metavar="PHRASE")
    e.add_argument("--remove-and", metavar="CONJUNCT")
    e.add_argument("--change-scope", choices=("title", "title-abs-key"))
    e.add_argument("--change-filter", nargs="+", metavar="FIELD=VALUE")
    p.add_argument("--conjunct", default="0", help="target conjunct for --add-or (index or letter)")
    _add_threshold(p)
    _add_dedup(p)
    _add_output(p)
    return parser


# --------------------------------------------------------------------------
# Helpers
# --------------------------------------------------------------------------


def _policy(args: argparse.Namespace) -> DedupPolicy | None:
    if not getattr(args, "dedup", None):
        return None
    return DedupPolicy(DedupMode(args.dedup), args.similarity, not args.no_author_match)


def _record_policy(args: argparse.Namespace, run: PipelineRun) -> None:
    policy = _policy(args)
    run.dedup_policy = policy.to_dict() if policy else None


def _load(path: str, args: argparse.Namespace, run: PipelineRun) -> RecordSet:
    run.inputs.append(path)
    rs, _ = load_record_set(path)
    policy = _policy(args)
    if policy is not None:
        rs, _ = dedup(rs, policy)
    return rs


def _load_qgs(path: str, run: PipelineRun) -> QGS:
    run.inputs.append(path)
    return QGS.load(path)


def _query(args: argparse.Namespace, run: PipelineRun) -> Query:
    if args.query_file:
        run.inputs.append(args.query_file)
        text = Path(args.query_file).read_text(encoding="utf-8").strip()
    else:
        text = args.query
    run.query = text
    return parse_query(text)


def _config(args: argparse.Namespace, run: PipelineRun) -> SearchConfig:
    config = SearchConfig(
        sources=frozenset(args.sources or ()),
        field_scope=Scope.parse(args.scope),
        subject_area_filter=frozenset(args.subject_area) if args.subject_area else None,
        doc_type_filter=frozenset(args.doc_type) if args.doc_type else None,
        cutoff_date=parse_cutoff(args.cutoff) if args.cutoff else None,
        year_range=tuple(args.year_range) if args.year_range else None,
        require_systematic=args.require_systematic,
        lenient_unlabeled=not args.strict_unlabeled,
    )
    run.search_config = config.to_dict()
    return config


def _conjunct_index(value: str) -> int:
    value = value.strip()
    if value.isdigit():
        return int(value)
    if value.isalpha():
        index = 0
        for ch in value.upper():
            index = index * 26 + (ord(ch) - ord("A") + 1)
        return index - 1
    raise UsageError(f"conjunct must be an index or a letter, got {value!r}")


def _filter_change(items: Sequence[str]) -> dict[str, Any]:
    changes: dict[str, Any] = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"--change-filter expects FIELD=VALUE, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        key = key.replace("-", "_")
        empty = value.lower() in ("", "none", "null")
        if key in ("subject_area_filter", "subject_area"):
            changes["subject_area_filter"] = None if empty else frozenset(v.strip() for v in value.split(","))
        elif key in ("doc_type_filter", "doc_type"):
            changes["doc_type_filter"] = None if empty else frozenset(v.strip() for v in value.split(","))
        elif key == "sources":
            changes["sources"] = frozenset() if empty else frozenset(v.strip() for v in value.split(","))
        elif key in ("cutoff_date", "cutoff"):
            changes["cutoff_date"] = None if empty else parse_cutoff(value)
        elif key == "year_range":
            changes["year_range"] = None if empty else tuple(int(v) for v in value.split(","))
        elif key in ("require_systematic", "lenient_unlabeled"):
            changes[key] = value.lower() in ("1", "true", "yes")
        else:
            raise UsageError(f"unknown filter field {key!r}")
    return changes


def _emit(args: argparse.Namespace, run: PipelineRun, body: dict[str, Any], csv_text: str) -> None:
    if args.report:
        run.outputs.append(args.report)
    document = envelope(run, body)
    if args.format == "json":
        text = to_json(document)
    elif args.format == "csv":
        text = csv_text
    else:
        text = to_text(document, color=not args.report and use_color(sys.stdout))
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _write(path: str | None, text: str, run: PipelineRun) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
        run.outputs.append(path)


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace, run: PipelineRun) -> None:
    files, records, diag_rows = [], [], []
    for path in args.inputs:
        run.inputs.append(path)
        parsed = parse_file(path, source=args.source_db)
        records.extend(parsed.records)
        files.append({"path": path, "records": len(parsed.records), "diagnostics": [str(d) for d in parsed.diagnostics]})
        diag_rows += [(path, d.line, d.message) for d in parsed.diagnostics]
    rs = make_record_set(args.name, records)
    body: dict[str, Any] = {"files": files, "records_parsed": len(records), "records_after_id_merge": len(rs)}
    policy = _policy(args)
    if policy is not None:
        run.dedup_policy = policy.to_dict()
        rs, report = dedup(rs, policy)
        body["dedup"] = report.to_dict()
        body["records_after_dedup"] = len(rs)
    _write(args.out, to_canonical_csv(rs), run)
    _emit(args, run, body, to_csv(("file", "line", "message"), diag_rows))


def cmd_dedup(args: argparse.Namespace, run: PipelineRun) -> None:
    run.inputs.append(args.input)
    rs, _ = load_record_set(args.input)
    policy = _policy(args)
    assert policy is not None
    run.dedup_policy = policy.to_dict()
    out, report = dedup(rs, policy)
    _write(args.out, to_canonical_csv(out), run)
    body = {"input_size": len(rs), "output_size": len(out), **report.to_dict()}
    rows = [(i, rid, report.survivors[c[0]]) for i, c in enumerate(report.clusters) for rid in c]
    _emit(args, run, body, to_csv(("cluster", "record_id", "survivor"), rows))


def cmd_search(args: argparse.Namespace, run: PipelineRun) -> None:
    _record_policy(args, run)
    corpus = _load(args.corpus, args, run)
    query, config = _query(args, run), _config(args, run)
    result = run_search(query, corpus, config)
    csv_text = to_canonical_csv(result)
    _write(args.out, csv_text, run)
    body = {
        "query": format_query(query.root),
        "corpus_size": len(corpus),
        "result_size": len(result),
        "record_ids": sorted(result.ids),
        "note": PHRASE_SEMANTICS_NOTE,
    }
    _emit(args, run, body, csv_text)


def _validation_csv(report: Any) -> str:
    d = report.to_dict()
    keys = ("qgs_size", "result_size", "found_count", "missed_count", "recall_percent", "precision_percent", "verdict")
    return to_csv(("metric", "value"), [(k, d[k]) for k in keys])


def cmd_validate(args: argparse.Namespace, run: PipelineRun) -> None:
    _record_policy(args, run)
    qgs = _load_qgs(args.qgs, run)
    result = _load(args.result, args, run)
    if not len(qgs):
        raise QGSError(f"QGS {args.qgs} is empty; recall is undefined")
    report = validate_search(qgs, result, args.threshold)
    _emit(args, run, report.to_dict(), _validation_csv(report))


def cmd_overlap(args: argparse.Namespace, run: PipelineRun) -> None:
    _record_policy(args, run)
    sets = [_load(p, args, run) for p in args.inputs]
    names = args.names or [Path(p).stem for p in args.inputs]
    if len(names) != len(sets):
        raise UsageError("--names must give one name per input")
    report = overlap(sets, names)
    _write(args.out, report.to_csv(), run)
    _emit(args, run, report.to_dict(), report.to_csv())


def cmd_diagnose(args: argparse.Namespace, run: PipelineRun) -> None:
    _record_policy(args, run)
    qgs = _load_qgs(args.qgs, run)
    result = _load(args.result, args, run)
    corpus = _load(args.corpus, args, run)
    query, config = _query(args, run), _config(args, run)
    generic = tuple(args.generic_term) if args.generic_term else DEFAULT_GENERIC_TERMS
    diagnoses = diagnose_misses(qgs, result, query, config, corpus, generic)
    counts = tally(diagnoses)
    body = {
        "query": format_query(query.root),
        "missed_count": len(diagnoses),
        "tally": counts,
        "generic_term_excluders": generic_excluders(query, generic),
        "diagnoses": [d.to_dict() for d in diagnoses],
        "note": PHRASE_SEMANTICS_NOTE,
    }
    _emit(args, run, body, to_csv(("cause", "count"), counts.items()))


def cmd_qgs_quality(args: argparse.Namespace, run: PipelineRun) -> None:
    qgs = _load_qgs(args.qgs, run)
    run.inputs.append(args.records)
    records, _ = load_record_set(args.records)
    refs = {}
    for item in args.reference_size:
        name, _, value = item.partition("=")
        if not value.strip().isdigit():
            raise UsageError(f"--reference-size expects NAME=N, got {item!r}")
        refs[name.strip()] = int(value)
    report = qgs_quality_report(qgs, records, refs)
    body = report.to_dict()
    rows = []
    if report.diversity is not None:
        for dim, prof in report.diversity.dimensions.items():
            rows.append((dim, prof.distinct_count, prof.missing, prof.normalized_entropy))
    _emit(args, run, body, to_csv(("dimension", "distinct_count", "missing", "normalized_entropy"), rows))


def _read_seeds(path: str) -> list[str]:
    text = Path(path).read_text(encoding="utf-8-sig")
    if path.lower().endswith(".json"):
        return sorted(QGS.from_dict(json.loads(text)).ids)
    return [line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")]


def cmd_snowball(args: argparse.Namespace, run: PipelineRun) -> None:
    _record_policy(args, run)
    run.inputs.append(args.seeds)
    seeds = _read_seeds(args.seeds)
    run.inputs.append(args.citations)
    citations = CitationTable.load(args.citations)
    corpus = _load(args.corpus, args, run)
    sample = forward_snowball(seeds, citations, corpus)
    _write(args.out, to_canonical_csv(sample), run)
    body: dict[str, Any] = {
        "seeds": len(seeds),
        "citation_edges": len(citations),
        "edges_to_seeds": sum(1 for _, b in citations.edges if b in set(seeds)),
        "sample_size": len(sample),
    }
    csv_text = to_csv(("record_id",), [(rid,) for rid in sorted(sample.ids)])
    if args.qgs:
        qgs = _load_qgs(args.qgs, run)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report = evaluate_snowball(sample, qgs, seeds, args.threshold)
        body["validation"] = report.to_dict()
        csv_text = _validation_csv(report)
    _emit(args, run, body, csv_text)


def cmd_simulate(args: argparse.Namespace, run: PipelineRun) -> None:
    if args.config:
        run.inputs.append(args.config)
        config = load_sim_config(args.config)
    else:
        config = SimConfig()
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    corpus = generate(config)
    _write(args.out, corpus.to_csv(), run)
    _write(args.ground_truth, corpus.ground_truth_csv(), run)
    body: dict[str, Any] = {
        "sim_config": config.to_dict(),
        "n_papers": len(corpus.records),
        "n_relevant": len(corpus.ground_truth_relevant),
        "n_lagged": len(corpus.lagged),
        "indexed_at_search": {k: len(v) for k, v in sorted(corpus.indexed_at_search.items())},
    }
    csv_text = to_csv(("metric", "value"), [(k, v) for k, v in body.items() if not isinstance(v, dict)])
    if args.sampler:
        if not (args.query or args.query_file) or args.qgs_size is None:
            raise UsageError("--sampler needs --query/--query-file and --qgs-size")
        query, search_config = _query(args, run), _config(args, run)
        seed = config.seed if args.seed is None else args.seed
        report = estimator_experiment(
            corpus, query, search_config, args.sampler, args.qgs_size, args.trials, seed, args.cluster
        )
        body["experiment"] = report.to_dict()
        csv_text = to_csv(
            ("trial", "estimated_recall", "true_recall", "cluster"),
            [(i, t.estimated_recall, report.true_recall, t.cluster) for i, t in enumerate(report.trials)],
        )
    _emit(args, run, body, csv_text)


def cmd_counterfactual(args: argparse.Namespace, run: PipelineRun) -> None:
    _record_policy(args, run)
    qgs = _load_qgs(args.qgs, run)
    corpus = _load(args.corpus, args, run)
    query, config = _query(args, run), _config(args, run)
    if args.add_or is not None:
        edit: Any = AddOrDisjunct(args.add_or, _conjunct_index(args.conjunct))
    elif args.remove_and is not None:
        edit = RemoveAndConjunct(_conjunct_index(args.remove_and))
    elif args.change_scope is not None:
        edit = ChangeScope(Scope.parse(args.change_scope))
    else:
        edit = ChangeFilter(_filter_change(args.change_filter))
    report = counterfactual_search(query, edit, corpus, config, qgs, args.threshold)
    d = report.to_dict()
    rows = [
        ("recall_percent", report.before.recall_percent, report.after.recall_percent),
        ("precision_percent", report.before.precision_percent, report.after.precision_percent),
        ("result_size", report.before.result_size, report.after.result_size),
        ("verdict", report.before.verdict.value, report.after.verdict.value),
    ]
    _emit(args, run, d, to_csv(("metric", "before", "after"), rows))


COMMANDS = {
    "ingest": cmd_ingest,
    "dedup": cmd_dedup,
    "search": cmd_search,
    "validate": cmd_validate,
    "overlap": cmd_overlap,
    "diagnose": cmd_diagnose,
    "qgs-quality": cmd_qgs_quality,
    "snowball": cmd_snowball,
    "simulate": cmd_simulate,
    "counterfactual": cmd_counterfactual,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    run = PipelineRun(command=args.command, argv=argv, deterministic=args.deterministic)
    try:
        COMMANDS[args.command](args, run)
    except UsageError as exc:
        print(f"quasigold {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"quasigold {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def replay(pipeline_run: dict[str, Any]) -> int:
    """Re-run the command recorded in a report's ``pipeline_run`` block."""
    return main(pipeline_run["argv"])


if __name__ == "__main__":
    sys.exit(main())
