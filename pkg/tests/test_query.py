import datetime as dt
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import PHRASE_POOL, naive_contains, random_ast, record_for, truth_table
from quasigold.casestudy import FIRST_SEARCH, SECONDARY_STUDY_TERMS, TEST_ARTIFACT_TERMS
from quasigold.query import (
    And,
    Not,
    Or,
    Phrase,
    QuerySyntaxError,
    Scope,
    Scoped,
    SearchConfig,
    conjunct_label,
    evaluate,
    format_query,
    parse_cutoff,
    parse_query,
    run_search,
    top_level_conjuncts,
)
from quasigold.records import BibRecord, DocType, StudyDesign, make_record_set

P = Phrase


# --- parsing ----------------------------------------------------------------


def test_parse_two_groups():
    q = parse_query('("test case" OR "test suite") AND ("systematic review" OR "systematic mapping")')
    assert q.root == And((Or((P("test case"), P("test suite"))), Or((P("systematic review"), P("systematic mapping")))))


def test_or_binds_looser_than_and():
    assert parse_query('"a" OR "b" AND "c"').root == Or((P("a"), And((P("b"), P("c")))))


def test_not_binds_tightest():
    assert parse_query('NOT "a" AND "b"').root == And((Not(P("a")), P("b")))
    assert parse_query('"a" AND NOT "b"').root == And((P("a"), Not(P("b"))))


def test_keywords_case_insensitive_and_bare_words():
    assert parse_query("testing or review").root == Or((P("testing"), P("review")))


def test_scope_markers():
    assert parse_query('TITLE:"a"').root == Scoped(Scope.TITLE, P("a"))
    assert parse_query('TITLE-ABS-KEY("a" OR "b")').root == Scoped(Scope.TITLE_ABS_KEY, Or((P("a"), P("b"))))


@pytest.mark.parametrize(
    "text, offset",
    [
        ('"test" AND ("review"', 20),
        ('"a" AND', 7),
        ('""', 0),
        ('"a', 0),
        ('"a")', 3),
        ('AND "a"', 0),
        ('"a" OR OR "b"', 7),
        ("", 0),
    ],
)
def test_syntax_errors_report_offset(text, offset):
    with pytest.raises(QuerySyntaxError) as err:
        parse_query(text)
    assert err.value.offset == offset


def test_unbalanced_paren_offset_is_end_of_input():
    text = '"test" AND ("review"'
    with pytest.raises(QuerySyntaxError) as err:
        parse_query(text)
    assert err.value.offset == len(text)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_format_round_trip(seed):
    root = random_ast(random.Random(seed))
    assert parse_query(format_query(root)).root == _flatten(root)


def _flatten(node):
    """Parser output merges nested same-kind operators; mirror that for comparison."""
    if isinstance(node, Phrase):
        return node
    if isinstance(node, Not):
        return Not(_flatten(node.child))
    if isinstance(node, Scoped):
        return Scoped(node.scope, _flatten(node.child))
    kids = []
    for c in (_flatten(c) for c in node.children):
        kids.extend(c.children if type(c) is type(node) else (c,))
    return type(node)(tuple(kids))


def test_conjuncts_and_labels():
    q = parse_query(FIRST_SEARCH)
    conj = top_level_conjuncts(q.root)
    assert len(conj) == 2
    assert [conjunct_label(i) for i in range(3)] == ["A", "B", "C"]
    assert conjunct_label(26) == "AA"


# --- phrase semantics -------------------------------------------------------


def rec(title, abstract=None, keywords=(), **kw):
    return BibRecord(record_id=kw.pop("rid", "r"), title=title, abstract=abstract, keywords=tuple(keywords), **kw)


def test_title_scope_match():
    r = rec("A systematic review of test case prioritization")
    q = parse_query('"test case" AND "systematic review"')
    assert evaluate(q, r, SearchConfig(field_scope=Scope.TITLE)).matched


def test_contiguity_and_no_stemming():
    r = rec("Testing of cases", abstract="test and case")
    assert not evaluate(parse_query('"test case"'), r).matched
    assert not evaluate(parse_query('"test"'), rec("Testing")).matched
    assert evaluate(parse_query('"model based"'), rec("Model-Based testing")).matched


def test_phrase_does_not_span_fields_or_keywords():
    r = rec("about test", abstract="case studies", keywords=("unit test", "case"))
    assert not evaluate(parse_query('"test case"'), r).matched


def test_title_scope_ignores_abstract_and_keywords():
    r = rec("Unrelated", abstract="a test case", keywords=("test case",))
    assert not evaluate(parse_query('"test case"'), r, SearchConfig(field_scope=Scope.TITLE)).matched
    res = evaluate(parse_query('"test case"'), r)
    assert res.matched
    (trace,) = res.clause_trace.values()
    assert trace.fields == frozenset({"abstract", "keywords"})


def test_scoped_subexpression_overrides_config():
    r = rec("Unrelated", abstract="a test case")
    assert not evaluate(parse_query('TITLE:"test case"'), r).matched
    assert evaluate(parse_query('TITLE-ABS-KEY:"test case"'), r, SearchConfig(field_scope=Scope.TITLE)).matched


def test_clause_trace_records_every_phrase():
    r = rec("No artifacts here", abstract="a systematic review of testing")
    res = evaluate(parse_query(FIRST_SEARCH), r)
    assert not res.matched
    traces = list(res.clause_trace.values())
    artifact = [t for t in traces if t.text in TEST_ARTIFACT_TERMS]
    assert len(artifact) == len(TEST_ARTIFACT_TERMS) and not any(t.matched for t in artifact)
    assert any(t.matched for t in traces if t.text == "systematic review")


@settings(max_examples=300)
@given(
    st.lists(st.sampled_from(["test", "case", "suite", "a", "review", "Test-Case"]), max_size=8),
    st.sampled_from(["test case", "case", "test suite review", "a a"]),
)
def test_phrase_match_matches_naive_scan(words, phrase):
    title = " ".join(words) or "x"
    got = evaluate(Phrase(phrase), rec(title), SearchConfig(field_scope=Scope.TITLE)).matched
    assert got == naive_contains(title, phrase)


# --- boolean laws -----------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_truth_table_oracle(seed):
    rng = random.Random(seed)
    root = random_ast(rng)
    for assignment, expected in truth_table(root):
        r = record_for(rng, assignment, Scope.TITLE_ABS_KEY, "x")
        assert evaluate(root, r).boolean_match == expected


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_de_morgan(seed):
    rng = random.Random(seed)
    a, b = random_ast(rng, 2, 3), random_ast(rng, 2, 3)
    assignment = {p: rng.random() < 0.5 for p in PHRASE_POOL}
    r = record_for(rng, assignment, Scope.TITLE_ABS_KEY, "x")
    lhs = evaluate(Not(And((a, b))), r).boolean_match
    rhs = evaluate(Or((Not(a), Not(b))), r).boolean_match
    assert lhs == rhs
    assert evaluate(Not(Or((a, b))), r).boolean_match == evaluate(And((Not(a), Not(b))), r).boolean_match


# --- filters ----------------------------------------------------------------

Q = parse_query('"test case"')


def test_subject_area_filter():
    eng = rec("test case study", subject_areas=frozenset({"Engineering"}))
    cfg = SearchConfig(subject_area_filter=frozenset({"Computer Science"}))
    res = evaluate(Q, eng, cfg)
    assert res.boolean_match and not res.matched
    assert res.filter_trace == {"subject_area": False}


def test_lenient_unlabeled_policy():
    bare = rec("test case study")
    cfg = SearchConfig(subject_area_filter=frozenset({"Computer Science"}), sources=frozenset({"Scopus"}))
    assert evaluate(Q, bare, cfg).matched
    strict = SearchConfig(**{**cfg.__dict__, "lenient_unlabeled": False})
    assert evaluate(Q, bare, strict).filter_trace == {"source": False, "subject_area": False}


def test_cutoff_year_granularity():
    cfg = SearchConfig(cutoff_date=parse_cutoff("2015-10"))
    assert evaluate(Q, rec("test case", year=2015), cfg).matched
    assert not evaluate(Q, rec("test case", year=2016), cfg).matched
    assert evaluate(Q, rec("test case"), cfg).matched


def test_parse_cutoff():
    assert parse_cutoff("2015") == dt.date(2015, 12, 31)
    assert parse_cutoff("2015-10") == dt.date(2015, 10, 1)
    with pytest.raises(ValueError):
        parse_cutoff("Oct 2015")


def test_doc_type_year_range_and_design_filters():
    r = rec("test case", year=2010, doc_type=DocType.CONFERENCE_PAPER, study_design=StudyDesign.INFORMAL_SURVEY)
    assert not evaluate(Q, r, SearchConfig(doc_type_filter=frozenset({"journal-article"}))).matched
    assert not evaluate(Q, r, SearchConfig(year_range=(2012, 2020))).matched
    assert not evaluate(Q, r, SearchConfig(require_systematic=True)).matched
    assert evaluate(Q, r, SearchConfig(doc_type_filter=frozenset({DocType.CONFERENCE_PAPER}), year_range=(2010, 2010))).matched


def test_source_filter():
    r = rec("test case", source_databases=frozenset({"ACM"}))
    assert not evaluate(Q, r, SearchConfig(sources=frozenset({"Scopus"}))).matched
    assert evaluate(Q, r, SearchConfig(sources=frozenset({"Scopus", "ACM"}))).matched


def test_config_dict_round_trip():
    cfg = SearchConfig(
        sources=frozenset({"Scopus"}),
        field_scope=Scope.TITLE,
        subject_area_filter=frozenset({"Computer Science"}),
        doc_type_filter=frozenset({DocType.JOURNAL_ARTICLE}),
        cutoff_date=dt.date(2015, 10, 1),
        year_range=(2000, 2015),
        require_systematic=True,
    )
    assert SearchConfig.from_dict(cfg.to_dict()) == cfg


# --- run_search -------------------------------------------------------------

THIRD_SEARCH = (
    "(" + " OR ".join(f'"{t}"' for t in TEST_ARTIFACT_TERMS + ("test", "testing")) + ") AND ("
    + " OR ".join(f'"{t}"' for t in SECONDARY_STUDY_TERMS + ("systematic map", "systematic literature survey"))
    + ")"
)

# (title, abstract, keywords, matches first search)
TWENTY = [
    ("Test case prioritization: a systematic review", None, (), True),
    ("A systematic mapping study of test suite reduction", None, (), True),
    ("Test script maintenance", "We report a systematic literature review.", (), True),
    ("Quality of test code", None, ("systematic scoping",), True),
    ("Natural language test specifications", "A systematic review of approaches.", (), True),
    ("Test specification languages", None, ("systematic mapping",), True),
    ("On test-case quality", "systematic-review protocol", (), True),
    ("Software testing: a systematic literature survey", None, (), False),
    ("Testing research: a systematic map", None, (), False),
    ("A systematic review of software testing", None, (), False),
    ("Test automation maturity", "A systematic review.", (), False),
    ("Test case generation", "A survey.", (), False),
    ("Test suites in industry", None, ("review",), False),
    ("Cases for testing", "systematic reviews", (), False),
    ("Mutation analysis", None, (), False),
    ("Review of test smells", None, (), False),
    ("Systematic study of test", "case", (), False),
    ("A mapping of regression testing", None, (), False),
    ("Testing in the systematic literature", None, (), False),
    ("Code review practices", "systematic mapping", (), False),
]


def twenty_record_corpus():
    return make_record_set(
        "twenty",
        [BibRecord(record_id=f"f{i:02d}", title=t, abstract=a, keywords=k) for i, (t, a, k, _) in enumerate(TWENTY)],
    )


def test_first_search_over_twenty_records():
    corpus = twenty_record_corpus()
    result = run_search(parse_query(FIRST_SEARCH), corpus)
    expected = {f"f{i:02d}" for i, row in enumerate(TWENTY) if row[3]}
    assert len(expected) == 7
    assert result.ids == expected


def test_third_search_is_superset():
    corpus = twenty_record_corpus()
    first = run_search(parse_query(FIRST_SEARCH), corpus)
    third = run_search(parse_query(THIRD_SEARCH), corpus)
    assert first.ids <= third.ids
    assert {"f07", "f08", "f09", "f10"} <= third.ids


def test_empty_corpus():
    assert len(run_search(parse_query('"x"'), make_record_set("empty", []))) == 0
