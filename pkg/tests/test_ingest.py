import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasigold.ingest import (
    CsvColumnMap,
    IngestError,
    is_canonical_csv,
    load_record_set,
    parse_bibtex,
    parse_csv,
    parse_ris,
    parse_year,
    to_canonical_csv,
)
from quasigold.latex import latex_to_unicode
from quasigold.records import BibRecord, DocType, StudyDesign, make_record_set
from quasigold.text import normalize_title, tokenize


# --- text and LaTeX ---------------------------------------------------------


def test_normalize_title_examples():
    assert normalize_title("Software  Testing:   A Review") == "software testing a review"
    assert normalize_title("") == ""
    assert normalize_title("Model-Based Testing \u2014 État de l'art") == "model based testing état de l art"


def test_tokenize_splits_hyphens_and_casefolds():
    assert tokenize("Model-Based TESTING") == ("model", "based", "testing")
    assert tokenize(None) == ()


@given(st.text())
def test_normalize_title_idempotent(text):
    once = normalize_title(text)
    assert normalize_title(once) == once


@pytest.mark.parametrize(
    "raw, expected",
    [
        ("Soft{w}are", "Software"),
        ('M{\\"u}ller', "Müller"),
        ("{\\'E}tat", "État"),
        ('na\\"{\\i}ve', "naïve"),
        ("Gau{\\ss}", "Gauß"),
        ("R\\&D", "R&D"),
        ("a~b", "a b"),
        ("\\emph{Bold}", "\\emph{Bold}"),
    ],
)
def test_latex_to_unicode(raw, expected):
    assert latex_to_unicode(raw) == expected


# --- BibTeX -----------------------------------------------------------------


def test_bibtex_single_article():
    result = parse_bibtex("@article{x, title={Testing}, author={A. Smith}, year={2015}}")
    (rec,) = result.records
    assert rec.doc_type is DocType.JOURNAL_ARTICLE
    assert rec.year == 2015
    assert rec.title == "Testing"
    assert rec.authors == ("A. Smith",)
    assert not result.diagnostics


def test_bibtex_partial_tolerance():
    text = """@article{a, title={First}, year=2014}

@inproceedings{b, title={Broken {brace}, year=2015}

@book{c, title="Third", year = 2016}
"""
    result = parse_bibtex(text)
    assert [r.title for r in result.records] == ["First", "Third"]
    assert len(result.diagnostics) == 1
    assert result.diagnostics[0].line == 3


def test_bibtex_brace_stripping():
    (rec,) = parse_bibtex("@article{x, title={Soft{w}are}}").records
    assert rec.title == "Software"


def test_bibtex_empty_input():
    result = parse_bibtex("")
    assert result.records == () or list(result.records) == []
    assert not result.diagnostics


def test_bibtex_fields_and_types():
    text = r"""
@string{tse = "IEEE Trans. Softw. Eng."}
@InProceedings{k1,
  title     = {A {S}ystematic Mapping of Test Smells},
  author    = {Novak, Ana Maria and M{\"u}ller, J{\"o}rg and {Research Group} and Silva, Rui da},
  booktitle = {Proc. ICST},
  year      = 2019,
  doi       = {https://doi.org/10.1109/ICST.2019.00001},
  keywords  = {test smells; mapping study},
  publisher = {IEEE},
}
@article{k2, title = "Concatenated " # tse, journal = tse, year = {2016}}
@misc{k3, title={Grey}}
"""
    recs = {r.title: r for r in parse_bibtex(text, source="IEEE Xplore").records}
    r1 = recs["A Systematic Mapping of Test Smells"]
    assert r1.doc_type is DocType.CONFERENCE_PAPER
    assert r1.authors == ("Novak, Ana Maria", "Müller, Jörg", "Research Group", "Silva, Rui da")
    assert r1.doi == "https://doi.org/10.1109/ICST.2019.00001"
    assert r1.record_id == "doi:10.1109/icst.2019.00001"
    assert r1.venue == "Proc. ICST"
    assert r1.keywords == ("test smells", "mapping study")
    assert r1.source_databases == frozenset({"IEEE Xplore"})
    r2 = recs["Concatenated IEEE Trans. Softw. Eng."]
    assert r2.venue == "IEEE Trans. Softw. Eng."
    assert recs["Grey"].doc_type is DocType.OTHER


# --- RIS --------------------------------------------------------------------

RIS_THREE = """TY  - JOUR
TI  - First
AU  - Novak, A.
AU  - Muller, J.
PY  - 2016/03//
ER  -
TY  - JOUR
AU  - Nobody, N.
PY  - 2017
ER  -
TY  - CONF
T1  - Third
KW  - test case
KW  - quality
AB  - An abstract
  continued here.
ER  -
"""


def test_ris_year_and_authors():
    result = parse_ris(RIS_THREE)
    first = result.records[0]
    assert first.year == 2016
    assert first.authors == ("Novak, A.", "Muller, J.")


def test_ris_missing_title_skipped():
    result = parse_ris(RIS_THREE)
    assert [r.title for r in result.records] == ["First", "Third"]
    assert len(result.diagnostics) == 1
    third = result.records[1]
    assert third.doc_type is DocType.CONFERENCE_PAPER
    assert third.keywords == ("test case", "quality")
    assert third.abstract == "An abstract continued here."


def test_ris_stray_lines_reported():
    text = "garbage before\nTY  - JOUR\nTI  - Only\nER  - \n"
    result = parse_ris(text)
    assert [r.title for r in result.records] == ["Only"]
    assert len(result.diagnostics) == 1 and result.diagnostics[0].line == 1


# --- CSV --------------------------------------------------------------------

SCOPUS_HEADER = "Authors,Title,Year,Source title,Abstract,Author Keywords,Index Keywords,DOI,EID,Document Type,Publisher,Source\n"


def test_scopus_keywords_split():
    text = SCOPUS_HEADER + 'Novak A.,A study,2020,IST,abs,test case; quality,,,2-s2.0-1,Article,Elsevier,Scopus\n'
    (rec,) = parse_csv(text, CsvColumnMap(), source="Scopus").records
    assert rec.keywords == ("test case", "quality")
    assert rec.doc_type is DocType.JOURNAL_ARTICLE
    assert rec.record_id == "db:2-s2.0-1"


def test_csv_bad_year_diagnostic():
    text = SCOPUS_HEADER + "Novak A.,A study,n/a,IST,,,,,,Article,,Scopus\n"
    result = parse_csv(text, CsvColumnMap())
    (rec,) = result.records
    assert rec.year is None
    assert len(result.diagnostics) == 1


def test_csv_missing_title_column_is_fatal():
    with pytest.raises(IngestError):
        parse_csv("Authors,Year\nX,2019\n", CsvColumnMap())


def test_scopus_export_of_572_rows():
    rows = [
        f'"Author{i} A.","Paper {i} on test artifacts",{2000 + i % 20},Venue {i % 7},,"k{i}",,,2-s2.0-{i},Review,,Scopus'
        for i in range(572)
    ]
    result = parse_csv(SCOPUS_HEADER + "\n".join(rows) + "\n", CsvColumnMap(), source="Scopus")
    assert len(make_record_set("scopus", result.records)) == 572


def test_parse_year():
    assert parse_year("2016/03//") == 2016
    assert parse_year("n/a") is None
    assert parse_year("1850") is None
    assert parse_year(None) is None


# --- canonical CSV round trip -----------------------------------------------

# ingest collapses whitespace, so generated values are already single-spaced
_token = st.text(alphabet=st.sampled_from("abcdefghéü-"), min_size=1, max_size=6)
words = st.lists(_token, min_size=1, max_size=3).map(" ".join)


@st.composite
def records(draw):
    title = draw(words)
    return BibRecord.create(
        title.strip(),
        year=draw(st.one_of(st.none(), st.integers(1990, 2030))),
        doi=draw(st.one_of(st.none(), st.from_regex(r"10\.[0-9]{4}/[a-z0-9]{1,6}", fullmatch=True))),
        abstract=draw(st.one_of(st.none(), words.map(str.strip))),
        keywords=tuple(dict.fromkeys(k.strip() for k in draw(st.lists(words, max_size=3)))),
        authors=tuple(a.strip() for a in draw(st.lists(words, max_size=3))),
        venue=draw(st.one_of(st.none(), words.map(str.strip))),
        doc_type=draw(st.sampled_from(list(DocType))),
        study_design=draw(st.sampled_from(list(StudyDesign))),
        subject_areas=frozenset(s.strip() for s in draw(st.lists(words, max_size=2))),
        source_databases=frozenset(draw(st.lists(st.sampled_from(["Scopus", "ACM", "IEEE"]), max_size=2))),
    )


@settings(max_examples=150, deadline=None)
@given(st.lists(records(), max_size=6))
def test_canonical_csv_round_trip(recs):
    rs = make_record_set("orig", recs)
    text = to_canonical_csv(rs)
    assert is_canonical_csv(text)
    back = make_record_set("orig", parse_csv(io.StringIO(text), CsvColumnMap.canonical()).records)
    assert back == rs
    assert to_canonical_csv(back) == text


def test_load_record_set_dispatch(tmp_path):
    bib = tmp_path / "a.bib"
    bib.write_text("@article{x, title={One}, year=2015}\n@article{y, title={Two}, year=2016}\n")
    rs, diags = load_record_set(bib, source="ACM")
    assert len(rs) == 2 and not diags
    assert all(r.source_databases == frozenset({"ACM"}) for r in rs)
    ris = tmp_path / "b.ris"
    ris.write_text("TY  - JOUR\nTI  - Three\nER  - \n")
    assert len(load_record_set(ris)[0]) == 1


def test_ingest_is_deterministic():
    text = "@article{x, title={One}, year=2015}\n@article{y, title={Two}, year=2016}\n"
    assert make_record_set("a", parse_bibtex(text).records) == make_record_set("a", parse_bibtex(text).records)
