import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import brute_force_regions
from quasigold.casestudy import search_fixture
from quasigold.metrics import (
    MetricsError,
    Verdict,
    overlap,
    parse_threshold,
    percent,
    precision,
    precision_fraction,
    recall,
    recall_fraction,
    validate_search,
)
from quasigold.qgs import QGS
from quasigold.records import BibRecord, make_record_set


def rs(name, ids):
    return make_record_set(name, [BibRecord(record_id=i, title=f"title {i}") for i in ids])


@pytest.mark.parametrize(
    "qgs_size, found, result_size, rec, prec",
    [
        (13, 8, 121, 61.54, 6.61),
        (13, 12, 569, 92.31, 2.11),
        (20, 10, 832, 50.00, 1.20),
        (58, 19, 121, 32.76, 15.70),
        (58, 44, 569, 75.86, 7.73),
    ],
)
def test_tabulated_values(qgs_size, found, result_size, rec, prec):
    fx = search_fixture(qgs_size, found, result_size, "s")
    assert percent(recall_fraction(fx.qgs, fx.result)) == rec
    assert percent(precision_fraction(fx.qgs, fx.result)) == prec
    assert recall(fx.qgs, fx.result) == pytest.approx(found / qgs_size)


def test_identity_recall():
    fx = search_fixture(5, 5, 5, "s")
    assert recall(fx.qgs, fx.result) == 1.0
    assert precision(fx.qgs, fx.result) == 1.0


def test_percent_rounds_half_up():
    assert percent(Fraction(1, 8)) == 12.5
    assert percent(Fraction(123445, 10**7)) == 1.23  # 1.23445 -> 1.23
    assert percent(Fraction(12345, 10**6)) == 1.23  # exactly 1.2345 -> 1.23 at 2dp
    assert percent(Fraction(1, 800)) == 0.13  # 0.125 -> 0.13


def test_empty_qgs_and_result_are_errors():
    with pytest.raises(MetricsError):
        recall(QGS(), rs("r", ["a"]))
    with pytest.raises(MetricsError):
        precision(QGS.from_ids(["a"]), rs("r", []))


@pytest.mark.parametrize(
    "qgs_size, found, result_size, verdict",
    [(13, 12, 569, Verdict.ACCEPT), (13, 8, 121, Verdict.REVISE), (20, 10, 832, Verdict.REVISE)],
)
def test_verdicts(qgs_size, found, result_size, verdict):
    fx = search_fixture(qgs_size, found, result_size, "s")
    report = validate_search(fx.qgs, fx.result, (70, 80))
    assert report.verdict is verdict
    assert report.found | report.missed == fx.qgs.ids
    assert not report.found & report.missed


def test_verdict_uses_unrounded_recall():
    # 69.995...% rounds to 70.00 for display but is below the threshold
    qgs = QGS.from_ids(f"q{i}" for i in range(100000))
    result = rs("r", [f"q{i}" for i in range(69995)])
    report = validate_search(qgs, result, 70)
    assert report.recall_percent == 70.0
    assert report.verdict is Verdict.REVISE


def test_empty_result_gives_zero_recall_and_no_precision():
    report = validate_search(QGS.from_ids(["a"]), rs("r", []))
    assert report.recall_percent == 0.0 and report.precision_percent is None


def test_parse_threshold():
    assert parse_threshold(70) == (70.0, 80.0)
    assert parse_threshold("70,85") == (70.0, 85.0)
    assert parse_threshold(None) == (70.0, 80.0)
    with pytest.raises(MetricsError):
        parse_threshold("120")


# --- overlap ----------------------------------------------------------------


def test_disjoint_sets():
    rep = overlap([rs("A", "abc"), rs("B", "defgh")], ["A", "B"])
    assert rep.region_counts == {frozenset("A"): 3, frozenset("B"): 5, frozenset("AB"): 0}
    assert rep.union_size == 8


def test_identical_sets():
    rep = overlap([rs("A", "abc"), rs("B", "abc")], ["A", "B"])
    assert rep.region_counts[frozenset("AB")] == 3
    assert all(c.exclusive == 0 for c in rep.contributions.values())
    assert all(c.overall == 1.0 and c.overlap == 1.0 for c in rep.contributions.values())


def test_overlap_needs_two_to_six_sets():
    with pytest.raises(MetricsError):
        overlap([rs("A", "a")])
    with pytest.raises(MetricsError):
        overlap([rs(str(i), "a") for i in range(7)])


def test_overlap_csv():
    rep = overlap([rs("A", "ab"), rs("B", "bc"), rs("C", "c")], ["A", "B", "C"])
    lines = rep.to_csv().splitlines()
    assert lines[0] == "signature,count"
    counts = dict(line.split(",") for line in lines[1:])
    assert counts["A"] == "1" and counts["A&B"] == "1" and counts["B&C"] == "1"
    assert sum(int(v) for v in counts.values()) == rep.union_size == 3


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_overlap_matches_brute_force(k, seed):
    rnd = random.Random(seed)
    universe = [f"u{i}" for i in range(rnd.randint(0, 50))]
    families = {f"S{j}": {u for u in universe if rnd.random() < 0.4} for j in range(k)}
    rep = overlap([rs(n, sorted(s)) for n, s in families.items()], list(families))
    assert {s: c for s, c in rep.region_counts.items() if c} == dict(brute_force_regions(families))
    assert sum(rep.region_counts.values()) == rep.union_size
    n = rep.union_size or 1
    for name, c in rep.contributions.items():
        members = families[name]
        others = set().union(*(s for m, s in families.items() if m != name))
        expected = (len(members) / n, len(members & others) / n, len(members - others) / n)
        assert (c.overall, c.overlap, c.exclusive) == pytest.approx(expected)
