"""
Recall, precision and overlap between searches
==============================================

Given a quasi-gold standard (QGS) of known relevant papers, recall says how
many of them a search found and precision how much of the result they make
up.  Overlap analysis shows what each database contributes to the union.
"""

from quasigold import QGS, BibRecord, make_record_set, overlap, validate_search
from quasigold.casestudy import search_fixture

# %% A QGS of 13 papers and a search returning 569 records, 12 of them in the QGS.
fx = search_fixture(13, 12, 569, "broad search")
report = validate_search(fx.qgs, fx.result, threshold=(70, 80))
print(f"recall {report.recall_percent:.2f}%  precision {report.precision_percent:.2f}%  -> {report.verdict.value}")
print("missed:", sorted(report.missed))

# %% A narrower search finds fewer QGS members and falls below the threshold.
narrow = search_fixture(13, 8, 121, "narrow search")
print("narrow:", validate_search(narrow.qgs, narrow.result).verdict.value)


# %% Overlap across three databases.
def records(name, ids):
    return make_record_set(name, [BibRecord(record_id=i, title=f"paper {i}") for i in ids])


scopus = records("Scopus", [f"p{i}" for i in range(0, 30)])
ieee = records("IEEE", [f"p{i}" for i in range(20, 40)])
acm = records("ACM", [f"p{i}" for i in range(25, 45)])
venn = overlap([scopus, ieee, acm])
print(venn.to_csv())
for name, c in venn.contributions.items():
    print(f"{name:7s} overall {c.overall:.2f} overlap {c.overlap:.2f} exclusive {c.exclusive:.2f}")

# %% Recall can also be checked against a hand-built QGS.
qgs = QGS.from_ids(["p1", "p22", "p44"])
print("Scopus alone:", validate_search(qgs, scopus).recall_percent)
