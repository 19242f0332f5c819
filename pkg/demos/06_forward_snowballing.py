"""
One step of forward snowballing
===============================

Starting from seed papers, forward snowballing collects every paper that
cites at least one seed.  The sample can then be validated against a QGS,
with a warning when the seeds and the QGS overlap.
"""

import warnings

from quasigold import QGS, BibRecord, CitationTable, evaluate_snowball, forward_snowball, make_record_set

# %% Three seeds, six citing papers, and a citation between two non-seeds
# that must not be followed.
edges = [("c1", "s1"), ("c2", "s1"), ("c2", "s2"), ("c3", "s3"), ("c4", "s3"), ("c5", "s2"), ("c6", "c1")]
table = CitationTable.from_pairs(edges)
corpus = make_record_set("corpus", [BibRecord(record_id=i, title=f"paper {i}") for i in
                                    ["s1", "s2", "s3", "c1", "c2", "c3", "c4", "c5", "c6"]])
seeds = ["s1", "s2", "s3"]
sample = forward_snowball(seeds, table, corpus)
print("citing edges:", sum(1 for _, cited in table.edges if cited in seeds), "distinct citers:", len(sample))
print("sample:", sorted(sample.ids))

# %% Validate against a QGS that shares no papers with the seeds.
qgs = QGS.from_ids(["c1", "c3", "x9"])
report = evaluate_snowball(sample, qgs, seeds, threshold=(70, 80))
print(f"recall {report.recall_percent}%  precision {report.precision_percent}%  {report.verdict.value}")

# %% Reusing seeds as QGS members makes the validation circular.
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    report = evaluate_snowball(sample, QGS.from_ids(["s1", "c1"]), seeds)
print("warnings:", report.warnings, "| raised:", [type(w.message).__name__ for w in caught])
