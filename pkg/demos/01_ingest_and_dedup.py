"""
Ingesting exports and removing duplicates
=========================================

Every bibliographic database exports in its own dialect.  This walk-through
parses a BibTeX file and an RIS file, merges them, and then removes the
duplicates that differ only in case, punctuation or a missing DOI.
"""

from quasigold import DedupPolicy, dedup, make_record_set, parse_bibtex, parse_ris
from quasigold.dedup import DedupMode

# %% Two exports of overlapping searches.
bibtex = r"""
@article{doe2015,
  title   = {Test Case Selection: A Systematic Review},
  author  = {Doe, Jane and Roe, Rick},
  year    = {2015},
  journal = {Journal of Software Testing},
  doi     = {10.1000/TCS.2015}
}
@inproceedings{lee2014,
  title     = {Regression {T}est Suites in Practice},
  author    = {Lee, Kim},
  year      = 2014,
  booktitle = {Proc. Testing Workshop}
}
"""

ris = """TY  - JOUR
TI  - Test case selection: a systematic review
AU  - Doe, Jane
PY  - 2015
DO  - 10.1000/tcs.2015
ER  -
TY  - CONF
TI  - REGRESSION TEST SUITES IN PRACTICE.
AU  - Lee, K.
ER  -
"""

scopus = parse_bibtex(bibtex, source="Scopus")
ieee = parse_ris(ris, source="IEEE")
print("parsed:", len(scopus), "BibTeX records and", len(ieee), "RIS records")
for diagnostic in scopus.diagnostics + ieee.diagnostics:
    print("  warning:", diagnostic)

# %% Records that share a DOI already share an id, so building a record set
# merges them and keeps track of every database that returned them.
combined = make_record_set("combined", list(scopus) + list(ieee))
print("after id merge:", len(combined))
for record in combined:
    print(f"  {record.record_id:40s} {sorted(record.source_databases)}")

# %% The second pair has no DOI, and the RIS copy lacks a year, so the ids differ.  Strict deduplication compares normalized
# titles and checks that the first authors share a surname.
deduped, report = dedup(combined, DedupPolicy(DedupMode.STRICT))
print("after strict dedup:", len(deduped), "removed", report.removed_count)
for cluster in report.clusters:
    print("  cluster", cluster, "-> survivor", report.survivors[cluster[0]])

# %% Fuzzy mode tolerates small wording changes, controlled by a Jaccard
# threshold on title tokens.  Pairs near the threshold are listed for review.
fuzzy, fuzzy_report = dedup(combined, DedupPolicy(DedupMode.FUZZY, 0.8))
print("after fuzzy dedup:", len(fuzzy), "near duplicates:", fuzzy_report.near_duplicates)
