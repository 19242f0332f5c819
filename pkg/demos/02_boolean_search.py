"""
Boolean search over a local corpus
==================================

The query language mirrors what digital libraries accept: quoted phrases,
AND / OR / NOT, parentheses and an optional field scope.  Phrases match as
exact contiguous token sequences, without stemming.
"""

from quasigold import BibRecord, SearchConfig, evaluate, make_record_set, parse_query, run_search
from quasigold.query import format_query

# %% Parse a query and look at its canonical form.
query = parse_query(
    'TITLE-ABS-KEY(("test case" OR "test suite") AND ("systematic review" OR "systematic mapping"))'
)
print(format_query(query.root))

# %% A small corpus with a few near misses.
CS = frozenset({"Computer Science"})
corpus = make_record_set(
    "demo",
    [
        BibRecord(record_id="a", title="Test case prioritization: a systematic review", subject_areas=CS),
        BibRecord(record_id="b", title="Test cases in industry: a systematic mapping", subject_areas=CS),
        BibRecord(record_id="c", title="A survey of test suite reduction", subject_areas=CS),
        BibRecord(
            record_id="d",
            title="Test suite quality",
            abstract="We report a systematic review of test suite metrics.",
            subject_areas=frozenset({"Engineering"}),
        ),
    ],
)

# %% "test cases" is not "test case", and a survey is not a systematic review.
result = run_search(query, corpus)
print("matched:", sorted(result.ids))

# %% Each evaluation carries a trace of where every phrase was found.
match = evaluate(query, corpus["d"])
for trace in match.clause_trace.values():
    print(f"  {trace.text:22s} fields={sorted(trace.fields)}")

# %% Filters run after the boolean match.  A subject-area filter drops the
# Engineering record even though its text matches.
cs_only = run_search(query, corpus, SearchConfig(subject_area_filter=CS))
print("with subject-area filter:", sorted(cs_only.ids))
