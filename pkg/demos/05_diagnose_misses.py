"""
Why did the search miss these papers?
=====================================

For each QGS member a search missed, diagnosis lists the filters that
rejected it and the AND-conjuncts with no matching phrase.  Counterfactual
runs then show what a single edit to the query would change.
"""

from quasigold import counterfactual_search, diagnose_misses, tally
from quasigold.casestudy import missed_set_fixture
from quasigold.diagnose import AddOrDisjunct, ChangeFilter, RemoveAndConjunct
from quasigold.query import format_query

# %% A corpus where 40 QGS members exist but the search found only one.
fx = missed_set_fixture()
print("query:", format_query(fx.query.root))
diagnoses = diagnose_misses(fx.qgs, fx.result, fx.query, fx.config, fx.corpus)
print("missed:", len(diagnoses))
print("causes:", tally(diagnoses))
print("first diagnosis:", diagnoses[0].to_dict())

# %% Conjunct A lists test artifacts.  Adding the generic word "testing"
# widens it.
widen = counterfactual_search(fx.query, AddOrDisjunct("testing", 0), fx.corpus, fx.config, fx.qgs)
print(f"add 'testing' to A: recall {widen.before.recall_percent} -> {widen.after.recall_percent}, "
      f"result size {widen.before.result_size} -> {widen.after.result_size}")

# %% Dropping conjunct B removes the requirement that the paper be a systematic study.
drop = counterfactual_search(fx.query, RemoveAndConjunct(1), fx.corpus, fx.config, fx.qgs)
print(f"drop B: recall {drop.before.recall_percent} -> {drop.after.recall_percent}")

# %% Lifting the subject-area filter changes nothing here since every record is labeled CS.
lift = counterfactual_search(fx.query, ChangeFilter({"subject_area_filter": None}), fx.corpus, fx.config, fx.qgs)
print("lift subject filter: size delta", lift.size_delta)
