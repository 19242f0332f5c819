"""
Building a QGS and judging its quality
======================================

A QGS is usually drawn from an earlier study's included papers.  Informal
surveys are never eligible.  Once built, a QGS can be judged on size and on
how diverse its members are across venues, years, authors and databases.
"""

from quasigold import BibRecord, StudyDesign, build_qgs_from_sls, make_record_set, qgs_quality_report
from quasigold.qgs import Attestation, candidate_pool, normalized_entropy, split_qgs

# %% An earlier study with 12 included papers, four of them informal surveys.
venues = ["ICST", "ICSE", "STVR", "ICST", "IST", "JSS", "ICSE", "ICST", "TSE", "IST", "ICST", "ICSE"]
earlier = make_record_set(
    "earlier study",
    [
        BibRecord(
            record_id=f"e{i:02d}",
            title=f"Study {i}",
            venue=venues[i],
            year=2008 + i % 6,
            authors=(f"Author{i % 5}, A.",),
            source_databases=frozenset({"Scopus" if i % 3 else "IEEE"}),
            study_design=StudyDesign.INFORMAL_SURVEY if i < 4 else StudyDesign.SYSTEMATIC_REVIEW,
        )
        for i in range(12)
    ],
)
pool = candidate_pool(earlier)
print("eligible candidates:", len(pool), "of", len(earlier))

# %% Two reviewers attest each candidate.  Only fully attested papers join.
attest = {rid: Attestation(True, True, rid != "e05") for rid in pool.ids}
qgs = build_qgs_from_sls(earlier, attest, source_note="demo")
print("QGS size:", len(qgs))

# %% Normalized Shannon entropy is 1 for a uniform spread and 0 for a single value.
print("entropy of [3,3,3]:", normalized_entropy([3, 3, 3]), " of [9]:", normalized_entropy([9]))

report = qgs_quality_report(qgs, earlier, reference_sizes={"earlier study": 12})
for dim, profile in report.diversity.dimensions.items():
    print(f"  {dim:16s} H={profile.normalized_entropy:.3f}  {profile.distribution}")
print("flags:", report.flags)

# %% Hold part of the QGS back to check a search that was tuned on the rest.
formation, validation = split_qgs(qgs, 0.5, seed=7)
print("formation:", sorted(formation.ids), "validation:", sorted(validation.ids))
