"""Synthetic corpora with known relevance, for checking QGS-based recall estimates.

Each topic phrase is placed independently (Bernoulli) into a relevant paper's
title, abstract or keywords with its configured mention probability; this is
deliberately the simplest model that reproduces papers omitting an implied
term. Filler text uses tokens of the form ``w0123`` that can never collide
with a topic phrase.
"""
from __future__ import annotations

import json
import math
import sys
from collections import defaultdict
from collections.abc import Mapping
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np

from .ingest import to_canonical_csv
from .query import Query, SearchConfig, run_search
from .records import BibRecord, DocType, RecordSet, StudyDesign

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

FILLER_VOCABULARY = 2000


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    n_papers: int = 1000
    relevant_fraction: float = 0.1
    term_mention_prob: Mapping[str, float] = field(
        default_factory=lambda: {"test case": 0.8, "systematic review": 0.9, "software": 0.6}
    )
    noise_mention_prob: float = 0.02
    n_venues: int = 20
    n_years: int = 10
    first_year: int = 2006
    n_authors: int = 200
    n_publishers: int = 5
    venue_skew: float = 1.0
    subject_misclass_rate: float = 0.0
    source_coverage: Mapping[str, float] = field(default_factory=lambda: {"Scopus": 1.0})
    indexing_lag_rate: float = 0.0
    # relevant papers in these venues mention every topic phrase
    saturated_venues: tuple[int, ...] = ()
    subject_area: str = "Computer Science"
    misclassified_area: str = "Engineering"

    def __post_init__(self) -> None:
        fractions = {
            "relevant_fraction": self.relevant_fraction,
            "noise_mention_prob": self.noise_mention_prob,
            "subject_misclass_rate": self.subject_misclass_rate,
            "indexing_lag_rate": self.indexing_lag_rate,
            **{f"term_mention_prob[{k}]": v for k, v in self.term_mention_prob.items()},
            **{f"source_coverage[{k}]": v for k, v in self.source_coverage.items()},
        }
        bad = {k: v for k, v in fractions.items() if not 0.0 <= float(v) <= 1.0}
        if bad:
            raise SimulationError(f"fractions must lie in [0, 1]: {bad}")
        if self.n_papers < 1:
            raise SimulationError("n_papers must be >= 1")
        for name in ("n_venues", "n_years", "n_authors", "n_publishers"):
            if getattr(self, name) < 1:
                raise SimulationError(f"{name} must be >= 1")
        if self.venue_skew < 0:
            raise SimulationError("venue_skew must be >= 0")
        if any(not 0 <= v < self.n_venues for v in self.saturated_venues):
            raise SimulationError("saturated_venues must index existing venues")
        object.__setattr__(self, "term_mention_prob", dict(self.term_mention_prob))
        object.__setattr__(self, "source_coverage", dict(self.source_coverage))
        object.__setattr__(self, "saturated_venues", tuple(self.saturated_venues))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["saturated_venues"] = list(self.saturated_venues)
        return d

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SimConfig:
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise SimulationError(f"unknown SimConfig field(s): {unknown}")
        kwargs = dict(data)
        if "saturated_venues" in kwargs:
            kwargs["saturated_venues"] = tuple(kwargs["saturated_venues"])
        return cls(**kwargs)


def load_sim_config(path: str | Path) -> SimConfig:
    """Read a SimConfig from ``.json`` or ``.toml``."""
    path = Path(path)
    if path.suffix.lower() == ".toml":
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    else:
        data = json.loads(path.read_text(encoding="utf-8"))
    return SimConfig.from_dict(data)


def venue_name(index: int) -> str:
    return f"Venue {index:02d}"


@dataclass(frozen=True)
class SimCorpus:
    records: RecordSet
    ground_truth_relevant: frozenset[str]
    indexed_at_search: dict[str, frozenset[str]]
    lagged: frozenset[str]
    config: SimConfig

    def search_view(self, sources: Any = None) -> RecordSet:
        """Records indexed, at search time, by any of ``sources`` (all sources when empty)."""
        names = sorted(sources) if sources else sorted(self.indexed_at_search)
        ids: set[str] = set()
        for s in names:
            ids |= self.indexed_at_search.get(s, frozenset())
        return self.records.subset(ids, name=f"{self.records.name} [{'+'.join(names)}]")

    def true_recall(self, result: RecordSet) -> float:
        if not self.ground_truth_relevant:
            raise SimulationError("corpus has no relevant papers")
        return len(result.ids & self.ground_truth_relevant) / len(self.ground_truth_relevant)

    def to_csv(self) -> str:
        return to_canonical_csv(self.records)

    def ground_truth_csv(self) -> str:
        lines = ["record_id,relevant,lagged"]
        for r in self.records:
            lines.append(f"{r.record_id},{int(r.record_id in self.ground_truth_relevant)},{int(r.record_id in self.lagged)}")
        return "\n".join(lines) + "\n"


def _filler(rng: np.random.Generator, n: int) -> list[str]:
    return [f"w{int(x):04d}" for x in rng.integers(FILLER_VOCABULARY, size=n)]


def _insert(rng: np.random.Generator, words: list[str], phrase: str) -> None:
    words.insert(int(rng.integers(len(words) + 1)), phrase)


def generate(config: SimConfig) -> SimCorpus:
    """Build a corpus; identical configs (including seed) give identical corpora."""
    rng = np.random.default_rng(config.seed)
    n = config.n_papers
    n_relevant = round(config.relevant_fraction * n)
    relevant = set(int(i) for i in rng.permutation(n)[:n_relevant])
    weights = np.arange(1, config.n_venues + 1, dtype=float) ** -config.venue_skew
    weights /= weights.sum()
    phrases = sorted(config.term_mention_prob)
    sources = sorted(config.source_coverage)
    saturated = set(config.saturated_venues)

    records = []
    gt: set[str] = set()
    indexed: dict[str, set[str]] = {s: set() for s in sources}
    lagged: set[str] = set()
    for i in range(n):
        rid = f"sim:{i:06d}"
        is_rel = i in relevant
        venue = int(rng.choice(config.n_venues, p=weights))
        year = config.first_year + int(rng.integers(config.n_years))
        n_auth = int(rng.integers(1, 4))
        authors = tuple(f"Author{int(a):04d}, X." for a in rng.integers(config.n_authors, size=n_auth))

        title = _filler(rng, int(rng.integers(3, 7)))
        abstract = _filler(rng, int(rng.integers(20, 41)))
        keywords = _filler(rng, int(rng.integers(2, 5)))
        for phrase in phrases:
            if is_rel:
                p = 1.0 if venue in saturated else config.term_mention_prob[phrase]
            else:
                p = config.noise_mention_prob
            placed = rng.random() < p
            where = int(rng.integers(3))
            if not placed:
                continue
            if where == 0:
                _insert(rng, title, phrase)
            elif where == 1:
                _insert(rng, abstract, phrase)
            else:
                keywords.append(phrase)

        area = config.misclassified_area if rng.random() < config.subject_misclass_rate else config.subject_area
        in_sources = frozenset(s for s in sources if rng.random() < config.source_coverage[s])
        is_lagged = rng.random() < config.indexing_lag_rate
        doc_type = DocType.JOURNAL_ARTICLE if rng.random() < 0.5 else DocType.CONFERENCE_PAPER
        if is_rel:
            design = StudyDesign.SYSTEMATIC_REVIEW if rng.random() < 0.5 else StudyDesign.SYSTEMATIC_MAPPING
        else:
            design = (StudyDesign.PRIMARY_STUDY, StudyDesign.INFORMAL_SURVEY, StudyDesign.SYSTEMATIC_REVIEW)[
                int(rng.integers(3))
            ]

        records.append(
            BibRecord(
                record_id=rid,
                title=" ".join(title),
                abstract=" ".join(abstract),
                keywords=tuple(dict.fromkeys(keywords)),
                authors=authors,
                year=year,
                venue=venue_name(venue),
                publisher=f"Publisher {venue % config.n_publishers}",
                doc_type=doc_type,
                subject_areas=frozenset([area]),
                source_databases=in_sources,
                study_design=design,
            )
        )
        if is_rel:
            gt.add(rid)
        if is_lagged:
            lagged.add(rid)
        else:
            for s in in_sources:
                indexed[s].add(rid)

    return SimCorpus(
        records=RecordSet(name=f"sim-{config.seed}", records=tuple(records)),
        ground_truth_relevant=frozenset(gt),
        indexed_at_search={s: frozenset(v) for s, v in indexed.items()},
        lagged=frozenset(lagged),
        config=config,
    )


# --------------------------------------------------------------------------
# Estimator experiment
# --------------------------------------------------------------------------


class Sampler(str, Enum):
    UNIFORM = "uniform"
    SINGLE_VENUE = "single-venue"
    SINGLE_YEAR = "single-year"


@dataclass(frozen=True)
class Trial:
    estimated_recall: float
    cluster: str | None


@dataclass(frozen=True)
class ExperimentReport:
    sampler: Sampler
    qgs_size: int
    trials: tuple[Trial, ...]
    true_recall: float
    result_size: int
    seed: int
    mc_sigma: float

    @property
    def estimates(self) -> np.ndarray:
        return np.array([t.estimated_recall for t in self.trials])

    @property
    def mean_estimate(self) -> float:
        return float(self.estimates.mean())

    @property
    def mean_bias(self) -> float:
        return self.mean_estimate - self.true_recall

    @property
    def spread(self) -> float:
        est = self.estimates
        return float(est.std(ddof=1)) if len(est) > 1 else 0.0

    @property
    def bias_within_3_sigma(self) -> bool:
        return abs(self.mean_bias) <= 3 * self.mc_sigma + 1e-12

    def to_dict(self) -> dict[str, Any]:
        return {
            "sampler": self.sampler.value,
            "qgs_size": self.qgs_size,
            "n_trials": len(self.trials),
            "seed": self.seed,
            "true_recall": self.true_recall,
            "result_size": self.result_size,
            "mean_estimated_recall": self.mean_estimate,
            "mean_bias": self.mean_bias,
            "spread": self.spread,
            "mc_sigma": self.mc_sigma,
            "bias_within_3_sigma": self.bias_within_3_sigma,
            "trials": [{"estimated_recall": t.estimated_recall, "cluster": t.cluster} for t in self.trials],
        }


def _clusters(corpus: SimCorpus, sampler: Sampler) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = defaultdict(list)
    for rid in sorted(corpus.ground_truth_relevant):
        r = corpus.records[rid]
        key = r.venue if sampler is Sampler.SINGLE_VENUE else str(r.year)
        groups[key or ""].append(rid)
    return dict(groups)


def estimator_experiment(
    corpus: SimCorpus,
    query: Query,
    config: SearchConfig,
    qgs_sampler: Sampler | str,
    qgs_size: int,
    trials: int,
    seed: int,
    cluster: str | None = None,
) -> ExperimentReport:
    """Compare QGS-estimated recall with the true recall over repeated QGS draws.

    Each trial draws a QGS of ``qgs_size`` relevant papers with the chosen
    sampler, using a per-trial generator seeded by ``(seed, trial)``. The
    single-venue and single-year samplers draw from one cluster; ``cluster``
    pins it, otherwise each trial picks one uniformly among clusters large
    enough to supply the QGS.
    """
    sampler = Sampler(qgs_sampler)
    gt = sorted(corpus.ground_truth_relevant)
    if not gt:
        raise SimulationError("corpus has no relevant papers")
    if not 1 <= qgs_size <= len(gt):
        raise SimulationError(f"qgs_size must lie in [1, {len(gt)}], got {qgs_size}")
    if trials < 1:
        raise SimulationError("trials must be >= 1")

    view = corpus.search_view(config.sources or None)
    result = run_search(query, view, config)
    found = result.ids & corpus.ground_truth_relevant
    true = len(found) / len(gt)

    pools: list[tuple[str | None, list[str]]]
    if sampler is Sampler.UNIFORM:
        pools = [(None, gt)]
    else:
        groups = _clusters(corpus, sampler)
        if cluster is not None:
            if len(groups.get(cluster, [])) < qgs_size:
                raise SimulationError(f"cluster {cluster!r} has fewer than {qgs_size} relevant papers")
            pools = [(cluster, groups[cluster])]
        else:
            pools = [(k, v) for k, v in sorted(groups.items()) if len(v) >= qgs_size]
            if not pools:
                raise SimulationError(f"no {sampler.value} cluster holds {qgs_size} relevant papers")

    out = []
    for t in range(trials):
        rng = np.random.default_rng([seed, t])
        name, pool = pools[int(rng.integers(len(pools)))] if len(pools) > 1 else pools[0]
        picked = rng.choice(len(pool), size=qgs_size, replace=False)
        hits = sum(pool[int(i)] in found for i in picked)
        out.append(Trial(hits / qgs_size, name))

    if sampler is Sampler.UNIFORM:
        # hypergeometric variance of the hit fraction, divided over trials
        big_n = len(gt)
        fpc = (big_n - qgs_size) / (big_n - 1) if big_n > 1 else 0.0
        var = true * (1 - true) / qgs_size * fpc
        mc_sigma = math.sqrt(var / trials)
    else:
        est = np.array([x.estimated_recall for x in out])
        mc_sigma = float(est.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0

    return ExperimentReport(
        sampler=sampler,
        qgs_size=qgs_size,
        trials=tuple(out),
        true_recall=true,
        result_size=len(result),
        seed=seed,
        mc_sigma=mc_sigma,
    )
