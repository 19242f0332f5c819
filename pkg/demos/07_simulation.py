"""
How trustworthy is a recall estimate?
=====================================

A synthetic corpus with known ground truth lets us measure how well QGS
recall tracks true recall.  A QGS drawn uniformly from the relevant papers
is unbiased.  A QGS drawn from one venue whose papers use every search term
overestimates recall.
"""

import numpy as np

from quasigold import SimConfig, estimator_experiment, generate, parse_query
from quasigold.query import SearchConfig

query = parse_query('"test case" AND "systematic review"')
probs = {"test case": 0.8, "systematic review": 0.9}

# %% Uniform sampling.
corpus = generate(SimConfig(seed=2021, n_papers=2000, relevant_fraction=0.2, term_mention_prob=probs))
uniform = estimator_experiment(corpus, query, SearchConfig(), "uniform", qgs_size=20, trials=200, seed=99)
print(f"true recall {uniform.true_recall:.3f}  mean estimate {uniform.mean_estimate:.3f}  "
      f"bias {uniform.mean_bias:+.4f}  3 sigma {3 * uniform.mc_sigma:.4f}")

# %% The spread of single estimates is much wider than the bias of their mean.
print("5th-95th percentile of single estimates:", np.percentile(uniform.estimates, [5, 95]))

# %% A venue where relevant papers mention every phrase.
skewed_corpus = generate(SimConfig(seed=2021, n_papers=2000, relevant_fraction=0.2, term_mention_prob=probs,
                                   saturated_venues=(0,)))
skewed = estimator_experiment(skewed_corpus, query, SearchConfig(), "single-venue", qgs_size=20, trials=50,
                              seed=99, cluster="Venue 00")
print(f"single-venue QGS: mean estimate {skewed.mean_estimate:.3f} vs true recall {skewed.true_recall:.3f}")
