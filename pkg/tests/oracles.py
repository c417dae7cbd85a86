"""Slow, independently written reference implementations used as test oracles.

Nothing here imports the statistic or bootstrap code under test: risks are
counted sample by sample with exact fractions, and subsets are enumerated
with itertools.
"""

import itertools
import math
from fractions import Fraction

import numpy as np


def masked_errors(model, X, y, S):
    """Zero-one error count of ``model`` with every input zeroed outside ``S``."""
    errors = 0
    for x, t in zip(X, y):
        z = [x[j] if j in S else 0.0 for j in range(len(x))]
        pred = int(np.argmax(model.predict_batch(np.array([z]))[0]))
        errors += pred != int(t)
    return errors


def brute_force_dhat(model, Xp, yp, Xq, yq, k):
    """Exact ``max_S |(R_p(S)-R_p(S+k)) - (R_q(S)-R_q(S+k))|`` over every ``S`` not holding ``k``."""
    d = Xp.shape[1]
    others = [j for j in range(d) if j != k]
    cache = {}

    def risk(X, y, S, side):
        key = (side, frozenset(S))
        if key not in cache:
            cache[key] = Fraction(masked_errors(model, X, y, set(S)), len(y))
        return cache[key]

    best = Fraction(0)
    for size in range(len(others) + 1):
        for S in itertools.combinations(others, size):
            Sk = S + (k,)
            drop_p = risk(Xp, yp, S, "p") - risk(Xp, yp, Sk, "p")
            drop_q = risk(Xq, yq, S, "q") - risk(Xq, yq, Sk, "q")
            best = max(best, abs(drop_p - drop_q))
    return best


def order_statistic_threshold(replicates, alpha, d):
    """The ``ceil((1 - alpha/d) K)``-th smallest replicate, with exact rational arithmetic."""
    K = len(replicates)
    q = 1 - Fraction(str(alpha)) / d
    rank = max(1, min(K, math.ceil(q * K)))
    return sorted(replicates)[rank - 1]
