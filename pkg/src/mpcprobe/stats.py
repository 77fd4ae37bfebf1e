"""One-sided Wilcoxon signed-rank test.

``wilcoxon_less(real, ideal)`` tests whether ``real`` tends to be smaller
than ``ideal``.  Zero differences are dropped and tied magnitudes share
their average rank.  Up to ``EXACT_MAX_N`` non-zero pairs the null
distribution is enumerated exactly; beyond that a tie- and
continuity-corrected normal approximation is used.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.stats import rankdata

EXACT_MAX_N = 25
NEGLIGIBLE_P = 1.25e-4  # below this a p-value counts as negligible


def signed_rank_statistic(real, ideal):
    """Return ``(W+, ranks, n)``: W+ sums the ranks of positive ``real - ideal``."""
    d = np.asarray(real, dtype=float) - np.asarray(ideal, dtype=float)
    if d.shape != np.asarray(ideal).shape or d.ndim != 1:
        raise ValueError("real and ideal must be 1-D and the same length")
    d = d[d != 0]
    ranks = rankdata(np.abs(d))
    return float(ranks[d > 0].sum()), ranks, len(d)


def _exact_lower_tail(w_plus, ranks):
    # work with doubled ranks so average ranks (x.5) stay integral
    r2 = np.rint(2 * ranks).astype(np.int64)
    counts = np.zeros(int(r2.sum()) + 1)
    counts[0] = 1.0
    top = 0
    for r in r2:
        counts[r:top + r + 1] += counts[:top + 1].copy()
        top += r
    w2 = int(round(2 * w_plus))
    return float(counts[:w2 + 1].sum() / 2.0 ** len(r2))


def _normal_lower_tail(w_plus, ranks):
    n = len(ranks)
    mean = n * (n + 1) / 4
    _, t = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24 - float(np.sum(t.astype(float) ** 3 - t)) / 48
    z = (w_plus + 0.5 - mean) / math.sqrt(var)
    return 0.5 * math.erfc(-z / math.sqrt(2))


def wilcoxon_less(real, ideal, method="auto") -> float:
    """p-value for H1: ``real`` is stochastically smaller than ``ideal``.

    ``method`` is ``"auto"``, ``"exact"`` or ``"normal"``.  Returns 1.0 when
    every difference is zero.
    """
    w_plus, ranks, n = signed_rank_statistic(real, ideal)
    if n == 0:
        return 1.0
    if method == "auto":
        method = "exact" if n <= EXACT_MAX_N else "normal"
    if method == "exact":
        p = _exact_lower_tail(w_plus, ranks)
    elif method == "normal":
        p = _normal_lower_tail(w_plus, ranks)
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(min(1.0, max(p, np.finfo(float).tiny)))
