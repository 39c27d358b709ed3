"""Self-contained correlation and fitting routines.

Pearson, Spearman (mean ranks for ties) and Kendall tau-b are implemented
directly so their tie conventions are explicit and testable against
brute-force pair counting. The log-normal fit is the maximum-likelihood
one: mean and population standard deviation of the log samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, NonPositiveSample

# Row-block size for the O(n^2) concordance count; bounds peak memory at
# roughly _BLOCK * n int8 entries.
_BLOCK = 512


@dataclass(frozen=True)
class LogNormalFit:
    """Maximum-likelihood log-normal parameters.

    ``sigma`` is the population (not sample) standard deviation of the
    log samples.
    """

    mu: float
    sigma: float
    n_samples: int


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DegenerateInput(f"length mismatch: {x.size} vs {y.size}")
    if x.size < 3:
        raise DegenerateInput(f"need at least 3 observations, got {x.size}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise DegenerateInput("inputs must be finite")
    return x, y


def pearson(x, y) -> float:
    """Product-moment correlation of two equal-length vectors."""
    x, y = _pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        raise DegenerateInput("zero variance in at least one input")
    return float(min(1.0, max(-1.0, (dx @ dy) / denom)))


def average_ranks(x) -> np.ndarray:
    """1-based ranks with tied values assigned their mean rank."""
    x = np.asarray(x, dtype=np.float64).ravel()
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    sorted_x = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Rank correlation: Pearson on mean-rank-transformed inputs."""
    x, y = _pair(x, y)
    return pearson(average_ranks(x), average_ranks(y))


def _tie_pairs(x: np.ndarray) -> int:
    _, counts = np.unique(x, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def kendall(x, y) -> float:
    """Kendall tau-b, the tie-corrected concordance correlation.

    Counts concordant and discordant pairs exactly (integer arithmetic) in
    row blocks, so memory stays bounded for large inputs.
    """
    x, y = _pair(x, y)
    n = x.size
    concordant = 0
    discordant = 0
    for start in range(0, n - 1, _BLOCK):
        stop = min(start + _BLOCK, n - 1)
        # sign of (x_i - x_j) for i in the block, j > i
        sx = np.sign(x[start:stop, None] - x[None, start + 1 :]).astype(np.int8)
        sy = np.sign(y[start:stop, None] - y[None, start + 1 :]).astype(np.int8)
        # keep strictly-upper-triangle pairs only
        cols = np.arange(start + 1, n)[None, :]
        mask = cols > np.arange(start, stop)[:, None]
        prod = sx * sy
        concordant += int(((prod > 0) & mask).sum())
        discordant += int(((prod < 0) & mask).sum())
    total = n * (n - 1) // 2
    ties_x = _tie_pairs(x)
    ties_y = _tie_pairs(y)
    if total == ties_x or total == ties_y:
        raise DegenerateInput("all values tied in at least one input")
    denom = math.sqrt(float(total - ties_x) * float(total - ties_y))
    return (concordant - discordant) / denom


def fit_lognormal(samples) -> LogNormalFit:
    """Fit a log-normal by maximum likelihood to strictly positive samples."""
    arr = np.asarray(samples, dtype=np.float64).ravel()
    if arr.size < 2:
        raise DegenerateInput(f"need at least 2 samples, got {arr.size}")
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise NonPositiveSample("log-normal fit requires finite positive samples")
    logs = np.log(arr)
    sigma = float(logs.std(ddof=0))
    if sigma == 0.0:
        raise DegenerateInput("all samples identical; scale parameter would be zero")
    return LogNormalFit(mu=float(logs.mean()), sigma=sigma, n_samples=int(arr.size))
