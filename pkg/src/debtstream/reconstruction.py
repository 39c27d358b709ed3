"""Residual-credit reconstruction for partially observed networks.

Surveyed firms disclose only their largest creditors plus a total
inter-firm credit figure, so each row of the observed loan matrix may
understate the true one. The residual (reported total minus observed row
sum) can be placed back two ways:

* ``reconstruct_full`` spreads each firm's residual uniformly over every
  empty creditor slot of its row (dense limit);
* ``reconstruct_sparse`` spreads it over the smallest number of randomly
  chosen empty slots such that each new entry stays strictly below the
  firm's smallest observed loan (sparsity-preserving limit).

``compare_reconstructions`` scores the observed and a reconstructed
network and reports rank/linear correlations over the shared firms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import EmptyIntersection, MissingTotals, NoZeroSlots
from .network import CreditNetwork, prune_undefined
from .stats import kendall, pearson, spearman
from .streamness import StreamnessResult, solve_streamness


@dataclass(frozen=True, eq=False)
class Residual:
    """Unobserved inter-firm credit per firm.

    ``amounts[i]`` is the reported total minus the observed row sum,
    clamped at zero; firms whose raw value was negative (survey
    inconsistency) are listed in ``clamped_firms``. Firms without a
    reported total get zero and are not clamped.
    """

    amounts: np.ndarray
    clamped_firms: tuple[str, ...]


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    """Outcome of scoring an observed network against a reconstructed one."""

    method: str
    seed: int | None
    network: CreditNetwork
    ds_observed: StreamnessResult
    ds_reconstructed: StreamnessResult
    spearman: float
    kendall: float
    pearson: float
    common_firms: tuple[str, ...]
    dropped_firms: tuple[str, ...]


def residual(net: CreditNetwork) -> Residual:
    """Residual credit per firm; raises ``MissingTotals`` when no firm reports one."""
    if net.totals is None:
        raise MissingTotals("no firm reports a total inter-firm credit figure")
    observed = np.asarray(net.loans.sum(axis=1)).ravel()
    raw = np.where(np.isnan(net.totals), 0.0, net.totals - observed)
    clamped = raw < 0
    return Residual(
        amounts=np.where(clamped, 0.0, raw),
        clamped_firms=tuple(f for f, c in zip(net.firms, clamped) if c),
    )


def _zero_slots(row: np.ndarray, i: int) -> np.ndarray:
    slots = np.flatnonzero(row == 0)
    return slots[slots != i]


def reconstruct_full(net: CreditNetwork) -> CreditNetwork:
    """Spread every firm's residual uniformly over its empty creditor slots.

    Observed entries are never modified. Raises ``NoZeroSlots`` for a row
    with residual credit but no empty off-diagonal slot to put it in.
    """
    res = residual(net)
    dense = net.loans.toarray()
    for i in np.flatnonzero(res.amounts > 0):
        slots = _zero_slots(dense[i], i)
        if slots.size == 0:
            raise NoZeroSlots(f"firm {net.firms[i]!r} has residual credit but a full creditor row")
        dense[i, slots] = res.amounts[i] / slots.size
    return _with_loans(net, sparse.csr_array(dense))


def minimal_slot_count(residual_amount: float, smallest_observed: float) -> int:
    """Smallest n >= 1 with residual_amount / n strictly below smallest_observed."""
    n = max(1, int(residual_amount / smallest_observed) + 1)
    while residual_amount / n >= smallest_observed:  # guards float rounding at ties
        n += 1
    return n


def reconstruct_sparse(net: CreditNetwork, seed: int) -> CreditNetwork:
    """Spread residuals over minimal random slot sets, preserving sparsity.

    For each row the slot count is the smallest ``n`` keeping every new
    entry strictly below the row's smallest observed loan; slots are drawn
    without replacement from the row's empty off-diagonal positions using a
    per-row stream derived from ``(seed, row)``, so results do not depend
    on evaluation order. Rows with a residual but no observed loan fall
    back to all empty slots (with a warning).
    """
    res = residual(net)
    dense = net.loans.toarray()
    for i in np.flatnonzero(res.amounts > 0):
        slots = _zero_slots(dense[i], i)
        if slots.size == 0:
            raise NoZeroSlots(f"firm {net.firms[i]!r} has residual credit but a full creditor row")
        observed = dense[i][dense[i] > 0]
        if observed.size == 0:
            warnings.warn(
                f"firm {net.firms[i]!r} reports credit but discloses no creditor; "
                "spreading its residual over all empty slots",
                stacklevel=2,
            )
            chosen = slots
        else:
            want = min(minimal_slot_count(res.amounts[i], observed.min()), slots.size)
            rng = np.random.default_rng([seed, i])
            chosen = rng.choice(slots, size=want, replace=False)
        dense[i, chosen] = res.amounts[i] / chosen.size
    return _with_loans(net, sparse.csr_array(dense))


def truncate_top_creditors(net: CreditNetwork, k: int = 3) -> CreditNetwork:
    """Observation model: keep each firm's k largest loans, record true totals.

    Returns a network whose rows contain only the top-``k`` entries (ties
    broken toward the smaller lender index) and whose reported totals are
    the pre-truncation row sums. Bank borrowing is untouched.
    """
    if k < 0:
        raise ValueError("k must be non-negative")
    lil = net.loans.tolil()
    true_totals = np.asarray(net.loans.sum(axis=1)).ravel()
    rows, cols, data = [], [], []
    for i in range(net.n):
        entries = sorted(
            zip(lil.rows[i], lil.data[i]),
            key=lambda jc: (-jc[1], jc[0]),
        )[:k]
        for j, amount in entries:
            rows.append(i)
            cols.append(j)
            data.append(amount)
    loans = sparse.csr_array(
        sparse.coo_array((data, (rows, cols)), shape=(net.n, net.n))
    )
    return CreditNetwork(
        firms=net.firms,
        loans=loans,
        bank=net.bank,
        totals=true_totals,
        sectors=net.sectors,
        surveyed=net.surveyed,
    )


def _with_loans(net: CreditNetwork, loans: sparse.csr_array) -> CreditNetwork:
    return CreditNetwork(
        firms=net.firms,
        loans=loans,
        bank=net.bank,
        totals=net.totals,
        sectors=net.sectors,
        surveyed=net.surveyed,
    )


def compare_reconstructions(
    observed: CreditNetwork,
    reconstructed: CreditNetwork,
    *,
    method: str = "unspecified",
    seed: int | None = None,
) -> ReconstructionReport:
    """Score both networks and correlate over the firms defined in both."""
    obs_pruned, obs_removed = prune_undefined(observed)
    rec_pruned, rec_removed = prune_undefined(reconstructed)
    common = sorted(set(obs_pruned.firms) & set(rec_pruned.firms))
    if not common:
        raise EmptyIntersection("no firm is scored in both networks")
    dropped = sorted((set(observed.firms) | set(reconstructed.firms)) - set(common))

    ds_obs = solve_streamness(obs_pruned, excluded=tuple(obs_removed))
    ds_rec = solve_streamness(rec_pruned, excluded=tuple(rec_removed))
    x = np.array([ds_obs.ds[f] for f in common])
    y = np.array([ds_rec.ds[f] for f in common])
    return ReconstructionReport(
        method=method,
        seed=seed,
        network=reconstructed,
        ds_observed=ds_obs,
        ds_reconstructed=ds_rec,
        spearman=spearman(x, y),
        kendall=kendall(x, y),
        pearson=pearson(x, y),
        common_firms=tuple(common),
        dropped_firms=tuple(dropped),
    )


class TopCreditorTruncation(TransformerMixin, BaseEstimator):
    """Transformer applying the top-k creditor observation model."""

    def __init__(self, k: int = 3):
        self.k = k

    def fit(self, X: CreditNetwork, y=None):
        return self

    def transform(self, X: CreditNetwork) -> CreditNetwork:
        return truncate_top_creditors(X, k=self.k)


class FullReconstruction(TransformerMixin, BaseEstimator):
    """Transformer spreading residual credit uniformly over empty slots."""

    def fit(self, X: CreditNetwork, y=None):
        return self

    def transform(self, X: CreditNetwork) -> CreditNetwork:
        return reconstruct_full(X)


class SparseReconstruction(TransformerMixin, BaseEstimator):
    """Transformer spreading residual credit over minimal random slot sets."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def fit(self, X: CreditNetwork, y=None):
        return self

    def transform(self, X: CreditNetwork) -> CreditNetwork:
        return reconstruct_sparse(X, seed=self.seed)
