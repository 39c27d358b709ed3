"""What-if edge removal, loop detection, and score/bank-share diagnostics.

Mutual-credit loops inject infinitely many repeating chains into the score
series and can push firms far from the banking sector even when their
direct bank borrowing is unchanged. The tools here quantify that: cut a
single link and compare scores, enumerate cycles, and correlate scores
with direct bank reliance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DegenerateInput, DegenerateScope, NoSuchEdge
from .network import Component, CreditNetwork, components, prune_undefined
from .stats import pearson
from .streamness import StreamnessResult, bank_share, solve_streamness


@dataclass(frozen=True, eq=False)
class EdgeRemovalReport:
    """Before/after comparison for a single removed credit link.

    Means are taken over the removed edge's component, restricted to firms
    scored in both the original and the modified network.
    """

    removed_edge: tuple[str, str]
    ds_before: StreamnessResult
    ds_after: StreamnessResult
    mean_before: float
    mean_after: float
    newly_undefined: tuple[str, ...]

    @property
    def mean_ratio(self) -> float:
        return self.mean_before / self.mean_after


@dataclass(frozen=True)
class LoopReport:
    """Cycles in the directed loan support.

    ``sccs`` lists strongly connected components with more than one firm;
    ``two_cycles`` lists unordered firm pairs holding credit in both
    directions.
    """

    sccs: tuple[tuple[str, ...], ...]
    two_cycles: tuple[tuple[str, str], ...]


def remove_edge(
    net: CreditNetwork,
    borrower: str,
    lender: str,
    *,
    reassign_bank: bool = False,
) -> CreditNetwork:
    """Delete one credit link; the borrower's total debt shrinks accordingly.

    With ``reassign_bank=True`` the removed amount is added to the
    borrower's bank borrowing instead, keeping its total debt unchanged.
    Raises ``NoSuchEdge`` when the link does not exist.
    """
    try:
        i, j = net.index[borrower], net.index[lender]
    except KeyError as err:
        raise NoSuchEdge(f"unknown firm {err.args[0]!r}") from err
    amount = net.loans[i, j]
    if amount <= 0:
        raise NoSuchEdge(f"no credit link {borrower!r} -> {lender!r}")
    loans = net.loans.tolil(copy=True)
    loans[i, j] = 0.0
    bank = net.bank.copy()
    if reassign_bank:
        bank[i] += amount
    return CreditNetwork(
        firms=net.firms,
        loans=sparse.csr_array(loans),
        bank=bank,
        totals=net.totals,
        sectors=net.sectors,
        surveyed=net.surveyed,
    )


def edge_removal_report(
    net: CreditNetwork,
    borrower: str,
    lender: str,
    *,
    reassign_bank: bool = False,
) -> EdgeRemovalReport:
    """Score the network with and without one link and compare the means."""
    before_net, before_removed = prune_undefined(net)
    ds_before = solve_streamness(before_net, excluded=tuple(before_removed))
    after_raw = remove_edge(net, borrower, lender, reassign_bank=reassign_bank)
    after_net, after_removed = prune_undefined(after_raw)
    ds_after = solve_streamness(after_net, excluded=tuple(after_removed))

    newly_undefined = tuple(sorted(set(before_net.firms) - set(after_net.firms)))
    scope = _component_of(before_net, borrower)
    common = [f for f in scope if f in after_net.index]
    mean_before = float(np.mean([ds_before.ds[f] for f in common]))
    mean_after = float(np.mean([ds_after.ds[f] for f in common]))
    return EdgeRemovalReport(
        removed_edge=(borrower, lender),
        ds_before=ds_before,
        ds_after=ds_after,
        mean_before=mean_before,
        mean_after=mean_after,
        newly_undefined=newly_undefined,
    )


def _component_of(net: CreditNetwork, firm: str) -> list[str]:
    if firm not in net.index:
        return list(net.firms)
    target = net.index[firm]
    for comp in components(net):
        if target in comp.members:
            return [net.firms[i] for i in comp.members]
    return list(net.firms)


def detect_loops(net: CreditNetwork) -> LoopReport:
    """Strongly connected components (size > 1) and explicit mutual pairs."""
    n_comp, labels = csgraph.connected_components(
        net.loans, directed=True, connection="strong"
    )
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    sccs = [
        tuple(net.firms[i] for i in members)
        for members in groups.values()
        if len(members) > 1
    ]
    sccs.sort(key=lambda s: (-len(s), s[0]))

    support = net.loans > 0
    mutual = sparse.coo_array(support.multiply(support.T))
    pairs = sorted(
        (net.firms[i], net.firms[j])
        for i, j in zip(mutual.row.tolist(), mutual.col.tolist())
        if i < j
    )
    return LoopReport(sccs=tuple(sccs), two_cycles=tuple(pairs))


def bankshare_ds_correlation(
    net: CreditNetwork,
    component: Component | None = None,
    *,
    ds: StreamnessResult | None = None,
) -> float:
    """Pearson correlation between direct bank share and position score.

    ``net`` must be pruned. Scope is one component or (default) the whole
    network; raises ``DegenerateScope`` below 3 firms or at zero variance.
    """
    if ds is None:
        ds = solve_streamness(net)
    shares = bank_share(net)
    idx = np.fromiter(component.members, dtype=np.int64) if component is not None else np.arange(net.n)
    if idx.size < 3:
        raise DegenerateScope(f"correlation scope has only {idx.size} firm(s)")
    try:
        return pearson(shares[idx], ds.values[idx])
    except DegenerateInput as err:
        raise DegenerateScope(str(err)) from err


def ds_histogram(ds: StreamnessResult, bin_width: float) -> list[tuple[float, int]]:
    """Histogram of scores in left-closed bins anchored at 1.0.

    Returns (left edge, count) pairs for non-empty bins, ascending.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    if len(ds) == 0:
        return []
    offsets = np.floor((ds.values - 1.0) / bin_width).astype(np.int64)
    offsets = np.maximum(offsets, 0)  # scores may undershoot 1.0 by rounding
    bins, counts = np.unique(offsets, return_counts=True)
    return [(1.0 + float(k) * bin_width, int(c)) for k, c in zip(bins, counts)]


class EdgeRemoval(TransformerMixin, BaseEstimator):
    """Transformer deleting one credit link from a network."""

    def __init__(self, borrower: str = "", lender: str = "", reassign_bank: bool = False):
        self.borrower = borrower
        self.lender = lender
        self.reassign_bank = reassign_bank

    def fit(self, X: CreditNetwork, y=None):
        return self

    def transform(self, X: CreditNetwork) -> CreditNetwork:
        return remove_edge(X, self.borrower, self.lender, reassign_bank=self.reassign_bank)
