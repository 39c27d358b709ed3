"""Credit-network data model: validation, shares, components, pruning.

A network holds a sparse matrix of inter-firm loans (``loans[i, j]`` is the
amount firm ``i`` borrowed from firm ``j``) and a vector of per-firm bank
borrowing. The banking sector is exogenous: it is never a node of the loan
matrix. Every firm's total debt decomposes exactly as

    total_debt[i] = bank[i] + sum_j loans[i, j]

and all derived quantities (debt shares, components, scores) are computed
from that identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import (
    EmptyNetwork,
    NegativeAmount,
    SelfLoan,
    UnknownFirm,
    ZeroDebtFirm,
)

# Components at or below this size use a plain-Python BFS for bank
# reachability; larger ones go through scipy's multi-source Dijkstra.
_SMALL_GRAPH = 64


@dataclass(frozen=True, eq=False)
class CreditNetwork:
    """Immutable directed, weighted inter-firm credit network.

    Attributes
    ----------
    firms:
        Firm identifiers; position defines the matrix/vector index.
    loans:
        Sparse ``(n, n)`` matrix; ``loans[i, j]`` is the amount firm ``i``
        borrowed from firm ``j``. The diagonal is zero.
    bank:
        Per-firm borrowing from the banking sector, length ``n``.
    totals:
        Optional reported total inter-firm credit per firm (NaN where a
        firm did not report one); ``None`` when no firm reports it.
    sectors:
        Optional firm -> sector labels (partial).
    surveyed:
        Optional firm -> bool flags (partial).
    """

    firms: tuple[str, ...]
    loans: sparse.csr_array
    bank: np.ndarray
    totals: np.ndarray | None = None
    sectors: Mapping[str, str] | None = None
    surveyed: Mapping[str, bool] | None = None

    def __post_init__(self):
        firms = tuple(str(f) for f in self.firms)
        n = len(firms)
        if n == 0:
            raise EmptyNetwork("a credit network needs at least one firm")
        if len(set(firms)) != n or any(not f for f in firms):
            raise UnknownFirm("firm ids must be non-empty and unique")

        loans = sparse.csr_array(self.loans, dtype=np.float64)
        if loans.shape != (n, n):
            raise ValueError(f"loan matrix shape {loans.shape} does not match {n} firms")
        loans.sum_duplicates()
        loans.eliminate_zeros()
        loans.sort_indices()
        if loans.nnz and loans.data.min() < 0:
            raise NegativeAmount("loan amounts must be non-negative")
        if np.any(loans.diagonal() != 0):
            raise SelfLoan("a firm cannot be its own creditor")

        bank = np.asarray(self.bank, dtype=np.float64).copy()
        if bank.shape != (n,):
            raise ValueError("bank vector length does not match firm count")
        if np.any(bank < 0):
            raise NegativeAmount("bank borrowing must be non-negative")
        bank.setflags(write=False)

        totals = self.totals
        if totals is not None:
            totals = np.asarray(totals, dtype=np.float64).copy()
            if totals.shape != (n,):
                raise ValueError("totals vector length does not match firm count")
            if np.any(totals[~np.isnan(totals)] < 0):
                raise NegativeAmount("reported totals must be non-negative")
            if np.all(np.isnan(totals)):
                totals = None
            else:
                totals.setflags(write=False)

        for name, mapping in (("sectors", self.sectors), ("surveyed", self.surveyed)):
            if mapping:
                unknown = set(mapping) - set(firms)
                if unknown:
                    raise UnknownFirm(f"{name} map references unknown firms: {sorted(unknown)}")

        object.__setattr__(self, "firms", firms)
        object.__setattr__(self, "loans", loans)
        object.__setattr__(self, "bank", bank)
        object.__setattr__(self, "totals", totals)
        object.__setattr__(self, "sectors", dict(self.sectors) if self.sectors else None)
        object.__setattr__(self, "surveyed", dict(self.surveyed) if self.surveyed else None)

    @property
    def n(self) -> int:
        return len(self.firms)

    @cached_property
    def index(self) -> dict[str, int]:
        return {f: i for i, f in enumerate(self.firms)}

    def subnetwork(self, keep: np.ndarray) -> "CreditNetwork":
        """Restrict to the firms selected by a boolean mask or index array."""
        idx = np.flatnonzero(keep) if np.asarray(keep).dtype == bool else np.asarray(keep)
        if idx.size == 0:
            raise EmptyNetwork("no firms retained")
        firms = tuple(self.firms[i] for i in idx)
        kept = set(firms)
        return CreditNetwork(
            firms=firms,
            loans=self.loans[idx][:, idx],
            bank=self.bank[idx],
            totals=self.totals[idx] if self.totals is not None else None,
            sectors={f: s for f, s in (self.sectors or {}).items() if f in kept} or None,
            surveyed={f: v for f, v in (self.surveyed or {}).items() if f in kept} or None,
        )


@dataclass(frozen=True, eq=False)
class ShareMatrix:
    """Row- and column-normalized views of the loan matrix.

    ``debt_shares[i, j]`` is the share of firm ``i``'s total debt owed to
    firm ``j`` (row sums equal ``1 - bank[i] / debts[i]``).
    ``flow_shares[i, j]`` is the same loan normalized by the *lender*'s
    total debt instead. The two are conjugate through the diagonal debt
    matrix: ``flow_shares = diag(debts) @ debt_shares @ diag(1 / debts)``.
    """

    debt_shares: sparse.csr_array
    flow_shares: sparse.csr_array
    debts: np.ndarray


@dataclass(frozen=True)
class Component:
    """A weakly connected component of the loan matrix support."""

    members: tuple[int, ...]
    contains_bank_link: bool

    @property
    def size(self) -> int:
        return len(self.members)


def build_network(
    edges: Iterable[tuple[str, str, float]],
    bank: Mapping[str, float] | None = None,
    totals: Mapping[str, float] | None = None,
    sectors: Mapping[str, str] | None = None,
    surveyed: Mapping[str, bool] | None = None,
    firms: Iterable[str] = (),
) -> CreditNetwork:
    """Assemble a validated network from an edge list.

    The firm universe is the union of edge endpoints, bank-map keys and the
    explicit ``firms`` iterable; duplicate (borrower, lender) pairs are
    summed. ``totals``/``sectors``/``surveyed`` may only reference firms in
    that universe.
    """
    bank = dict(bank or {})
    edge_list = []
    for borrower, lender, amount in edges:
        borrower, lender = str(borrower), str(lender)
        if borrower == lender:
            raise SelfLoan(f"firm {borrower!r} cannot lend to itself")
        amount = float(amount)
        if amount < 0:
            raise NegativeAmount(f"loan {borrower!r} -> {lender!r} has negative amount {amount}")
        edge_list.append((borrower, lender, amount))

    universe = {b for b, _, _ in edge_list} | {l for _, l, _ in edge_list}
    universe |= set(bank) | {str(f) for f in firms}
    if not universe:
        raise EmptyNetwork("no firms in edges, bank map, or firm list")
    for name, mapping in (("bank", bank), ("totals", totals), ("sectors", sectors), ("surveyed", surveyed)):
        unknown = set(mapping or {}) - universe
        if unknown:
            raise UnknownFirm(f"{name} map references unknown firms: {sorted(unknown)}")

    ordered = tuple(sorted(universe))
    index = {f: i for i, f in enumerate(ordered)}
    n = len(ordered)

    rows = np.fromiter((index[b] for b, _, _ in edge_list), dtype=np.int64, count=len(edge_list))
    cols = np.fromiter((index[l] for _, l, _ in edge_list), dtype=np.int64, count=len(edge_list))
    data = np.fromiter((a for _, _, a in edge_list), dtype=np.float64, count=len(edge_list))
    loans = sparse.csr_array(sparse.coo_array((data, (rows, cols)), shape=(n, n)))

    bank_vec = np.zeros(n)
    for f, amount in bank.items():
        if amount < 0:
            raise NegativeAmount(f"bank borrowing for {f!r} is negative")
        bank_vec[index[f]] = float(amount)

    totals_vec = None
    if totals:
        totals_vec = np.full(n, np.nan)
        for f, amount in totals.items():
            totals_vec[index[f]] = float(amount)

    return CreditNetwork(
        firms=ordered,
        loans=loans,
        bank=bank_vec,
        totals=totals_vec,
        sectors=dict(sectors) if sectors else None,
        surveyed=dict(surveyed) if surveyed else None,
    )


def total_debt(net: CreditNetwork) -> np.ndarray:
    """Per-firm total debt: bank borrowing plus inter-firm borrowing."""
    return net.bank + np.asarray(net.loans.sum(axis=1)).ravel()


def share_matrices(net: CreditNetwork) -> ShareMatrix:
    """Normalize the loan matrix by borrower and by lender debt.

    Raises ``ZeroDebtFirm`` when any firm has zero total debt; prune first.
    """
    debts = total_debt(net)
    zero = np.flatnonzero(debts == 0)
    if zero.size:
        names = [net.firms[i] for i in zero[:5]]
        raise ZeroDebtFirm(f"{zero.size} firm(s) have zero total debt, e.g. {names}")
    inv = 1.0 / debts
    debt_shares = sparse.csr_array(net.loans.multiply(inv[:, None]))
    flow_shares = sparse.csr_array(net.loans.multiply(inv[None, :]))
    return ShareMatrix(debt_shares=debt_shares, flow_shares=flow_shares, debts=debts)


def components(net: CreditNetwork) -> list[Component]:
    """Weakly connected components of the loan support.

    Ordered by descending size, ties broken by smallest member index;
    members are listed in ascending index order. The decomposition only
    depends on the support, never on edge weights.
    """
    n_comp, labels = csgraph.connected_components(net.loans, directed=True, connection="weak")
    groups: list[list[int]] = [[] for _ in range(n_comp)]
    for i, lab in enumerate(labels):
        groups[lab].append(i)
    has_bank = net.bank > 0
    comps = [
        Component(members=tuple(g), contains_bank_link=bool(has_bank[g].any()))
        for g in groups
    ]
    comps.sort(key=lambda c: (-c.size, c.members[0]))
    return comps


def bank_reachable(net: CreditNetwork) -> np.ndarray:
    """Boolean mask of firms with a directed creditor path to bank money.

    A firm counts as reachable when it borrows from the bank itself or when
    some chain of borrower -> lender links leads from it to such a firm.
    """
    return _reachable_mask(net.loans, net.bank > 0)


def _reachable_mask(support: sparse.csr_array, bank_mask: np.ndarray) -> np.ndarray:
    n = support.shape[0]
    if not bank_mask.any():
        return np.zeros(n, dtype=bool)
    if n <= _SMALL_GRAPH:
        # Reverse-adjacency BFS from all bank nodes at once.
        coo = support.tocoo()
        rev: list[list[int]] = [[] for _ in range(n)]
        for i, j in zip(coo.row.tolist(), coo.col.tolist()):
            rev[j].append(i)
        seen = bank_mask.copy()
        stack = list(np.flatnonzero(bank_mask))
        while stack:
            j = stack.pop()
            for i in rev[j]:
                if not seen[i]:
                    seen[i] = True
                    stack.append(i)
        return seen
    dist = csgraph.dijkstra(
        support.T,
        directed=True,
        indices=np.flatnonzero(bank_mask),
        unweighted=True,
        min_only=True,
    )
    return np.isfinite(dist)


def prune_undefined(net: CreditNetwork) -> tuple[CreditNetwork, list[str]]:
    """Drop firms whose position score has no solution.

    Removes every firm with no directed creditor path to bank borrowing and
    every zero-debt firm, repeating until stable. On the retained firms the
    debt-share matrix is strictly substochastic along every cycle, so the
    positioning system is solvable. Raises ``EmptyNetwork`` if nothing
    survives. Idempotent.
    """
    current = net
    removed: list[str] = []
    while True:
        debts = total_debt(current)
        keep = _reachable_mask(current.loans, current.bank > 0) & (debts > 0)
        if keep.all():
            return current, removed
        removed.extend(f for f, k in zip(current.firms, keep) if not k)
        if not keep.any():
            raise EmptyNetwork(
                f"no firm has a creditor path to the banking sector ({len(removed)} removed)"
            )
        current = current.subnetwork(keep)


class UndefinedFirmPruner(TransformerMixin, BaseEstimator):
    """Transformer that drops firms with an undefined position score.

    Stateless; ``transform`` records the dropped firm ids on ``removed_``
    for inspection.
    """

    def fit(self, X: CreditNetwork, y=None):
        return self

    def transform(self, X: CreditNetwork) -> CreditNetwork:
        pruned, removed = prune_undefined(X)
        self.removed_ = tuple(removed)
        return pruned
