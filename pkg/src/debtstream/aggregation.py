"""Sector-level aggregation and the class/score cross-tabulation.

Aggregation sums loans over sector pairs, keeping intra-sector credit on
the diagonal (it still lengthens credit chains), and scores sectors with
the same solver used at firm level. Sector classification labels are
consumed as input, never computed here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy import sparse

from sklearn.base import BaseEstimator, TransformerMixin

from .errors import EmptyAggregate, ZeroDebtFirm
from .network import CreditNetwork
from .streamness import StreamnessResult, _solve_component

OTHERS = "Others"

#: Score bins used for classification reports: below 1.5, the closed band
#: from 1.5 to 2.5, and above 2.5.
BIN_LABELS = ("DS<1.5", "1.5<=DS<=2.5", "DS>2.5")

#: Canonical class labels; CSV inputs use the lowercase vocabulary.
CLASS_LABELS = ("UpStream", "KeySector", "DownStream", OTHERS)

_CLASS_ALIASES = {
    "upstream": "UpStream",
    "key": "KeySector",
    "keysector": "KeySector",
    "downstream": "DownStream",
}


@dataclass(frozen=True, eq=False)
class SectorNetwork:
    """Credit network collapsed to sectors.

    ``loans[k, t]`` is the total amount firms of sector ``k`` borrowed from
    firms of sector ``t`` (diagonal = intra-sector credit). ``debts`` equals
    ``bank + loans.sum(axis=1)`` row-wise and conserves the firm-level debt
    mass. ``ds`` holds the sector position scores.
    """

    sectors: tuple[str, ...]
    loans: np.ndarray
    bank: np.ndarray
    debts: np.ndarray
    ds: np.ndarray

    @property
    def n(self) -> int:
        return len(self.sectors)


@dataclass(frozen=True)
class ClassCrossTab:
    """Counts of firms per (class label, score bin) cell.

    Every (class, bin) cell is present, zeros included; the counts sum to
    the number of scored firms.
    """

    counts: dict[tuple[str, str], int]

    def total(self) -> int:
        return sum(self.counts.values())


def score_bin(value: float) -> str:
    """Bin a score: the 1.5 and 2.5 edges both belong to the middle band."""
    if value < 1.5:
        return BIN_LABELS[0]
    if value <= 2.5:
        return BIN_LABELS[1]
    return BIN_LABELS[2]


def normalize_class(label: str | None) -> str:
    if not label:
        return OTHERS
    text = str(label).strip()
    if text in CLASS_LABELS:
        return text
    return _CLASS_ALIASES.get(text.lower(), OTHERS)


def aggregate_by_sector(net: CreditNetwork, *, tol: float = 1e-10) -> SectorNetwork:
    """Collapse a (pruned) network to sector level and score the sectors.

    Firms without a sector label fall into ``"Others"``. Intra-sector loans
    stay on the diagonal. Sector order is lexicographic.
    """
    if net.n == 0:
        raise EmptyAggregate("no firms to aggregate")
    labels = net.sectors or {}
    firm_sector = [labels.get(f) or OTHERS for f in net.firms]
    sectors = tuple(sorted(set(firm_sector)))
    sec_index = {s: k for k, s in enumerate(sectors)}
    firm_to_sec = np.fromiter((sec_index[s] for s in firm_sector), dtype=np.int64, count=net.n)
    m = len(sectors)

    loans = np.zeros((m, m))
    coo = net.loans.tocoo()
    np.add.at(loans, (firm_to_sec[coo.row], firm_to_sec[coo.col]), coo.data)
    bank = np.bincount(firm_to_sec, weights=net.bank, minlength=m)
    debts = bank + loans.sum(axis=1)
    if np.any(debts == 0):
        dead = [sectors[k] for k in np.flatnonzero(debts == 0)]
        raise ZeroDebtFirm(f"sector(s) with zero total debt: {dead}; prune the network first")

    shares = sparse.csr_array(loans / debts[:, None])
    ds, _ = _solve_component(shares, tol)
    return SectorNetwork(sectors=sectors, loans=loans, bank=bank, debts=debts, ds=ds)


def classification_crosstab(ds: StreamnessResult, classes: Mapping[str, str]) -> ClassCrossTab:
    """Cross-tabulate firms by class label and score bin.

    ``classes`` maps firm ids to class labels (``upstream`` / ``key`` /
    ``downstream``, case-insensitive); firms with no or unknown labels
    count under ``"Others"``.
    """
    counts = {(c, b): 0 for c in CLASS_LABELS for b in BIN_LABELS}
    for firm, value in zip(ds.firms, ds.values):
        counts[(normalize_class(classes.get(firm)), score_bin(float(value)))] += 1
    return ClassCrossTab(counts=counts)


class SectorAggregator(TransformerMixin, BaseEstimator):
    """Transformer collapsing a CreditNetwork to a scored SectorNetwork."""

    def __init__(self, tol: float = 1e-10):
        self.tol = tol

    def fit(self, X: CreditNetwork, y=None):
        return self

    def transform(self, X: CreditNetwork) -> SectorNetwork:
        return aggregate_by_sector(X, tol=self.tol)
