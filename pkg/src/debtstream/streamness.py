"""Position scores for firms in a credit network.

The DebtStreamness of a firm is its average distance from the banking
sector along chains of inter-firm credit, the financial analogue of a
trophic level in a food web. Writing ``A`` for the borrower-normalized
debt-share matrix, the score vector solves

    ds = 1 + A @ ds        i.e.        ds = inv(I - A) @ 1,

the Leontief-inverse form: each firm sits one step further from the bank
than the debt-weighted average of its creditors. A firm borrowing from
banks only scores exactly 1.

Three independent routes to the same vector live here: the linear solve
above, the explicit path-series expansion (length-weighted sum over all
credit chains), and two algebraically equivalent resummations through the
lender-normalized share matrix. The extra routes exist to cross-check the
solver, not to be faster.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve
from sklearn.base import BaseEstimator

from .errors import InvalidConfig, NoConvergence, NotPruned, SingularSystem
from .network import (
    Component,
    CreditNetwork,
    bank_reachable,
    components,
    prune_undefined,
    share_matrices,
    total_debt,
)

# Per-component solver strategy: dense LU below _DENSE_LIMIT firms, sparse
# LU up to _DIRECT_LIMIT, damped-free fixed-point iteration beyond that
# (pruning guarantees the iteration contracts).
_DENSE_LIMIT = 400
_DIRECT_LIMIT = 20_000
_MAX_SWEEPS = 200_000

ENV_THREADS = "DEBTSTREAM_THREADS"


@dataclass(frozen=True, eq=False)
class StreamnessResult:
    """Per-firm position scores for a pruned network.

    ``values`` aligns with ``firms``; ``excluded`` lists firms dropped
    before solving because their score is undefined. ``component_means``
    maps the component index (deterministic component order) to the mean
    score of its members. ``truncation_order`` is set only by the series
    route.
    """

    firms: tuple[str, ...]
    values: np.ndarray
    excluded: tuple[str, ...]
    component_means: dict[int, float]
    solver_residual: float
    truncation_order: int | None = None

    @property
    def ds(self) -> dict[str, float]:
        return dict(zip(self.firms, self.values.tolist()))

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    def __len__(self) -> int:
        return len(self.firms)


def worker_count() -> int:
    """Parallelism cap from the DEBTSTREAM_THREADS environment variable."""
    raw = os.environ.get(ENV_THREADS, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _ensure_pruned(net: CreditNetwork, debts: np.ndarray) -> None:
    bad = ~bank_reachable(net) | (debts <= 0)
    if bad.any():
        names = [net.firms[i] for i in np.flatnonzero(bad)[:5]]
        raise NotPruned(
            f"{int(bad.sum())} firm(s) have undefined scores (e.g. {names}); "
            "apply prune_undefined first"
        )


def _residual(shares: sparse.csr_array, x: np.ndarray) -> float:
    r = x - 1.0 - shares @ x
    return float(np.abs(r).max() / np.abs(x).max())


def _solve_component(shares: sparse.csr_array, tol: float) -> tuple[np.ndarray, float]:
    """Solve (I - shares) x = 1 to the requested relative residual."""
    n = shares.shape[0]
    ones = np.ones(n)
    if n <= _DENSE_LIMIT:
        system = np.eye(n) - shares.toarray()
        try:
            x = np.linalg.solve(system, ones)
        except np.linalg.LinAlgError as err:
            raise SingularSystem(str(err)) from err
    elif n <= _DIRECT_LIMIT:
        system = sparse.eye_array(n, format="csc") - sparse.csc_array(shares)
        x = spsolve(system, ones)
    else:
        x = ones.copy()
        for _ in range(_MAX_SWEEPS):
            nxt = 1.0 + shares @ x
            if np.abs(nxt - x).max() <= 0.1 * tol * np.abs(nxt).max():
                x = nxt
                break
            x = nxt
    res = _residual(shares, x)
    if not np.isfinite(res) or res > tol:
        # One step of iterative refinement before giving up.
        x = x + (1.0 + shares @ x - x)
        res = _residual(shares, x)
        if not np.isfinite(res) or res > tol:
            raise SingularSystem(
                f"relative residual {res:.3e} exceeds {tol:.1e}; "
                "the network appears not to be pruned"
            )
    return x, res


def _component_means(values: np.ndarray, comps: list[Component]) -> dict[int, float]:
    return {k: float(values[list(c.members)].mean()) for k, c in enumerate(comps)}


def solve_streamness(
    net: CreditNetwork,
    *,
    tol: float = 1e-10,
    excluded: tuple[str, ...] = (),
    max_workers: int | None = None,
) -> StreamnessResult:
    """Exact position scores via a per-component linear solve.

    The network must already be pruned (``NotPruned`` otherwise). Each
    weakly connected component is solved independently, optionally in
    parallel; results merge deterministically in component order.
    """
    debts = total_debt(net)
    _ensure_pruned(net, debts)
    shares = share_matrices(net).debt_shares
    comps = components(net)
    values = np.empty(net.n)
    workers = worker_count() if max_workers is None else max(1, max_workers)

    def run(comp: Component) -> tuple[Component, np.ndarray, float]:
        idx = np.fromiter(comp.members, dtype=np.int64)
        x, res = _solve_component(shares[idx][:, idx], tol)
        return comp, x, res

    if workers > 1 and len(comps) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            solved = list(pool.map(run, comps))
    else:
        solved = [run(c) for c in comps]

    residual = 0.0
    for comp, x, res in solved:
        values[list(comp.members)] = x
        residual = max(residual, res)
    return StreamnessResult(
        firms=net.firms,
        values=values,
        excluded=tuple(excluded),
        component_means=_component_means(values, comps),
        solver_residual=residual,
    )


def series_streamness(
    net: CreditNetwork,
    *,
    max_terms: int = 10_000,
    tol: float = 1e-12,
    excluded: tuple[str, ...] = (),
) -> StreamnessResult:
    """Position scores via the explicit credit-chain series.

    Sums, per firm, the length-weighted bank credit arriving over chains of
    every length: direct bank borrowing contributes with weight 1, credit
    intermediated by one firm with weight 2, and so on. Terms are added
    until the next term's max-norm drops below ``tol``; if ``max_terms``
    terms are exhausted first, raises ``NoConvergence``. Converges on every
    pruned network and terminates exactly on acyclic ones.
    """
    if tol <= 0:
        raise InvalidConfig("series tolerance must be positive")
    if max_terms < 1:
        raise InvalidConfig("max_terms must be at least 1")
    debts = total_debt(net)
    _ensure_pruned(net, debts)
    shares = share_matrices(net)
    flow = shares.flow_shares

    chain_credit = net.bank.copy()  # bank money arriving over chains of the current length
    values = chain_credit / debts
    order = 1
    while True:
        chain_credit = flow @ chain_credit
        term = (order + 1) * chain_credit / debts
        if np.abs(term).max() < tol:
            break
        if order >= max_terms:
            raise NoConvergence(
                f"series term still {np.abs(term).max():.3e} >= {tol:.1e} after {max_terms} terms"
            )
        values += term
        order += 1

    comps = components(net)
    return StreamnessResult(
        firms=net.firms,
        values=values,
        excluded=tuple(excluded),
        component_means=_component_means(values, comps),
        solver_residual=_residual(shares.debt_shares, values),
        truncation_order=order,
    )


def alternative_streamness_forms(net: CreditNetwork) -> tuple[np.ndarray, np.ndarray]:
    """Two resummations of the chain series through the lender-normalized shares.

    With ``F`` the lender-normalized share matrix, ``b`` the bank vector and
    ``d`` the total-debt vector, returns

        form_a[i] = [inv(I - F) @ inv(I - F) @ b]_i / d[i]
        form_b[i] = [inv(I - F) @ d]_i / d[i]

    Both equal the Leontief-form scores on any pruned network; they serve
    as independent cross-checks of the solver.
    """
    debts = total_debt(net)
    _ensure_pruned(net, debts)
    flow = share_matrices(net).flow_shares
    system = sparse.csc_array(sparse.eye_array(net.n, format="csc") - sparse.csc_array(flow))

    def solve(rhs: np.ndarray) -> np.ndarray:
        if net.n <= _DENSE_LIMIT:
            try:
                x = np.linalg.solve(system.toarray(), rhs)
            except np.linalg.LinAlgError as err:
                raise SingularSystem(str(err)) from err
        else:
            x = spsolve(system, rhs)
        err = np.abs(system @ x - rhs).max()
        scale = max(np.abs(x).max(), np.abs(rhs).max(), 1.0)
        if not np.isfinite(err) or err > 1e-8 * scale:
            raise SingularSystem(f"lender-share solve residual {err:.3e} too large")
        return x

    once = solve(net.bank)
    form_a = solve(once) / debts
    form_b = solve(debts) / debts
    return form_a, form_b


def bank_share(net: CreditNetwork) -> np.ndarray:
    """Fraction of each firm's total borrowing that comes straight from banks."""
    debts = total_debt(net)
    if np.any(debts == 0):
        raise NotPruned("zero-debt firms have no bank share; apply prune_undefined first")
    return net.bank / debts


class DebtStreamness(BaseEstimator):
    """Estimator computing per-firm distance from the banking sector.

    Parameters
    ----------
    method:
        "solve" for the exact per-component linear solve, "series" for the
        truncated credit-chain expansion.
    prune:
        When True (default) firms with undefined scores are dropped during
        ``fit`` and reported on ``excluded_``; when False the network must
        already be pruned.
    tol:
        Relative residual target for the linear solve.
    series_tol, max_terms:
        Truncation controls for the series method.

    Attributes (after ``fit``)
    --------------------------
    result_ : StreamnessResult
    ds_ : ndarray aligned with ``firms_``
    firms_, excluded_ : tuple of firm ids
    network_ : the (pruned) CreditNetwork that was scored
    """

    def __init__(
        self,
        method: str = "solve",
        prune: bool = True,
        tol: float = 1e-10,
        series_tol: float = 1e-12,
        max_terms: int = 10_000,
    ):
        self.method = method
        self.prune = prune
        self.tol = tol
        self.series_tol = series_tol
        self.max_terms = max_terms

    def fit(self, X: CreditNetwork, y=None):
        net = X
        removed: tuple[str, ...] = ()
        if self.prune:
            net, dropped = prune_undefined(net)
            removed = tuple(dropped)
        if self.method == "solve":
            result = solve_streamness(net, tol=self.tol, excluded=removed)
        elif self.method == "series":
            result = series_streamness(
                net, max_terms=self.max_terms, tol=self.series_tol, excluded=removed
            )
        else:
            raise InvalidConfig(f"unknown method {self.method!r}; use 'solve' or 'series'")
        self.network_ = net
        self.result_ = result
        self.ds_ = result.values
        self.firms_ = result.firms
        self.excluded_ = result.excluded
        return self

    def fit_predict(self, X: CreditNetwork, y=None) -> np.ndarray:
        return self.fit(X).ds_
