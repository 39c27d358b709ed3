import numpy as np
import pytest
from hypothesis import strategies as st

from debtstream import SynthConfig, build_network, generate, prune_undefined


@pytest.fixture
def chain3():
    """f1 borrows from banks only; f2 from f1; f3 from f2. Scores (1, 2, 3)."""
    return build_network([("f2", "f1", 100.0), ("f3", "f2", 100.0)], bank={"f1": 100.0})


def make_two_cycle(alpha=0.9, beta=0.9, scale=100.0):
    """Mutual-credit pair: a owes alpha*scale to b, b owes beta*scale to a.

    Closed form: ds_a = (1 + alpha) / (1 - alpha*beta), symmetric in b.
    """
    return build_network(
        [("a", "b", alpha * scale), ("b", "a", beta * scale)],
        bank={"a": scale - alpha * scale, "b": scale - beta * scale},
    )


@pytest.fixture
def two_cycle():
    return make_two_cycle()


def cycle_closed_form(alpha, beta):
    return (1 + alpha) / (1 - alpha * beta)


def synth_corpus(seeds, max_n=200):
    """Pruned synthetic networks with sizes spread over [20, max_n]."""
    nets = []
    for seed in seeds:
        n = 20 + (seed * 37) % (max_n - 19)
        net = generate(SynthConfig(n=n, mean_out_degree=2.5, loop_fraction=0.1, seed=seed))
        pruned, _ = prune_undefined(net)
        nets.append(pruned)
    return nets


@st.composite
def small_networks(draw, max_firms=7):
    """Random small credit networks, possibly with undefined firms."""
    n = draw(st.integers(2, max_firms))
    firms = [f"n{i}" for i in range(n)]
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    present = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    weights = draw(
        st.lists(
            st.floats(0.25, 50.0, allow_nan=False, allow_infinity=False),
            min_size=len(pairs),
            max_size=len(pairs),
        )
    )
    edges = [
        (firms[a], firms[b], w)
        for (a, b), keep, w in zip(pairs, present, weights)
        if keep
    ]
    banked = draw(st.lists(st.booleans(), min_size=n, max_size=n))
    amounts = draw(
        st.lists(
            st.floats(0.25, 50.0, allow_nan=False, allow_infinity=False),
            min_size=n,
            max_size=n,
        )
    )
    bank = {f: a for f, keep, a in zip(firms, banked, amounts) if keep}
    return build_network(edges, bank=bank, firms=firms)


def assert_debt_identity(net, rel_tol=1e-9):
    """Total debt must decompose exactly into bank plus inter-firm credit."""
    from debtstream import total_debt

    debts = total_debt(net)
    recomputed = net.bank + np.asarray(net.loans.sum(axis=1)).ravel()
    scale = max(debts.max(), 1.0)
    assert np.abs(debts - recomputed).max() <= rel_tol * scale
