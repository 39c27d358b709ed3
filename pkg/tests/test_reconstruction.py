import numpy as np
import pytest

from debtstream import (
    CreditNetwork,
    EmptyIntersection,
    FullReconstruction,
    MissingTotals,
    NoZeroSlots,
    SparseReconstruction,
    TopCreditorTruncation,
    bank_reachable,
    build_network,
    compare_reconstructions,
    generate,
    reconstruct_full,
    reconstruct_sparse,
    residual,
    truncate_top_creditors,
    SynthConfig,
)
from debtstream.reconstruction import minimal_slot_count
from conftest import synth_corpus


def with_totals(net, totals):
    vec = np.full(net.n, np.nan)
    for firm, value in totals.items():
        vec[net.index[firm]] = value
    return CreditNetwork(
        firms=net.firms, loans=net.loans, bank=net.bank,
        totals=vec, sectors=net.sectors, surveyed=net.surveyed,
    )


def observed_corpus(seeds, n=120):
    """Seeded synthetic truths truncated to their top-3 creditors."""
    out = []
    for seed in seeds:
        truth = generate(SynthConfig(n=n, mean_out_degree=4.0, loop_fraction=0.08, seed=seed))
        out.append((truth, truncate_top_creditors(truth, k=3)))
    return out


class TestResidual:
    def test_simple_difference(self):
        net = with_totals(
            build_network([("a", "b", 60.0)], bank={"b": 1.0}), {"a": 100.0}
        )
        res = residual(net)
        assert res.amounts[net.index["a"]] == 40.0
        assert res.clamped_firms == ()

    def test_negative_raw_residual_clamped(self):
        net = with_totals(
            build_network([("a", "b", 60.0)], bank={"b": 1.0}), {"a": 50.0}
        )
        res = residual(net)
        assert res.amounts[net.index["a"]] == 0.0
        assert res.clamped_firms == ("a",)

    def test_unreported_totals_are_zero_not_clamped(self):
        net = with_totals(
            build_network([("a", "b", 60.0), ("b", "c", 5.0)], bank={"c": 1.0}),
            {"a": 100.0},
        )
        res = residual(net)
        assert res.amounts[net.index["b"]] == 0.0
        assert res.clamped_firms == ()

    def test_missing_totals_rejected(self):
        net = build_network([("a", "b", 1.0)], bank={"b": 1.0})
        with pytest.raises(MissingTotals):
            residual(net)


class TestFullReconstruction:
    def test_single_open_slot_takes_everything(self):
        # five firms; row "a" discloses three creditors, one empty slot left
        net = with_totals(
            build_network(
                [("a", "b", 30.0), ("a", "c", 20.0), ("a", "d", 10.0)],
                bank={"b": 1.0, "c": 1.0, "d": 1.0, "e": 1.0},
                firms=["e"],
            ),
            {"a": 100.0},
        )
        rebuilt = reconstruct_full(net)
        assert rebuilt.loans[rebuilt.index["a"], rebuilt.index["e"]] == 40.0

    def test_uniform_split_over_open_slots(self):
        # six firms, three observed creditors: two empty slots get 20 each
        net = with_totals(
            build_network(
                [("a", "b", 30.0), ("a", "c", 20.0), ("a", "d", 10.0)],
                bank={"b": 1.0, "c": 1.0, "d": 1.0, "e": 1.0, "f": 1.0},
                firms=["e", "f"],
            ),
            {"a": 100.0},
        )
        rebuilt = reconstruct_full(net)
        a = rebuilt.index["a"]
        assert rebuilt.loans[a, rebuilt.index["e"]] == 20.0
        assert rebuilt.loans[a, rebuilt.index["f"]] == 20.0

    def test_zero_residual_row_unchanged(self):
        net = with_totals(
            build_network([("a", "b", 60.0)], bank={"b": 1.0}), {"a": 60.0}
        )
        rebuilt = reconstruct_full(net)
        np.testing.assert_array_equal(rebuilt.loans.toarray(), net.loans.toarray())

    def test_no_open_slot_rejected(self):
        net = with_totals(
            build_network([("a", "b", 10.0)], bank={"b": 1.0}), {"a": 50.0}
        )
        with pytest.raises(NoZeroSlots):
            reconstruct_full(net)


class TestSparseReconstruction:
    @pytest.mark.parametrize(
        "residual_amount,smallest,expected",
        [(40.0, 15.0, 3), (40.0, 50.0, 1), (30.0, 15.0, 3), (45.0, 15.0, 4)],
    )
    def test_minimal_slot_count(self, residual_amount, smallest, expected):
        n = minimal_slot_count(residual_amount, smallest)
        assert n == expected
        assert residual_amount / n < smallest
        if n > 1:
            assert residual_amount / (n - 1) >= smallest

    def test_zero_residual_row_unchanged(self):
        net = with_totals(
            build_network([("a", "b", 60.0)], bank={"b": 1.0}), {"a": 60.0}
        )
        rebuilt = reconstruct_sparse(net, seed=1)
        np.testing.assert_array_equal(rebuilt.loans.toarray(), net.loans.toarray())

    def test_new_entries_stay_below_smallest_observed(self):
        for truth, observed in observed_corpus(range(1, 6)):
            rebuilt = reconstruct_sparse(observed, seed=99)
            old = observed.loans.toarray()
            new = rebuilt.loans.toarray()
            added = new - old
            for i in range(observed.n):
                if added[i].any():
                    assert added[i].max() < old[i][old[i] > 0].min()

    def test_same_seed_is_byte_identical(self):
        _, observed = observed_corpus([7])[0]
        a = reconstruct_sparse(observed, seed=123)
        b = reconstruct_sparse(observed, seed=123)
        assert (a.loans != b.loans).nnz == 0
        c = reconstruct_sparse(observed, seed=124)
        assert (a.loans != c.loans).nnz != 0

    def test_no_observed_creditor_falls_back_with_warning(self):
        net = with_totals(
            build_network([], bank={"a": 1.0, "b": 1.0, "c": 1.0}), {"a": 30.0}
        )
        with pytest.warns(UserWarning, match="discloses no creditor"):
            rebuilt = reconstruct_sparse(net, seed=5)
        a = rebuilt.index["a"]
        row = rebuilt.loans.toarray()[a]
        assert row[rebuilt.index["b"]] == 15.0
        assert row[rebuilt.index["c"]] == 15.0

    def test_fewer_slots_than_wanted_uses_all(self):
        # residual 90 with smallest observed 10 wants 10 slots; only 2 exist
        net = with_totals(
            build_network(
                [("a", "b", 10.0)],
                bank={"b": 1.0, "c": 1.0, "d": 1.0},
                firms=["c", "d"],
            ),
            {"a": 100.0},
        )
        rebuilt = reconstruct_sparse(net, seed=11)
        a = rebuilt.index["a"]
        row = rebuilt.loans.toarray()[a]
        assert row[rebuilt.index["c"]] == 45.0
        assert row[rebuilt.index["d"]] == 45.0


class TestConservationAndSafety:
    def test_both_methods_restore_reported_totals(self):
        for truth, observed in observed_corpus(range(10, 16)):
            for rebuilt in (reconstruct_full(observed), reconstruct_sparse(observed, seed=3)):
                row_sums = np.asarray(rebuilt.loans.sum(axis=1)).ravel()
                reported = observed.totals
                mask = ~np.isnan(reported)
                np.testing.assert_allclose(
                    row_sums[mask], reported[mask], rtol=1e-9, atol=1e-9
                )

    def test_observed_entries_never_modified(self):
        for truth, observed in observed_corpus(range(20, 24)):
            old = observed.loans.toarray()
            for rebuilt in (reconstruct_full(observed), reconstruct_sparse(observed, seed=8)):
                new = rebuilt.loans.toarray()
                np.testing.assert_array_equal(new[old > 0], old[old > 0])

    def test_reachability_never_lost(self):
        for truth, observed in observed_corpus(range(30, 34)):
            before = bank_reachable(observed)
            for rebuilt in (reconstruct_full(observed), reconstruct_sparse(observed, seed=4)):
                after = bank_reachable(rebuilt)
                assert np.all(after[before])


class TestTruncation:
    def test_keeps_largest_entries_and_true_totals(self):
        net = build_network(
            [("a", "b", 5.0), ("a", "c", 9.0), ("a", "d", 7.0), ("a", "e", 1.0)],
            bank={"b": 1.0, "c": 1.0, "d": 1.0, "e": 1.0},
        )
        observed = truncate_top_creditors(net, k=2)
        a = observed.index["a"]
        row = observed.loans.toarray()[a]
        assert row[observed.index["c"]] == 9.0
        assert row[observed.index["d"]] == 7.0
        assert row.sum() == 16.0
        assert observed.totals[a] == 22.0

    def test_tie_breaks_toward_smaller_lender_index(self):
        net = build_network(
            [("a", "b", 5.0), ("a", "c", 5.0), ("a", "d", 5.0)],
            bank={"b": 1.0, "c": 1.0, "d": 1.0},
        )
        observed = truncate_top_creditors(net, k=2)
        a = observed.index["a"]
        row = observed.loans.toarray()[a]
        assert row[observed.index["b"]] == 5.0
        assert row[observed.index["c"]] == 5.0
        assert row[observed.index["d"]] == 0.0


class TestCompare:
    def test_identical_networks_correlate_perfectly(self, chain3):
        report = compare_reconstructions(chain3, chain3, method="full")
        assert report.spearman == 1.0
        assert report.kendall == 1.0
        assert report.pearson == 1.0
        assert report.dropped_firms == ()

    def test_rank_reversal(self):
        forward = build_network(
            [("f2", "f1", 10.0), ("f3", "f2", 10.0)], bank={"f1": 10.0}
        )
        backward = build_network(
            [("f2", "f3", 10.0), ("f1", "f2", 10.0)], bank={"f3": 10.0}
        )
        report = compare_reconstructions(forward, backward)
        assert report.spearman == -1.0
        assert report.kendall == -1.0

    def test_empty_intersection_rejected(self):
        a = build_network([("x", "y", 1.0)], bank={"y": 1.0})
        b = build_network([("p", "q", 1.0)], bank={"q": 1.0})
        with pytest.raises(EmptyIntersection):
            compare_reconstructions(a, b)

    def test_end_to_end_pipeline_logs_finite_correlations(self):
        truth = generate(SynthConfig(n=200, mean_out_degree=3.0, loop_fraction=0.05, seed=77))
        observed = truncate_top_creditors(truth, k=3)
        rebuilt = reconstruct_full(observed)
        report = compare_reconstructions(observed, rebuilt, method="full")
        for value in (report.spearman, report.kendall, report.pearson):
            assert np.isfinite(value)
            assert -1.0 <= value <= 1.0
        print(
            f"200-firm full reconstruction: spearman={report.spearman:.4f} "
            f"kendall={report.kendall:.4f} pearson={report.pearson:.4f}"
        )


class TestTransformers:
    def test_pipeline_of_transformers(self):
        truth = generate(SynthConfig(n=60, mean_out_degree=3.0, seed=5))
        observed = TopCreditorTruncation(k=3).fit_transform(truth)
        full = FullReconstruction().fit_transform(observed)
        sparse_net = SparseReconstruction(seed=2).fit_transform(observed)
        assert full.loans.nnz >= observed.loans.nnz
        assert sparse_net.loans.nnz >= observed.loans.nnz

    def test_sparse_seed_is_a_param(self):
        assert SparseReconstruction(seed=9).get_params() == {"seed": 9}
