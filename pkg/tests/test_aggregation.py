import numpy as np
import pytest

from debtstream import (
    CreditNetwork,
    SectorAggregator,
    StreamnessResult,
    ZeroDebtFirm,
    aggregate_by_sector,
    build_network,
    classification_crosstab,
    prune_undefined,
    solve_streamness,
    total_debt,
)
from debtstream.aggregation import BIN_LABELS, score_bin
from conftest import make_two_cycle, synth_corpus


def with_sectors(net, mapping):
    return CreditNetwork(
        firms=net.firms,
        loans=net.loans,
        bank=net.bank,
        totals=net.totals,
        sectors=mapping,
        surveyed=net.surveyed,
    )


class TestAggregate:
    def test_all_bank_sector_scores_one(self):
        net = build_network([], bank={"a": 10.0, "b": 20.0}, sectors={"a": "S", "b": "S"})
        agg = aggregate_by_sector(net)
        assert agg.sectors == ("S",)
        assert agg.ds.tolist() == [1.0]

    def test_sector_level_chain(self):
        net = build_network(
            [("c1", "p1", 30.0), ("c2", "p2", 70.0)],
            bank={"p1": 30.0, "p2": 70.0},
            sectors={"c1": "CONS", "c2": "CONS", "p1": "PROD", "p2": "PROD"},
        )
        agg = aggregate_by_sector(net)
        ds = dict(zip(agg.sectors, agg.ds))
        assert ds == pytest.approx({"PROD": 1.0, "CONS": 2.0})

    def test_intra_sector_loop_on_diagonal(self):
        # firm-level mutual pair inside one sector: bank 20, internal 180
        net = with_sectors(make_two_cycle(0.9, 0.9), {"a": "S", "b": "S"})
        agg = aggregate_by_sector(net)
        assert agg.loans[0, 0] == 180.0
        assert agg.bank[0] == pytest.approx(20.0)
        assert agg.ds[0] == pytest.approx(1.0 / (1.0 - 0.9), rel=1e-12)

    def test_unlabeled_firms_grouped_as_others(self):
        net = build_network([("x", "y", 5.0)], bank={"y": 5.0}, sectors={"y": "S"})
        agg = aggregate_by_sector(net)
        assert agg.sectors == ("Others", "S")

    def test_unpruned_zero_debt_sector_rejected(self):
        net = build_network([], bank={"a": 1.0}, firms=["idle"], sectors={"idle": "DEAD"})
        with pytest.raises(ZeroDebtFirm):
            aggregate_by_sector(net)

    def test_mass_conservation(self):
        for net in synth_corpus(range(40, 46), max_n=120):
            labeled = with_sectors(
                net, {f: f"S{i % 7}" for i, f in enumerate(net.firms)}
            )
            agg = aggregate_by_sector(labeled)
            debts = total_debt(labeled)
            assert agg.debts.sum() == pytest.approx(debts.sum(), rel=1e-9)
            assert agg.bank.sum() == pytest.approx(labeled.bank.sum(), rel=1e-9)
            assert agg.loans.sum() == pytest.approx(labeled.loans.sum(), rel=1e-9)
            # row identity at sector level
            np.testing.assert_allclose(agg.debts, agg.bank + agg.loans.sum(axis=1))

    def test_singleton_sectors_reproduce_firm_scores(self):
        for net in synth_corpus(range(50, 54), max_n=80):
            labeled = with_sectors(net, {f: f for f in net.firms})
            agg = aggregate_by_sector(labeled)
            firm_ds = solve_streamness(net)
            by_name = dict(zip(agg.sectors, agg.ds))
            for firm, value in firm_ds.ds.items():
                assert by_name[firm] == pytest.approx(value, abs=1e-10)

    def test_sector_scores_at_least_one(self):
        for net in synth_corpus(range(60, 64), max_n=100):
            labeled = with_sectors(
                net, {f: f"S{i % 5}" for i, f in enumerate(net.firms)}
            )
            agg = aggregate_by_sector(labeled)
            assert agg.ds.min() >= 1.0 - 1e-12

    def test_bank_dominated_sectors_score_near_one(self):
        net = build_network(
            [("a", "b", 1.0), ("c", "d", 2.0)],
            bank={"a": 99.0, "b": 50.0, "c": 98.0, "d": 70.0},
            sectors={"a": "S1", "b": "S1", "c": "S2", "d": "S2"},
        )
        agg = aggregate_by_sector(net)
        assert np.all(agg.ds < 1.1)

    def test_transformer(self):
        net = build_network([], bank={"a": 10.0}, sectors={"a": "S"})
        agg = SectorAggregator().fit_transform(net)
        assert agg.sectors == ("S",)


def result_for(values, firms=None):
    firms = firms or tuple(f"f{i}" for i in range(len(values)))
    return StreamnessResult(
        firms=tuple(firms),
        values=np.asarray(values, dtype=float),
        excluded=(),
        component_means={},
        solver_residual=0.0,
    )


class TestCrossTab:
    def test_all_low_upstream(self):
        res = result_for([1.0, 1.0, 1.2])
        tab = classification_crosstab(res, {f: "upstream" for f in res.firms})
        assert tab.counts[("UpStream", BIN_LABELS[0])] == 3
        assert tab.total() == 3

    def test_boundary_goes_to_middle_band(self):
        assert score_bin(1.5) == BIN_LABELS[1]
        assert score_bin(2.5) == BIN_LABELS[1]
        assert score_bin(1.4999) == BIN_LABELS[0]
        assert score_bin(2.5001) == BIN_LABELS[2]

    def test_hand_tally(self):
        res = result_for([1.0, 1.4, 1.5, 2.5, 3.0, 4.0])
        classes = {
            "f0": "upstream",
            "f1": "downstream",
            "f2": "upstream",
            "f3": "downstream",
            "f4": "upstream",
            "f5": "downstream",
        }
        tab = classification_crosstab(res, classes)
        assert tab.counts[("UpStream", BIN_LABELS[0])] == 1
        assert tab.counts[("DownStream", BIN_LABELS[0])] == 1
        assert tab.counts[("UpStream", BIN_LABELS[1])] == 1
        assert tab.counts[("DownStream", BIN_LABELS[1])] == 1
        assert tab.counts[("UpStream", BIN_LABELS[2])] == 1
        assert tab.counts[("DownStream", BIN_LABELS[2])] == 1
        assert tab.total() == 6

    def test_missing_and_unknown_labels_count_as_others(self):
        res = result_for([1.0, 2.0, 3.0])
        tab = classification_crosstab(res, {"f1": "mystery"})
        assert tab.counts[("Others", BIN_LABELS[0])] == 1
        assert tab.counts[("Others", BIN_LABELS[1])] == 1
        assert tab.counts[("Others", BIN_LABELS[2])] == 1

    def test_key_alias(self):
        res = result_for([2.0])
        tab = classification_crosstab(res, {"f0": "key"})
        assert tab.counts[("KeySector", BIN_LABELS[1])] == 1
