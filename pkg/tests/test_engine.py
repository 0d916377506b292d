import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loansim.config import MigrationMatrix, default_layout, preset
from loansim.engine import (
    InternalConsistencyError,
    STATUS_ACTIVE,
    STATUS_BAD,
    STATUS_CLOSED,
    _State,
    adjust_matrix,
    adjust_row,
    constant_score_part,
    group_boundaries,
    insertion_batch,
    payment_update,
    run_simulation,
    segment_by_score,
    status_after,
    transaction_records,
)
from loansim.population import ProductionTable

LAYOUT = default_layout()
DEFAULT_MATRIX = LAYOUT.migration.as_array()


def make_production(layout, month_specs):
    """Hand-built production table: month_specs maps month -> list of row
    overrides (income, installment, spending, n_installments)."""
    names = (
        "app_id",
        "t_app",
        "birth_ordinal",
        "income",
        "spending",
        "installment",
        "n_installments",
        "loan_amount",
    )
    cols = {n: [] for n in names}
    for k in range(1, 5):
        cols[f"nom_{k}"] = []
        cols[f"int_{k}"] = []
    bounds = [0]
    next_id = 0
    for month in layout.months:
        for spec in month_specs.get(month, []):
            income = spec.get("income", 2000)
            installment = spec.get("installment", 300)
            n_inst = spec.get("n_installments", 12)
            cols["app_id"].append(next_id)
            cols["t_app"].append(month)
            cols["birth_ordinal"].append(layout.anchor_date(month).toordinal() - 40 * 365)
            cols["income"].append(income)
            cols["spending"].append(spec.get("spending", 500))
            cols["installment"].append(installment)
            cols["n_installments"].append(n_inst)
            cols["loan_amount"].append(installment * n_inst)
            for k in range(1, 5):
                cols[f"nom_{k}"].append(2)
                cols[f"int_{k}"].append(5.0)
            next_id += 1
        bounds.append(next_id)
    arrays = {
        n: np.asarray(v, dtype=np.float64 if n.startswith("int_") else np.int64)
        for n, v in cols.items()
    }
    return ProductionTable(arrays, np.asarray(bounds), layout)


def forced_matrix(rows_to_force):
    """Matrix where each state i moves to rows_to_force[i] with certainty."""
    rows = []
    for i in range(7):
        row = [0.0] * 8
        row[rows_to_force[i]] = 1.0
        rows.append(tuple(row))
    return MigrationMatrix(rows=tuple(rows))


class TestAdjustment:
    def test_two_state_row(self):
        got = adjust_row(np.array([0.85, 0.15, 0, 0, 0, 0, 0, 0]), 0, 0.2)
        assert got[0] == pytest.approx(0.68)
        assert got[1] == pytest.approx(0.32)

    def test_three_state_row(self):
        got = adjust_row(np.array([0.25, 0.45, 0.30, 0, 0, 0, 0, 0]), 1, 0.1)
        assert got[0] == pytest.approx(0.225)
        assert got[1] == pytest.approx(0.405)
        assert got[2] == pytest.approx(0.37)

    def test_zero_is_identity(self):
        for i in range(7):
            assert np.allclose(adjust_row(DEFAULT_MATRIX[i], i, 0.0), DEFAULT_MATRIX[i])

    def test_default_row_two_worsening_share(self):
        # 0.53 + 0.2 * (0.04 + 0.24 + 0.19)
        adj = adjust_row(DEFAULT_MATRIX[2], 2, 0.2)
        assert adj[3] == pytest.approx(0.624)

    def test_mass_moves_to_next_state_only(self):
        for i in range(7):
            row = DEFAULT_MATRIX[i]
            adj = adjust_row(row, i, 0.35)
            assert np.allclose(adj[i + 2 :], row[i + 2 :])
            assert np.all(adj[: i + 1] <= row[: i + 1])
            assert adj[i + 1] >= row[i + 1]

    @given(e=st.floats(min_value=0.0101, max_value=0.8999))
    @settings(max_examples=300, deadline=None)
    def test_rows_stay_stochastic(self, e):
        adj = adjust_matrix(DEFAULT_MATRIX, e)
        for i in range(7):
            assert abs(adj[i].sum() - 1.0) < 1e-12
            assert np.all(adj[i] >= 0.0)


class TestSegmentation:
    def test_boundaries_round_half_up(self):
        bounds = group_boundaries(np.array([0.85, 0.15, 0, 0, 0, 0, 0, 0]), 10)
        assert bounds[0] == 9  # 8.5 rounds up
        assert bounds[-1] == 10

    def test_ten_accounts_two_groups(self):
        scores = np.arange(10, dtype=float)
        ids = np.arange(10)
        g = segment_by_score(scores, ids, np.array([0.85, 0.15, 0, 0, 0, 0, 0, 0]))
        # lowest score gets the one worsen slot
        assert g[np.argmin(scores)] == 1
        assert np.sum(g == 0) == 9

    def test_single_account(self):
        g = segment_by_score(np.array([0.0]), np.array([7]), np.array([0.85, 0.15] + [0] * 6))
        assert g.tolist() == [0]
        g = segment_by_score(np.array([0.0]), np.array([7]), np.array([0.4, 0.6] + [0] * 6))
        assert g.tolist() == [1]

    def test_tie_broken_by_app_id(self):
        scores = np.zeros(4)
        ids = np.array([30, 10, 20, 40])
        g = segment_by_score(scores, ids, np.array([0.5, 0.5] + [0] * 6))
        by_id = dict(zip(ids.tolist(), g.tolist()))
        assert by_id == {10: 0, 20: 0, 30: 1, 40: 1}

    def test_zero_probability_groups_empty(self):
        row = np.array([0.5, 0.0, 0.5, 0, 0, 0, 0, 0])
        g = segment_by_score(np.arange(20.0), np.arange(20), row)
        assert np.sum(g == 1) == 0

    def test_empty_stratum(self):
        g = segment_by_score(np.empty(0), np.empty(0, dtype=np.int64), DEFAULT_MATRIX[0])
        assert g.size == 0

    @given(
        n=st.integers(min_value=1, max_value=20),
        row_idx=st.integers(min_value=0, max_value=6),
        seed=st.integers(min_value=0, max_value=1000),
    )
    @settings(max_examples=200, deadline=None)
    def test_counts_match_proportions_within_rounding(self, n, row_idx, seed):
        rng = np.random.default_rng(seed)
        row = DEFAULT_MATRIX[row_idx]
        g = segment_by_score(rng.normal(size=n), np.arange(n), row)
        counts = np.bincount(g, minlength=8)
        for j in range(8):
            assert abs(counts[j] / n - row[j]) <= 1.0 / n + 1e-12


class TestPaymentUpdate:
    def test_partial_catch_up(self):
        due, paid, pay_mask = payment_update(
            np.array([2]), np.array([4]), np.array([12]), np.array([1])
        )
        assert due.tolist() == [1]
        assert paid.tolist() == [6]  # min(4 + 2 - 1 + 1, 12)
        assert pay_mask.tolist() == [True]

    def test_payment_capped_at_loan_size(self):
        due, paid, _ = payment_update(np.array([3]), np.array([11]), np.array([12]), np.array([0]))
        assert paid.tolist() == [12]

    def test_missing_payment_keeps_paid(self):
        due, paid, pay_mask = payment_update(
            np.array([2]), np.array([4]), np.array([12]), np.array([3])
        )
        assert due.tolist() == [3]
        assert paid.tolist() == [4]
        assert pay_mask.tolist() == [False]

    def test_group_beyond_band_rejected(self):
        with pytest.raises(InternalConsistencyError):
            payment_update(np.array([2]), np.array([4]), np.array([12]), np.array([4]))

    def test_status_rules(self):
        status = status_after(np.array([1, 7, 0]), np.array([12, 3, 5]), np.array([12, 12, 12]))
        assert status.tolist() == [STATUS_CLOSED, STATUS_BAD, STATUS_ACTIVE]


class TestInsertion:
    def test_starting_row_fields(self):
        layout = dataclasses.replace(LAYOUT)
        prod = make_production(layout, {5: [dict()]})
        batch = insertion_batch(prod, 5)
        (rec,) = transaction_records(batch)
        assert (rec.t_app, rec.t_cur, rec.n_due, rec.n_paid) == (5, 5, 0, 0)
        assert rec.status == "A"
        assert rec.pay_days == 0

    def test_empty_slice(self):
        prod = make_production(LAYOUT, {})
        batch = insertion_batch(prod, 3)
        assert batch["app_id"].size == 0

    def test_bulk_insertion_is_bijection(self):
        prod = make_production(LAYOUT, {0: [dict() for _ in range(50)]})
        batch = insertion_batch(prod, 0)
        assert batch["app_id"].size == 50
        assert np.all(batch["status"] == STATUS_ACTIVE)

    def test_duplicate_app_id_rejected(self):
        prod = make_production(LAYOUT, {0: [dict(), dict()]})
        state = _State()
        sl = prod.month_slice(0)
        const = constant_score_part(prod, sl, LAYOUT)
        state.append_new(prod, sl, const)
        with pytest.raises(InternalConsistencyError, match="duplicate"):
            state.append_new(prod, sl, const)


class TestRunSimulation:
    def test_perfect_payer_closes_after_installment_count(self):
        layout = dataclasses.replace(
            LAYOUT, migration=forced_matrix([0, 0, 0, 0, 0, 0, 0]), seed=9
        )
        prod = make_production(layout, {0: [dict(n_installments=6)]})
        res = run_simulation(layout, production=prod)
        txn = res.transactions_frame()
        assert len(txn) == 7  # insertion plus six paying months
        assert txn["n_paid"].tolist() == [0, 1, 2, 3, 4, 5, 6]
        assert txn["n_due"].tolist() == [0] * 7
        assert txn["status"].tolist() == [STATUS_ACTIVE] * 6 + [STATUS_CLOSED]

    def test_always_worsening_terminates_bad_at_seven(self):
        layout = dataclasses.replace(
            LAYOUT, migration=forced_matrix([1, 2, 3, 4, 5, 6, 7]), seed=9
        )
        prod = make_production(layout, {0: [dict(n_installments=30)]})
        res = run_simulation(layout, production=prod)
        txn = res.transactions_frame()
        assert len(txn) == 8  # insertion plus seven worsening months
        assert txn["n_due"].tolist() == list(range(8))
        assert txn["n_paid"].tolist() == [0] * 8
        assert txn["status"].tolist() == [STATUS_ACTIVE] * 7 + [STATUS_BAD]
        # missed payments carry no pay day
        assert np.isnan(txn["pay_days"].to_numpy()[1:]).all()

    def test_account_active_at_horizon_end_kept(self):
        layout = dataclasses.replace(
            LAYOUT, migration=forced_matrix([1, 0, 1, 2, 3, 4, 5]), seed=9
        )
        prod = make_production(layout, {80: [dict(n_installments=30)]})
        res = run_simulation(layout, production=prod)
        txn = res.transactions_frame()
        assert txn["t_cur"].tolist() == [80, 81, 82, 83]
        assert txn["status"].tolist() == [STATUS_ACTIVE] * 4

    def test_rows_ordered_by_month_then_id(self):
        layout = dataclasses.replace(preset("beh_case"), volume_scale=0.003, seed=4)
        res = run_simulation(layout)
        txn = res.transactions_frame()
        key = txn["t_cur"].to_numpy() * 2**40 + txn["app_id"].to_numpy()
        assert np.all(np.diff(key) > 0)

    def test_no_rows_after_termination_each_month_once(self):
        layout = dataclasses.replace(preset("app_case"), volume_scale=0.003, seed=4)
        txn = run_simulation(layout).transactions_frame()
        frame = txn.sort_values(["app_id", "t_cur"])
        for _, acc in frame.groupby("app_id"):
            months = acc["t_cur"].to_numpy()
            assert np.all(np.diff(months) == 1)
            statuses = acc["status"].to_numpy()
            assert np.all(statuses[:-1] == STATUS_ACTIVE)
            if statuses[-1] == STATUS_ACTIVE:
                assert months[-1] == layout.t_end

    def test_monotone_n_paid_and_banded_steps(self):
        layout = dataclasses.replace(preset("beh_case"), volume_scale=0.003, seed=4)
        txn = run_simulation(layout).transactions_frame()
        frame = txn.sort_values(["app_id", "t_cur"])
        same = frame["app_id"].to_numpy()[1:] == frame["app_id"].to_numpy()[:-1]
        assert np.all(np.diff(frame["n_paid"].to_numpy())[same] >= 0)
        assert np.all(np.diff(frame["n_due"].to_numpy())[same] <= 1)

    def test_stratum_counts_reproduce_rows_exactly(self):
        layout = dataclasses.replace(preset("beh_case"), volume_scale=0.005, seed=4)
        res = run_simulation(layout)
        assert res.stratum_stats
        for stat in res.stratum_stats:
            expected = np.diff(
                np.concatenate(([0], group_boundaries(np.array(stat.row), stat.size)))
            )
            assert stat.group_counts == tuple(expected.tolist())

    def test_deterministic_across_runs_and_threads(self):
        layout = dataclasses.replace(preset("app_case"), volume_scale=0.004, seed=12)
        a = run_simulation(layout, threads=1)
        b = run_simulation(layout, threads=4)
        for which in ("transactions_frame", "abt_frame"):
            fa, fb = getattr(a, which)(), getattr(b, which)()
            assert fa.equals(fb), which

    def test_abt_rows_only_for_active_months(self):
        layout = dataclasses.replace(preset("beh_case"), volume_scale=0.003, seed=4)
        res = run_simulation(layout)
        txn = res.transactions_frame()
        features = res.abt_frame()
        active = txn[txn["status"] == STATUS_ACTIVE]
        assert len(features) == len(active)
        merged = features.merge(
            active[["app_id", "t_cur"]], on=["app_id", "t_cur"], how="inner"
        )
        assert len(merged) == len(features)

    def test_insertion_month_features(self):
        layout = dataclasses.replace(
            LAYOUT, migration=forced_matrix([0] * 7), seed=9
        )
        prod = make_production(layout, {0: [dict(n_installments=6)]})
        features = run_simulation(layout, production=prod).abt_frame()
        first = features.iloc[0]
        assert first["act_days"] == 15.0  # pay day zero at insertion
        assert first["act_seniority"] == 1.0
        assert first["beh_days_3"] == 15.0
        assert first["beh_n_due_3"] == 2.0
