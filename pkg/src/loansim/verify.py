"""Structural re-verification of a finished run directory.

Re-checks, from the written files alone (plus the saved layout), every
invariant the generator promises: production arithmetic, per-account
transaction structure, status rules, payment-day presence, feature ranges,
and the per-stratum segmentation proportions against the governing
(possibly crisis-adjusted) matrix rows.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from . import abt, datasets
from .config import Layout, load_layout
from .engine import (
    STATUS_ACTIVE,
    STATUS_BAD,
    STATUS_CLOSED,
    adjust_matrix,
    group_boundaries,
)
from .sampling import TAG_CYCLE_NOISE, macro_series, normal_at

LAYOUT_FILE = "layout.json"
MANIFEST_FILE = "run_manifest.json"

MAX_REPORTED = 20


def verify_run_dir(out_dir: str | Path) -> list[str]:
    """All violations found in a run directory; empty means pass."""
    out = Path(out_dir)
    violations: list[str] = []
    paths = {
        name: out / name
        for name in (datasets.PRODUCTION_FILE, datasets.TRANSACTION_FILE, datasets.ABT_FILE)
    }
    missing = [name for name, p in paths.items() if not p.exists()]
    if missing:
        return [f"missing dataset {name}" for name in missing]
    layout_path = out / LAYOUT_FILE
    if not layout_path.exists():
        return [f"missing {LAYOUT_FILE}"]
    layout = load_layout(layout_path)

    production = datasets.read_production(paths[datasets.PRODUCTION_FILE])
    txn = datasets.read_transactions(paths[datasets.TRANSACTION_FILE])
    features = datasets.read_abt(paths[datasets.ABT_FILE])

    violations += check_production(production, layout)
    violations += check_transactions(txn, production, layout)
    violations += check_features(features, txn, layout)
    violations += check_segmentation(txn, features, production, layout)
    return violations


def check_production(production: pd.DataFrame, layout: Layout) -> list[str]:
    p = layout.distributions.applicant
    problems = []
    if production["app_id"].duplicated().any():
        problems.append("production: duplicate app_id")
    if not production["app_id"].is_monotonic_increasing:
        problems.append("production: app_id not increasing")
    if not production["t_app"].is_monotonic_increasing:
        problems.append("production: rows not ordered by t_app")
    if (production["loan_amount"] != production["installment"] * production["n_installments"]).any():
        problems.append("production: loan_amount != installment * n_installments")
    if (production["income"] < p.income_floor).any():
        problems.append(f"production: income below {p.income_floor}")
    if (production["n_installments"] < p.n_inst_min).any():
        problems.append(f"production: n_installments below {p.n_inst_min}")
    return problems


def check_transactions(txn: pd.DataFrame, production: pd.DataFrame, layout: Layout) -> list[str]:
    problems = []
    day_limit = layout.distributions.pay_days.day_limit
    order_key = txn["t_cur"].to_numpy() * 2**40 + txn["app_id"].to_numpy()
    if not np.all(np.diff(order_key) > 0):
        problems.append("transaction: rows not strictly ordered by (t_cur, app_id)")

    frame = txn.sort_values(["app_id", "t_cur"], kind="stable")
    ids = frame["app_id"].to_numpy()
    t_cur = frame["t_cur"].to_numpy()
    t_app = frame["t_app"].to_numpy()
    n_due = frame["n_due"].to_numpy()
    n_paid = frame["n_paid"].to_numpy()
    status = frame["status"].to_numpy()
    pay = frame["pay_days"]

    same = np.zeros(ids.size, dtype=bool)
    same[1:] = ids[1:] == ids[:-1]
    first = ~same

    if not np.all(t_cur[first] == t_app[first]):
        problems.append("transaction: first row of an account not at t_app")
    if np.any(n_due[first] != 0) or np.any(n_paid[first] != 0):
        problems.append("transaction: insertion row with nonzero dues or paid count")
    if np.any(np.diff(t_cur)[same[1:]] != 1):
        problems.append("transaction: account months not consecutive")
    if np.any(np.diff(n_paid)[same[1:]] < 0):
        problems.append("transaction: n_paid not monotone")
    if np.any(np.diff(n_due)[same[1:]] > 1):
        problems.append("transaction: n_due step above +1")
    prev_not_active = np.zeros(ids.size, dtype=bool)
    prev_not_active[1:] = status[:-1] != STATUS_ACTIVE
    if np.any(same & prev_not_active):
        problems.append("transaction: rows continue after a terminal status")

    joined = frame.merge(production[["app_id", "n_installments"]], on="app_id", how="left")
    n_inst = joined["n_installments"].to_numpy()
    if np.isnan(n_inst.astype(np.float64)).any():
        problems.append("transaction: app_id missing from production")
    else:
        closed = status == STATUS_CLOSED
        if np.any(n_paid[closed] != n_inst[closed]):
            problems.append("transaction: closed account with n_paid != n_installments")
        active_like = status != STATUS_CLOSED
        if np.any(n_paid[active_like] > n_inst[active_like]):
            problems.append("transaction: n_paid above n_installments")
    bad = status == STATUS_BAD
    if np.any(n_due[bad] != 7):
        problems.append("transaction: bad status without 7 due installments")
    if np.any((n_due[~bad] < 0) | (n_due[~bad] > 7)):
        problems.append("transaction: n_due outside 0..7")

    present = pay.notna().to_numpy()
    vals = pay.fillna(0).to_numpy(dtype=np.int64)
    if np.any(np.abs(vals[present]) > day_limit):
        problems.append(f"transaction: pay_days outside [-{day_limit}, {day_limit}]")
    # missing exactly when the month was missed (due count increased);
    # insertion rows carry an explicit zero
    prev_due = np.roll(n_due, 1)
    worsened = same & (n_due == prev_due + 1)
    if np.any(worsened & present):
        problems.append("transaction: pay_days present on a missed payment")
    paid_rows = same & ~worsened
    if np.any(paid_rows & ~present):
        problems.append("transaction: pay_days missing on a paid month")
    if np.any(first & ~present):
        problems.append("transaction: insertion row without pay_days 0")
    elif np.any(vals[first] != 0):
        problems.append("transaction: insertion pay_days not 0")
    return problems


def check_features(features: pd.DataFrame, txn: pd.DataFrame, layout: Layout) -> list[str]:
    problems = []
    day_span = 2 * layout.distributions.pay_days.day_limit
    act_days = features["act_days"]
    present = act_days.notna()
    if ((act_days[present] < 0) | (act_days[present] > day_span)).any():
        problems.append(f"abt: act_days outside [0, {day_span}]")
    for col in ("act_utl", "act_dueutl"):
        if ((features[col] < 0) | (features[col] > 1)).any():
            problems.append(f"abt: {col} outside [0, 1]")
    if (features["act_seniority"] < 1).any():
        problems.append("abt: seniority below 1")
    active = txn[txn["status"] == STATUS_ACTIVE]
    if len(features) != len(active):
        problems.append(
            f"abt: {len(features)} rows but {len(active)} active transaction rows"
        )
    for t in (3, 6, 9, 12):
        young = features["act_seniority"] < t
        if not np.allclose(features.loc[young, f"beh_days_{t}"], abt.BEH_DAYS_IMPUTED):
            problems.append(f"abt: beh_days_{t} not imputed for young accounts")
        if not np.allclose(features.loc[young, f"beh_n_due_{t}"], abt.BEH_N_DUE_IMPUTED):
            problems.append(f"abt: beh_n_due_{t} not imputed for young accounts")
    return problems


def cycle_noise_for(ids: np.ndarray, months: np.ndarray, layout: Layout) -> np.ndarray:
    return normal_at(layout.seed, TAG_CYCLE_NOISE, ids, months)


def check_segmentation(
    txn: pd.DataFrame, features: pd.DataFrame, production: pd.DataFrame, layout: Layout
) -> list[str]:
    """Recompute strata from the files and compare realized group counts to
    the boundary-rounded proportions of the governing matrix rows."""
    problems = []
    matrix = layout.migration.as_array()
    macro = macro_series(layout)
    adjusted = {m: adjust_matrix(matrix, macro[m - layout.t_start]) for m in layout.months}

    frame = txn.sort_values(["app_id", "t_cur"], kind="stable")
    ids = frame["app_id"].to_numpy()
    has_next = np.zeros(ids.size, dtype=bool)
    has_next[:-1] = ids[1:] == ids[:-1]
    next_due = np.roll(frame["n_due"].to_numpy(), -1)

    moved = frame[has_next].copy()
    moved["next_due"] = next_due[has_next]

    app_cols = [c for c in production.columns if c not in ("t_app", "birth_date", "app_month")]
    feat = features.merge(production[app_cols], on="app_id", how="left")
    eps = cycle_noise_for(feat["app_id"].to_numpy(), feat["t_cur"].to_numpy(), layout)
    flags = abt.evaluate_cycle(feat, layout.cycle_rule, eps)
    feat = feat[["app_id", "t_cur"]].copy()
    feat["flag"] = np.asarray(flags, dtype=bool)
    moved = moved.merge(feat, on=["app_id", "t_cur"], how="left")
    if moved["flag"].isna().any():
        return ["segmentation: active transaction row without a feature row"]

    for (month, state, flag), group in moved.groupby(["t_cur", "n_due", "flag"]):
        row = adjusted[month][state] if flag else matrix[state]
        n = len(group)
        expected = np.diff(np.concatenate(([0], group_boundaries(row, n))))
        realized = np.bincount(group["next_due"].to_numpy(), minlength=8)
        if not np.array_equal(realized, expected):
            problems.append(
                f"segmentation: month {month} state {state} adjusted={bool(flag)} "
                f"counts {realized.tolist()} != expected {expected.tolist()}"
            )
            if len(problems) >= MAX_REPORTED:
                problems.append("segmentation: further violations suppressed")
                break
    return problems
