"""Default labeling, sub-portfolio tagging, and risk reports: bad rates,
flow rates, vintage curves, and binning tables with Gini.

Labels look forward from each observation row over a 3/6/9/12-month
outcome window at the maximum due-installment count: staying at or below
one due installment (or closing) is Good, breaching three (two for the
3-month window) or terminating bad is Bad, anything else in a fully
observed window is Indeterminate.  Windows truncated by the horizon
without a resolution are Unobservable and excluded from all rates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .config import Layout
from .engine import STATUS_ACTIVE, STATUS_BAD, STATUS_CLOSED

GOOD = 0
BAD = 1
INDETERMINATE = 2
UNOBSERVABLE = 3
LABEL_NAMES = np.array(["Good", "Bad", "Indeterminate", "Unobservable"])

OUTCOME_WINDOWS = (3, 6, 9, 12)
PORTFOLIOS = ("APP", "BEH", "COL")


def bad_threshold(t: int) -> int:
    """Due-installment count that must be exceeded for a Bad label."""
    return 2 if t == 3 else 3


def label_path(dues, statuses, t: int, truncated: bool) -> int:
    """Label one observation from its forward path (reference, one account).

    `dues` and `statuses` cover the observation month onward, at most t
    elements; `truncated` means the account was still active when the data
    ended before the window completed.
    """
    dues = list(dues)[:t]
    statuses = list(statuses)[:t]
    max_due = max(dues)
    if "C" in statuses:
        return GOOD
    if max_due > bad_threshold(t) or "B" in statuses:
        return BAD
    full_window = len(dues) == t or not truncated
    if not full_window:
        return UNOBSERVABLE
    if max_due <= 1:
        return GOOD
    return INDETERMINATE


def observation_order(txn: pd.DataFrame) -> np.ndarray:
    return np.lexsort((txn["t_cur"].to_numpy(), txn["app_id"].to_numpy()))


def attach_labels(txn: pd.DataFrame) -> pd.DataFrame:
    """Default labels for every transaction row and outcome window.

    Returns a frame aligned to txn's index with columns default_3..12
    (label codes).  Account months are contiguous, so the forward window
    of a row is simply the next rows of the same account.
    """
    order = observation_order(txn)
    ids = txn["app_id"].to_numpy()[order]
    dues = txn["n_due"].to_numpy()[order]
    status = txn["status"].to_numpy()[order]
    n = ids.size
    max_t = max(OUTCOME_WINDOWS)
    if n == 0:
        return pd.DataFrame(
            {f"default_{t}": pd.Series(dtype=np.int8) for t in OUTCOME_WINDOWS}, index=txn.index
        )

    # account blocks are contiguous after the (app_id, t_cur) sort
    boundary = np.empty(n, dtype=bool)
    boundary[0] = True
    boundary[1:] = ids[1:] != ids[:-1]
    starts = np.flatnonzero(boundary)
    ends = np.append(starts[1:], n)  # exclusive end row of each block
    block = np.cumsum(boundary) - 1
    remaining = ends[block] - np.arange(n)
    # an account is horizon-truncated iff its last row is still active
    truncated_account = (status[ends - 1] == STATUS_ACTIVE)[block]

    max_due = dues.astype(np.int64).copy()
    ever_c = status == STATUS_CLOSED
    ever_b = status == STATUS_BAD
    labels: dict[int, np.ndarray] = {}
    pad_ids = np.concatenate([ids, np.full(max_t, -1, dtype=ids.dtype)])
    pad_due = np.concatenate([dues, np.zeros(max_t, dtype=dues.dtype)])
    pad_status = np.concatenate([status, np.full(max_t, -1, dtype=status.dtype)])
    for k in range(1, max_t):
        same = pad_ids[k : k + n] == ids
        max_due = np.where(same, np.maximum(max_due, pad_due[k : k + n]), max_due)
        ever_c |= same & (pad_status[k : k + n] == STATUS_CLOSED)
        ever_b |= same & (pad_status[k : k + n] == STATUS_BAD)
        t = k + 1
        if t in OUTCOME_WINDOWS:
            labels[t] = _labels_from_window(
                max_due, ever_c, ever_b, remaining >= t, truncated_account, t
            )

    out = pd.DataFrame(index=txn.index)
    inverse = np.empty(n, dtype=np.int64)
    inverse[order] = np.arange(n)
    for t in OUTCOME_WINDOWS:
        out[f"default_{t}"] = labels[t][inverse].astype(np.int8)
    return out


def _labels_from_window(max_due, ever_c, ever_b, full_window, truncated, t: int) -> np.ndarray:
    good = ever_c | (full_window & (max_due <= 1))
    bad = (max_due > bad_threshold(t)) | ever_b
    observable = full_window | ~truncated
    return np.select(
        [good, bad, observable],
        [GOOD, BAD, INDETERMINATE],
        default=UNOBSERVABLE,
    ).astype(np.int8)


def seniority_of(txn: pd.DataFrame) -> np.ndarray:
    return (txn["t_cur"] - txn["t_app"] + 1).to_numpy()


def tag_portfolios(txn: pd.DataFrame) -> pd.DataFrame:
    """Sub-portfolio membership per transaction row.

    APP: the starting month of each account (once per account).
    BEH: seniority above two months and currently no due installments.
    COL: exactly one due installment (start of collection).
    """
    seniority = seniority_of(txn)
    n_due = txn["n_due"].to_numpy()
    return pd.DataFrame(
        {
            "APP": (txn["t_cur"] == txn["t_app"]).to_numpy(),
            "BEH": (seniority > 2) & (n_due == 0),
            "COL": n_due == 1,
        },
        index=txn.index,
    )


def bad_rate_series(
    txn: pd.DataFrame,
    labels: pd.DataFrame,
    tags: pd.DataFrame,
    portfolio: str,
    t: int,
    layout: Layout | None = None,
    include_indeterminate: bool = True,
) -> pd.DataFrame:
    """Per-observation-month Bad share for one portfolio and window.

    The denominator covers every labeled (non-Unobservable) tagged row;
    Indeterminate stays in the denominator unless switched off.  Months
    with no labeled rows carry n=0 and an undefined (NaN) rate.
    """
    if portfolio not in PORTFOLIOS:
        raise ValueError(f"unknown portfolio {portfolio!r}; expected one of {PORTFOLIOS}")
    label = labels[f"default_{t}"].to_numpy()
    mask = tags[portfolio].to_numpy() & (label != UNOBSERVABLE)
    if not include_indeterminate:
        mask &= label != INDETERMINATE
    month = txn["t_cur"].to_numpy()[mask]
    is_bad = label[mask] == BAD
    months = (
        np.arange(layout.t_start, layout.t_end + 1)
        if layout is not None
        else np.unique(txn["t_cur"].to_numpy())
    )
    grouped = pd.DataFrame({"t_obs": month, "bad": is_bad}).groupby("t_obs")["bad"]
    n = grouped.size().reindex(months, fill_value=0)
    n_bad = grouped.sum().reindex(months, fill_value=0)
    with np.errstate(invalid="ignore"):
        rate = np.where(n > 0, n_bad / n, np.nan)
    return pd.DataFrame(
        {"t_obs": months, "n": n.to_numpy(), "n_bad": n_bad.to_numpy(), "bad_rate": rate}
    )


def pooled_bad_rate(labels: pd.DataFrame, mask: np.ndarray, t: int) -> float:
    label = labels[f"default_{t}"].to_numpy()[np.asarray(mask)]
    label = label[label != UNOBSERVABLE]
    if label.size == 0:
        return float("nan")
    return float(np.mean(label == BAD))


def flow_rate_series(txn: pd.DataFrame, i: int, j: int) -> pd.DataFrame:
    """Empirical share of state-i accounts moving to state j one month
    later, per month.  The move into a terminal row counts; terminal rows
    themselves make no further transition."""
    if not (0 <= i <= 6 and 0 <= j <= 7):
        raise ValueError("states must satisfy 0 <= i <= 6 and 0 <= j <= 7")
    order = observation_order(txn)
    ids = txn["app_id"].to_numpy()[order]
    dues = txn["n_due"].to_numpy()[order]
    month = txn["t_cur"].to_numpy()[order]
    has_next = np.zeros(ids.size, dtype=bool)
    if ids.size > 1:
        has_next[:-1] = ids[1:] == ids[:-1]
    from_i = has_next & (dues == i)
    to_j = np.zeros(ids.size, dtype=bool)
    to_j[:-1] = dues[1:] == j
    frame = pd.DataFrame({"month": month[from_i], "hit": to_j[from_i]})
    grouped = frame.groupby("month")["hit"]
    out = pd.DataFrame(
        {"month": grouped.size().index, "n": grouped.size().to_numpy(), "rate": grouped.mean().to_numpy()}
    )
    return out.reset_index(drop=True)


def vintage_table(txn: pd.DataFrame) -> pd.DataFrame:
    """Cohort (application month) by months-on-book share of accounts that
    have already terminated bad.  Cumulative along each cohort row."""
    order = observation_order(txn)
    ids = txn["app_id"].to_numpy()[order]
    status = txn["status"].to_numpy()[order]
    t_app = txn["t_app"].to_numpy()[order]
    seniority = (txn["t_cur"].to_numpy() - txn["t_app"].to_numpy() + 1)[order]

    first = np.zeros(ids.size, dtype=bool)
    if ids.size:
        first[0] = True
        first[1:] = ids[1:] != ids[:-1]
    cohort_sizes = pd.Series(t_app[first]).value_counts().sort_index()

    is_bad_row = status == STATUS_BAD
    bad_events = pd.DataFrame({"cohort": t_app[is_bad_row], "s": seniority[is_bad_row]})
    max_s = int(seniority.max()) if seniority.size else 0
    records = []
    for cohort, size in cohort_sizes.items():
        events = bad_events[bad_events["cohort"] == cohort]["s"].value_counts().sort_index()
        cumulative = events.reindex(range(1, max_s + 1), fill_value=0).cumsum()
        for s in range(1, max_s + 1):
            records.append(
                {
                    "t_app": int(cohort),
                    "months_on_book": s,
                    "n_accounts": int(size),
                    "ever_bad_share": float(cumulative[s] / size),
                }
            )
    return pd.DataFrame(records)


# --- binning and Gini --------------------------------------------------------


@dataclass(frozen=True)
class BinDef:
    """One attribute of a binned characteristic."""

    label: str
    condition: str
    mask: np.ndarray


def income_threshold_bins(income: np.ndarray, cut: float = 1800.0) -> list[BinDef]:
    income = np.asarray(income)
    return [
        BinDef("1", f"income < {cut:g}", income < cut),
        BinDef("2", f"income >= {cut:g}", income >= cut),
    ]


def delinquency_history_bins(
    beh_n_due_6: np.ndarray, seniority: np.ndarray, months: int = 6
) -> list[BinDef]:
    beh = np.asarray(beh_n_due_6)
    sen = np.asarray(seniority)
    young = sen < months
    recent = (beh > 0) & (sen >= months)
    return [
        BinDef("1", f"seniority < {months}", young),
        BinDef("2", f"beh_n_due_{months} > 0 and seniority >= {months}", recent),
        BinDef("3", "otherwise", ~(young | recent)),
    ]


def gini_from_bins(bad_counts: np.ndarray, good_counts: np.ndarray) -> float:
    """Accuracy ratio of the binned characteristic against the Good/Bad
    outcome: bins ordered by ascending bad rate, ties split (2*AUC - 1)."""
    bad = np.asarray(bad_counts, dtype=np.float64)
    good = np.asarray(good_counts, dtype=np.float64)
    total_bad, total_good = bad.sum(), good.sum()
    if total_bad == 0 or total_good == 0:
        return 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        rate = np.where(bad + good > 0, bad / (bad + good), 0.0)
    order = np.argsort(rate, kind="stable")
    bad, good = bad[order], good[order]
    goods_below = np.concatenate(([0.0], np.cumsum(good)[:-1]))
    auc = float(np.sum(bad * (goods_below + good / 2.0)) / (total_bad * total_good))
    return 2.0 * auc - 1.0


def gini_continuous(values: np.ndarray, is_bad: np.ndarray, is_good: np.ndarray) -> float:
    """Unbinned accuracy ratio |2*AUC - 1| using the raw variable as the
    score (ties averaged)."""
    values = np.asarray(values, dtype=np.float64)
    is_bad = np.asarray(is_bad, dtype=bool)
    is_good = np.asarray(is_good, dtype=bool)
    keep = is_bad | is_good
    values, is_bad = values[keep], is_bad[keep]
    n_bad = int(is_bad.sum())
    n_good = values.size - n_bad
    if n_bad == 0 or n_good == 0:
        return 0.0
    ranks = pd.Series(values).rank(method="average").to_numpy()
    auc = (ranks[is_bad].sum() - n_bad * (n_bad + 1) / 2.0) / (n_bad * n_good)
    return abs(2.0 * auc - 1.0)


def binning_report(
    labels_t: np.ndarray,
    bins: list[BinDef],
    population_mask: np.ndarray | None = None,
) -> pd.DataFrame:
    """Per-attribute bad rate and population share over labeled rows.

    The bins must partition the population (after dropping Unobservable
    rows).  Bad rates keep Indeterminate in the denominator; the Gini
    column is the binned accuracy ratio over Good/Bad rows only, repeated
    on every attribute row of the characteristic.
    """
    labels_t = np.asarray(labels_t)
    base = labels_t != UNOBSERVABLE
    if population_mask is not None:
        base &= np.asarray(population_mask)
    coverage = np.zeros(labels_t.size, dtype=np.int64)
    for b in bins:
        if b.mask.shape != labels_t.shape:
            raise ValueError(f"bin {b.label!r} mask has wrong shape")
        coverage += (b.mask & base).astype(np.int64)
    if np.any(coverage[base] != 1):
        raise ValueError("bin rules must partition the population exactly")

    total = int(base.sum())
    bad_counts, good_counts, rows = [], [], []
    for b in bins:
        sel = labels_t[b.mask & base]
        n = sel.size
        n_bad = int(np.sum(sel == BAD))
        n_good = int(np.sum(sel == GOOD))
        bad_counts.append(n_bad)
        good_counts.append(n_good)
        rows.append(
            {
                "attribute": b.label,
                "condition": b.condition,
                "n": n,
                "bad_rate": n_bad / n if n else np.nan,
                "population_share": n / total if total else np.nan,
            }
        )
    report = pd.DataFrame(rows)
    report["gini"] = gini_from_bins(np.array(bad_counts), np.array(good_counts))
    return report


# --- report files -------------------------------------------------------------

REPORT_GROUPS = ("bad_rates", "flow_rates", "vintage", "binning")


def write_reports(
    txn: pd.DataFrame,
    production: pd.DataFrame,
    abt_frame: pd.DataFrame,
    layout: Layout,
    out_dir,
    case_label: str = "custom",
    groups: tuple[str, ...] = REPORT_GROUPS,
) -> list[str]:
    """Write the standard report files into out_dir/reports.

    bad_rates_<portfolio>_<t>.csv   per-month Bad shares per sub-portfolio
    flow_rate_<i><j>.csv            adjacent worsening flow rates
    vintage.csv                     cohort x months-on-book ever-bad shares
    binning_<case>.csv              income and delinquency-history binning
                                    with Gini over the behavioral portfolio
    """
    from pathlib import Path

    unknown = set(groups) - set(REPORT_GROUPS)
    if unknown:
        raise ValueError(f"unknown report groups {sorted(unknown)}")
    reports_dir = Path(out_dir) / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    needs_labels = {"bad_rates", "binning"} & set(groups)
    labels = attach_labels(txn) if needs_labels else None
    tags = tag_portfolios(txn) if needs_labels else None

    if "bad_rates" in groups:
        for portfolio in PORTFOLIOS:
            for t in OUTCOME_WINDOWS:
                series = bad_rate_series(txn, labels, tags, portfolio, t, layout)
                series.insert(1, "month", [layout.calendar_str(int(m)) for m in series["t_obs"]])
                path = reports_dir / f"bad_rates_{portfolio}_{t}.csv"
                series.to_csv(path, index=False, na_rep="")
                written.append(str(path))

    if "flow_rates" in groups:
        for i in range(7):
            j = i + 1
            series = flow_rate_series(txn, i, j)
            series.insert(1, "calendar", [layout.calendar_str(int(m)) for m in series["month"]])
            path = reports_dir / f"flow_rate_{i}{j}.csv"
            series.to_csv(path, index=False, na_rep="")
            written.append(str(path))

    if "vintage" in groups:
        path = reports_dir / "vintage.csv"
        vintage_table(txn).to_csv(path, index=False, na_rep="")
        written.append(str(path))

    if "binning" in groups:
        frame = binning_frame(txn, production, abt_frame, labels, tags)
        path = reports_dir / f"binning_{case_label}.csv"
        frame.to_csv(path, index=False, na_rep="")
        written.append(str(path))
    return written


def binning_frame(
    txn: pd.DataFrame,
    production: pd.DataFrame,
    abt_frame: pd.DataFrame,
    labels: pd.DataFrame,
    tags: pd.DataFrame,
    t: int = 9,
) -> pd.DataFrame:
    """The two case-study binning tables over the behavioral portfolio.

    Pools every behavioral-portfolio account-month with a computable
    outcome label; membership needs feature rows, so terminal months
    (which carry no features) drop out.
    """
    obs = txn[["app_id", "t_app", "t_cur"]].copy()
    obs["label"] = labels[f"default_{t}"].to_numpy()
    obs["beh"] = tags["BEH"].to_numpy()
    obs = obs.merge(production[["app_id", "income"]], on="app_id", how="left")
    obs = obs.merge(
        abt_frame[["app_id", "t_cur", "beh_n_due_6"]], on=["app_id", "t_cur"], how="left"
    )
    obs = obs[obs["beh"] & obs["beh_n_due_6"].notna()]
    label = obs["label"].to_numpy()
    income = obs["income"].to_numpy()
    seniority = (obs["t_cur"] - obs["t_app"] + 1).to_numpy()
    beh6 = obs["beh_n_due_6"].to_numpy()

    pieces = []
    for characteristic, bins, values in (
        ("beh_n_due_6", delinquency_history_bins(beh6, seniority), beh6),
        ("income", income_threshold_bins(income), income),
    ):
        piece = binning_report(label, bins)
        piece.insert(0, "characteristic", characteristic)
        piece["gini_continuous"] = gini_continuous(values, label == BAD, label == GOOD)
        pieces.append(piece)
    return pd.concat(pieces, ignore_index=True)
