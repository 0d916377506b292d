"""Monthly portfolio simulation: insert new accounts, adjust the migration
matrix by the macro cycle, segment active accounts by score, and emit the
next month of account states.

Within a month, accounts sharing (due-installment state, adjusted flag)
form one stratum governed by a single matrix row.  Accounts are ranked by
the main score (descending, ties by ascending app_id) and sliced into
groups whose sizes reproduce the row probabilities up to rounding; group g
becomes next month's due-installment count.  Group g <= current state means
a payment of (state - g + 1) installments; g = state + 1 means a missed
payment.  Accounts reaching full repayment close (C); accounts reaching
seven due installments terminate bad (B); neither continues afterwards.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import abt
from .config import Layout, LinearRule, N_COLUMNS, N_STATES
from .population import ProductionTable, generate_production
from .sampling import cycle_noise, macro_series, sample_pay_days, score_noise

STATUS_ACTIVE = 0
STATUS_CLOSED = 1
STATUS_BAD = 2
STATUS_LABELS = np.array(["A", "C", "B"])
BAD_STATE = N_COLUMNS - 1  # seven due installments terminates the account

TRANSACTION_COLUMNS = ("app_id", "t_app", "t_cur", "n_due", "n_paid", "status", "pay_days")
ABT_COLUMNS = ("app_id", "t_cur") + abt.ABT_FEATURES


class InternalConsistencyError(RuntimeError):
    """The engine detected a broken structural invariant."""


@dataclass(frozen=True)
class TransactionRecord:
    """One account-month row."""

    app_id: int
    t_app: int
    t_cur: int
    n_due: int
    n_paid: int
    status: str
    pay_days: int | None


def transaction_records(batch: dict[str, np.ndarray]) -> list[TransactionRecord]:
    """Record view of a column batch (test and inspection helper)."""
    pay = batch["pay_days"]
    return [
        TransactionRecord(
            app_id=int(batch["app_id"][r]),
            t_app=int(batch["t_app"][r]),
            t_cur=int(batch["t_cur"][r]),
            n_due=int(batch["n_due"][r]),
            n_paid=int(batch["n_paid"][r]),
            status=str(STATUS_LABELS[batch["status"][r]]),
            pay_days=None if np.isnan(pay[r]) else int(pay[r]),
        )
        for r in range(batch["app_id"].size)
    ]


# --- matrix adjustment ----------------------------------------------------


def adjust_row(row: np.ndarray, i: int, e: float) -> np.ndarray:
    """Crisis-adjusted matrix row: probability mass (1-e) is kept on
    states j <= i and the removed mass reappears at j = i+1; entries
    beyond i+1 are unchanged."""
    row = np.asarray(row, dtype=np.float64)
    out = row.copy()
    out[: i + 1] = row[: i + 1] * (1.0 - e)
    out[i + 1] = row[i + 1] + e * row[: i + 1].sum()
    return out


def adjust_matrix(matrix: np.ndarray, e: float) -> np.ndarray:
    """All rows adjusted for one month's macro value."""
    return np.stack([adjust_row(matrix[i], i, e) for i in range(N_STATES)])


# --- segmentation -----------------------------------------------------------


def group_boundaries(probabilities: np.ndarray, n: int) -> np.ndarray:
    """Cumulative rank boundaries: group g covers sorted ranks
    [b[g-1], b[g]).  Nearest-integer rounding (half away from zero) on the
    cumulative shares; the final boundary is pinned to n."""
    cum = np.cumsum(np.asarray(probabilities, dtype=np.float64))
    bounds = np.floor(cum * n + 0.5).astype(np.int64)
    bounds[-1] = n
    return bounds


def segment_by_score(
    scores: np.ndarray, app_ids: np.ndarray, probabilities: np.ndarray
) -> np.ndarray:
    """Group assignment for one stratum.

    Accounts are ordered by descending score, ties broken by ascending
    app_id; zero-probability groups receive no accounts.
    """
    n = scores.size
    groups = np.empty(n, dtype=np.int64)
    if n == 0:
        return groups
    order = np.lexsort((app_ids, -np.asarray(scores, dtype=np.float64)))
    bounds = group_boundaries(probabilities, n)
    counts = np.diff(np.concatenate(([0], bounds)))
    groups[order] = np.repeat(np.arange(bounds.size), counts)
    return groups


# --- payment update ---------------------------------------------------------


def payment_update(
    n_due: np.ndarray, n_paid: np.ndarray, n_inst: np.ndarray, g: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Next (n_due, n_paid, paid_mask) after applying assigned groups.

    Payment happens when g <= current state and settles (state - g + 1)
    installments, capped at the loan size; g = state + 1 pays nothing.
    """
    g = np.asarray(g)
    if np.any(g > n_due + 1):
        raise InternalConsistencyError("group assignment beyond state + 1")
    paid = g <= n_due
    next_paid = np.where(paid, np.minimum(n_paid + n_due - g + 1, n_inst), n_paid)
    return g.astype(n_due.dtype), next_paid.astype(n_paid.dtype), paid


def status_after(n_due: np.ndarray, n_paid: np.ndarray, n_inst: np.ndarray) -> np.ndarray:
    closed = n_paid == n_inst
    bad = n_due == BAD_STATE
    return np.where(closed, STATUS_CLOSED, np.where(bad, STATUS_BAD, STATUS_ACTIVE)).astype(
        np.int8
    )


# --- run orchestration -------------------------------------------------------


@dataclass
class RunSinks:
    """Streaming consumers of per-month column batches."""

    production: Callable[[dict[str, np.ndarray]], None] | None = None
    transactions: Callable[[dict[str, np.ndarray]], None] | None = None
    abt: Callable[[dict[str, np.ndarray]], None] | None = None


@dataclass(frozen=True)
class StratumStat:
    """Governing row and realized group counts for one (month, state,
    adjusted) stratum."""

    month: int
    state: int
    adjusted: bool
    size: int
    group_counts: tuple[int, ...]
    row: tuple[float, ...]


@dataclass
class RunResult:
    layout: Layout
    macro: np.ndarray
    production_rows: int = 0
    transaction_rows: int = 0
    abt_rows: int = 0
    stratum_stats: list[StratumStat] = field(default_factory=list)
    transaction_batches: list[dict[str, np.ndarray]] | None = None
    abt_batches: list[dict[str, np.ndarray]] | None = None
    production: ProductionTable | None = None

    def transactions_frame(self):
        import pandas as pd

        if self.transaction_batches is None:
            raise ValueError("run was not collected; pass collect=True")
        return pd.DataFrame(
            {
                name: np.concatenate([b[name] for b in self.transaction_batches])
                for name in TRANSACTION_COLUMNS
            }
        )

    def abt_frame(self):
        import pandas as pd

        if self.abt_batches is None:
            raise ValueError("run was not collected; pass collect=True")
        return pd.DataFrame(
            {name: np.concatenate([b[name] for b in self.abt_batches]) for name in ABT_COLUMNS}
        )


class _State:
    """Dense, app_id-sorted arrays for all currently active accounts."""

    ARRAY_FIELDS = (
        "ids",
        "t_app",
        "n_due",
        "n_paid",
        "n_inst",
        "income",
        "installment",
        "spending",
        "amount",
        "birth_ord",
        "const_score",
        "pay_days",
    )

    def __init__(self):
        self.ids = np.empty(0, dtype=np.int64)
        self.t_app = np.empty(0, dtype=np.int64)
        self.n_due = np.empty(0, dtype=np.int64)
        self.n_paid = np.empty(0, dtype=np.int64)
        self.n_inst = np.empty(0, dtype=np.int64)
        self.income = np.empty(0, dtype=np.int64)
        self.installment = np.empty(0, dtype=np.int64)
        self.spending = np.empty(0, dtype=np.int64)
        self.amount = np.empty(0, dtype=np.int64)
        self.birth_ord = np.empty(0, dtype=np.int64)
        self.const_score = np.empty(0, dtype=np.float64)
        self.pay_days = np.empty(0, dtype=np.float64)
        self.nom = np.empty((0, 4), dtype=np.int64)
        self.intv = np.empty((0, 4), dtype=np.float64)
        self.days_hist = np.empty((0, abt.HISTORY_MONTHS), dtype=np.float64)
        self.due_hist = np.empty((0, abt.HISTORY_MONTHS), dtype=np.float64)

    def __len__(self) -> int:
        return self.ids.size

    def append_new(self, prod: ProductionTable, sl: slice, const_score: np.ndarray) -> None:
        c = prod.columns
        n = sl.stop - sl.start
        if n == 0:
            return
        new_ids = c["app_id"][sl]
        if self.ids.size and new_ids.min() <= self.ids.max():
            raise InternalConsistencyError("duplicate app_id entering the active set")
        zeros = np.zeros(n, dtype=np.int64)
        self.ids = np.concatenate([self.ids, new_ids])
        self.t_app = np.concatenate([self.t_app, c["t_app"][sl]])
        self.n_due = np.concatenate([self.n_due, zeros])
        self.n_paid = np.concatenate([self.n_paid, zeros])
        self.n_inst = np.concatenate([self.n_inst, c["n_installments"][sl]])
        self.income = np.concatenate([self.income, c["income"][sl]])
        self.installment = np.concatenate([self.installment, c["installment"][sl]])
        self.spending = np.concatenate([self.spending, c["spending"][sl]])
        self.amount = np.concatenate([self.amount, c["loan_amount"][sl]])
        self.birth_ord = np.concatenate([self.birth_ord, c["birth_ordinal"][sl]])
        self.const_score = np.concatenate([self.const_score, const_score])
        self.pay_days = np.concatenate([self.pay_days, np.zeros(n, dtype=np.float64)])
        self.nom = np.concatenate(
            [self.nom, np.column_stack([c[f"nom_{k}"][sl] for k in range(1, 5)])]
        )
        self.intv = np.concatenate(
            [self.intv, np.column_stack([c[f"int_{k}"][sl] for k in range(1, 5)])]
        )
        pad = np.full((n, abt.HISTORY_MONTHS), np.nan)
        self.days_hist = np.concatenate([self.days_hist, pad])
        self.due_hist = np.concatenate([self.due_hist, pad.copy()])

    def keep(self, mask: np.ndarray) -> None:
        for name in self.ARRAY_FIELDS:
            setattr(self, name, getattr(self, name)[mask])
        self.nom = self.nom[mask]
        self.intv = self.intv[mask]
        self.days_hist = self.days_hist[mask]
        self.due_hist = self.due_hist[mask]

    def push_history(self) -> None:
        """Shift the trailing windows one month and fill the current one."""
        self.days_hist[:, 1:] = self.days_hist[:, :-1]
        self.due_hist[:, 1:] = self.due_hist[:, :-1]
        self.days_hist[:, 0] = self.pay_days + 15.0
        self.due_hist[:, 0] = self.n_due


def constant_score_part(prod: ProductionTable, sl: slice, layout: Layout) -> np.ndarray:
    """Score contribution of account-constant variables plus the intercept."""
    c = prod.columns
    values = {
        "income": c["income"][sl],
        "spending": c["spending"][sl],
        "installment": c["installment"][sl],
        "n_installments": c["n_installments"][sl],
        "loan_amount": c["loan_amount"][sl],
        "act_capacity": (c["installment"][sl] + c["spending"][sl]) / c["income"][sl],
        "act_loaninc": c["loan_amount"][sl] / c["income"][sl],
    }
    for k in range(1, 5):
        values[f"nom_{k}"] = c[f"nom_{k}"][sl]
        values[f"int_{k}"] = c[f"int_{k}"][sl]
    spec = layout.scoring_main
    const_terms = tuple(t for t in spec.terms if t.variable in abt.ACCOUNT_CONSTANT_VARIABLES)
    return np.asarray(
        abt.score_from_terms(const_terms, values) + spec.intercept, dtype=np.float64
    ) * np.ones(sl.stop - sl.start)


def _month_values(state: _State, month: int, layout: Layout) -> dict[str, np.ndarray]:
    """All score variables for the active set at one month.

    act_days is the scoring view: missed payments filled at the neutral
    mid-month value.  The raw (NaN) version is published separately.
    """
    anchor = layout.anchor_date(month).toordinal()
    days_per_year = layout.distributions.applicant.days_per_year
    act_days_raw = state.pay_days + 15.0
    seniority = (month - state.t_app + 1).astype(np.float64)
    values: dict[str, np.ndarray] = {
        "income": state.income,
        "spending": state.spending,
        "installment": state.installment,
        "n_installments": state.n_inst,
        "loan_amount": state.amount,
        "act_days_raw": act_days_raw,
        "act_days": np.where(np.isnan(act_days_raw), abt.SCORING_DAYS_FILL, act_days_raw),
        "act_n_paid": state.n_paid.astype(np.float64),
        "act_n_due": state.n_due.astype(np.float64),
        "act_utl": state.n_paid / state.n_inst,
        "act_dueutl": state.n_due / state.n_inst,
        "act_age": (anchor - state.birth_ord) / days_per_year,
        "act_capacity": (state.installment + state.spending) / state.income,
        "act_dueinc": state.n_due * state.installment / state.income,
        "act_loaninc": state.amount / state.income,
        "act_seniority": seniority,
    }
    for k in range(1, 5):
        values[f"nom_{k}"] = state.nom[:, k - 1]
        values[f"int_{k}"] = state.intv[:, k - 1]
    values.update(abt.behavioral_features(state.days_hist, state.due_hist, seniority))
    return values


def _monthly_score(
    state: _State, values: dict[str, np.ndarray], month: int, layout: Layout
) -> np.ndarray:
    spec = layout.scoring_main
    monthly_terms = tuple(t for t in spec.terms if t.variable not in abt.ACCOUNT_CONSTANT_VARIABLES)
    eps = score_noise(state.ids, month, layout)
    return (
        state.const_score
        + abt.score_from_terms(monthly_terms, values)
        + spec.noise_beta * eps / spec.noise_sigma
    )


def _abt_batch(state: _State, values: dict[str, np.ndarray], month: int) -> dict[str, np.ndarray]:
    batch = {
        "app_id": state.ids.copy(),
        "t_cur": np.full(len(state), month, dtype=np.int64),
        "act_days": values["act_days_raw"].copy(),
    }
    for name in abt.ABT_FEATURES:
        if name != "act_days":
            batch[name] = np.asarray(values[name], dtype=np.float64).copy()
    return batch


def _transition(
    state: _State,
    values: dict[str, np.ndarray],
    month: int,
    matrix: np.ndarray,
    adjusted_matrix: np.ndarray,
    layout: Layout,
    stats: list[StratumStat],
) -> dict[str, np.ndarray]:
    """Assign groups stratum by stratum and build next month's rows."""
    n = len(state)
    score = _monthly_score(state, values, month, layout)
    eps_cycle = (
        cycle_noise(state.ids, month, layout)
        if isinstance(layout.cycle_rule, LinearRule) and layout.cycle_rule.noise_beta != 0.0
        else 0.0
    )
    adjusted = np.broadcast_to(
        np.asarray(abt.evaluate_cycle(values, layout.cycle_rule, eps_cycle)), (n,)
    )

    groups = np.empty(n, dtype=np.int64)
    for i in range(N_STATES):
        in_state = state.n_due == i
        for flag in (False, True):
            idx = np.flatnonzero(in_state & (adjusted == flag))
            if idx.size == 0:
                continue
            row = adjusted_matrix[i] if flag else matrix[i]
            g = segment_by_score(score[idx], state.ids[idx], row)
            groups[idx] = g
            counts = np.bincount(g, minlength=N_COLUMNS)
            stats.append(
                StratumStat(
                    month=month,
                    state=i,
                    adjusted=flag,
                    size=int(idx.size),
                    group_counts=tuple(int(x) for x in counts),
                    row=tuple(float(x) for x in row),
                )
            )

    next_due, next_paid, paid = payment_update(state.n_due, state.n_paid, state.n_inst, groups)
    next_pay_days = np.full(n, np.nan)
    if paid.any():
        payer_ids = state.ids[paid]
        # the early/late branch looks at the state before this payment
        next_pay_days[paid] = sample_pay_days(payer_ids, state.n_due[paid], month + 1, layout)
    status = status_after(next_due, next_paid, state.n_inst)

    batch = {
        "app_id": state.ids.copy(),
        "t_app": state.t_app.copy(),
        "t_cur": np.full(n, month + 1, dtype=np.int64),
        "n_due": next_due.copy(),
        "n_paid": next_paid.copy(),
        "status": status,
        "pay_days": next_pay_days,
    }

    survivors = status == STATUS_ACTIVE
    state.n_due = next_due
    state.n_paid = next_paid
    state.pay_days = next_pay_days
    state.keep(survivors)
    return batch


def insertion_batch(prod: ProductionTable, month: int) -> dict[str, np.ndarray]:
    """Starting rows for every application of the month: no dues, no paid
    installments, active status, payment day zero."""
    sl = prod.month_slice(month)
    n = sl.stop - sl.start
    ids = prod.columns["app_id"][sl]
    return {
        "app_id": ids.copy(),
        "t_app": prod.columns["t_app"][sl].copy(),
        "t_cur": np.full(n, month, dtype=np.int64),
        "n_due": np.zeros(n, dtype=np.int64),
        "n_paid": np.zeros(n, dtype=np.int64),
        "status": np.full(n, STATUS_ACTIVE, dtype=np.int8),
        "pay_days": np.zeros(n, dtype=np.float64),
    }


def _concat_batches(a: dict[str, np.ndarray], b: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: np.concatenate([a[k], b[k]]) for k in a}


def run_simulation(
    layout: Layout,
    production: ProductionTable | None = None,
    collect: bool = True,
    sinks: RunSinks | None = None,
    threads: int = 1,
    keep_stratum_stats: bool = True,
) -> RunResult:
    """Run the whole horizon; deterministic for a given layout.

    With collect=True the per-month transaction and feature batches are
    retained (suitable for analysis-scale runs); sinks stream batches for
    constant-memory full-scale runs.
    """
    if production is None:
        production = generate_production(layout)
    sinks = sinks or RunSinks()
    result = RunResult(layout=layout, macro=macro_series(layout), production=production)
    result.production_rows = len(production)
    if collect:
        result.transaction_batches = []
        result.abt_batches = []

    matrix = layout.migration.as_array()
    adjusted_by_month = {
        m: adjust_matrix(matrix, result.macro[m - layout.t_start]) for m in layout.months
    }
    stats = result.stratum_stats

    if sinks.production is not None:
        for month in layout.months:
            sl = production.month_slice(month)
            sinks.production({k: production.columns[k][sl] for k in production.columns})

    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        state = _State()
        pending: dict[str, np.ndarray] | None = None
        for month in layout.months:
            sl = production.month_slice(month)
            const_part = constant_score_part(production, sl, layout)
            new_rows = insertion_batch(production, month)
            state.append_new(production, sl, const_part)

            month_rows = _concat_batches(pending, new_rows) if pending is not None else new_rows
            pending = None
            result.transaction_rows += month_rows["app_id"].size
            if collect:
                result.transaction_batches.append(month_rows)
            if sinks.transactions is not None:
                sinks.transactions(month_rows)

            state.push_history()
            values = _parallel_month_values(state, month, layout, pool, threads)
            abt_rows = _abt_batch(state, values, month)
            result.abt_rows += abt_rows["app_id"].size
            if collect:
                result.abt_batches.append(abt_rows)
            if sinks.abt is not None:
                sinks.abt(abt_rows)

            if month < layout.t_end:
                pending = _transition(
                    state,
                    values,
                    month,
                    matrix,
                    adjusted_by_month[month],
                    layout,
                    stats if keep_stratum_stats else [],
                )
    finally:
        if pool is not None:
            pool.shutdown()
    if not keep_stratum_stats:
        result.stratum_stats = []
    return result


def _parallel_month_values(
    state: _State, month: int, layout: Layout, pool: ThreadPoolExecutor | None, threads: int
) -> dict[str, np.ndarray]:
    """Feature block for the month, optionally computed in slabs.

    Slab results are written into contiguous slices, so the output is
    identical for any thread count.
    """
    n = len(state)
    if pool is None or n < 4096:
        return _month_values(state, month, layout)
    chunk = -(-n // threads)
    pieces = list(
        pool.map(
            lambda lo: (lo, _month_values(_state_view(state, lo, min(lo + chunk, n)), month, layout)),
            range(0, n, chunk),
        )
    )
    out: dict[str, np.ndarray] = {}
    for key in pieces[0][1]:
        col = np.empty(n, dtype=np.asarray(pieces[0][1][key]).dtype)
        for lo, vals in pieces:
            piece = np.asarray(vals[key])
            col[lo : lo + piece.size] = piece
        out[key] = col
    return out


def _state_view(state: _State, lo: int, hi: int) -> _State:
    view = _State.__new__(_State)
    for name in _State.ARRAY_FIELDS:
        setattr(view, name, getattr(state, name)[lo:hi])
    view.nom = state.nom[lo:hi]
    view.intv = state.intv[lo:hi]
    view.days_hist = state.days_hist[lo:hi]
    view.due_hist = state.due_hist[lo:hi]
    return view
