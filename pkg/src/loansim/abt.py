"""Analytical base table: actual-state and trailing-window behavioral
features for every active account-month, plus score standardization.

Behavioral windows cover the current month and the preceding months.
Availability is checked per series: the payment-day mean needs every
element of the window (any missed payment voids it), while the
due-installment mean only needs the account to be as old as the window.
An unavailable series is imputed to its fixed constant (days 15, due
installments 2); accounts younger than the window impute both.
"""

from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from .config import (
    ALL_VARIABLES,
    BEHAVIORAL_WINDOWS,
    Layout,
    LayoutError,
    LinearRule,
    PredicateRule,
    ScoreTerm,
    ScoringSpec,
)

BEH_DAYS_IMPUTED = 15.0
BEH_N_DUE_IMPUTED = 2.0

# Months with a missed payment carry no payment day; scores treat them at
# the neutral mid-month value, consistent with the behavioral imputation.
SCORING_DAYS_FILL = 15.0

HISTORY_MONTHS = max(BEHAVIORAL_WINDOWS)

# Variables that never change over an account's life; their score
# contribution can be computed once at insertion.
ACCOUNT_CONSTANT_VARIABLES = frozenset(
    {
        "income",
        "spending",
        "installment",
        "n_installments",
        "loan_amount",
        "act_capacity",
        "act_loaninc",
        "nom_1",
        "nom_2",
        "nom_3",
        "nom_4",
        "int_1",
        "int_2",
        "int_3",
        "int_4",
    }
)
MONTHLY_VARIABLES = frozenset(ALL_VARIABLES) - ACCOUNT_CONSTANT_VARIABLES

ABT_FEATURES = (
    "act_days",
    "act_n_paid",
    "act_n_due",
    "act_utl",
    "act_dueutl",
    "act_age",
    "act_capacity",
    "act_dueinc",
    "act_loaninc",
    "act_seniority",
) + tuple(f"beh_{kind}_{t}" for t in BEHAVIORAL_WINDOWS for kind in ("days", "n_due"))


def actuals(application, transaction, layout: Layout) -> dict[str, float | None]:
    """Actual-state features for one account-month.

    `application` needs the production fields, `transaction` the
    account-month fields (t_cur, n_due, n_paid, pay_days with None for a
    missed payment).
    """
    if transaction.t_cur < application.t_app:
        raise ValueError("transaction month precedes the application month")
    pay_days = transaction.pay_days
    anchor = layout.anchor_date(transaction.t_cur).toordinal()
    days_per_year = layout.distributions.applicant.days_per_year
    return {
        "act_days": None if pay_days is None else float(pay_days) + 15.0,
        "act_n_paid": float(transaction.n_paid),
        "act_n_due": float(transaction.n_due),
        "act_utl": transaction.n_paid / application.n_installments,
        "act_dueutl": transaction.n_due / application.n_installments,
        "act_age": (anchor - application.birth.toordinal()) / days_per_year,
        "act_capacity": (application.installment + application.spending) / application.income,
        "act_dueinc": transaction.n_due * application.installment / application.income,
        "act_loaninc": application.loan_amount / application.income,
        "act_seniority": float(transaction.t_cur - application.t_app + 1),
    }


def behavioral(days_series, due_series, t: int) -> tuple[float, float]:
    """Trailing t-month means of (act_days, act_n_due), index 0 = current.

    Each mean needs every element of its own series: a missed payment day
    imputes the days mean, a series shorter than t (account younger than
    the window) imputes both.
    """
    if t not in BEHAVIORAL_WINDOWS:
        raise ValueError(f"window must be one of {BEHAVIORAL_WINDOWS}, got {t}")

    def clean(series):
        return [
            None if v is None or (isinstance(v, float) and np.isnan(v)) else float(v)
            for v in series[:t]
        ]

    days = clean(days_series)
    due = clean(due_series)
    if len(days) < t or len(due) < t or any(v is None for v in due):
        return BEH_DAYS_IMPUTED, BEH_N_DUE_IMPUTED
    beh_days = BEH_DAYS_IMPUTED if any(v is None for v in days) else float(np.mean(days))
    return beh_days, float(np.mean(due))


def behavioral_features(
    days_hist: np.ndarray, due_hist: np.ndarray, seniority: np.ndarray
) -> dict[str, np.ndarray]:
    """Vectorized behavioral windows over (n, 12) history matrices.

    Column 0 is the current month; entries are NaN for months before the
    account existed and for missed payments (days only).
    """
    out: dict[str, np.ndarray] = {}
    for t in BEHAVIORAL_WINDOWS:
        window_days = days_hist[:, :t]
        window_due = due_hist[:, :t]
        old_enough = seniority >= t
        days_ok = old_enough & ~np.isnan(window_days).any(axis=1)
        with np.errstate(invalid="ignore"):
            out[f"beh_days_{t}"] = np.where(
                days_ok, window_days.mean(axis=1), BEH_DAYS_IMPUTED
            )
            out[f"beh_n_due_{t}"] = np.where(
                old_enough, window_due.mean(axis=1), BEH_N_DUE_IMPUTED
            )
    return out


def resolve_variable(values: Mapping[str, Any], variable: str):
    if variable not in ALL_VARIABLES:
        raise LayoutError(f"unknown score variable {variable!r}")
    try:
        return values[variable]
    except KeyError as exc:
        raise LayoutError(f"score variable {variable!r} not resolvable from record") from exc


def standardize(values: Mapping[str, Any], spec: ScoringSpec, eps: float) -> np.ndarray:
    """Standardized term values (x - mu) / sigma in term order, with the
    noise term (a standard-normal draw divided by noise_sigma) last.
    Betas are not applied here."""
    out = np.empty(len(spec.terms) + 1)
    for k, term in enumerate(spec.terms):
        out[k] = (float(resolve_variable(values, term.variable)) - term.mu) / term.sigma
    out[-1] = eps / spec.noise_sigma
    return out


def score_from_terms(terms: tuple[ScoreTerm, ...], values: Mapping[str, Any]):
    """Sum of beta * (x - mu) / sigma; works on scalars or column arrays."""
    total = 0.0
    for term in terms:
        total = total + term.beta * (
            (np.asarray(resolve_variable(values, term.variable), dtype=np.float64) - term.mu)
            / term.sigma
        )
    return total


def score_main(values: Mapping[str, Any], spec: ScoringSpec, eps):
    """The full main score: standardized terms times betas, plus the
    standardized noise term and the intercept.

    The noise draw is a standard normal treated like any other term
    (mu 0, sigma noise_sigma), so its score contribution has standard
    deviation noise_beta / noise_sigma.
    """
    return (
        score_from_terms(spec.terms, values)
        + spec.noise_beta * np.asarray(eps) / spec.noise_sigma
        + spec.intercept
    )


_OPS = {
    "<": np.less,
    "<=": np.less_equal,
    ">": np.greater,
    ">=": np.greater_equal,
    "==": np.equal,
    "!=": np.not_equal,
}


def evaluate_cycle(values: Mapping[str, Any], rule, eps=0.0):
    """Whether the crisis adjustment applies; vectorized over column arrays.

    Predicate rules AND their clauses; linear rules adjust when the cycle
    score is <= the cutoff.
    """
    if isinstance(rule, PredicateRule):
        result = True
        for clause in rule.clauses:
            col = np.asarray(resolve_variable(values, clause.variable), dtype=np.float64)
            result = result & _OPS[clause.op](col, clause.value)
        return result
    if isinstance(rule, LinearRule):
        score = (
            score_from_terms(rule.terms, values)
            + rule.noise_beta * np.asarray(eps) / rule.noise_sigma
            + rule.intercept
        )
        return score <= rule.cutoff
    raise LayoutError(f"unknown cycle rule type {type(rule).__name__}")
