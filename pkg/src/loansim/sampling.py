"""Deterministic, key-addressable random number streams and the sampling
distributions for applicants, volumes, payment days, and the macro cycle.

Every draw is a pure function of (seed, purpose tag, entity id, draw
counter), so identical layouts produce bit-identical datasets regardless of
worker count or evaluation order.  The core is a splitmix64 sequence seeded
by an avalanche-mixed key; normals come from the inverse normal CDF, so all
draws are reproducible in bulk (vectorized) or one at a time with equal
results.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .config import (
    ApplicantParams,
    Layout,
    MacroParams,
    PayDaysParams,
    VolumeParams,
)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_MIX_B = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 2.0**-53

# Purpose tags.  Each logical quantity draws from its own stream.
TAG_APPLICATION_COUNT = "application-count"
TAG_MACRO = "macro-cycle"
TAG_AGE = "applicant-age"
TAG_INCOME = "applicant-income"
TAG_INSTALLMENT = "applicant-installment"
TAG_SPENDING = "applicant-spending"
TAG_N_INSTALLMENTS = "applicant-n-installments"
TAG_NOMINAL = ("applicant-nom-1", "applicant-nom-2", "applicant-nom-3", "applicant-nom-4")
TAG_INTERVAL = ("applicant-int-1", "applicant-int-2", "applicant-int-3", "applicant-int-4")
TAG_PAY_DAYS = "pay-days"
TAG_SCORE_NOISE = "score-noise"
TAG_CYCLE_NOISE = "cycle-noise"


def mix64(x):
    """splitmix64 finalizer: a 64-bit avalanche bijection.

    Accepts scalars or uint64 arrays; wraps modulo 2**64.
    """
    with np.errstate(over="ignore"):
        z = np.asarray(x, dtype=np.uint64)
        z = (z ^ (z >> np.uint64(30))) * _MIX_A
        z = (z ^ (z >> np.uint64(27))) * _MIX_B
        z = z ^ (z >> np.uint64(31))
    return z


def tag_hash(tag: str) -> np.uint64:
    return np.uint64(
        int.from_bytes(hashlib.blake2b(tag.encode(), digest_size=8).digest(), "little")
    )


def stream_key(seed: int, tag: str, entity) -> np.ndarray | np.uint64:
    """Derive the stream key for (seed, tag, entity); entity may be an array."""
    h = mix64(np.uint64(seed))
    h = mix64(h ^ tag_hash(tag))
    return mix64(h ^ np.asarray(entity, dtype=np.uint64))


def raw_draw(key, counter):
    """counter-th 64-bit output of the stream with the given key."""
    with np.errstate(over="ignore"):
        c = np.asarray(counter, dtype=np.uint64) + np.uint64(1)
        state = np.asarray(key, dtype=np.uint64) + c * _GOLDEN
    return mix64(state)


def _to_unit(bits) -> np.ndarray:
    # 53-bit mantissa, offset half a step: strictly inside (0, 1).
    return ((np.asarray(bits) >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53


def uniform_at(seed: int, tag: str, entity, counter) -> np.ndarray:
    """Uniform draw(s) in the open interval (0, 1)."""
    return _to_unit(raw_draw(stream_key(seed, tag, entity), counter))


def normal_at(seed: int, tag: str, entity, counter) -> np.ndarray:
    """Standard normal draw(s) via the inverse CDF."""
    return ndtri(uniform_at(seed, tag, entity, counter))


@dataclass
class RandomStream:
    """Sequential view of one keyed stream; draws advance an internal counter.

    Identical (seed, tag, entity) always replay the identical sequence.
    """

    seed: int
    tag: str
    entity: int = 0
    counter: int = 0
    _key: np.uint64 = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._key = stream_key(self.seed, self.tag, self.entity)

    def _next_bits(self) -> np.uint64:
        bits = raw_draw(self._key, self.counter)
        self.counter += 1
        return bits

    def uniform(self) -> float:
        """One uniform in the open interval (0, 1)."""
        return float(_to_unit(self._next_bits()))

    def std_normal(self) -> float:
        return float(ndtri(_to_unit(self._next_bits())))


# --- volumes ------------------------------------------------------------------


def applications_count_from_noise(
    z: float, *, december: bool, scale: float, params: VolumeParams
) -> int:
    """Monthly application volume for a given noise value."""
    raw = params.base_daily * params.days_per_month * (1.0 + z / params.noise_divisor)
    if december:
        raw *= params.december_factor
    return max(int(np.floor(raw * scale + 0.5)), 0)


def sample_applications_count(month: int, layout: Layout) -> int:
    z = float(normal_at(layout.seed, TAG_APPLICATION_COUNT, month, 0))
    return applications_count_from_noise(
        z,
        december=layout.is_december(month),
        scale=layout.volume_scale,
        params=layout.distributions.volume,
    )


# --- applicants ---------------------------------------------------------------


def _trunc_int(x) -> np.ndarray:
    """int(): truncation toward zero."""
    return np.trunc(np.asarray(x, dtype=np.float64))


def applicant_fields_from_draws(
    draws: dict[str, np.ndarray], params: ApplicantParams
) -> dict[str, np.ndarray]:
    """Apply the applicant formulas to raw normal/uniform draws.

    `draws` holds arrays: z_age, u_age, z_income, z_installment, z_spending,
    z_n_inst, z_nom_1..4, u_int_1..4, all of one common length.
    """
    p = params
    age = (
        (p.age_max - p.age_min) * (draws["z_age"] + p.age_shift) / p.age_den
        + p.age_base
        + p.age_unif_span * draws["u_age"]
    )
    age = np.clip(age, p.age_min, p.age_max)
    income = (_trunc_int(p.income_scale * np.abs(draws["z_income"])) + p.income_floor).astype(
        np.int64
    )
    installment = _trunc_int(
        income * np.abs(draws["z_installment"]) / p.installment_divisor
    ).astype(np.int64)
    spending = _trunc_int(income * np.abs(draws["z_spending"]) / p.spending_divisor).astype(
        np.int64
    )
    n_inst = _trunc_int(
        p.n_inst_scale * np.abs(draws["z_n_inst"]) / p.n_inst_divisor + p.n_inst_base
    ).astype(np.int64)
    n_inst = np.maximum(n_inst, p.n_inst_min)
    out = {
        "age": age,
        "birth_offset_days": _trunc_int(age * p.days_per_year).astype(np.int64),
        "income": income,
        "installment": installment,
        "spending": spending,
        "n_installments": n_inst,
        "loan_amount": installment * n_inst,
    }
    for k in range(4):
        out[f"nom_{k + 1}"] = _trunc_int(p.nominal_scale * np.abs(draws[f"z_nom_{k + 1}"])).astype(
            np.int64
        )
        out[f"int_{k + 1}"] = p.interval_scale * draws[f"u_int_{k + 1}"]
    return out


def sample_applicants(app_ids: np.ndarray, layout: Layout) -> dict[str, np.ndarray]:
    """Draw all applicant characteristics for a vector of application ids.

    Each field uses its own purpose-tagged stream keyed by app_id, so fields
    are mutually independent and stable under any generation order.
    """
    seed = layout.seed
    draws = {
        "z_age": normal_at(seed, TAG_AGE, app_ids, 0),
        "u_age": uniform_at(seed, TAG_AGE, app_ids, 1),
        "z_income": normal_at(seed, TAG_INCOME, app_ids, 0),
        "z_installment": normal_at(seed, TAG_INSTALLMENT, app_ids, 0),
        "z_spending": normal_at(seed, TAG_SPENDING, app_ids, 0),
        "z_n_inst": normal_at(seed, TAG_N_INSTALLMENTS, app_ids, 0),
    }
    for k in range(4):
        draws[f"z_nom_{k + 1}"] = normal_at(seed, TAG_NOMINAL[k], app_ids, 0)
        draws[f"u_int_{k + 1}"] = uniform_at(seed, TAG_INTERVAL[k], app_ids, 0)
    return applicant_fields_from_draws(draws, layout.distributions.applicant)


# --- payment days -------------------------------------------------------------


def pay_days_from_draws(
    z: np.ndarray, n_due_before: np.ndarray, params: PayDaysParams
) -> np.ndarray:
    """Payment-day offsets; accounts below the low-due threshold never pay
    late.  Clamped to [-day_limit, day_limit]."""
    p = params
    low = np.asarray(n_due_before) < p.low_due_threshold
    z = np.asarray(z, dtype=np.float64)
    value = np.where(
        low,
        -_trunc_int(p.day_limit * np.abs(z) / p.divisor),
        _trunc_int(p.day_limit * z / p.divisor),
    )
    return np.clip(value, -p.day_limit, p.day_limit).astype(np.int64)


def sample_pay_days(
    app_ids: np.ndarray, n_due_before: np.ndarray, month: int, layout: Layout
) -> np.ndarray:
    """One payment-day draw per account for the given month (counter =
    month index, so replays are order-independent)."""
    z = normal_at(layout.seed, TAG_PAY_DAYS, app_ids, month)
    return pay_days_from_draws(z, n_due_before, layout.distributions.pay_days)


# --- macro cycle --------------------------------------------------------------


def macro_e_from_noise(z: float, month: int, layout: Layout) -> float:
    """The cyclic macro variable for one month, clamped to stay strictly
    inside (e_min, e_max)."""
    p: MacroParams = layout.macro
    m = month - layout.t_start
    value = p.base + p.amplitude * (
        p.level + np.sin(p.frequency * np.pi * m / layout.horizon) + p.noise_scale * z
    )
    lo = np.nextafter(p.e_min, np.inf)
    hi = np.nextafter(p.e_max, -np.inf)
    return float(min(max(value, lo), hi))


def macro_e(month: int, layout: Layout) -> float:
    """Macro value for a month; one noise draw per month, keyed by the month
    index so every account in the month sees the same value."""
    z = float(normal_at(layout.seed, TAG_MACRO, month, 0))
    return macro_e_from_noise(z, month, layout)


def macro_series(layout: Layout) -> np.ndarray:
    """E(m) for every month of the horizon (index 0 = t_start)."""
    return np.array([macro_e(m, layout) for m in layout.months])


def score_noise(app_ids: np.ndarray, month: int, layout: Layout) -> np.ndarray:
    """Standard-normal score noise, one draw per (account, month)."""
    return normal_at(layout.seed, TAG_SCORE_NOISE, app_ids, month)


def cycle_noise(app_ids: np.ndarray, month: int, layout: Layout) -> np.ndarray:
    """Independent noise for linear crisis-selection rules."""
    return normal_at(layout.seed, TAG_CYCLE_NOISE, app_ids, month)
