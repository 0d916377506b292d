"""Portfolio generator configuration: the full layout of dates, migration
matrix, scoring coefficients, crisis-adjustment rule, and sampling
distributions, plus loading/validation/serialization and the two shipped
case presets.

A layout is immutable after construction and safe to share across workers.
Config documents are JSON (canonical form) or YAML; any omitted section
falls back to the built-in defaults. See README for the schema.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any

SCHEMA_VERSION = 1

# Due-installment states: rows 0..6 can still transition, column 7 is the
# terminal bad state.
N_STATES = 7
N_COLUMNS = 8

ROW_SUM_TOL = 1e-12

# Closed vocabulary of score variables, grouped by source.
APPLICATION_VARIABLES = (
    "income",
    "spending",
    "nom_1",
    "nom_2",
    "nom_3",
    "nom_4",
    "int_1",
    "int_2",
    "int_3",
    "int_4",
)
LOAN_VARIABLES = ("installment", "n_installments", "loan_amount")
ACTUAL_VARIABLES = (
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
)
BEHAVIORAL_WINDOWS = (3, 6, 9, 12)
BEHAVIORAL_VARIABLES = tuple(
    f"beh_{kind}_{t}" for kind in ("days", "n_due") for t in BEHAVIORAL_WINDOWS
)
ALL_VARIABLES = frozenset(
    APPLICATION_VARIABLES + LOAN_VARIABLES + ACTUAL_VARIABLES + BEHAVIORAL_VARIABLES
)

PREDICATE_OPS = ("<", "<=", ">", ">=", "==", "!=")


class LayoutError(ValueError):
    """A configuration document failed validation; the message names the
    violated invariant."""


@dataclass(frozen=True)
class MigrationMatrix:
    """Monthly transition probabilities between due-installment states.

    Row i gives the distribution of next-month due installments for an
    account currently i installments behind.  An account can worsen by at
    most one state per month, so entries with j > i + 1 must be zero.
    """

    rows: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "rows", tuple(tuple(float(v) for v in row) for row in self.rows)
        )

    def as_array(self):
        import numpy as np

        return np.array(self.rows, dtype=np.float64)

    def violations(self) -> list[str]:
        """All structural violations; empty iff the matrix is valid."""
        problems: list[str] = []
        if len(self.rows) != N_STATES:
            problems.append(f"matrix must have {N_STATES} rows, got {len(self.rows)}")
            return problems
        for i, row in enumerate(self.rows):
            if len(row) != N_COLUMNS:
                problems.append(f"row {i} must have {N_COLUMNS} entries, got {len(row)}")
                continue
            for j, v in enumerate(row):
                if not (0.0 <= v <= 1.0):
                    problems.append(f"row {i} column {j}: entry {v!r} outside [0, 1]")
                if j > i + 1 and v != 0.0:
                    problems.append(
                        f"row {i} column {j}: entries with j > i+1 must be zero"
                    )
            s = math.fsum(row)
            if abs(s - 1.0) > ROW_SUM_TOL:
                problems.append(f"row {i} not stochastic: sums to {s!r}")
        return problems


@dataclass(frozen=True)
class MacroParams:
    """Parameters of the cyclic macro-economic variable E(m).

    E(m) = base + amplitude * (level + sin(frequency*pi*m / horizon)
                               + noise_scale * N)
    clamped into the open interval (e_min, e_max).  One noise draw is made
    per month and shared by every account in that month.
    """

    base: float = 0.01
    amplitude: float = 0.125
    level: float = 1.5
    frequency: float = 5.0
    noise_scale: float = 0.2
    e_min: float = 0.01
    e_max: float = 0.9


@dataclass(frozen=True)
class ScoreTerm:
    """One standardized linear term: beta * (x - mu) / sigma."""

    variable: str
    mu: float
    sigma: float
    beta: float


@dataclass(frozen=True)
class ScoringSpec:
    """Linear score over standardized variables plus a noise term.

    The noise term draws one standard normal per (account, month) and is
    standardized like every other term (mu 0, sigma noise_sigma), so its
    score contribution is noise_beta * eps / noise_sigma.
    """

    terms: tuple[ScoreTerm, ...]
    noise_sigma: float = 0.02916
    noise_beta: float = 1.0
    intercept: float = 0.0

    def violations(self) -> list[str]:
        problems = []
        for k, term in enumerate(self.terms):
            if term.variable not in ALL_VARIABLES:
                problems.append(f"scoring term {k}: unknown variable {term.variable!r}")
            if not term.sigma > 0:
                problems.append(
                    f"scoring term {k} ({term.variable}): sigma must be > 0"
                )
        if not self.noise_sigma > 0:
            problems.append("scoring noise sigma must be > 0")
        return problems


@dataclass(frozen=True)
class PredicateClause:
    variable: str
    op: str
    value: float


@dataclass(frozen=True)
class PredicateRule:
    """Crisis-adjustment selector: account is adjusted iff every clause holds."""

    clauses: tuple[PredicateClause, ...]

    kind = "predicate"

    def violations(self) -> list[str]:
        problems = []
        for k, clause in enumerate(self.clauses):
            if clause.variable not in ALL_VARIABLES:
                problems.append(
                    f"cycle rule clause {k}: unknown variable {clause.variable!r}"
                )
            if clause.op not in PREDICATE_OPS:
                problems.append(f"cycle rule clause {k}: unknown operator {clause.op!r}")
        return problems


@dataclass(frozen=True)
class LinearRule:
    """Crisis-adjustment selector: account is adjusted iff its linear score
    (same standardized form as the main score) is <= cutoff."""

    terms: tuple[ScoreTerm, ...]
    cutoff: float
    noise_sigma: float = 0.02916
    noise_beta: float = 0.0
    intercept: float = 0.0

    kind = "linear"

    def violations(self) -> list[str]:
        problems = []
        for k, term in enumerate(self.terms):
            if term.variable not in ALL_VARIABLES:
                problems.append(
                    f"cycle rule term {k}: unknown variable {term.variable!r}"
                )
            if not term.sigma > 0:
                problems.append(f"cycle rule term {k} ({term.variable}): sigma must be > 0")
        if not self.noise_sigma > 0:
            problems.append("cycle rule noise sigma must be > 0")
        return problems


CycleRule = PredicateRule | LinearRule


@dataclass(frozen=True)
class VolumeParams:
    """Monthly application volume: round(base_daily * days_per_month *
    (1 + N/noise_divisor)), times december_factor in calendar December,
    times the layout volume_scale, floored at zero."""

    base_daily: float = 300.0
    days_per_month: float = 30.0
    noise_divisor: float = 20.0
    december_factor: float = 1.2


@dataclass(frozen=True)
class ApplicantParams:
    """Parameters of the applicant characteristic distributions.

    age        = (age_max-age_min)*(N+age_shift)/age_den + age_base
                 + age_unif_span*U, clamped to [age_min, age_max]
    birth      = application date minus int(age * days_per_year) days
    income     = int(income_scale*|N|) + income_floor
    installment= int(income*|N|/installment_divisor)
    spending   = int(income*|N|/spending_divisor)
    n_inst     = max(int(n_inst_scale*|N|/n_inst_divisor + n_inst_base),
                     n_inst_min)
    nom_i      = int(nominal_scale*|N|)
    int_i      = interval_scale*U
    """

    age_min: float = 18.0
    age_max: float = 75.0
    age_shift: float = 4.0
    age_den: float = 7.0
    age_base: float = 10.0
    age_unif_span: float = 20.0
    days_per_year: float = 365.5
    income_scale: float = 2375.0
    income_floor: int = 500
    installment_divisor: float = 4.0
    spending_divisor: float = 4.0
    n_inst_scale: float = 30.0
    n_inst_divisor: float = 4.0
    n_inst_base: float = 6.0
    n_inst_min: int = 6
    nominal_scale: float = 5.0
    interval_scale: float = 10.0


@dataclass(frozen=True)
class PayDaysParams:
    """Payment-day offset around the mid-month due date.

    Accounts with fewer than low_due_threshold due installments before the
    payment draw from -int(day_limit*|N|/divisor) (early or on time); others
    from int(day_limit*N/divisor).  Values are clamped to
    [-day_limit, day_limit].
    """

    day_limit: int = 15
    divisor: float = 4.0
    low_due_threshold: int = 2


@dataclass(frozen=True)
class DistParams:
    volume: VolumeParams = field(default_factory=VolumeParams)
    applicant: ApplicantParams = field(default_factory=ApplicantParams)
    pay_days: PayDaysParams = field(default_factory=PayDaysParams)


def default_migration_matrix() -> MigrationMatrix:
    return MigrationMatrix(
        rows=(
            (0.850, 0.150, 0.000, 0.000, 0.000, 0.000, 0.000, 0.000),
            (0.250, 0.450, 0.300, 0.000, 0.000, 0.000, 0.000, 0.000),
            (0.040, 0.240, 0.190, 0.530, 0.000, 0.000, 0.000, 0.000),
            (0.005, 0.025, 0.080, 0.100, 0.790, 0.000, 0.000, 0.000),
            (0.000, 0.000, 0.010, 0.080, 0.090, 0.820, 0.000, 0.000),
            (0.000, 0.000, 0.000, 0.000, 0.020, 0.030, 0.950, 0.000),
            (0.000, 0.000, 0.000, 0.000, 0.000, 0.010, 0.010, 0.980),
        )
    )


_DEFAULT_SCORING_ROWS = (
    ("nom_1", 3.5, 3.0, 1.0),
    ("nom_2", 3.5, 3.0, 2.0),
    ("nom_3", 3.5, 3.0, 1.0),
    ("nom_4", 3.5, 3.0, 3.0),
    ("int_1", 5.0, 2.89, 1.0),
    ("int_2", 5.0, 2.89, -4.0),
    ("int_3", 5.0, 2.89, 1.0),
    ("int_4", 5.0, 2.89, -2.0),
    ("act_days", 13.0, 2.42, -5.0),
    ("act_utl", 0.36, 0.28, -4.0),
    ("act_dueutl", 0.12, 0.2, -6.0),
    ("act_n_due", 1.3, 2.0, -2.0),
    ("act_age", 53.0, 9.9, 4.0),
    ("act_capacity", 0.4, 0.21, -2.0),
    ("act_dueinc", 0.3, 0.6, -1.0),
    ("act_loaninc", 2.4, 2.1, -2.0),
    ("income", 2395.0, 1431.0, 2.0),
    ("loan_amount", 5741.0, 6804.0, -1.0),
    ("n_installments", 12.3, 4.63, -4.0),
    ("beh_n_due_3", 1.4, 1.6, -4.0),
    ("beh_days_3", 14.15, 1.4, -6.0),
    ("beh_n_due_6", 1.6, 1.13, -5.0),
    ("beh_days_6", 14.57, 1.02, -6.0),
    ("beh_n_due_9", 1.78, 0.75, -5.0),
    ("beh_days_9", 14.78, 0.72, -6.0),
    ("beh_n_due_12", 1.89, 0.48, -5.0),
    ("beh_days_12", 14.91, 0.49, -6.0),
)


def default_scoring_spec() -> ScoringSpec:
    return ScoringSpec(
        terms=tuple(ScoreTerm(v, mu, sigma, beta) for v, mu, sigma, beta in _DEFAULT_SCORING_ROWS)
    )


def app_case_rule() -> PredicateRule:
    """Crisis hits low-income applicants only."""
    return PredicateRule(clauses=(PredicateClause("income", "<", 1800.0),))


def beh_case_rule() -> PredicateRule:
    """Crisis hits accounts with recent delinquency; the seniority clause
    keeps imputed behavioral windows from triggering the adjustment."""
    return PredicateRule(
        clauses=(
            PredicateClause("beh_n_due_6", ">", 0.0),
            PredicateClause("act_seniority", ">", 6.0),
        )
    )


@dataclass(frozen=True)
class Layout:
    """Complete, validated generator configuration.

    Months are integer indices; index t_start maps to the calendar month
    (start_year, start_month) and the calendar is used only for display and
    for the December volume rule.
    """

    start_year: int = 1970
    start_month: int = 1
    t_start: int = 0
    t_end: int = 83
    migration: MigrationMatrix = field(default_factory=default_migration_matrix)
    macro: MacroParams = field(default_factory=MacroParams)
    scoring_main: ScoringSpec = field(default_factory=default_scoring_spec)
    cycle_rule: CycleRule = field(default_factory=app_case_rule)
    distributions: DistParams = field(default_factory=DistParams)
    volume_scale: float = 1.0
    seed: int = 0

    @property
    def horizon(self) -> int:
        return self.t_end - self.t_start + 1

    @property
    def months(self) -> range:
        return range(self.t_start, self.t_end + 1)

    def calendar(self, m: int) -> tuple[int, int]:
        """Map a month index to its (year, month) display pair."""
        offset = self.start_month - 1 + (m - self.t_start)
        return self.start_year + offset // 12, offset % 12 + 1

    def calendar_str(self, m: int) -> str:
        year, month = self.calendar(m)
        return f"{year:04d}-{month:02d}"

    def is_december(self, m: int) -> bool:
        return self.calendar(m)[1] == 12

    def anchor_date(self, m: int) -> date:
        """Day-resolution anchor of a month index: its mid-month due date."""
        year, month = self.calendar(m)
        return date(year, month, 15)

    def violations(self) -> list[str]:
        problems = []
        if not self.t_end > self.t_start:
            problems.append("t_end must be greater than t_start")
        elif self.horizon < 13:
            problems.append(
                f"horizon {self.horizon} too short: behavioral 12-month windows "
                "need at least 13 months"
            )
        if not self.volume_scale > 0:
            problems.append("volume_scale must be > 0")
        if not 1 <= self.start_month <= 12:
            problems.append("start_month must be in 1..12")
        if not 0 <= self.seed < 2**64:
            problems.append("seed must be a 64-bit unsigned integer")
        problems.extend(self.migration.violations())
        problems.extend(self.scoring_main.violations())
        problems.extend(self.cycle_rule.violations())
        return problems

    def digest(self) -> str:
        """sha256 over the canonical serialized form; changes iff any
        layout field changes."""
        return hashlib.sha256(canonical_json(self).encode()).hexdigest()


def default_layout() -> Layout:
    return Layout()


def validate_matrix(matrix: MigrationMatrix) -> list[str]:
    """Total function: list of structural violations, empty iff valid."""
    return matrix.violations()


# --- serialization -----------------------------------------------------------


def _month_str(year: int, month: int) -> str:
    return f"{year:04d}-{month:02d}"


def _parse_month(value: Any) -> tuple[int, int]:
    if isinstance(value, str):
        parts = value.replace(".", "-").split("-")
        if len(parts) == 2:
            year, month = int(parts[0]), int(parts[1])
            if 1 <= month <= 12:
                return year, month
    raise LayoutError(f"cannot parse calendar month {value!r}; expected 'YYYY-MM'")


def _term_to_dict(term: ScoreTerm) -> dict[str, Any]:
    return {"variable": term.variable, "mu": term.mu, "sigma": term.sigma, "beta": term.beta}


def _term_from_dict(d: dict[str, Any], where: str) -> ScoreTerm:
    try:
        return ScoreTerm(
            variable=str(d["variable"]),
            mu=float(d["mu"]),
            sigma=float(d["sigma"]),
            beta=float(d["beta"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise LayoutError(f"{where}: bad score term {d!r}: {exc}") from exc


def cycle_rule_to_dict(rule: CycleRule) -> dict[str, Any]:
    if isinstance(rule, PredicateRule):
        return {
            "kind": "predicate",
            "clauses": [
                {"variable": c.variable, "op": c.op, "value": c.value}
                for c in rule.clauses
            ],
        }
    return {
        "kind": "linear",
        "terms": [_term_to_dict(t) for t in rule.terms],
        "cutoff": rule.cutoff,
        "noise_sigma": rule.noise_sigma,
        "noise_beta": rule.noise_beta,
        "intercept": rule.intercept,
    }


def cycle_rule_from_dict(d: dict[str, Any]) -> CycleRule:
    kind = d.get("kind")
    if kind == "predicate":
        try:
            clauses = tuple(
                PredicateClause(str(c["variable"]), str(c["op"]), float(c["value"]))
                for c in d["clauses"]
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise LayoutError(f"cycle_rule: bad predicate clause: {exc}") from exc
        return PredicateRule(clauses=clauses)
    if kind == "linear":
        if "cutoff" not in d:
            raise LayoutError("cycle_rule: linear rule requires a cutoff")
        return LinearRule(
            terms=tuple(_term_from_dict(t, "cycle_rule") for t in d.get("terms", [])),
            cutoff=float(d["cutoff"]),
            noise_sigma=float(d.get("noise_sigma", 0.02916)),
            noise_beta=float(d.get("noise_beta", 0.0)),
            intercept=float(d.get("intercept", 0.0)),
        )
    raise LayoutError(f"cycle_rule: unknown kind {kind!r}; expected 'predicate' or 'linear'")


def layout_to_dict(layout: Layout) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "t_start": _month_str(*layout.calendar(layout.t_start)),
        "t_end": _month_str(*layout.calendar(layout.t_end)),
        "seed": layout.seed,
        "volume_scale": layout.volume_scale,
        "migration_matrix": [list(row) for row in layout.migration.rows],
        "macro": dataclasses.asdict(layout.macro),
        "scoring_main": {
            "terms": [_term_to_dict(t) for t in layout.scoring_main.terms],
            "noise_sigma": layout.scoring_main.noise_sigma,
            "noise_beta": layout.scoring_main.noise_beta,
            "intercept": layout.scoring_main.intercept,
        },
        "cycle_rule": cycle_rule_to_dict(layout.cycle_rule),
        "distributions": {
            "volume": dataclasses.asdict(layout.distributions.volume),
            "applicant": dataclasses.asdict(layout.distributions.applicant),
            "pay_days": dataclasses.asdict(layout.distributions.pay_days),
        },
    }


def canonical_json(layout: Layout) -> str:
    return json.dumps(layout_to_dict(layout), sort_keys=True, separators=(",", ":"))


def _build_section(cls, data: dict[str, Any], where: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise LayoutError(f"{where}: unknown keys {sorted(unknown)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise LayoutError(f"{where}: {exc}") from exc


def layout_from_dict(doc: dict[str, Any]) -> Layout:
    """Build and validate a Layout from a parsed configuration document.

    Every section is optional; omitted parameters take the built-in
    defaults.  Raises LayoutError naming the violated invariant.
    """
    if not isinstance(doc, dict):
        raise LayoutError(f"configuration document must be a mapping, got {type(doc).__name__}")
    doc = dict(doc)
    version = doc.pop("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise LayoutError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION}")

    known_keys = {
        "t_start",
        "t_end",
        "seed",
        "volume_scale",
        "migration_matrix",
        "macro",
        "scoring_main",
        "cycle_rule",
        "distributions",
    }
    unknown = set(doc) - known_keys
    if unknown:
        raise LayoutError(f"unknown top-level keys {sorted(unknown)}")

    defaults = Layout()
    start_year, start_month = (
        _parse_month(doc["t_start"]) if "t_start" in doc else (defaults.start_year, defaults.start_month)
    )
    if "t_end" in doc:
        end_year, end_month = _parse_month(doc["t_end"])
        t_end = (end_year - start_year) * 12 + (end_month - start_month)
    else:
        t_end = defaults.t_end

    migration = defaults.migration
    if "migration_matrix" in doc:
        raw = doc["migration_matrix"]
        if not isinstance(raw, list):
            raise LayoutError("migration_matrix must be a list of rows")
        migration = MigrationMatrix(rows=tuple(tuple(row) for row in raw))

    macro = (
        _build_section(MacroParams, doc["macro"], "macro") if "macro" in doc else defaults.macro
    )

    scoring = defaults.scoring_main
    if "scoring_main" in doc:
        sm = dict(doc["scoring_main"])
        terms_raw = sm.pop("terms", None)
        terms = (
            tuple(_term_from_dict(t, "scoring_main") for t in terms_raw)
            if terms_raw is not None
            else defaults.scoring_main.terms
        )
        scoring = ScoringSpec(
            terms=terms,
            noise_sigma=float(sm.pop("noise_sigma", defaults.scoring_main.noise_sigma)),
            noise_beta=float(sm.pop("noise_beta", defaults.scoring_main.noise_beta)),
            intercept=float(sm.pop("intercept", defaults.scoring_main.intercept)),
        )
        if sm:
            raise LayoutError(f"scoring_main: unknown keys {sorted(sm)}")

    rule = defaults.cycle_rule
    if "cycle_rule" in doc:
        rule = cycle_rule_from_dict(doc["cycle_rule"])

    dist = defaults.distributions
    if "distributions" in doc:
        ds = dict(doc["distributions"])
        volume = (
            _build_section(VolumeParams, ds.pop("volume"), "distributions.volume")
            if "volume" in ds
            else dist.volume
        )
        applicant = (
            _build_section(ApplicantParams, ds.pop("applicant"), "distributions.applicant")
            if "applicant" in ds
            else dist.applicant
        )
        pay_days = (
            _build_section(PayDaysParams, ds.pop("pay_days"), "distributions.pay_days")
            if "pay_days" in ds
            else dist.pay_days
        )
        if ds:
            raise LayoutError(f"distributions: unknown keys {sorted(ds)}")
        dist = DistParams(volume=volume, applicant=applicant, pay_days=pay_days)

    try:
        layout = Layout(
            start_year=start_year,
            start_month=start_month,
            t_start=0,
            t_end=t_end,
            migration=migration,
            macro=macro,
            scoring_main=scoring,
            cycle_rule=rule,
            distributions=dist,
            volume_scale=float(doc.get("volume_scale", defaults.volume_scale)),
            seed=int(doc.get("seed", defaults.seed)),
        )
    except (TypeError, ValueError) as exc:
        raise LayoutError(str(exc)) from exc

    problems = layout.violations()
    if problems:
        raise LayoutError("; ".join(problems))
    return layout


def load_layout(source: str | Path | dict[str, Any]) -> Layout:
    """Load a Layout from a parsed mapping, a JSON/YAML file path, or a raw
    JSON string.  An empty document yields the all-defaults layout."""
    if isinstance(source, dict):
        return layout_from_dict(source)
    if isinstance(source, Path) or (
        isinstance(source, str) and source.lstrip()[:1] not in ("{", "")
    ):
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise LayoutError(f"cannot read configuration {path}: {exc}") from exc
        if path.suffix.lower() in (".yaml", ".yml"):
            import yaml

            try:
                parsed = yaml.safe_load(text)
            except yaml.YAMLError as exc:
                raise LayoutError(f"malformed YAML in {path}: {exc}") from exc
        else:
            try:
                parsed = json.loads(text) if text.strip() else {}
            except json.JSONDecodeError as exc:
                raise LayoutError(f"malformed JSON in {path}: {exc}") from exc
        return layout_from_dict(parsed if parsed is not None else {})
    if isinstance(source, str):
        if not source.strip():
            return layout_from_dict({})
        try:
            parsed = json.loads(source)
        except json.JSONDecodeError as exc:
            raise LayoutError(f"malformed JSON document: {exc}") from exc
        return layout_from_dict(parsed)
    raise LayoutError(f"unsupported configuration source type {type(source).__name__}")


def save_layout(layout: Layout, path: str | Path) -> None:
    Path(path).write_text(json.dumps(layout_to_dict(layout), indent=2, sort_keys=True) + "\n")


PRESET_NAMES = ("app_case", "beh_case")


def preset(name: str) -> Layout:
    """One of the two shipped case layouts.  They differ only in the
    crisis-adjustment rule: app_case adjusts low-income accounts, beh_case
    adjusts accounts with recent delinquency."""
    if name == "app_case":
        return Layout(cycle_rule=app_case_rule())
    if name == "beh_case":
        return Layout(cycle_rule=beh_case_rule())
    raise LayoutError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")


def preset_path(name: str) -> Path:
    """Path of the bundled preset configuration file."""
    if name not in PRESET_NAMES:
        raise LayoutError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")
    return Path(__file__).parent / "presets" / f"{name}.json"
