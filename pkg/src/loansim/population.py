"""Production dataset: every loan application over the horizon, with
customer characteristics and credit properties.

Applications are generated fully before the payment simulation runs; ids
are assigned strictly increasing in (month, within-month draw order), so
the dataset and all downstream draws are reproducible per seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

import numpy as np

from .config import Layout
from .sampling import sample_applicants, sample_applications_count


@dataclass(frozen=True)
class ApplicationRecord:
    """One application row."""

    app_id: int
    t_app: int
    birth: date
    income: int
    spending: int
    installment: int
    n_installments: int
    loan_amount: int
    nom: tuple[int, int, int, int]
    interval: tuple[float, float, float, float]


FIELD_NAMES = (
    "app_id",
    "t_app",
    "birth_ordinal",
    "income",
    "spending",
    "installment",
    "n_installments",
    "loan_amount",
    "nom_1",
    "nom_2",
    "nom_3",
    "nom_4",
    "int_1",
    "int_2",
    "int_3",
    "int_4",
)


class ProductionTable:
    """Column-oriented application data plus per-month slice bounds."""

    def __init__(self, columns: dict[str, np.ndarray], month_bounds: np.ndarray, layout: Layout):
        self.columns = columns
        self.month_bounds = month_bounds  # shape (horizon + 1,); slice m is [b[m], b[m+1])
        self.layout = layout

    def __len__(self) -> int:
        return int(self.columns["app_id"].size)

    def month_slice(self, month: int) -> slice:
        m = month - self.layout.t_start
        return slice(int(self.month_bounds[m]), int(self.month_bounds[m + 1]))

    def month_count(self, month: int) -> int:
        s = self.month_slice(month)
        return s.stop - s.start

    def record(self, row: int) -> ApplicationRecord:
        c = self.columns
        return ApplicationRecord(
            app_id=int(c["app_id"][row]),
            t_app=int(c["t_app"][row]),
            birth=date.fromordinal(int(c["birth_ordinal"][row])),
            income=int(c["income"][row]),
            spending=int(c["spending"][row]),
            installment=int(c["installment"][row]),
            n_installments=int(c["n_installments"][row]),
            loan_amount=int(c["loan_amount"][row]),
            nom=tuple(int(c[f"nom_{k}"][row]) for k in range(1, 5)),
            interval=tuple(float(c[f"int_{k}"][row]) for k in range(1, 5)),
        )

    def to_dataframe(self):
        import pandas as pd

        return pd.DataFrame(self.columns)


def generate_month(month: int, first_id: int, layout: Layout) -> dict[str, np.ndarray]:
    """Applications for one month; ids run from first_id in draw order."""
    count = sample_applications_count(month, layout)
    ids = np.arange(first_id, first_id + count, dtype=np.int64)
    fields = sample_applicants(ids, layout)
    anchor = layout.anchor_date(month).toordinal()
    out = {
        "app_id": ids,
        "t_app": np.full(count, month, dtype=np.int64),
        "birth_ordinal": anchor - fields["birth_offset_days"],
        "income": fields["income"],
        "spending": fields["spending"],
        "installment": fields["installment"],
        "n_installments": fields["n_installments"],
        "loan_amount": fields["loan_amount"],
    }
    for k in range(1, 5):
        out[f"nom_{k}"] = fields[f"nom_{k}"]
        out[f"int_{k}"] = fields[f"int_{k}"]
    return out


def generate_production(layout: Layout) -> ProductionTable:
    """The full Production dataset, ordered by (t_app, app_id)."""
    batches = []
    bounds = [0]
    next_id = 0
    for month in layout.months:
        batch = generate_month(month, next_id, layout)
        next_id += batch["app_id"].size
        bounds.append(next_id)
        batches.append(batch)
    columns = {
        name: np.concatenate([b[name] for b in batches]) if batches else np.empty(0)
        for name in FIELD_NAMES
    }
    return ProductionTable(columns, np.asarray(bounds, dtype=np.int64), layout)
