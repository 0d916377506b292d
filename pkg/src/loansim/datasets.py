"""Dataset file formats (schema v1) and streaming CSV writers/readers.

production.csv  one row per application, ordered by (t_app, app_id)
transaction.csv one row per account-month, ordered by (t_cur, app_id);
                missing pay_days written as an empty field
abt.csv         one row per active account-month with all feature columns

Writers consume the engine's per-month column batches, so a full-scale run
streams with constant memory.  All numbers use repr-shortest float
formatting, making outputs byte-stable for a given layout.
"""

from __future__ import annotations

from datetime import date
from pathlib import Path
from typing import IO

import numpy as np
import pandas as pd

from . import abt
from .config import Layout
from .engine import STATUS_LABELS

PRODUCTION_CSV_COLUMNS = (
    "app_id",
    "t_app",
    "app_month",
    "birth_date",
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

TRANSACTION_CSV_COLUMNS = ("app_id", "t_app", "t_cur", "n_due", "n_paid", "status", "pay_days")

ABT_CSV_COLUMNS = ("app_id", "t_cur") + abt.ABT_FEATURES

PRODUCTION_FILE = "production.csv"
TRANSACTION_FILE = "transaction.csv"
ABT_FILE = "abt.csv"


class CsvBatchWriter:
    """Appends column batches to one CSV file, writing the header once."""

    def __init__(self, path: Path, columns: tuple[str, ...]):
        self.path = Path(path)
        self.columns = columns
        self._handle: IO[str] = open(self.path, "w", newline="")
        self._handle.write(",".join(columns) + "\n")

    def write(self, frame: pd.DataFrame) -> None:
        frame.to_csv(self._handle, header=False, index=False, na_rep="", lineterminator="\n")

    def close(self) -> None:
        self._handle.close()

    def __enter__(self) -> "CsvBatchWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def production_batch_frame(batch: dict[str, np.ndarray], layout: Layout) -> pd.DataFrame:
    months = batch["t_app"]
    out = {
        "app_id": batch["app_id"],
        "t_app": months,
        "app_month": [layout.calendar_str(int(m)) for m in months],
        "birth_date": [date.fromordinal(int(o)).isoformat() for o in batch["birth_ordinal"]],
    }
    for name in PRODUCTION_CSV_COLUMNS[4:]:
        out[name] = batch[name]
    return pd.DataFrame(out, columns=PRODUCTION_CSV_COLUMNS)


def transaction_batch_frame(batch: dict[str, np.ndarray]) -> pd.DataFrame:
    pay = batch["pay_days"]
    missing = np.isnan(pay)
    pay_int = pd.arrays.IntegerArray(
        np.where(missing, 0, pay).astype(np.int64), mask=missing
    )
    return pd.DataFrame(
        {
            "app_id": batch["app_id"],
            "t_app": batch["t_app"],
            "t_cur": batch["t_cur"],
            "n_due": batch["n_due"],
            "n_paid": batch["n_paid"],
            "status": STATUS_LABELS[batch["status"]],
            "pay_days": pay_int,
        },
        columns=TRANSACTION_CSV_COLUMNS,
    )


def abt_batch_frame(batch: dict[str, np.ndarray]) -> pd.DataFrame:
    return pd.DataFrame({name: batch[name] for name in ABT_CSV_COLUMNS}, columns=ABT_CSV_COLUMNS)


def read_production(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, parse_dates=["birth_date"])


def read_transactions(path: Path) -> pd.DataFrame:
    frame = pd.read_csv(
        path,
        dtype={
            "app_id": np.int64,
            "t_app": np.int64,
            "t_cur": np.int64,
            "n_due": np.int64,
            "n_paid": np.int64,
            "status": "string",
            "pay_days": "Int64",
        },
    )
    codes = {label: code for code, label in enumerate(STATUS_LABELS)}
    frame["status"] = frame["status"].map(codes).astype(np.int8)
    return frame


def read_abt(path: Path) -> pd.DataFrame:
    return pd.read_csv(path)
