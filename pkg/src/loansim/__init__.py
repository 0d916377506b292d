"""Deterministic synthetic retail installment-loan portfolio generator.

Generates an application (production) dataset, a monthly account-state
(transaction) dataset driven by a crisis-adjustable migration matrix with
score-based segmentation, the derived feature table, default labels, and
standard credit-risk reports.
"""

from .config import Layout, LayoutError, default_layout, load_layout, preset, save_layout
from .engine import RunResult, RunSinks, run_simulation
from .population import generate_production

__all__ = [
    "Layout",
    "LayoutError",
    "RunResult",
    "RunSinks",
    "default_layout",
    "generate_production",
    "load_layout",
    "preset",
    "run_simulation",
    "save_layout",
]

__version__ = "0.1.0"
