from __future__ import annotations

from .pareto import ParetoRow, dominates, pareto_front
from .tables import read_pareto_csv, write_csv, write_dat, write_pareto_csv

__all__ = [
    "ParetoRow",
    "dominates",
    "pareto_front",
    "read_pareto_csv",
    "write_csv",
    "write_dat",
    "write_pareto_csv",
]
