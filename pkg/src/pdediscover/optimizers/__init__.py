from .common import Evaluator, Individual, RunResult, TraceRow, trace_csv
from .moeadd import MOEADD, MoeaddConfig, WeightSector, run_moeadd, weight_sectors
from .pareto import (ParetoArchive, dominates, hypervolume_2d, nondominated_sort, pbi)
from .single import SingleConfig, run_single_objective

__all__ = [
    "Evaluator", "Individual", "RunResult", "TraceRow", "trace_csv",
    "MOEADD", "MoeaddConfig", "WeightSector", "run_moeadd", "weight_sectors",
    "ParetoArchive", "dominates", "hypervolume_2d", "nondominated_sort", "pbi",
    "SingleConfig", "run_single_objective",
]
