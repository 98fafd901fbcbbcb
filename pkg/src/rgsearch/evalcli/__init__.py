from .bench import METHODS, bench_problems
from .config import AppConfig, BackendSpec, BenchConfig, ConfigError, ScriptedSpec, load_config
from .metrics import (
    EvalReport,
    ProblemRecord,
    accuracy,
    best_of_n,
    bon_pick,
    comparison_table,
    compute_aggregates,
    maj_at_k,
    majority_answer,
    pass_at_k,
)

__all__ = [
    "AppConfig",
    "BackendSpec",
    "BenchConfig",
    "ConfigError",
    "EvalReport",
    "METHODS",
    "ProblemRecord",
    "ScriptedSpec",
    "accuracy",
    "bench_problems",
    "best_of_n",
    "bon_pick",
    "comparison_table",
    "compute_aggregates",
    "load_config",
    "maj_at_k",
    "majority_answer",
    "pass_at_k",
]
