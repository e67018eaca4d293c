from .ablate import (AGENT_NAMES, ablation_matrix, ablation_table,
                     misleading_suite, save_suite, seeded, train_suite)
from .evaluate import (EVAL_TYPES, EvalReport, FlatAgent, FlatDriver,
                       OracleAgent, Task, eval_cell, evaluate, judge,
                       misleading_eval, render_table, run_task,
                       sample_misleading_task, sample_task)
from .train import (TrainResult, init_bundle, init_rng, train_flat,
                    train_high, train_low, train_low_head)

__all__ = [
    "AGENT_NAMES", "EVAL_TYPES", "EvalReport", "FlatAgent", "FlatDriver",
    "OracleAgent", "Task", "TrainResult", "ablation_matrix", "ablation_table",
    "eval_cell", "evaluate", "init_bundle", "init_rng", "judge",
    "misleading_eval", "misleading_suite", "render_table", "run_task",
    "sample_misleading_task", "sample_task", "save_suite", "seeded",
    "train_flat", "train_high", "train_low", "train_low_head", "train_suite",
]
