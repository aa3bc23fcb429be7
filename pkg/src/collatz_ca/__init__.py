"""Collatz trajectories computed by digit-local cellular automata."""

from .digits import (
    DigitString,
    MapVariant,
    TrajectoryReport,
    apply_map,
    from_digits,
    odd_part,
    oracle_trajectory,
    stopping_time,
    to_digits,
    total_stopping_time,
)
from .engine import (
    BatchConfig,
    Classification,
    CollisionError,
    RunConfig,
    TrajectoryRecord,
    VerifyReport,
    classify_trajectory,
    run_batch,
    run_grid,
    run_shared_grid,
    run_single,
    verify_against_oracle,
    worker_count,
)
from .grid import (
    Grid,
    NonContiguousRowError,
    StepStats,
    WindowViolationError,
    extract_row,
    init_grid,
    oracle_rows,
    run_until_rows_stable,
    snapshot,
    step_frontier,
    step_synchronous,
)
from .metrics import EfficiencyRecord, average_efficiency, n_efficiency
from .rules import (
    CAVariant,
    ConsistencyReport,
    RuleConflictError,
    RuleTable,
    TableVariant,
    check_rule_consistency,
    dump_rule_table,
    learn_rule_table,
    transition,
)

__all__ = [
    "BatchConfig",
    "CAVariant",
    "Classification",
    "CollisionError",
    "ConsistencyReport",
    "DigitString",
    "EfficiencyRecord",
    "Grid",
    "MapVariant",
    "NonContiguousRowError",
    "RuleConflictError",
    "RuleTable",
    "RunConfig",
    "StepStats",
    "TableVariant",
    "TrajectoryRecord",
    "TrajectoryReport",
    "VerifyReport",
    "WindowViolationError",
    "apply_map",
    "average_efficiency",
    "check_rule_consistency",
    "classify_trajectory",
    "dump_rule_table",
    "extract_row",
    "from_digits",
    "init_grid",
    "learn_rule_table",
    "n_efficiency",
    "odd_part",
    "oracle_rows",
    "oracle_trajectory",
    "run_batch",
    "run_grid",
    "run_shared_grid",
    "run_single",
    "run_until_rows_stable",
    "snapshot",
    "step_frontier",
    "step_synchronous",
    "stopping_time",
    "to_digits",
    "total_stopping_time",
    "transition",
    "verify_against_oracle",
    "worker_count",
]
