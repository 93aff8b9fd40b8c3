"""Skill-task matching firms: production accounting, delta-rule recalibration, efficiency checks."""

from .efficiency import (
    DurationInterval,
    InapplicableRegimeError,
    MatchingInstance,
    SchedulingInstance,
    check_cycle_dominance,
    check_matching_dominance,
    clamp_gap,
    cycle_bounds_occupation,
    cycle_bounds_task,
    job_level_value,
    occupation_duration,
    occupation_duration_bounds,
    task_level_value,
)
from .iteration import (
    ConvergenceTrace,
    FirmState,
    LearningConfig,
    PeriodRecord,
    iterate_period,
    loss_matching,
    loss_value,
    matrix_update,
    run_until_converged,
    value_update,
)
from .production import (
    CostModel,
    DimensionError,
    MatchingMatrix,
    ProfitGapVector,
    SkillVector,
    TaskOutputVector,
    TaskValueVector,
    TaskVector,
    actual_income,
    cost,
    expected_income,
    profit_gap,
    profits,
    task_output,
    unit_matching_check,
)
from .scenario import Scenario, ScenarioSpec, apply_shock, generate_scenario, period_inputs
from .trainer import (
    MatchingTrainingSet,
    TrainingReport,
    ValueTrainingSet,
    train_matching_matrix,
    train_value_vector,
)

__version__ = "0.1.0"
