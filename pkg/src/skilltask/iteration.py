"""Loss functions, delta-rule recalibration and the period-by-period iteration loop.

Each period the firm produces with its current matching matrix, books the
expected and realized accounts, and, while any task still shows a profit gap
at or above ``tol``, recalibrates the matrix and the task value vector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Literal

import numpy as np

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
)

if TYPE_CHECKING:
    from .scenario import Scenario

__all__ = [
    "LearningConfig",
    "FirmState",
    "PeriodRecord",
    "ConvergenceTrace",
    "PeriodOverflowError",
    "loss_matching",
    "loss_value",
    "matching_gradient",
    "value_gradient",
    "matrix_update",
    "value_update",
    "iterate_period",
    "run_until_converged",
]

log = logging.getLogger(__name__)

MatrixSignMode = Literal["descent", "paper-literal"]
ValueUpdateMode = Literal["exact-gradient", "paper-delta"]
ValueSchedule = Literal["concurrent", "after-matrix"]


class PeriodOverflowError(RuntimeError):
    """Raised when a firm is stepped past ``max_periods``."""


@dataclass(frozen=True)
class LearningConfig:
    """Learning rates, update variants and stopping rule.

    ``value_schedule="after-matrix"`` holds the value vector fixed until the
    realized outputs match the plan to within ``tol``; the default updates both
    parameter sets in the same period.
    """

    lr_matrix: float = 0.1
    lr_value: float = 0.1
    matrix_sign_mode: MatrixSignMode = "descent"
    value_update_mode: ValueUpdateMode = "exact-gradient"
    tol: float = 1e-8
    max_periods: int = 10_000
    value_schedule: ValueSchedule = "concurrent"

    def __post_init__(self) -> None:
        for name in ("lr_matrix", "lr_value"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie strictly inside (0, 1), got {v}")
        if self.matrix_sign_mode not in ("descent", "paper-literal"):
            raise ValueError(f"unknown matrix_sign_mode {self.matrix_sign_mode!r}")
        if self.value_update_mode not in ("exact-gradient", "paper-delta"):
            raise ValueError(f"unknown value_update_mode {self.value_update_mode!r}")
        if self.value_schedule not in ("concurrent", "after-matrix"):
            raise ValueError(f"unknown value_schedule {self.value_schedule!r}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if isinstance(self.max_periods, bool) or int(self.max_periods) != self.max_periods:
            raise ValueError("max_periods must be an integer")
        if self.max_periods < 1:
            raise ValueError(f"max_periods must be >= 1, got {self.max_periods}")


@dataclass(frozen=True)
class FirmState:
    period: int
    matrix: MatchingMatrix
    values: TaskValueVector

    def __post_init__(self) -> None:
        if self.period < 0:
            raise ValueError("period must be nonnegative")
        if self.matrix.shape[1] != len(self.values):
            raise DimensionError(
                f"matrix has {self.matrix.shape[1]} task columns but {len(self.values)} values"
            )


@dataclass(frozen=True)
class PeriodRecord:
    """Full accounting of one period, computed before any recalibration."""

    period: int
    tasks: TaskVector
    skills: SkillVector
    output: TaskOutputVector
    price: float
    income_expected: float
    income_actual: float
    total_cost: float
    profit_expected: float
    profit_actual: float
    gap: ProfitGapVector
    loss_matching: float
    loss_value: float
    converged: bool

    @property
    def gap_maxnorm(self) -> float:
        return self.gap.max_norm()

    @property
    def updated(self) -> bool:
        return not self.converged


@dataclass(frozen=True)
class ConvergenceTrace:
    records: list[PeriodRecord] = field(default_factory=list)
    converged: bool = False
    final_state: FirmState | None = None
    diverged: bool = False

    @property
    def updates(self) -> int:
        """Number of periods in which parameters were recalibrated."""
        return sum(1 for r in self.records if r.updated)

    @property
    def converged_period(self) -> int | None:
        if not self.converged:
            return None
        return self.records[-1].period


def _require_finite(arr: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError(f"{what} left the finite range; the update is diverging")


def loss_matching(output: TaskOutputVector, tasks: TaskVector) -> float:
    if len(output) != len(tasks):
        raise DimensionError(f"outputs length {len(output)} != tasks length {len(tasks)}")
    diff = output.quantities - tasks.quantities
    return 0.5 * float(diff @ diff)


def loss_value(income_actual: float, income_expected: float) -> float:
    diff = income_actual - income_expected
    return 0.5 * diff * diff


def matching_gradient(
    skills: SkillVector, tasks: TaskVector, output: TaskOutputVector
) -> np.ndarray:
    """``dE_A/da_uv = (y_hat_v - y_v) * x_u`` as a skills x tasks array."""
    if len(output) != len(tasks):
        raise DimensionError(f"outputs length {len(output)} != tasks length {len(tasks)}")
    return np.outer(skills.total, output.quantities - tasks.quantities)


def value_gradient(
    values: TaskValueVector, tasks: TaskVector, output: TaskOutputVector
) -> np.ndarray:
    """``dE_lambda/dlambda_v = (I_hat - I) * y_hat_v``."""
    residual = actual_income(values, output) - expected_income(values, tasks)
    return residual * output.quantities


def matrix_update(
    state: FirmState,
    skills: SkillVector,
    tasks: TaskVector,
    output: TaskOutputVector,
    cfg: LearningConfig,
) -> MatchingMatrix:
    """One delta-rule step on the matching matrix, projected back onto ``a >= 0``.

    The raw step is ``lr_matrix * (y_hat_v - y_v) * x_u``; descent subtracts it,
    paper-literal adds it.
    """
    a = state.matrix.entries
    if a.shape != (len(skills), len(tasks)) or len(output) != len(tasks):
        raise DimensionError(
            f"matrix {a.shape} incompatible with {len(skills)} skills / {len(tasks)} tasks"
        )
    with np.errstate(over="ignore", invalid="ignore"):
        step = cfg.lr_matrix * matching_gradient(skills, tasks, output)
        new = a - step if cfg.matrix_sign_mode == "descent" else a + step
    _require_finite(new, "matching matrix")
    return MatchingMatrix(np.maximum(new, 0.0))


def value_update(
    state: FirmState,
    tasks: TaskVector,
    output: TaskOutputVector,
    cfg: LearningConfig,
) -> TaskValueVector:
    """One descent step on the task value vector.

    exact-gradient: ``lam_v -= lr_value * (I_hat - I) * y_hat_v``.
    paper-delta:    ``lam_v -= lr_value * (y_hat_v - y_v)``.
    """
    lam = state.values.values
    if not (len(lam) == len(tasks) == len(output)):
        raise DimensionError("values, tasks and outputs must have equal length")
    with np.errstate(over="ignore", invalid="ignore"):
        if cfg.value_update_mode == "exact-gradient":
            grad = value_gradient(state.values, tasks, output)
        else:
            grad = output.quantities - tasks.quantities
        new = lam - cfg.lr_value * grad
    _require_finite(new, "task values")
    return TaskValueVector(new)


def iterate_period(
    state: FirmState,
    tasks: TaskVector,
    skills: SkillVector,
    price: float,
    cost_model: CostModel,
    cfg: LearningConfig,
) -> tuple[FirmState, PeriodRecord]:
    if state.period >= cfg.max_periods:
        raise PeriodOverflowError(
            f"period {state.period} is at or beyond max_periods={cfg.max_periods}"
        )
    output = task_output(skills, state.matrix)
    income_exp = expected_income(state.values, tasks)
    income_act = actual_income(state.values, output)
    total_cost = cost(cost_model, skills)
    # scalar planned quantity is I / p so that p * Q^E = lambda @ y
    profit_exp, profit_act = profits(price, income_exp / price, income_act, total_cost)
    gap = profit_gap(state.values, tasks, output)
    losses = (loss_matching(output, tasks), loss_value(income_act, income_exp))
    if not np.all(np.isfinite((income_exp, income_act, *losses))):
        raise FloatingPointError(f"period {state.period} accounting overflowed")
    converged = gap.max_norm() < cfg.tol

    record = PeriodRecord(
        period=state.period,
        tasks=tasks,
        skills=skills,
        output=output,
        price=float(price),
        income_expected=income_exp,
        income_actual=income_act,
        total_cost=total_cost,
        profit_expected=profit_exp,
        profit_actual=profit_act,
        gap=gap,
        loss_matching=losses[0],
        loss_value=losses[1],
        converged=converged,
    )
    if converged:
        return replace(state, period=state.period + 1), record

    new_matrix = matrix_update(state, skills, tasks, output, cfg)
    hold_values = (
        cfg.value_schedule == "after-matrix"
        and np.max(np.abs(output.quantities - tasks.quantities)) >= cfg.tol
    )
    new_values = state.values if hold_values else value_update(state, tasks, output, cfg)
    return FirmState(state.period + 1, new_matrix, new_values), record


def run_until_converged(
    initial: FirmState,
    scenario: Scenario,
    cfg: LearningConfig,
    cost_model: CostModel | None = None,
) -> ConvergenceTrace:
    """Drive :func:`iterate_period` with the scenario's per-period inputs.

    Stops when the gap closes, at ``cfg.max_periods``, when the scenario
    horizon is exhausted, or when the parameters stop being finite.
    """
    from .scenario import period_inputs

    if cost_model is None:
        cost_model = CostModel.zero(initial.matrix.shape[0])
    horizon = min(cfg.max_periods, scenario.spec.periods)
    state = initial
    records: list[PeriodRecord] = []
    converged = diverged = False
    while state.period < horizon:
        tasks, skills, price = period_inputs(scenario, state.period)
        try:
            state, record = iterate_period(state, tasks, skills, price, cost_model, cfg)
        except FloatingPointError as exc:
            log.warning("stopping at period %d: %s", state.period, exc)
            diverged = True
            break
        records.append(record)
        if record.converged:
            converged = True
            break
    log.info(
        "run stopped at period %d: converged=%s, %d records", state.period, converged, len(records)
    )
    return ConvergenceTrace(records, converged, state, diverged)
