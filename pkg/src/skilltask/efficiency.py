"""Matching-efficiency and iteration-cycle comparisons between job- and task-level organisation.

Matching: staffing an occupation with one whole employee (job level) versus
picking the best employee separately for every task (task level).  The sum of
per-task maxima can never fall below the best whole-employee total.

Cycle length: the production cycle lies between its critical path (longest
component) and its serial sum.  Counting those bounds over occupations versus
over the flattened task totals gives equal serial sums and a critical path
that is never longer at task level, provided each task type belongs to a
single occupation.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .production import DimensionError, MatchingMatrix, ProfitGapVector, TaskValueVector, TaskVector

__all__ = [
    "InapplicableRegimeError",
    "MatchingInstance",
    "SchedulingInstance",
    "DurationInterval",
    "JobLevelResult",
    "TaskLevelResult",
    "clamp_gap",
    "job_level_value",
    "task_level_value",
    "check_matching_dominance",
    "occupation_duration_bounds",
    "occupation_duration",
    "cycle_bounds_occupation",
    "cycle_bounds_task",
    "check_cycle_dominance",
    "random_matching_instance",
    "random_scheduling_instance",
]

_REL_EPS = 1e-12


class InapplicableRegimeError(ValueError):
    """Raised when a dominance check is asked outside the regime where it holds."""


@dataclass(frozen=True, eq=False)
class MatchingInstance:
    """Candidate employees (rows of skill units) for one occupation's tasks."""

    employees: NDArray[np.float64]
    occupation_tasks: TaskVector
    matrix: MatchingMatrix
    values: TaskValueVector

    def __post_init__(self) -> None:
        emp = np.array(self.employees, dtype=np.float64)
        if emp.ndim == 1:
            emp = emp[None, :]
        if emp.ndim != 2 or emp.shape[0] < 1 or emp.shape[1] < 1:
            raise DimensionError("employees must be a non-empty 2-D array (employee x skill)")
        if not np.all(np.isfinite(emp)) or np.any(emp < 0):
            raise ValueError("employee skills must be finite and nonnegative")
        i, q = self.matrix.shape
        if emp.shape[1] != i:
            raise DimensionError(f"employees have {emp.shape[1]} skills, matrix has {i} rows")
        if len(self.occupation_tasks) != q or len(self.values) != q:
            raise DimensionError(f"tasks/values must have length {q}")
        emp.setflags(write=False)
        object.__setattr__(self, "employees", emp)

    def value_table(self) -> NDArray[np.float64]:
        """``table[e, v]``: value of employee ``e`` performing task ``v``."""
        return (self.employees @ self.matrix.entries) * self.values.values


@dataclass(frozen=True)
class DurationInterval:
    lower: float
    upper: float

    def __post_init__(self) -> None:
        if self.lower > self.upper:
            raise ValueError(f"interval lower {self.lower} exceeds upper {self.upper}")


@dataclass(frozen=True, eq=False)
class SchedulingInstance:
    """Occupations as per-task-type quantity rows, staffed ``counts`` times each.

    ``compositions[k, m]`` is how many units of task type ``m`` occupation
    ``k`` performs; ``task_times[m]`` is time per unit; ``parallelism`` picks
    each occupation's duration inside its critical-path/serial interval.
    """

    compositions: NDArray[np.float64]
    counts: NDArray[np.int64]
    task_times: NDArray[np.float64]
    parallelism: float = 0.0

    def __post_init__(self) -> None:
        comp = np.array(self.compositions, dtype=np.float64)
        counts = np.array(self.counts)
        times = np.array(self.task_times, dtype=np.float64)
        if comp.ndim != 2 or comp.shape[0] < 1:
            raise DimensionError("compositions must be a non-empty 2-D array (occupation x task)")
        if times.ndim != 1 or times.shape[0] != comp.shape[1]:
            raise DimensionError(
                f"{comp.shape[1]} task types referenced but {times.size} task times given"
            )
        if counts.shape != (comp.shape[0],):
            raise DimensionError(f"need one count per occupation ({comp.shape[0]})")
        if not np.all(np.isfinite(comp)) or np.any(comp < 0):
            raise ValueError("task quantities must be finite and nonnegative")
        if np.any(comp.sum(axis=1) <= 0):
            raise ValueError("every occupation needs at least one task with positive quantity")
        if not np.all(np.isfinite(times)) or np.any(times <= 0):
            raise ValueError("task times must be positive")
        if counts.dtype.kind not in "iu" and not np.all(counts == np.round(counts)):
            raise ValueError("occupation counts must be integers")
        counts = counts.astype(np.int64)
        if np.any(counts < 1):
            raise ValueError("occupation counts must be positive")
        if not (0.0 <= self.parallelism <= 1.0):
            raise ValueError(f"parallelism must lie in [0, 1], got {self.parallelism}")
        for arr in (comp, counts, times):
            arr.setflags(write=False)
        object.__setattr__(self, "compositions", comp)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "task_times", times)
        object.__setattr__(self, "parallelism", float(self.parallelism))

    def task_totals(self) -> NDArray[np.float64]:
        """Global per-task-type quantities, ``sum_k counts[k] * compositions[k]``."""
        return self.counts @ self.compositions

    def total_tasks(self) -> float:
        return float(self.task_totals().sum())


class JobLevelResult(NamedTuple):
    value: float
    employee: int


class TaskLevelResult(NamedTuple):
    value: float
    assignment: tuple[int, ...]
    literal_figure: float


def clamp_gap(gap: ProfitGapVector) -> ProfitGapVector:
    return ProfitGapVector(np.maximum(gap.gaps, 0.0))


def job_level_value(inst: MatchingInstance) -> JobLevelResult:
    """Best whole-occupation value over employees; ties go to the lowest index."""
    totals = inst.value_table().sum(axis=1)
    best = int(np.argmax(totals))
    return JobLevelResult(float(totals[best]), best)


def task_level_value(inst: MatchingInstance) -> TaskLevelResult:
    """Sum over tasks of the best employee's value on that task.

    ``literal_figure`` is the task count times the largest single
    (employee, task) value; it is reported for reference only.
    """
    table = inst.value_table()
    picks = np.argmax(table, axis=0)
    value = float(table[picks, np.arange(table.shape[1])].sum())
    literal = table.shape[1] * float(table.max())
    return TaskLevelResult(value, tuple(int(p) for p in picks), literal)


def check_matching_dominance(inst: MatchingInstance) -> bool:
    task = task_level_value(inst).value
    job = job_level_value(inst).value
    scale = max(1.0, abs(task), abs(job))
    return task >= job - _REL_EPS * scale


def occupation_duration_bounds(
    task_quantities: ArrayLike, task_times: ArrayLike
) -> DurationInterval:
    """Critical-path (longest task) and serial-sum durations of one occupation."""
    y = np.asarray(task_quantities, dtype=np.float64)
    w = np.asarray(task_times, dtype=np.float64)
    if y.shape != w.shape or y.ndim != 1:
        raise DimensionError(f"quantities {y.shape} and times {w.shape} must be matching 1-D")
    if not np.any(y > 0):
        raise ValueError("at least one task needs a positive quantity")
    spans = w * y
    return DurationInterval(float(spans.max()), float(spans.sum()))


def occupation_duration(task_quantities: ArrayLike, task_times: ArrayLike, rho: float) -> float:
    """Point inside the occupation's interval: ``rho=0`` fully serial, ``rho=1`` fully parallel."""
    if not (0.0 <= rho <= 1.0):
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    b = occupation_duration_bounds(task_quantities, task_times)
    return (1.0 - rho) * b.upper + rho * b.lower


def _occupation_durations(inst: SchedulingInstance) -> NDArray[np.float64]:
    return np.array(
        [occupation_duration(row, inst.task_times, inst.parallelism) for row in inst.compositions]
    )


def cycle_bounds_occupation(inst: SchedulingInstance) -> DurationInterval:
    spans = _occupation_durations(inst) * inst.counts
    return DurationInterval(float(spans.max()), float(spans.sum()))


def cycle_bounds_task(inst: SchedulingInstance) -> DurationInterval:
    spans = inst.task_times * inst.task_totals()
    return DurationInterval(float(spans.max()), float(spans.sum()))


def check_cycle_dominance(inst: SchedulingInstance) -> bool:
    """Occupation-level bounds are no shorter than task-level bounds (serial regime only)."""
    if inst.parallelism != 0.0:
        raise InapplicableRegimeError(
            f"cycle dominance is only checked at parallelism 0, got {inst.parallelism}"
        )
    occ = cycle_bounds_occupation(inst)
    task = cycle_bounds_task(inst)
    eps = _REL_EPS * max(1.0, occ.upper, task.upper)
    return occ.upper >= task.upper - eps and occ.lower >= task.lower - eps


def random_matching_instance(
    rng: np.random.Generator,
    max_employees: int = 5,
    max_tasks: int = 6,
    max_skills: int = 4,
    signed_values: bool = False,
) -> MatchingInstance:
    n = int(rng.integers(1, max_employees + 1))
    q = int(rng.integers(1, max_tasks + 1))
    i = int(rng.integers(1, max_skills + 1))
    employees = rng.uniform(0.0, 2.0, size=(n, i))
    matrix = rng.uniform(0.0, 1.0, size=(i, q))
    tasks = rng.uniform(0.0, 2.0, size=q)
    lo = -1.0 if signed_values else 0.0
    values = rng.uniform(lo, 1.0, size=q)
    return MatchingInstance(employees, TaskVector(tasks), MatchingMatrix(matrix), TaskValueVector(values))


def random_scheduling_instance(
    rng: np.random.Generator,
    max_occupations: int = 5,
    max_task_types: int = 6,
    max_count: int = 4,
    max_quantity: int = 3,
) -> SchedulingInstance:
    """Random serial-regime instance in which every task type belongs to one occupation."""
    n_types = int(rng.integers(1, max_task_types + 1))
    n_occ = int(rng.integers(1, min(max_occupations, n_types) + 1))
    # every occupation owns at least one task type
    owner = np.concatenate([np.arange(n_occ), rng.integers(0, n_occ, size=n_types - n_occ)])
    rng.shuffle(owner)
    comp = np.zeros((n_occ, n_types))
    comp[owner, np.arange(n_types)] = rng.integers(1, max_quantity + 1, size=n_types)
    counts = rng.integers(1, max_count + 1, size=n_occ)
    times = rng.uniform(0.1, 5.0, size=n_types)
    return SchedulingInstance(comp, counts, times, 0.0)


def scheduling_instance_from_occupations(
    occupations: Sequence[tuple[ArrayLike, int]], task_times: ArrayLike, parallelism: float = 0.0
) -> SchedulingInstance:
    comp = [np.asarray(c, dtype=np.float64) for c, _ in occupations]
    counts = [d for _, d in occupations]
    return SchedulingInstance(np.array(comp), np.array(counts), np.asarray(task_times), parallelism)
