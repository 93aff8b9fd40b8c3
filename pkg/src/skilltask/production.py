"""Production mapping, income/cost accounting and the task-level profit gap.

Skills flow through the matching matrix into realized task outputs
(``y_hat = x @ A``).  Income is valued with the task value vector, and the
difference between planned and realized income decomposes task by task into
the profit gap vector.

All containers are frozen dataclasses over read-only float arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "DimensionError",
    "SkillVector",
    "TaskVector",
    "TaskOutputVector",
    "MatchingMatrix",
    "TaskValueVector",
    "CostModel",
    "ProfitGapVector",
    "task_output",
    "expected_income",
    "actual_income",
    "cost",
    "profits",
    "profit_gap",
    "unit_matching_check",
]


class DimensionError(ValueError):
    """Raised when vector or matrix shapes do not line up."""


def _as_array(
    data: ArrayLike, name: str, ndim: int = 1, nonnegative: bool = False
) -> NDArray[np.float64]:
    arr = np.array(data, dtype=np.float64)
    if arr.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if arr.size == 0 or min(arr.shape) < 1:
        raise DimensionError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must contain only finite values")
    if nonnegative and np.any(arr < 0):
        raise ValueError(f"{name} must be nonnegative")
    arr.setflags(write=False)
    return arr


def _check_len(a: NDArray, b: NDArray, what: str) -> None:
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"{what}: length {a.shape[0]} != {b.shape[0]}")


@dataclass(frozen=True, eq=False)
class SkillVector:
    """Skill units supplied by workers (``labor``) and by machines (``machine``)."""

    labor: NDArray[np.float64]
    machine: NDArray[np.float64]

    def __post_init__(self) -> None:
        labor = _as_array(self.labor, "labor", nonnegative=True)
        machine = _as_array(self.machine, "machine", nonnegative=True)
        _check_len(labor, machine, "labor vs machine skills")
        object.__setattr__(self, "labor", labor)
        object.__setattr__(self, "machine", machine)

    @classmethod
    def from_total(cls, total: ArrayLike) -> SkillVector:
        """All skill units attributed to labor; no machine share."""
        arr = np.asarray(total, dtype=np.float64)
        return cls(arr, np.zeros_like(arr))

    @property
    def total(self) -> NDArray[np.float64]:
        return self.labor + self.machine

    def __len__(self) -> int:
        return self.labor.shape[0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SkillVector):
            return NotImplemented
        return np.array_equal(self.labor, other.labor) and np.array_equal(
            self.machine, other.machine
        )


@dataclass(frozen=True, eq=False)
class _Vector:
    """Shared plumbing for one-dimensional task-indexed vectors."""

    def _data(self) -> NDArray[np.float64]:
        raise NotImplementedError

    def __len__(self) -> int:
        return self._data().shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self._data(), dtype=dtype)

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return np.array_equal(self._data(), other._data())  # type: ignore[attr-defined]


@dataclass(frozen=True, eq=False)
class TaskVector(_Vector):
    """Expected (planned) task quantities ``y``; zero marks an inessential task."""

    quantities: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "quantities", _as_array(self.quantities, "task quantities", nonnegative=True)
        )

    def _data(self) -> NDArray[np.float64]:
        return self.quantities


@dataclass(frozen=True, eq=False)
class TaskOutputVector(_Vector):
    """Realized task outputs ``y_hat``."""

    quantities: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "quantities", _as_array(self.quantities, "task outputs", nonnegative=True)
        )

    def _data(self) -> NDArray[np.float64]:
        return self.quantities


@dataclass(frozen=True, eq=False)
class TaskValueVector(_Vector):
    """Per-task value weights; any sign allowed."""

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _as_array(self.values, "task values"))

    def _data(self) -> NDArray[np.float64]:
        return self.values


@dataclass(frozen=True, eq=False)
class ProfitGapVector(_Vector):
    """Per-task profit gaps ``lambda_v * (y_v - y_hat_v)``."""

    gaps: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "gaps", _as_array(self.gaps, "profit gaps"))

    def _data(self) -> NDArray[np.float64]:
        return self.gaps

    def max_norm(self) -> float:
        return float(np.max(np.abs(self.gaps)))

    def total(self) -> float:
        return float(np.sum(self.gaps))


@dataclass(frozen=True, eq=False)
class MatchingMatrix:
    """Nonnegative skills x tasks matrix; row ``u`` is skill ``u``, column ``v`` task ``v``."""

    entries: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "entries", _as_array(self.entries, "matching matrix", ndim=2, nonnegative=True)
        )

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape  # type: ignore[return-value]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MatchingMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)


@dataclass(frozen=True, eq=False)
class CostModel:
    """Per-skill machine prices, wages, fixed-investment coefficients and financing terms.

    Fixed investment is linear in machine skills, ``F(x_k) = fixed_coeff @ x_k``,
    discounted by ``(1 + interest_rate) * depreciation``.
    """

    machine_price: NDArray[np.float64]
    wage: NDArray[np.float64]
    fixed_coeff: NDArray[np.float64] | None = None
    interest_rate: float = 0.0
    depreciation: float = 1.0

    def __post_init__(self) -> None:
        d = _as_array(self.machine_price, "machine_price", nonnegative=True)
        w = _as_array(self.wage, "wage", nonnegative=True)
        phi = (
            np.zeros_like(d)
            if self.fixed_coeff is None
            else _as_array(self.fixed_coeff, "fixed_coeff", nonnegative=True)
        )
        phi.setflags(write=False)
        _check_len(d, w, "machine_price vs wage")
        _check_len(d, phi, "machine_price vs fixed_coeff")
        if not np.isfinite(self.interest_rate) or self.interest_rate < 0:
            raise ValueError("interest_rate must be >= 0")
        if not (0 < self.depreciation <= 1):
            raise ValueError("depreciation must lie in (0, 1]")
        object.__setattr__(self, "machine_price", d)
        object.__setattr__(self, "wage", w)
        object.__setattr__(self, "fixed_coeff", phi)
        object.__setattr__(self, "interest_rate", float(self.interest_rate))
        object.__setattr__(self, "depreciation", float(self.depreciation))

    @classmethod
    def zero(cls, skills_dim: int) -> CostModel:
        z = np.zeros(skills_dim)
        return cls(z, z)

    def __len__(self) -> int:
        return self.machine_price.shape[0]


def task_output(skills: SkillVector, matrix: MatchingMatrix) -> TaskOutputVector:
    """Realized outputs ``y_hat[v] = sum_u x_u * a_uv`` with ``x = labor + machine``."""
    if len(skills) != matrix.shape[0]:
        raise DimensionError(
            f"skills length {len(skills)} does not match matrix rows {matrix.shape[0]}"
        )
    with np.errstate(over="ignore"):
        out = skills.total @ matrix.entries
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("task output overflowed")
    # nonnegative inputs give nonnegative sums; clip guards the -0.0 corner only
    return TaskOutputVector(np.maximum(out, 0.0))


def expected_income(values: TaskValueVector, tasks: TaskVector) -> float:
    _check_len(values.values, tasks.quantities, "values vs tasks")
    return float(values.values @ tasks.quantities)


def actual_income(values: TaskValueVector, output: TaskOutputVector) -> float:
    _check_len(values.values, output.quantities, "values vs outputs")
    return float(values.values @ output.quantities)


def cost(model: CostModel, skills: SkillVector) -> float:
    """Period cost ``d @ x_k + w @ x_l + F(x_k) / ((1 + r) * delta)``."""
    if len(model) != len(skills):
        raise DimensionError(f"cost model length {len(model)} != skills length {len(skills)}")
    fixed = float(model.fixed_coeff @ skills.machine)
    return (
        float(model.machine_price @ skills.machine)
        + float(model.wage @ skills.labor)
        + fixed / ((1.0 + model.interest_rate) * model.depreciation)
    )


def profits(
    price: float, expected_quantity: float, income_actual: float, total_cost: float
) -> tuple[float, float]:
    """Return ``(expected_profit, actual_profit)``.

    Actual revenue is the valued output ``income_actual`` (price times the
    scalar actual quantity ``income_actual / price``).
    """
    if not price > 0:
        raise ValueError(f"price must be positive, got {price}")
    return price * expected_quantity - total_cost, income_actual - total_cost


def profit_gap(
    values: TaskValueVector, tasks: TaskVector, output: TaskOutputVector
) -> ProfitGapVector:
    _check_len(values.values, tasks.quantities, "values vs tasks")
    _check_len(tasks.quantities, output.quantities, "tasks vs outputs")
    return ProfitGapVector(values.values * (tasks.quantities - output.quantities))


def unit_matching_check(skills: SkillVector, matrix: MatchingMatrix, tol: float = 1e-9) -> bool:
    """Diagnostic: does ``x @ A`` equal the all-ones vector within ``tol``?

    Never enforced while learning; a recalibrating firm violates it routinely.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    out = task_output(skills, matrix).quantities
    return bool(np.all(np.abs(out - 1.0) <= tol))
