"""Batch fitting of the matching matrix and the task value vector.

Both fits are a single linear layer with no bias and identity activation,
trained online: one epoch walks the samples in order and applies a delta-rule
step after each one.  Training stops once the largest single-sample step in
an epoch drops below ``cfg.tol``, or after ``cfg.max_periods`` epochs.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .iteration import LearningConfig
from .production import (
    DimensionError,
    MatchingMatrix,
    SkillVector,
    TaskValueVector,
    TaskVector,
)

__all__ = [
    "EmptyTrainingSetError",
    "MatchingTrainingSet",
    "ValueTrainingSet",
    "TrainingReport",
    "train_matching_matrix",
    "train_value_vector",
]


class EmptyTrainingSetError(ValueError):
    pass


@dataclass(frozen=True)
class MatchingTrainingSet:
    """Pairs of (skill supply, planned tasks)."""

    samples: tuple[tuple[SkillVector, TaskVector], ...]

    def __post_init__(self) -> None:
        samples = tuple(self.samples)
        if not samples:
            raise EmptyTrainingSetError("matching training set is empty")
        i, j = len(samples[0][0]), len(samples[0][1])
        for k, (x, y) in enumerate(samples):
            if len(x) != i or len(y) != j:
                raise DimensionError(
                    f"sample {k} has dims ({len(x)}, {len(y)}), expected ({i}, {j})"
                )
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_arrays(cls, xs: Sequence, ys: Sequence) -> MatchingTrainingSet:
        if len(xs) != len(ys):
            raise DimensionError(f"{len(xs)} skill rows but {len(ys)} task rows")
        return cls(tuple((SkillVector.from_total(x), TaskVector(y)) for x, y in zip(xs, ys)))

    @property
    def dims(self) -> tuple[int, int]:
        x, y = self.samples[0]
        return len(x), len(y)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        xs = np.array([x.total for x, _ in self.samples])
        ys = np.array([y.quantities for _, y in self.samples])
        return xs, ys


@dataclass(frozen=True)
class ValueTrainingSet:
    """Pairs of (planned tasks, expected income)."""

    samples: tuple[tuple[TaskVector, float], ...]

    def __post_init__(self) -> None:
        samples = tuple((y, float(income)) for y, income in self.samples)
        if not samples:
            raise EmptyTrainingSetError("value training set is empty")
        j = len(samples[0][0])
        for k, (y, income) in enumerate(samples):
            if len(y) != j:
                raise DimensionError(f"sample {k} has {len(y)} tasks, expected {j}")
            if not np.isfinite(income):
                raise ValueError(f"sample {k} has a non-finite income")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_arrays(cls, ys: Sequence, incomes: Sequence[float]) -> ValueTrainingSet:
        if len(ys) != len(incomes):
            raise DimensionError(f"{len(ys)} task rows but {len(incomes)} incomes")
        return cls(tuple((TaskVector(y), inc) for y, inc in zip(ys, incomes)))

    @property
    def dim(self) -> int:
        return len(self.samples[0][0])

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        ys = np.array([y.quantities for y, _ in self.samples])
        incomes = np.array([inc for _, inc in self.samples])
        return ys, incomes


@dataclass(frozen=True)
class TrainingReport:
    """Epoch count, per-epoch summed loss at the end-of-epoch parameters, stop verdict."""

    epochs_run: int
    final_loss: float
    loss_history: list[float] = field(default_factory=list)
    converged: bool = False


def _matrix_epoch_loss(xs: np.ndarray, ys: np.ndarray, a: np.ndarray) -> float:
    resid = xs @ a - ys
    return 0.5 * float(np.sum(resid * resid))


def _value_epoch_loss(ys: np.ndarray, incomes: np.ndarray, lam: np.ndarray) -> float:
    resid = ys @ lam - incomes
    return 0.5 * float(resid @ resid)


def train_matching_matrix(
    training: MatchingTrainingSet,
    initial: MatchingMatrix | None = None,
    cfg: LearningConfig | None = None,
    seed: int = 0,
) -> tuple[MatchingMatrix, TrainingReport]:
    """Fit ``A`` so that ``x @ A`` reproduces ``y`` across the training set.

    Per sample: ``a_uv -= lr_matrix * (y_hat_v - y_v) * x_u``, clamped at zero.
    Without ``initial``, entries are drawn uniformly from [0, 1] using ``seed``.
    """
    cfg = cfg or LearningConfig()
    i, j = training.dims
    if initial is None:
        a = np.random.default_rng(seed).uniform(0.0, 1.0, size=(i, j))
    else:
        if initial.shape != (i, j):
            raise DimensionError(f"initial matrix {initial.shape} does not match ({i}, {j})")
        a = initial.entries.copy()
    xs, ys = training.arrays()

    history: list[float] = []
    converged = False
    for _ in range(cfg.max_periods):
        largest = 0.0
        for x, y in zip(xs, ys):
            step = cfg.lr_matrix * np.outer(x, x @ a - y)
            new = np.maximum(a - step, 0.0)
            largest = max(largest, float(np.max(np.abs(new - a))))
            a = new
        if not np.all(np.isfinite(a)):
            raise FloatingPointError("matching matrix diverged; lower lr_matrix")
        history.append(_matrix_epoch_loss(xs, ys, a))
        if largest < cfg.tol:
            converged = True
            break
    report = TrainingReport(len(history), history[-1], history, converged)
    return MatchingMatrix(a), report


def train_value_vector(
    training: ValueTrainingSet,
    initial: TaskValueVector | None = None,
    cfg: LearningConfig | None = None,
    seed: int = 0,
) -> tuple[TaskValueVector, TrainingReport]:
    """Fit task values so that ``y @ lam`` reproduces the expected income.

    Per sample: ``lam_v -= lr_value * (I_hat - I) * y_v`` with ``I_hat = y @ lam``.
    """
    cfg = cfg or LearningConfig()
    j = training.dim
    if initial is None:
        lam = np.random.default_rng(seed).uniform(0.0, 1.0, size=j)
    else:
        if len(initial) != j:
            raise DimensionError(f"initial values length {len(initial)} != {j}")
        lam = initial.values.copy()
    ys, incomes = training.arrays()

    history: list[float] = []
    converged = False
    for _ in range(cfg.max_periods):
        largest = 0.0
        for y, income in zip(ys, incomes):
            step = cfg.lr_value * (y @ lam - income) * y
            lam = lam - step
            largest = max(largest, float(np.max(np.abs(step))))
        if not np.all(np.isfinite(lam)):
            raise FloatingPointError("task values diverged; lower lr_value")
        history.append(_value_epoch_loss(ys, incomes, lam))
        if largest < cfg.tol:
            converged = True
            break
    report = TrainingReport(len(history), history[-1], history, converged)
    return TaskValueVector(lam), report
