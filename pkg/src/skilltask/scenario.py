"""Seeded synthetic scenarios: an ideal matching matrix, skill supply, demand shocks, prices.

Randomness is derived from ``(seed, stream, period)`` through
:class:`numpy.random.SeedSequence` feeding a Philox counter-based generator,
so any period can be queried in any order and always yields the same draw.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .production import (
    MatchingMatrix,
    SkillVector,
    TaskValueVector,
    TaskVector,
    task_output,
)

__all__ = [
    "ScenarioSpec",
    "Scenario",
    "generate_scenario",
    "apply_shock",
    "period_inputs",
    "stream",
]

# stream tags keep construction draws and per-period shocks independent
_STREAM_SETUP = 0
_STREAM_SHOCK = 1
_UINT64_MAX = 2**64 - 1


def stream(seed: int, *key: int) -> np.random.Generator:
    """Philox generator keyed by ``seed`` and an arbitrary integer path."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


@dataclass(frozen=True)
class ScenarioSpec:
    """Scenario parameters.

    ``price`` is either one positive number or one per period.  ``skills`` and
    ``skill_path`` optionally pin the base skill supply or a per-period supply;
    otherwise the base supply is drawn from the seed and held constant.
    """

    skills_dim: int
    tasks_dim: int
    periods: int = 10_000
    price: float | tuple[float, ...] = 1.0
    expected_quantity: float = 1.0
    shock_sigma: float = 0.0
    seed: int = 0
    ideal_matrix: tuple[tuple[float, ...], ...] | None = None
    skills: SkillVector | None = None
    skill_path: tuple[SkillVector, ...] | None = None

    def __post_init__(self) -> None:
        for name in ("skills_dim", "tasks_dim", "periods"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {v!r}")
        if isinstance(self.price, (int, float, np.number)):
            if not (np.isfinite(self.price) and self.price > 0):
                raise ValueError(f"price must be positive, got {self.price!r}")
        else:
            prices = tuple(float(p) for p in self.price)
            if len(prices) != self.periods:
                raise ValueError(
                    f"price sequence has {len(prices)} entries for {self.periods} periods"
                )
            if not all(np.isfinite(p) and p > 0 for p in prices):
                raise ValueError("every price must be positive")
            object.__setattr__(self, "price", prices)
        if not (np.isfinite(self.expected_quantity) and self.expected_quantity > 0):
            raise ValueError(f"expected_quantity must be positive, got {self.expected_quantity!r}")
        if not (np.isfinite(self.shock_sigma) and self.shock_sigma >= 0):
            raise ValueError(f"shock_sigma must be >= 0, got {self.shock_sigma!r}")
        if isinstance(self.seed, bool) or not (0 <= int(self.seed) <= _UINT64_MAX) or int(self.seed) != self.seed:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.ideal_matrix is not None:
            a = np.asarray(self.ideal_matrix, dtype=np.float64)
            if a.shape != (self.skills_dim, self.tasks_dim):
                raise ValueError(
                    f"ideal_matrix has shape {a.shape}, expected ({self.skills_dim}, {self.tasks_dim})"
                )
            MatchingMatrix(a)  # validates nonnegativity
            object.__setattr__(self, "ideal_matrix", tuple(tuple(map(float, r)) for r in a))
        if self.skills is not None and len(self.skills) != self.skills_dim:
            raise ValueError(f"skills has length {len(self.skills)}, expected {self.skills_dim}")
        if self.skill_path is not None:
            path = tuple(self.skill_path)
            if len(path) != self.periods:
                raise ValueError(f"skill_path has {len(path)} entries for {self.periods} periods")
            if any(len(s) != self.skills_dim for s in path):
                raise ValueError(f"every skill_path entry must have length {self.skills_dim}")
            object.__setattr__(self, "skill_path", path)

    def price_at(self, t: int) -> float:
        if isinstance(self.price, tuple):
            return self.price[t]
        return float(self.price)


@dataclass(frozen=True)
class Scenario:
    spec: ScenarioSpec
    ideal: MatchingMatrix
    base_skills: SkillVector
    base_tasks: TaskVector = field(init=False)

    def __post_init__(self) -> None:
        if self.ideal.shape != (self.spec.skills_dim, self.spec.tasks_dim):
            raise ValueError("ideal matrix shape does not match the spec dimensions")
        if len(self.base_skills) != self.spec.skills_dim:
            raise ValueError("base skills length does not match skills_dim")
        object.__setattr__(
            self, "base_tasks", TaskVector(task_output(self.base_skills, self.ideal).quantities)
        )

    def initial_values(self) -> TaskValueVector:
        """Uniform task values pricing the base plan at ``price_0 * expected_quantity``."""
        planned = float(self.base_tasks.quantities.sum())
        income = self.spec.price_at(0) * self.spec.expected_quantity
        per_task = income / planned if planned > 0 else 0.0
        return TaskValueVector(np.full(self.spec.tasks_dim, per_task))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.ideal == other.ideal
            and self.base_skills == other.base_skills
        )


def generate_scenario(spec: ScenarioSpec) -> Scenario:
    """Materialize a scenario; identical specs give identical scenarios.

    Missing pieces are drawn from the setup stream: ideal matrix entries
    uniform on [0.1, 1], total skill units per skill uniform on [0.5, 2], and
    each skill's machine share uniform on [0, 1].
    """
    rng = stream(spec.seed, _STREAM_SETUP)
    if spec.ideal_matrix is None:
        ideal = rng.uniform(0.1, 1.0, size=(spec.skills_dim, spec.tasks_dim))
    else:
        ideal = np.asarray(spec.ideal_matrix, dtype=np.float64)
    if spec.skills is None:
        total = rng.uniform(0.5, 2.0, size=spec.skills_dim)
        share = rng.uniform(0.0, 1.0, size=spec.skills_dim)
        machine = total * share
        skills = SkillVector(total - machine, machine)
    else:
        skills = spec.skills
    return Scenario(spec, MatchingMatrix(ideal), skills)


def apply_shock(tasks: TaskVector, sigma: float, rng: np.random.Generator) -> TaskVector:
    """Scale each task quantity by an independent lognormal(0, sigma) factor."""
    if not sigma >= 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if sigma == 0:
        return tasks
    factors = rng.lognormal(0.0, sigma, size=len(tasks))
    return TaskVector(tasks.quantities * factors)


def period_inputs(scenario: Scenario, t: int) -> tuple[TaskVector, SkillVector, float]:
    """Shocked tasks, skill supply and price for period ``t``; pure in ``(seed, t)``."""
    spec = scenario.spec
    if not (0 <= t < spec.periods):
        raise IndexError(f"period {t} outside [0, {spec.periods})")
    tasks = apply_shock(scenario.base_tasks, spec.shock_sigma, stream(spec.seed, _STREAM_SHOCK, t))
    skills = spec.skill_path[t] if spec.skill_path is not None else scenario.base_skills
    return tasks, skills, spec.price_at(t)

