"""JSON run configuration, scenario/instance files, CSV datasets and trace export.

Run configuration layout (every section optional except ``scenario``)::

    {
      "scenario": {"skills_dim": 3, "tasks_dim": 3, "periods": 5000, "price": 1.0,
                   "expected_quantity": 1.0, "shock_sigma": 0.0, "seed": 7,
                   "ideal_matrix": [[...]], "skills": {"labor": [...], "machine": [...]},
                   "skill_path": [{"labor": [...], "machine": [...]}, ...]},
      "learning": {"lr_matrix": 0.1, "lr_value": 0.1, "matrix_sign_mode": "descent",
                   "value_update_mode": "exact-gradient", "value_schedule": "concurrent",
                   "tol": 1e-8, "max_periods": 10000},
      "cost": {"machine_price": [...], "wage": [...], "fixed_coeff": [...],
               "interest_rate": 0.0, "depreciation": 1.0},
      "initial": {"matrix": [[...]], "values": [...], "seed": 0}
    }

Unknown keys anywhere are rejected.  Floats are written with Python's
shortest round-trip ``repr`` so identical runs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .efficiency import MatchingInstance, SchedulingInstance
from .iteration import ConvergenceTrace, FirmState, LearningConfig
from .production import (
    CostModel,
    MatchingMatrix,
    SkillVector,
    TaskValueVector,
    TaskVector,
)
from .scenario import Scenario, ScenarioSpec, generate_scenario
from .trainer import MatchingTrainingSet, TrainingReport, ValueTrainingSet

TRACE_COLUMNS = (
    "period",
    "E_A",
    "E_lambda",
    "income_expected",
    "income_actual",
    "cost",
    "profit_expected",
    "profit_actual",
    "gap_maxnorm",
)

_SCENARIO_KEYS = {
    "skills_dim", "tasks_dim", "periods", "price", "expected_quantity",
    "shock_sigma", "seed", "ideal_matrix", "skills", "skill_path",
}
_LEARNING_KEYS = {
    "lr_matrix", "lr_value", "matrix_sign_mode", "value_update_mode",
    "value_schedule", "tol", "max_periods",
}
_COST_KEYS = {"machine_price", "wage", "fixed_coeff", "interest_rate", "depreciation"}
_INITIAL_KEYS = {"matrix", "values", "seed"}
_RUN_KEYS = {"scenario", "learning", "cost", "initial"}


class ConfigError(ValueError):
    """Invalid configuration, scenario, instance or dataset content."""


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioSpec
    learning: LearningConfig = field(default_factory=LearningConfig)
    cost: CostModel | None = None
    initial_matrix: MatchingMatrix | None = None
    initial_values: TaskValueVector | None = None
    initial_seed: int = 0

    def cost_model(self) -> CostModel:
        return self.cost or CostModel.zero(self.scenario.skills_dim)

    def initial_state(self, scenario: Scenario) -> FirmState:
        """Configured starting parameters; unset parts come from the seed and the scenario.

        The default matrix is drawn uniformly from [0, 1]; the default task
        values price the base plan at ``price * expected_quantity``.
        """
        i, j = self.scenario.skills_dim, self.scenario.tasks_dim
        matrix = self.initial_matrix
        if matrix is None:
            rng = np.random.default_rng([self.initial_seed, self.scenario.seed])
            matrix = MatchingMatrix(rng.uniform(0.0, 1.0, size=(i, j)))
        values = self.initial_values if self.initial_values is not None else scenario.initial_values()
        return FirmState(0, matrix, values)


def _check_keys(data: Any, allowed: set[str], where: str) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")
    return data


def _wrap(where: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def _skills_from(data: Any, where: str) -> SkillVector:
    d = _check_keys(data, {"labor", "machine"}, where)
    if "labor" not in d:
        raise ConfigError(f"{where}.labor is required")
    labor = d["labor"]
    machine = d.get("machine", [0.0] * len(labor) if isinstance(labor, list) else None)
    return _wrap(where, SkillVector, labor, machine)


def _skills_to(s: SkillVector) -> dict:
    return {"labor": _floats(s.labor), "machine": _floats(s.machine)}


def _floats(arr) -> list:
    return np.asarray(arr, dtype=np.float64).tolist()


def scenario_spec_from_dict(data: Any, where: str = "scenario") -> ScenarioSpec:
    d = dict(_check_keys(data, _SCENARIO_KEYS, where))
    for req in ("skills_dim", "tasks_dim"):
        if req not in d:
            raise ConfigError(f"{where}.{req} is required")
    for key in ("skills_dim", "tasks_dim", "periods", "seed"):
        v = d.get(key)
        if v is not None and (isinstance(v, bool) or not isinstance(v, int) or v < (0 if key == "seed" else 1)):
            raise ConfigError(f"{where}.{key} must be an integer >= {0 if key == 'seed' else 1}, got {v!r}")
    if isinstance(d.get("price"), list):
        d["price"] = tuple(d["price"])
    if d.get("ideal_matrix") is not None:
        d["ideal_matrix"] = tuple(tuple(r) for r in d["ideal_matrix"])
    if d.get("skills") is not None:
        d["skills"] = _skills_from(d["skills"], f"{where}.skills")
    if d.get("skill_path") is not None:
        if not isinstance(d["skill_path"], list):
            raise ConfigError(f"{where}.skill_path must be a list")
        d["skill_path"] = tuple(
            _skills_from(s, f"{where}.skill_path[{k}]") for k, s in enumerate(d["skill_path"])
        )
    return _wrap(where, ScenarioSpec, **d)


def scenario_spec_to_dict(spec: ScenarioSpec) -> dict:
    out: dict[str, Any] = {
        "skills_dim": spec.skills_dim,
        "tasks_dim": spec.tasks_dim,
        "periods": spec.periods,
        "price": list(spec.price) if isinstance(spec.price, tuple) else float(spec.price),
        "expected_quantity": float(spec.expected_quantity),
        "shock_sigma": float(spec.shock_sigma),
        "seed": int(spec.seed),
    }
    if spec.ideal_matrix is not None:
        out["ideal_matrix"] = [list(r) for r in spec.ideal_matrix]
    if spec.skills is not None:
        out["skills"] = _skills_to(spec.skills)
    if spec.skill_path is not None:
        out["skill_path"] = [_skills_to(s) for s in spec.skill_path]
    return out


def learning_from_dict(data: Any, where: str = "learning") -> LearningConfig:
    d = _check_keys(data, _LEARNING_KEYS, where)
    return _wrap(where, LearningConfig, **d)


def learning_to_dict(cfg: LearningConfig) -> dict:
    return {
        "lr_matrix": cfg.lr_matrix,
        "lr_value": cfg.lr_value,
        "matrix_sign_mode": cfg.matrix_sign_mode,
        "value_update_mode": cfg.value_update_mode,
        "value_schedule": cfg.value_schedule,
        "tol": cfg.tol,
        "max_periods": cfg.max_periods,
    }


def cost_from_dict(data: Any, skills_dim: int, where: str = "cost") -> CostModel:
    d = _check_keys(data, _COST_KEYS, where)
    for req in ("machine_price", "wage"):
        if req not in d:
            raise ConfigError(f"{where}.{req} is required")
    model = _wrap(where, CostModel, **d)
    if len(model) != skills_dim:
        raise ConfigError(f"{where}: price vectors have length {len(model)}, expected {skills_dim}")
    return model


def run_config_from_dict(data: Any) -> RunConfig:
    d = _check_keys(data, _RUN_KEYS, "config")
    if "scenario" not in d:
        raise ConfigError("config.scenario is required")
    spec = scenario_spec_from_dict(d["scenario"])
    learning = learning_from_dict(d.get("learning", {}))
    cost_model = cost_from_dict(d["cost"], spec.skills_dim) if "cost" in d else None
    init = _check_keys(d.get("initial", {}), _INITIAL_KEYS, "initial")
    matrix = values = None
    if init.get("matrix") is not None:
        matrix = _wrap("initial.matrix", MatchingMatrix, init["matrix"])
        if matrix.shape != (spec.skills_dim, spec.tasks_dim):
            raise ConfigError(
                f"initial.matrix has shape {matrix.shape}, expected ({spec.skills_dim}, {spec.tasks_dim})"
            )
    if init.get("values") is not None:
        values = _wrap("initial.values", TaskValueVector, init["values"])
        if len(values) != spec.tasks_dim:
            raise ConfigError(f"initial.values has length {len(values)}, expected {spec.tasks_dim}")
    seed = init.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"initial.seed must be a nonnegative integer, got {seed!r}")
    return RunConfig(spec, learning, cost_model, matrix, values, seed)


def load_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def dump_json(obj: Any, path: str | Path) -> None:
    text = json.dumps(obj, indent=2, allow_nan=False) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "spec": scenario_spec_to_dict(scenario.spec),
        "ideal": [_floats(r) for r in scenario.ideal.entries],
        "base_skills": _skills_to(scenario.base_skills),
        "base_tasks": _floats(scenario.base_tasks.quantities),
    }


def scenario_from_dict(data: Any) -> Scenario:
    """Rebuild a materialized scenario and confirm it is internally consistent."""
    d = _check_keys(data, {"spec", "ideal", "base_skills", "base_tasks"}, "scenario file")
    for key in ("spec", "ideal", "base_skills", "base_tasks"):
        if key not in d:
            raise ConfigError(f"scenario file: missing {key}")
    spec = scenario_spec_from_dict(d["spec"], "scenario file.spec")
    ideal = _wrap("scenario file.ideal", MatchingMatrix, d["ideal"])
    skills = _skills_from(d["base_skills"], "scenario file.base_skills")
    scenario = _wrap("scenario file", Scenario, spec, ideal, skills)
    tasks = _wrap("scenario file.base_tasks", TaskVector, d["base_tasks"])
    if tasks != scenario.base_tasks:
        raise ConfigError("scenario file: base_tasks differ from base_skills @ ideal")
    if spec.ideal_matrix is not None and not np.array_equal(spec.ideal_matrix, ideal.entries):
        raise ConfigError("scenario file: ideal differs from spec.ideal_matrix")
    return scenario


def materialize(spec: ScenarioSpec) -> dict:
    return scenario_to_dict(generate_scenario(spec))


# ---------------------------------------------------------------- traces


def _num(x: float) -> str:
    return repr(float(x))


def trace_csv(trace: ConvergenceTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in trace.records:
        w.writerow(
            [
                r.period,
                _num(r.loss_matching),
                _num(r.loss_value),
                _num(r.income_expected),
                _num(r.income_actual),
                _num(r.total_cost),
                _num(r.profit_expected),
                _num(r.profit_actual),
                _num(r.gap_maxnorm),
            ]
        )
    return buf.getvalue()


def trace_summary(trace: ConvergenceTrace, cfg: RunConfig) -> dict:
    last = trace.records[-1] if trace.records else None
    state = trace.final_state
    return {
        "converged": trace.converged,
        "diverged": trace.diverged,
        "periods": trace.updates,
        "records": len(trace.records),
        "converged_period": trace.converged_period,
        "final_period": state.period if state else 0,
        "final_E_A": last.loss_matching if last else None,
        "final_E_lambda": last.loss_value if last else None,
        "final_gap_maxnorm": last.gap_maxnorm if last else None,
        "final_matrix": [_floats(r) for r in state.matrix.entries] if state else None,
        "final_values": _floats(state.values.values) if state else None,
        "learning": learning_to_dict(cfg.learning),
    }


def read_trace_csv(path: str | Path) -> list[dict[str, float]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
            raise ConfigError(f"{path}: unexpected trace columns {reader.fieldnames}")
        return [
            {k: (int(v) if k == "period" else float(v)) for k, v in row.items()} for row in reader
        ]


# ---------------------------------------------------------------- datasets


def _parse_cell(text: str, row: int, col: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"row {row}: column {col + 1} is not a number ({text!r})") from None
    if not math.isfinite(value):
        raise ConfigError(f"row {row}: column {col + 1} is not finite")
    return value


def read_dataset(path: str | Path, mode: str) -> MatchingTrainingSet | ValueTrainingSet:
    """Parse a training CSV.

    Matrix mode header: ``x_1..x_i,y_1..y_j``.  Value mode header: ``y_1..y_j,I``.
    Rows are numbered from 1 for the first data row.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise ConfigError(f"{path}: dataset is empty")
    header = [h.strip() for h in rows[0]]
    data = rows[1:]
    if not data:
        raise ConfigError(f"{path}: dataset has a header but no samples")
    width = len(header)
    parsed = []
    for n, row in enumerate(data, start=1):
        if len(row) != width:
            raise ConfigError(f"{path}: row {n} has {len(row)} fields, header has {width}")
        parsed.append([_parse_cell(c.strip(), n, k) for k, c in enumerate(row)])
    table = np.array(parsed)

    if mode == "matrix":
        xcols = [k for k, h in enumerate(header) if h.startswith("x_")]
        ycols = [k for k, h in enumerate(header) if h.startswith("y_")]
        if not xcols or not ycols or len(xcols) + len(ycols) != width or max(xcols) > min(ycols):
            raise ConfigError(f"{path}: matrix-mode header must be x_1..x_i,y_1..y_j")
        try:
            return MatchingTrainingSet.from_arrays(table[:, xcols], table[:, ycols])
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if mode == "value":
        ycols = [k for k, h in enumerate(header) if h.startswith("y_")]
        if header[-1] != "I" or len(ycols) != width - 1:
            raise ConfigError(f"{path}: value-mode header must be y_1..y_j,I")
        try:
            return ValueTrainingSet.from_arrays(table[:, ycols], table[:, -1])
        except ValueError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    raise ConfigError(f"unknown training mode {mode!r}")


def write_dataset(path: str | Path, xs_or_ys, targets, mode: str) -> None:
    xs_or_ys = np.atleast_2d(np.asarray(xs_or_ys, dtype=np.float64))
    targets = np.asarray(targets, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if mode == "matrix":
            targets = np.atleast_2d(targets)
            i, j = xs_or_ys.shape[1], targets.shape[1]
            w.writerow([f"x_{k + 1}" for k in range(i)] + [f"y_{k + 1}" for k in range(j)])
            for x, y in zip(xs_or_ys, targets):
                w.writerow([_num(v) for v in x] + [_num(v) for v in y])
        else:
            j = xs_or_ys.shape[1]
            w.writerow([f"y_{k + 1}" for k in range(j)] + ["I"])
            for y, inc in zip(xs_or_ys, targets):
                w.writerow([_num(v) for v in y] + [_num(inc)])


def training_result_to_dict(mode: str, params, report: TrainingReport) -> dict:
    key = "matrix" if mode == "matrix" else "values"
    body = [_floats(r) for r in params.entries] if mode == "matrix" else _floats(params.values)
    return {
        "mode": mode,
        key: body,
        "report": {
            "epochs_run": report.epochs_run,
            "final_loss": report.final_loss,
            "loss_history": list(report.loss_history),
            "converged": report.converged,
        },
    }


# ---------------------------------------------------------------- instances


def matching_instance_from_dict(data: Any, where: str) -> MatchingInstance:
    d = _check_keys(data, {"employees", "tasks", "matrix", "values"}, where)
    for key in ("employees", "matrix", "values"):
        if key not in d:
            raise ConfigError(f"{where}.{key} is required")
    matrix = _wrap(f"{where}.matrix", MatchingMatrix, d["matrix"])
    q = matrix.shape[1]
    tasks = _wrap(f"{where}.tasks", TaskVector, d.get("tasks", [0.0] * q))
    values = _wrap(f"{where}.values", TaskValueVector, d["values"])
    return _wrap(where, MatchingInstance, d["employees"], tasks, matrix, values)


def scheduling_instance_from_dict(data: Any, where: str) -> SchedulingInstance:
    d = _check_keys(data, {"occupations", "task_times", "parallelism"}, where)
    if "occupations" not in d or "task_times" not in d:
        raise ConfigError(f"{where}: occupations and task_times are required")
    occs = d["occupations"]
    if not isinstance(occs, list) or not occs:
        raise ConfigError(f"{where}.occupations must be a non-empty list")
    comps, counts = [], []
    for k, occ in enumerate(occs):
        o = _check_keys(occ, {"tasks", "count"}, f"{where}.occupations[{k}]")
        if "tasks" not in o:
            raise ConfigError(f"{where}.occupations[{k}].tasks is required")
        count = o.get("count", 1)
        if isinstance(count, bool) or not isinstance(count, int):
            raise ConfigError(f"{where}.occupations[{k}].count must be an integer")
        comps.append(o["tasks"])
        counts.append(count)
    try:
        comp = np.array(comps, dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"{where}: occupation task rows must have equal length") from exc
    return _wrap(
        where, SchedulingInstance, comp, np.array(counts), d["task_times"], float(d.get("parallelism", 0.0))
    )

