"""``skilltask`` command line: gen, simulate, train, check.

Exit codes: 0 success, 1 I/O failure, 2 invalid configuration or data,
3 a dominance check failed.  Results go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config as cfgio
from .efficiency import (
    InapplicableRegimeError,
    check_cycle_dominance,
    check_matching_dominance,
    cycle_bounds_occupation,
    cycle_bounds_task,
    job_level_value,
    random_matching_instance,
    random_scheduling_instance,
    task_level_value,
)
from .iteration import run_until_converged
from .scenario import generate_scenario
from .trainer import MatchingTrainingSet, train_matching_matrix, train_value_vector

log = logging.getLogger("skilltask")

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_VIOLATION = 0, 1, 2, 3


def _setup_logging() -> None:
    level = os.environ.get("SKILLTASK_LOG", "error").upper()
    if level not in ("ERROR", "INFO", "DEBUG"):
        level = "ERROR"
    logging.basicConfig(
        level=getattr(logging, level), stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s"
    )


def _learning_overrides(run: cfgio.RunConfig, args: argparse.Namespace) -> cfgio.RunConfig:
    changes = {}
    if args.tol is not None:
        changes["tol"] = args.tol
    if args.lr_a is not None:
        changes["lr_matrix"] = args.lr_a
    if args.lr_lambda is not None:
        changes["lr_value"] = args.lr_lambda
    if args.periods is not None:
        changes["max_periods"] = args.periods
    if args.mode is not None:
        changes["matrix_sign_mode"] = args.mode
    if args.value_mode is not None:
        changes["value_update_mode"] = args.value_mode
    scenario = run.scenario
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    if args.periods is not None and not isinstance(scenario.price, tuple) and scenario.skill_path is None:
        scenario = replace(scenario, periods=args.periods)
    return replace(run, scenario=scenario, learning=replace(run.learning, **changes))


def _load_run(args: argparse.Namespace) -> cfgio.RunConfig:
    data = cfgio.load_json(args.config) if args.config else {}
    if isinstance(data, dict) and "scenario" not in data and data:
        data = {"scenario": data}  # bare scenario spec
    run = cfgio.run_config_from_dict(data)
    try:
        return _learning_overrides(run, args)
    except (ValueError, TypeError) as exc:
        raise cfgio.ConfigError(f"command-line override: {exc}") from exc


def cmd_gen(args: argparse.Namespace) -> int:
    run = _load_run(args)
    scenario = generate_scenario(run.scenario)
    doc = cfgio.scenario_to_dict(scenario)
    cfgio.scenario_from_dict(doc)
    out = Path(args.out or "scenario.json")
    cfgio.dump_json(doc, out)
    print(f"wrote scenario ({run.scenario.skills_dim} skills x {run.scenario.tasks_dim} tasks) to {out}")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    run = _load_run(args)
    scenario = generate_scenario(run.scenario)
    state = run.initial_state(scenario)
    trace = run_until_converged(state, scenario, run.learning, run.cost_model())
    prefix = args.out or "run"
    trace_path = Path(f"{prefix}_trace.csv")
    summary_path = Path(f"{prefix}_summary.json")
    with open(trace_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(cfgio.trace_csv(trace))
    cfgio.dump_json(cfgio.trace_summary(trace, run), summary_path)
    verdict = "converged" if trace.converged else ("diverged" if trace.diverged else "not converged")
    print(f"{verdict} after {trace.updates} recalibration period(s); {len(trace.records)} trace rows")
    print(f"trace: {trace_path}\nsummary: {summary_path}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    run_learning = cfgio.learning_from_dict({})
    if args.config:
        data = cfgio.load_json(args.config)
        if isinstance(data, dict) and "learning" in data:
            data = data["learning"]
        run_learning = cfgio.learning_from_dict(data)
    changes = {}
    for flag, key in (("tol", "tol"), ("lr_a", "lr_matrix"), ("lr_lambda", "lr_value"), ("periods", "max_periods")):
        if getattr(args, flag) is not None:
            changes[key] = getattr(args, flag)
    try:
        learning = replace(run_learning, **changes)
    except (ValueError, TypeError) as exc:
        raise cfgio.ConfigError(f"command-line override: {exc}") from exc
    dataset = cfgio.read_dataset(args.dataset, args.target)
    seed = args.seed or 0
    try:
        if isinstance(dataset, MatchingTrainingSet):
            params, report = train_matching_matrix(dataset, None, learning, seed=seed)
        else:
            params, report = train_value_vector(dataset, None, learning, seed=seed)
    except FloatingPointError as exc:
        raise cfgio.ConfigError(str(exc)) from exc
    out = Path(args.out or f"fit_{args.target}.json")
    cfgio.dump_json(cfgio.training_result_to_dict(args.target, params, report), out)
    state = "converged" if report.converged else "stopped at epoch cap"
    print(f"{state} after {report.epochs_run} epoch(s); final loss {report.final_loss!r}; wrote {out}")
    return EXIT_OK


def _load_instances(path: str, proposition: str) -> list:
    data = cfgio.load_json(path)
    if isinstance(data, dict):
        if "proposition" in data and data["proposition"] != proposition:
            raise cfgio.ConfigError(
                f"{path}: file holds {data['proposition']!r} instances, asked for {proposition!r}"
            )
        data = data.get("instances", [data] if "instances" not in data and "proposition" not in data else [])
    if not isinstance(data, list) or not data:
        raise cfgio.ConfigError(f"{path}: expected a non-empty list of instances")
    if proposition == "matching":
        return [cfgio.matching_instance_from_dict(d, f"instances[{k}]") for k, d in enumerate(data)]
    return [cfgio.scheduling_instance_from_dict(d, f"instances[{k}]") for k, d in enumerate(data)]


def cmd_check(args: argparse.Namespace) -> int:
    if args.instances:
        instances = _load_instances(args.instances, args.proposition)
        verbose = True
    else:
        rng = np.random.default_rng(args.seed if args.seed is not None else 0)
        make = random_matching_instance if args.proposition == "matching" else random_scheduling_instance
        instances = [make(rng) for _ in range(args.trials)]
        verbose = args.verbose

    passed = 0
    for k, inst in enumerate(instances):
        if args.proposition == "matching":
            ok = check_matching_dominance(inst)
            if verbose or not ok:
                task, job = task_level_value(inst), job_level_value(inst)
                print(
                    f"instance {k}: {'pass' if ok else 'FAIL'} task-level {task.value!r} "
                    f"(assignment {list(task.assignment)}) >= job-level {job.value!r} (employee {job.employee})"
                )
        else:
            try:
                ok = check_cycle_dominance(inst)
            except InapplicableRegimeError as exc:
                raise cfgio.ConfigError(f"instance {k}: {exc}") from exc
            if verbose or not ok:
                occ, task = cycle_bounds_occupation(inst), cycle_bounds_task(inst)
                print(
                    f"instance {k}: {'pass' if ok else 'FAIL'} occupation [{occ.lower!r}, {occ.upper!r}] "
                    f"vs task [{task.lower!r}, {task.upper!r}]"
                )
        passed += ok
    print(f"{passed}/{len(instances)} pass")
    return EXIT_OK if passed == len(instances) else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--tol", type=float, metavar="X")
    common.add_argument("--lr-a", type=float, metavar="X")
    common.add_argument("--lr-lambda", type=float, metavar="X")
    common.add_argument("--periods", type=int, metavar="N")
    common.add_argument("--mode", choices=("descent", "paper-literal"))
    common.add_argument("--value-mode", choices=("exact-gradient", "paper-delta"))

    parser = argparse.ArgumentParser(prog="skilltask", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="materialize a scenario to JSON")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("simulate", parents=[common], help="run the iteration loop, write trace + summary")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", parents=[common], help="fit A or lambda from a CSV dataset")
    p.add_argument("dataset", metavar="DATASET")
    p.add_argument("target", choices=("matrix", "value"))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("check", parents=[common], help="dominance checks on instance files or random trials")
    p.add_argument("proposition", choices=("matching", "cycle"))
    p.add_argument("--instances", metavar="PATH")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("-v", "--verbose", action="store_true", help="print every random trial")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except cfgio.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
