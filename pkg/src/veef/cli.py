"""Command-line front end.

Subcommands: evolve, optimize, prep, sweep, fit, subarea.  Each takes an
optional JSON config file (ExperimentConfig fields) plus flag overrides;
every stochastic command requires an explicit seed (flag or config key), so
there is no hidden entropy.  Any failed run in a sweep makes the exit code
nonzero.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .evolution import evolve
from .harness import (ExperimentConfig, fit_velocity, load_schedule, run_scenario,
                      saturation_subarea_experiment, save_report, save_timeline,
                      sweep_final_entropy)
from .optimizer import OptimizeConfig, optimize_state_prep

_CONFIG_OVERRIDES = {
    "model": "model",
    "n": "n_sites",
    "T": "total_time",
    "scenario": "scenario",
    "seed": "seed",
    "slice_dt": "slice_dt",
    "substeps": "substeps",
    "out": "output_dir",
    "label": "label",
}


def _add_common(p: argparse.ArgumentParser, scenario_default: str | None = None):
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--model", choices=["ising", "xy", "heisenberg", "random"])
    p.add_argument("--n", type=int, help="number of sites (even)")
    p.add_argument("--T", type=float, help="total evolution time")
    p.add_argument("--t-list", help="comma-separated evolution times (sweep/subarea)")
    p.add_argument("--slice-dt", type=float, dest="slice_dt")
    p.add_argument("--substeps", type=int)
    p.add_argument("--seed", type=int, help="master seed (required unless in config)")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--out", help="output directory")
    p.add_argument("--label", help="output file prefix")
    if scenario_default is not None:
        p.add_argument("--scenario", choices=["zero", "constant", "random"],
                       default=scenario_default)


def _build_config(args, scenario: str | None, require_seed: bool = True) -> ExperimentConfig:
    raw: dict = {}
    if args.config:
        with open(args.config) as fh:
            raw = json.load(fh)
    seed_given = "seed" in raw or args.seed is not None
    if require_seed and not seed_given:
        raise SystemExit("a --seed (or a 'seed' config key) is required for this command")
    for flag, key in _CONFIG_OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            raw[key] = value
    if getattr(args, "t_list", None):
        raw["t_list"] = [float(x) for x in args.t_list.split(",")]
    if scenario is not None:
        raw["scenario"] = scenario
    opt = dict(raw.get("optimizer", {}))
    if args.max_iters is not None:
        opt["max_iters"] = args.max_iters
    if args.learning_rate is not None:
        opt["learning_rate"] = args.learning_rate
    if opt:
        raw["optimizer"] = opt
    return ExperimentConfig.from_dict(raw)


def _emit(payload: dict):
    print(json.dumps(payload, indent=2, default=str))


def cmd_evolve(args) -> int:
    config = _build_config(args, scenario=None)
    if args.schedule:
        schedule = load_schedule(args.schedule)
        graph = config.build_graph()
        initial = config.initial_state()
        final, timeline = evolve(initial, graph, schedule, schedule.grid,
                                 record_entropy=True)
        if config.output_dir:
            import os
            os.makedirs(config.output_dir, exist_ok=True)
            path = os.path.join(config.output_dir, f"{config.label}_replay_timeline.csv")
            save_timeline(path, timeline)
        _emit({"final_entropy_bits": float(timeline.entropies[-1]),
               "T": schedule.grid.total_time})
        return 0
    if config.scenario == "veef":
        raise SystemExit("use the 'optimize' subcommand for veef runs")
    result = run_scenario(config)
    _emit({"final_entropy_bits": float(result.timeline.entropies[-1]),
           "scenario": config.scenario, "outputs": result.output_paths})
    return 0


def cmd_optimize(args) -> int:
    config = _build_config(args, scenario="veef")
    result = run_scenario(config)
    report = result.report
    _emit({"best_entropy_bits": report.best_objective,
           "iterations": report.iterations_run,
           "converged": report.converged,
           "outputs": result.output_paths})
    return 0


def cmd_prep(args) -> int:
    config = _build_config(args, scenario="veef")
    target_schedule = load_schedule(args.target_schedule)
    graph = config.build_graph()
    initial = config.initial_state()
    target, _ = evolve(initial, graph, target_schedule, target_schedule.grid)
    grid = config.grid_for(config.total_time)
    report = optimize_state_prep(initial, target, graph, grid, config=config.optimizer)
    if config.output_dir:
        import os
        os.makedirs(config.output_dir, exist_ok=True)
        from .harness import save_schedule
        save_schedule(os.path.join(config.output_dir, f"{config.label}_prep_schedule.json"),
                      report.final_schedule)
    _emit({"final_infidelity": report.best_objective,
           "iterations": report.iterations_run,
           "converged": report.converged})
    return 0


def cmd_sweep(args) -> int:
    config = _build_config(args, scenario="veef")
    result = sweep_final_entropy(config)
    _emit({"points": [[t, s] for t, s in result.points],
           "failures": [[t, m] for t, m in result.failures],
           "outputs": result.output_paths})
    return 0 if result.ok else 1


def cmd_fit(args) -> int:
    if args.input.endswith(".json"):
        raise SystemExit("fit expects a CSV timeline or sweep file")
    # works for both timeline (t, S) and sweep (T, S, seed) files
    import numpy as np
    data = np.loadtxt(args.input, delimiter=",", skiprows=1, ndmin=2)
    timeline = list(zip(data[:, 0], data[:, 1]))
    t_window = None
    if args.t_min is not None or args.t_max is not None:
        t_window = (args.t_min if args.t_min is not None else -float("inf"),
                    args.t_max if args.t_max is not None else float("inf"))
    s_window = None
    if args.s_min is not None or args.s_max is not None:
        s_window = (args.s_min, args.s_max)
    fit = fit_velocity(timeline, t_window=t_window, s_window=s_window,
                       min_points=args.min_points)
    _emit(dataclasses.asdict(fit))
    return 0


def cmd_subarea(args) -> int:
    config = _build_config(args, scenario="veef")
    report = saturation_subarea_experiment(config)
    _emit({
        "final_entropies": {str(t): s for t, s in report.final_entropies.items()},
        "pairwise_fidelities": {f"{a}|{b}": f
                                for (a, b), f in report.pairwise_fidelities.items()},
        "prep_infidelities": {f"{a}|{b}": f
                              for (a, b), f in report.prep_infidelities.items()},
    })
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="veef",
        description="Optimal control of entanglement growth in spin-1/2 lattices")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="evolve a baseline scenario or a stored schedule")
    _add_common(p, scenario_default="zero")
    p.add_argument("--schedule", help="stored schedule JSON to replay")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("optimize", help="optimize an entanglement-maximizing schedule")
    _add_common(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("prep", help="optimize fields that prepare a stored target state")
    _add_common(p)
    p.add_argument("--target-schedule", required=True,
                   help="schedule JSON whose evolution defines the target state")
    p.set_defaults(func=cmd_prep)

    p = sub.add_parser("sweep", help="final entropy vs total time, fresh run per point")
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit a velocity line to a timeline/sweep CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--t-min", type=float, dest="t_min")
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--s-min", type=float, dest="s_min")
    p.add_argument("--s-max", type=float, dest="s_max")
    p.add_argument("--min-points", type=int, default=5)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("subarea", help="pairwise structure of saturated final states")
    _add_common(p)
    p.set_defaults(func=cmd_subarea)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
