"""Experiment orchestration: scenarios, sweeps, velocity fits, file formats.

Reproducibility contract: every stochastic choice is derived from the single
master seed of the experiment config through fixed salts (see derive_seed),
so rerunning a config reproduces every number; sweep outputs are keyed by
(T, seed), never by completion order.

File formats:
  timelines   CSV, header ``t,entropy_bits``, %.17g floats;
  schedules   JSON ``{"grid": {"T", "K", "substeps"}, "values": [slice][site][axis]}``
              with axis order (x, z);
  reports     JSON with a config echo, derived seeds, fits and output paths.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .entanglement import Bipartition, page_value
from .evolution import EntropyTimeline, evolve
from .models import (ControlSchedule, CouplingGraph, TimeGrid, baseline_schedule,
                     build_chain, build_random_graph, expected_edge_probability)
from .optimizer import (OptimizationReport, OptimizeConfig, optimize_state_prep,
                        optimize_state_prep_staged, optimize_veef,
                        optimize_veef_staged)
from .state import PureState, inner_product, product_state, random_product_angles

SALT_STATE = 0        # initial product-state angles
SALT_FIELDS = 1       # random baseline schedule
SALT_OPT = 2          # optimizer starting schedule
SALT_GRAPH = 3        # random-connection graph sampling


def derive_seed(master: int, *salts: int) -> int:
    """Stable sub-seed from the master seed and integer salts."""
    return int(np.random.SeedSequence([int(master), *map(int, salts)]).generate_state(1)[0])


@dataclass(frozen=True)
class VelocityFit:
    """Least-squares line through (t, S) points: S ~ v t + intercept."""

    v: float
    intercept: float
    r_squared: float
    fit_window: tuple
    n_points: int


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: model, scenario, time grid, seeds, optimizer settings."""

    model: str = "ising"              # ising | xy | heisenberg | random
    n_sites: int = 10
    periodic: bool = True
    scenario: str = "veef"            # zero | constant | random | veef
    total_time: float = 1.8
    t_list: tuple = ()                # sweep / subarea evolution times
    slice_dt: float = 0.02
    substeps: int = 2
    seed: int = 1
    constant_hx: float = 0.9045
    constant_hz: float = 0.8090
    random_field_scale: float = 1.0
    edge_probability: float | None = None   # random model only; default 2/(N-1)
    optimizer: OptimizeConfig = field(default_factory=OptimizeConfig)
    opt_stages: tuple = ()                  # ((k|None, lr, iters), ...) ladder
    prep_stages: tuple = ()                 # same, for state-preparation runs
    fit_t_window: tuple | None = None
    fit_s_window: tuple | None = None       # default (0.5, 0.9 * N/2)
    output_dir: str | None = None
    label: str = "run"

    def __post_init__(self):
        if self.scenario not in ("zero", "constant", "random", "veef"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.model not in ("ising", "xy", "heisenberg", "random"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.n_sites % 2:
            raise ValueError("the center cut needs an even number of sites")

    def grid_for(self, total_time: float) -> TimeGrid:
        return TimeGrid.from_slice_duration(total_time, self.slice_dt, self.substeps)

    def build_graph(self) -> CouplingGraph:
        if self.model == "random":
            p = (self.edge_probability if self.edge_probability is not None
                 else expected_edge_probability(self.n_sites))
            return build_random_graph(self.n_sites, p, "ising",
                                      seed=derive_seed(self.seed, SALT_GRAPH))
        return build_chain(self.model, self.n_sites, self.periodic)

    def initial_state(self) -> PureState:
        return product_state(random_product_angles(
            self.n_sites, derive_seed(self.seed, SALT_STATE)))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["t_list"] = list(self.t_list)
        return d

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "optimizer" in d and isinstance(d["optimizer"], dict):
            d["optimizer"] = OptimizeConfig(**d["optimizer"])
        for key in ("t_list", "fit_t_window", "fit_s_window"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        for key in ("opt_stages", "prep_stages"):
            if key in d:
                d[key] = tuple((None if k is None else int(k), float(lr), int(it))
                               for k, lr, it in d[key])
        return ExperimentConfig(**d)


@dataclass(frozen=True)
class ScenarioResult:
    config: ExperimentConfig
    timeline: EntropyTimeline
    final_state: PureState
    schedule: ControlSchedule
    graph: CouplingGraph
    report: OptimizationReport | None
    output_paths: dict


def _scenario_schedule(config: ExperimentConfig, graph: CouplingGraph,
                       initial: PureState, grid: TimeGrid):
    """The schedule the scenario prescribes, plus the optimizer report for veef."""
    n = config.n_sites
    if config.scenario == "zero":
        return baseline_schedule("zero", grid, n), None
    if config.scenario == "constant":
        return baseline_schedule("constant", grid, n,
                                 hx=config.constant_hx, hz=config.constant_hz), None
    if config.scenario == "random":
        return baseline_schedule("random", grid, n, scale=config.random_field_scale,
                                 seed=derive_seed(config.seed, SALT_FIELDS)), None
    opt = replace(config.optimizer, seed=derive_seed(config.seed, SALT_OPT))
    report = _veef(config, initial, graph, grid, opt)
    return report.final_schedule, report


def _veef(config: ExperimentConfig, initial, graph, grid, opt) -> OptimizationReport:
    if config.opt_stages:
        return optimize_veef_staged(initial, graph, grid, config.opt_stages, config=opt)
    return optimize_veef(initial, graph, grid, config=opt)


def run_scenario(config: ExperimentConfig) -> ScenarioResult:
    """Build model and initial state, produce the scenario's schedule
    (optimizing it for veef), evolve with entropy recording, export."""
    graph = config.build_graph()
    initial = config.initial_state()
    grid = config.grid_for(config.total_time)
    schedule, report = _scenario_schedule(config, graph, initial, grid)
    final, timeline = evolve(initial, graph, schedule, grid, record_entropy=True)

    paths: dict = {}
    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
        stem = os.path.join(config.output_dir, f"{config.label}_{config.scenario}")
        paths["timeline"] = stem + "_timeline.csv"
        paths["schedule"] = stem + "_schedule.json"
        paths["report"] = stem + "_report.json"
        save_timeline(paths["timeline"], timeline)
        save_schedule(paths["schedule"], schedule)
        save_report(paths["report"], {
            "config": config.to_dict(),
            "seeds": {"state": derive_seed(config.seed, SALT_STATE),
                      "fields": derive_seed(config.seed, SALT_FIELDS),
                      "optimizer": derive_seed(config.seed, SALT_OPT)},
            "final_entropy_bits": float(timeline.entropies[-1]),
            "page_value_bits": page_value(config.n_sites // 2, config.n_sites - config.n_sites // 2),
            "optimizer": None if report is None else {
                "best_objective": report.best_objective,
                "iterations_run": report.iterations_run,
                "converged": report.converged,
                "wall_time_s": report.wall_time,
            },
            "schedule_path": paths["schedule"],
        })
    return ScenarioResult(config, timeline, final, schedule, graph, report, paths)


@dataclass(frozen=True)
class SweepResult:
    config: ExperimentConfig
    points: tuple            # ((T, S(T)), ...) in t_list order for successful runs
    reports: dict            # T -> OptimizationReport
    failures: tuple          # ((T, message), ...)
    output_paths: dict

    @property
    def ok(self) -> bool:
        return not self.failures


def sweep_final_entropy(config: ExperimentConfig) -> SweepResult:
    """Fresh VEEF optimization per total time in config.t_list.

    Per-point failures are recorded and the sweep continues; the initial
    product state is shared across points, the optimizer seed is not.
    """
    if not config.t_list:
        raise ValueError("sweep needs a non-empty t_list")
    graph = config.build_graph()
    initial = config.initial_state()
    points = []
    reports = {}
    failures = []
    for i, total_time in enumerate(config.t_list):
        opt = replace(config.optimizer, seed=derive_seed(config.seed, SALT_OPT, i))
        try:
            grid = config.grid_for(float(total_time))
            report = _veef(config, initial, graph, grid, opt)
        except Exception as exc:  # per-point isolation is the contract here
            failures.append((float(total_time), f"{type(exc).__name__}: {exc}"))
            continue
        points.append((float(total_time), report.best_objective))
        reports[float(total_time)] = report

    paths: dict = {}
    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
        stem = os.path.join(config.output_dir, f"{config.label}_sweep")
        paths["sweep"] = stem + ".csv"
        with open(paths["sweep"], "w") as fh:
            fh.write("T,entropy_bits,seed\n")
            for i, (t, s) in enumerate(points):
                fh.write("%.17g,%.17g,%d\n" % (t, s, derive_seed(config.seed, SALT_OPT, i)))
        for i, (t, _) in enumerate(points):
            sched_path = stem + f"_T{t:g}_schedule.json"
            save_schedule(sched_path, reports[t].final_schedule)
            paths[f"schedule_T{t:g}"] = sched_path
        save_report(stem + "_report.json", {
            "config": config.to_dict(),
            "points": [[t, s] for t, s in points],
            "failures": [[t, msg] for t, msg in failures],
        })
        paths["report"] = stem + "_report.json"
    return SweepResult(config, tuple(points), reports, tuple(failures), paths)


def fit_velocity(timeline_or_sweep, t_window: tuple | None = None,
                 s_window: tuple | None = None, min_points: int = 5) -> VelocityFit:
    """Least-squares S = v t + c over the windowed points.

    Accepts an EntropyTimeline or any iterable of (t, S) pairs.  Windows are
    inclusive; points outside either window are dropped.  The entropy window
    is how the saturation knee and start-up transient are excluded
    (recommended default for an N-spin run: S in [0.5, 0.9 * N/2]).
    """
    if isinstance(timeline_or_sweep, EntropyTimeline):
        t = np.array(timeline_or_sweep.times)
        s = np.array(timeline_or_sweep.entropies)
    else:
        pairs = list(timeline_or_sweep)
        t = np.array([p[0] for p in pairs], dtype=float)
        s = np.array([p[1] for p in pairs], dtype=float)
    keep = np.ones(t.size, dtype=bool)
    if t_window is not None:
        keep &= (t >= t_window[0]) & (t <= t_window[1])
    if s_window is not None:
        lo, hi = s_window
        if lo is not None:
            keep &= s >= lo
        if hi is not None:
            keep &= s <= hi
    t, s = t[keep], s[keep]
    if t.size < min_points:
        raise ValueError(f"fit window keeps {t.size} points, need at least {min_points}")
    v, intercept = np.polyfit(t, s, 1)
    resid = s - (v * t + intercept)
    ss_tot = float(np.sum((s - s.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return VelocityFit(float(v), float(intercept), r2,
                       (float(t.min()), float(t.max())), int(t.size))


def fit_log_growth(points) -> tuple[float, float, float]:
    """Fit S = a + b log(T) to sweep points; returns (a, b, r_squared)."""
    pairs = list(points)
    t = np.array([p[0] for p in pairs], dtype=float)
    s = np.array([p[1] for p in pairs], dtype=float)
    if t.size < 3:
        raise ValueError("need at least 3 points for the logarithmic fit")
    b, a = np.polyfit(np.log(t), s, 1)
    resid = s - (a + b * np.log(t))
    ss_tot = float(np.sum((s - s.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return float(a), float(b), r2


@dataclass(frozen=True)
class SubareaReport:
    """Pairwise overlap structure of saturated final states, plus state-prep runs."""

    final_entropies: dict      # T -> S(T) bits
    pairwise_fidelities: dict  # (T, T') with T < T' -> |<psi_T|psi_T'>|
    prep_infidelities: dict    # ordered (T_evolve, T_target) -> final infidelity
    veef_reports: dict
    prep_reports: dict


def saturation_subarea_experiment(config: ExperimentConfig,
                                  prep_config: OptimizeConfig | None = None) -> SubareaReport:
    """VEEF at each T in t_list from one shared initial product state, then
    pairwise fidelities and cross state-preparation runs.

    Distinct saturated states overlap only weakly even though their entropies
    agree, and each is reachable from the shared initial state within any of
    the listed times: both facts are what this experiment quantifies.
    """
    if len(config.t_list) < 2:
        raise ValueError("subarea experiment needs at least two times in t_list")
    graph = config.build_graph()
    initial = config.initial_state()
    finals: dict = {}
    entropies: dict = {}
    veef_reports: dict = {}
    for i, total_time in enumerate(config.t_list):
        t = float(total_time)
        grid = config.grid_for(t)
        opt = replace(config.optimizer, seed=derive_seed(config.seed, SALT_OPT, i))
        report = _veef(config, initial, graph, grid, opt)
        final, _ = evolve(initial, graph, report.final_schedule, grid)
        finals[t] = final
        entropies[t] = report.best_objective
        veef_reports[t] = report

    times = sorted(finals)
    fidelities = {}
    for i, t1 in enumerate(times):
        for t2 in times[i + 1:]:
            fidelities[(t1, t2)] = abs(inner_product(finals[t1], finals[t2]))

    prep_conf = prep_config or config.optimizer
    prep_inf: dict = {}
    prep_reports: dict = {}
    for j, t_evolve in enumerate(times):
        for k, t_target in enumerate(times):
            if t_target == t_evolve:
                continue
            grid = config.grid_for(t_evolve)
            opt = replace(prep_conf,
                          seed=derive_seed(config.seed, SALT_OPT, 100 + j * len(times) + k))
            if config.prep_stages:
                report = optimize_state_prep_staged(initial, finals[t_target], graph,
                                                    grid, config.prep_stages, config=opt)
            else:
                report = optimize_state_prep(initial, finals[t_target], graph, grid,
                                             config=opt)
            prep_inf[(t_evolve, t_target)] = report.best_objective
            prep_reports[(t_evolve, t_target)] = report

    if config.output_dir:
        os.makedirs(config.output_dir, exist_ok=True)
        save_report(os.path.join(config.output_dir, f"{config.label}_subarea.json"), {
            "config": config.to_dict(),
            "final_entropies": {str(t): s for t, s in entropies.items()},
            "pairwise_fidelities": {f"{a}|{b}": f for (a, b), f in fidelities.items()},
            "prep_infidelities": {f"{a}|{b}": f for (a, b), f in prep_inf.items()},
        })
    return SubareaReport(entropies, fidelities, prep_inf, veef_reports, prep_reports)


# ---------------------------------------------------------------------------
# file formats

def save_timeline(path: str, timeline: EntropyTimeline) -> None:
    with open(path, "w") as fh:
        fh.write("t,entropy_bits\n")
        for t, s in zip(timeline.times, timeline.entropies):
            fh.write("%.17g,%.17g\n" % (t, s))


def load_timeline(path: str) -> EntropyTimeline:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return EntropyTimeline(data[:, 0], data[:, 1])


def save_schedule(path: str, schedule: ControlSchedule) -> None:
    grid = schedule.grid
    payload = {
        "grid": {"T": grid.total_time, "K": grid.n_slices,
                 "substeps": grid.trotter_substeps},
        "values": schedule.values.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_schedule(path: str) -> ControlSchedule:
    with open(path) as fh:
        payload = json.load(fh)
    grid = TimeGrid(payload["grid"]["T"], payload["grid"]["K"],
                    payload["grid"]["substeps"])
    return ControlSchedule(np.array(payload["values"], dtype=float), grid)


def save_report(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")
