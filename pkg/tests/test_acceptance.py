"""Acceptance suite: one test per criterion, printing the measured numbers.

Criteria 1-8 are optimizer-driven reproduction runs with declared seeds and
run for minutes each; they carry the 'reproduction' marker so the fast gate
can deselect them (pytest -m "not reproduction").  Criterion 9 is the fast
property gate and runs unmarked.

Criterion 1 is expected to fail and is kept as stated on purpose: the
required S(T=1.8) >= 4.95 bits sits above the model's true optimum (~4.91,
see the README and project notes); the test prints the measured optimum.
"""

import numpy as np
import pytest

from veef import (Bipartition, ControlSchedule, ExperimentConfig, MaximizeEntropy,
                  MinimizeInfidelity, OptimizeConfig, PureState, TimeGrid,
                  baseline_schedule, build_chain, control_gradient,
                  entropy_symmetric_check, evolve, finite_difference_gradient,
                  fit_log_growth, fit_velocity, optimize_veef_staged, page_value,
                  product_state, random_product_angles, run_scenario,
                  saturation_subarea_experiment, sweep_final_entropy)

from oracles import exact_evolution, haar_average_entropy

reproduction = pytest.mark.reproduction

# staged-learning-rate recipe for sweep points (fixed grid per point)
SWEEP_STAGES = ((None, 0.05, 700), (None, 0.02, 500), (None, 0.005, 400))
SWEEP_STAGES_N12 = ((None, 0.05, 500), (None, 0.02, 400), (None, 0.005, 300))
# coarse-to-fine ladder for the long saturation runs
LADDER_18 = ((5, 0.05, 500), (15, 0.05, 400), (45, 0.03, 500),
             (None, 0.02, 800), (None, 0.005, 500))

PAGE_10 = page_value(5, 5)  # 4.27865...


def _sweep_config(model, n_sites, t_list, seed=1, stages=SWEEP_STAGES, **kw):
    return ExperimentConfig(model=model, n_sites=n_sites, scenario="veef",
                            t_list=t_list, slice_dt=0.02, substeps=2, seed=seed,
                            optimizer=OptimizeConfig(stall_iters=250, stall_tol=1e-6),
                            opt_stages=stages, **kw)


@pytest.fixture(scope="session")
def ising10_sweep():
    cfg = _sweep_config("ising", 10, (0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6))
    result = sweep_final_entropy(cfg)
    assert not result.failures
    return result


@pytest.fixture(scope="session")
def ising10_velocity(ising10_sweep):
    return fit_velocity(ising10_sweep.points, s_window=(0.5, 4.5))


@reproduction
def test_criterion_1_saturation():
    """N=10 periodic Ising ring, optimized fields, T=1.8, K=90: S(T) >= 4.95."""
    n = 10
    graph = build_chain("ising", n, periodic=True)
    initial = product_state(random_product_angles(n, seed=42))
    grid = TimeGrid(1.8, 90, 2)
    report = optimize_veef_staged(
        initial, graph, grid, stages=LADDER_18,
        config=OptimizeConfig(seed=7, stall_iters=300, stall_tol=1e-6))
    final, timeline = evolve(initial, graph, report.final_schedule, grid,
                             record_entropy=True)
    s_a, s_b = entropy_symmetric_check(final, Bipartition.center(n))
    assert abs(s_a - s_b) < 1e-9
    assert timeline.entropies[0] < 1e-12
    measured = report.best_objective
    ok = measured >= 4.95
    print(f"\nCRITERION 1 [{'PASS' if ok else 'FAIL'}] "
          f"S(T=1.8, K=90) = {measured:.4f} bits (required >= 4.95; "
          f"model optimum ~4.91, see README)")
    assert measured >= 4.95


@reproduction
def test_criterion_2_ising_velocity(ising10_velocity):
    """Ising N=10 sweep T in {0.4..1.6}: fitted v = 2.76 +/- 0.15."""
    fit = ising10_velocity
    ok = 2.61 <= fit.v <= 2.91
    print(f"\nCRITERION 2 [{'PASS' if ok else 'FAIL'}] "
          f"v = {fit.v:.4f} (band [2.61, 2.91]), intercept {fit.intercept:.3f}, "
          f"r2 = {fit.r_squared:.4f}, {fit.n_points} points")
    assert 2.61 <= fit.v <= 2.91


@reproduction
def test_criterion_3_xy_velocity():
    """XY chain: v = 4.98 +/- 0.25 (sweep scaled into the pre-saturation window)."""
    cfg = _sweep_config("xy", 10, (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9))
    result = sweep_final_entropy(cfg)
    assert not result.failures
    fit = fit_velocity(result.points, s_window=(0.5, 4.5))
    ok = 4.73 <= fit.v <= 5.23
    print(f"\nCRITERION 3 (XY) [{'PASS' if ok else 'FAIL'}] "
          f"v = {fit.v:.4f} (band [4.73, 5.23]), r2 = {fit.r_squared:.4f}")
    assert 4.73 <= fit.v <= 5.23


@reproduction
def test_criterion_3_heisenberg_velocity():
    """Heisenberg chain: v = 5.75 +/- 0.3."""
    cfg = _sweep_config("heisenberg", 10, (0.2, 0.3, 0.4, 0.5, 0.6, 0.7))
    result = sweep_final_entropy(cfg)
    assert not result.failures
    fit = fit_velocity(result.points, s_window=(0.5, 4.5))
    ok = 5.45 <= fit.v <= 6.05
    print(f"\nCRITERION 3 (Heisenberg) [{'PASS' if ok else 'FAIL'}] "
          f"v = {fit.v:.4f} (band [5.45, 6.05]), r2 = {fit.r_squared:.4f}")
    assert 5.45 <= fit.v <= 6.05


@reproduction
def test_criterion_4_size_universality(ising10_velocity):
    """Ising velocities at N=8 and N=12 within +/-0.15 of the N=10 value."""
    v10 = ising10_velocity.v
    lines = []
    vs = {}
    for n, t_list, stages in ((8, (0.4, 0.6, 0.8, 1.0, 1.2), SWEEP_STAGES),
                              (12, (0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6),
                               SWEEP_STAGES_N12)):
        cfg = _sweep_config("ising", n, t_list, stages=stages)
        result = sweep_final_entropy(cfg)
        assert not result.failures
        fit = fit_velocity(result.points, s_window=(0.5, 0.9 * n / 2))
        vs[n] = fit.v
        lines.append(f"N={n}: v = {fit.v:.4f} (|dv| = {abs(fit.v - v10):.4f})")
    ok = all(abs(v - v10) <= 0.15 for v in vs.values())
    print(f"\nCRITERION 4 [{'PASS' if ok else 'FAIL'}] vs N=10 v = {v10:.4f}; "
          + "; ".join(lines))
    for n, v in vs.items():
        assert abs(v - v10) <= 0.15


@reproduction
def test_criterion_5_constant_field_baseline():
    """Constant (0.9045, 0.8090) field to t=40: early slope 1.65 +/- 0.15 and a
    long-time plateau in [3.9, 4.28] bits, just below the Page value."""
    n = 10
    graph = build_chain("ising", n, periodic=True)
    initial = product_state(random_product_angles(n, seed=9))
    grid = TimeGrid.from_slice_duration(40.0, 0.02, 2)
    sched = baseline_schedule("constant", grid, n, hx=0.9045, hz=0.8090)
    _, timeline = evolve(initial, graph, sched, grid, record_entropy=True)
    fit = fit_velocity(timeline, t_window=(0.3, 2.5))
    plateau = float(np.mean(timeline.entropies[timeline.times >= 30.0]))
    ok = 1.5 <= fit.v <= 1.8 and 3.9 <= plateau <= 4.28
    print(f"\nCRITERION 5 [{'PASS' if ok else 'FAIL'}] early slope {fit.v:.4f} "
          f"(band [1.5, 1.8]), plateau {plateau:.4f} (band [3.9, 4.28], "
          f"Page {PAGE_10:.4f})")
    assert 1.5 <= fit.v <= 1.8
    assert 3.9 <= plateau <= 4.28


@reproduction
def test_criterion_6_random_field_page_convergence():
    """Random fields, 10 seeds, t=100: mean final S within 0.25 of 4.2787."""
    finals = []
    for seed in range(1, 11):
        cfg = ExperimentConfig(model="ising", n_sites=10, scenario="random",
                               total_time=100.0, slice_dt=0.25, substeps=25,
                               seed=seed)
        result = run_scenario(cfg)
        finals.append(float(result.timeline.entropies[-1]))
    mean = float(np.mean(finals))
    ok = abs(mean - 4.2787) <= 0.25
    print(f"\nCRITERION 6 [{'PASS' if ok else 'FAIL'}] mean final S = {mean:.4f} "
          f"over 10 seeds (Page {PAGE_10:.4f}, band +/- 0.25)")
    assert abs(mean - 4.2787) <= 0.25


@pytest.fixture(scope="session")
def subarea_report():
    cfg = ExperimentConfig(
        model="ising", n_sites=10, scenario="veef", t_list=(4.0, 6.0),
        slice_dt=0.02, substeps=2, seed=2,
        optimizer=OptimizeConfig(stall_iters=250, stall_tol=1e-6),
        opt_stages=((10, 0.05, 400), (50, 0.03, 400), (None, 0.02, 500)),
        prep_stages=((10, 0.05, 500), (50, 0.03, 500), (None, 0.02, 800),
                     (None, 0.005, 600)))
    return saturation_subarea_experiment(cfg)


@reproduction
def test_criterion_7_saturated_subarea(subarea_report):
    """T, T' in {4, 6}: saturated entropies, tiny mutual fidelity, and cheap
    cross-preparation of either final state from the shared initial state."""
    report = subarea_report
    entropies = report.final_entropies
    fid = report.pairwise_fidelities[(4.0, 6.0)]
    prep_46 = report.prep_infidelities[(4.0, 6.0)]
    prep_64 = report.prep_infidelities[(6.0, 4.0)]
    ok = (all(s >= 4.95 for s in entropies.values()) and fid < 0.05
          and prep_46 <= 1e-3 and prep_64 <= 1e-3)
    print(f"\nCRITERION 7 [{'PASS' if ok else 'FAIL'}] "
          f"S(4) = {entropies[4.0]:.4f}, S(6) = {entropies[6.0]:.4f} (>= 4.95); "
          f"|<psi(4)|psi(6)>| = {fid:.2e} (< 0.05); "
          f"prep F_in(4;6) = {prep_46:.2e}, F_in(6;4) = {prep_64:.2e} (<= 1e-3)")
    assert all(s >= 4.95 for s in entropies.values())
    assert fid < 0.05
    assert prep_46 <= 1e-3
    assert prep_64 <= 1e-3


@reproduction
def test_criterion_8_long_range_speedup():
    """A seeded sparse random graph beats the chain's ballistic line and its
    pre-saturation body fits a + b log T with r^2 >= 0.95."""
    cfg = _sweep_config("random", 10, (0.2, 0.3, 0.4, 0.5, 0.6, 0.8),
                        stages=((None, 0.05, 600), (None, 0.02, 400),
                                (None, 0.005, 300)))
    graph = cfg.build_graph()
    assert graph.is_connected()
    result = sweep_final_entropy(cfg)
    assert not result.failures
    points = dict(result.points)
    excess = {t: points[t] - 2.76 * t for t in (0.3, 0.5, 0.8)}
    body = [(t, s) for t, s in result.points if s <= 4.5]
    a, b, r2 = fit_log_growth(body)
    ok = all(e > 0 for e in excess.values()) and r2 >= 0.95
    print(f"\nCRITERION 8 [{'PASS' if ok else 'FAIL'}] graph edges = "
          f"{graph.n_edges}; S - 2.76 T at T=0.3/0.5/0.8 = "
          f"{excess[0.3]:.3f}/{excess[0.5]:.3f}/{excess[0.8]:.3f}; "
          f"log fit S = {a:.3f} + {b:.3f} ln T, r2 = {r2:.4f} (>= 0.95)")
    for t, e in excess.items():
        assert e > 0, f"S({t}) does not exceed the chain line"
    assert r2 >= 0.95


# ---------------------------------------------------------------------------
# criterion 9: the fast property gate (< 2 minutes, unmarked)

def test_criterion_9_gradient_vs_finite_differences():
    rng = np.random.default_rng(77)
    worst = 0.0
    for trial in range(3):
        n = int(rng.integers(3, 6))
        k = int(rng.integers(2, 7))
        graph = build_chain(("ising", "xy", "heisenberg")[trial], n,
                            periodic=bool(trial % 2))
        grid = TimeGrid(float(rng.uniform(0.3, 0.6)), k, 2)
        sched = ControlSchedule(rng.normal(scale=0.9, size=(k, n, 2)), grid)
        st = product_state(random_product_angles(n, 300 + trial))
        cut = Bipartition.center(n) if n % 2 == 0 else Bipartition((0,), n)
        for obj in (MaximizeEntropy(cut),
                    MinimizeInfidelity(product_state(random_product_angles(n, 400 + trial)))):
            _, grad = control_gradient(st, graph, sched, grid, obj)
            fd = finite_difference_gradient(st, graph, sched, grid, obj, step=1e-5)
            diff = np.abs(grad.values - fd.values)
            bound = np.maximum(1e-5 * np.abs(fd.values), 1e-8)
            worst = max(worst, float(np.max(diff / bound)))
            assert np.all(diff <= bound)
    print(f"\nCRITERION 9a [PASS] adjoint-vs-FD within tolerance "
          f"(worst ratio {worst:.3f} of the bound)")


def test_criterion_9_norm_conservation_ten_thousand_steps():
    n = 6
    graph = build_chain("heisenberg", n, periodic=True)
    grid = TimeGrid(20.0, 100, 100)  # 1e4 Trotter substeps
    sched = baseline_schedule("random", grid, n, scale=1.0, seed=8)
    st = product_state(random_product_angles(n, 21))
    final, _ = evolve(st, graph, sched, grid)
    drift = abs(float(np.linalg.norm(final.amplitudes)) - 1.0)
    print(f"\nCRITERION 9b [PASS] norm drift over 1e4 steps = {drift:.2e} (< 1e-9)")
    assert drift < 1e-9


def test_criterion_9_entropy_symmetry():
    rng = np.random.default_rng(5)
    worst = 0.0
    for n, a_sites in ((6, (0, 1, 2)), (7, (0, 3, 5)), (8, (2,))):
        z = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
        st = PureState(n, z / np.linalg.norm(z))
        s_a, s_b = entropy_symmetric_check(st, Bipartition(a_sites, n))
        worst = max(worst, abs(s_a - s_b))
        assert abs(s_a - s_b) < 1e-9
    print(f"\nCRITERION 9c [PASS] S_A = S_B within 1e-9 (worst {worst:.2e})")


def test_criterion_9_trotter_second_order_ratio():
    rng = np.random.default_rng(6)
    n = 6
    graph = build_chain("heisenberg", n, periodic=True)
    st = product_state(random_product_angles(n, 23))
    k_slices = 4
    values = rng.normal(size=(k_slices, n, 2))
    exact = exact_evolution(graph, values, TimeGrid(0.4, k_slices, 1), st.amplitudes)
    errs = []
    for substeps in (2, 4, 8):
        grid = TimeGrid(0.4, k_slices, substeps)
        final, _ = evolve(st, graph, ControlSchedule(values, grid), grid)
        errs.append(float(np.linalg.norm(final.amplitudes - exact)))
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    print(f"\nCRITERION 9d [PASS] error ratios under step halving: "
          f"{ratios[0]:.3f}, {ratios[1]:.3f} (target 4.0 +/- 20%)")
    for r in ratios:
        assert r == pytest.approx(4.0, rel=0.2)


def test_criterion_9_zero_field_entropy_bound():
    n = 10
    graph = build_chain("ising", n, periodic=True)
    grid = TimeGrid(10.0, 250, 2)
    sched = baseline_schedule("zero", grid, n)
    st = product_state(random_product_angles(n, 27))
    _, timeline = evolve(st, graph, sched, grid, record_entropy=True)
    peak = float(np.max(timeline.entropies))
    print(f"\nCRITERION 9e [PASS] zero-field periodic-Ising peak S = {peak:.4f} "
          f"(<= 2 bits: two commuting cut-crossing gates)")
    assert peak <= 2.0 + 1e-9


def test_criterion_9_page_value_vs_haar_sampling():
    mc = haar_average_entropy(4, 4, samples=20000, seed=11)
    diff = abs(page_value(4, 4) - mc)
    print(f"\nCRITERION 9f [PASS] page_value(4,4) = {page_value(4, 4):.4f} vs "
          f"Haar MC {mc:.4f} (|diff| = {diff:.4f} < 0.02)")
    assert diff < 0.02


# ---------------------------------------------------------------------------
# reproduction-scale invariants from the module contracts

@reproduction
def test_restart_robustness_at_saturation_time():
    """Across >= 5 optimizer seeds at N=10, T=1.8 the spread of the reached
    optimum stays below 0.1 bits: the optimum is robustly reachable."""
    n = 10
    graph = build_chain("ising", n, periodic=True)
    initial = product_state(random_product_angles(n, seed=42))
    grid = TimeGrid(1.8, 90, 2)
    stages = ((5, 0.05, 400), (15, 0.05, 300), (45, 0.03, 400), (None, 0.02, 600))
    bests = []
    for seed in (3, 7, 11, 15, 19):
        report = optimize_veef_staged(
            initial, graph, grid, stages=stages,
            config=OptimizeConfig(seed=seed, stall_iters=250, stall_tol=1e-6))
        bests.append(report.best_objective)
    spread = max(bests) - min(bests)
    print(f"\nRESTART ROBUSTNESS [{'PASS' if spread < 0.1 else 'FAIL'}] "
          f"bests = {[round(b, 4) for b in bests]}, spread = {spread:.4f} (< 0.1)")
    assert spread < 0.1


@reproduction
def test_velocity_stable_under_trotter_refinement():
    """The reported constant-field velocity moves < 5% when the Trotter step
    is halved: the discretization is converged."""
    n = 10
    graph = build_chain("ising", n, periodic=True)
    initial = product_state(random_product_angles(n, seed=9))
    vs = []
    for substeps in (2, 4):
        grid = TimeGrid.from_slice_duration(5.0, 0.02, substeps)
        sched = baseline_schedule("constant", grid, n, hx=0.9045, hz=0.8090)
        _, timeline = evolve(initial, graph, sched, grid, record_entropy=True)
        vs.append(fit_velocity(timeline, t_window=(0.3, 2.5)).v)
    rel = abs(vs[1] - vs[0]) / vs[0]
    print(f"\nVELOCITY TROTTER STABILITY [{'PASS' if rel < 0.05 else 'FAIL'}] "
          f"v(dt=0.01) = {vs[0]:.4f}, v(dt=0.005) = {vs[1]:.4f} ({100 * rel:.2f}%)")
    assert rel < 0.05


@reproduction
def test_gradient_vanishes_at_converged_saturation(subarea_report):
    """At a converged fully saturated solution the entropy gradient is tiny:
    saturation is a stationary point of the objective."""
    report = subarea_report.veef_reports[4.0]
    n = 10
    graph = build_chain("ising", n, periodic=True)
    cfg = ExperimentConfig(model="ising", n_sites=10, scenario="veef",
                           t_list=(4.0, 6.0), slice_dt=0.02, substeps=2, seed=2)
    initial = cfg.initial_state()
    grid = report.final_schedule.grid
    value, grad = control_gradient(initial, graph, report.final_schedule, grid,
                                   MaximizeEntropy(Bipartition.center(n)))
    sup = grad.sup_norm()
    print(f"\nSTATIONARITY [{'PASS' if sup < 1e-3 else 'FAIL'}] S = {value:.5f}, "
          f"gradient sup-norm = {sup:.2e} (< 1e-3)")
    assert sup < 1e-3
