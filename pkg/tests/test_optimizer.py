import numpy as np
import pytest

from veef import (AdamState, Bipartition, ControlGradient, ControlSchedule,
                  MaximizeEntropy, OptimizeConfig, TimeGrid, adam_step, build_chain,
                  control_gradient, evolve, inner_product, objective_value,
                  optimize_state_prep, optimize_veef, product_state,
                  random_product_angles, refine_schedule)


def random_product(n, seed):
    return product_state(random_product_angles(n, seed))


def tiny_setup(n=4, total_time=0.4, k=5):
    graph = build_chain("ising", n, periodic=True)
    grid = TimeGrid(total_time, k, 2)
    return graph, grid, random_product(n, 3)


class TestAdamStep:
    def test_zero_gradient_leaves_schedule(self):
        grid = TimeGrid(1.0, 4)
        sched = ControlSchedule(np.ones((4, 3, 2)), grid)
        adam = AdamState.zeros(sched.values.shape)
        new_adam, new_sched = adam_step(adam, sched, ControlGradient(np.zeros((4, 3, 2))))
        assert np.array_equal(new_sched.values, sched.values)
        assert new_adam.step_count == 1

    def test_first_step_magnitude_is_learning_rate(self):
        # bias correction makes the first update ~lr * sign(g) for any scale
        grid = TimeGrid(1.0, 2)
        sched = ControlSchedule(np.zeros((2, 2, 2)), grid)
        for scale in (1e-6, 1.0, 1e6):
            adam = AdamState.zeros(sched.values.shape, learning_rate=0.01)
            grad = ControlGradient(np.full((2, 2, 2), scale))
            _, stepped = adam_step(adam, sched, grad, "ascent")
            # exact value is lr * g/(|g| + eps); the eps shaves ~1% at g = 1e-6
            np.testing.assert_allclose(stepped.values, 0.01, rtol=2e-2)

    def test_descent_flips_sign(self):
        grid = TimeGrid(1.0, 1)
        sched = ControlSchedule(np.zeros((1, 2, 2)), grid)
        adam = AdamState.zeros(sched.values.shape, learning_rate=0.1)
        grad = ControlGradient(np.ones((1, 2, 2)))
        _, up = adam_step(adam, sched, grad, "ascent")
        _, down = adam_step(adam, sched, grad, "descent")
        np.testing.assert_allclose(up.values, -down.values)

    def test_shape_mismatch_rejected(self):
        grid = TimeGrid(1.0, 2)
        sched = ControlSchedule(np.zeros((2, 3, 2)), grid)
        adam = AdamState.zeros((2, 3, 2))
        with pytest.raises(ValueError):
            adam_step(adam, sched, ControlGradient(np.zeros((2, 2, 2))))

    def test_direction_validated(self):
        grid = TimeGrid(1.0, 1)
        sched = ControlSchedule(np.zeros((1, 2, 2)), grid)
        adam = AdamState.zeros((1, 2, 2))
        with pytest.raises(ValueError):
            adam_step(adam, sched, ControlGradient(np.zeros((1, 2, 2))), "sideways")


class TestOptimizeVeef:
    def test_deterministic_runs(self):
        graph, grid, st = tiny_setup()
        cfg = OptimizeConfig(max_iters=40, seed=11)
        a = optimize_veef(st, graph, grid, config=cfg)
        b = optimize_veef(st, graph, grid, config=cfg)
        assert np.array_equal(a.objective_history, b.objective_history)
        assert np.array_equal(a.final_schedule.values, b.final_schedule.values)
        assert a.iterations_run == b.iterations_run

    def test_best_history_monotone_and_improves(self):
        graph, grid, st = tiny_setup()
        cfg = OptimizeConfig(max_iters=120, seed=5, learning_rate=0.05)
        rep = optimize_veef(st, graph, grid, config=cfg)
        assert np.all(np.diff(rep.best_history) >= 0)
        assert rep.best_objective > rep.objective_history[0] + 0.05
        assert len(rep.objective_history) == rep.iterations_run
        assert rep.best_objective <= 2.0 + 1e-9  # min(N_A, N_B) cap

    def test_final_schedule_is_best_seen(self):
        graph, grid, st = tiny_setup()
        cfg = OptimizeConfig(max_iters=60, seed=7, learning_rate=0.08)
        rep = optimize_veef(st, graph, grid, config=cfg)
        value, _ = control_gradient(st, graph, rep.final_schedule, grid,
                                    MaximizeEntropy(Bipartition.center(4)))
        assert value == pytest.approx(rep.best_objective, abs=1e-12)

    def test_odd_sites_need_explicit_cut(self):
        graph = build_chain("ising", 3, periodic=True)
        grid = TimeGrid(0.2, 2, 1)
        st = random_product(3, 1)
        with pytest.raises(ValueError):
            optimize_veef(st, graph, grid)
        rep = optimize_veef(st, graph, grid, cut=Bipartition((0,), 3),
                            config=OptimizeConfig(max_iters=5, seed=1))
        assert rep.iterations_run == 5

    def test_entropy_cap_stop(self):
        # with an explicit reachable cap the loop stops early and flags converged
        graph, grid, st = tiny_setup()
        cfg = OptimizeConfig(max_iters=500, seed=5, learning_rate=0.05,
                             entropy_cap=0.5, cap_tol=1e-2)
        rep = optimize_veef(st, graph, grid, config=cfg)
        assert rep.converged
        assert rep.iterations_run < 500

    def test_clamp_respected(self):
        graph, grid, st = tiny_setup()
        cfg = OptimizeConfig(max_iters=50, seed=5, learning_rate=0.1, clamp=0.2)
        rep = optimize_veef(st, graph, grid, config=cfg)
        assert np.max(np.abs(rep.final_schedule.values)) <= 0.2 + 1e-15

    def test_empty_grid_rejected(self):
        graph = build_chain("ising", 4, periodic=True)
        st = random_product(4, 3)
        with pytest.raises(ValueError):
            optimize_veef(st, graph, TimeGrid(0.0, 0))


class TestOptimizeStatePrep:
    def test_prepare_reachable_target(self):
        # target made by evolving a known schedule: the optimizer must be able
        # to drive the infidelity well below its starting value
        n = 4
        graph = build_chain("ising", n, periodic=True)
        grid = TimeGrid(0.4, 5, 2)
        st = random_product(n, 3)
        target_sched = ControlSchedule(
            np.random.default_rng(8).normal(scale=0.5, size=(5, n, 2)), grid)
        target, _ = evolve(st, graph, target_sched, grid)
        cfg = OptimizeConfig(max_iters=400, seed=9, learning_rate=0.05,
                             infidelity_stop=1e-4)
        rep = optimize_state_prep(st, target, graph, grid, config=cfg)
        assert rep.direction == "descent"
        assert np.all(np.diff(rep.best_history) <= 0)
        assert rep.best_objective < 1e-3
        final, _ = evolve(st, graph, rep.final_schedule, grid)
        assert 1 - abs(inner_product(target, final)) == pytest.approx(
            rep.best_objective, abs=1e-12)

    def test_size_mismatch_rejected(self):
        graph = build_chain("ising", 4, periodic=True)
        with pytest.raises(ValueError):
            optimize_state_prep(random_product(4, 1), random_product(3, 1), graph,
                                TimeGrid(0.2, 2))


class TestRefineSchedule:
    def test_values_duplicated_pairwise(self):
        grid = TimeGrid(1.0, 4, 2)
        values = np.arange(4 * 3 * 2, dtype=float).reshape(4, 3, 2)
        sched = ControlSchedule(values, grid)
        fine = refine_schedule(sched, 2)
        assert fine.grid.n_slices == 8
        assert fine.grid.total_time == 1.0
        assert np.array_equal(fine.values[::2], values)
        assert np.array_equal(fine.values[1::2], values)

    def test_substeps_shrink_keeps_trotter_step(self):
        grid = TimeGrid(1.0, 10, 2)
        sched = ControlSchedule(np.zeros((10, 3, 2)), grid)
        fine = refine_schedule(sched, 2)
        assert fine.grid.trotter_substeps == 1
        assert fine.grid.trotter_dt == pytest.approx(grid.trotter_dt)

    def test_objective_unchanged_by_refinement(self, rng):
        n = 4
        graph = build_chain("heisenberg", n, periodic=True)
        grid = TimeGrid(0.5, 5, 2)
        sched = ControlSchedule(rng.normal(size=(5, n, 2)), grid)
        st = random_product(n, 5)
        obj = MaximizeEntropy(Bipartition.center(n))
        final_a, _ = evolve(st, graph, sched, grid)
        fine = refine_schedule(sched, 2)
        final_b, _ = evolve(st, graph, fine, fine.grid)
        assert abs(objective_value(final_a, obj) - objective_value(final_b, obj)) < 1e-6

    def test_refine_then_reoptimize_does_not_regress(self):
        graph, grid, st = tiny_setup(total_time=0.5, k=5)
        coarse_cfg = OptimizeConfig(max_iters=150, seed=2, learning_rate=0.05)
        coarse = optimize_veef(st, graph, grid, config=coarse_cfg)
        fine_sched = refine_schedule(coarse.final_schedule, 2)
        fine_cfg = OptimizeConfig(max_iters=150, seed=2, learning_rate=0.02)
        fine = optimize_veef(st, graph, fine_sched.grid, config=fine_cfg,
                             initial_schedule=fine_sched)
        assert fine.best_objective >= coarse.best_objective - 1e-6

    def test_small_factor_rejected(self):
        sched = ControlSchedule(np.zeros((2, 2, 2)), TimeGrid(1.0, 2))
        with pytest.raises(ValueError):
            refine_schedule(sched, 1)
