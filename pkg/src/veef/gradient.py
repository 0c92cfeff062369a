"""Exact reverse-mode differentiation of final-state objectives.

Differentiates the *discretized* evolution: the gradient is that of the
actual Trotterized gate sequence, not a discretization of the continuous
adjoint equations, so it agrees with finite differences of the simulated
objective to solver precision.

Complex-derivative convention, fixed once: for a real objective L of the
complex state vector, the cotangent is g = dL/d(conj(psi)) (Wirtinger
derivative with respect to the conjugated amplitudes), so that
dL = 2 Re <g|d psi>.  Pulling g back through a gate U is g -> U^dagger g,
and a gate parameter theta contributes dL/dtheta = 2 Re <g | (dU/dtheta) psi>
evaluated where the gate sits.  Finite differences are convention-free and
pin this bookkeeping down in the tests.

For the entropy objective the seed cotangent is

    g = -(log2 rho_A  (x)  1_B) |psi(T)>,

which needs only the Schmidt vectors and values of the final state (no
eigenvector-derivative terms arise, so spectrum degeneracy needs no special
handling).  Eigenvalues are clipped at EPS_GRAD inside the logarithm, which
bounds the cotangent norm exactly where the unclipped gradient would diverge
unusably.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .entanglement import (Bipartition, entropy_from_amplitudes, schmidt_matrix,
                           schmidt_unflatten, von_neumann_entropy)
from .evolution import (_plan, apply_slice_inplace, evolve, field_gate_derivatives,
                        field_gate_matrices)
from .models import ControlSchedule, CouplingGraph, TimeGrid
from .state import PureState

EPS_GRAD = 1e-12
_FID_EPS = 1e-12


class NumericalFailure(RuntimeError):
    """Non-finite amplitudes or gradients encountered mid-evolution."""


@dataclass(frozen=True)
class MaximizeEntropy:
    """Ascent objective: bipartite entropy of the final state, in bits."""

    cut: Bipartition


@dataclass(frozen=True)
class MinimizeInfidelity:
    """Descent objective: 1 - |<target|psi(T)>|."""

    target: PureState


Objective = MaximizeEntropy | MinimizeInfidelity


@dataclass(frozen=True)
class ControlGradient:
    """d(objective)/dh^alpha_n(t_k), same (slice, site, x|z) layout as the schedule."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or v.shape[2] != 2:
            raise ValueError(f"gradient must have shape (K, N, 2), got {v.shape}")
        if v.size and not np.all(np.isfinite(v)):
            raise ValueError("gradient contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


def _objective_from_amps(amps: np.ndarray, objective: Objective) -> float:
    if isinstance(objective, MaximizeEntropy):
        return entropy_from_amplitudes(amps, objective.cut)
    return 1.0 - abs(complex(np.vdot(objective.target.amplitudes, amps)))


def objective_value(state_final: PureState, objective: Objective) -> float:
    """Entropy in bits, or infidelity in [0, 1], of the final state."""
    if isinstance(objective, MaximizeEntropy):
        if objective.cut.n_sites != state_final.n_sites:
            raise ValueError("cut does not match state size")
    elif objective.target.n_sites != state_final.n_sites:
        raise ValueError("target does not match state size")
    return _objective_from_amps(state_final.amplitudes, objective)


def _cotangent_from_amps(amps: np.ndarray, objective: Objective) -> np.ndarray:
    if isinstance(objective, MinimizeInfidelity):
        target = objective.target.amplitudes
        c = complex(np.vdot(target, amps))
        return (-c / (2.0 * max(abs(c), _FID_EPS))) * target
    cut = objective.cut
    m = schmidt_matrix(amps, cut)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    lam = np.maximum(s * s, EPS_GRAD)
    g = (u * (-s * np.log2(lam))) @ vh
    return schmidt_unflatten(g, cut)


def final_state_cotangent(state_final: PureState, objective: Objective) -> np.ndarray:
    """Seed of the adjoint recursion: dL/d(conj(psi)) at the final state.

    For a maximally mixed entanglement spectrum this is proportional to the
    state itself, so every unitary perturbation direction has zero gradient:
    saturation is a stationary point.
    """
    return _cotangent_from_amps(state_final.amplitudes, objective)


def _layer_states(start: np.ndarray, plan, substeps: int, mats_half: np.ndarray,
                  mats_full: np.ndarray | None) -> list[np.ndarray]:
    """Replay one slice, keeping the state after every layer.

    Layer order mirrors apply_slice_inplace exactly: field half step, then per
    substep a bond program and a field step (full between substeps, half at
    the end).
    """
    cur = start.copy()
    out = []
    _kernels.apply_site_gates(cur, mats_half)
    out.append(cur.copy())
    for s in range(substeps):
        if plan.prog_mats.size:
            _kernels.apply_gate_program(cur, plan.prog_sites_a, plan.prog_sites_b,
                                        plan.prog_mats)
        out.append(cur.copy())
        mats = mats_half if s == substeps - 1 else mats_full
        _kernels.apply_site_gates(cur, mats)
        out.append(cur.copy())
    return out


def _backward_slice(cot: np.ndarray, layer_states: list[np.ndarray], plan,
                    substeps: int, derivs: dict, grad_k: np.ndarray) -> np.ndarray:
    """Pull the cotangent back through one slice, accumulating d/dh into grad_k.

    For a field layer with per-site gate u_n, the parameter derivative is
    2 Re <cot_after | (du_n/dh) u_n^dagger | psi_after>, evaluated with the
    per-site moment matrices; the same psi_after serves both field axes.
    """
    n_layers = 2 * substeps + 1
    n_sites = grad_k.shape[0]
    for j in range(n_layers - 1, -1, -1):
        psi_after = layer_states[j]
        if j % 2 == 0:  # field layer
            half = j == 0 or j == n_layers - 1
            dx, dz, u_dag = derivs["half" if half else "full"]
            moments = _kernels.site_moments(cot, psi_after, n_sites)
            grad_k[:, 0] += 2.0 * np.real(np.einsum("nab,nab->n", dx, moments))
            grad_k[:, 1] += 2.0 * np.real(np.einsum("nab,nab->n", dz, moments))
            _kernels.apply_site_gates(cot, u_dag)
        elif plan.prog_mats.size:
            _kernels.apply_gate_program(cot, plan.prog_sites_a, plan.prog_sites_b,
                                        plan.prog_mats_dag)
    return cot


def _field_derivative_tables(values: np.ndarray, tau: float):
    """(D^x, D^z, U^dagger) per slice and site for one rotation duration.

    D^alpha = (dU/dh^alpha) U^dagger, so that a derivative insertion after the
    applied layer replaces the gate by its parameter derivative.
    """
    u, dux, duz = field_gate_derivatives(values, tau)
    u_dag = np.ascontiguousarray(u.conj().swapaxes(-1, -2))
    dx = np.einsum("...ij,...kj->...ik", dux, u.conj())
    dz = np.einsum("...ij,...kj->...ik", duz, u.conj())
    return dx, dz, u_dag


def control_gradient(initial: PureState, graph: CouplingGraph,
                     schedule: ControlSchedule, grid: TimeGrid,
                     objective: Objective, storage: str = "checkpoint"):
    """Objective value and its exact gradient w.r.t. every control value.

    storage="checkpoint" stores one state per slice and replays layers during
    the backward pass; storage="full" keeps every intra-slice layer state from
    the forward pass.  Both run the identical arithmetic and return identical
    gradients; checkpointing just trades a second forward replay for memory.
    """
    if storage not in ("checkpoint", "full"):
        raise ValueError(f"storage must be 'checkpoint' or 'full', got {storage!r}")
    if schedule.grid != grid:
        raise ValueError("schedule grid does not match grid")
    if schedule.n_sites != initial.n_sites or graph.n_sites != initial.n_sites:
        raise ValueError("site count mismatch between state, graph and schedule")

    n = initial.n_sites
    k_slices = grid.n_slices
    if k_slices == 0:
        value = objective_value(initial, objective)
        return value, ControlGradient(np.zeros((0, n, 2)))

    values = schedule.values
    delta = grid.trotter_dt
    substeps = grid.trotter_substeps
    plan = _plan(graph, delta)
    mats_half = field_gate_matrices(values, 0.5 * delta)
    mats_full = field_gate_matrices(values, delta) if substeps > 1 else None

    # forward
    starts = [initial.writable_amplitudes()]
    stored_layers = []
    if storage == "full":
        for k in range(k_slices):
            layers = _layer_states(starts[k], plan, substeps, mats_half[k],
                                   None if mats_full is None else mats_full[k])
            stored_layers.append(layers)
            if not np.all(np.isfinite(layers[-1])):
                raise NumericalFailure(f"non-finite state after slice {k}")
            starts.append(layers[-1])
    else:
        cur = starts[0].copy()
        for k in range(k_slices):
            apply_slice_inplace(cur, plan, substeps, mats_half[k],
                                None if mats_full is None else mats_full[k])
            if not np.all(np.isfinite(cur)):
                raise NumericalFailure(f"non-finite state after slice {k}")
            starts.append(cur.copy())

    final_amps = starts[k_slices]
    value = _objective_from_amps(final_amps, objective)

    # backward
    dx_h, dz_h, udag_h = _field_derivative_tables(values, 0.5 * delta)
    derivs_full = _field_derivative_tables(values, delta) if substeps > 1 else None
    grad = np.zeros((k_slices, n, 2))
    cot = _cotangent_from_amps(final_amps, objective)
    for k in range(k_slices - 1, -1, -1):
        if storage == "full":
            layers = stored_layers[k]
        else:
            layers = _layer_states(starts[k], plan, substeps, mats_half[k],
                                   None if mats_full is None else mats_full[k])
        derivs = {"half": (dx_h[k], dz_h[k], udag_h[k])}
        if derivs_full is not None:
            derivs["full"] = (derivs_full[0][k], derivs_full[1][k], derivs_full[2][k])
        cot = _backward_slice(cot, layers, plan, substeps, derivs, grad[k])
        if not np.all(np.isfinite(grad[k])) or not np.all(np.isfinite(cot)):
            raise NumericalFailure(f"non-finite gradient at slice {k}")
    return value, ControlGradient(grad)


def finite_difference_gradient(initial: PureState, graph: CouplingGraph,
                               schedule: ControlSchedule, grid: TimeGrid,
                               objective: Objective, step: float = 1e-5) -> ControlGradient:
    """Central-difference gradient; one evolution per sign per component.

    O(K*N*2) full evolutions, so test scale only.  Serves as the
    convention-free oracle for control_gradient.
    """
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    base = np.array(schedule.values)
    grad = np.zeros_like(base)
    for idx in np.ndindex(base.shape):
        for sign in (1.0, -1.0):
            pert = base.copy()
            pert[idx] += sign * step
            final, _ = evolve(initial, graph, ControlSchedule(pert, grid), grid)
            grad[idx] += sign * objective_value(final, objective)
    grad /= 2.0 * step
    return ControlGradient(grad)
