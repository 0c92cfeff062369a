"""Optimal control of entanglement growth in spin-1/2 lattices.

Exact statevector simulation of time-dependent spin Hamiltonians
(interactions on an arbitrary coupling graph plus local x/z control fields),
Trotterized propagation, entanglement entropy diagnostics, and exact
reverse-mode gradients of final-state objectives used to optimize the
control fields with ADAM.
"""

from .entanglement import (Bipartition, EntanglementSpectrum, entanglement_spectrum,
                           entropy_of_state, entropy_symmetric_check, page_value,
                           spectrum_via_density_matrix, von_neumann_entropy)
from .evolution import EntropyTimeline, evolve, trotter_slice
from .gradient import (ControlGradient, MaximizeEntropy, MinimizeInfidelity,
                       NumericalFailure, control_gradient, final_state_cotangent,
                       finite_difference_gradient, objective_value)
from .harness import (ExperimentConfig, SubareaReport, SweepResult, VelocityFit,
                      derive_seed, fit_log_growth, fit_velocity, load_schedule,
                      load_timeline, run_scenario, saturation_subarea_experiment,
                      save_schedule, save_timeline, sweep_final_entropy)
from .models import (ControlSchedule, CouplingGraph, TimeGrid, baseline_schedule,
                     build_chain, build_random_graph, expected_edge_probability)
from .optimizer import (AdamState, OptimizationReport, OptimizeConfig, adam_step,
                        initial_random_schedule, optimize_state_prep,
                        optimize_state_prep_staged, optimize_veef,
                        optimize_veef_staged, refine_schedule)
from .state import (PAULI_X, PAULI_Y, PAULI_Z, SX, SY, SZ, PureState, SpinAngles,
                    apply_single_site, apply_two_site, inner_product, product_state,
                    random_product_angles)

__version__ = "0.1.0"
