"""Numerical toolkit for decoupling with approximate unitary 2-designs.

Smooth entropies, exact and approximate 2-designs with certified distance
bounds, decoupling experiments, and one-shot state-merging rates.
"""

from .linalg import SystemLayout, partial_trace, tensor, swap_operator, trace_norm, two_norm, op_norm, mat_pow_psd
from .states import (DensityOperator, PureState, gen_trace_distance, gen_fidelity, purified_distance,
                     in_eps_ball, maximally_mixed, random_state, random_pure_tripartite)
from .entropies import (renyi_divergence, collision_divergence, relative_entropy, cond_entropy_rel,
                        cond_renyi_entropy, h_min, h_max, smooth_h_min, smooth_h_max, h0_eps,
                        von_neumann, mutual_information, SmoothingResult)
from .designs import (UnitaryEnsemble, DeltaEstimate, haar_sample, haar_twirl, ensemble_twirl,
                      moment_superoperator, delta_bounds, clifford_group, random_circuit_ensemble,
                      is_exact_2design)
from .decoupling import (BipartiteSplit, DecouplingReport, decouple_residual, avg_decoupling_distance,
                         theorem1_condition, verify_lemma1, verify_lemma2, run_experiment)
from .merging import RateReport, lambda_from_eps, merging_rates, asymptotic_rates, iid_trend

__version__ = "0.1.0"
