"""Covert-link design and Monte Carlo evaluation with multiport surfaces.

Library layout:

* :mod:`riscovert.geometry`   — array layouts, priors, propagation knobs
* :mod:`riscovert.channels`   — Rician statistics, draws, power forms
* :mod:`riscovert.multiport`  — reflection models and dipole impedances
* :mod:`riscovert.detection`  — radiometer warden, DEP, covert budget
* :mod:`riscovert.optimizer`  — alternating ratio maximization
* :mod:`riscovert.scenarios`  — scenario catalogue and method evaluation
* :mod:`riscovert.validation` — property-check battery
* :mod:`riscovert.cli`        — reproducible runs and CSV artifacts
"""

__version__ = "0.1.0"

from .channels import (ChannelRealization, ChannelStatistics, average_power,
                       instantaneous_power, los_mean, nlos_correlation,
                       position_averaged_stats, sample_channel, sample_channels,
                       steering_vector)
from .detection import (WillieDetector, approx_min_dep, average_dep, covert_budget,
                        dep, min_dep, noise_cdf, noise_pdf, optimal_threshold)
from .geometry import ArrayGeometry, PositionRegion, PropagationParams
from .multiport import (ReactanceVector, RisHardware, build_hardware,
                        cascade_matrix, dipole_mutual_impedance,
                        dipole_self_impedance, mutual_impedance_matrix,
                        phase_to_reactance, reactance_to_phase,
                        reflection_matrix_ct, reflection_matrix_imp,
                        reflection_matrix_mp)
from .optimizer import (LinkEnsemble, OptimizerConfig, OptimizerState,
                        allocate_power, lambda_update, optimize, precoder_step,
                        quadratic_objective, ris_step)
from .scenarios import (METHODS, MethodEvaluation, RateCurvePoint, Scenario,
                        build_scenario, convergence_trace, evaluate_method,
                        link_ensemble, prepare_method, radiation_pattern)

__all__ = [name for name in dir() if not name.startswith("_")]
