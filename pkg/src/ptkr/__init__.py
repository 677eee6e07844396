"""Simulation toolkit for the PT-symmetric kicked rotor.

Classical side: complex trajectories of the kicked rotor with an imaginary
kicking component, ensemble diffusion statistics and threshold-time
detection. Quantum side: split-step Floquet propagation in a truncated
angular-momentum basis, out-of-time-order correlators, and non-Hermitian
quasienergy spectra.
"""

from ptkr.core import (
    ComplexPhasePoint,
    EnsembleConfig,
    ParameterError,
    SystemParams,
    make_params,
    sample_initial_ensemble,
)
from ptkr.classical import (
    DiffusionFit,
    EnsembleSeries,
    count_diverged,
    detect_threshold_time,
    evolve_ensemble,
    fit_diffusion,
    map_step,
    map_step_complex_oracle,
    second_moments,
    special_trajectory_prediction,
    threshold_time_tc,
)
from ptkr.quantum import (
    Observables,
    ObservableSeries,
    QuantumState,
    angular_distribution,
    evolve,
    floquet_step,
    init_gaussian_state,
    init_uniform_state,
    momentum_distribution,
    observables,
)
from ptkr.otoc import (
    OtocSeries,
    detect_divergence_time,
    estimate_ehrenfest_time,
    fit_growth_rate,
    fit_power_exponent,
    otoc_at,
    otoc_series,
)
from ptkr.spectrum import (
    LambdaCResult,
    QuasienergySet,
    build_floquet_matrix,
    find_lambda_c,
    is_pt_broken,
    quasienergies,
)
from ptkr.fitting import fit_line

__version__ = "0.1.0"

__all__ = [
    "ComplexPhasePoint",
    "DiffusionFit",
    "EnsembleConfig",
    "EnsembleSeries",
    "LambdaCResult",
    "Observables",
    "ObservableSeries",
    "OtocSeries",
    "ParameterError",
    "QuantumState",
    "QuasienergySet",
    "SystemParams",
    "angular_distribution",
    "build_floquet_matrix",
    "count_diverged",
    "detect_divergence_time",
    "detect_threshold_time",
    "estimate_ehrenfest_time",
    "evolve",
    "evolve_ensemble",
    "find_lambda_c",
    "fit_diffusion",
    "fit_growth_rate",
    "fit_line",
    "fit_power_exponent",
    "floquet_step",
    "init_gaussian_state",
    "init_uniform_state",
    "is_pt_broken",
    "make_params",
    "map_step",
    "map_step_complex_oracle",
    "momentum_distribution",
    "observables",
    "otoc_at",
    "otoc_series",
    "quasienergies",
    "sample_initial_ensemble",
    "second_moments",
    "special_trajectory_prediction",
    "threshold_time_tc",
]
