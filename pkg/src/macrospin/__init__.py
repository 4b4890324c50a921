"""macrospin: exact-diagonalization engine for the dynamics of macroscopic
superpositions in disordered spin-1/2 chains."""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    DiagonalizationError,
    EnsembleDomainError,
    NumericalRangeError,
    RunFailureError,
    ValidationError,
)
from .spincore import (
    CorrelationMatrix,
    DirectionField,
    StateVector,
    apply_pauli,
    correlation_matrix,
    ghz,
    random_ghz,
    random_su2,
    rotated_neel_ghz,
)
from .models import (
    DisorderRealization,
    Hamiltonian,
    ModelParams,
    build_preset,
    build_xxz,
    preset_params,
    sample_disorder,
)
from .dynamics import (
    EigenDecomposition,
    SpectralState,
    diagonal_ensemble_average,
    diagonalize,
    evolve,
    log_time_grid,
    saturation_window,
    temporal_fluctuation,
)
from .macroscopicity import (
    MacroResult,
    max_signed_variance,
    maximize,
    measure,
    staggered_field,
    staggered_variance,
    variance,
)
from .thermal import (
    EnsembleSpec,
    EthReport,
    canonical_average,
    eth_fluctuation_report,
    match_temperature,
    microcanonical_average,
)
from .lbits import (
    LbitAxes,
    LbitModel,
    generate_lbit_model,
    lbit_evolve,
    macroscopicity_lower_bound,
)
from .experiments import (
    ExperimentPlan,
    RunRecord,
    RunResult,
    run_eth_report,
    run_lbit_demo,
    run_scaling,
    run_staggered,
    run_time_series,
)
