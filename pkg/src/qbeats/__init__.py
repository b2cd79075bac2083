"""Time-resolved photon emission from two coupled two-level emitters.

Three mutually validating engines compute the conditional photon
correlations of the pair: closed-form amplitudes (:mod:`qbeats.analytic`),
full mode-ladder wavefunction integration (:mod:`qbeats.oracle`) and
quantum-jump Monte Carlo sampling (:mod:`qbeats.montecarlo`).  Measurement
bookkeeping and correlation tables live in :mod:`qbeats.correlator`; the
``qbeats`` command line is provided by :mod:`qbeats.cli`.
"""

from .analytic import (
    ConditionalAmplitudes,
    SingleEmitterParams,
    conditional_amplitudes,
    p_l2_l1,
    p_l2_l2,
    p_l2_n,
    p_n_local,
    p_n_n,
    single_excited_amplitude,
    single_k_amplitude,
    single_realspace_amplitude,
    visibility,
)
from .correlator import (
    CorrelationSeries,
    CorrelationTable,
    build_table,
    normalization_ledger,
    project_after_detection,
    visibility_series,
)
from .model import (
    Basis,
    Channel,
    ModelParams,
    SymmetrizedChannel,
    SystemState,
    build_hamiltonian,
    desymmetrize_channel_amplitudes,
    symmetrize_channel_amplitudes,
    to_eigen_basis,
    to_product_basis,
)
from .montecarlo import (
    CascadeHistogram,
    DetectionEvent,
    Trajectory,
    cascade_histogram,
    quantum_jump_trajectory,
    single_decay_histogram,
    trajectory_seeds,
)
from .oracle import (
    ModeLadder,
    WWResult,
    default_ladders,
    default_single_ladder,
    integrate_single_emitter,
    integrate_ww,
    realspace_from_kspace,
)

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "CascadeHistogram",
    "Channel",
    "ConditionalAmplitudes",
    "CorrelationSeries",
    "CorrelationTable",
    "DetectionEvent",
    "ModeLadder",
    "ModelParams",
    "SingleEmitterParams",
    "SymmetrizedChannel",
    "SystemState",
    "Trajectory",
    "WWResult",
    "build_hamiltonian",
    "build_table",
    "cascade_histogram",
    "conditional_amplitudes",
    "default_ladders",
    "default_single_ladder",
    "desymmetrize_channel_amplitudes",
    "integrate_single_emitter",
    "integrate_ww",
    "normalization_ledger",
    "p_l2_l1",
    "p_l2_l2",
    "p_l2_n",
    "p_n_local",
    "p_n_n",
    "project_after_detection",
    "quantum_jump_trajectory",
    "realspace_from_kspace",
    "single_decay_histogram",
    "single_excited_amplitude",
    "single_k_amplitude",
    "single_realspace_amplitude",
    "symmetrize_channel_amplitudes",
    "to_eigen_basis",
    "to_product_basis",
    "trajectory_seeds",
    "visibility",
    "visibility_series",
]
