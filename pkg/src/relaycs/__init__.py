"""Compressed-sensing mmWave channel estimation with faulty antenna arrays.

Simulation library for sounding a BS-MS link with random beams, corrupting
the arrays with blockages, diagnosing BS faults at a relay and correcting the
MS sensing matrix with the diagnosed mask.
"""

from relaycs.arrays import AngleGrid, SteeringDictionary, build_dictionary, sine_grid, steering_vector
from relaycs.channel import ChannelRealization, PathSet, channel_of_sparse, sample_channel, sparse_vector_of
from relaycs.diagnosis import DiagnosisResult, RelayLink, innovation, recover_mask, score_success, simulate_relay_measurements
from relaycs.estimator import EstimationRegime, estimate_channel, nmse
from relaycs.impairments import BlockageKind, BlockageMask, corrupt_channel, sample_blockage
from relaycs.recovery import (
    RankError,
    RecoveryResult,
    SolverConfig,
    SupportRule,
    debias,
    detect_support,
    lasso_solve,
    omp_solve,
)
from relaycs.sounding import (
    MeasurementBatch,
    SoundingCodebook,
    assemble_psi,
    assemble_psi_baseline,
    baseline_codebook,
    sample_codebook,
    sensing_matrix,
    sensing_matrix_baseline,
    simulate_measurements,
)

__version__ = "0.1.0"

__all__ = [
    "AngleGrid",
    "BlockageKind",
    "BlockageMask",
    "ChannelRealization",
    "DiagnosisResult",
    "EstimationRegime",
    "MeasurementBatch",
    "PathSet",
    "RankError",
    "RecoveryResult",
    "RelayLink",
    "SolverConfig",
    "SoundingCodebook",
    "SteeringDictionary",
    "SupportRule",
    "assemble_psi",
    "assemble_psi_baseline",
    "baseline_codebook",
    "build_dictionary",
    "channel_of_sparse",
    "corrupt_channel",
    "debias",
    "detect_support",
    "estimate_channel",
    "innovation",
    "lasso_solve",
    "nmse",
    "omp_solve",
    "recover_mask",
    "sample_blockage",
    "sample_channel",
    "sample_codebook",
    "score_success",
    "sensing_matrix",
    "sensing_matrix_baseline",
    "simulate_measurements",
    "simulate_relay_measurements",
    "sine_grid",
    "sparse_vector_of",
    "steering_vector",
]
