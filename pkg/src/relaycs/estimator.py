"""MS-side channel estimation under the fault-free, fault-unaware and relay-aided regimes."""

from __future__ import annotations

import enum

import numpy as np

from relaycs.arrays import SteeringDictionary
from relaycs.channel import channel_of_sparse
from relaycs.impairments import BlockageMask
from relaycs.recovery import RecoveryResult, SolverConfig, SupportRule, debiased_lasso
from relaycs.sounding import (
    MeasurementBatch,
    SoundingCodebook,
    assemble_psi,
    assemble_psi_baseline,
    sensing_matrix,
    sensing_matrix_baseline,
)


class EstimationRegime(str, enum.Enum):
    FAULT_FREE = "fault_free"
    FAULT_UNAWARE = "fault_unaware"
    RELAY_AIDED = "relay_aided"
    BASELINE_PSI_A = "baseline_psi_a"


class UndefinedMetricError(ValueError):
    pass


def nmse(H: np.ndarray, H_est: np.ndarray) -> float:
    """``||H - H_est||_F^2 / ||H||_F^2``."""
    H = np.asarray(H)
    H_est = np.asarray(H_est)
    if H.shape != H_est.shape:
        raise ValueError(f"shape mismatch {H.shape} vs {H_est.shape}")
    ref = float(np.sum(np.abs(H) ** 2))
    if ref == 0:
        raise UndefinedMetricError("NMSE is undefined for an all-zero true channel")
    return float(np.sum(np.abs(H - H_est) ** 2)) / ref


def regime_sensing_matrix(
    codebook: SoundingCodebook,
    bs_dict: SteeringDictionary,
    ms_dict: SteeringDictionary,
    regime: EstimationRegime,
    mask_knowledge: BlockageMask | None = None,
) -> np.ndarray:
    regime = EstimationRegime(regime)
    if regime is EstimationRegime.BASELINE_PSI_A:
        psi_a = assemble_psi_baseline(codebook)
        return sensing_matrix_baseline(psi_a, codebook.M, codebook.m_ms, bs_dict, ms_dict)
    psi = assemble_psi(codebook)
    if regime is EstimationRegime.RELAY_AIDED:
        if mask_knowledge is None:
            raise ValueError("relay-aided estimation needs the diagnosed BS mask")
        return sensing_matrix(psi, bs_dict, ms_dict, bs_mask=mask_knowledge)
    # fault-unaware deliberately uses the nominal (fault-free) sensing matrix
    return sensing_matrix(psi, bs_dict, ms_dict)


# paths with random gains are often well below a tenth of the strongest one
CHANNEL_SOLVER = SolverConfig(support_rule=SupportRule("relative", 0.01))


def estimate_channel(
    batch: MeasurementBatch,
    codebook: SoundingCodebook,
    bs_dict: SteeringDictionary,
    ms_dict: SteeringDictionary,
    regime=EstimationRegime.FAULT_FREE,
    mask_knowledge: BlockageMask | None = None,
    solver_config: SolverConfig | None = None,
    sensing: np.ndarray | None = None,
) -> tuple[np.ndarray, RecoveryResult]:
    """Recover ``H`` from ``batch`` with the sensing matrix the regime calls for.

    For ``baseline_psi_a`` the batch must come from
    :func:`relaycs.sounding.baseline_codebook`.  ``sensing`` lets callers reuse
    a precomputed sensing matrix.
    """
    config = solver_config or CHANNEL_SOLVER
    A = sensing if sensing is not None else regime_sensing_matrix(codebook, bs_dict, ms_dict, regime, mask_knowledge)
    if A.shape[0] != batch.y.size:
        raise ValueError(f"sensing matrix has {A.shape[0]} rows but batch has {batch.y.size} snapshots")
    z_hat, rec = debiased_lasso(A, batch.y, np.sqrt(batch.noise_variance), config)
    return channel_of_sparse(z_hat, bs_dict, ms_dict), rec
