"""Relay-side diagnosis of BS antenna faults from the downlink training beams.

The relay sees ``y* = gamma P^H B_BS h_r + eps``.  Subtracting the known
fault-free response leaves ``y_s = gamma P^H g + eps`` with the sparse
innovation ``g = (B_BS - I) h_r``, whose support marks the faulty elements
and whose values give ``b_i = g_i / h_r[i] + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from relaycs.arrays import steering_vector
from relaycs.impairments import BlockageKind, BlockageMask
from relaycs.recovery import RecoveryResult, SolverConfig, debiased_lasso

DEGENERATE_LINK_TOL = 1e-12


class DegenerateLinkError(ValueError):
    pass


@dataclass(frozen=True)
class RelayLink:
    """Line-of-sight BS-relay link ``h_r = alpha_r * a_BS(phi_r)``."""

    h_r: np.ndarray
    gain: float = 1.0
    path_gain: complex = 1.0
    aod: float = 0.0
    snr_db: float = 30.0

    @classmethod
    def los(cls, n_bs: int, aod: float, gain: float = 1.0, path_gain: complex = 1.0, snr_db: float = 30.0):
        h_r = path_gain * steering_vector(n_bs, aod)
        return cls(h_r=h_r, gain=gain, path_gain=path_gain, aod=aod, snr_db=snr_db)

    @property
    def n_bs(self) -> int:
        return int(self.h_r.size)

    def noise_variance(self) -> float:
        """Noise level for which the mean error-free snapshot power over random unit beams is ``snr_db``."""
        ref_power = self.gain**2 * float(np.vdot(self.h_r, self.h_r).real) / self.n_bs
        return ref_power * 10.0 ** (-self.snr_db / 10.0)

    def error_free_response(self, P: np.ndarray) -> np.ndarray:
        return self.gain * (P.conj().T @ self.h_r)


@dataclass
class DiagnosisResult:
    estimated_mask: BlockageMask
    innovation: np.ndarray  # estimated g
    recovery: RecoveryResult
    success: bool | None = None
    support_errors: tuple[int, int] | None = None  # (missed, false alarm)


def simulate_relay_measurements(
    rng: np.random.Generator,
    P: np.ndarray,
    link: RelayLink,
    bs_mask: BlockageMask,
    noise_variance: float | None = None,
) -> np.ndarray:
    """Conjugated relay snapshots ``y* = gamma P^H B_BS h_r + eps``, ``eps ~ CN(0, sigma_r^2)``."""
    if P.shape[0] != link.n_bs or bs_mask.size != link.n_bs:
        raise ValueError(f"P has {P.shape[0]} rows and mask {bs_mask.size} entries, link has {link.n_bs} elements")
    sigma2 = link.noise_variance() if noise_variance is None else float(noise_variance)
    clean = link.gain * (P.conj().T @ (bs_mask.coefficients * link.h_r))
    if sigma2 == 0:
        return clean
    # (m, 2) draw: the first k noise samples do not depend on the number of beams
    w = rng.standard_normal((P.shape[1], 2))
    eps = (w[:, 0] + 1j * w[:, 1]) * np.sqrt(sigma2 / 2.0)
    return clean + eps


def innovation(y_star: np.ndarray, P: np.ndarray, link: RelayLink):
    """Return ``(y_s, gamma P^H)``: the innovation measurements and their sensing matrix."""
    return y_star - link.error_free_response(P), link.gain * P.conj().T


def mask_from_innovation(g: np.ndarray, h_r: np.ndarray, support) -> np.ndarray:
    """``b_i = g_i / h_r[i] + 1`` on ``support``, 1 elsewhere."""
    support = np.asarray(sorted(support), dtype=int)
    if np.any(np.abs(h_r) < DEGENERATE_LINK_TOL):
        raise DegenerateLinkError("relay channel has a (near) zero entry")
    b = np.ones(h_r.size, dtype=complex)
    b[support] = g[support] / h_r[support] + 1.0
    return b


def score_success(estimated_mask: BlockageMask, true_mask: BlockageMask):
    """``(success, missed, false_alarm)`` where success means identical supports."""
    if estimated_mask.size != true_mask.size:
        raise ValueError("masks have different lengths")
    missed = len(true_mask.support - estimated_mask.support)
    false_alarm = len(estimated_mask.support - true_mask.support)
    return missed == 0 and false_alarm == 0, missed, false_alarm


def recover_mask(
    y_s: np.ndarray,
    P: np.ndarray,
    link: RelayLink,
    solver_config: SolverConfig | None = None,
    true_mask: BlockageMask | None = None,
    noise_variance: float | None = None,
) -> DiagnosisResult:
    """Estimate ``B_BS`` from the innovation measurements.

    LASSO picks the faulty elements, a least-squares refit on that support
    removes the shrinkage bias, and each refitted ``g_i`` gives ``b_i``.
    Estimated coefficients outside the unit disk are projected back onto it.
    """
    config = solver_config or SolverConfig()
    if np.any(np.abs(link.h_r) < DEGENERATE_LINK_TOL):
        raise DegenerateLinkError("relay channel has a (near) zero entry")
    A = link.gain * P.conj().T
    sigma2 = link.noise_variance() if noise_variance is None else noise_variance
    g_hat, rec = debiased_lasso(A, y_s, np.sqrt(sigma2), config)
    support = rec.support
    coeffs = mask_from_innovation(g_hat, link.h_r, support)
    mag = np.abs(coeffs)
    coeffs = np.where(mag > 1.0, coeffs / np.maximum(mag, 1.0), coeffs)
    kind = true_mask.kind if true_mask is not None else BlockageKind.MIXED
    mask = BlockageMask(coeffs, frozenset(support.tolist()), kind)
    result = DiagnosisResult(estimated_mask=mask, innovation=g_hat, recovery=rec)
    if true_mask is not None:
        ok, missed, false_alarm = score_success(mask, true_mask)
        result.success = ok
        result.support_errors = (missed, false_alarm)
    return result
