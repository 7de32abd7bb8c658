"""Random antenna blockage masks and their effect on the channel."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class BlockageKind(str, enum.Enum):
    COMPLETE = "complete"  # b_i = 0
    PARTIAL = "partial"  # b_i = kappa * exp(j*pi/4), kappa ~ U[0, 1]
    MIXED = "mixed"  # b_i = kappa * exp(j*Phi), kappa ~ U[0, 1], Phi ~ U[0, 2*pi)


PARTIAL_PHASE = np.pi / 4


@dataclass(frozen=True)
class BlockageMask:
    """Diagonal of a blockage matrix ``B``."""

    coefficients: np.ndarray
    support: frozenset
    kind: BlockageKind = BlockageKind.MIXED

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=complex)
        support = frozenset(int(i) for i in self.support)
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "kind", BlockageKind(self.kind))
        if coeffs.ndim != 1:
            raise ValueError("mask coefficients must be a vector")
        if any(i < 0 or i >= coeffs.size for i in support):
            raise ValueError("support index out of range")
        outside = np.ones(coeffs.size, dtype=bool)
        outside[list(support)] = False
        if np.any(coeffs[outside] != 1):
            raise ValueError("unblocked elements must have coefficient 1")
        if np.any(np.abs(coeffs[~outside]) > 1 + 1e-12):
            raise ValueError("blocked coefficients must have modulus <= 1")

    @property
    def size(self) -> int:
        return int(self.coefficients.size)

    @classmethod
    def identity(cls, n: int) -> "BlockageMask":
        return cls(np.ones(n, dtype=complex), frozenset(), BlockageKind.MIXED)

    @classmethod
    def from_coefficients(cls, coefficients, kind=BlockageKind.MIXED) -> "BlockageMask":
        """Mask whose support is every element with a coefficient different from 1."""
        coefficients = np.asarray(coefficients, dtype=complex)
        support = np.flatnonzero(coefficients != 1)
        return cls(coefficients, frozenset(support.tolist()), kind)


def sample_blockage(rng: np.random.Generator, N: int, S: int, kind=BlockageKind.MIXED) -> BlockageMask:
    """Block ``S`` of ``N`` elements, chosen uniformly without replacement.

    The generator is consumed identically for every ``S`` and ``kind``, so
    masks drawn from equal generator states are nested in ``S`` and share
    their support across kinds.
    """
    kind = BlockageKind(kind)
    if N < 1:
        raise ValueError("N must be positive")
    if S < 0 or S > N:
        raise ValueError(f"S must be in [0, {N}], got {S}")
    order = rng.permutation(N)
    kappa = rng.uniform(0.0, 1.0, size=N)[:S]
    phase = rng.uniform(0.0, 2.0 * np.pi, size=N)[:S]
    support = order[:S]
    coeffs = np.ones(N, dtype=complex)
    if kind is BlockageKind.COMPLETE:
        coeffs[support] = 0.0
    elif kind is BlockageKind.PARTIAL:
        coeffs[support] = kappa * np.exp(1j * PARTIAL_PHASE)
    else:
        coeffs[support] = kappa * np.exp(1j * phase)
    return BlockageMask(coeffs, frozenset(support.tolist()), kind)


def corrupt_channel(H: np.ndarray, bs_mask: BlockageMask, ms_mask: BlockageMask) -> np.ndarray:
    """``B_MS @ H @ B_BS^H`` for diagonal masks."""
    H = np.asarray(H)
    if H.ndim != 2 or ms_mask.size != H.shape[0] or bs_mask.size != H.shape[1]:
        raise ValueError(
            f"mask sizes (MS {ms_mask.size}, BS {bs_mask.size}) do not match channel shape {H.shape}"
        )
    return ms_mask.coefficients[:, None] * H * bs_mask.coefficients.conj()[None, :]
