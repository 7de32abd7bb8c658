"""Geometric on-grid channel model and its sparse angular representation.

Layout of the sparse vector ``z``: it is the column-stacked ``vec(Z^T)``, where
``Z`` is the ``G_MS x G_BS`` matrix of (scaled) path gains with
``H = A_MS @ Z @ A_BS^H``.  Hence the gain of a path with BS grid index ``k``
and MS grid index ``l`` sits at ``z[k + G_BS * l]`` and

    vec(H^T) = (A_MS kron conj(A_BS)) @ z

with ``vec`` the column-stacking operator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from relaycs.arrays import SteeringDictionary


@dataclass(frozen=True)
class PathSet:
    gains: np.ndarray
    aod_indices: np.ndarray
    aoa_indices: np.ndarray

    def __post_init__(self):
        gains = np.atleast_1d(np.asarray(self.gains, dtype=complex))
        aod = np.atleast_1d(np.asarray(self.aod_indices, dtype=int))
        aoa = np.atleast_1d(np.asarray(self.aoa_indices, dtype=int))
        if gains.size < 1:
            raise ValueError("a path set needs at least one path")
        if not (gains.shape == aod.shape == aoa.shape) or gains.ndim != 1:
            raise ValueError("gains, aod_indices and aoa_indices must have equal length")
        if len(set(zip(aod.tolist(), aoa.tolist()))) != gains.size:
            raise ValueError("(aod, aoa) index pairs must be distinct")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "aod_indices", aod)
        object.__setattr__(self, "aoa_indices", aoa)

    @property
    def num_paths(self) -> int:
        return int(self.gains.size)


@dataclass(frozen=True)
class ChannelRealization:
    paths: PathSet
    matrix: np.ndarray
    sparse_coeffs: np.ndarray


def path_scale(num_paths: int, n_bs: int, n_ms: int) -> float:
    return float(np.sqrt(n_bs * n_ms / num_paths))


def dictionary_operator(bs_dict: SteeringDictionary, ms_dict: SteeringDictionary) -> np.ndarray:
    """Dense ``A_MS kron conj(A_BS)``. Only for small arrays; tests use it as an oracle."""
    return np.kron(ms_dict.matrix, bs_dict.matrix.conj())


def synthesize(paths: PathSet, bs_dict: SteeringDictionary, ms_dict: SteeringDictionary) -> np.ndarray:
    """Dense channel ``sqrt(N_BS N_MS / L) * sum_l alpha_l a_MS(theta_l) a_BS(phi_l)^H``."""
    scale = path_scale(paths.num_paths, bs_dict.num_elements, ms_dict.num_elements)
    a_ms = ms_dict.matrix[:, paths.aoa_indices]
    a_bs = bs_dict.matrix[:, paths.aod_indices]
    return scale * (a_ms * paths.gains[None, :]) @ a_bs.conj().T


def _check_indices(paths: PathSet, bs_dict: SteeringDictionary, ms_dict: SteeringDictionary):
    g_bs, g_ms = bs_dict.grid.count, ms_dict.grid.count
    if np.any(paths.aod_indices < 0) or np.any(paths.aod_indices >= g_bs):
        raise ValueError(f"AoD index out of range [0, {g_bs})")
    if np.any(paths.aoa_indices < 0) or np.any(paths.aoa_indices >= g_ms):
        raise ValueError(f"AoA index out of range [0, {g_ms})")


def sparse_vector_of(paths: PathSet, bs_dict: SteeringDictionary, ms_dict: SteeringDictionary) -> np.ndarray:
    _check_indices(paths, bs_dict, ms_dict)
    g_bs, g_ms = bs_dict.grid.count, ms_dict.grid.count
    scale = path_scale(paths.num_paths, bs_dict.num_elements, ms_dict.num_elements)
    z = np.zeros(g_bs * g_ms, dtype=complex)
    z[paths.aod_indices + g_bs * paths.aoa_indices] = scale * paths.gains
    return z


def channel_of_sparse(z: np.ndarray, bs_dict: SteeringDictionary, ms_dict: SteeringDictionary) -> np.ndarray:
    """Dense channel ``A_MS Z A_BS^H`` from the sparse vector ``z``."""
    z = np.asarray(z)
    g_bs, g_ms = bs_dict.grid.count, ms_dict.grid.count
    if z.ndim != 1 or z.size != g_bs * g_ms:
        raise ValueError(f"sparse vector must have length {g_bs * g_ms}, got {z.shape}")
    zt = z.reshape((g_bs, g_ms), order="F")  # Z^T
    return ms_dict.matrix @ zt.T @ bs_dict.matrix.conj().T


def sample_channel(
    rng: np.random.Generator,
    L: int,
    bs_dict: SteeringDictionary,
    ms_dict: SteeringDictionary,
    gains: np.ndarray | None = None,
) -> ChannelRealization:
    """Draw an on-grid L-path channel.

    Gains are CN(0, 1) unless given; the L (AoD, AoA) grid pairs are drawn
    uniformly without replacement.
    """
    g_bs, g_ms = bs_dict.grid.count, ms_dict.grid.count
    if L < 1 or L > g_bs * g_ms:
        raise ValueError(f"L must be in [1, {g_bs * g_ms}], got {L}")
    flat = rng.choice(g_bs * g_ms, size=L, replace=False)
    aod, aoa = flat % g_bs, flat // g_bs
    if gains is None:
        gains = (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / np.sqrt(2.0)
    paths = PathSet(gains=gains, aod_indices=aod, aoa_indices=aoa)
    return ChannelRealization(
        paths=paths,
        matrix=synthesize(paths, bs_dict, ms_dict),
        sparse_coeffs=sparse_vector_of(paths, bs_dict, ms_dict),
    )
