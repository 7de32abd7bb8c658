"""Random-beam sounding: codebooks, stacked measurement operators and noisy snapshots.

Snapshot ordering is combiner-major: entry ``m * M + n`` of ``y`` is
``q_m^H H p_{mM+n}`` plus combined noise, so the rows of ``Psi`` are the
blocks ``q_m^H kron P_m^T`` stacked over ``m``.  ``Psi`` acts on
``vec(H^T)`` (column stacking).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from relaycs.arrays import SteeringDictionary
from relaycs.impairments import BlockageMask

ALPHABET = np.array([1, -1, 1j, -1j], dtype=complex)


@dataclass(frozen=True)
class SoundingCodebook:
    P: np.ndarray  # N_BS x M_BS transmit beams
    Q: np.ndarray  # N_MS x M_MS receive combiners

    def __post_init__(self):
        if self.P.ndim != 2 or self.Q.ndim != 2:
            raise ValueError("P and Q must be matrices")
        if self.P.shape[1] % self.Q.shape[1]:
            raise ValueError(f"M_MS={self.Q.shape[1]} must divide M_BS={self.P.shape[1]}")

    @property
    def n_bs(self) -> int:
        return self.P.shape[0]

    @property
    def n_ms(self) -> int:
        return self.Q.shape[0]

    @property
    def m_bs(self) -> int:
        return self.P.shape[1]

    @property
    def m_ms(self) -> int:
        return self.Q.shape[1]

    @property
    def M(self) -> int:
        """Snapshots per combiner."""
        return self.m_bs // self.m_ms

    def beam_group(self, m: int) -> np.ndarray:
        return self.P[:, m * self.M:(m + 1) * self.M]


@dataclass(frozen=True)
class MeasurementBatch:
    y: np.ndarray
    noise_variance: float
    snr_db: float


def random_beams(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """``n x count`` matrix of unit-norm beams with entries in {+1, -1, +j, -j} / sqrt(n)."""
    # beam-major draw: the first k beams do not depend on count
    return ALPHABET[rng.integers(0, 4, size=(count, n))].T / np.sqrt(n)


def sample_codebook(
    rng: np.random.Generator,
    N_BS: int,
    N_MS: int,
    M_BS: int,
    M_MS: int,
    combiner_rng: np.random.Generator | None = None,
) -> SoundingCodebook:
    """Beams and combiners with i.i.d. entries from {+1, -1, +j, -j} / sqrt(N).

    The first k beams depend only on the generator state, not on ``M_BS``.
    Passing a separate ``combiner_rng`` makes ``P`` independent of ``M_MS``
    as well, which gives nested codebooks across a measurement sweep.
    """
    if min(N_BS, N_MS, M_BS, M_MS) < 1:
        raise ValueError("array sizes and measurement counts must be positive")
    if M_BS % M_MS:
        raise ValueError(f"M_MS={M_MS} must divide M_BS={M_BS}")
    P = random_beams(rng, M_BS, N_BS)
    Q = random_beams(rng if combiner_rng is None else combiner_rng, M_MS, N_MS)
    return SoundingCodebook(P=P, Q=Q)


def baseline_codebook(codebook: SoundingCodebook) -> SoundingCodebook:
    """Codebook that repeats the first beam group for every combiner.

    This is the beam schedule implied by ``Psi_A = P_1^T kron Q^H``: only
    ``M_BS / M_MS`` distinct BS beams are ever transmitted.
    """
    P1 = codebook.beam_group(0)
    return SoundingCodebook(P=np.tile(P1, (1, codebook.m_ms)), Q=codebook.Q)


def assemble_psi(codebook: SoundingCodebook) -> np.ndarray:
    """Stack ``q_m^H kron P_m^T`` for m = 1..M_MS into an ``M_BS x (N_MS N_BS)`` matrix."""
    blocks = [np.kron(codebook.Q[:, m].conj()[None, :], codebook.beam_group(m).T) for m in range(codebook.m_ms)]
    return np.vstack(blocks)


def assemble_psi_baseline(codebook: SoundingCodebook) -> np.ndarray:
    """``P_1^T kron Q^H``, acting on ``vec(H)``; row ``n * M_MS + m`` measures ``q_m^H H p_n``."""
    return np.kron(codebook.beam_group(0).T, codebook.Q.conj().T)


def _psi_tensor(psi: np.ndarray, n_bs: int, n_ms: int) -> np.ndarray:
    if psi.ndim != 2 or psi.shape[1] != n_bs * n_ms:
        raise ValueError(f"Psi must have {n_bs * n_ms} columns, got shape {psi.shape}")
    # column i * N_BS + j of a row multiplies H[i, j]
    return psi.reshape(psi.shape[0], n_ms, n_bs)


def sensing_matrix(
    psi: np.ndarray,
    bs_dict: SteeringDictionary,
    ms_dict: SteeringDictionary,
    bs_mask: BlockageMask | None = None,
    ms_mask: BlockageMask | None = None,
) -> np.ndarray:
    """``Psi (B_MS kron conj(B_BS)) (A_MS kron conj(A_BS))`` without forming the Kronecker factors.

    Columns follow the ``z`` layout of :mod:`relaycs.channel`.  With no masks
    this is the fault-free sensing matrix.
    """
    n_bs, n_ms = bs_dict.num_elements, ms_dict.num_elements
    T = _psi_tensor(psi, n_bs, n_ms)
    if bs_mask is not None or ms_mask is not None:
        b_bs = np.ones(n_bs, complex) if bs_mask is None else bs_mask.coefficients
        b_ms = np.ones(n_ms, complex) if ms_mask is None else ms_mask.coefficients
        if b_bs.size != n_bs or b_ms.size != n_ms:
            raise ValueError("mask sizes do not match the array sizes")
        T = T * (b_ms[:, None] * b_bs.conj()[None, :])[None, :, :]
    # Phi[r, a * G_BS + b] = sum_ij T[r, i, j] A_MS[i, a] conj(A_BS[j, b])
    tmp = T @ bs_dict.matrix.conj()  # r, i, b
    phi = np.einsum("rib,ia->rab", tmp, ms_dict.matrix, optimize=True)
    return phi.reshape(psi.shape[0], -1)


def baseline_row_order(M: int, m_ms: int) -> np.ndarray:
    """Row permutation taking ``Psi_A`` (beam-major) to combiner-major snapshot order."""
    m, n = np.divmod(np.arange(M * m_ms), M)
    return n * m_ms + m


def sensing_matrix_baseline(
    psi_a: np.ndarray,
    M: int,
    m_ms: int,
    bs_dict: SteeringDictionary,
    ms_dict: SteeringDictionary,
) -> np.ndarray:
    """Sensing matrix of the baseline ``Psi_A``.

    ``Psi_A`` acts on column-stacked ``vec(H) = (conj(A_BS) kron A_MS) vec(Z)``.
    The result is returned with rows in combiner-major order (matching
    measurements simulated with :func:`baseline_codebook`) and columns in the
    shared ``z = vec(Z^T)`` layout, so estimates feed straight into
    :func:`relaycs.channel.channel_of_sparse`.
    """
    n_bs, n_ms = bs_dict.num_elements, ms_dict.num_elements
    g_bs, g_ms = bs_dict.grid.count, ms_dict.grid.count
    if psi_a.shape != (M * m_ms, n_bs * n_ms):
        raise ValueError(f"Psi_A must have shape {(M * m_ms, n_bs * n_ms)}, got {psi_a.shape}")
    # column j * N_MS + i multiplies H[i, j]
    T = psi_a.reshape(psi_a.shape[0], n_bs, n_ms)
    tmp = T @ ms_dict.matrix  # r, j, a
    phi_a = np.einsum("rja,jb->rba", tmp, bs_dict.matrix.conj(), optimize=True)  # vec(Z): index a + G_MS b
    phi = phi_a.transpose(0, 2, 1).reshape(psi_a.shape[0], g_ms * g_bs)  # index a * G_BS + b
    return phi[baseline_row_order(M, m_ms)]


def noise_variance_for_snr(snr_db: float) -> float:
    """Per-snapshot noise variance for unit average received power.

    With unit-norm beams and combiners and ``E||H||_F^2 = N_BS N_MS``,
    ``E|q^H H p|^2 = 1`` so ``sigma^2 = 10^(-snr_db / 10)``.
    """
    return float(10.0 ** (-snr_db / 10.0))


def simulate_measurements(
    rng: np.random.Generator,
    codebook: SoundingCodebook,
    H_effective: np.ndarray,
    snr_db: float,
    noise_variance: float | None = None,
) -> MeasurementBatch:
    """Noisy snapshots ``y[mM+n] = q_m^H H p_n + q_m^H e_{m,n}`` with ``e ~ CN(0, sigma^2 I)``.

    ``noise_variance`` overrides the value derived from ``snr_db`` (pass 0
    for noiseless data).
    """
    H = np.asarray(H_effective)
    if H.shape != (codebook.n_ms, codebook.n_bs):
        raise ValueError(f"channel shape {H.shape} does not match codebook ({codebook.n_ms}, {codebook.n_bs})")
    sigma2 = noise_variance_for_snr(snr_db) if noise_variance is None else float(noise_variance)
    M, m_ms = codebook.M, codebook.m_ms
    # (m, n) -> q_m^H H p_{mM+n}
    QH = codebook.Q.conj().T @ H  # m_ms x N_BS
    P_groups = codebook.P.reshape(codebook.n_bs, m_ms, M)
    clean = np.einsum("mj,jmn->mn", QH, P_groups).reshape(-1)
    if sigma2 > 0:
        E = rng.standard_normal((m_ms, M, codebook.n_ms)) + 1j * rng.standard_normal((m_ms, M, codebook.n_ms))
        E *= np.sqrt(sigma2 / 2.0)
        noise = np.einsum("im,mni->mn", codebook.Q.conj(), E).reshape(-1)
        y = clean + noise
    else:
        y = clean
    return MeasurementBatch(y=y, noise_variance=sigma2, snr_db=float(snr_db))
