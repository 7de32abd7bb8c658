import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaycs.channel import dictionary_operator, sample_channel
from relaycs.impairments import BlockageMask, corrupt_channel, sample_blockage
from relaycs.sounding import (
    ALPHABET,
    SoundingCodebook,
    assemble_psi,
    assemble_psi_baseline,
    baseline_codebook,
    baseline_row_order,
    random_beams,
    sample_codebook,
    sensing_matrix,
    sensing_matrix_baseline,
    simulate_measurements,
)
from tests.conftest import crandn, small_dicts


def bilinear_snapshots(codebook, H):
    """q_m^H H p_n for every snapshot, combiner-major."""
    out = []
    for m in range(codebook.m_ms):
        q = codebook.Q[:, m]
        for n in range(codebook.M):
            p = codebook.P[:, m * codebook.M + n]
            out.append(np.vdot(q, H @ p))
    return np.array(out)


def vec_t(H):
    return H.T.reshape(-1, order="F")


@st.composite
def small_problem(draw):
    seed = draw(st.integers(0, 2**32 - 1))
    n_bs, n_ms = draw(st.integers(1, 8)), draw(st.integers(1, 8))
    m_ms = draw(st.integers(1, 4))
    M = draw(st.integers(1, 4))
    rng = np.random.default_rng(seed)
    return rng, sample_codebook(rng, n_bs, n_ms, M * m_ms, m_ms)


def test_codebook_shapes(rng):
    cb = sample_codebook(rng, 64, 32, 120, 4)
    assert cb.P.shape == (64, 120) and cb.Q.shape == (32, 4) and cb.M == 30
    cb = sample_codebook(rng, 64, 32, 121, 1)
    assert cb.M == 121


def test_codebook_divisibility(rng):
    with pytest.raises(ValueError):
        sample_codebook(rng, 8, 4, 121, 4)


def test_codebook_alphabet_and_norm(rng):
    cb = sample_codebook(rng, 16, 8, 12, 3)
    np.testing.assert_allclose(np.linalg.norm(cb.P, axis=0), 1, atol=1e-14)
    np.testing.assert_allclose(np.linalg.norm(cb.Q, axis=0), 1, atol=1e-14)
    scaled = np.round(cb.P * 4).ravel()
    assert set(scaled.tolist()) <= set(ALPHABET.tolist())


def test_alphabet_frequencies():
    rng = np.random.default_rng(0)
    beams = random_beams(rng, 100_000, 1).ravel()
    for symbol in ALPHABET:
        assert abs(np.mean(beams == symbol) - 0.25) < 0.01


def test_beams_nest_in_count():
    a = random_beams(np.random.default_rng(9), 20, 8)
    b = random_beams(np.random.default_rng(9), 50, 8)
    np.testing.assert_array_equal(a, b[:, :20])


def test_all_ones_codebook():
    cb = SoundingCodebook(P=np.ones((1, 6), complex), Q=np.ones((1, 2), complex))
    np.testing.assert_array_equal(assemble_psi(cb), np.ones((6, 1)))


def test_single_combiner_block(rng):
    cb = sample_codebook(rng, 5, 3, 7, 1)
    np.testing.assert_array_equal(assemble_psi(cb), np.kron(cb.Q[:, 0].conj()[None, :], cb.P.T))


@settings(max_examples=100, deadline=None)
@given(small_problem())
def test_stacking_identity(problem):
    rng, cb = problem
    H = crandn(rng, cb.n_ms, cb.n_bs)
    np.testing.assert_allclose(assemble_psi(cb) @ vec_t(H), bilinear_snapshots(cb, H), atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(small_problem())
def test_corruption_factorization(problem):
    rng, cb = problem
    H = crandn(rng, cb.n_ms, cb.n_bs)
    bs = sample_blockage(rng, cb.n_bs, rng.integers(0, cb.n_bs + 1), "mixed")
    ms = sample_blockage(rng, cb.n_ms, rng.integers(0, cb.n_ms + 1), "mixed")
    psi = assemble_psi(cb)
    lhs = psi @ np.kron(np.diag(ms.coefficients), np.diag(bs.coefficients).conj()) @ vec_t(H)
    rhs = psi @ vec_t(corrupt_channel(H, bs, ms))
    np.testing.assert_allclose(lhs, rhs, atol=1e-12)


def test_baseline_single_row(rng):
    cb = sample_codebook(rng, 4, 3, 1, 1)
    expected = np.kron(cb.P[:, 0][None, :], cb.Q[:, 0].conj()[None, :])
    np.testing.assert_array_equal(assemble_psi_baseline(cb), expected)


@pytest.mark.parametrize("m_bs,m_ms", [(6, 2), (12, 3), (5, 5), (4, 1)])
def test_baseline_measures_bilinear_forms(rng, m_bs, m_ms):
    cb = sample_codebook(rng, 5, 4, m_bs, m_ms)
    H = crandn(rng, 4, 5)
    psi_a = assemble_psi_baseline(cb)
    assert psi_a.shape == (m_bs, 20)
    vec_h = H.reshape(-1, order="F")
    P1 = cb.beam_group(0)
    for n in range(cb.M):
        for m in range(m_ms):
            expected = np.vdot(cb.Q[:, m], H @ P1[:, n])
            assert abs(psi_a[n * m_ms + m] @ vec_h - expected) < 1e-12
    # after moving rows to combiner-major order and columns from the vec(H) to
    # the vec(H^T) layout, Psi_A is the stacked operator of the repeated-beam schedule
    i, j = np.divmod(np.arange(20), 5)  # vec(H^T) column i * N_BS + j holds H[i, j]
    reordered = psi_a[baseline_row_order(cb.M, m_ms)][:, j * 4 + i]
    np.testing.assert_array_equal(reordered, assemble_psi(baseline_codebook(cb)))


def test_sensing_matrix_matches_dense_kronecker(rng):
    bs, ms = small_dicts(5, 4, 7, 6)
    cb = sample_codebook(rng, 5, 4, 9, 3)
    psi = assemble_psi(cb)
    dense = psi @ dictionary_operator(bs, ms)
    np.testing.assert_allclose(sensing_matrix(psi, bs, ms), dense, atol=1e-12)
    bmask = sample_blockage(rng, 5, 2, "mixed")
    mmask = sample_blockage(rng, 4, 1, "mixed")
    dense_hat = psi @ np.kron(np.diag(mmask.coefficients), np.diag(bmask.coefficients).conj()) @ dictionary_operator(bs, ms)
    np.testing.assert_allclose(sensing_matrix(psi, bs, ms, bmask, mmask), dense_hat, atol=1e-12)


def test_identity_masks_give_fault_free_matrix(rng):
    bs, ms = small_dicts(6, 4)
    psi = assemble_psi(sample_codebook(rng, 6, 4, 8, 2))
    masked = sensing_matrix(psi, bs, ms, BlockageMask.identity(6), BlockageMask.identity(4))
    assert np.array_equal(masked, sensing_matrix(psi, bs, ms))


def test_sensing_matrix_end_to_end(rng, full_dicts):
    bs, ms = full_dicts
    ch = sample_channel(rng, 3, bs, ms)
    cb = sample_codebook(rng, 64, 32, 40, 4)
    phi = sensing_matrix(assemble_psi(cb), bs, ms)
    assert phi.shape == (40, 64 * 32)
    np.testing.assert_allclose(phi @ ch.sparse_coeffs, bilinear_snapshots(cb, ch.matrix), atol=1e-10)
    mask = sample_blockage(rng, 64, 16, "mixed")
    phi_hat = sensing_matrix(assemble_psi(cb), bs, ms, bs_mask=mask)
    H_hat = corrupt_channel(ch.matrix, mask, BlockageMask.identity(32))
    np.testing.assert_allclose(phi_hat @ ch.sparse_coeffs, bilinear_snapshots(cb, H_hat), atol=1e-10)


def test_baseline_sensing_matrix(rng):
    bs, ms = small_dicts(5, 4, 6, 5)
    cb = sample_codebook(rng, 5, 4, 12, 3)
    phi_a = sensing_matrix_baseline(assemble_psi_baseline(cb), cb.M, cb.m_ms, bs, ms)
    np.testing.assert_allclose(phi_a, sensing_matrix(assemble_psi(baseline_codebook(cb)), bs, ms), atol=1e-12)


def test_noiseless_measurements(rng, full_dicts):
    bs, ms = full_dicts
    ch = sample_channel(rng, 3, bs, ms)
    cb = sample_codebook(rng, 64, 32, 48, 4)
    batch = simulate_measurements(rng, cb, ch.matrix, 10.0, noise_variance=0.0)
    np.testing.assert_allclose(batch.y, sensing_matrix(assemble_psi(cb), bs, ms) @ ch.sparse_coeffs, atol=1e-10)


def test_zero_channel_gives_combined_noise():
    rng = np.random.default_rng(11)
    cb = sample_codebook(rng, 8, 4, 4, 4)
    samples = np.concatenate(
        [simulate_measurements(rng, cb, np.zeros((4, 8)), 0.0, noise_variance=2.0).y for _ in range(5000)]
    )
    # unit-norm combiners: per-sample variance sigma^2 * ||q||^2 = 2
    assert abs(np.mean(np.abs(samples) ** 2) / 2.0 - 1) < 0.03


@pytest.mark.parametrize("snr_db", [-15.0, -5.0, 5.0, 10.0])
def test_noise_calibration(full_dicts, snr_db):
    bs, ms = full_dicts
    rng = np.random.default_rng(int(snr_db) + 100)
    signal, noise = [], []
    for _ in range(250):
        ch = sample_channel(rng, 3, bs, ms)
        cb = sample_codebook(rng, 64, 32, 40, 4)
        clean = simulate_measurements(rng, cb, ch.matrix, snr_db, noise_variance=0.0).y
        noisy = simulate_measurements(rng, cb, ch.matrix, snr_db).y
        signal.append(np.abs(clean) ** 2)
        noise.append(np.abs(noisy - clean) ** 2)
    measured = 10 * np.log10(np.mean(np.concatenate(signal)) / np.mean(np.concatenate(noise)))
    assert abs(measured - snr_db) < 0.3


def test_dimension_errors(rng):
    cb = sample_codebook(rng, 4, 3, 4, 2)
    with pytest.raises(ValueError):
        simulate_measurements(rng, cb, np.zeros((4, 3)), 10)
    bs, ms = small_dicts(4, 3)
    with pytest.raises(ValueError):
        sensing_matrix(np.zeros((4, 11)), bs, ms)
