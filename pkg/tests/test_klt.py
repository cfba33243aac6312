import numpy as np
import pytest

from rficancel.errors import InvalidArgument
from rficancel.klt import (Eigenspace, characterize, eig_hermitian, hankel_embed,
                           lag_covariance, load_eigenspace, principal_components,
                           save_eigenspace, truncate)
from rficancel.signals import ComplexSeries, gen_circular_gaussian, power


def series(arr, fs=1.0):
    return ComplexSeries(np.asarray(arr, dtype=complex), fs)


def test_hankel_definition():
    traj = hankel_embed(series([1, 2, 3, 4]), 2)
    assert np.array_equal(traj.matrix, np.array([[1, 2, 3], [2, 3, 4]]))


def test_hankel_constant_series_is_rank_one():
    traj = hankel_embed(series(np.ones(32)), 8)
    assert np.linalg.matrix_rank(traj.matrix) == 1


def test_hankel_shape():
    x = gen_circular_gaussian(4000, 1.0, seed=0)
    traj = hankel_embed(x, 500)
    assert traj.matrix.shape == (500, 3501)


def test_hankel_window_bounds():
    x = gen_circular_gaussian(100, 1.0, seed=1)
    with pytest.raises(InvalidArgument):
        hankel_embed(x, 1)
    with pytest.raises(InvalidArgument):
        hankel_embed(x, 51)


def test_lag_covariance_zero_series():
    R = lag_covariance(hankel_embed(series(np.zeros(64)), 8))
    assert np.all(R == 0)


def test_lag_covariance_white_noise_is_identity():
    x = gen_circular_gaussian(100_000, 1.0, seed=2)
    R = lag_covariance(hankel_embed(x, 8))
    off = R - np.diag(np.diag(R))
    assert np.max(np.abs(off)) < 0.05
    assert np.allclose(np.diag(R).real, 1.0, atol=0.05)


def test_lag_covariance_single_tone_rank_one():
    n = np.arange(4096)
    L = 16
    x = series(np.exp(2j * np.pi * n / 16.0))  # integer periods per window
    R = lag_covariance(hankel_embed(x, L))
    lam = np.linalg.eigvalsh(R)[::-1]
    assert lam[0] == pytest.approx(L * power(x), rel=1e-6)
    assert lam[1] < 1e-9 * lam[0]


def test_eig_identity():
    es = eig_hermitian(np.eye(6, dtype=complex))
    assert np.allclose(es.eigenvalues, 1.0)
    assert np.allclose(es.phi.conj().T @ es.phi, np.eye(6), atol=1e-9)


def test_eig_diagonal_with_phase_convention():
    es = eig_hermitian(np.diag([3.0, 1.0]).astype(complex))
    assert np.allclose(es.eigenvalues, [3.0, 1.0])
    assert np.allclose(np.abs(es.phi), np.eye(2), atol=1e-12)
    # anchor entries rotated to be real positive
    assert es.phi[0, 0].real > 0 and es.phi[1, 1].real > 0


def test_eig_reconstructs_random_psd():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
    R = A @ A.conj().T
    es = eig_hermitian(R)
    back = es.phi @ np.diag(es.eigenvalues) @ es.phi.conj().T
    assert np.linalg.norm(back - R) / np.linalg.norm(R) < 1e-10


def test_eig_rejects_non_hermitian():
    with pytest.raises(InvalidArgument):
        eig_hermitian(np.array([[1.0, 2.0], [0.0, 1.0]], dtype=complex))


def test_eig_orthonormal_even_when_degenerate():
    rng = np.random.default_rng(4)
    Q, _ = np.linalg.qr(rng.standard_normal((12, 12))
                        + 1j * rng.standard_normal((12, 12)))
    R = Q @ np.diag([2.0] * 6 + [1.0] * 6) @ Q.conj().T
    es = eig_hermitian((R + R.conj().T) / 2)
    assert np.linalg.norm(es.phi.conj().T @ es.phi - np.eye(12)) < 1e-9


def test_eig_deterministic():
    x = gen_circular_gaussian(2000, 1.0, seed=5)
    R = lag_covariance(hankel_embed(x, 32))
    a = eig_hermitian(R)
    b = eig_hermitian(R)
    assert np.array_equal(a.phi, b.phi)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)


def test_truncate_threshold_rule():
    es = Eigenspace(np.eye(3, dtype=complex), np.array([10.0, 5.0, 0.05]))
    assert truncate(es, 0.01).n_components == 2
    es2 = Eigenspace(np.eye(3, dtype=complex), np.array([1.0, 0.0, 0.0]))
    assert truncate(es2, 0.01).n_components == 1


def test_truncate_real_sinusoid_keeps_conjugate_pair():
    n = np.arange(2048)
    x = series(np.cos(2 * np.pi * n / 16.0).astype(complex))
    es = characterize(x, 64, rel_threshold=0.01)
    assert es.n_components == 2


def test_principal_components_identity_basis():
    x = gen_circular_gaussian(500, 1.0, seed=6)
    traj = hankel_embed(x, 10)
    es = Eigenspace(np.eye(10, dtype=complex), np.ones(10))
    assert np.allclose(principal_components(es, traj), traj.matrix)


def test_principal_components_norm_invariance():
    x = gen_circular_gaussian(500, 1.0, seed=7)
    traj = hankel_embed(x, 16)
    es = eig_hermitian(lag_covariance(traj))
    z = principal_components(es, traj)
    assert np.linalg.norm(z) == pytest.approx(np.linalg.norm(traj.matrix), rel=1e-10)


def test_principal_components_single_basis_vector():
    x = gen_circular_gaussian(300, 1.0, seed=8)
    traj = hankel_embed(x, 8)
    phi = np.zeros((8, 1), dtype=complex)
    phi[0, 0] = 1.0
    z = principal_components(Eigenspace(phi, np.ones(1)), traj)
    assert np.allclose(z[0], traj.matrix[0])


def test_eigenvalue_sum_equals_trace_and_energy():
    x = gen_circular_gaussian(5000, 1.7, seed=9)
    traj = hankel_embed(x, 40)
    R = lag_covariance(traj)
    es = eig_hermitian(R)
    tr = np.trace(R).real
    mean_energy = np.mean(np.sum(np.abs(traj.matrix) ** 2, axis=0))
    assert np.sum(es.eigenvalues) == pytest.approx(tr, rel=1e-9)
    assert tr == pytest.approx(mean_energy, rel=1e-9)


def test_eigenspace_serialization_round_trip(tmp_path):
    x = gen_circular_gaussian(2000, 1.0, seed=10, sample_rate=30.72e6)
    es = characterize(x, 24, rel_threshold=0.5)
    path = tmp_path / "phi.eig"
    save_eigenspace(path, es)
    back = load_eigenspace(path)
    assert back.window_length == es.window_length
    assert back.n_components == es.n_components
    assert back.sample_rate == es.sample_rate
    assert np.allclose(back.phi, es.phi, atol=1e-6)         # 32-bit payload
    assert np.allclose(back.eigenvalues, es.eigenvalues)    # 64-bit eigenvalues
    expected = 16 + 8 * es.window_length * es.n_components + 8 * es.n_components
    assert path.stat().st_size == expected


def test_serialized_eigenspace_survives_projection(tmp_path):
    # 32-bit interchange loses exact orthonormality; the Gram-solve projector
    # must still annihilate the loaded eigenfunctions
    from rficancel.cancel import orth_complement

    x = gen_circular_gaussian(3000, 1.0, seed=11)
    es = characterize(x, 32, rel_threshold=0.1)
    path = tmp_path / "phi.eig"
    save_eigenspace(path, es)
    loaded = load_eigenspace(path)
    P = orth_complement(loaded)
    assert np.linalg.norm(P.matrix @ loaded.phi) < 1e-8
