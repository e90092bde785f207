import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compound_wiretap import matops
from compound_wiretap.errors import ValidationError


def _rand_herm(n, rng):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (A + A.conj().T)


def test_eigh_diagonal_sorted_descending():
    dec = matops.eigh(np.diag([1.0, 3.0, 2.0]))
    np.testing.assert_allclose(dec.values, [3.0, 2.0, 1.0])


def test_eigh_matches_numpy():
    rng = np.random.default_rng(1)
    for n in (1, 2, 3, 5, 8):
        A = _rand_herm(n, rng)
        dec = matops.eigh(A)
        np.testing.assert_allclose(dec.values, np.linalg.eigvalsh(A)[::-1], atol=1e-12)
        np.testing.assert_allclose(dec.reconstruct(), A, atol=1e-12)
        np.testing.assert_allclose(dec.vectors.conj().T @ dec.vectors, np.eye(n), atol=1e-12)


def test_eigh_rejects_non_hermitian():
    with pytest.raises(ValidationError, match=r"A\[0,1\]"):
        matops.eigh([[1.0, 2.0], [0.0, 1.0]])


def test_eigh_rejects_nonfinite():
    with pytest.raises(ValidationError, match="non-finite"):
        matops.eigh([[np.nan, 0.0], [0.0, 1.0]])


def test_hermitian_eig_clamps_tiny_negative_and_rejects_large():
    dec = matops.hermitian_eig(np.diag([1.0, -1e-12]))
    assert dec.values[-1] == 0.0
    with pytest.raises(ValidationError, match="positive semi-definite"):
        matops.hermitian_eig(np.diag([1.0, -1e-6]))


def test_repeated_eigenvalues():
    rng = np.random.default_rng(2)
    U = matops.random_unitary(4, rng)
    A = (U * np.array([2.0, 2.0, 2.0, 0.5])) @ U.conj().T
    dec = matops.eigh(A)
    np.testing.assert_allclose(dec.values, [2.0, 2.0, 2.0, 0.5], atol=1e-12)
    np.testing.assert_allclose(dec.reconstruct(), A, atol=1e-12)


def test_svd_shapes_and_reconstruction():
    rng = np.random.default_rng(3)
    for shape in [(3, 2), (2, 3), (4, 4), (1, 3), (3, 1)]:
        A = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        s = matops.svd(A)
        assert s.left.shape == (shape[0], shape[0])
        assert s.right.shape == (shape[1], shape[1])
        np.testing.assert_allclose(s.reconstruct(), A, atol=1e-12)
        np.testing.assert_allclose(s.singulars, np.linalg.svd(A, compute_uv=False), atol=1e-12)
        np.testing.assert_allclose(s.left.conj().T @ s.left, np.eye(shape[0]), atol=1e-12)


def test_svd_rank_deficient():
    A = np.diag([np.sqrt(2.0), 0.0])
    s = matops.svd(A)
    np.testing.assert_allclose(s.singulars, [np.sqrt(2.0), 0.0], atol=1e-15)
    np.testing.assert_allclose(s.reconstruct(), A, atol=1e-14)
    assert matops.spectral_norm(A) == pytest.approx(np.sqrt(2.0))


def test_logdet_identity_and_known_values():
    assert matops.logdet_ipwr(np.eye(2), np.zeros((2, 2))) == 0.0
    # ln(1 + 2*0.75) + ln(1 + 0.25)
    val = matops.logdet_ipwr(np.diag([2.0, 1.0]), np.diag([0.75, 0.25]))
    assert val == pytest.approx(np.log(2.5) + np.log(1.25), abs=1e-14)


def test_logdet_matches_slogdet_random():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(1, 6))
        W = matops.random_psd(n, rng)
        R = matops.random_psd(n, rng, rank=int(rng.integers(1, n + 1)))
        sign, ref = np.linalg.slogdet(np.eye(n) + W @ R)
        assert sign.real == pytest.approx(1.0)
        assert matops.logdet_ipwr(W, R) == pytest.approx(ref, abs=1e-10)


def test_logdet_dimension_mismatch():
    with pytest.raises(ValidationError, match="dimension"):
        matops.logdet_ipwr(np.eye(2), np.eye(3))


def test_psd_helpers():
    A = np.diag([4.0, 1.0, 0.0])
    S = matops.psd_sqrt(A)
    np.testing.assert_allclose(S @ S, A, atol=1e-14)
    assert matops.psd_rank(A) == 2
    assert matops.psd_rank(np.zeros((2, 2))) == 0
    assert matops.psd_geq(A, np.diag([1.0, 1.0, 0.0]))
    assert not matops.psd_geq(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))


def test_gram_is_hermitian():
    rng = np.random.default_rng(5)
    H = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    W = matops.gram(H)
    assert np.array_equal(W, W.conj().T)


def test_random_unitary_is_unitary():
    rng = np.random.default_rng(6)
    U = matops.random_unitary(5, rng)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(5), atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_eigh_property(n, seed):
    A = _rand_herm(n, np.random.default_rng(seed))
    dec = matops.eigh(A)
    assert np.all(np.diff(dec.values) <= 0)
    np.testing.assert_allclose(dec.reconstruct(), A, atol=1e-11)


@settings(max_examples=30, deadline=None)
@given(rows=st.integers(1, 5), cols=st.integers(1, 5), seed=st.integers(0, 2**32 - 1))
def test_svd_property(rows, cols, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    s = matops.svd(A)
    assert np.all(np.diff(s.singulars) <= 1e-12)
    np.testing.assert_allclose(s.reconstruct(), A, atol=1e-11)
