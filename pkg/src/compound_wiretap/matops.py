"""Complex matrix primitives used throughout the package.

Hermitian eigendecompositions come from a cyclic Jacobi solver so that every
higher-level quantity (water-filling spectra, singular values, log-determinants)
is computed by one small, auditable routine. Matrices are plain ``numpy``
arrays; validation happens at the function boundary.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, ValidationError

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
RANK_TOL = 1e-10
OFFDIAG_TOL = 1e-13


class EigDecomposition(NamedTuple):
    """Eigenvalues in descending order and the matching unitary eigenvectors (columns)."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


class SVDResult(NamedTuple):
    """``A = left @ diag(singulars) @ right^+`` with full unitary ``left`` and ``right``."""

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def sigma_matrix(self) -> np.ndarray:
        out = np.zeros((self.left.shape[0], self.right.shape[0]))
        k = self.singulars.size
        out[np.arange(k), np.arange(k)] = self.singulars
        return out

    def reconstruct(self) -> np.ndarray:
        return self.left @ self.sigma_matrix() @ self.right.conj().T


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    """Return ``A`` as a finite 2-D complex array or raise ``ValidationError``."""
    M = np.array(A, dtype=complex)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise ValidationError(f"{name} must be a non-empty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        bad = np.argwhere(~np.isfinite(M))[0]
        raise ValidationError(f"{name} has a non-finite entry at {tuple(int(i) for i in bad)}")
    return M


def as_hermitian(A, name: str = "matrix", tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate Hermitian symmetry and return the exactly symmetrized matrix."""
    M = as_matrix(A, name)
    if M.shape[0] != M.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {M.shape}")
    dev = np.abs(M - M.conj().T)
    if dev.max() > tol:
        i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise ValidationError(
            f"{name} is not Hermitian: |A[{i},{j}] - conj(A[{j},{i}])| = {dev[i, j]:.3e} > {tol:g}"
        )
    return 0.5 * (M + M.conj().T)


def gram(H) -> np.ndarray:
    """Power-gain matrix ``H^+ H`` (exactly Hermitian)."""
    H = as_matrix(H, "channel")
    W = H.conj().T @ H
    return 0.5 * (W + W.conj().T)


def _jacobi(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # cyclic complex Jacobi; A is Hermitian and already copied
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    if n == 1:
        return A.real.diagonal().copy(), V
    scale = max(1.0, float(np.linalg.norm(A)))
    cap = 100 * n * n
    rotations = 0
    iu = np.triu_indices(n, 1)
    while True:
        off = np.sqrt(2.0 * np.sum(np.abs(A[iu]) ** 2))
        if off <= OFFDIAG_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = A[p, q]
                absb = abs(b)
                if absb < 1e-300:
                    continue
                if rotations >= cap:
                    raise ConvergenceError(
                        f"Jacobi eigensolver did not converge within {cap} rotations "
                        f"(off-diagonal norm {off:.3e})"
                    )
                phase = b / absb
                theta = (A[q, q].real - A[p, p].real) / (2.0 * absb)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                J = np.array([[c, s * phase], [-s * np.conj(phase), c]])
                idx = [p, q]
                A[:, idx] = A[:, idx] @ J
                A[idx, :] = J.conj().T @ A[idx, :]
                A[p, q] = A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                V[:, idx] = V[:, idx] @ J
                rotations += 1
    return A.real.diagonal().copy(), V


def eigh(A) -> EigDecomposition:
    """Eigendecomposition of any Hermitian matrix (no sign restriction), descending."""
    M = as_hermitian(A)
    vals, vecs = _jacobi(M.copy())
    order = np.argsort(-vals, kind="stable")
    return EigDecomposition(vals[order], vecs[:, order])


def hermitian_eig(A) -> EigDecomposition:
    """Eigendecomposition of a Hermitian PSD matrix.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero; anything more negative
    is rejected as a PSD violation.
    """
    dec = eigh(A)
    vals = dec.values
    if vals.size and vals[-1] < -PSD_TOL:
        raise ValidationError(
            f"matrix is not positive semi-definite: eigenvalue {vals[-1]:.3e} < {-PSD_TOL:g}"
        )
    return EigDecomposition(np.where(vals < 0.0, 0.0, vals), dec.vectors)


def as_psd(A, name: str = "matrix") -> np.ndarray:
    """Validate a Hermitian PSD matrix and return it symmetrized."""
    M = as_hermitian(A, name)
    lo = eigh(M).values[-1]
    if lo < -PSD_TOL:
        raise ValidationError(f"{name} is not positive semi-definite: eigenvalue {lo:.3e}")
    return M


def psd_sqrt(A) -> np.ndarray:
    """Principal square root of a PSD matrix."""
    dec = hermitian_eig(A)
    S = (dec.vectors * np.sqrt(dec.values)) @ dec.vectors.conj().T
    return 0.5 * (S + S.conj().T)


def psd_rank(A, rel_tol: float = RANK_TOL) -> int:
    """Number of eigenvalues above ``rel_tol`` times the largest one."""
    vals = hermitian_eig(A).values
    if vals.size == 0 or vals[0] <= 0.0:
        return 0
    return int(np.count_nonzero(vals > rel_tol * vals[0]))


def psd_geq(A, B, tol: float = PSD_TOL) -> bool:
    """PSD order test ``A >= B``: smallest eigenvalue of ``A - B`` is at least ``-tol``."""
    return bool(eigh(as_hermitian(A) - as_hermitian(B)).values[-1] >= -tol)


def _svd_tall(A: np.ndarray) -> SVDResult:
    rows, cols = A.shape
    dec = eigh(A.conj().T @ A)
    V = dec.vectors
    B = A @ V
    norms = np.linalg.norm(B, axis=0)
    order = np.argsort(-norms, kind="stable")
    V, B, norms = V[:, order], B[:, order], norms[order]
    Q, Rr = np.linalg.qr(B, mode="complete")
    diag = Rr.diagonal()
    mag = np.abs(diag)
    phase = np.where(mag > 0.0, diag / np.where(mag > 0.0, mag, 1.0), 1.0)
    U = Q.copy()
    U[:, :cols] = Q[:, :cols] * phase
    return SVDResult(U, norms, V)


def svd(A) -> SVDResult:
    """Singular value decomposition built on the Hermitian eigensolver.

    Right vectors come from the eigenvectors of ``A^+ A`` (or, for wide
    matrices, the left vectors from ``A A^+``); the other side is recovered by
    orthonormalizing the image and completing the basis.
    """
    M = as_matrix(A)
    rows, cols = M.shape
    if rows >= cols:
        return _svd_tall(M)
    t = _svd_tall(M.conj().T)
    return SVDResult(t.right, t.singulars, t.left)


def spectral_norm(A) -> float:
    """Largest singular value (maximum voltage gain)."""
    return float(svd(A).singulars[0])


def _logdet_ipwr_sqrt(W: np.ndarray, S: np.ndarray) -> float:
    # ln|I + S W S| via Cholesky; S is the PSD square root of R
    M = S @ W @ S
    M = 0.5 * (M + M.conj().T) + np.eye(W.shape[0])
    L = np.linalg.cholesky(M)
    return float(2.0 * np.sum(np.log(L.diagonal().real)))


def logdet_ipwr(W, R) -> float:
    """``ln|I + W R|`` in nats for PSD ``W`` and ``R`` of equal size.

    Evaluated through the Cholesky factor of the positive definite matrix
    ``I + R^{1/2} W R^{1/2}``, which has the same determinant.
    """
    W = as_psd(W, "W")
    R = as_hermitian(R, "R")
    if W.shape != R.shape:
        raise ValidationError(f"dimension mismatch: W is {W.shape}, R is {R.shape}")
    return _logdet_ipwr_sqrt(W, psd_sqrt(R))


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary: QR of a complex Gaussian with phase correction."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    d = R.diagonal()
    return Q * (d / np.abs(d))


def random_psd(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random complex PSD matrix ``G^+ G`` with ``G`` of ``rank`` rows (default ``n``)."""
    k = n if rank is None else rank
    G = rng.standard_normal((k, n)) + 1j * rng.standard_normal((k, n))
    W = G.conj().T @ G
    return 0.5 * (W + W.conj().T)
