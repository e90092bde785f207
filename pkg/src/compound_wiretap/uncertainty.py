"""Worst-case channels and compound capacities for richer uncertainty models.

Two bound conventions appear for the eavesdropper: a bound on the power gain
``lambda_1(W2)`` and a bound on the voltage gain ``sigma_1(H2)``.
:class:`EavesdropperUncertainty` stores the power-gain bound only; use
:meth:`EavesdropperUncertainty.from_voltage` when the bound is on ``|H2|_2``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import matops
from .errors import RankConstraintError, ValidationError
from .matops import SVDResult
from .secrecy import CapacityReport, LegitimateSpectrum, capacity_from_spectrum, capacity_isotropic


@dataclass(frozen=True)
class EavesdropperUncertainty:
    """Eavesdropper set ``{W2 : lambda_1(W2) <= eps_power, rank(W2) <= rank_bound}``."""

    eps_power: float
    rank_bound: int | None = None

    def __post_init__(self):
        if not np.isfinite(self.eps_power) or self.eps_power < 0:
            raise ValidationError(f"eavesdropper bound must be finite and >= 0, got {self.eps_power}")
        if self.rank_bound is not None and self.rank_bound < 1:
            raise ValidationError(f"rank bound must be >= 1, got {self.rank_bound}")

    @classmethod
    def from_power(cls, eps: float, rank_bound: int | None = None) -> "EavesdropperUncertainty":
        return cls(float(eps), rank_bound)

    @classmethod
    def from_voltage(cls, eps: float, rank_bound: int | None = None) -> "EavesdropperUncertainty":
        if eps < 0:
            raise ValidationError(f"voltage bound must be >= 0, got {eps}")
        return cls(float(eps) ** 2, rank_bound)

    @property
    def eps_voltage(self) -> float:
        return float(np.sqrt(self.eps_power))


@dataclass(frozen=True)
class LegitimateUncertainty:
    """Legitimate channel ``H1 = H0 + dH`` with ``sigma_1(dH) <= epsilon1``."""

    nominal: np.ndarray
    epsilon1: float

    def __post_init__(self):
        object.__setattr__(self, "nominal", matops.as_matrix(self.nominal, "nominal channel"))
        if not np.isfinite(self.epsilon1) or self.epsilon1 < 0:
            raise ValidationError(f"epsilon1 must be finite and >= 0, got {self.epsilon1}")


def worst_eaves_isotropic(n: int, epsilon: float) -> np.ndarray:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    return float(epsilon) * np.eye(n, dtype=complex)


def _support_projector(vectors: np.ndarray, values: np.ndarray, rel_tol: float) -> tuple[np.ndarray, int]:
    if values.size == 0 or values[0] <= 0:
        return np.zeros((vectors.shape[0],) * 2, dtype=complex), 0
    keep = values > rel_tol * values[0]
    Ua = vectors[:, keep]
    P = Ua @ Ua.conj().T
    return 0.5 * (P + P.conj().T), int(keep.sum())


def worst_eaves_rank(W1, epsilon: float) -> np.ndarray:
    """``epsilon`` times the projector onto the range of ``W1``."""
    dec = matops.hermitian_eig(W1)
    P, _ = _support_projector(dec.vectors, dec.values, matops.RANK_TOL)
    return float(epsilon) * P


def worst_legit(uncert: LegitimateUncertainty) -> np.ndarray:
    """Nominal channel with every singular value shrunk by ``epsilon1`` (clipped at zero)."""
    s = matops.svd(uncert.nominal)
    shrunk = np.maximum(s.singulars - uncert.epsilon1, 0.0)
    return SVDResult(s.left, shrunk, s.right).reconstruct()


def degraded_gains(singulars_H0, epsilon1: float) -> np.ndarray:
    s = np.asarray(singulars_H0, dtype=float)
    if np.any(s < 0) or np.any(np.diff(s) > 0):
        raise ValidationError("singular values must be nonnegative and descending")
    if epsilon1 < 0:
        raise ValidationError(f"epsilon1 must be >= 0, got {epsilon1}")
    return np.maximum(s - epsilon1, 0.0) ** 2


def equality_perturbation(A_svd: SVDResult, epsilon: float) -> np.ndarray:
    """Perturbation of spectral norm at most ``epsilon`` that shrinks each singular value by ``epsilon``."""
    if epsilon < 0:
        raise ValidationError(f"epsilon must be >= 0, got {epsilon}")
    clipped = np.minimum(A_svd.singulars, epsilon)
    return -SVDResult(A_svd.left, clipped, A_svd.right).reconstruct()


def _rank_diagnostic(r1: int, r2: int) -> str:
    return (
        f"legitimate channel rank r1={r1} exceeds the eavesdropper rank bound r2={r2}; "
        "with r1 > r2 the max-min and min-max problems need not coincide, so no compound "
        "capacity is reported"
    )


def _degraded_spectrum(H0: np.ndarray, epsilon1: float) -> tuple[LegitimateSpectrum, SVDResult]:
    s = matops.svd(H0)
    n_t = H0.shape[1]
    sig = np.zeros(n_t)
    sig[: s.singulars.size] = s.singulars
    return LegitimateSpectrum(degraded_gains(sig, epsilon1), s.right), s


def capacity_rank_constrained(W1, uncert: EavesdropperUncertainty, P_T: float) -> CapacityReport:
    """Compound capacity when the eavesdropper's rank is at most ``uncert.rank_bound``.

    Requires ``rank(W1) <= rank_bound``; the value then equals the unconstrained
    isotropic capacity and the worst eavesdropper lives on the range of ``W1``.
    """
    if uncert.rank_bound is None:
        raise ValidationError("rank-constrained capacity needs a rank bound")
    W1 = matops.as_psd(W1, "W1")
    r1 = matops.psd_rank(W1)
    if r1 > uncert.rank_bound:
        raise RankConstraintError(_rank_diagnostic(r1, uncert.rank_bound))
    rep = capacity_isotropic(W1, uncert.eps_power, P_T)
    return replace(
        rep,
        worst_eaves=worst_eaves_rank(W1, uncert.eps_power),
        diagnostics={"legit_rank": r1, "rank_bound": uncert.rank_bound},
    )


def capacity_double_sided(
    legit: LegitimateUncertainty, eaves: EavesdropperUncertainty, P_T: float
) -> CapacityReport:
    """Compound capacity with an uncertain legitimate channel and isotropic eavesdropper bound."""
    if eaves.rank_bound is not None:
        raise ValidationError("use capacity_double_rank for a rank-bounded eavesdropper")
    spec, _ = _degraded_spectrum(legit.nominal, legit.epsilon1)
    rep = capacity_from_spectrum(spec, eaves.eps_power, P_T)
    H1w = worst_legit(legit)
    return replace(rep, worst_legit=matops.gram(H1w), worst_legit_channel=H1w)


def capacity_double_rank(
    legit: LegitimateUncertainty,
    eaves: EavesdropperUncertainty,
    P_T: float,
    rng: np.random.Generator | None = None,
) -> CapacityReport:
    """Double-sided capacity with a rank-bounded eavesdropper.

    The worst eavesdropper Gram matrix is ``eps_power`` times the projector onto
    the right singular vectors of ``H0`` with nonzero singular values. A
    representative channel ``V diag(sqrt(eps_power), ..., 0) U0^+`` is built
    with a Haar-random ``V``; the capacity does not depend on that choice.
    """
    if eaves.rank_bound is None:
        raise ValidationError("capacity_double_rank needs a rank bound")
    spec, s = _degraded_spectrum(legit.nominal, legit.epsilon1)
    sig = s.singulars
    r1 = int(np.count_nonzero(sig > matops.RANK_TOL * sig[0])) if sig[0] > 0 else 0
    if r1 > eaves.rank_bound:
        raise RankConstraintError(_rank_diagnostic(r1, eaves.rank_bound))
    rep = capacity_from_spectrum(spec, eaves.eps_power, P_T)
    n_t = legit.nominal.shape[1]
    U0a = s.right[:, :r1]
    W2w = eaves.eps_power * (U0a @ U0a.conj().T)
    W2w = 0.5 * (W2w + W2w.conj().T)
    rng = np.random.default_rng() if rng is None else rng
    V = matops.random_unitary(n_t, rng)
    sigma2 = np.zeros(n_t)
    sigma2[:r1] = eaves.eps_voltage
    H2w = SVDResult(V, sigma2, s.right).reconstruct()
    H1w = worst_legit(legit)
    return replace(
        rep,
        worst_eaves=W2w,
        worst_eaves_channel=H2w,
        worst_legit=matops.gram(H1w),
        worst_legit_channel=H1w,
        diagnostics={"legit_rank": r1, "rank_bound": eaves.rank_bound},
    )
