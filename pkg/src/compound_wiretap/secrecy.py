"""Compound secrecy capacity under an isotropic worst-case eavesdropper.

The transmitter signals on the eigenmodes of the legitimate Gram matrix
``W1`` with gains ``g_i``; the eavesdropper's power gain is bounded by
``epsilon`` in every direction. Power per mode follows a water-filling-like
rule whose common multiplier (the water level) is found by bisection on the
total power constraint. All rates are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import matops
from .errors import ConvergenceError, ValidationError

BISECTION_ITERS = 200
LAMBDA_FLOOR = 1e-300


@dataclass(frozen=True)
class LegitimateSpectrum:
    """Eigenmode gains (descending) of ``W1`` and the unitary basis holding them."""

    gains: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        if g.ndim != 1 or g.size == 0:
            raise ValidationError("gains must be a non-empty 1-D array")
        if np.any(~np.isfinite(g)) or np.any(g < 0):
            raise ValidationError(f"gains must be finite and nonnegative, got {g}")
        if np.any(np.diff(g) > 0):
            raise ValidationError(f"gains must be sorted in descending order, got {g}")
        U = np.asarray(self.basis, dtype=complex)
        if U.shape != (g.size, g.size):
            raise ValidationError(f"basis shape {U.shape} does not match {g.size} gains")
        if np.abs(U.conj().T @ U - np.eye(g.size)).max() > 1e-10:
            raise ValidationError("basis is not unitary")
        object.__setattr__(self, "gains", g)
        object.__setattr__(self, "basis", U)

    @classmethod
    def from_gains(cls, gains) -> "LegitimateSpectrum":
        g = np.asarray(gains, dtype=float)
        return cls(g, np.eye(g.size, dtype=complex))

    @classmethod
    def from_gram(cls, W1) -> "LegitimateSpectrum":
        dec = matops.hermitian_eig(W1)
        return cls(dec.values, dec.vectors)

    @property
    def size(self) -> int:
        return self.gains.size


@dataclass(frozen=True)
class PowerAllocation:
    powers: np.ndarray
    water_level: float
    active_set: tuple[int, ...]
    total: float


@dataclass(frozen=True)
class CapacityReport:
    """Closed-form capacity together with the covariance and worst-case channels that attain it."""

    capacity: float
    allocation: PowerAllocation
    optimal_covariance: np.ndarray
    worst_eaves: np.ndarray
    high_snr_asymptote: float
    active_count: int
    epsilon: float
    gains: np.ndarray
    worst_legit: np.ndarray | None = None
    worst_legit_channel: np.ndarray | None = None
    worst_eaves_channel: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


def _as_spectrum(spectrum) -> LegitimateSpectrum:
    if isinstance(spectrum, LegitimateSpectrum):
        return spectrum
    return LegitimateSpectrum.from_gains(spectrum)


def _check_nonneg(**kw) -> None:
    for name, v in kw.items():
        if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v)):
            raise ValidationError(f"{name} must be a finite real number, got {v!r}")
        if v < 0:
            raise ValidationError(f"{name} must be nonnegative, got {v}")


def secrecy_rate(R, W1, W2) -> float:
    """``ln|I + W1 R| - ln|I + W2 R|``; may be negative for arbitrary arguments."""
    R = matops.as_hermitian(R, "R")
    W1 = matops.as_psd(W1, "W1")
    W2 = matops.as_psd(W2, "W2")
    if not (R.shape == W1.shape == W2.shape):
        raise ValidationError(
            f"dimension mismatch: R {R.shape}, W1 {W1.shape}, W2 {W2.shape}"
        )
    S = matops.psd_sqrt(R)
    return matops._logdet_ipwr_sqrt(W1, S) - matops._logdet_ipwr_sqrt(W2, S)


def _mode_powers(g: np.ndarray, epsilon: float, lam: float) -> np.ndarray:
    """Per-mode power for water level ``lam``; zero unless ``g_i > lam + epsilon``.

    The prefactor ``(eps+g)/(2 eps g)`` is cancelled against the ``eps g`` inside
    the square root, which keeps tiny ``epsilon`` finite and turns ``epsilon = 0``
    into ``1/lam - 1/g`` without a separate branch.
    """
    p = np.zeros_like(g)
    act = g > lam + epsilon
    if not np.any(act):
        return p
    ga = g[act]
    y = (ga - epsilon) / lam - 1.0
    x = 4.0 * epsilon * ga / (epsilon + ga) ** 2 * y
    p[act] = 2.0 * y / ((epsilon + ga) * (np.sqrt(1.0 + x) + 1.0))
    return p


def water_level(spectrum, epsilon: float, P_T: float) -> float:
    """Water level ``lam`` in ``(0, g1 - epsilon)`` at which the mode powers sum to ``P_T``."""
    spec = _as_spectrum(spectrum)
    _check_nonneg(epsilon=epsilon, P_T=P_T)
    if P_T <= 0:
        raise ValidationError(f"P_T must be positive, got {P_T}")
    g = spec.gains
    epsilon = float(epsilon)
    P_T = float(P_T)
    top = g[0] - epsilon
    if top <= 0:
        raise ValidationError(
            f"no eigenmode is stronger than the eavesdropper (g1={g[0]:g} <= epsilon={epsilon:g}); "
            "capacity is zero"
        )
    lo, hi = LAMBDA_FLOOR, top
    if _mode_powers(g, epsilon, lo).sum() < P_T:
        raise ConvergenceError(f"P_T={P_T:g} exceeds the power reachable at the water-level floor")
    for _ in range(BISECTION_ITERS):
        # geometric midpoint while the bracket spans orders of magnitude
        mid = math.sqrt(lo * hi) if hi > 4.0 * lo else 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        total = _mode_powers(g, epsilon, mid).sum()
        if total > P_T:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    else:
        raise ConvergenceError("water-level bisection hit its iteration cap")
    t_lo = _mode_powers(g, epsilon, lo).sum()
    t_hi = _mode_powers(g, epsilon, hi).sum()
    return float(lo if abs(t_lo - P_T) <= abs(t_hi - P_T) else hi)


def power_allocation(spectrum, epsilon: float, P_T: float) -> PowerAllocation:
    """Optimal eigenmode powers; the ``epsilon == 0`` case is classical water-filling."""
    spec = _as_spectrum(spectrum)
    _check_nonneg(epsilon=epsilon, P_T=P_T)
    g = spec.gains
    if P_T == 0 or g[0] <= epsilon:
        return PowerAllocation(np.zeros_like(g), float(g[0] - epsilon), (), float(P_T))
    lam = water_level(spec, epsilon, P_T)
    p = _mode_powers(g, float(epsilon), lam)
    active = tuple(int(i) for i in np.flatnonzero(p > 0))
    return PowerAllocation(p, lam, active, float(P_T))


def _capacity_terms(g: np.ndarray, epsilon: float, p: np.ndarray) -> float:
    return float(np.sum(np.log1p(g * p) - np.log1p(epsilon * p)))


def capacity_split_form(spectrum, epsilon: float, allocation: PowerAllocation) -> float:
    """Capacity written as high-SNR asymptote plus its negative correction (``epsilon > 0``)."""
    spec = _as_spectrum(spectrum)
    if epsilon <= 0:
        raise ValidationError("the split form needs epsilon > 0")
    total = 0.0
    for i in allocation.active_set:
        gi = spec.gains[i]
        x = 4.0 * epsilon * gi / (epsilon + gi) ** 2 * ((gi - epsilon) / allocation.water_level - 1.0)
        z = x / (math.sqrt(1.0 + x) + 1.0)
        total += math.log(gi) - math.log(epsilon) + math.log(
            (2.0 * epsilon + (epsilon + gi) * z) / (2.0 * gi + (epsilon + gi) * z)
        )
    return total


def high_snr_asymptote(gains, epsilon: float) -> float:
    """Sum of ``ln(g_i / epsilon)`` over modes stronger than the eavesdropper (``inf`` at ``epsilon = 0``)."""
    g = np.asarray(gains, dtype=float)
    strong = g[g > epsilon]
    if strong.size == 0:
        return 0.0
    if epsilon == 0:
        return math.inf
    return float(np.sum(np.log(strong) - math.log(epsilon)))


def capacity_from_spectrum(spectrum, epsilon: float, P_T: float) -> CapacityReport:
    """Compound secrecy capacity for a given eigenmode spectrum and isotropic eavesdropper ``epsilon I``."""
    spec = _as_spectrum(spectrum)
    _check_nonneg(epsilon=epsilon, P_T=P_T)
    epsilon = float(epsilon)
    alloc = power_allocation(spec, epsilon, P_T)
    g = spec.gains
    cap = max(_capacity_terms(g, epsilon, alloc.powers), 0.0)
    U = spec.basis
    R = (U * alloc.powers) @ U.conj().T
    R = 0.5 * (R + R.conj().T)
    return CapacityReport(
        capacity=cap,
        allocation=alloc,
        optimal_covariance=R,
        worst_eaves=epsilon * np.eye(spec.size, dtype=complex),
        high_snr_asymptote=high_snr_asymptote(g, epsilon),
        active_count=len(alloc.active_set),
        epsilon=epsilon,
        gains=g,
    )


def capacity_isotropic(W1, epsilon: float, P_T: float) -> CapacityReport:
    """Capacity when ``W1`` is known and the eavesdropper satisfies ``lambda_1(W2) <= epsilon``."""
    _check_nonneg(epsilon=epsilon, P_T=P_T)
    return capacity_from_spectrum(LegitimateSpectrum.from_gram(W1), epsilon, P_T)


def threshold_power(spectrum, epsilon: float, m: int) -> float:
    """Smallest total power above which at least ``m`` modes are active.

    Returns ``inf`` when mode ``m`` is not stronger than the eavesdropper.
    At ``epsilon = 0`` this is the classical ``sum(1/g_m - 1/g_i)``.
    """
    spec = _as_spectrum(spectrum)
    _check_nonneg(epsilon=epsilon)
    if not (2 <= m <= spec.size):
        raise ValidationError(f"m must lie in [2, {spec.size}], got {m}")
    g = spec.gains
    gm = g[m - 1]
    if gm - epsilon <= 0:
        return math.inf
    head = g[: m - 1]
    y = (head - gm) / (gm - epsilon)
    x = 4.0 * epsilon * head / (epsilon + head) ** 2 * y
    return float(np.sum(2.0 * y / ((epsilon + head) * (np.sqrt(1.0 + x) + 1.0))))


def beamforming_optimal(spectrum, epsilon: float, P_T: float) -> bool:
    """True when a single eigenmode carries all the power at ``P_T``."""
    spec = _as_spectrum(spectrum)
    _check_nonneg(epsilon=epsilon, P_T=P_T)
    if spec.gains[0] <= epsilon:
        raise ValidationError(
            f"g1={spec.gains[0]:g} <= epsilon={epsilon:g}: no beamformer achieves a positive rate"
        )
    if spec.size == 1:
        return True
    return bool(P_T <= threshold_power(spec, epsilon, 2))


def low_snr_capacity(g1: float, epsilon: float, P_T: float) -> float:
    _check_nonneg(g1=g1, epsilon=epsilon, P_T=P_T)
    return math.log1p(g1 * P_T) - math.log1p(epsilon * P_T)


def active_mode_count(spectrum, epsilon: float, P_T: float) -> int:
    return len(power_allocation(spectrum, epsilon, P_T).active_set)
