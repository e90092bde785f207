"""Secrecy capacity of compound wiretap channels.

MIMO Gaussian channels with norm-bounded uncertainty are handled in closed
form (:mod:`.secrecy`, :mod:`.uncertainty`) and checked numerically
(:mod:`.verify`); finite-alphabet compound channels live in :mod:`.dmc`.
Rates are in nats.
"""

from .errors import ConvergenceError, InputFormatError, RankConstraintError, ValidationError, WiretapError
from .secrecy import (
    CapacityReport,
    LegitimateSpectrum,
    PowerAllocation,
    active_mode_count,
    beamforming_optimal,
    capacity_from_spectrum,
    capacity_isotropic,
    capacity_split_form,
    high_snr_asymptote,
    low_snr_capacity,
    power_allocation,
    secrecy_rate,
    threshold_power,
    water_level,
)
from .uncertainty import (
    EavesdropperUncertainty,
    LegitimateUncertainty,
    capacity_double_rank,
    capacity_double_sided,
    capacity_rank_constrained,
    equality_perturbation,
    worst_eaves_isotropic,
    worst_eaves_rank,
    worst_legit,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityReport",
    "ConvergenceError",
    "EavesdropperUncertainty",
    "InputFormatError",
    "LegitimateSpectrum",
    "LegitimateUncertainty",
    "PowerAllocation",
    "RankConstraintError",
    "ValidationError",
    "WiretapError",
    "active_mode_count",
    "beamforming_optimal",
    "capacity_double_rank",
    "capacity_double_sided",
    "capacity_from_spectrum",
    "capacity_isotropic",
    "capacity_rank_constrained",
    "capacity_split_form",
    "equality_perturbation",
    "high_snr_asymptote",
    "low_snr_capacity",
    "power_allocation",
    "secrecy_rate",
    "threshold_power",
    "water_level",
    "worst_eaves_isotropic",
    "worst_eaves_rank",
    "worst_legit",
]
