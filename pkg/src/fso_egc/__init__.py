"""Closed-form and Monte Carlo performance of equal-gain-combining FSO receivers
under mixture-Gamma turbulence and zero-boresight pointing errors."""

__version__ = "0.1.0"

from .errors import DomainError, NonConvergence, PoleCollision, ValidityError
from .mixture import GammaGammaParams, MixtureGamma, fit_gamma_gamma, mg_cdf, mg_moment, mg_pdf
from .pointing import PointingModel, a0_from_geometry, pointing_cdf, pointing_pdf, sample_pointing
from .egc import (
    BPSK,
    EgcLink,
    ModulationParams,
    TermIndex,
    aber,
    appendix_convolution_check,
    diversity_order,
    outage_asymptotic,
    outage_probability,
    scintillation_index,
    snr_cdf,
    snr_moment,
    snr_pdf,
    term_log_coefficient,
)

__all__ = [
    "__version__",
    "DomainError", "NonConvergence", "PoleCollision", "ValidityError",
    "GammaGammaParams", "MixtureGamma", "fit_gamma_gamma", "mg_cdf", "mg_moment", "mg_pdf",
    "PointingModel", "a0_from_geometry", "pointing_cdf", "pointing_pdf", "sample_pointing",
    "BPSK", "EgcLink", "ModulationParams", "TermIndex", "aber", "appendix_convolution_check",
    "diversity_order", "outage_asymptotic", "outage_probability", "scintillation_index",
    "snr_cdf", "snr_moment", "snr_pdf", "term_log_coefficient",
]
