"""Photon-pair generation in multiply resonant cavities.

Closed-form and numerical observables for pairs born by parametric
down-conversion or four-wave mixing inside a cavity: spectra, fluxes,
correlation functions, joint spectral and temporal amplitudes, pulsed
response, input-output kernels, parameter estimation and synthetic
detection events.
"""
__version__ = "0.1.0"

from .core import (
    CW,
    TWO_PI,
    Axis,
    CavityMode,
    Grid2D,
    ProcessConfig,
    Rectangular,
    Sampled,
    Trace,
    gaussian_pulse,
    gaussian_pulse_spectrum,
)
from .errors import *  # noqa: F401,F403
from .kernels import BACKEND
from .cw import (
    autocorrelation_cw,
    autocorrelation_fwhm,
    cross_correlation_cw,
    flux_cw,
    flux_triply_resonant,
    mismatch_from_fwhm,
    spectrum_cw,
)
from .pulsed import acorr_pulsed, flux_pulsed, flux_rect_closed, xcorr_pulsed
from .pump import (
    cw_intracavity_energy,
    general_pulse_response,
    pump_impulse_response,
    rect_pulse_response,
    reflected_power_ratio,
)
from .biphoton import jsa, jsa_from_jta, jta_cw, jta_direct, jta_from_jsa
from .langevin import build_kernels, flux_out, g2_functions, spectra_out
from .estimation import (
    estimate_mismatch,
    fit_double_exponential,
    fit_lorentzian,
    temperature_to_mismatch,
)
from .eventgen import coincidence_histogram, sample_pairs
