"""Spectra, multiplicities and zero modes of magnetic Dirac operators on S^2, S^3 and R^3.

Fields aligned with the Hopf fibers separate into 2-D Dirac operators on
S^2 coupled to monopole bundles; the S^3 spectrum is assembled from those
blocks, zero modes are written down explicitly, and kernel elements are
transferred to R^3 by stereographic projection.
"""

from .aharonov_casher import ZeroModeBasis, build_zero_modes, kernel_subspace_angle
from .config import RunConfig, load_config, parse_config
from .dirac2d import Spectrum2D, reduce_axisymmetric, spectrum_2d
from .errors import (AmbiguousZeroMode, ConfigError, DegreeTooLarge, FluxMismatch, GridTooCoarse,
                     HopfDiracError, HypothesisViolation, IllConditionedGram, MergeCollision,
                     NoConvergence, NonConvergentNorm, NotPositiveDefinite, NumericalError, ParseError,
                     QuadratureFailure, ValidationError)
from .estimator import HopfDiracSpectrum
from .fields import ring_bump_profile, uniform_profile
from .oracles import s2_constant_field_oracle, s3_free_oracle
from .reports import emit_spectrum, load_spectrum_json
from .spectrum3d import (SpectralLine, SpectrumReport, assemble_spectrum, block_identity_check,
                         kernel_dimension, lower_bound_check)
from .sphere_bundle import (FieldProfile, FluxConstants, GaugeData, build_gauge, build_ring_gauge,
                            chart_flux_check, flux_and_constants)
from .transfer_r3 import constant_field_kernel, transfer_zero_mode
from .validation import check_profile

__version__ = "0.1.0"

__all__ = [
    "AmbiguousZeroMode", "ConfigError", "DegreeTooLarge", "FieldProfile", "FluxConstants", "FluxMismatch",
    "GaugeData", "GridTooCoarse", "HopfDiracError", "HopfDiracSpectrum", "HypothesisViolation",
    "IllConditionedGram", "MergeCollision", "NoConvergence", "NonConvergentNorm", "NotPositiveDefinite",
    "NumericalError", "ParseError", "QuadratureFailure", "RunConfig", "SpectralLine", "Spectrum2D",
    "SpectrumReport", "ValidationError", "ZeroModeBasis", "assemble_spectrum", "block_identity_check",
    "build_gauge", "build_ring_gauge", "build_zero_modes", "chart_flux_check", "check_profile",
    "constant_field_kernel", "emit_spectrum", "flux_and_constants", "kernel_dimension",
    "kernel_subspace_angle", "load_config", "load_spectrum_json", "lower_bound_check", "parse_config",
    "reduce_axisymmetric", "ring_bump_profile", "s2_constant_field_oracle", "s3_free_oracle",
    "spectrum_2d", "transfer_zero_mode", "uniform_profile",
]
