"""scikit-learn style facade over the S^3 spectrum assembly."""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .spectrum3d import SpectrumReport, assemble_spectrum
from .validation import check_energy, check_grid, check_profile, check_stencil


class HopfDiracSpectrum(BaseEstimator):
    """Spectrum of the magnetic Dirac operator on S^3 for a fiber-aligned field.

    Parameters are stored unchanged and validated in ``fit``.  The input to
    ``fit`` is the field strength profile (see ``check_profile``).

    Fitted attributes
    -----------------
    spectrum_ : SpectrumReport
    kernel_dim_ : int
    eigenvalues_ : ndarray of merged eigenvalues, ascending
    multiplicities_ : ndarray of the matching multiplicities
    constants_ : FluxConstants (total flux, c, m)
    """

    def __init__(self, energy_max: float = 5.0, n_theta: int = 2048, doublings: int = 1,
                 stencil: str = "regular", threads: Optional[int] = None):
        self.energy_max = energy_max
        self.n_theta = n_theta
        self.doublings = doublings
        self.stencil = stencil
        self.threads = threads

    def fit(self, profile, y=None) -> "HopfDiracSpectrum":
        field = check_profile(profile)
        energy = check_energy(self.energy_max)
        n_theta, doublings = check_grid(self.n_theta, self.doublings)
        stencil = check_stencil(self.stencil)
        report = assemble_spectrum(field, energy, n_theta, doublings=doublings, stencil=stencil,
                                   threads=self.threads)
        self._store(report)
        return self

    def _store(self, report: SpectrumReport) -> None:
        self.spectrum_ = report
        self.kernel_dim_ = report.kernel_dim
        self.constants_ = report.constants
        self.eigenvalues_ = np.array([ml.value for ml in report.merged])
        self.multiplicities_ = np.array([ml.multiplicity for ml in report.merged], dtype=int)

    def multiplicity(self, value: float) -> int:
        """Total multiplicity of the merged line at ``value`` (0 if absent)."""
        check_is_fitted(self, "spectrum_")
        return self.spectrum_.multiplicity_at(value)

    @classmethod
    def from_report(cls, report: SpectrumReport) -> "HopfDiracSpectrum":
        """Fitted estimator wrapping an existing report (for example one loaded from JSON)."""
        est = cls(energy_max=report.window, n_theta=report.settings.get("n_theta", 2048),
                  doublings=report.settings.get("doublings", 1), stencil=report.settings.get("stencil", "regular"))
        est._store(report)
        return est
