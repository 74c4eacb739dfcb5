"""Standard field profiles used by the checks, the CLI and the tests."""

from __future__ import annotations

import numpy as np

from .sphere_bundle import FieldProfile


def uniform_profile(chern: int) -> FieldProfile:
    """Constant density on N with total flux ``chern``."""
    return FieldProfile.constant(2.0 * chern)


def ring_bump_profile(chern: int, center: float = 1.0, width: float = 0.2, amplitude: float = 1.5,
                      tilt: float = 0.8, nodes: int = 513) -> FieldProfile:
    """Smooth axisymmetric field with a Gaussian ring at polar angle ``center``.

    A cos(theta) tilt breaks the north/south symmetry; the profile is shifted
    by a constant so that its total flux is exactly ``chern``.
    """
    profile = FieldProfile.from_function(
        lambda t: 2.0 * chern + tilt * np.cos(t) + amplitude * np.exp(-((t - center) / width) ** 2), nodes)
    return profile.shifted(2.0 * (chern - profile.total_flux()))


def hopf_test_fields():
    """Constant and ring-perturbed S^3 field strengths used for cross checks."""
    return {
        "constant_g0": FieldProfile.constant(0.0),
        "constant_g3": FieldProfile.constant(3.0),
        "constant_g5": FieldProfile.constant(5.0),
        "ring_g3": ring_bump_profile(1).shifted(1.0),
    }
