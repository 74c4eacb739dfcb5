"""Input validation shared by the estimator facade and the library entry points."""

from __future__ import annotations

import math
import numbers

import numpy as np

from .errors import ValidationError
from .sphere_bundle import FieldProfile

STENCILS = ("regular", "dirichlet", "fitted")
MIN_N_THETA = 16


def check_profile(profile) -> FieldProfile:
    """Coerce a field description to a FieldProfile.

    Accepts a FieldProfile, a real number (constant field strength), a
    mapping as produced by ``FieldProfile.to_dict``, or an array of shape
    (nodes, 2) holding (theta, value) rows.
    """
    if isinstance(profile, FieldProfile):
        return profile
    try:
        if isinstance(profile, numbers.Real) and not isinstance(profile, bool):
            return FieldProfile.constant(float(profile))
        if isinstance(profile, dict):
            return FieldProfile.from_dict(profile)
    except (ValueError, KeyError) as exc:
        raise ValidationError(f"invalid field profile: {exc}") from None
    table = np.asarray(profile, dtype=float)
    if table.ndim != 2 or table.shape[1] != 2:
        raise ValidationError(f"profile table must have shape (nodes, 2), got {table.shape}")
    try:
        return FieldProfile.sampled(table[:, 0], table[:, 1])
    except ValueError as exc:
        raise ValidationError(f"invalid field profile: {exc}") from None


def check_energy(energy_max) -> float:
    if isinstance(energy_max, bool) or not isinstance(energy_max, numbers.Real):
        raise ValidationError(f"energy_max must be a real number, got {energy_max!r}")
    value = float(energy_max)
    if not (math.isfinite(value) and value > 0):
        raise ValidationError(f"energy_max must be positive and finite, got {value!r}")
    return value


def check_grid(n_theta, doublings=0) -> tuple:
    if not isinstance(n_theta, numbers.Integral) or n_theta < MIN_N_THETA:
        raise ValidationError(f"n_theta must be an integer >= {MIN_N_THETA}, got {n_theta!r}")
    if not isinstance(doublings, numbers.Integral) or doublings < 0:
        raise ValidationError(f"doublings must be a non-negative integer, got {doublings!r}")
    return int(n_theta), int(doublings)


def check_stencil(stencil) -> str:
    if stencil not in STENCILS:
        raise ValidationError(f"stencil must be one of {', '.join(STENCILS)}, got {stencil!r}")
    return stencil
