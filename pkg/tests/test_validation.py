import math

import numpy as np
import pytest

from hopf_dirac.errors import ValidationError
from hopf_dirac.sphere_bundle import FieldProfile
from hopf_dirac.validation import check_energy, check_grid, check_profile, check_stencil


def test_profile_coercions():
    base = FieldProfile.constant(3.0)
    assert check_profile(base) is base
    assert check_profile(3).g0 == 3.0
    assert check_profile(np.float64(2.5)).g0 == 2.5
    assert check_profile(base.to_dict()).g0 == 3.0
    table = np.column_stack([np.linspace(0, math.pi, 9), np.full(9, 2.0)])
    sampled = check_profile(table)
    assert sampled.total_flux() == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("bad", [True, np.zeros((3, 3)), [1.0, 2.0], {"kind": "nonsense"},
                                 np.array([[0.0, 1.0], [2.0, 1.0], [1.0, 1.0]])])
def test_profile_rejections(bad):
    with pytest.raises(ValidationError):
        check_profile(bad)


def test_scalar_checks():
    assert check_energy(2) == 2.0
    for bad in (0, -1.0, math.inf, math.nan, "1", True):
        with pytest.raises(ValidationError):
            check_energy(bad)
    assert check_grid(16, 0) == (16, 0)
    for n, d in ((15, 0), (64.0, 0), (64, -1), (64, 1.5)):
        with pytest.raises(ValidationError):
            check_grid(n, d)
    assert check_stencil("fitted") == "fitted"
    with pytest.raises(ValidationError):
        check_stencil("spline")
