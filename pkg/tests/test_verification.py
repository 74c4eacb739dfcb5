import pytest

from hopf_dirac.verification import REGISTRY, VerifyContext, run_checks

CHEAP = ["pauli_clifford", "frame_orthonormality", "connection_table", "fiber_form_identity",
         "curvature_table", "flux_constants"]


def test_registry_contents():
    assert len(REGISTRY) == 21
    assert set(CHEAP) <= set(REGISTRY)


def test_selected_checks_pass():
    outcomes = run_checks(VerifyContext(seed=3), CHEAP)
    assert [o.name for o in outcomes] == CHEAP
    assert all(o.passed for o in outcomes), [(o.name, o.residual) for o in outcomes if not o.passed]


@pytest.mark.parametrize("name", ["fiber_form_identity", "connection_table", "curvature_table"])
def test_sign_error_is_detected(name):
    outcome, = run_checks(VerifyContext(sign_errors=frozenset([name])), [name])
    assert not outcome.passed


def test_unknown_check_name():
    with pytest.raises(KeyError):
        run_checks(names=["no_such_check"])
