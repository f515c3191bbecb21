import numpy as np
import pytest

from dirac import fixtures
from dirac.asymptotics import build_sector_models
from dirac.errors import PropagationError, SectorMismatchError, ValidationError
from dirac.models import make_bvp
from dirac.propagator import (Propagator, StepControl, char_determinant, fundamental_matrix,
                              gauge_normalize, scaled_determinant)

LAMBDAS = [0.3 + 0.1j, -2.4 + 0.7j, 5.1 - 0.3j, 0.8j, -7.7 - 1.1j]


def test_zero_potential_gives_diagonal_exponentials(periodic):
    lam = 1.3 - 0.4j
    propagation = fundamental_matrix(periodic, lam, [0.0, 0.5, 1.0])
    for x, Phi in zip(propagation.x_points, propagation.matrices):
        assert np.allclose(Phi, np.diag(np.exp(1j * lam * periodic.b * x)), atol=1e-13)


@pytest.mark.parametrize("lam", LAMBDAS)
def test_periodic_determinant_closed_form(periodic, lam):
    assert char_determinant(periodic, lam) == pytest.approx(2.0 - 2.0 * np.cos(lam), abs=1e-11)


@pytest.mark.parametrize("lam", LAMBDAS)
def test_dirichlet_determinant_closed_form(dirichlet, lam):
    assert char_determinant(dirichlet, lam) == pytest.approx(2j * np.sin(lam), abs=1e-11)


@pytest.mark.parametrize("lam", [0.7 + 0.2j, 3.0 - 0.5j, 12.5 + 0.1j])
def test_triangular_determinant_closed_form(triangular, lam):
    expected = fixtures.triangular_determinant(lam, np.pi / 2)
    assert char_determinant(triangular, lam) == pytest.approx(expected, rel=1e-10, abs=1e-12)


def test_initial_value_problem_has_constant_determinant():
    bvp = fixtures.initial_value()
    assert char_determinant(bvp, 4.2 + 3.3j) == pytest.approx(1.0)


def test_grid_potential_matches_exact_constant():
    Q = np.array([[0.2, 0.5 - 0.1j], [0.3j, -0.4]])
    exact = make_bvp((-1.0, 2.0), np.eye(2), -np.eye(2), Q)
    sampled = make_bvp((-1.0, 2.0), np.eye(2), -np.eye(2), samples=np.array([Q] * 9), interp=1)
    for lam in (0.5 + 0.5j, 3.0 - 0.2j):
        left = fundamental_matrix(exact, lam).matrices[-1]
        right = fundamental_matrix(sampled, lam).matrices[-1]
        assert np.allclose(left, right, rtol=1e-9, atol=1e-9)


def test_liouville_defect_is_small_for_smooth_grid_potential():
    x = np.linspace(0.0, 1.0, 33)
    samples = np.zeros((33, 2, 2), dtype=complex)
    samples[:, 0, 1] = np.sin(np.pi * x)
    samples[:, 1, 0] = np.cos(np.pi * x)
    samples[:, 0, 0] = 0.3 * x
    bvp = make_bvp((-1.0, 1.0), np.eye(2), -np.eye(2), samples=samples)
    propagation = fundamental_matrix(bvp, 6.0 + 0.5j)
    assert propagation.step_stats['liouville_defect'] < 1e-8


def test_x_points_must_be_ascending(periodic):
    with pytest.raises(ValidationError):
        fundamental_matrix(periodic, 1.0, [0.5, 0.2])
    with pytest.raises(ValidationError):
        fundamental_matrix(periodic, 1.0, [0.0, 1.5])


def test_step_control_scales_with_lambda():
    ctrl = StepControl()
    assert ctrl.steps_per_unit(0.0, 1.0) == 16
    assert ctrl.steps_per_unit(10.0, 1.0) == 16 * 5
    assert StepControl(lambda_scaling=False).steps_per_unit(100.0, 1.0) == 16
    with pytest.raises(ValidationError):
        StepControl(base_steps=8)


def test_step_cap_raises_with_error_estimate():
    samples = np.zeros((3, 2, 2))
    samples[:, 0, 1] = 1.0
    bvp = make_bvp((-1.0, 1.0), np.eye(2), -np.eye(2), samples=samples)
    propagator = Propagator(bvp, StepControl(base_steps=16, max_steps=32))
    with pytest.raises(PropagationError) as info:
        propagator.fundamental_matrix(500.0)
    assert info.value.error_estimate > 0


def test_characteristic_matrix_is_cached(periodic):
    propagator = Propagator(periodic)
    first = propagator.characteristic_matrix(1.5 + 0.5j)
    second = propagator.characteristic_matrix(1.5 + 0.5j)
    assert first is second
    values = propagator.determinants([0.5, 1.5 + 0.5j])
    assert values[1] == pytest.approx(2.0 - 2.0 * np.cos(1.5 + 0.5j))


def test_scaled_determinant_tends_to_omega0(dirichlet):
    models = build_sector_models(dirichlet)
    # Upper half-plane: Delta ~ -e^{-i lambda}
    value = scaled_determinant(dirichlet, 30j, 0, models[0])
    assert value == pytest.approx(models[0].omega0, rel=1e-10)
    with pytest.raises(SectorMismatchError):
        scaled_determinant(dirichlet, -30j, 0, models[0])


def test_gauge_removes_diagonal_potential_and_keeps_determinant():
    Q = np.diag([0.3, -0.2 + 0.1j])
    bvp = make_bvp((-1.0, 1.0), np.eye(2), -np.eye(2) + 0.5 * np.ones((2, 2)), Q)
    normalized, record = gauge_normalize(bvp)
    assert not record.identity
    assert np.allclose(np.diagonal(normalized.potential.samples, axis1=1, axis2=2), 0.0, atol=1e-12)
    rng = np.random.default_rng(0)
    for _ in range(10):
        lam = complex(rng.uniform(-6, 6), rng.uniform(-1, 1))
        original = char_determinant(bvp, lam)
        assert char_determinant(normalized, lam) == pytest.approx(original, rel=1e-8, abs=1e-10)


def test_gauge_is_identity_without_diagonal_blocks(dirichlet):
    normalized, record = gauge_normalize(dirichlet)
    assert record.identity
    assert normalized is dirichlet
