import numpy as np
import pytest

from dirac.asymptotics import build_sector_models, delta_model, gamma_tau, omega0, omega1, ray_comparison
from dirac.errors import ModelOrderError, SectorMismatchError
from dirac.fixtures import dirichlet_type
from dirac.models import make_bvp
from dirac.propagator import Propagator
from dirac.sector_geometry import compute_fan


@pytest.fixture
def split_ends():
    """y1(0) = 0, y2(1) = 0 with B = diag(1, -1) and q12 = q21 = 1"""
    C = np.array([[1.0, 0.0], [0.0, 0.0]])
    D = np.array([[0.0, 0.0], [0.0, 1.0]])
    return make_bvp((1.0, -1.0), C, D, np.array([[0.0, 1.0], [1.0, 0.0]]))


def test_dirichlet_upper_sector_model(dirichlet):
    upper, lower = build_sector_models(dirichlet)
    assert upper.tau == pytest.approx(-1.0)
    assert upper.omega0 == pytest.approx(-1.0)
    assert upper.gamma == pytest.approx(1.0)
    assert upper.omega1 == 0
    assert lower.tau == pytest.approx(1.0)


def test_gamma_uses_diagonal_integrals_of_positive_columns():
    bvp = dirichlet_type(np.diag([0.5, 0.2]))
    gamma, tau = gamma_tau(bvp, 0)
    assert tau == pytest.approx(-1.0)
    assert gamma == pytest.approx(np.exp(0.5j))


def test_omega1_of_triangular_family(triangular):
    assert omega1(1j, triangular) == pytest.approx(0.5j)
    assert omega1(-1j, triangular) == pytest.approx(-0.5j)
    assert omega0(1j, triangular.C, triangular.D, triangular.b) == pytest.approx(0.0)


def test_omega_is_constant_inside_each_sector():
    b = np.array([1.0, 1j])
    bvp = make_bvp(b, np.eye(2), np.array([[0.0, 1.0], [1.0, 0.5]]))
    fan = compute_fan(b)
    for index in range(fan.count):
        values = [omega0(z, bvp.C, bvp.D, b) for z in fan.interior_points(index, (0.1, 0.3, 0.5, 0.7, 0.9))]
        assert np.allclose(values, values[0])


def test_omega1_undefined_without_continuity_flags():
    samples = np.zeros((5, 2, 2))
    samples[:, 0, 1] = 1.0
    bvp = make_bvp((-1.0, 1.0), np.eye(2), -np.eye(2), samples=samples)
    models = build_sector_models(bvp)
    assert all(model.omega1 is None for model in models)
    with pytest.raises(ModelOrderError):
        delta_model(10j, models[0], order=1)
    assert delta_model(10j, models[0], order=0) != 0


def test_delta_model_errors(dirichlet):
    upper = build_sector_models(dirichlet)[0]
    with pytest.raises(SectorMismatchError):
        delta_model(-5j, upper)
    with pytest.raises(ModelOrderError):
        delta_model(5j, upper, order=2)
    with pytest.raises(ModelOrderError):
        delta_model(0.5j, upper, order=1)


def test_order_zero_model_matches_dirichlet_determinant(dirichlet):
    upper = build_sector_models(dirichlet)[0]
    lam = 3.0 + 8.0j
    assert delta_model(lam, upper) == pytest.approx(2j * np.sin(lam), rel=1e-6)


def test_ray_errors_decrease_along_bisector(split_ends):
    model = build_sector_models(split_ends)[0]
    frame = ray_comparison(Propagator(split_ends), model)
    errors = frame['err0'].tolist()
    assert all(later < earlier for earlier, later in zip(errors, errors[1:]))
    assert errors[-1] < 0.05
    assert errors[-1] == pytest.approx(1.0 / 160.0, rel=0.05)


@pytest.mark.parametrize("name", ["periodic", "dirichlet"])
def test_ray_error_is_small_at_large_radius(name, request):
    bvp = request.getfixturevalue(name)
    propagator = Propagator(bvp)
    for model in build_sector_models(bvp):
        frame = ray_comparison(propagator, model)
        assert frame['err0'].iloc[-1] < 0.05


def test_order_one_model_when_leading_term_vanishes(triangular):
    model = build_sector_models(triangular)[0]
    assert model.omega0 == pytest.approx(0.0)
    frame = ray_comparison(Propagator(triangular), model)
    assert frame['err0'].isna().all()
    assert frame['err1'].iloc[-1] < 0.2


def test_ray_error_vanishes_with_diagonal_potential():
    bvp = dirichlet_type(np.diag([0.5, 0.2]))
    propagator = Propagator(bvp)
    for model in build_sector_models(bvp):
        frame = ray_comparison(propagator, model)
        assert frame['err0'].max() < 1e-6
