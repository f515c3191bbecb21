"""
Reference Problems

Small boundary value problems with closed-form determinants, used by the
tests, the sample documents and the CLI self-checks.
"""

from typing import Callable, Dict
import numpy as np

from dirac.models import DiracBVP, make_bvp

DIRAC_WEIGHT = (-1.0, 1.0)


def periodic() -> DiracBVP:
    """C = I, D = -I: Delta = 2 - 2 cos(lambda)"""
    return make_bvp(DIRAC_WEIGHT, np.eye(2), -np.eye(2))


def dirichlet_type(Q=None) -> DiracBVP:
    """y1(0) + y2(0) = 0, y1(1) + y2(1) = 0: Delta = 2i sin(lambda) when Q = 0"""
    C = np.array([[1.0, 1.0], [0.0, 0.0]])
    D = np.array([[0.0, 0.0], [1.0, 1.0]])
    return make_bvp(DIRAC_WEIGHT, C, D, Q)


def coupled_dirichlet() -> DiracBVP:
    """Dirichlet-type conditions with a constant off-diagonal potential"""
    return dirichlet_type(np.array([[0.0, 0.5], [0.3, 0.0]]))


def initial_value() -> DiracBVP:
    """n = 1, C = 1, D = 0: Delta == 1"""
    return make_bvp((1.0,), np.eye(1), np.zeros((1, 1)))


def triangular_family(theta: float = np.pi / 2) -> DiracBVP:
    """
    Weight -i diag(e^{i theta}, e^{-i theta}), q_12 = -e^{-i theta}, y1(0) = y1(1) = 0

    Delta = (e^{mu1} - e^{mu2}) / (mu1 - mu2) with mu_j = i b_j lambda; the
    eigenvalues are pi n / sin(theta) and Delta(i t) = sinh(t) / t at theta = pi/2.
    """
    b = -1j * np.array([np.exp(1j * theta), np.exp(-1j * theta)])
    Q = np.array([[0.0, -np.exp(-1j * theta)], [0.0, 0.0]])
    C = np.array([[1.0, 0.0], [0.0, 0.0]])
    D = np.array([[0.0, 0.0], [1.0, 0.0]])
    return make_bvp(b, C, D, Q)


def triangular_determinant(lam: complex, theta: float = np.pi / 2) -> complex:
    """Closed form of Delta for triangular_family"""
    b = -1j * np.array([np.exp(1j * theta), np.exp(-1j * theta)])
    mu = 1j * b * lam
    if abs(mu[0] - mu[1]) < 1e-14:
        return complex(np.exp(mu[0]))
    return complex((np.exp(mu[0]) - np.exp(mu[1])) / (mu[0] - mu[1]))


def first_component_dirichlet() -> DiracBVP:
    """y1(0) = y1(1) = 0 with Q = 0: Delta == 0"""
    C = np.array([[1.0, 0.0], [0.0, 0.0]])
    D = np.array([[0.0, 0.0], [1.0, 0.0]])
    return make_bvp(DIRAC_WEIGHT, C, D)


def reflection(cells: int = 64) -> DiracBVP:
    """
    C = I, D = -A with A = [[0, 2], [1, 0]] anticommuting with B and a potential
    supported in the middle third, so Q(1 - x) = A^{-1} Q(x) A near both ends
    """
    A = np.array([[0.0, 2.0], [1.0, 0.0]])
    x = np.linspace(0.0, 1.0, cells + 1)
    bump = np.clip(1.0 - 36.0 * (x - 0.5) ** 2, 0.0, None)
    samples = np.zeros((cells + 1, 2, 2), dtype=complex)
    samples[:, 0, 1] = bump
    samples[:, 1, 0] = 0.5 * bump
    continuity = np.ones((2, 2), dtype=bool)
    return make_bvp(DIRAC_WEIGHT, np.eye(2), -A, samples=samples, interp=1, continuity=continuity)


def degenerate_reflection() -> DiracBVP:
    """C = I, D = -[[0, 1], [1, 0]], Q = 0: Delta == 0"""
    return make_bvp(DIRAC_WEIGHT, np.eye(2), -np.array([[0.0, 1.0], [1.0, 0.0]]))


def periodic_four() -> DiracBVP:
    """n = 4 periodic problem with weights -2, -1, 1, 2"""
    return make_bvp((-2.0, -1.0, 1.0, 2.0), np.eye(4), -np.eye(4))


FIXTURES: Dict[str, Callable[[], DiracBVP]] = {
    'periodic': periodic,
    'dirichlet': dirichlet_type,
    'coupled_dirichlet': coupled_dirichlet,
    'initial_value': initial_value,
    'triangular': triangular_family,
    'first_component_dirichlet': first_component_dirichlet,
    'reflection': reflection,
    'degenerate_reflection': degenerate_reflection,
    'periodic_four': periodic_four,
}
