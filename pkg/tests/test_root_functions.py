import numpy as np
import pytest

from analysis.classifier import incompleteness_witness
from analysis.root_functions import (adjoint_bvp, adjugate_eigenfunction, boundary_residual, chain_residual,
                                     defect_probe, green_identity_defect, inner_product, l2_norm,
                                     minimality_gram, random_test_functions, reflection_test_functions,
                                     root_chains, root_system, same_boundary_kernel)
from analysis.spectrum import Rectangle
from config.solver_config import DEFAULT_CONFIG
from dirac import fixtures
from dirac.errors import ValidationError
from dirac.models import make_bvp

GRID = 200


def test_simple_eigenvalue_has_one_chain(dirichlet):
    system = root_chains(dirichlet, np.pi, 1, grid=GRID)
    assert system.complete
    assert [chain.length for chain in system.chains] == [1]
    chain = system.chains[0]
    assert l2_norm(chain.eigenfunction, chain.x_grid) == pytest.approx(1.0)
    assert boundary_residual(dirichlet, chain) < 1e-8
    assert chain_residual(dirichlet, chain) < 1e-3


@pytest.mark.parametrize("lam", [0.0, 2.0 * np.pi])
def test_semisimple_double_eigenvalue_has_two_eigenfunctions(periodic, lam):
    system = root_chains(periodic, lam, 2, grid=GRID)
    assert [chain.length for chain in system.chains] == [1, 1]
    assert system.kernel_dimensions == [2]
    for chain in system.chains:
        assert boundary_residual(periodic, chain) < 1e-8


def test_jordan_block_gives_chain_of_length_two(jordan_block):
    system = root_chains(jordan_block, 0.0, 2, grid=GRID)
    assert [chain.length for chain in system.chains] == [2]
    assert system.kernel_dimensions == [1, 2]
    chain = system.chains[0]
    assert boundary_residual(jordan_block, chain) < 1e-8
    assert chain_residual(jordan_block, chain) < 1e-6


def test_eigenfunctions_of_selfadjoint_problem_are_orthogonal(dirichlet):
    functions = [root_chains(dirichlet, k * np.pi, 1, grid=GRID).chains[0].eigenfunction for k in range(-2, 3)]
    x_grid = np.linspace(0.0, 1.0, GRID + 1)
    for i in range(len(functions)):
        for j in range(i + 1, len(functions)):
            assert abs(inner_product(functions[i], functions[j], x_grid)) < 1e-8


def test_adjugate_eigenfunction_matches_chain(dirichlet):
    x_grid, u = adjugate_eigenfunction(dirichlet, np.pi, grid=GRID)
    v = root_chains(dirichlet, np.pi, 1, grid=GRID).chains[0].eigenfunction
    assert abs(inner_product(u, v, x_grid)) == pytest.approx(1.0, abs=1e-8)


def test_root_system_handles_several_eigenvalues(dirichlet):
    systems = root_system(dirichlet, [(0.0, 1), (np.pi, 1)], grid=GRID)
    assert [s.eigenvalue for s in systems] == pytest.approx([0.0, np.pi])
    assert all(s.complete for s in systems)


def test_invalid_arguments(dirichlet):
    with pytest.raises(ValidationError):
        root_chains(dirichlet, np.pi, 1, grid=201)
    with pytest.raises(ValidationError):
        root_chains(dirichlet, np.pi, 0, grid=GRID)


def test_adjoint_satisfies_green_identity():
    rng = np.random.default_rng(3)
    C = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    D = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    bvp = make_bvp((-1.0, 2.0 + 0.5j), C, D, np.array([[0.1, 0.2j], [0.3, 0.0]]))
    adjoint = adjoint_bvp(bvp)
    assert np.allclose(adjoint.b, np.conj(bvp.b))
    assert green_identity_defect(bvp, adjoint) < 1e-12


def test_selfadjoint_problem_keeps_its_boundary_kernel(dirichlet, degenerate):
    assert same_boundary_kernel(adjoint_bvp(dirichlet), dirichlet)
    assert not same_boundary_kernel(adjoint_bvp(degenerate), degenerate)


def test_minimality_gram_is_block_diagonal(dirichlet):
    eigenvalues = [(-np.pi, 1), (0.0, 1), (np.pi, 1)]
    systems = root_system(dirichlet, eigenvalues, grid=GRID)
    adjoint_systems = root_system(adjoint_bvp(dirichlet), eigenvalues, grid=GRID)
    report = minimality_gram(systems, adjoint_systems)
    assert report.matrix.shape == (3, 3)
    assert report.cross_max < 1e-8
    assert all(c == pytest.approx(1.0) for c in report.block_conditions)
    with pytest.raises(ValidationError):
        minimality_gram(systems, adjoint_systems[:1])


def test_random_test_functions_are_seeded():
    x_grid = np.linspace(0.0, 1.0, 11)
    first = random_test_functions(2, x_grid, 3, seed=7)
    assert first.shape == (3, 11, 2)
    assert np.array_equal(first, random_test_functions(2, x_grid, 3, seed=7))


def test_reflection_test_functions_mirror_near_ends(reflection):
    witness = incompleteness_witness(reflection)
    x_grid = np.linspace(0.0, 1.0, GRID + 1)
    functions = reflection_test_functions(witness, x_grid, 2)
    A_star = witness.A.conj().T
    near = x_grid < witness.epsilon
    for f in functions:
        assert np.allclose(f[::-1][near], -(A_star @ f[near].T).T)
    with pytest.raises(ValidationError):
        reflection_test_functions(None, x_grid, 2)


def test_defect_probe_spans_low_frequencies(periodic):
    settings = dict(DEFAULT_CONFIG['root_functions'], probe_degree=2)
    report = defect_probe(periodic, Rectangle(-20.0, 20.0, -1.0, 1.0), n_test=4, grid=GRID, settings=settings)
    assert report.eigenvalue_count == 7
    assert report.function_count == 14
    assert report.heuristic
    assert max(report.residuals) < 1e-6


def test_defect_probe_rejects_wrong_shapes(periodic):
    with pytest.raises(ValidationError):
        defect_probe(periodic, Rectangle(-1.0, 1.0, -1.0, 1.0), test_functions=np.zeros((1, 5, 2)), grid=GRID)


@pytest.mark.parametrize("theta", [np.pi / 2, np.pi / 3])
@pytest.mark.parametrize("n", [-2, 1, 3])
def test_triangular_eigenfunctions_match_closed_form(theta, n):
    bvp = fixtures.triangular_family(theta)
    lam = np.pi * n / np.sin(theta)
    system = root_chains(bvp, lam, 1, grid=GRID)
    assert [chain.length for chain in system.chains] == [1]
    chain = system.chains[0]
    x = chain.x_grid
    a = 1.0 / np.tan(theta)
    expected = np.stack([np.exp(a * np.pi * n * x) * np.sin(np.pi * n * x),
                         np.pi * n * np.exp((a - 1j) * np.pi * n * x)], axis=1)
    v = chain.eigenfunction
    scale = np.vdot(expected, v) / np.vdot(expected, expected)
    assert np.linalg.norm(v - scale * expected) / np.linalg.norm(v) < 1e-5


def test_jordan_chain_matches_closed_form(jordan_block):
    # u0 = (c, 0) and (L - 0) u1 = u0 forces u1 = (const, c)
    chain = root_chains(jordan_block, 0.0, 2, grid=GRID).chains[0]
    u0, u1 = chain.functions
    size = np.max(np.abs(u0))
    assert np.allclose(u0[:, 0], u0[0, 0], atol=1e-8 * size)
    assert np.allclose(u0[:, 1], 0.0, atol=1e-8 * size)
    assert np.allclose(u1[:, 1], u0[:, 0], atol=1e-6 * size)
    assert np.allclose(u1[:, 0], u1[0, 0], atol=1e-6 * size)
