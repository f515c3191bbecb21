import numpy as np
import pytest

from config.solver_config import DEFAULT_CONFIG, get_config
from dirac.models import BoundaryPair, DiracBVP, PotentialField, WeightMatrix, make_bvp
from dirac.propagator import char_determinant
from dirac.system_model import (boundary_rank_ok, canonical_block_order, diagonal_block_part,
                                is_dirac_type, permute_bvp, validate_bvp)


def test_valid_problem_has_empty_report(periodic):
    report = validate_bvp(periodic)
    assert report.is_valid
    assert report.violations == []


def test_zero_weight_is_rejected():
    bvp = make_bvp((1.0, 0.0), np.eye(2), -np.eye(2))
    report = validate_bvp(bvp)
    assert not report.is_valid
    assert any("zero diagonal entry" in v for v in report.violations)


def test_rank_deficient_boundary_is_rejected():
    C = np.array([[1.0, 0.0], [0.0, 0.0]])
    D = np.zeros((2, 2))
    report = validate_bvp(make_bvp((-1.0, 1.0), C, D))
    assert any("rank" in v for v in report.violations)


def test_rank_is_invariant_under_row_operations():
    C = np.array([[1.0, 1.0], [0.0, 0.0]])
    D = np.array([[0.0, 0.0], [1.0, 1.0]])
    G = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert boundary_rank_ok(C, D)
    assert boundary_rank_ok(G @ C, G @ D)


def test_grid_shape_mismatch_is_reported():
    potential = PotentialField(n=2, kind='grid', samples=np.zeros((5, 3, 3)))
    bvp = DiracBVP(WeightMatrix(np.array([-1.0, 1.0])), potential, BoundaryPair(np.eye(2), -np.eye(2)))
    report = validate_bvp(bvp)
    assert any("grid samples" in v for v in report.violations)


def test_near_equal_weights_warn_but_stay_valid():
    bvp = make_bvp((1.0, 1.0 + 1e-10), np.eye(2), -np.eye(2))
    report = validate_bvp(bvp)
    assert report.is_valid
    assert report.warnings


def test_dirac_type_detection():
    assert is_dirac_type(WeightMatrix(np.array([-1.0, 2.0])))
    assert not is_dirac_type(WeightMatrix(np.array([1.0, 1j])))


def test_canonical_order_groups_equal_weights():
    b = (1.0, -1.0, 1.0, 2.0)
    Q = np.arange(16, dtype=float).reshape(4, 4) / 10.0
    bvp = make_bvp(b, np.eye(4), -np.eye(4) + 0.1 * np.ones((4, 4)), Q)
    ordered, permutation = canonical_block_order(bvp)
    assert permutation.tolist() == [0, 2, 1, 3]
    assert ordered.b.real.tolist() == [1.0, 1.0, -1.0, 2.0]
    assert ordered.weight.is_block_ordered()
    for lam in (0.3 + 0.2j, -1.7 + 0.5j, 2.9 - 0.1j):
        assert char_determinant(ordered, lam) == pytest.approx(char_determinant(bvp, lam), rel=1e-12, abs=1e-12)


def test_canonical_order_returns_same_problem_when_ordered(periodic):
    ordered, permutation = canonical_block_order(periodic)
    assert ordered is periodic
    assert permutation.tolist() == [0, 1]


def test_permutation_moves_continuity_flags():
    flags = np.array([[True, False], [True, True]])
    samples = np.zeros((3, 2, 2))
    bvp = make_bvp((1.0, -1.0), np.eye(2), -np.eye(2), samples=samples, continuity=flags)
    swapped = permute_bvp(bvp, [1, 0])
    assert swapped.potential.endpoint_continuity.tolist() == [[True, True], [False, True]]


def test_diagonal_block_part_keeps_equal_weight_blocks():
    Q = np.arange(9, dtype=float).reshape(3, 3)
    weight = WeightMatrix(np.array([1.0, 1.0, -1.0]))
    part = diagonal_block_part(PotentialField(n=3, kind='constant', matrix=Q), weight)
    expected = np.array([[0.0, 1.0, 0.0], [3.0, 4.0, 0.0], [0.0, 0.0, 8.0]])
    assert np.allclose(part.matrix, expected)


def test_grid_potential_integral_is_exact_for_linear_interpolation():
    samples = np.zeros((3, 1, 1))
    samples[:, 0, 0] = [0.0, 1.0, 0.0]
    potential = PotentialField(n=1, kind='grid', samples=samples, interp=1)
    assert potential.integral()[0, 0] == pytest.approx(0.5)
    assert potential.at(0.25)[0, 0] == pytest.approx(0.5)


def test_step_potential_reads_cell_values():
    samples = np.zeros((3, 1, 1))
    samples[:, 0, 0] = [2.0, 4.0, 4.0]
    potential = PotentialField(n=1, kind='grid', samples=samples, interp=0)
    assert potential.at(0.25)[0, 0] == pytest.approx(2.0)
    assert potential.at(0.75)[0, 0] == pytest.approx(4.0)
    assert potential.integral()[0, 0] == pytest.approx(3.0)


def test_profiles_resolve():
    assert get_config('default') is DEFAULT_CONFIG
    assert get_config('production')['propagator']['base_steps'] > DEFAULT_CONFIG['propagator']['base_steps']
    assert get_config('development')['monitoring']['log_level'] == 'INFO'
    with pytest.raises(ValueError):
        get_config('fast')
