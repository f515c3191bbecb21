import numpy as np
import pytest

from dirac.errors import NotAdmissibleError, SectorMismatchError, ValidationError
from dirac.sector_geometry import (build_T, build_T_swapped, column_signs, compute_fan, is_admissible,
                                   is_feasible, line_angles)


def test_dirac_weight_has_one_line_and_two_half_planes():
    fan = compute_fan(np.array([-1.0, 1.0]))
    assert fan.lines.tolist() == [0.0]
    assert fan.count == 2
    assert fan.sectors[0] == pytest.approx((0.0, np.pi))
    assert fan.sign_patterns.tolist() == [[1, -1], [-1, 1]]


def test_complex_weight_fan_has_diagonal_line():
    fan = compute_fan(np.array([1.0, 1j]))
    assert fan.lines == pytest.approx([0.0, np.pi / 4, np.pi / 2])
    assert fan.count == 6


def test_fan_is_invariant_under_positive_scaling():
    b = np.array([-1.0, 0.5 + 1j, 2.0])
    first = compute_fan(b)
    second = compute_fan(3.5 * b)
    assert first.lines == pytest.approx(second.lines)
    assert np.array_equal(first.sign_patterns, second.sign_patterns)


def test_sign_patterns_are_constant_on_each_sector():
    b = np.array([-2.0, -1.0, 1.0, 2.0])
    fan = compute_fan(b)
    for index in range(fan.count):
        for z in fan.interior_points(index):
            assert column_signs(z, b).tolist() == fan.sign_patterns[index].tolist()


def test_sector_of_rejects_points_on_lines():
    fan = compute_fan(np.array([-1.0, 1.0]))
    assert fan.sector_of(1j) == 0
    assert fan.sector_of(-2j) == 1
    with pytest.raises(SectorMismatchError):
        fan.sector_of(3.0)
    with pytest.raises(SectorMismatchError):
        fan.sector_of(0)


def test_admissible_and_feasible_points():
    b = np.array([1.0, 1j])
    assert not is_admissible(1.0, b)
    assert is_admissible(np.exp(1j * np.pi / 4), b)
    assert not is_feasible(np.exp(1j * np.pi / 4), b)
    assert is_feasible(np.exp(1j * np.pi / 8), b)
    with pytest.raises(ValidationError):
        is_admissible(0, b)


def test_line_angles_deduplicate_parallel_directions():
    assert line_angles(np.array([-1.0, 1.0, 3.0])).tolist() == [0.0]


def test_build_T_mixes_columns_by_sign(periodic):
    T_up = build_T(1j, periodic.C, periodic.D, periodic.b)
    assert np.allclose(T_up.matrix, [[-1.0, 0.0], [0.0, 1.0]])
    assert T_up.det == pytest.approx(-1.0)
    T_down = build_T(-1j, periodic.C, periodic.D, periodic.b)
    assert np.allclose(T_down.matrix, [[1.0, 0.0], [0.0, -1.0]])


def test_build_T_rejects_inadmissible_points(periodic):
    with pytest.raises(NotAdmissibleError):
        build_T(2.0, periodic.C, periodic.D, periodic.b)


def test_swapped_T_replaces_one_column(dirichlet):
    # At z = -i column 0 comes from C and column 1 from D
    swapped = build_T_swapped(-1j, dirichlet.C, dirichlet.D, dirichlet.b, 'c', 0, 1)
    assert np.allclose(swapped.matrix[:, 0], dirichlet.C[:, 1])
    swapped = build_T_swapped(-1j, dirichlet.C, dirichlet.D, dirichlet.b, 'd', 0, 1)
    assert np.allclose(swapped.matrix[:, 1], dirichlet.D[:, 0])
    with pytest.raises(ValidationError):
        build_T_swapped(-1j, dirichlet.C, dirichlet.D, dirichlet.b, 'c', 1, 0)
