from itertools import product

import numpy as np
import pytest

from analysis.classifier import (classify_regularity, completeness_certificate, dissipativity_check,
                                 four_by_four_conditions, four_by_four_pairwise, incompleteness_witness,
                                 is_degenerate, match_four_by_four, normality_check, riesz_verdict,
                                 synthesis_verdict, two_by_two_minors)
from dirac import fixtures
from dirac.models import make_bvp


def four_by_four_problem(d, Q=None):
    C = np.zeros((4, 4))
    D = np.zeros((4, 4), dtype=complex)
    C[0, :2] = 1.0
    C[1, 2:] = 1.0
    D[2, :2] = d[:2]
    D[3, 2:] = d[2:]
    return make_bvp((-1.0, 1.0, -2.0, 2.0), C, D, Q)


def test_periodic_is_regular(periodic):
    report = classify_regularity(periodic)
    assert report.regular
    assert report.weakly_regular
    assert len(report.witness_triple) == 3
    assert report.sector_dets == pytest.approx([-1.0, -1.0])
    assert not report.degenerate


def test_triangular_is_neither_regular_nor_weakly_regular(triangular):
    report = classify_regularity(triangular)
    assert not report.regular
    assert not report.weakly_regular
    assert report.witness_triple is None
    assert not report.degenerate


def test_degenerate_problem_is_detected(degenerate):
    report = classify_regularity(degenerate)
    assert report.degenerate
    assert report.sector_dets == pytest.approx([0.0, 0.0])
    assert is_degenerate(fixtures.degenerate_reflection())
    assert not is_degenerate(fixtures.dirichlet_type())


@pytest.mark.parametrize("name", ["periodic", "dirichlet", "triangular"])
def test_two_by_two_rule_certifies_completeness(name, request):
    certificate = completeness_certificate(request.getfixturevalue(name))
    assert certificate.status == 'certified_complete'
    assert certificate.rule == 'two_by_two_minors'


def test_two_by_two_minors_of_periodic(periodic):
    witness = two_by_two_minors(periodic)
    assert witness['J32'] == pytest.approx(-1.0)
    assert witness['J14'] == pytest.approx(-1.0)


def test_two_by_two_rule_uses_potential_when_minors_vanish(triangular):
    witness = two_by_two_minors(triangular)
    assert witness['J32'] == pytest.approx(0.0)
    assert witness['J13'] == pytest.approx(1.0)
    assert two_by_two_minors(fixtures.first_component_dirichlet()) is None


def test_degenerate_problem_is_incomplete(degenerate):
    certificate = completeness_certificate(degenerate)
    assert certificate.status == 'certified_incomplete'
    assert certificate.rule == 'decoupled_component'
    assert certificate.witnesses['component'] == 1
    assert certificate.witnesses['endpoint'] == 0


def test_reflection_symmetry_witness(reflection):
    certificate = completeness_certificate(reflection)
    assert certificate.status == 'certified_incomplete'
    assert certificate.rule == 'reflection_symmetry'
    assert np.allclose(certificate.witnesses['A'], [[0.0, 2.0], [1.0, 0.0]])
    assert certificate.witnesses['epsilon'] == pytest.approx(0.5)


def test_reflection_witness_needs_symmetric_potential():
    bvp = fixtures.reflection(cells=64)
    samples = np.array(bvp.potential.samples)
    samples[:, 0, 1] = np.linspace(0.0, 1.0, 65)
    broken = make_bvp((-1.0, 1.0), bvp.C, bvp.D, samples=samples, continuity=np.ones((2, 2), dtype=bool))
    witness = incompleteness_witness(broken)
    assert witness is None or witness.kind != 'reflection_symmetry'


def test_triangle_witness_for_regular_four_by_four():
    certificate = completeness_certificate(fixtures.periodic_four())
    assert certificate.status == 'certified_complete'
    assert certificate.rule == 'triangle_witness'
    assert len(certificate.witnesses['points']) == 3


def test_match_four_by_four_normalizes_endpoint_rows():
    d = match_four_by_four(four_by_four_problem([1.0, 2.0, 3.0, 4.0]))
    assert np.linalg.norm(d[:2]) == pytest.approx(1.0)
    assert abs(d[0] * 2.0 - d[1]) == pytest.approx(0.0, abs=1e-12)
    assert abs(d[2] * 4.0 - d[3] * 3.0) == pytest.approx(0.0, abs=1e-12)
    assert match_four_by_four(fixtures.periodic_four()) is None


def test_four_by_four_pattern_certifies_completeness():
    certificate = completeness_certificate(four_by_four_problem([1.0, 2.0, 3.0, 4.0]))
    assert certificate.rule == 'four_by_four_pattern'


def test_four_by_four_pattern_needs_potential_when_d_vanishes():
    bvp = four_by_four_problem([0.0, 1.0, 1.0, 1.0])
    assert completeness_certificate(bvp).rule != 'four_by_four_pattern'
    Q = np.zeros((4, 4))
    Q[1, 0] = 1.0
    assert completeness_certificate(four_by_four_problem([0.0, 1.0, 1.0, 1.0], Q)).rule == 'four_by_four_pattern'


def test_pairwise_conditions_agree_with_four_by_four_rule():
    for pattern in product((0.0, 1.0), repeat=8):
        d = np.array(pattern[:4])
        q_end = np.zeros((4, 4))
        q_end[0, 1], q_end[1, 0], q_end[2, 3], q_end[3, 2] = pattern[4:]
        assert all(four_by_four_pairwise(d, q_end)) == four_by_four_conditions(d, q_end), pattern


def test_normality(dirichlet, degenerate):
    assert normality_check(dirichlet.b, dirichlet.C, dirichlet.D)
    assert not normality_check(degenerate.b, degenerate.C, degenerate.D)


@pytest.mark.parametrize("d, verdict", [
    ([1.0, 1.0], 'selfadjoint'),
    ([1.0, 0.5], 'accumulative'),
    ([0.5, 1.0], 'dissipative'),
])
def test_dissipativity_verdicts(d, verdict):
    bvp = make_bvp((-1.0, 1.0), np.eye(2), -np.diag(d))
    assert dissipativity_check(bvp).verdict == verdict


def test_dissipativity_needs_real_weight():
    bvp = make_bvp((1.0, 1j), np.eye(2), -np.eye(2))
    assert dissipativity_check(bvp).verdict == 'not_dirac_type'


def test_nonhermitian_potential_changes_dissipativity():
    bvp = make_bvp((-1.0, 1.0), np.eye(2), -np.eye(2), np.diag([0.0, -0.5j]))
    assert dissipativity_check(bvp).verdict == 'accumulative'
    assert dissipativity_check(make_bvp((-1.0, 1.0), np.eye(2), -np.eye(2), np.diag([0.5j, 0.0]))).verdict \
        == 'dissipative'


def test_riesz_block_diagonal_for_periodic(periodic):
    verdict = riesz_verdict(periodic)
    assert verdict.pattern == 'block_diagonal'
    assert verdict.verdict == 'basis_with_parentheses'
    assert verdict.angles == pytest.approx([0.0, np.pi])


def test_riesz_split_pairs_for_dirichlet(dirichlet):
    verdict = riesz_verdict(dirichlet)
    assert verdict.pattern == 'split_pairs'
    assert verdict.angles == pytest.approx([0.0, np.pi])
    assert abs(verdict.periods[0]) == pytest.approx(np.pi)


def test_riesz_unknown_for_degenerate(degenerate):
    assert riesz_verdict(degenerate).pattern == 'unknown'


def test_synthesis_for_selfadjoint_periodic(periodic):
    verdict = synthesis_verdict(periodic, completeness_certificate(periodic))
    assert verdict.verdict == 'admits_synthesis'
    assert verdict.half_plane == 'upper'
    assert verdict.growth_exponent == pytest.approx(0.0, abs=0.1)


def test_synthesis_not_applicable_when_neither(degenerate):
    verdict = synthesis_verdict(degenerate, completeness_certificate(degenerate))
    assert verdict.verdict == 'not_applicable'
