"""
System Model Utilities

Structural validation of boundary value problems and canonical renumbering
of the state coordinates so that equal weights are contiguous.
"""

import logging
from itertools import combinations
from typing import Optional, Tuple
import numpy as np

from config.solver_config import DEFAULT_CONFIG
from dirac.models import BoundaryPair, DiracBVP, PotentialField, ValidationReport, WeightMatrix


def validate_bvp(bvp: DiracBVP, settings: Optional[dict] = None) -> ValidationReport:
    """
    Check the structural invariants of a boundary value problem
    Args:
        bvp: Problem to check
        settings: Overrides for SYSTEM_CONFIG
    Returns:
        ValidationReport listing every violated invariant
    """
    settings = settings or DEFAULT_CONFIG['system']
    report = ValidationReport()
    n = bvp.weight.n
    b = bvp.weight.entries

    if n < 1:
        report.violations.append("weight: dimension must be positive")
        return report
    if not np.all(np.isfinite(b)):
        report.violations.append("weight: entries must be finite")
    if np.any(b == 0):
        zero = [int(j) + 1 for j in np.flatnonzero(b == 0)]
        report.violations.append(f"weight: zero diagonal entry at position(s) {zero}")

    potential = bvp.potential
    if potential.n != n:
        report.violations.append(f"potential: dimension {potential.n} does not match n={n}")
    if potential.kind not in ('zero', 'constant', 'grid'):
        report.violations.append(f"potential: unknown kind '{potential.kind}'")
    elif potential.kind == 'constant':
        if potential.matrix is None or potential.matrix.shape != (n, n):
            report.violations.append("potential: constant matrix must be n x n")
        elif not np.all(np.isfinite(potential.matrix)):
            report.violations.append("potential: entries must be finite")
    elif potential.kind == 'grid':
        samples = potential.samples
        if samples is None or samples.ndim != 3 or samples.shape[1:] != (n, n):
            report.violations.append("potential: grid samples must have shape (m+1, n, n)")
        else:
            if samples.shape[0] < 2:
                report.violations.append("potential: grid needs at least 2 samples")
            if not np.all(np.isfinite(samples)):
                report.violations.append("potential: entries must be finite")
        if potential.interp not in (0, 1):
            report.violations.append(f"potential: interpolation order {potential.interp} not in {{0, 1}}")
    if potential.endpoint_continuity.shape != (n, n):
        report.violations.append("potential: endpoint_continuity must be n x n")

    C, D = bvp.boundary.C, bvp.boundary.D
    if C.shape != (n, n) or D.shape != (n, n):
        report.violations.append(f"boundary: C and D must be {n} x {n}")
    elif not (np.all(np.isfinite(C)) and np.all(np.isfinite(D))):
        report.violations.append("boundary: entries must be finite")
    elif not boundary_rank_ok(C, D, settings['rank_tol']):
        report.violations.append("boundary: rank of (C D) is less than n")

    for j, k in combinations(range(n), 2):
        if b[j] != b[k] and abs(b[j] - b[k]) < settings['near_equal_warning']:
            message = f"weight: b_{j + 1} and b_{k + 1} differ by {abs(b[j] - b[k]):.2e} but are kept distinct"
            report.warnings.append(message)
            logging.warning(message)

    return report


def boundary_rank_ok(C: np.ndarray, D: np.ndarray, rank_tol: float = 1e-10) -> bool:
    """Rank test for (C D) through the smallest singular value of C C* + D D*"""
    compound = np.hstack([C, D])
    scale = np.linalg.norm(compound, 2)
    if scale == 0:
        return False
    gram = C @ C.conj().T + D @ D.conj().T
    smallest = np.linalg.svd(gram, compute_uv=False)[-1]
    return bool(smallest > rank_tol * scale ** 2)


def is_dirac_type(weight: WeightMatrix, im_tol: Optional[float] = None) -> bool:
    """True iff all weights are real within im_tol (relative to max(1, |b_j|))"""
    if im_tol is None:
        im_tol = DEFAULT_CONFIG['system']['im_tol']
    b = weight.entries
    return bool(np.all(np.abs(b.imag) <= im_tol * np.maximum(1.0, np.abs(b))))


def permute_bvp(bvp: DiracBVP, permutation: np.ndarray) -> DiracBVP:
    """
    Renumber coordinates: new coordinate i is old coordinate permutation[i]
    Rows of (C D) are permuted along with the columns, which keeps the
    boundary conditions equivalent and Delta unchanged.
    """
    p = np.asarray(permutation, dtype=int)
    weight = WeightMatrix(bvp.weight.entries[p])
    flags = bvp.potential.endpoint_continuity[np.ix_(p, p)]
    potential = bvp.potential.map_matrices(lambda q: q[np.ix_(p, p)], continuity=flags)
    boundary = BoundaryPair(bvp.C[np.ix_(p, p)], bvp.D[np.ix_(p, p)])
    return DiracBVP(weight=weight, potential=potential, boundary=boundary)


def canonical_block_order(bvp: DiracBVP) -> Tuple[DiracBVP, np.ndarray]:
    """
    Make equal weights contiguous
    Args:
        bvp: Valid problem
    Returns:
        (reordered problem, permutation) with 0-based permutation indices;
        groups keep their order of first appearance
    """
    permutation = np.concatenate(bvp.weight.groups())
    if np.array_equal(permutation, np.arange(bvp.n)):
        return bvp, permutation
    return permute_bvp(bvp, permutation), permutation


def diagonal_block_part(potential: PotentialField, weight: WeightMatrix) -> PotentialField:
    """Q_1: the blocks of Q belonging to equal weights, zero elsewhere"""
    mask = np.zeros((weight.n, weight.n), dtype=bool)
    for group in weight.groups():
        mask[np.ix_(group, group)] = True
    return potential.map_matrices(lambda q: np.where(mask, q, 0))
