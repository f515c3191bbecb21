"""
Structural Classifier

Regularity, completeness and incompleteness certificates, normality,
dissipativity, Riesz-basis pattern verdicts and spectral synthesis verdicts
for L_{C,D}(Q).
"""

import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Tuple
import numpy as np
from scipy import linalg

from config.solver_config import DEFAULT_CONFIG
from dirac.asymptotics import omega1
from dirac.errors import Omega1UndefinedError
from dirac.models import DiracBVP
from dirac.propagator import Propagator
from dirac.sector_geometry import build_T, compute_fan, det_is_nonzero
from dirac.system_model import canonical_block_order, is_dirac_type

TWO_PI = 2.0 * np.pi

# Fixed probe points for detecting Delta == 0
DEGENERACY_PROBES = (0.7 + 0.3j, -1.3 + 0.9j, 2.1 - 0.4j, -0.2 - 1.7j, 3.7 + 2.2j,
                     -4.1 + 0.6j, 1.9 + 4.3j)


@dataclass
class RegularityReport:
    """Regularity verdict with per-sector det T values"""
    sector_dets: List[complex] = field(default_factory=list)
    regular: bool = False
    weakly_regular: bool = False
    witness_triple: Optional[List[complex]] = None
    degenerate: bool = False

    def to_dict(self) -> dict:
        """Convert report to dictionary"""
        return {
            'sector_dets': list(self.sector_dets),
            'regular': self.regular,
            'weakly_regular': self.weakly_regular,
            'witness_triple': self.witness_triple,
            'degenerate': self.degenerate,
        }


@dataclass
class IncompletenessWitness:
    """Certificate of infinite defect"""
    kind: str
    A: Optional[np.ndarray] = None
    component: Optional[int] = None
    endpoint: Optional[int] = None
    epsilon: float = 0.0

    def to_dict(self) -> dict:
        """Convert witness to dictionary"""
        return {
            'kind': self.kind,
            'A': self.A,
            'component': None if self.component is None else self.component + 1,
            'endpoint': self.endpoint,
            'epsilon': self.epsilon,
        }


@dataclass
class CompletenessCertificate:
    """Outcome of the completeness rules"""
    status: str = 'inconclusive'
    rule: Optional[str] = None
    witnesses: Dict = field(default_factory=dict)
    vanishing_half_plane: Optional[Tuple[float, float]] = None

    def to_dict(self) -> dict:
        """Convert certificate to dictionary"""
        return {
            'status': self.status,
            'rule': self.rule,
            'witnesses': self.witnesses,
            'vanishing_half_plane': None if self.vanishing_half_plane is None else list(self.vanishing_half_plane),
        }


@dataclass
class DissipativityReport:
    verdict: str
    boundary_eigenvalues: Optional[np.ndarray] = None
    im_q_range: Optional[Tuple[float, float]] = None

    def to_dict(self) -> dict:
        """Convert report to dictionary"""
        return {
            'verdict': self.verdict,
            'boundary_eigenvalues': None if self.boundary_eigenvalues is None
            else [float(v) for v in self.boundary_eigenvalues],
            'im_q_range': None if self.im_q_range is None else list(self.im_q_range),
        }


@dataclass
class RieszVerdict:
    """Pattern-matched Riesz basis verdict"""
    pattern: str = 'unknown'
    verdict: str = 'unknown'
    angles: List[float] = field(default_factory=list)
    periods: List[complex] = field(default_factory=list)

    def to_dict(self) -> dict:
        """Convert verdict to dictionary"""
        return {
            'pattern': self.pattern,
            'verdict': self.verdict,
            'angles': list(self.angles),
            'periods': list(self.periods),
        }


@dataclass
class SynthesisVerdict:
    verdict: str = 'not_applicable'
    half_plane: Optional[str] = None
    growth_exponent: Optional[float] = None
    ray_points: List[float] = field(default_factory=list)
    reason: str = ''

    def to_dict(self) -> dict:
        """Convert verdict to dictionary"""
        return {
            'verdict': self.verdict,
            'half_plane': self.half_plane,
            'growth_exponent': self.growth_exponent,
            'ray_points': list(self.ray_points),
            'reason': self.reason,
        }


# ----------------------------------------------------------------------------
# Row-space helpers (all verdicts must be invariant under (C D) -> M (C D))
# ----------------------------------------------------------------------------

def _row_space_on(M: np.ndarray, support: np.ndarray) -> np.ndarray:
    """Basis (as rows) of the vectors in the row space of M supported on `support`"""
    outside = ~support
    if not np.any(outside):
        return M.copy()
    Y = linalg.null_space(M[:, outside].T, rcond=1e-10)
    return Y.T @ M


def _row_space_contains(M: np.ndarray, vector: np.ndarray, tol: float = 1e-10) -> bool:
    coefficients, *_ = np.linalg.lstsq(M.T, vector, rcond=None)
    residual = np.linalg.norm(M.T @ coefficients - vector)
    return bool(residual <= tol * max(1.0, np.linalg.norm(vector)))


def _rank(M: np.ndarray, tol: float = 1e-10) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * max(1.0, s[0])))


def _nonzero(value: complex, scale: float, tol: float) -> bool:
    return abs(value) > tol * max(scale, np.finfo(float).tiny)


def _boundary_scale(bvp: DiracBVP) -> float:
    """Largest column norm of (C D) to the n-th power; bounds every n x n minor"""
    return float(np.max(np.linalg.norm(np.hstack([bvp.C, bvp.D]), axis=0)) ** bvp.n)


def _q_scale(bvp: DiracBVP) -> float:
    return float(bvp.weight.max_abs * max(1.0, bvp.potential.max_norm()))


def _strict_triangle(points: np.ndarray, margin: float) -> Optional[Tuple[int, int, int]]:
    """Indices of a triple of unit points whose triangle strictly contains 0"""
    if len(points) < 3:
        return None
    units = points / np.abs(points)
    triples = np.array(list(combinations(range(len(units)), 3)))
    a, b, c = units[triples[:, 0]], units[triples[:, 1]], units[triples[:, 2]]
    cross_ab = (np.conj(a) * b).imag
    cross_bc = (np.conj(b) * c).imag
    cross_ca = (np.conj(c) * a).imag
    inside = (((cross_ab > margin) & (cross_bc > margin) & (cross_ca > margin))
              | ((cross_ab < -margin) & (cross_bc < -margin) & (cross_ca < -margin)))
    hits = np.flatnonzero(inside)
    if hits.size == 0:
        return None
    return tuple(int(i) for i in triples[hits[0]])


def _sector_candidates(fan) -> List[Tuple[int, complex]]:
    candidates = []
    for index in range(fan.count):
        for z in fan.interior_points(index):
            candidates.append((index, complex(z)))
    return candidates


# ----------------------------------------------------------------------------
# Regularity
# ----------------------------------------------------------------------------

def is_degenerate(bvp: DiracBVP, settings: Optional[dict] = None, propagator: Optional[Propagator] = None) -> bool:
    """Delta == 0 detected: |Delta| / Hadamard bound below tolerance at every probe"""
    settings = settings or DEFAULT_CONFIG['classifier']
    propagator = propagator or Propagator(bvp)
    threshold = np.log(settings['degeneracy_tol'])
    for lam in DEGENERACY_PROBES[:settings['degeneracy_probes']]:
        phase, logabs, log_bound = propagator.log_char_determinant(lam)
        if phase != 0 and logabs - log_bound > threshold:
            return False
    return True


def classify_regularity(bvp: DiracBVP, settings: Optional[dict] = None) -> RegularityReport:
    """
    Regular and weakly regular verdicts
    Args:
        bvp: Valid problem
        settings: Overrides for CLASSIFIER_CONFIG
    Returns:
        RegularityReport; the witness triple is drawn from points at 1/4, 1/2
        and 3/4 of every sector arc
    """
    settings = settings or DEFAULT_CONFIG['classifier']
    fan = compute_fan(bvp.weight)
    report = RegularityReport()

    good_sector = []
    for z in fan.representatives:
        T = build_T(complex(z), bvp.C, bvp.D, bvp.b)
        report.sector_dets.append(T.det)
        good_sector.append(det_is_nonzero(T.matrix, settings['det_tol']))
    report.regular = all(good_sector)

    candidates = [z for index, z in _sector_candidates(fan) if good_sector[index]]
    triple = _strict_triangle(np.array(candidates), settings['triangle_margin'])
    if triple is not None:
        report.weakly_regular = True
        report.witness_triple = [candidates[i] for i in triple]

    report.degenerate = is_degenerate(bvp, settings)
    return report


# ----------------------------------------------------------------------------
# Completeness rules
# ----------------------------------------------------------------------------

def _sector_goodness(bvp: DiracBVP, fan, settings: dict) -> List[dict]:
    """Per-sector omega0/omega1 values and whether |omega0| + |omega1| != 0"""
    scale = _boundary_scale(bvp) * _q_scale(bvp)
    results = []
    for z in fan.representatives:
        z = complex(z)
        T = build_T(z, bvp.C, bvp.D, bvp.b)
        try:
            w1 = omega1(z, bvp)
        except Omega1UndefinedError:
            w1 = None
        good = det_is_nonzero(T.matrix, settings['det_tol'])
        if not good and w1 is not None:
            good = _nonzero(w1, scale, settings['det_tol'])
        results.append({'z': z, 'omega0': T.det, 'omega1': w1, 'good': good})
    return results


def two_by_two_minors(bvp: DiracBVP, settings: Optional[dict] = None) -> Optional[dict]:
    """
    n = 2 rule in terms of the 2 x 2 minors J_jk of (C D)
    Returns:
        Witness dictionary when both minor conditions hold, else None
    """
    settings = settings or DEFAULT_CONFIG['classifier']
    if bvp.n != 2:
        return None
    b1, b2 = bvp.b
    if abs(np.angle(b1) - np.angle(b2)) < 1e-12:
        return None
    potential = bvp.potential
    if not all(potential.continuous(j, k) for j, k in ((0, 1), (1, 0))):
        return None

    M = np.hstack([bvp.C, bvp.D])

    def J(j, k):
        return complex(linalg.det(M[:, [j - 1, k - 1]]))

    plucker = np.sqrt(sum(abs(J(j, k)) ** 2 for j, k in combinations(range(1, 5), 2)))
    Q0, Q1 = potential.start_value(), potential.end_value()
    tol = settings['det_tol']
    scale = plucker * _q_scale(bvp)
    first = _nonzero(J(3, 2), plucker, tol) or _nonzero(
        b1 * J(1, 3) * Q0[0, 1] + b2 * J(4, 2) * Q1[1, 0], scale, tol)
    second = _nonzero(J(1, 4), plucker, tol) or _nonzero(
        b1 * J(1, 3) * Q1[0, 1] + b2 * J(4, 2) * Q0[1, 0], scale, tol)
    if first and second:
        return {'J32': J(3, 2), 'J14': J(1, 4), 'J13': J(1, 3), 'J42': J(4, 2)}
    return None


def four_by_four_pairwise(d: np.ndarray, q_end: np.ndarray, tol: float = 1e-12) -> List[bool]:
    """
    Eight pairwise conditions equivalent to the 4 x 4 rule
    Args:
        d: (d1, d2, d3, d4)
        q_end: Q(1)
    """
    d1, d2, d3, d4 = d

    def nz(*values):
        return sum(abs(v) for v in values) > tol

    return [
        nz(d1, d2), nz(d3, d4),
        nz(d1, d3), nz(d2, d4),
        nz(d1, q_end[1, 0]), nz(d2, q_end[0, 1]),
        nz(d3, q_end[3, 2]), nz(d4, q_end[2, 3]),
    ]


def four_by_four_conditions(d: np.ndarray, q_end: np.ndarray, tol: float = 1e-12) -> bool:
    d1, d2, d3, d4 = d
    first = abs(d2 * d4) + abs(d1 * d4 * q_end[0, 1]) + abs(d2 * d3 * q_end[2, 3])
    second = abs(d1 * d3) + abs(d2 * d3 * q_end[1, 0]) + abs(d1 * d4 * q_end[3, 2])
    return bool(first > tol and second > tol)


def match_four_by_four(bvp: DiracBVP) -> Optional[np.ndarray]:
    """
    Detect B = diag(-b1, b1, -b2, b2), boundary rows y1(0) + y2(0), y3(0) + y4(0),
    d1 y1(1) + d2 y2(1), d3 y3(1) + d4 y4(1) (up to row operations)
    Returns:
        Normalized (d1, d2, d3, d4) or None
    """
    if bvp.n != 4:
        return None
    b = bvp.b
    if np.any(np.abs(b.imag) > 1e-12):
        return None
    b = b.real
    if not (b[0] < 0 < b[1] and b[2] < 0 < b[3] and np.isclose(-b[0], b[1]) and np.isclose(-b[2], b[3])):
        return None

    M = np.hstack([bvp.C, bvp.D])
    c_support = np.array([True] * 4 + [False] * 4)
    if _row_space_on(M, c_support).shape[0] != 2:
        return None
    for vector in ([1, 1, 0, 0, 0, 0, 0, 0], [0, 0, 1, 1, 0, 0, 0, 0]):
        if not _row_space_contains(M, np.array(vector, dtype=complex)):
            return None

    d = np.zeros(4, dtype=complex)
    for columns in ((4, 5), (6, 7)):
        support = np.zeros(8, dtype=bool)
        support[list(columns)] = True
        rows = _row_space_on(M, support)
        if rows.shape[0] != 1:
            return None
        pair = rows[0, list(columns)]
        d[columns[0] - 4:columns[1] - 3] = pair / np.linalg.norm(pair)
    return d


def first_component_vanishes(bvp: DiracBVP, settings: Optional[dict] = None) -> Optional[dict]:
    """
    Rule for a boundary row y1(0) = 0 with Re b_j < 0 (j <= kappa) < Re b_j (j > kappa)
    Returns:
        omega0(-i) and omega1(i) when both are nonzero, else None
    """
    settings = settings or DEFAULT_CONFIG['classifier']
    re = bvp.b.real
    negative = re < 0
    kappa = int(np.sum(negative))
    if kappa < 1 or kappa >= bvp.n or not np.all(negative[:kappa]) or np.any(re == 0):
        return None
    target = np.zeros(2 * bvp.n, dtype=complex)
    target[0] = 1.0
    if not _row_space_contains(np.hstack([bvp.C, bvp.D]), target):
        return None
    if not np.all(bvp.potential.endpoint_continuity):
        return None

    T_plus = build_T(-1j, bvp.C, bvp.D, bvp.b)
    if not det_is_nonzero(T_plus.matrix, settings['det_tol']):
        return None
    correction = omega1(1j, bvp)
    if not _nonzero(correction, _boundary_scale(bvp) * _q_scale(bvp), settings['det_tol']):
        return None
    return {'omega0(-i)': T_plus.det, 'omega1(i)': correction, 'kappa': kappa}


def normality_check(B, C: np.ndarray, D: np.ndarray, tol: Optional[float] = None) -> bool:
    """C B C* = D B D* within tol relative to the two sides"""
    if tol is None:
        tol = DEFAULT_CONFIG['classifier']['normality_tol']
    Bm = np.diag(np.asarray(B).ravel()) if np.ndim(B) == 1 else np.asarray(B)
    left = C @ Bm @ C.conj().T
    right = D @ Bm @ D.conj().T
    scale = np.linalg.norm(left) + np.linalg.norm(right)
    if scale == 0:
        return True
    return bool(np.linalg.norm(left - right) <= tol * scale)


def _vanishing_half_plane(fan, goodness: List[dict]) -> Optional[Tuple[float, float]]:
    arcs = sorted(fan.sectors[i] for i, g in enumerate(goodness) if g['good'])
    if not arcs:
        return (0.0, TWO_PI)
    best = None
    for index, (start, end) in enumerate(arcs):
        next_start = arcs[(index + 1) % len(arcs)][0]
        if index + 1 == len(arcs):
            next_start += TWO_PI
        gap = next_start - end
        if gap >= np.pi - 1e-12 and (best is None or gap > best[1] - best[0]):
            best = (float(end % TWO_PI), float(end % TWO_PI + gap))
    return best


def completeness_certificate(bvp: DiracBVP, settings: Optional[dict] = None) -> CompletenessCertificate:
    """
    Apply the completeness rules in order, then the incompleteness witnesses
    Args:
        bvp: Valid problem
        settings: Overrides for CLASSIFIER_CONFIG
    Returns:
        CompletenessCertificate naming the first rule that fired
    """
    settings = settings or DEFAULT_CONFIG['classifier']
    fan = compute_fan(bvp.weight)
    goodness = _sector_goodness(bvp, fan, settings)

    witness = two_by_two_minors(bvp, settings)
    if witness:
        return CompletenessCertificate('certified_complete', 'two_by_two_minors', witness)

    d = match_four_by_four(bvp)
    if d is not None and (bvp.potential.kind != 'grid' or np.all(bvp.potential.endpoint_continuity)):
        q_end = bvp.potential.end_value()
        if four_by_four_conditions(d, q_end):
            return CompletenessCertificate('certified_complete', 'four_by_four_pattern', {'d': d})

    witness = first_component_vanishes(bvp, settings)
    if witness:
        return CompletenessCertificate('certified_complete', 'first_component_vanishes', witness)

    candidates = [(i, z) for i, z in _sector_candidates(fan) if goodness[i]['good']]
    triple = _strict_triangle(np.array([z for _, z in candidates]), settings['triangle_margin'])
    if triple is not None:
        points = [candidates[t] for t in triple]
        witness = {'points': [z for _, z in points],
                   'omega0': [goodness[i]['omega0'] for i, _ in points],
                   'omega1': [goodness[i]['omega1'] for i, _ in points]}
        return CompletenessCertificate('certified_complete', 'triangle_witness', witness)

    for index, z in enumerate(fan.representatives):
        if not goodness[index]['good']:
            continue
        opposite = fan.sector_of(-complex(z))
        if goodness[opposite]['good']:
            witness = {'points': [complex(z), -complex(z)],
                       'omega0': [goodness[index]['omega0'], goodness[opposite]['omega0']],
                       'omega1': [goodness[index]['omega1'], goodness[opposite]['omega1']]}
            return CompletenessCertificate('certified_complete', 'antipodal_pair', witness)

    if normality_check(bvp.b, bvp.C, bvp.D, settings['normality_tol']):
        return CompletenessCertificate('certified_complete', 'normal_boundary_conditions', {})

    half_plane = _vanishing_half_plane(fan, goodness)

    if np.all(bvp.b == bvp.b[0]):
        product = linalg.det(bvp.C @ bvp.D)
        scale = float(np.prod(np.linalg.norm(bvp.C, axis=0)) * np.prod(np.linalg.norm(bvp.D, axis=0)))
        if _nonzero(product, scale, settings['det_tol']):
            return CompletenessCertificate('certified_complete', 'scalar_weight', {'det_CD': complex(product)})

    incomplete = incompleteness_witness(bvp, settings)
    if incomplete is not None:
        return CompletenessCertificate('certified_incomplete', incomplete.kind, incomplete.to_dict(), half_plane)

    if np.all(bvp.b == bvp.b[0]):
        return CompletenessCertificate('certified_incomplete', 'scalar_weight', {'det_CD': 0j}, half_plane)

    logging.info(f"No completeness rule fired; omega0 and omega1 vanish on {half_plane}")
    return CompletenessCertificate('inconclusive', None, {}, half_plane)


# ----------------------------------------------------------------------------
# Incompleteness witnesses
# ----------------------------------------------------------------------------

def _reflection_matrix(C: np.ndarray, D: np.ndarray, tol: float = 1e-12) -> Optional[np.ndarray]:
    """A with y(0) = A y(1) equivalent to C y(0) + D y(1) = 0, if it exists"""
    def invertible(M):
        return abs(linalg.det(M)) > tol * max(1.0, np.prod(np.linalg.norm(M, axis=0)))

    if invertible(C):
        A = -np.linalg.solve(C, D)
    elif invertible(D):
        # A^{-1} = -D^{-1} C
        A_inv = -np.linalg.solve(D, C)
        if not invertible(A_inv):
            return None
        A = np.linalg.inv(A_inv)
    else:
        return None
    return A if invertible(A) else None


def _matching_prefix(pairs: Iterator[Tuple[np.ndarray, np.ndarray]], tol: float) -> int:
    matched = 0
    for left, right in pairs:
        if np.max(np.abs(left - right)) > tol * max(1.0, np.max(np.abs(left))):
            break
        matched += 1
    return matched


def _reflection_symmetry(bvp: DiracBVP, settings: dict) -> Optional[IncompletenessWitness]:
    A = _reflection_matrix(bvp.C, bvp.D)
    if A is None:
        return None
    B = bvp.B
    if np.max(np.abs(A @ B + B @ A)) > settings['symmetry_tol'] * max(1.0, np.max(np.abs(A))):
        return None

    A_inv = np.linalg.inv(A)
    potential = bvp.potential
    if potential.kind != 'grid':
        Q = potential.at(0.0)
        if np.max(np.abs(Q - A_inv @ Q @ A)) > settings['symmetry_tol'] * max(1.0, np.max(np.abs(Q))):
            return None
        return IncompletenessWitness('reflection_symmetry', A=A, epsilon=0.5)

    samples = potential.samples
    m = potential.cells
    if potential.interp == 0:
        pairs = ((samples[m - 1 - i], A_inv @ samples[i] @ A) for i in range(m))
        cells = _matching_prefix(pairs, settings['symmetry_tol'])
    else:
        pairs = ((samples[m - i], A_inv @ samples[i] @ A) for i in range(m + 1))
        cells = max(0, _matching_prefix(pairs, settings['symmetry_tol']) - 1)
    if cells < settings['symmetry_min_cells']:
        return None
    return IncompletenessWitness('reflection_symmetry', A=A, epsilon=min(0.5, cells / m))


def _decoupled_component(bvp: DiracBVP, settings: dict) -> Optional[IncompletenessWitness]:
    n = bvp.n
    M = np.hstack([bvp.C, bvp.D])
    potential = bvp.potential
    for endpoint in (0, 1):
        for p in range(n):
            target = np.zeros(2 * n, dtype=complex)
            target[p + endpoint * n] = 1.0
            if not _row_space_contains(M, target):
                continue
            others = [j for j in range(n) if j != p]
            if potential.kind != 'grid':
                if np.all(np.abs(potential.at(0.0)[p, others]) <= settings['symmetry_tol']):
                    return IncompletenessWitness('decoupled_component', component=p, endpoint=endpoint, epsilon=1.0)
                continue
            # Step potentials hold one value per cell; the last sample is unused
            values = potential.samples[:-1] if potential.interp == 0 else potential.samples
            if endpoint == 1:
                values = values[::-1]
            zero_rows = np.all(np.abs(values[:, p, others]) <= settings['symmetry_tol'], axis=1)
            leading = len(zero_rows) if np.all(zero_rows) else int(np.argmin(zero_rows))
            cells = leading if potential.interp == 0 else max(0, leading - 1)
            if cells >= settings['symmetry_min_cells']:
                return IncompletenessWitness('decoupled_component', component=p, endpoint=endpoint,
                                             epsilon=cells / potential.cells)
    return None


def incompleteness_witness(bvp: DiracBVP, settings: Optional[dict] = None) -> Optional[IncompletenessWitness]:
    """
    Witness of infinite defect: reflection symmetry y(0) = A y(1) with AB + BA = 0
    and Q(1 - x) = A^{-1} Q(x) A near the ends, or a decoupled component that
    vanishes at an endpoint
    Returns:
        IncompletenessWitness or None
    """
    settings = settings or DEFAULT_CONFIG['classifier']
    return _reflection_symmetry(bvp, settings) or _decoupled_component(bvp, settings)


# ----------------------------------------------------------------------------
# Dissipativity and synthesis
# ----------------------------------------------------------------------------

def _im_q_extremes(bvp: DiracBVP) -> Tuple[float, float, bool]:
    potential = bvp.potential
    if potential.kind == 'zero':
        return 0.0, 0.0, True
    stack = potential.samples if potential.kind == 'grid' else potential.matrix[None]
    imag_part = (stack - np.conj(np.swapaxes(stack, 1, 2))) / 2j
    eigenvalues = np.linalg.eigvalsh(imag_part)
    hermitian = bool(np.max(np.abs(imag_part)) <= 1e-12 * max(1.0, np.max(np.abs(stack))))
    return float(eigenvalues.min()), float(eigenvalues.max()), hermitian


def dissipativity_check(bvp: DiracBVP, settings: Optional[dict] = None) -> DissipativityReport:
    """
    Sign of C B C* - D B D* and of Im Q for B = B*
    Returns:
        DissipativityReport with verdict in {selfadjoint, accumulative,
        dissipative, neither, not_dirac_type}
    """
    settings = settings or DEFAULT_CONFIG['classifier']
    if not is_dirac_type(bvp.weight):
        return DissipativityReport('not_dirac_type')

    B = np.diag(bvp.b.real)
    H = bvp.C @ B @ bvp.C.conj().T - bvp.D @ B @ bvp.D.conj().T
    H = 0.5 * (H + H.conj().T)
    eigenvalues = np.linalg.eigvalsh(H)
    scale = max(1.0, np.linalg.norm(bvp.C) ** 2 + np.linalg.norm(bvp.D) ** 2) * bvp.weight.max_abs
    tol = settings['normality_tol'] * scale
    low, high, hermitian = _im_q_extremes(bvp)
    q_tol = 1e-12 * max(1.0, bvp.potential.max_norm())

    if hermitian and np.all(np.abs(eigenvalues) <= tol):
        verdict = 'selfadjoint'
    elif np.all(eigenvalues >= -tol) and high <= q_tol:
        verdict = 'accumulative'
    elif np.all(eigenvalues <= tol) and low >= -q_tol:
        verdict = 'dissipative'
    else:
        verdict = 'neither'
    return DissipativityReport(verdict, boundary_eigenvalues=eigenvalues, im_q_range=(low, high))


def growth_exponent(bvp: DiracBVP, half_plane: str, settings: Optional[dict] = None,
                    propagator: Optional[Propagator] = None) -> Tuple[Optional[float], List[float]]:
    """
    Empirical exponent s in |Delta(-/+ i t)| ~ e^{|tau| t} / t^s on the ladder
    Args:
        half_plane: 'upper' probes Delta(-i t) with tau = sum of positive b_j;
                    'lower' probes Delta(i t) with tau = sum of negative b_j
    Returns:
        (exponent or None when Delta vanishes on the ray, ladder)
    """
    settings = settings or DEFAULT_CONFIG['classifier']
    propagator = propagator or Propagator(bvp)
    b = bvp.b.real
    ladder = [float(t) for t in settings['growth_ladder']]
    if half_plane == 'upper':
        tau, direction = float(np.sum(b[b > 0])), -1j
    else:
        tau, direction = float(abs(np.sum(b[b < 0]))), 1j

    reduced = []
    for t in ladder:
        phase, logabs, _ = propagator.log_char_determinant(direction * t)
        if phase == 0:
            return None, ladder
        reduced.append(logabs - tau * t)
    slope = np.polyfit(np.log(ladder[-2:]), reduced[-2:], 1)[0]
    return float(-slope), ladder


def synthesis_verdict(bvp: DiracBVP, completeness: CompletenessCertificate,
                      settings: Optional[dict] = None) -> SynthesisVerdict:
    """
    Spectral synthesis of the resolvent for complete accumulative or dissipative operators
    Returns:
        SynthesisVerdict with the half-plane of lambda and the ray-growth exponent
    """
    settings = settings or DEFAULT_CONFIG['classifier']
    kind = dissipativity_check(bvp, settings).verdict
    if kind not in ('accumulative', 'dissipative', 'selfadjoint'):
        return SynthesisVerdict('not_applicable', reason=f"operator is {kind}")

    half_plane = 'lower' if kind == 'dissipative' else 'upper'
    exponent, ladder = growth_exponent(bvp, half_plane, settings)
    result = SynthesisVerdict('inconclusive', half_plane=half_plane, growth_exponent=exponent, ray_points=ladder)

    if completeness.status == 'certified_complete':
        result.verdict = 'admits_synthesis'
        result.reason = f"complete ({completeness.rule}) and {kind}"
    elif exponent is not None and exponent <= settings['growth_exponent_limit']:
        result.verdict = 'admits_synthesis'
        result.reason = f"{kind} with polynomial ray growth (s = {exponent:.2f})"
    else:
        result.reason = "completeness not certified and ray growth condition fails"
    return result


# ----------------------------------------------------------------------------
# Riesz basis patterns
# ----------------------------------------------------------------------------

def _supports_blocks(M: np.ndarray, columns: np.ndarray, size: int, parts: List[np.ndarray]) -> bool:
    """Row space restricted to `columns` has dimension `size` and maps onto every part"""
    support = np.zeros(M.shape[1], dtype=bool)
    support[columns] = True
    rows = _row_space_on(M, support)
    if _rank(rows) != size:
        return False
    return all(_rank(rows[:, part]) == size for part in parts)


def _split_pairs(bvp: DiracBVP) -> Optional[List[Tuple[int, int]]]:
    groups = bvp.weight.groups()
    values = bvp.weight.distinct_values()
    n = bvp.n
    M = np.hstack([bvp.C, bvp.D])

    def pair_ok(g1, g2):
        ratio = values[g1] / values[g2]
        if abs(ratio.imag) > 1e-12 * abs(ratio) or ratio.real >= 0:
            return False
        I1, I2 = groups[g1], groups[g2]
        if len(I1) != len(I2):
            return False
        c_cols = np.concatenate([I1, I2])
        d_cols = c_cols + n
        return (_supports_blocks(M, c_cols, len(I1), [I1, I2])
                and _supports_blocks(M, d_cols, len(I1), [I1 + n, I2 + n]))

    def search(remaining):
        if not remaining:
            return []
        first = remaining[0]
        for other in remaining[1:]:
            if pair_ok(first, other):
                rest = search([g for g in remaining if g not in (first, other)])
                if rest is not None:
                    return [(first, other)] + rest
        return None

    if len(groups) % 2:
        return None
    return search(list(range(len(groups))))


def _block_diagonal(bvp: DiracBVP) -> bool:
    n = bvp.n
    M = np.hstack([bvp.C, bvp.D])
    for group in bvp.weight.groups():
        columns = np.concatenate([group, group + n])
        if not _supports_blocks(M, columns, len(group), [group, group + n]):
            return False
    return True


def _ray_angles(phis: List[float]) -> List[float]:
    angles = []
    for phi in phis:
        for angle in ((-phi) % TWO_PI, (np.pi - phi) % TWO_PI):
            if not any(abs(angle - a) < 1e-12 or abs(abs(angle - a) - TWO_PI) < 1e-12 for a in angles):
                angles.append(float(angle))
    return sorted(angles)


def riesz_verdict(bvp: DiracBVP, settings: Optional[dict] = None) -> RieszVerdict:
    """
    Pattern-match the Riesz basis criteria
    Returns:
        RieszVerdict with pattern 'split_pairs', 'block_diagonal',
        'scalar_weight' or 'unknown'
    """
    settings = settings or DEFAULT_CONFIG['classifier']
    ordered, _ = canonical_block_order(bvp)
    values = ordered.weight.distinct_values()

    pairs = _split_pairs(ordered)
    if pairs:
        phis = [float(np.angle(values[g1] - values[g2])) for g1, g2 in pairs]
        periods = [complex(TWO_PI / (values[g1] - values[g2])) for g1, g2 in pairs]
        return RieszVerdict('split_pairs', 'basis_with_parentheses', _ray_angles(phis), periods)

    if _block_diagonal(ordered):
        phis = [float(np.angle(v)) for v in values]
        periods = [complex(TWO_PI / v) for v in values]
        return RieszVerdict('block_diagonal', 'basis_with_parentheses', _ray_angles(phis), periods)

    if len(values) == 1:
        product = linalg.det(ordered.C @ ordered.D)
        scale = float(np.prod(np.linalg.norm(ordered.C, axis=0)) * np.prod(np.linalg.norm(ordered.D, axis=0)))
        verdict = 'basis_with_parentheses' if _nonzero(product, scale, settings['det_tol']) else 'no'
        return RieszVerdict('scalar_weight', verdict, _ray_angles([float(np.angle(values[0]))]),
                            [complex(TWO_PI / values[0])])

    return RieszVerdict()
