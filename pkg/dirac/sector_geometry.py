"""
Sector Geometry

Lines Re(i b_j z) = 0 and Re(i b_j z) = Re(i b_k z) split the plane into open
sectors with constant sign patterns. The matrix T_{izB}(C, D) takes its k-th
column from C where Re(i b_k z) < 0 and from D where Re(i b_k z) > 0.
"""

import logging
from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Tuple
import numpy as np
from scipy import linalg

from config.solver_config import DEFAULT_CONFIG
from dirac.errors import NotAdmissibleError, SectorMismatchError, ValidationError
from dirac.models import WeightMatrix

TWO_PI = 2.0 * np.pi


def _weights(B) -> np.ndarray:
    if isinstance(B, WeightMatrix):
        return B.entries
    array = np.asarray(B, dtype=complex)
    if array.ndim == 2:
        return np.diagonal(array).copy()
    return np.ravel(array)


@dataclass(frozen=True, eq=False)
class SectorFan:
    """Separating lines and open sectors of the plane induced by B"""
    weights: np.ndarray
    lines: np.ndarray
    sectors: List[Tuple[float, float]]
    representatives: np.ndarray
    sign_patterns: np.ndarray

    @property
    def count(self) -> int:
        return len(self.sectors)

    def sector_of(self, z: complex, angle_tol: Optional[float] = None) -> int:
        """
        Index of the open sector containing z
        Raises:
            SectorMismatchError: z is zero or lies on a separating line
        """
        if angle_tol is None:
            angle_tol = DEFAULT_CONFIG['sector']['angle_tol']
        if z == 0:
            raise SectorMismatchError("z = 0 belongs to no sector")
        angle = float(np.angle(z)) % TWO_PI
        for index, (start, end) in enumerate(self.sectors):
            for candidate in (angle, angle + TWO_PI):
                if start + angle_tol < candidate < end - angle_tol:
                    return index
        raise SectorMismatchError(f"arg z = {angle:.15g} lies on a separating line")

    def interior_points(self, index: int, fractions=(0.25, 0.5, 0.75)) -> np.ndarray:
        """Unit points at the given fractions of a sector's arc"""
        start, end = self.sectors[index]
        return np.exp(1j * np.array([start + f * (end - start) for f in fractions]))

    def to_dict(self) -> dict:
        """Convert fan to dictionary"""
        return {
            'lines': [float(a) for a in self.lines],
            'sectors': [[float(s), float(e)] for s, e in self.sectors],
            'representatives': [complex(z) for z in self.representatives],
            'sign_patterns': self.sign_patterns.astype(int).tolist(),
        }


@dataclass(frozen=True, eq=False)
class TMatrix:
    """T_{izB}(C, D) at a point z"""
    z: complex
    matrix: np.ndarray

    @property
    def det(self) -> complex:
        return complex(linalg.det(self.matrix))

    def is_nonzero(self, det_tol: Optional[float] = None) -> bool:
        return det_is_nonzero(self.matrix, det_tol)


def det_is_nonzero(matrix: np.ndarray, det_tol: Optional[float] = None) -> bool:
    """|det| > det_tol * (product of column norms)"""
    if det_tol is None:
        det_tol = DEFAULT_CONFIG['classifier']['det_tol']
    scale = float(np.prod(np.linalg.norm(matrix, axis=0)))
    if scale == 0.0:
        return False
    return abs(linalg.det(matrix)) > det_tol * scale


def line_angles(B, angle_tol: Optional[float] = None) -> np.ndarray:
    """Angles in [0, pi) of all lines l_j and l_jk, sorted and deduplicated"""
    if angle_tol is None:
        angle_tol = DEFAULT_CONFIG['sector']['angle_tol']
    values = WeightMatrix(_weights(B)).distinct_values()
    directions = list(values) + [bj - bk for bj, bk in combinations(values, 2)]

    angles = []
    for c in directions:
        # Re(i c e^{i phi}) = 0  <=>  phi = -arg c  (mod pi)
        phi = (-np.angle(c)) % np.pi
        if np.pi - phi < angle_tol:
            phi = 0.0
        if not any(abs(phi - a) < angle_tol for a in angles):
            angles.append(float(phi))
    return np.array(sorted(angles))


def column_signs(z: complex, B, sign_tol: Optional[float] = None) -> np.ndarray:
    """
    Signs of Re(i b_j z)
    Raises:
        NotAdmissibleError: some Re(i b_j z) vanishes
    """
    if sign_tol is None:
        sign_tol = DEFAULT_CONFIG['sector']['sign_tol']
    b = _weights(B)
    values = (1j * b * z).real
    small = np.abs(values) <= sign_tol * np.abs(b) * abs(z)
    if np.any(small):
        raise NotAdmissibleError(f"z = {z} lies on the line of b_{int(np.argmax(small)) + 1}")
    return np.where(values > 0, 1, -1)


def compute_fan(B, settings: Optional[dict] = None) -> SectorFan:
    """
    Build the sector fan of a weight
    Args:
        B: WeightMatrix, diagonal matrix or vector of weights
        settings: Overrides for SECTOR_CONFIG
    Returns:
        SectorFan with midpoint representatives and sign patterns
    """
    settings = settings or DEFAULT_CONFIG['sector']
    b = _weights(B)
    lines = line_angles(b, settings['angle_tol'])
    boundaries = np.sort(np.concatenate([lines, lines + np.pi]))

    sectors = []
    for index, start in enumerate(boundaries):
        end = boundaries[index + 1] if index + 1 < len(boundaries) else boundaries[0] + TWO_PI
        sectors.append((float(start), float(end)))

    representatives = []
    patterns = []
    for start, end in sectors:
        mid = 0.5 * (start + end)
        z = np.exp(1j * mid)
        values = (1j * b * z).real
        if np.any(np.abs(values) < settings['sign_tol'] * np.abs(b)):
            logging.warning(f"Sector representative at angle {mid:.17g} is close to a line; recomputing")
            z = np.exp(1j * start) + np.exp(1j * end)
            z = z / abs(z)
        probes = np.exp(1j * (start + np.array([0.25, 0.5, 0.75]) * (end - start)))
        pattern = np.where((1j * b * z).real > 0, 1, -1)
        for probe in probes:
            if not np.array_equal(np.where((1j * b * probe).real > 0, 1, -1), pattern):
                raise ValidationError(f"sign pattern not constant on sector ({start}, {end})")
        representatives.append(complex(z))
        patterns.append(pattern)

    return SectorFan(
        weights=np.array(b),
        lines=lines,
        sectors=sectors,
        representatives=np.array(representatives),
        sign_patterns=np.array(patterns, dtype=int),
    )


def is_admissible(z: complex, B, sign_tol: Optional[float] = None) -> bool:
    """z off every line l_j"""
    if z == 0:
        raise ValidationError("z = 0 is never admissible")
    try:
        column_signs(z, B, sign_tol)
    except NotAdmissibleError:
        return False
    return True


def is_feasible(z: complex, B, sign_tol: Optional[float] = None) -> bool:
    """z admissible and off every line l_jk"""
    if sign_tol is None:
        sign_tol = DEFAULT_CONFIG['sector']['sign_tol']
    if not is_admissible(z, B, sign_tol):
        return False
    values = WeightMatrix(_weights(B)).distinct_values()
    for bj, bk in combinations(values, 2):
        c = bj - bk
        if abs((1j * c * z).real) <= sign_tol * abs(c) * abs(z):
            return False
    return True


def build_T(z: complex, C: np.ndarray, D: np.ndarray, B) -> TMatrix:
    """
    Assemble T_{izB}(C, D)
    Args:
        z: Admissible point
        C, D: Boundary matrices
        B: Weight
    Returns:
        TMatrix with columns of C where Re(i b_k z) < 0, of D otherwise
    """
    signs = column_signs(z, B)
    matrix = np.where(signs[None, :] < 0, np.asarray(C, dtype=complex), np.asarray(D, dtype=complex))
    return TMatrix(z=complex(z), matrix=matrix)


def build_T_swapped(z: complex, C: np.ndarray, D: np.ndarray, B, kind: str, j: int, k: int) -> TMatrix:
    """
    T with one column replaced
    Args:
        kind: 'c' replaces column j (a C column) by c_k;
              'd' replaces column k (a D column) by d_j
        j: 0-based index with Re(i b_j z) < 0
        k: 0-based index with Re(i b_k z) > 0
    Returns:
        TMatrix T^{c_j -> c_k} or T^{d_k -> d_j}
    """
    signs = column_signs(z, B)
    n = len(signs)
    if not (0 <= j < n and 0 <= k < n) or signs[j] > 0 or signs[k] < 0:
        raise ValidationError(f"invalid swap indices j={j}, k={k} for sign pattern {signs.tolist()}")
    matrix = build_T(z, C, D, B).matrix.copy()
    if kind == 'c':
        matrix[:, j] = np.asarray(C, dtype=complex)[:, k]
    elif kind == 'd':
        matrix[:, k] = np.asarray(D, dtype=complex)[:, j]
    else:
        raise ValidationError(f"unknown swap kind '{kind}'")
    return TMatrix(z=complex(z), matrix=matrix)
