"""
Eigenvalue Localization

Zeros of Delta inside rectangles: winding numbers by phase tracking along the
boundary, contour moments of Delta'/Delta to separate and locate zeros, Muller
polishing of simple zeros, and grouping of eigenvalues into Riesz blocks.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple
import numpy as np
from scipy.special import roots_legendre

from config.solver_config import DEFAULT_CONFIG
from dirac.errors import BoundaryZeroError, PatternMismatchError, QuadratureError, ValidationError
from dirac.models import DiracBVP
from dirac.propagator import Propagator, StepControl

TWO_PI = 2.0 * np.pi

# Offsets of the split line, tried in turn when a zero sits on it or the counts disagree
SPLIT_SHIFTS = (0.0, 0.0137, -0.0219, 0.0311, -0.0423)


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle [x0, x1] x [y0, y1] in the lambda plane"""
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValidationError(f"degenerate region {self.to_list()}")

    @classmethod
    def parse(cls, text: str) -> 'Rectangle':
        """Parse 'x0,x1,y0,y1'"""
        try:
            values = [float(v) for v in text.split(',')]
        except ValueError:
            raise ValidationError(f"region '{text}' is not four comma-separated numbers")
        if len(values) != 4:
            raise ValidationError(f"region '{text}' must have four values x0,x1,y0,y1")
        return cls(*values)

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    def corners(self) -> List[complex]:
        """Counter-clockwise corners starting at the lower-left"""
        return [complex(self.x0, self.y0), complex(self.x1, self.y0),
                complex(self.x1, self.y1), complex(self.x0, self.y1)]

    def contains(self, z: complex) -> bool:
        return self.x0 < z.real < self.x1 and self.y0 < z.imag < self.y1

    def dilate(self, fraction: float) -> 'Rectangle':
        grow = fraction * max(self.width, self.height)
        return Rectangle(self.x0 - grow, self.x1 + grow, self.y0 - grow, self.y1 + grow)

    def split(self, shift: float = 0.0) -> List['Rectangle']:
        """Two halves along the long side when the aspect exceeds 2, else four quarters"""
        fx = self.x0 + (0.5 + shift) * self.width
        fy = self.y0 + (0.5 + shift) * self.height
        if self.width > 2.0 * self.height:
            return [Rectangle(self.x0, fx, self.y0, self.y1), Rectangle(fx, self.x1, self.y0, self.y1)]
        if self.height > 2.0 * self.width:
            return [Rectangle(self.x0, self.x1, self.y0, fy), Rectangle(self.x0, self.x1, fy, self.y1)]
        return [Rectangle(self.x0, fx, self.y0, fy), Rectangle(fx, self.x1, self.y0, fy),
                Rectangle(self.x0, fx, fy, self.y1), Rectangle(fx, self.x1, fy, self.y1)]

    def to_list(self) -> List[float]:
        return [self.x0, self.x1, self.y0, self.y1]


@dataclass
class SpectrumSlice:
    """Eigenvalues with multiplicities found in a region"""
    region: Rectangle
    eigenvalues: List[Tuple[complex, int]] = field(default_factory=list)
    total_count: int = 0
    residual: float = 0.0
    unresolved: List[Tuple[Rectangle, int]] = field(default_factory=list)

    def values(self) -> np.ndarray:
        return np.array([value for value, _ in self.eigenvalues], dtype=complex)

    def to_dict(self) -> dict:
        """Convert slice to dictionary"""
        return {
            'region': self.region.to_list(),
            'eigenvalues': [{'value': v, 'multiplicity': m} for v, m in self.eigenvalues],
            'total_count': self.total_count,
            'residual': self.residual,
            'unresolved': [{'region': r.to_list(), 'count': c} for r, c in self.unresolved],
        }


@dataclass
class RieszBlocks:
    """Partition of eigenvalue indices into epsilon-close blocks"""
    angles: List[float]
    epsilon: float
    blocks: List[List[int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        """Convert blocks to dictionary"""
        return {'angles': list(self.angles), 'epsilon': self.epsilon, 'blocks': [list(b) for b in self.blocks]}


class SpectrumLocator:
    def __init__(self, bvp: DiracBVP, ctrl: Optional[StepControl] = None, settings: Optional[dict] = None,
                 propagator: Optional[Propagator] = None):
        """
        Zero finder for the characteristic determinant of one problem
        Args:
            bvp: Valid problem
            ctrl: Step policy of the propagator
            settings: Overrides for SPECTRUM_CONFIG
            propagator: Reused propagator (shares its determinant cache)
        """
        self.bvp = bvp
        self.settings = settings or DEFAULT_CONFIG['spectrum']
        self.propagator = propagator or Propagator(bvp, ctrl)
        self.log_boundary_tol = math.log(self.settings['boundary_rel_tol'])
        nodes, weights = roots_legendre(self.settings['moment_nodes'])
        self.gl_nodes = 0.5 * (nodes + 1.0)
        self.gl_weights = 0.5 * weights

    # ------------------------------------------------------------------
    # Determinant access in log form
    # ------------------------------------------------------------------

    def _log_delta(self, lam: complex) -> Tuple[complex, float]:
        """(phase, log|Delta|), raising BoundaryZeroError where Delta is negligible"""
        phase, logabs, log_bound = self.propagator.log_char_determinant(lam)
        if phase == 0 or logabs - log_bound < self.log_boundary_tol:
            raise BoundaryZeroError(f"Delta vanishes numerically at lambda={lam}")
        return phase, logabs

    def _log_derivative(self, lam: complex) -> complex:
        """Delta'(lambda) / Delta(lambda) by a five-point central difference in log form"""
        h = self.settings['derivative_step'] * (1.0 + abs(lam))
        p0, l0 = self._log_delta(lam)

        def ratio(offset):
            phase, logabs = self.propagator.log_char_determinant(lam + offset)[:2]
            return phase / p0 * math.exp(logabs - l0) if phase != 0 else 0.0

        return complex((8.0 * (ratio(h) - ratio(-h)) - (ratio(2 * h) - ratio(-2 * h))) / (12.0 * h))

    # ------------------------------------------------------------------
    # Winding numbers
    # ------------------------------------------------------------------

    def _segment_winding(self, a: complex, b: complex) -> float:
        """Sum of arg increments of Delta along the segment [a, b]"""
        count = self.settings['edge_nodes']
        limit = self.settings['max_phase_step']
        max_depth = self.settings['max_bisection_depth']

        def point(t):
            return a + (b - a) * t

        def phase_at(t):
            return self._log_delta(point(t))[0]

        total = 0.0
        ts = np.linspace(0.0, 1.0, count + 1)
        phases = [phase_at(t) for t in ts]
        stack = [(ts[i], phases[i], ts[i + 1], phases[i + 1], 0) for i in range(count)][::-1]
        while stack:
            t0, p0, t1, p1, depth = stack.pop()
            increment = float(np.angle(p1 / p0))
            if abs(increment) <= limit:
                total += increment
                continue
            if depth >= max_depth:
                raise QuadratureError(f"phase of Delta not resolved on [{point(t0)}, {point(t1)}]")
            tm = 0.5 * (t0 + t1)
            pm = phase_at(tm)
            stack.append((tm, pm, t1, p1, depth + 1))
            stack.append((t0, p0, tm, pm, depth + 1))
        return total

    def polygon_winding(self, vertices: Sequence[complex]) -> int:
        """Winding number of Delta around a closed counter-clockwise polygon"""
        total = 0.0
        for index, a in enumerate(vertices):
            b = vertices[(index + 1) % len(vertices)]
            total += self._segment_winding(a, b)
        winding = total / TWO_PI
        if abs(winding - round(winding)) > 0.25:
            raise QuadratureError(f"winding estimate {winding:.3f} is not near an integer")
        return int(round(winding))

    def rectangle_winding(self, region: Rectangle) -> int:
        return self.polygon_winding(region.corners())

    def circle_winding(self, center: complex, radius: float, sides: int = 16) -> int:
        angles = TWO_PI * np.arange(sides) / sides
        return self.polygon_winding(list(center + radius * np.exp(1j * angles)))

    def count_zeros(self, region: Rectangle) -> Tuple[int, Rectangle]:
        """
        Zeros inside the region, dilating it when Delta vanishes on the boundary
        Returns:
            (count, region actually used)
        Raises:
            BoundaryZeroError: zero persists on the boundary after all dilations
        """
        current = region
        for attempt in range(self.settings['max_dilations'] + 1):
            try:
                return self.rectangle_winding(current), current
            except BoundaryZeroError as e:
                logging.warning(f"Boundary zero on {current.to_list()} ({e}); dilating")
                current = current.dilate(self.settings['dilation'])
        raise BoundaryZeroError(f"Delta vanishes on the boundary of {region.to_list()} after "
                                f"{self.settings['max_dilations']} dilations")

    # ------------------------------------------------------------------
    # Contour moments and refinement
    # ------------------------------------------------------------------

    def moments(self, region: Rectangle) -> np.ndarray:
        """(1 / 2 pi i) contour integrals of (lambda - c)^k Delta'/Delta for k = 0, 1, 2"""
        c = region.center
        corners = region.corners()
        result = np.zeros(3, dtype=complex)
        for index, a in enumerate(corners):
            b = corners[(index + 1) % 4]
            for t, w in zip(self.gl_nodes, self.gl_weights):
                lam = a + (b - a) * t
                g = self._log_derivative(lam) * (b - a) * w
                shift = lam - c
                result += g * np.array([1.0, shift, shift ** 2])
        return result / (TWO_PI * 1j)

    def _scaled(self, reference: float):
        def f(lam):
            phase, logabs, _ = self.propagator.log_char_determinant(lam)
            return complex(phase * math.exp(logabs - reference)) if phase != 0 else 0j
        return f

    def muller(self, start: complex, scale: float, tol: float) -> Tuple[complex, bool]:
        """Muller iteration on Delta from an initial guess; returns (root, converged)"""
        reference = self.propagator.log_char_determinant(start)[1]
        f = self._scaled(reference if np.isfinite(reference) else 0.0)
        x0, x1, x2 = start - scale, start + scale, start
        f0, f1, f2 = f(x0), f(x1), f(x2)
        for _ in range(self.settings['max_iterations']):
            if f2 == 0:
                return x2, True
            q = (x2 - x1) / (x1 - x0)
            A = q * f2 - q * (1 + q) * f1 + q * q * f0
            B = (2 * q + 1) * f2 - (1 + q) ** 2 * f1 + q * q * f0
            C = (1 + q) * f2
            root = np.sqrt(B * B - 4 * A * C)
            denominator = B + root if abs(B + root) >= abs(B - root) else B - root
            if denominator == 0:
                return x2, False
            x3 = x2 - (x2 - x1) * 2 * C / denominator
            step = abs(x3 - x2)
            x0, x1, x2 = x1, x2, x3
            f0, f1, f2 = f1, f2, f(x3)
            if step < tol:
                return x2, True
        logging.warning(f"Muller iteration stagnated near {x2}")
        return x2, False

    def _resolve_cell(self, cell: Rectangle, count: int, tol: float):
        """Roots found in a cell, or the subcells still to process"""
        if count == 0:
            return [], []
        s = self.moments(cell)
        c = cell.center
        if abs(s[0] - count) > self.settings['moment_tol'] * max(1, count):
            logging.info(f"Moment count {s[0]:.4f} disagrees with winding {count} on {cell.to_list()}")
            return self._subdivide(cell, count, tol)

        mean = s[1] / count
        if count == 1:
            root, converged = self.muller(c + mean, max(1e-3 * cell.diameter, 10 * tol), tol)
            if converged and cell.contains(root):
                return [(complex(root), 1)], []
            if not converged:
                logging.info(f"Muller iteration did not converge on {cell.to_list()}; subdividing")
                return self._subdivide(cell, count, tol)
            if cell.contains(c + mean):
                return [(complex(c + mean), 1)], []
            return self._subdivide(cell, count, tol)

        spread = math.sqrt(abs(s[2] / count - mean ** 2))
        limit = 10.0 * math.sqrt(abs(s[0] - count)) * cell.diameter + \
            self.settings['cluster_spread'] * (1.0 + abs(c + mean))
        if spread <= limit or cell.diameter < self.settings['min_cell']:
            return [(complex(c + mean), count)], []
        return self._subdivide(cell, count, tol)

    def _subdivide(self, cell: Rectangle, count: int, tol: float):
        if cell.diameter < self.settings['min_cell']:
            logging.warning(f"Cell {cell.to_list()} reached the minimum size with {count} zeros")
            return [(complex(cell.center), count)], []
        mismatch = None
        for shift in SPLIT_SHIFTS:
            try:
                children = cell.split(shift)
                counts = [self.rectangle_winding(child) for child in children]
            except BoundaryZeroError:
                continue
            if sum(counts) != count:
                logging.warning(f"Subcell counts {counts} do not add up to {count}; trying another split")
                mismatch = counts
                continue
            return [], [(child, k) for child, k in zip(children, counts) if k > 0]
        if mismatch is not None:
            raise QuadratureError(f"subcell counts of {cell.to_list()} never add up to {count} (last {mismatch})")
        raise BoundaryZeroError(f"cannot split {cell.to_list()} away from zeros of Delta")

    def locate(self, region: Rectangle, tol: Optional[float] = None) -> SpectrumSlice:
        """
        Eigenvalues and multiplicities inside a region
        Args:
            region: Search rectangle
            tol: Root step tolerance (default SPECTRUM_CONFIG['tol'])
        Returns:
            SpectrumSlice sorted by real then imaginary part
        """
        tol = tol or self.settings['tol']
        started = time.time()
        total, used = self.count_zeros(region)
        result = SpectrumSlice(region=used, total_count=total)
        pending = [(used, total)] if total > 0 else []

        with ThreadPoolExecutor(max_workers=self.settings['max_workers']) as executor:
            while pending:
                outcomes = list(executor.map(lambda item: self._safe_resolve(item[0], item[1], tol), pending))
                pending = []
                for cell, count, roots, children, failed in outcomes:
                    result.eigenvalues.extend(roots)
                    pending.extend(children)
                    if failed:
                        result.unresolved.append((cell, count))

        for cell, count in result.unresolved:
            logging.warning(f"Unresolved cell {cell.to_list()} holds {count} zeros")

        result.eigenvalues.sort(key=lambda item: (item[0].real, item[0].imag))
        if result.eigenvalues:
            result.residual = float(max(abs(self.propagator.char_determinant(v)) for v, _ in result.eigenvalues))
        if DEFAULT_CONFIG['monitoring']['enable_performance_logging']:
            logging.info(f"Located {total} zeros in {time.time() - started:.2f}s")
        return result

    def _safe_resolve(self, cell: Rectangle, count: int, tol: float):
        try:
            roots, children = self._resolve_cell(cell, count, tol)
            return cell, count, roots, children, False
        except (BoundaryZeroError, QuadratureError) as e:
            logging.warning(f"Cell {cell.to_list()} failed: {e}")
            return cell, count, [], [], True


def count_zeros(bvp: DiracBVP, region: Rectangle, ctrl: Optional[StepControl] = None,
                settings: Optional[dict] = None) -> int:
    """Number of zeros of Delta in the region, counted with multiplicity"""
    return SpectrumLocator(bvp, ctrl, settings).count_zeros(region)[0]


def locate_eigenvalues(bvp: DiracBVP, region: Rectangle, tol: Optional[float] = None,
                       ctrl: Optional[StepControl] = None, settings: Optional[dict] = None) -> SpectrumSlice:
    return SpectrumLocator(bvp, ctrl, settings).locate(region, tol)


def _angular_distance(a: float, b: float) -> float:
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


def group_blocks(eigs: Sequence[complex], angles: Sequence[float], epsilon: float) -> RieszBlocks:
    """
    Chain eigenvalues that are epsilon-close with respect to the ray angles
    Args:
        eigs: Eigenvalues
        angles: Ray angles
        epsilon: Closeness threshold (angle and projection gap)
    Returns:
        RieszBlocks; each eigenvalue joins the nearest ray within epsilon and
        blocks are ordered by ray, then by projection onto the ray
    """
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    eigs = [complex(e) for e in eigs]
    angles = [float(a) for a in angles]
    parent = list(range(len(eigs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    ray_of = []
    for value in eigs:
        if value == 0:
            ray_of.append(0 if angles else None)
            continue
        distances = [_angular_distance(np.angle(value), phi) for phi in angles]
        nearest = int(np.argmin(distances)) if distances else None
        ray_of.append(nearest if nearest is not None and distances[nearest] < epsilon else None)

    projections = [None if r is None else (value * np.exp(-1j * angles[r])).real
                   for value, r in zip(eigs, ray_of)]

    for ray in range(len(angles)):
        members = sorted((projections[i], i) for i in range(len(eigs)) if ray_of[i] == ray)
        for (p_prev, i_prev), (p_next, i_next) in zip(members, members[1:]):
            if p_next - p_prev < epsilon:
                parent[find(i_next)] = find(i_prev)

    groups = {}
    for i in range(len(eigs)):
        groups.setdefault(find(i), []).append(i)

    def order(block):
        ray = ray_of[block[0]]
        if ray is None:
            return (len(angles), eigs[block[0]].real, eigs[block[0]].imag)
        return (ray, min(projections[i] for i in block), 0.0)

    blocks = sorted((sorted(block, key=lambda i: projections[i] if projections[i] is not None else 0.0)
                     for block in groups.values()), key=order)
    return RieszBlocks(angles=angles, epsilon=epsilon, blocks=blocks)


def reference_spectrum(verdict) -> Iterator[complex]:
    """
    Eigenvalue lattice of the normal model behind a Riesz verdict,
    k = 0, 1, -1, 2, -2, ... for every period 2 pi / (b_j1 - b_j2) or 2 pi / b_j
    Raises:
        PatternMismatchError: verdict has no reference lattice
    """
    if verdict.pattern not in ('split_pairs', 'block_diagonal', 'scalar_weight') or not verdict.periods:
        raise PatternMismatchError(f"no reference lattice for pattern '{verdict.pattern}'")

    def lattice():
        step = 0
        while True:
            k = (step + 1) // 2 if step % 2 else -(step // 2)
            for period in verdict.periods:
                yield complex(k * period)
            step += 1

    return lattice()
