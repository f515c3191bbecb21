"""
Fundamental Matrix Propagator

Integrates Phi' = i B (lambda - Q(x)) Phi, Phi(0) = I with a fourth-order
Magnus scheme (exact matrix exponentials on pieces where Q is constant) and
evaluates the characteristic determinant Delta = det(C + D Phi(1, lambda)).
"""

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple
import numpy as np
from scipy import linalg

from config.solver_config import DEFAULT_CONFIG
from dirac.errors import PropagationError, SectorMismatchError, ValidationError
from dirac.models import BoundaryPair, DiracBVP, PotentialField
from dirac.system_model import canonical_block_order, diagonal_block_part

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class StepControl:
    """Step count policy for the propagator"""
    base_steps: int = 16
    lambda_scaling: bool = True
    max_steps: int = 200000

    def __post_init__(self):
        if self.base_steps < 16:
            raise ValidationError(f"base_steps must be at least 16, got {self.base_steps}")
        if self.max_steps < self.base_steps:
            raise ValidationError(f"max_steps {self.max_steps} is below base_steps {self.base_steps}")

    @classmethod
    def from_config(cls, settings: Optional[dict] = None) -> 'StepControl':
        settings = settings or DEFAULT_CONFIG['propagator']
        return cls(base_steps=settings['base_steps'],
                   lambda_scaling=settings['lambda_scaling'],
                   max_steps=settings['max_steps'])

    def steps_per_unit(self, lam: complex, max_b: float) -> int:
        """base_steps * ceil(1 + |lambda| max|b| / pi)"""
        if not self.lambda_scaling:
            return self.base_steps
        return self.base_steps * int(math.ceil(1.0 + abs(lam) * max_b / math.pi))


@dataclass(frozen=True, eq=False)
class Propagation:
    """Fundamental matrix sampled at ascending abscissae"""
    lam: complex
    x_points: np.ndarray
    matrices: np.ndarray
    step_stats: Dict[str, float] = field(default_factory=dict)

    def at(self, x: float) -> np.ndarray:
        index = int(np.argmin(np.abs(self.x_points - x)))
        if abs(self.x_points[index] - x) > 1e-14:
            raise ValidationError(f"x = {x} was not propagated")
        return self.matrices[index]

    def to_dict(self) -> dict:
        """Convert propagation to dictionary"""
        return {
            'lambda': complex(self.lam),
            'x_points': [float(x) for x in self.x_points],
            'matrices': self.matrices,
            'step_stats': dict(self.step_stats),
        }


@dataclass(frozen=True, eq=False)
class GaugeRecord:
    """Gauge W on a grid together with the coordinate permutation applied first"""
    permutation: np.ndarray
    x_points: np.ndarray
    W: np.ndarray
    identity: bool = False

    def to_dict(self) -> dict:
        """Convert gauge record to dictionary"""
        return {
            'permutation': [int(p) for p in self.permutation],
            'identity': self.identity,
            'x_points': [float(x) for x in self.x_points],
            'W_end': self.W[-1],
        }


def _ordered_product(stack: np.ndarray) -> np.ndarray:
    """M_{N-1} ... M_1 M_0 by pairwise reduction"""
    n = stack.shape[-1]
    if stack.shape[0] == 0:
        return np.eye(n, dtype=complex)
    while stack.shape[0] > 1:
        if stack.shape[0] % 2:
            tail = stack[-1:]
            paired = stack[1:-1:2] @ stack[0:-1:2]
            stack = np.concatenate([paired, tail])
        else:
            stack = stack[1::2] @ stack[0::2]
    return stack[0]


class Propagator:
    def __init__(self, bvp: DiracBVP, ctrl: Optional[StepControl] = None, settings: Optional[dict] = None):
        """
        Propagator for one boundary value problem
        Args:
            bvp: Valid problem
            ctrl: Step policy (defaults from PROPAGATOR_CONFIG)
            settings: Overrides for PROPAGATOR_CONFIG
        """
        self.bvp = bvp
        self.settings = settings or DEFAULT_CONFIG['propagator']
        self.ctrl = ctrl or StepControl.from_config(self.settings)
        self.b = np.asarray(bvp.b, dtype=complex)
        self.max_b = bvp.weight.max_abs

        # Trace of B Q integrated once for the Liouville check
        self.trace_BQ = complex(np.sum(self.b * bvp.potential.diagonal_integrals()))

        # Characteristic matrix cache shared between worker threads
        self.matrix_cache = {}
        self.cache_lock = threading.Lock()

    def _nodes(self, lam: complex, x_points: np.ndarray) -> np.ndarray:
        cells = self.bvp.potential.cells
        per_cell = max(1, int(math.ceil(self.ctrl.steps_per_unit(lam, self.max_b) / cells)))
        nodes = np.linspace(0.0, 1.0, cells * per_cell + 1)
        nodes = np.union1d(nodes, x_points)
        if len(nodes) - 1 > self.ctrl.max_steps:
            bound = self.max_b * (abs(lam) + self.bvp.potential.max_norm())
            estimate = (bound / self.ctrl.max_steps) ** 4
            raise PropagationError(
                f"{len(nodes) - 1} steps needed at lambda={lam}, cap is {self.ctrl.max_steps}",
                error_estimate=estimate,
            )
        return nodes

    def _generator(self, lam: complex, Q: np.ndarray) -> np.ndarray:
        """i B (lambda - Q) for a stack of matrices Q"""
        shifted = lam * np.eye(self.bvp.n) - Q
        return 1j * self.b[None, :, None] * shifted

    def _step_matrices(self, lam: complex, nodes: np.ndarray) -> np.ndarray:
        potential = self.bvp.potential
        h = np.diff(nodes)[:, None, None]
        if potential.is_piecewise_constant():
            midpoints = 0.5 * (nodes[:-1] + nodes[1:])
            omega = h * self._generator(lam, potential.at(midpoints))
        else:
            offset = SQRT3 / 6.0
            x0 = nodes[:-1]
            width = np.diff(nodes)
            A1 = self._generator(lam, potential.at(x0 + width * (0.5 - offset)))
            A2 = self._generator(lam, potential.at(x0 + width * (0.5 + offset)))
            commutator = A2 @ A1 - A1 @ A2
            omega = 0.5 * h * (A1 + A2) + (SQRT3 / 12.0) * h ** 2 * commutator
        return linalg.expm(omega)

    def _liouville_defect(self, lam: complex, end: np.ndarray) -> float:
        expected = np.exp(1j * np.sum(self.b) * lam - 1j * self.trace_BQ)
        return float(abs(np.linalg.det(end) / expected - 1.0))

    def fundamental_matrix(self, lam: complex, x_points: Optional[Iterable[float]] = None) -> Propagation:
        """
        Phi(x, lambda) at the requested abscissae
        Args:
            lam: Spectral parameter
            x_points: Ascending points in [0, 1] (default [0, 1])
        Returns:
            Propagation with step statistics
        """
        lam = complex(lam)
        points = np.array([0.0, 1.0] if x_points is None else list(x_points), dtype=float)
        if points.size == 0 or np.any(points < 0) or np.any(points > 1) or np.any(np.diff(points) < 0):
            raise ValidationError("x_points must be ascending values in [0, 1]")

        with np.errstate(over='ignore', invalid='ignore'):
            if self.bvp.potential.kind in ('zero', 'constant'):
                # Constant generator: Phi(x) = exp(x A) exactly
                A = self._generator(lam, self.bvp.potential.at(np.zeros(1)))[0]
                matrices = list(linalg.expm(points[:, None, None] * A[None]))
                end = linalg.expm(A)
                step_count = len(points)
            else:
                nodes = self._nodes(lam, points)
                steps = self._step_matrices(lam, nodes)
                marks = np.searchsorted(nodes, points)
                matrices = []
                current = np.eye(self.bvp.n, dtype=complex)
                previous = 0
                for mark in marks:
                    current = _ordered_product(steps[previous:mark]) @ current
                    matrices.append(current)
                    previous = mark
                end = _ordered_product(steps[previous:]) @ current
                step_count = len(nodes) - 1

        if not np.all(np.isfinite(end)):
            raise PropagationError(f"fundamental matrix overflowed at lambda={lam}")

        defect = self._liouville_defect(lam, end)
        if defect > self.settings['liouville_tol']:
            logging.warning(f"Liouville defect {defect:.3e} at lambda={lam}")

        stats = {'steps': int(step_count), 'liouville_defect': defect, 'error_estimate': defect}
        return Propagation(lam=lam, x_points=points, matrices=np.array(matrices), step_stats=stats)

    def end_matrix(self, lam: complex) -> np.ndarray:
        return self.fundamental_matrix(lam, [1.0]).matrices[-1]

    def characteristic_matrix(self, lam: complex) -> np.ndarray:
        """M(lambda) = C + D Phi(1, lambda), cached per lambda"""
        key = complex(lam)
        with self.cache_lock:
            if key in self.matrix_cache:
                return self.matrix_cache[key]

        value = self.bvp.C + self.bvp.D @ self.end_matrix(key)

        with self.cache_lock:
            if len(self.matrix_cache) >= self.settings['cache_size']:
                self.matrix_cache.clear()
            self.matrix_cache[key] = value
        return value

    def char_determinant(self, lam: complex) -> complex:
        """Delta(lambda) = det M(lambda)"""
        return complex(linalg.det(self.characteristic_matrix(lam)))

    def log_char_determinant(self, lam: complex) -> Tuple[complex, float, float]:
        """
        Overflow-safe determinant
        Returns:
            (phase, log|Delta|, log of the Hadamard bound of C + D Phi(1))
        """
        M = self.characteristic_matrix(lam)
        phase, logabs = np.linalg.slogdet(M)
        norms = np.linalg.norm(M, axis=0)
        with np.errstate(divide='ignore'):
            log_bound = float(np.sum(np.log(norms)))
        return complex(phase), float(logabs), log_bound

    def determinants(self, lams: Iterable[complex], max_workers: Optional[int] = None) -> np.ndarray:
        """Delta at many points, evaluated concurrently"""
        lams = [complex(lam) for lam in lams]
        workers = max_workers or DEFAULT_CONFIG['spectrum']['max_workers']
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return np.array(list(executor.map(self.char_determinant, lams)), dtype=complex)


def fundamental_matrix(bvp: DiracBVP, lam: complex, x_points=None, ctrl: Optional[StepControl] = None) -> Propagation:
    return Propagator(bvp, ctrl).fundamental_matrix(lam, x_points)


def char_determinant(bvp: DiracBVP, lam: complex, ctrl: Optional[StepControl] = None) -> complex:
    return Propagator(bvp, ctrl).char_determinant(lam)


def scaled_determinant(bvp: DiracBVP, lam: complex, sector: int, model, ctrl: Optional[StepControl] = None,
                       propagator: Optional[Propagator] = None) -> complex:
    """
    Delta(lambda) exp(-i tau_p lambda) / gamma_p, computed in log space
    Args:
        bvp: Valid problem
        lam: Point inside the sector
        sector: Sector index
        model: SectorModel of that sector
        propagator: Reused propagator (optional)
    Returns:
        Scaled determinant, bounded along rays in the sector
    Raises:
        SectorMismatchError: lambda outside the sector
    """
    if model.sector != sector:
        raise SectorMismatchError(f"model belongs to sector {model.sector}, not {sector}")
    if not model.contains(lam):
        raise SectorMismatchError(f"lambda={lam} is not inside sector {sector}")
    propagator = propagator or Propagator(bvp, ctrl)
    phase, logabs, _ = propagator.log_char_determinant(lam)
    if phase == 0:
        return 0j
    return complex(phase * np.exp(logabs - 1j * model.tau * complex(lam)) / model.gamma)


def gauge_normalize(bvp: DiracBVP, settings: Optional[dict] = None) -> Tuple[DiracBVP, GaugeRecord]:
    """
    Remove the diagonal blocks of Q by the gauge y = W z, W' = -i B Q_1 W
    Args:
        bvp: Valid problem
        settings: Overrides for PROPAGATOR_CONFIG
    Returns:
        (problem with zero diagonal blocks in canonical order, gauge record)
    """
    settings = settings or DEFAULT_CONFIG['propagator']
    ordered, permutation = canonical_block_order(bvp)
    block_part = diagonal_block_part(ordered.potential, ordered.weight)
    n = bvp.n

    if block_part.is_zero():
        record = GaugeRecord(permutation=np.arange(n), x_points=np.array([0.0, 1.0]),
                             W=np.array([np.eye(n, dtype=complex)] * 2), identity=True)
        return bvp, record

    source = ordered.potential
    cells = source.cells
    cells = cells * int(math.ceil(settings['gauge_cells'] / cells))
    nodes = np.linspace(0.0, 1.0, cells + 1)
    if source.is_piecewise_constant():
        # Step samples are read at cell midpoints
        sample_points = 0.5 * (nodes[:-1] + nodes[1:])
        x_points = np.union1d(nodes, sample_points)
    else:
        sample_points = nodes
        x_points = nodes

    # W solves the lambda = 0 system with potential Q_1
    gauge_problem = DiracBVP(weight=ordered.weight, potential=block_part, boundary=ordered.boundary)
    ctrl = StepControl(base_steps=max(16, settings['base_steps']), lambda_scaling=False,
                       max_steps=max(settings['max_steps'], 4 * cells))
    try:
        propagation = Propagator(gauge_problem, ctrl, settings).fundamental_matrix(0.0, x_points)
    except PropagationError as e:
        logging.error(f"Gauge integration failed: {e}")
        raise

    W_all = propagation.matrices
    W_samples = W_all[np.searchsorted(x_points, sample_points)]
    residual = source.at(sample_points) - block_part.at(sample_points)
    transformed = np.linalg.solve(W_samples, residual @ W_samples)
    if source.is_piecewise_constant():
        transformed = np.concatenate([transformed, transformed[-1:]])
        interp = 0
    else:
        interp = 1

    flags = source.endpoint_continuity.copy() if source.kind == 'grid' else np.ones((n, n), dtype=bool)
    potential = PotentialField(n=n, kind='grid', samples=transformed, interp=interp, endpoint_continuity=flags)
    W_nodes = W_all[np.searchsorted(x_points, nodes)]
    boundary = BoundaryPair(ordered.C, ordered.D @ W_nodes[-1])
    normalized = DiracBVP(weight=ordered.weight, potential=potential, boundary=boundary)
    record = GaugeRecord(permutation=permutation, x_points=nodes, W=W_nodes)
    return normalized, record
