"""
Timoshenko Beam Reduction

Reduces the damped, spatially non-homogeneous Timoshenko beam clamped at
x = 0 to a 4 x 4 Dirac-type problem with B = diag(-b1, b1, -b2, b2) on the
rescaled variable t(x) = int_0^x gamma, and evaluates the explicit
completeness and Riesz-basis conditions on the beam data.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence
import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.interpolate import PchipInterpolator

from analysis.spectrum import Rectangle, SpectrumSlice, locate_eigenvalues
from config.solver_config import DEFAULT_CONFIG
from dirac.errors import ReductionError, ValidationError
from dirac.models import BoundaryPair, DiracBVP, PotentialField, ValidationReport, WeightMatrix
from dirac.sector_geometry import build_T

PROFILE_NAMES = ('rho', 'I_rho', 'K', 'EI', 'p1', 'p2')


@dataclass(frozen=True, eq=False)
class BeamModel:
    """Beam of length l with sampled profiles on a uniform grid of [0, l]"""
    length: float
    rho: np.ndarray
    I_rho: np.ndarray
    K: np.ndarray
    EI: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    alpha1: complex = 0j
    alpha2: complex = 0j
    beta1: complex = 0j
    beta2: complex = 0j

    def __post_init__(self):
        sizes = [np.size(getattr(self, name)) for name in PROFILE_NAMES]
        points = max(max(sizes), 2)
        for name in PROFILE_NAMES:
            values = np.asarray(getattr(self, name))
            dtype = complex if name in ('p1', 'p2') else float
            if values.ndim == 0 or values.size == 1:
                values = np.full(points, values.reshape(-1)[0] if values.size else 0.0)
            array = np.array(values, dtype=dtype)
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        for name in ('alpha1', 'alpha2', 'beta1', 'beta2'):
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def x_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.length, len(self.rho))

    @classmethod
    def uniform(cls, length: float = 1.0, rho: float = 1.0, I_rho: float = 1.0, K: float = 1.0,
                EI: float = 1.0, p1: complex = 0.0, p2: complex = 0.0, points: int = 257,
                **coefficients) -> 'BeamModel':
        """Beam with constant profiles sampled at the given number of points"""
        def constant(value):
            return np.full(points, value)
        return cls(length=length, rho=constant(rho), I_rho=constant(I_rho), K=constant(K), EI=constant(EI),
                   p1=constant(p1), p2=constant(p2), **coefficients)

    def to_dict(self) -> dict:
        """Convert beam to dictionary"""
        data = {'length': self.length}
        for name in PROFILE_NAMES:
            data[name] = getattr(self, name)
        for name in ('alpha1', 'alpha2', 'beta1', 'beta2'):
            data[name] = getattr(self, name)
        return data


@dataclass(frozen=True, eq=False)
class ReductionResult:
    """Data of the reduced 4 x 4 problem"""
    b1: float
    b2: float
    x_grid: np.ndarray
    gamma: np.ndarray
    h1: np.ndarray
    h2: np.ndarray
    h1_prime: np.ndarray
    h2_prime: np.ndarray
    t_of_x: np.ndarray
    x_of_t: Callable
    Q_hat: np.ndarray
    dirac: DiracBVP
    beam: BeamModel

    @property
    def h1_end(self) -> float:
        return float(self.h1[-1])

    @property
    def h2_end(self) -> float:
        return float(self.h2[-1])

    def to_dict(self) -> dict:
        """Convert reduction to dictionary"""
        return {
            'b1': self.b1,
            'b2': self.b2,
            'h1_end': self.h1_end,
            'h2_end': self.h2_end,
            'h1_prime_end': float(self.h1_prime[-1]),
            'h2_prime_end': float(self.h2_prime[-1]),
            't_end': float(self.t_of_x[-1]),
            'dirac': self.dirac.to_dict(),
        }


@dataclass
class BeamConditions:
    """Verdicts of the explicit beam conditions with the slack of each inequality"""
    det_T_B: complex
    det_T_minus_B: complex
    generic_det_T_B: complex
    generic_det_T_minus_B: complex
    complete_minimal: str
    riesz: str
    endpoint_rule: str
    endpoint_cases: List[str] = field(default_factory=list)
    slack: Dict[str, float] = field(default_factory=dict)

    @property
    def cross_check_ok(self) -> bool:
        scale = max(1.0, abs(self.det_T_B), abs(self.det_T_minus_B))
        return (abs(self.det_T_B - self.generic_det_T_B) <= 1e-10 * scale and
                abs(self.det_T_minus_B - self.generic_det_T_minus_B) <= 1e-10 * scale)

    def to_dict(self) -> dict:
        """Convert conditions to dictionary"""
        return {
            'det_T_B': complex(self.det_T_B),
            'det_T_minus_B': complex(self.det_T_minus_B),
            'cross_check_ok': self.cross_check_ok,
            'complete_minimal': self.complete_minimal,
            'riesz': self.riesz,
            'endpoint_rule': self.endpoint_rule,
            'endpoint_cases': list(self.endpoint_cases),
            'slack': dict(self.slack),
        }


def validate_beam(beam: BeamModel, settings: Optional[dict] = None) -> ValidationReport:
    """
    Check positivity, shapes and the constancy of nu = EI rho / (K I_rho)
    Returns:
        ValidationReport listing every violation
    """
    settings = settings or DEFAULT_CONFIG['timoshenko']
    report = ValidationReport()
    if not (np.isfinite(beam.length) and beam.length > 0):
        report.violations.append(f"length: must be positive, got {beam.length}")

    sizes = {name: len(getattr(beam, name)) for name in PROFILE_NAMES}
    if len(set(sizes.values())) != 1:
        report.violations.append(f"profiles: sample counts differ {sizes}")
        return report
    if sizes['rho'] < 3:
        report.violations.append("profiles: at least 3 samples are needed")

    for name in PROFILE_NAMES:
        values = getattr(beam, name)
        if not np.all(np.isfinite(values)):
            report.violations.append(f"{name}: samples must be finite")
    for name in ('rho', 'I_rho', 'K', 'EI'):
        values = getattr(beam, name)
        if np.any(values <= 0):
            report.violations.append(f"{name}: samples must be positive")
    if not report.is_valid:
        return report

    nu = beam.EI * beam.rho / (beam.K * beam.I_rho)
    deviation = float(np.max(np.abs(nu - np.mean(nu))) / np.mean(nu))
    if deviation > settings['nu_tol']:
        report.violations.append(f"nu: EI rho / (K I_rho) varies by {deviation:.3e} relative")
    return report


def reduce_to_dirac(beam: BeamModel, settings: Optional[dict] = None) -> ReductionResult:
    """
    Similarity reduction of the beam generator to a 4 x 4 Dirac-type problem
    Args:
        beam: Beam model
        settings: Overrides for TIMOSHENKO_CONFIG
    Returns:
        ReductionResult
    Raises:
        ReductionError: validation failed
    """
    settings = settings or DEFAULT_CONFIG['timoshenko']
    report = validate_beam(beam, settings)
    if not report.is_valid:
        raise ReductionError("; ".join(report.violations))

    x = beam.x_grid
    inertia_ratio = np.sqrt(beam.I_rho / beam.EI)
    b1 = float(trapezoid(inertia_ratio, x))
    b2 = float(trapezoid(np.sqrt(beam.rho / beam.K), x))
    gamma = inertia_ratio / b1

    h1 = np.sqrt(beam.EI * beam.I_rho)
    h2 = np.sqrt(beam.K * beam.rho)
    h1_prime = np.gradient(h1, x, edge_order=2)
    h2_prime = np.gradient(h2, x, edge_order=2)

    # Theta^{-1} times the coupling pattern
    p1, p2 = beam.p1, beam.p2
    pattern = np.zeros((len(x), 4, 4), dtype=complex)
    pattern[:, 0, :] = np.stack([p1 + h1_prime, p1 - h1_prime, h2, -h2], axis=-1)
    pattern[:, 1, :] = pattern[:, 0, :]
    pattern[:, 2, :] = np.stack([-h2, -h2, p2 + h2_prime, p2 - h2_prime], axis=-1)
    pattern[:, 3, :] = np.stack([h2, h2, p2 + h2_prime, p2 - h2_prime], axis=-1)
    theta = -2j * np.stack([beam.I_rho, beam.I_rho, beam.rho, beam.rho], axis=-1)
    Q_hat = pattern / theta[:, :, None]

    t_of_x = cumulative_trapezoid(gamma, x, initial=0.0)
    if abs(t_of_x[-1] - 1.0) > 1e-10:
        logging.warning(f"t(l) = {t_of_x[-1]:.12f}, renormalizing")
    t_of_x = t_of_x / t_of_x[-1]
    if np.any(np.diff(t_of_x) <= 0):
        raise ReductionError("t(x) is not strictly increasing")
    x_of_t = PchipInterpolator(t_of_x, x)

    cells = settings['t_cells'] or len(x) - 1
    t_grid = np.linspace(0.0, 1.0, cells + 1)
    x_at_t = np.clip(x_of_t(t_grid), 0.0, beam.length)
    real_part = PchipInterpolator(x, Q_hat.real, axis=0)(x_at_t)
    imag_part = PchipInterpolator(x, Q_hat.imag, axis=0)(x_at_t)
    samples = real_part + 1j * imag_part

    C = np.array([[1, 1, 0, 0], [0, 0, 0, 0], [0, 0, 1, 1], [0, 0, 0, 0]], dtype=complex)
    D = np.zeros((4, 4), dtype=complex)
    D[1] = [beam.alpha1 - h1[-1], beam.alpha1 + h1[-1], beam.beta1, beam.beta1]
    D[3] = [beam.beta2, beam.beta2, beam.alpha2 - h2[-1], beam.alpha2 + h2[-1]]

    potential = PotentialField(n=4, kind='grid', samples=samples, interp=1,
                               endpoint_continuity=np.ones((4, 4), dtype=bool))
    dirac = DiracBVP(weight=WeightMatrix(np.array([-b1, b1, -b2, b2], dtype=complex)),
                     potential=potential, boundary=BoundaryPair(C, D))
    return ReductionResult(b1=b1, b2=b2, x_grid=x, gamma=gamma, h1=h1, h2=h2, h1_prime=h1_prime,
                           h2_prime=h2_prime, t_of_x=t_of_x, x_of_t=x_of_t, Q_hat=Q_hat, dirac=dirac, beam=beam)


def _endpoint_case(alpha: complex, h: float, h_prime: float, p: complex, tol: float):
    """Case (a), (b) or (c) of the endpoint rule for one block, or None"""
    scale = max(1.0, abs(alpha), h)
    if abs(alpha ** 2 - h ** 2) > tol * scale ** 2:
        return 'alpha_squared_differs'
    if abs(alpha - h) <= tol * scale and abs(h_prime + p) > tol * max(1.0, abs(h_prime), abs(p)):
        return 'alpha_equals_h'
    if abs(alpha + h) <= tol * scale and abs(h_prime - p) > tol * max(1.0, abs(h_prime), abs(p)):
        return 'alpha_equals_minus_h'
    return None


def beam_conditions(beam: BeamModel, reduction: Optional[ReductionResult] = None,
                    settings: Optional[dict] = None) -> BeamConditions:
    """
    Evaluate the explicit completeness and Riesz-basis conditions of the beam
    Args:
        beam: Beam model
        reduction: Precomputed reduction
        settings: Overrides for TIMOSHENKO_CONFIG
    Returns:
        BeamConditions; det T_{+-B} are cross-checked against the generic
        T-matrix assembly on the reduced problem
    """
    settings = settings or DEFAULT_CONFIG['timoshenko']
    reduction = reduction or reduce_to_dirac(beam, settings)
    tol = settings['equality_tol']
    h1, h2 = reduction.h1_end, reduction.h2_end
    a1, a2, b1, b2 = beam.alpha1, beam.alpha2, beam.beta1, beam.beta2

    det_plus = (a1 + h1) * (a2 + h2) - b1 * b2
    det_minus = (a1 - h1) * (a2 - h2) - b1 * b2
    dirac = reduction.dirac
    generic_plus = build_T(-1j, dirac.C, dirac.D, dirac.b).det
    generic_minus = build_T(1j, dirac.C, dirac.D, dirac.b).det

    scale = max(1.0, abs(a1) + h1) * max(1.0, abs(a2) + h2) + abs(b1 * b2)
    both_nonzero = abs(det_plus) > tol * scale and abs(det_minus) > tol * scale
    complete_minimal = 'complete_minimal' if both_nonzero else 'inconclusive'

    no_coupling = b1 == 0 and b2 == 0
    bounded = bool(np.all(np.isfinite(beam.p1)) and np.all(np.isfinite(beam.p2)))
    lipschitz = bool(np.all(np.isfinite(reduction.h1_prime)) and np.all(np.isfinite(reduction.h2_prime)))
    if both_nonzero and no_coupling and bounded and lipschitz:
        riesz = 'riesz_with_parentheses'
    else:
        riesz = 'inconclusive'

    slack = {
        'det_T_B': float(abs(det_plus)),
        'det_T_minus_B': float(abs(det_minus)),
    }
    cases = []
    if not no_coupling:
        endpoint_rule = 'not_applicable'
    else:
        minus_sum = abs(a1 - h1) + abs(a2 - h2)
        plus_sum = abs(a1 + h1) + abs(a2 + h2)
        slack['minus_sum'] = float(minus_sum)
        slack['plus_sum'] = float(plus_sum)
        first_ok = minus_sum > tol * scale and plus_sum > tol * scale
        blocks = ((a1, h1, reduction.h1_prime[-1], beam.p1[-1]), (a2, h2, reduction.h2_prime[-1], beam.p2[-1]))
        for j, (alpha, h, h_prime, p) in enumerate(blocks, start=1):
            slack[f'alpha{j}_squared_gap'] = float(abs(alpha ** 2 - h ** 2))
            slack[f'h{j}_prime_plus_p{j}'] = float(abs(h_prime + p))
            slack[f'h{j}_prime_minus_p{j}'] = float(abs(h_prime - p))
            case = _endpoint_case(alpha, h, h_prime, p, tol)
            cases.append(case or 'none')
        endpoint_rule = 'complete_minimal' if first_ok and 'none' not in cases else 'inconclusive'

    return BeamConditions(det_T_B=complex(det_plus), det_T_minus_B=complex(det_minus),
                          generic_det_T_B=complex(generic_plus), generic_det_T_minus_B=complex(generic_minus),
                          complete_minimal=complete_minimal, riesz=riesz, endpoint_rule=endpoint_rule,
                          endpoint_cases=cases, slack=slack)


def beam_spectrum(beam: BeamModel, region: Rectangle, reduction: Optional[ReductionResult] = None,
                  tol: Optional[float] = None) -> SpectrumSlice:
    """Eigenvalues of the reduced problem inside a region"""
    reduction = reduction or reduce_to_dirac(beam)
    return locate_eigenvalues(reduction.dirac, region, tol)


def decoupled_oracle(reduction: ReductionResult, family: int, indices: Sequence[int]) -> np.ndarray:
    """
    Zeros of the uncoupled 2 x 2 block j with Q = 0:
    pi k / b_j - i / (2 b_j) log((alpha_j - h_j) / (alpha_j + h_j))
    Args:
        reduction: Reduced beam
        family: Block index 1 or 2
        indices: Lattice indices k
    Returns:
        Complex array of lattice points
    """
    if family not in (1, 2):
        raise ValidationError(f"family must be 1 or 2, got {family}")
    beam = reduction.beam
    alpha = beam.alpha1 if family == 1 else beam.alpha2
    h = reduction.h1_end if family == 1 else reduction.h2_end
    b = reduction.b1 if family == 1 else reduction.b2
    if abs(alpha - h) == 0 or abs(alpha + h) == 0:
        raise ValidationError(f"block {family} has no eigenvalue lattice when alpha = +-h(l)")
    shift = -1j / (2.0 * b) * np.log((alpha - h) / (alpha + h))
    return np.array([math.pi * k / b + shift for k in indices], dtype=complex)
