"""
Sector Asymptotics

Per-sector data of the characteristic determinant:
Delta(lambda) = gamma_p (omega0 + omega1 / lambda + o(1/lambda)) exp(i tau_p lambda)
for lambda going to infinity inside sector p.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import numpy as np
import pandas as pd

from config.solver_config import DEFAULT_CONFIG
from dirac.errors import ModelOrderError, Omega1UndefinedError, SectorMismatchError
from dirac.models import DiracBVP
from dirac.sector_geometry import SectorFan, build_T, build_T_swapped, column_signs, compute_fan

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SectorModel:
    """Asymptotic data of one sector"""
    sector: int
    arc: Tuple[float, float]
    representative: complex
    gamma: complex
    tau: complex
    omega0: complex
    omega1: Optional[complex] = None

    def contains(self, lam: complex, angle_tol: Optional[float] = None) -> bool:
        """Whether lambda lies strictly inside the sector"""
        if angle_tol is None:
            angle_tol = DEFAULT_CONFIG['sector']['angle_tol']
        if lam == 0:
            return False
        angle = float(np.angle(lam)) % TWO_PI
        start, end = self.arc
        return any(start + angle_tol < a < end - angle_tol for a in (angle, angle + TWO_PI))

    def to_dict(self) -> dict:
        """Convert model to dictionary"""
        return {
            'sector': self.sector,
            'arc': list(self.arc),
            'representative': self.representative,
            'gamma': self.gamma,
            'tau': self.tau,
            'omega0': self.omega0,
            'omega1': self.omega1,
        }


def _sector_point(sector, fan: Optional[SectorFan], bvp: DiracBVP) -> complex:
    if isinstance(sector, (int, np.integer)):
        fan = fan or compute_fan(bvp.weight)
        return complex(fan.representatives[int(sector)])
    return complex(sector)


def gamma_tau(bvp: DiracBVP, sector, fan: Optional[SectorFan] = None) -> Tuple[complex, complex]:
    """
    gamma_p and tau_p of a sector
    Args:
        bvp: Valid problem
        sector: Sector index of the fan or a point of the sector
        fan: Precomputed fan of bvp.weight
    Returns:
        (gamma, tau)
    """
    z = _sector_point(sector, fan, bvp)
    positive = column_signs(z, bvp.b) > 0
    b = bvp.b
    tau = complex(np.sum(b[positive]))
    integrals = bvp.potential.diagonal_integrals()
    gamma = complex(np.exp(-np.sum(1j * b[positive] * integrals[positive])))
    return gamma, tau


def omega0(z: complex, C: np.ndarray, D: np.ndarray, B) -> complex:
    """det T_{izB}(C, D)"""
    return build_T(z, C, D, B).det


def omega1(z: complex, bvp: DiracBVP) -> complex:
    """
    First correction of the sector expansion
    Args:
        z: Admissible point
        bvp: Problem whose potential supplies q_kj(0) and q_jk(1)
    Returns:
        Sum over pairs with Re(i b_j z) < 0 < Re(i b_k z) of
        [det T^{c_j->c_k} b_k q_kj(0) - det T^{d_k->d_j} b_j q_jk(1)] / (b_k - b_j)
    Raises:
        Omega1UndefinedError: a q entry read at an endpoint is not marked continuous
    """
    signs = column_signs(z, bvp.b)
    negative = np.flatnonzero(signs < 0)
    positive = np.flatnonzero(signs > 0)
    potential = bvp.potential
    if potential.is_zero():
        return 0j

    missing = [(j, k) for j in negative for k in positive
               if not (potential.continuous(k, j) and potential.continuous(j, k))]
    if missing:
        pairs = ', '.join(f"({j + 1},{k + 1})" for j, k in missing)
        raise Omega1UndefinedError(f"omega1 undefined: endpoint continuity missing for pairs {pairs}")

    Q0 = potential.start_value()
    Q1 = potential.end_value()
    b = bvp.b
    total = 0j
    for j in negative:
        for k in positive:
            swapped_c = build_T_swapped(z, bvp.C, bvp.D, b, 'c', j, k).det
            swapped_d = build_T_swapped(z, bvp.C, bvp.D, b, 'd', j, k).det
            term = swapped_c * b[k] * Q0[k, j] - swapped_d * b[j] * Q1[j, k]
            total += term / (b[k] - b[j])
    return complex(total)


def build_sector_models(bvp: DiracBVP, fan: Optional[SectorFan] = None) -> List[SectorModel]:
    """SectorModel for every sector of the fan; omega1 is None where undefined"""
    fan = fan or compute_fan(bvp.weight)
    models = []
    for index, z in enumerate(fan.representatives):
        gamma, tau = gamma_tau(bvp, complex(z))
        try:
            correction = omega1(complex(z), bvp)
        except Omega1UndefinedError as e:
            logging.info(f"Sector {index}: {e}")
            correction = None
        models.append(SectorModel(
            sector=index,
            arc=fan.sectors[index],
            representative=complex(z),
            gamma=gamma,
            tau=tau,
            omega0=omega0(complex(z), bvp.C, bvp.D, bvp.b),
            omega1=correction,
        ))
    return models


def delta_model(lam: complex, model: SectorModel, order: int = 0) -> complex:
    """
    Asymptotic model of Delta
    Args:
        lam: Point inside the model's sector
        model: SectorModel
        order: 0 or 1
    Returns:
        gamma (omega0 + omega1 / lambda) exp(i tau lambda), omitting omega1 for order 0
    """
    lam = complex(lam)
    if not model.contains(lam):
        raise SectorMismatchError(f"lambda={lam} is not inside sector {model.sector}")
    if order not in (0, 1):
        raise ModelOrderError(f"model order must be 0 or 1, got {order}")
    leading = model.omega0
    if order == 1:
        if model.omega1 is None:
            raise ModelOrderError(f"omega1 is undefined in sector {model.sector}")
        if abs(lam) < 1.0:
            raise ModelOrderError("order-1 model needs |lambda| >= 1")
        leading = leading + model.omega1 / lam
    return complex(model.gamma * leading * np.exp(1j * model.tau * lam))


def ray_comparison(propagator, model: SectorModel, angle: Optional[float] = None,
                   radii: Sequence[float] = (10.0, 20.0, 40.0, 80.0)) -> pd.DataFrame:
    """
    Relative errors of the order-0 and order-1 models along a ray
    Args:
        propagator: Propagator of the problem
        model: Sector to scan
        angle: Ray angle (default: the sector representative)
        radii: |lambda| ladder
    Returns:
        DataFrame with columns radius, delta, model0, model1, err0, err1
    """
    if angle is None:
        angle = float(np.angle(model.representative))
    rows = []
    for radius in radii:
        lam = radius * np.exp(1j * angle)
        phase, logabs, _ = propagator.log_char_determinant(lam)
        # Compare in scaled form to avoid overflow
        scaled = phase * np.exp(logabs - 1j * model.tau * lam) / model.gamma
        m0 = model.omega0
        m1 = model.omega0 + model.omega1 / lam if model.omega1 is not None else np.nan
        rows.append({
            'radius': float(radius),
            'delta_scaled': complex(scaled),
            'model0': complex(m0),
            'model1': complex(m1),
            'err0': float(abs(scaled / m0 - 1.0)) if m0 != 0 else np.nan,
            'err1': float(abs(scaled / m1 - 1.0)) if model.omega1 is not None and m1 != 0 else np.nan,
        })
    return pd.DataFrame(rows)
