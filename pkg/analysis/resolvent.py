"""
Resolvent and Green's Function

The Green's function of -i B^{-1} y' + Q y - lambda y = f, C y(0) + D y(1) = 0
splits into a Volterra part and a rank-n correction:
G(x, t) = Phi(x) Phi^{-1}(t) i B [t <= x] - Phi(x) M^{-1} D Phi(1) Phi^{-1}(t) i B
with M = C + D Phi(1). Every routine below works from these factors on one grid.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple
import numpy as np
import pandas as pd
from scipy import linalg
from scipy.integrate import cumulative_trapezoid, simpson
from scipy.sparse.linalg import LinearOperator, svds

from analysis.root_functions import adjoint_bvp
from analysis.spectrum import locate_eigenvalues
from config.solver_config import DEFAULT_CONFIG
from dirac.errors import NearSpectrumError, ValidationError
from dirac.models import DiracBVP
from dirac.propagator import Propagator


@dataclass(frozen=True, eq=False)
class GreenEvaluation:
    """Kernel values G(x, t; lambda) at requested pairs"""
    lam: complex
    pairs: np.ndarray
    values: np.ndarray
    condition: float

    def to_dict(self) -> dict:
        """Convert evaluation to dictionary"""
        return {
            'lambda': complex(self.lam),
            'condition': self.condition,
            'pairs': [[float(x), float(t)] for x, t in self.pairs],
            'values': self.values,
        }


@dataclass
class SValueProfile:
    """Leading singular values of the discretized resolvent split into n series"""
    lam: complex
    size: int
    values: np.ndarray
    weights: List[float]
    series: List[List[float]] = field(default_factory=list)
    limits: List[float] = field(default_factory=list)

    def ratios(self) -> List[float]:
        """Fitted limit of s_{j,k} pi k divided by |b_j|"""
        return [limit / w for limit, w in zip(self.limits, self.weights)]

    def table(self) -> pd.DataFrame:
        """One row per singular value with its series and normalized product"""
        rows = []
        for j, values in enumerate(self.series):
            for k, s in enumerate(values, start=1):
                rows.append({'series': j, 'k': k, 's': s, 'normalized': s * math.pi * k / self.weights[j]})
        return pd.DataFrame(rows, columns=['series', 'k', 's', 'normalized'])

    def to_dict(self) -> dict:
        """Convert profile to dictionary"""
        return {
            'lambda': complex(self.lam),
            'size': self.size,
            'values': [float(s) for s in self.values],
            'weights': list(self.weights),
            'limits': list(self.limits),
            'ratios': self.ratios(),
        }


@dataclass
class DissipationDiagnostic:
    """Truncated eigenvalue sum against the trace of the resolvent difference of L and L*"""
    lam: float
    eigenvalue_count: int
    truncated_sum: float
    trace_value: complex

    @property
    def gap(self) -> float:
        return abs(self.trace_value.real - self.truncated_sum)

    def to_dict(self) -> dict:
        """Convert diagnostic to dictionary"""
        return {
            'lambda': self.lam,
            'eigenvalue_count': self.eigenvalue_count,
            'truncated_sum': self.truncated_sum,
            'trace_value': complex(self.trace_value),
            'gap': self.gap,
            'note': 'finite-region truncation, diagnostic only',
        }


class KernelFactors:
    def __init__(self, bvp: DiracBVP, lam: complex, x_points: Sequence[float], settings: Optional[dict] = None):
        """
        Factors of the Green's function on a set of abscissae
        Args:
            bvp: Valid problem
            lam: Spectral parameter off the spectrum
            x_points: Ascending abscissae in [0, 1]
            settings: Overrides for RESOLVENT_CONFIG
        Raises:
            NearSpectrumError: cond(C + D Phi(1)) above condition_limit
        """
        self.settings = settings or DEFAULT_CONFIG['resolvent']
        self.bvp = bvp
        self.lam = complex(lam)
        self.x = np.asarray(x_points, dtype=float)

        points = np.union1d(self.x, [1.0])
        propagation = Propagator(bvp).fundamental_matrix(self.lam, points)
        index = np.searchsorted(points, self.x)
        self.Phi = propagation.matrices[index]
        Phi_end = propagation.matrices[-1]

        M = bvp.C + bvp.D @ Phi_end
        self.condition = float(np.linalg.cond(M))
        if not np.isfinite(self.condition) or self.condition > self.settings['condition_limit']:
            raise NearSpectrumError(f"lambda={self.lam} is too close to the spectrum", condition=self.condition)

        # Phi^{-1}(t) i B by LU solves against the propagated matrices
        iB = 1j * np.diag(bvp.b)
        identity = np.broadcast_to(iB, self.Phi.shape)
        self.R = np.linalg.solve(self.Phi, identity)
        correction = -linalg.lu_solve(linalg.lu_factor(M), bvp.D @ Phi_end)
        self.L = self.Phi @ correction

    def kernel(self, i: int, j: int, upper: bool = False) -> np.ndarray:
        """G(x_i, x_j); on the diagonal upper=True selects the t > x branch"""
        value = self.L[i] @ self.R[j]
        below = self.x[j] < self.x[i] or (self.x[j] == self.x[i] and not upper)
        if below:
            value = value + self.Phi[i] @ self.R[j]
        return value

    def diagonal(self) -> np.ndarray:
        """G(x, x - 0) at every abscissa"""
        return self.L @ self.R + self.Phi @ self.R


def green_function(bvp: DiracBVP, lam: complex, pairs: Sequence[Tuple[float, float]],
                   settings: Optional[dict] = None) -> GreenEvaluation:
    """
    Green's function at (x, t) pairs; t == x gives the t <= x branch
    Args:
        bvp: Valid problem
        lam: Spectral parameter off the spectrum
        pairs: Points (x, t) in [0, 1]^2
        settings: Overrides for RESOLVENT_CONFIG
    Returns:
        GreenEvaluation with one n x n matrix per pair
    """
    pairs = np.atleast_2d(np.asarray(pairs, dtype=float))
    if pairs.shape[1] != 2 or np.any(pairs < 0) or np.any(pairs > 1):
        raise ValidationError("pairs must be (x, t) points in [0, 1]")
    points = np.unique(pairs)
    factors = KernelFactors(bvp, lam, points, settings)
    xi = np.searchsorted(points, pairs[:, 0])
    ti = np.searchsorted(points, pairs[:, 1])
    values = np.array([factors.kernel(i, j) for i, j in zip(xi, ti)])
    return GreenEvaluation(lam=complex(lam), pairs=pairs, values=values, condition=factors.condition)


def green_jump(bvp: DiracBVP, lam: complex, x: float, settings: Optional[dict] = None) -> np.ndarray:
    """G(x, x - 0) - G(x, x + 0), which equals i B"""
    factors = KernelFactors(bvp, lam, [x], settings)
    return factors.kernel(0, 0) - factors.kernel(0, 0, upper=True)


def apply_resolvent(bvp: DiracBVP, lam: complex, f_grid: np.ndarray,
                    settings: Optional[dict] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    (L - lambda)^{-1} f on a uniform grid
    Args:
        bvp: Valid problem
        lam: Spectral parameter off the spectrum
        f_grid: Samples of shape (points, n) on a uniform grid of [0, 1]
    Returns:
        (x_grid, y) with y = Phi(x) int_0^x Phi^{-1} i B f + L(x) int_0^1 Phi^{-1} i B f
    """
    f_grid = np.asarray(f_grid, dtype=complex)
    if f_grid.ndim != 2 or f_grid.shape[1] != bvp.n or f_grid.shape[0] < 3:
        raise ValidationError(f"f_grid must have shape (points, {bvp.n}) with at least 3 points")
    x_grid = np.linspace(0.0, 1.0, f_grid.shape[0])
    factors = KernelFactors(bvp, lam, x_grid, settings)
    integrand = np.einsum('xjk,xk->xj', factors.R, f_grid)
    running = cumulative_trapezoid(integrand, x_grid, axis=0, initial=0.0)
    y = np.einsum('xjk,xk->xj', factors.Phi, running) + np.einsum('xjk,k->xj', factors.L, running[-1])
    return x_grid, y


def _same_weight(first: DiracBVP, second: DiracBVP):
    if first.n != second.n or not np.allclose(first.b, second.b, rtol=0, atol=1e-14):
        raise ValidationError("trace formula needs problems with the same weight B")


def trace_formula_diff(first: DiracBVP, second: DiracBVP, lam: complex, grid: Optional[int] = None,
                       settings: Optional[dict] = None) -> complex:
    """
    tr int_0^1 [Phi_1 M_1^{-1} C_1 Phi_1^{-1} - Phi_2 M_2^{-1} C_2 Phi_2^{-1}] i B dx
    Args:
        first, second: Problems with the same weight
        lam: Point off both spectra
        grid: Simpson cells (even)
    Returns:
        Trace of the difference of the two resolvents
    """
    _same_weight(first, second)
    settings = settings or DEFAULT_CONFIG['resolvent']
    cells = grid or settings['grid']
    if cells % 2:
        cells += 1
    x_grid = np.linspace(0.0, 1.0, cells + 1)
    integrand = np.zeros(len(x_grid), dtype=complex)
    for sign, bvp in ((1.0, first), (-1.0, second)):
        factors = KernelFactors(bvp, lam, x_grid, settings)
        integrand += sign * np.trace(factors.diagonal(), axis1=1, axis2=2)
    return complex(simpson(integrand, x=x_grid))


def kernel_trace_difference(first: DiracBVP, second: DiracBVP, lam: complex, size: int = 2048,
                            settings: Optional[dict] = None) -> complex:
    """Trace of the difference of the two Nystrom matrices with trapezoid weights"""
    _same_weight(first, second)
    x_grid = np.linspace(0.0, 1.0, size + 1)
    weights = _trapezoid_weights(x_grid)
    total = 0j
    for sign, bvp in ((1.0, first), (-1.0, second)):
        factors = KernelFactors(bvp, lam, x_grid, settings)
        total += sign * np.sum(weights * np.trace(factors.diagonal(), axis1=1, axis2=2))
    return complex(total)


def _trapezoid_weights(x_grid: np.ndarray) -> np.ndarray:
    w = np.full(len(x_grid), x_grid[1] - x_grid[0])
    w[[0, -1]] *= 0.5
    return w


class NystromResolvent(LinearOperator):
    """
    Nystrom matrix S G S with S = diag(sqrt(trapezoid weights)); the diagonal
    blocks take the mean of both one-sided limits. Products cost O(N n^2)
    through the Volterra-plus-rank-n structure of the kernel.
    """

    def __init__(self, factors: KernelFactors):
        self.factors = factors
        self.points, self.n = factors.Phi.shape[:2]
        self.sqrt_w = np.sqrt(_trapezoid_weights(factors.x))
        size = self.points * self.n
        super().__init__(dtype=complex, shape=(size, size))

    def _matvec(self, u):
        f = self.factors
        z = self.sqrt_w[:, None] * np.asarray(u).reshape(self.points, self.n)
        v = np.einsum('xjk,xk->xj', f.R, z)
        running = np.cumsum(v, axis=0) - 0.5 * v
        out = np.einsum('xjk,k->xj', f.L, v.sum(axis=0)) + np.einsum('xjk,xk->xj', f.Phi, running)
        return (self.sqrt_w[:, None] * out).reshape(-1)

    def _rmatvec(self, y):
        f = self.factors
        z = self.sqrt_w[:, None] * np.asarray(y).reshape(self.points, self.n)
        total = np.einsum('xkj,xk->j', f.L.conj(), z)
        b = np.einsum('xkj,xk->xj', f.Phi.conj(), z)
        running = np.cumsum(b[::-1], axis=0)[::-1] - 0.5 * b
        out = np.einsum('xkj,xk->xj', f.R.conj(), total[None, :] + running)
        return (self.sqrt_w[:, None] * out).reshape(-1)

    def dense(self) -> np.ndarray:
        """Explicit matrix, for small sizes"""
        f = self.factors
        rank_part = np.einsum('iab,jbc->iajc', f.L, f.R)
        volterra = np.einsum('iab,jbc->iajc', f.Phi, f.R)
        mask = np.tril(np.ones((self.points, self.points))) - 0.5 * np.eye(self.points)
        kernel = rank_part + mask[:, None, :, None] * volterra
        scale = np.outer(self.sqrt_w, self.sqrt_w)[:, None, :, None]
        return (scale * kernel).reshape(self.shape)


def _split_series(values: np.ndarray, weights: Sequence[float]) -> List[List[float]]:
    """Greedy assignment of descending s-values to series s_{j,k} ~ |b_j| / (pi k)"""
    series: List[List[float]] = [[] for _ in weights]
    for s in values:
        misfit = [abs(math.log(s * math.pi * (len(series[j]) + 1) / w)) for j, w in enumerate(weights)]
        series[int(np.argmin(misfit))].append(float(s))
    return series


def svalue_profile(bvp: DiracBVP, lam: complex, size: int = 2048, count: Optional[int] = None,
                   settings: Optional[dict] = None) -> SValueProfile:
    """
    Leading singular values of the Nystrom-discretized resolvent
    Args:
        bvp: Valid problem
        lam: Point off the spectrum
        size: Grid cells N (>= 256)
        count: Number of s-values (default RESOLVENT_CONFIG['svalue_count'])
    Returns:
        SValueProfile with one series per weight and the median of
        s_{j,k} pi k over the fit window as the series limit
    """
    settings = settings or DEFAULT_CONFIG['resolvent']
    if size < 256:
        raise ValidationError(f"svalue grid needs at least 256 cells, got {size}")
    count = count or settings['svalue_count']
    x_grid = np.linspace(0.0, 1.0, size + 1)
    operator = NystromResolvent(KernelFactors(bvp, lam, x_grid, settings))

    if operator.shape[0] <= settings['dense_limit']:
        values = linalg.svdvals(operator.dense())[:count]
    else:
        k = min(count, operator.shape[0] - 2)
        values = np.sort(svds(operator, k=k, return_singular_vectors=False))[::-1]

    weights = [float(abs(b)) for b in bvp.b]
    series = _split_series(values, weights)
    first, last = settings['fit_window']
    limits = []
    for j, s in enumerate(series):
        window = [s[k - 1] * math.pi * k for k in range(first, min(last, len(s)) + 1)]
        if not window:
            logging.warning(f"Series {j} has only {len(s)} values, below the fit window")
            limits.append(math.nan)
        else:
            limits.append(float(np.median(window)))
    return SValueProfile(lam=complex(lam), size=size, values=np.asarray(values), weights=weights,
                         series=series, limits=limits)


def dissipation_sum_diagnostic(bvp: DiracBVP, lam: float, region, grid: Optional[int] = None,
                               settings: Optional[dict] = None) -> DissipationDiagnostic:
    """
    Compare sum -2 Im lambda_n / |lambda_n - lambda|^2 over eigenvalues in a
    region with tr[(L - lambda)^{-1} - (L* - lambda)^{-1}] / i
    Args:
        bvp: Dirac-type problem (real weights)
        lam: Real point off the spectrum
        region: Rectangle searched for eigenvalues
    Returns:
        DissipationDiagnostic (finite-region truncation)
    """
    if abs(complex(lam).imag) > 0:
        raise ValidationError(f"dissipation sum needs a real lambda, got {lam}")
    if np.any(np.abs(np.imag(bvp.b)) > 0):
        raise ValidationError("dissipation sum needs real weights")
    lam = float(complex(lam).real)
    spectrum = locate_eigenvalues(bvp, region)
    total = 0.0
    for value, multiplicity in spectrum.eigenvalues:
        total += multiplicity * (-2.0 * value.imag / abs(value - lam) ** 2)
    trace = trace_formula_diff(bvp, adjoint_bvp(bvp), lam, grid, settings) / 1j
    return DissipationDiagnostic(lam=lam, eigenvalue_count=len(spectrum.eigenvalues),
                                 truncated_sum=float(total), trace_value=complex(trace))
