"""
Problem Models

This module defines the problem objects of the toolkit: the diagonal weight B,
the potential Q, the boundary pair (C, D) and the boundary value problem
-i B^{-1} y' + Q(x) y = lambda y,  C y(0) + D y(1) = 0  on [0, 1].
"""

from dataclasses import dataclass, field
from typing import List, Optional
import numpy as np


def _frozen_array(values, dtype=complex) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Diagonal weight B = diag(b_1, ..., b_n)"""
    entries: np.ndarray = field(default_factory=lambda: np.ones(1, dtype=complex))

    def __post_init__(self):
        object.__setattr__(self, 'entries', _frozen_array(np.ravel(self.entries)))

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.entries)

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def distinct_values(self) -> List[complex]:
        """Distinct weights in order of first appearance (exact equality)"""
        values = []
        for b in self.entries:
            if not any(b == v for v in values):
                values.append(complex(b))
        return values

    def groups(self) -> List[np.ndarray]:
        """Coordinate indices of each distinct weight"""
        return [np.flatnonzero(self.entries == v) for v in self.distinct_values()]

    def is_block_ordered(self) -> bool:
        return all(np.all(np.diff(g) == 1) for g in self.groups())

    def to_dict(self) -> dict:
        """Convert weight to dictionary"""
        return {'n': self.n, 'entries': [complex(b) for b in self.entries]}


@dataclass(frozen=True, eq=False)
class PotentialField:
    """
    Potential matrix Q(x) on [0, 1]
    kind 'zero' and 'constant' are exact; kind 'grid' stores m+1 equispaced
    samples with step (interp=0) or linear (interp=1) interpolation.
    """
    n: int = 1
    kind: str = 'zero'
    matrix: Optional[np.ndarray] = None
    samples: Optional[np.ndarray] = None
    interp: int = 1
    endpoint_continuity: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.matrix is not None:
            object.__setattr__(self, 'matrix', _frozen_array(self.matrix))
        if self.samples is not None:
            object.__setattr__(self, 'samples', _frozen_array(self.samples))
        if self.endpoint_continuity is None:
            flags = np.full((self.n, self.n), self.kind != 'grid', dtype=bool)
        else:
            flags = np.array(self.endpoint_continuity, dtype=bool)
        flags.setflags(write=False)
        object.__setattr__(self, 'endpoint_continuity', flags)

    @property
    def cells(self) -> int:
        """Number of grid cells (1 for exact kinds)"""
        if self.kind == 'grid':
            return int(self.samples.shape[0]) - 1
        return 1

    @property
    def abscissae(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.cells + 1)

    @property
    def breakpoints(self) -> np.ndarray:
        """Abscissae where the represented function may lose smoothness"""
        if self.kind == 'grid':
            return self.abscissae
        return np.array([0.0, 1.0])

    def is_zero(self) -> bool:
        if self.kind == 'zero':
            return True
        if self.kind == 'constant':
            return not np.any(self.matrix)
        return not np.any(self.samples)

    def is_piecewise_constant(self) -> bool:
        return self.kind in ('zero', 'constant') or self.interp == 0

    def continuous(self, j: int, k: int) -> bool:
        """Whether q_jk may be read at the endpoints"""
        if self.kind != 'grid':
            return True
        return bool(self.endpoint_continuity[j, k])

    def at(self, x) -> np.ndarray:
        """
        Evaluate Q at one abscissa or an array of abscissae
        Args:
            x: Scalar or array of points in [0, 1]
        Returns:
            n x n matrix, or array of shape (len(x), n, n)
        """
        scalar = np.ndim(x) == 0
        points = np.atleast_1d(np.asarray(x, dtype=float))

        if self.kind == 'zero':
            values = np.zeros((points.size, self.n, self.n), dtype=complex)
        elif self.kind == 'constant':
            values = np.broadcast_to(self.matrix, (points.size, self.n, self.n)).copy()
        else:
            nodes = self.abscissae
            m = self.cells
            index = np.clip(np.searchsorted(nodes, points, side='right') - 1, 0, m)
            if self.interp == 0:
                values = np.array(self.samples[index])
            else:
                left = np.minimum(index, m - 1)
                frac = (points - nodes[left]) / (nodes[left + 1] - nodes[left])
                frac = np.where(index == m, 1.0, frac)[:, None, None]
                values = (1.0 - frac) * self.samples[left] + frac * self.samples[left + 1]
                at_end = index == m
                values[at_end] = self.samples[m]

        return values[0] if scalar else values

    def start_value(self) -> np.ndarray:
        return self.at(0.0)

    def end_value(self) -> np.ndarray:
        return self.at(1.0)

    def integral(self) -> np.ndarray:
        """Exact integral over [0, 1] of the represented function"""
        if self.kind == 'zero':
            return np.zeros((self.n, self.n), dtype=complex)
        if self.kind == 'constant':
            return np.array(self.matrix)
        h = 1.0 / self.cells
        if self.interp == 0:
            return h * np.sum(self.samples[:-1], axis=0)
        return h * (np.sum(self.samples, axis=0) - 0.5 * (self.samples[0] + self.samples[-1]))

    def diagonal_integrals(self) -> np.ndarray:
        return np.diagonal(self.integral()).copy()

    def max_norm(self) -> float:
        """Largest spectral norm over the stored matrices"""
        if self.kind == 'zero':
            return 0.0
        if self.kind == 'constant':
            return float(np.linalg.norm(self.matrix, 2))
        return float(max(np.linalg.norm(s, 2) for s in self.samples))

    def map_matrices(self, transform, continuity=None) -> 'PotentialField':
        """New potential with every stored matrix passed through transform"""
        flags = self.endpoint_continuity if continuity is None else continuity
        if self.kind == 'zero':
            return PotentialField(n=self.n, kind='zero', endpoint_continuity=flags)
        if self.kind == 'constant':
            return PotentialField(n=self.n, kind='constant', matrix=transform(np.array(self.matrix)),
                                  endpoint_continuity=flags)
        samples = np.array([transform(np.array(s)) for s in self.samples])
        return PotentialField(n=self.n, kind='grid', samples=samples, interp=self.interp,
                              endpoint_continuity=flags)

    def to_dict(self) -> dict:
        """Convert potential to dictionary"""
        data = {'kind': self.kind, 'n': self.n}
        if self.kind == 'constant':
            data['matrix'] = self.matrix
        if self.kind == 'grid':
            data['samples'] = self.samples
            data['interp'] = self.interp
        data['endpoint_continuity'] = self.endpoint_continuity.tolist()
        return data


@dataclass(frozen=True, eq=False)
class BoundaryPair:
    """Boundary matrices of C y(0) + D y(1) = 0"""
    C: np.ndarray = field(default_factory=lambda: np.eye(1, dtype=complex))
    D: np.ndarray = field(default_factory=lambda: np.zeros((1, 1), dtype=complex))

    def __post_init__(self):
        object.__setattr__(self, 'C', _frozen_array(np.atleast_2d(self.C)))
        object.__setattr__(self, 'D', _frozen_array(np.atleast_2d(self.D)))

    @property
    def compound(self) -> np.ndarray:
        """The n x 2n matrix (C D)"""
        return np.hstack([self.C, self.D])

    def to_dict(self) -> dict:
        """Convert boundary pair to dictionary"""
        return {'C': self.C, 'D': self.D}


@dataclass(frozen=True, eq=False)
class DiracBVP:
    """Boundary value problem L_{C,D}(Q)"""
    weight: WeightMatrix
    potential: PotentialField
    boundary: BoundaryPair

    @property
    def n(self) -> int:
        return self.weight.n

    @property
    def b(self) -> np.ndarray:
        return self.weight.entries

    @property
    def B(self) -> np.ndarray:
        return self.weight.matrix

    @property
    def C(self) -> np.ndarray:
        return self.boundary.C

    @property
    def D(self) -> np.ndarray:
        return self.boundary.D

    def to_dict(self) -> dict:
        """Convert problem to dictionary"""
        return {
            'n': self.n,
            'weight': self.weight.to_dict(),
            'potential': self.potential.to_dict(),
            'boundary': self.boundary.to_dict(),
        }


@dataclass
class ValidationReport:
    """Outcome of a structural check; empty violations means valid"""
    violations: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def is_valid(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        """Convert report to dictionary"""
        return {
            'valid': self.is_valid,
            'violations': list(self.violations),
            'warnings': list(self.warnings),
        }


def make_bvp(b, C, D, Q=None, *, samples=None, interp: int = 1, continuity=None) -> DiracBVP:
    """
    Convenience constructor from plain arrays
    Args:
        b: Diagonal weights
        C, D: Boundary matrices
        Q: Constant potential matrix (None for zero)
        samples: Grid samples of shape (m+1, n, n); overrides Q
        interp: Interpolation order for samples
        continuity: Endpoint continuity flags for grid potentials
    Returns:
        DiracBVP
    """
    weight = WeightMatrix(np.asarray(b, dtype=complex))
    n = weight.n
    if samples is not None:
        potential = PotentialField(n=n, kind='grid', samples=samples, interp=interp,
                                   endpoint_continuity=continuity)
    elif Q is None:
        potential = PotentialField(n=n, kind='zero')
    else:
        potential = PotentialField(n=n, kind='constant', matrix=np.asarray(Q, dtype=complex))
    return DiracBVP(weight=weight, potential=potential,
                    boundary=BoundaryPair(np.asarray(C, dtype=complex), np.asarray(D, dtype=complex)))
