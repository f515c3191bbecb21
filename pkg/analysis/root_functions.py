"""
Root Functions

Eigenfunctions and chains of associated functions, the adjoint problem,
biorthogonality diagnostics and a least-squares probe of the completeness
defect. Chains come from root polynomials of M(lambda) = C + D Phi(1, lambda):
if M(lambda) c(lambda) vanishes to order m at lambda_0, the Taylor
coefficients of Phi(x, lambda) c(lambda) form a chain of length m.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple
import numpy as np
from scipy import linalg
from scipy.integrate import simpson

from analysis.spectrum import locate_eigenvalues
from config.solver_config import DEFAULT_CONFIG
from dirac.errors import ValidationError
from dirac.models import BoundaryPair, DiracBVP, WeightMatrix
from dirac.propagator import Propagator, StepControl


@dataclass(frozen=True, eq=False)
class RootChain:
    """Eigenfunction u_0 followed by associated functions u_1, ..., u_{m-1} on a grid"""
    eigenvalue: complex
    x_grid: np.ndarray
    functions: np.ndarray  # (length, grid points, n)
    coefficients: np.ndarray  # root polynomial coefficients c_0, ..., c_{m-1}

    @property
    def length(self) -> int:
        return int(self.functions.shape[0])

    @property
    def eigenfunction(self) -> np.ndarray:
        return self.functions[0]

    def to_dict(self) -> dict:
        """Convert chain to dictionary"""
        return {
            'eigenvalue': complex(self.eigenvalue),
            'length': self.length,
            'x_grid': [float(x) for x in self.x_grid],
            'functions': self.functions,
        }


@dataclass
class RootSystem:
    """Chains found at one eigenvalue and how they compare to the expected multiplicity"""
    eigenvalue: complex
    multiplicity: int
    chains: List[RootChain] = field(default_factory=list)
    kernel_dimensions: List[int] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return sum(chain.length for chain in self.chains)

    @property
    def complete(self) -> bool:
        return self.dimension == self.multiplicity

    def to_dict(self) -> dict:
        """Convert root system to dictionary"""
        return {
            'eigenvalue': complex(self.eigenvalue),
            'multiplicity': self.multiplicity,
            'dimension': self.dimension,
            'chain_lengths': [chain.length for chain in self.chains],
            'kernel_dimensions': list(self.kernel_dimensions),
        }


@dataclass
class GramReport:
    """Cross-Gram matrix of root functions against adjoint root functions"""
    matrix: np.ndarray
    labels: List[Tuple[int, int, int]]
    block_conditions: List[float]
    cross_max: float

    def to_dict(self) -> dict:
        """Convert report to dictionary"""
        return {
            'size': int(self.matrix.shape[0]),
            'block_conditions': list(self.block_conditions),
            'cross_max': self.cross_max,
        }


@dataclass
class DefectReport:
    """Least-squares residuals of test functions against the computed root functions"""
    region: List[float]
    eigenvalue_count: int
    function_count: int
    residuals: List[float]
    heuristic: bool = True

    def to_dict(self) -> dict:
        """Convert report to dictionary"""
        return {
            'region': list(self.region),
            'eigenvalue_count': self.eigenvalue_count,
            'function_count': self.function_count,
            'residuals': list(self.residuals),
            'heuristic': self.heuristic,
            'note': 'numerical evidence only; decreasing residuals suggest completeness, '
                    'a stable positive floor suggests a defect',
        }


# ----------------------------------------------------------------------
# Grid helpers
# ----------------------------------------------------------------------

def _grid(cells: int) -> np.ndarray:
    if cells < 2 or cells % 2:
        raise ValidationError(f"grid must be an even number of cells >= 2, got {cells}")
    return np.linspace(0.0, 1.0, cells + 1)


def inner_product(u: np.ndarray, v: np.ndarray, x_grid: np.ndarray) -> complex:
    """L2 inner product (u, v) of grid functions of shape (points, n)"""
    return complex(simpson(np.sum(u * np.conj(v), axis=-1), x=x_grid))


def l2_norm(u: np.ndarray, x_grid: np.ndarray) -> float:
    return math.sqrt(max(inner_product(u, u, x_grid).real, 0.0))


def _quadrature_weights(x_grid: np.ndarray) -> np.ndarray:
    """Simpson weights on an even uniform grid"""
    h = x_grid[1] - x_grid[0]
    w = np.ones(len(x_grid))
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def adjugate(M: np.ndarray) -> np.ndarray:
    """Adjugate matrix, valid for singular M"""
    n = M.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=complex)
    U, s, Vh = np.linalg.svd(M)
    cofactors = np.array([np.prod(np.delete(s, i)) for i in range(n)])
    unit = np.linalg.det(U) * np.linalg.det(Vh)
    return unit * (Vh.conj().T * cofactors) @ U.conj().T


# ----------------------------------------------------------------------
# Chains
# ----------------------------------------------------------------------

def _taylor_coefficients(propagator: Propagator, lam0: complex, radius: float, nodes: int,
                         x_grid: np.ndarray, max_workers: int) -> np.ndarray:
    """Taylor coefficients of Phi(x, .) at lam0 from samples on a Cauchy circle"""
    points = lam0 + radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        samples = list(executor.map(lambda z: propagator.fundamental_matrix(z, x_grid).matrices, points))
    coefficients = np.fft.fft(np.array(samples), axis=0) / nodes
    return coefficients * (radius ** -np.arange(nodes))[:, None, None, None]


def _block_toeplitz(blocks: np.ndarray, length: int) -> np.ndarray:
    n = blocks.shape[-1]
    T = np.zeros((length * n, length * n), dtype=complex)
    for row in range(length):
        for col in range(row + 1):
            T[row * n:(row + 1) * n, col * n:(col + 1) * n] = blocks[row - col]
    return T


def _kernel(T: np.ndarray, scale: float, threshold: float) -> np.ndarray:
    _, s, Vh = np.linalg.svd(T)
    rank = int(np.sum(s > threshold * scale))
    return Vh[rank:].conj().T


def root_chains(bvp: DiracBVP, eigenvalue: complex, multiplicity: int = 1, grid: Optional[int] = None,
                settings: Optional[dict] = None, propagator: Optional[Propagator] = None) -> RootSystem:
    """
    Canonical system of chains at one eigenvalue
    Args:
        bvp: Valid problem
        eigenvalue: Refined eigenvalue
        multiplicity: Algebraic multiplicity from the winding count
        grid: Cells of the output grid (even)
        settings: Overrides for ROOT_FUNCTIONS_CONFIG
        propagator: Propagator supplying the step policy
    Returns:
        RootSystem whose chains span the root subspace; a dimension below
        the multiplicity is logged as a rank deficiency
    """
    settings = settings or DEFAULT_CONFIG['root_functions']
    if multiplicity < 1:
        raise ValidationError(f"multiplicity must be positive, got {multiplicity}")
    lam0 = complex(eigenvalue)
    n = bvp.n
    x_grid = _grid(grid or settings['grid'])
    radius = settings['derivative_radius'] / bvp.weight.max_abs

    # One step policy for the whole circle keeps the samples analytic in lambda
    base = propagator.ctrl if propagator is not None else StepControl.from_config()
    steps = base.steps_per_unit(abs(lam0) + radius, bvp.weight.max_abs)
    ctrl = StepControl(base_steps=steps, lambda_scaling=False, max_steps=max(base.max_steps, steps))
    fixed = Propagator(bvp, ctrl)

    nodes = max(32, 4 * (multiplicity + 1) + 8)
    workers = DEFAULT_CONFIG['spectrum']['max_workers']
    phi = _taylor_coefficients(fixed, lam0, radius, nodes, x_grid, workers)
    M = np.array([bvp.D @ phi[k, -1] for k in range(nodes)])
    M[0] = M[0] + bvp.C
    scale = float(np.linalg.norm(np.hstack([bvp.C, bvp.D @ phi[0, -1]]), 2))

    # dim ker T_k = sum over chains of min(k, length)
    kernels: Dict[int, np.ndarray] = {}
    dims = [0]
    for length in range(1, multiplicity + 1):
        kernels[length] = _kernel(_block_toeplitz(M, length), scale, settings['rank_threshold'])
        dims.append(kernels[length].shape[1])
        if dims[-1] >= multiplicity or dims[-1] == dims[-2]:
            break
    longest = len(dims) - 1
    growth = [dims[k] - dims[k - 1] for k in range(1, longest + 1)] + [0]
    if longest > 1 and growth[longest - 1] == 0:
        longest -= 1

    system = RootSystem(eigenvalue=lam0, multiplicity=multiplicity, kernel_dimensions=dims[1:])
    chosen = np.zeros((n, 0), dtype=complex)
    for length in range(longest, 0, -1):
        count = growth[length - 1] - growth[length]
        if count <= 0:
            continue
        basis = kernels[length]
        leading = basis[:n]
        if chosen.shape[1]:
            Q, _ = np.linalg.qr(chosen)
            leading = leading - Q @ (Q.conj().T @ leading)
        _, _, Vh = np.linalg.svd(leading, full_matrices=False)
        for vector in (basis @ Vh[:count].conj().T).T:
            c = vector.reshape(length, n)
            functions = np.array([
                sum(phi[p - j] @ c[j] for j in range(p + 1)) for p in range(length)
            ])
            norm = l2_norm(functions[0], x_grid)
            if norm > 0:
                functions = functions / norm
                c = c / norm
            system.chains.append(RootChain(eigenvalue=lam0, x_grid=x_grid, functions=functions, coefficients=c))
            chosen = np.column_stack([chosen, c[0]])

    if system.dimension != multiplicity:
        logging.warning(f"Root subspace at {lam0} has dimension {system.dimension}, expected {multiplicity}")
    return system


def root_system(bvp: DiracBVP, eigenvalues: Sequence[Tuple[complex, int]], grid: Optional[int] = None,
                settings: Optional[dict] = None) -> List[RootSystem]:
    """Root systems at several eigenvalues, computed concurrently"""
    workers = DEFAULT_CONFIG['spectrum']['max_workers']
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda item: root_chains(bvp, item[0], item[1], grid, settings), eigenvalues))


def adjugate_eigenfunction(bvp: DiracBVP, eigenvalue: complex, grid: Optional[int] = None,
                           settings: Optional[dict] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenfunction Phi(x) adj(M)[:, j] from the adjugate column of largest norm
    Returns:
        (x_grid, function of shape (points, n)) normalized in L2
    """
    settings = settings or DEFAULT_CONFIG['root_functions']
    x_grid = _grid(grid or settings['grid'])
    propagation = Propagator(bvp).fundamental_matrix(eigenvalue, x_grid)
    adj = adjugate(bvp.C + bvp.D @ propagation.matrices[-1])
    column = adj[:, int(np.argmax(np.linalg.norm(adj, axis=0)))]
    u = propagation.matrices @ column
    norm = l2_norm(u, x_grid)
    return x_grid, (u / norm if norm > 0 else u)


def chain_residual(bvp: DiracBVP, chain: RootChain) -> float:
    """
    Largest relative residual of -i B^{-1} u_p' + Q u_p - lambda u_p - u_{p-1}
    by second-order finite differences on the chain grid
    """
    x = chain.x_grid
    B_inv = 1.0 / np.asarray(bvp.b)
    Q = bvp.potential.at(x)
    worst = 0.0
    previous = np.zeros_like(chain.functions[0])
    for u in chain.functions:
        derivative = np.gradient(u, x, axis=0, edge_order=2)
        residual = -1j * B_inv * derivative + np.einsum('xjk,xk->xj', Q, u) - chain.eigenvalue * u - previous
        size = max(l2_norm(u, x), 1e-300) * (1.0 + abs(chain.eigenvalue))
        worst = max(worst, l2_norm(residual, x) / size)
        previous = u
    return worst


def boundary_residual(bvp: DiracBVP, chain: RootChain) -> float:
    """Largest ||C u_p(0) + D u_p(1)|| relative to max |u_p|"""
    worst = 0.0
    for u in chain.functions:
        size = float(np.max(np.abs(u)))
        if size == 0:
            continue
        worst = max(worst, float(np.linalg.norm(bvp.C @ u[0] + bvp.D @ u[-1])) / size)
    return worst


# ----------------------------------------------------------------------
# Adjoint problem
# ----------------------------------------------------------------------

def adjoint_bvp(bvp: DiracBVP) -> DiracBVP:
    """
    Adjoint problem -i (B*)^{-1} z' + Q* z = lambda z with boundary pair (C_*, D_*)
    Returns:
        DiracBVP whose boundary kernel is {(B* C* h, -B* D* h)} with orthonormal rows
    """
    B_star = np.diag(np.conj(bvp.b))
    generator = np.vstack([B_star @ bvp.C.conj().T, -B_star @ bvp.D.conj().T])
    complement = linalg.null_space(generator.conj().T)
    if complement.shape[1] != bvp.n:
        raise ValidationError(f"adjoint boundary space has dimension {complement.shape[1]}, expected {bvp.n}")
    rows = complement.conj().T
    potential = bvp.potential.map_matrices(lambda Q: Q.conj().T, continuity=bvp.potential.endpoint_continuity.T)
    return DiracBVP(weight=WeightMatrix(np.conj(bvp.b)), potential=potential,
                    boundary=BoundaryPair(rows[:, :bvp.n], rows[:, bvp.n:]))


def _kernel_basis(bvp: DiracBVP) -> np.ndarray:
    return linalg.null_space(bvp.boundary.compound)


def same_boundary_kernel(first: DiracBVP, second: DiracBVP, tol: float = 1e-10) -> bool:
    """Whether ker(C D) coincides for two problems"""
    P1 = _kernel_basis(first)
    P2 = _kernel_basis(second)
    if P1.shape != P2.shape:
        return False
    return float(np.linalg.norm(P1 @ P1.conj().T - P2 @ P2.conj().T, 2)) <= tol


def green_identity_defect(bvp: DiracBVP, adjoint: DiracBVP, samples: int = 20, seed: int = 0) -> float:
    """
    Largest |<B^{-1} f(0), g(0)> - <B^{-1} f(1), g(1)>| over random boundary
    data f of the problem and g of the adjoint, relative to |f| |g|
    """
    rng = np.random.default_rng(seed)
    n = bvp.n
    F = _kernel_basis(bvp)
    G = _kernel_basis(adjoint)
    B_inv = 1.0 / np.asarray(bvp.b)
    worst = 0.0
    for _ in range(samples):
        f = F @ (rng.standard_normal(F.shape[1]) + 1j * rng.standard_normal(F.shape[1]))
        g = G @ (rng.standard_normal(G.shape[1]) + 1j * rng.standard_normal(G.shape[1]))
        left = np.vdot(g[:n], B_inv * f[:n])
        right = np.vdot(g[n:], B_inv * f[n:])
        worst = max(worst, abs(left - right) / (np.linalg.norm(f) * np.linalg.norm(g)))
    return float(worst)


# ----------------------------------------------------------------------
# Diagnostics
# ----------------------------------------------------------------------

def minimality_gram(chains: Sequence[RootSystem], adjoint_chains: Sequence[RootSystem]) -> GramReport:
    """
    Cross-Gram matrix of root functions against adjoint root functions
    Args:
        chains: Root systems of the problem
        adjoint_chains: Root systems of the adjoint at matching positions
    Returns:
        GramReport with the condition number of each diagonal block and the
        largest normalized entry between different eigenvalues
    """
    if len(chains) != len(adjoint_chains):
        raise ValidationError(f"{len(chains)} root systems against {len(adjoint_chains)} adjoint systems")

    def flatten(systems):
        functions, labels = [], []
        for index, system in enumerate(systems):
            for number, chain in enumerate(system.chains):
                for p, u in enumerate(chain.functions):
                    functions.append(u)
                    labels.append((index, number, p))
        return functions, labels

    left, labels = flatten(chains)
    right, right_labels = flatten(adjoint_chains)
    if not left or not right:
        return GramReport(matrix=np.zeros((len(left), len(right)), dtype=complex), labels=labels,
                          block_conditions=[], cross_max=0.0)
    x_grid = chains[0].chains[0].x_grid
    w = _quadrature_weights(x_grid)
    U = np.array(left).reshape(len(left), -1)
    V = np.array(right).reshape(len(right), -1)
    weights = np.repeat(w, left[0].shape[-1])
    gram = (U * weights) @ V.conj().T

    norms = np.sqrt(np.abs(np.einsum('ij,ij->i', U * weights, U.conj())))
    adjoint_norms = np.sqrt(np.abs(np.einsum('ij,ij->i', V * weights, V.conj())))
    scaled = np.abs(gram) / np.maximum(np.outer(norms, adjoint_norms), 1e-300)

    row_owner = np.array([label[0] for label in labels])
    col_owner = np.array([label[0] for label in right_labels])
    cross = row_owner[:, None] != col_owner[None, :]
    cross_max = float(np.max(scaled[cross])) if np.any(cross) else 0.0

    conditions = []
    for index in range(len(chains)):
        block = gram[np.ix_(row_owner == index, col_owner == index)]
        if block.size == 0 or block.shape[0] != block.shape[1]:
            conditions.append(math.inf)
        else:
            conditions.append(float(np.linalg.cond(block)))
    return GramReport(matrix=gram, labels=labels, block_conditions=conditions, cross_max=cross_max)


def random_test_functions(n: int, x_grid: np.ndarray, count: int, seed: int = 0, degree: int = 4) -> np.ndarray:
    """Seeded smooth trigonometric test functions of shape (count, points, n)"""
    rng = np.random.default_rng(seed)
    k = np.arange(degree + 1)
    cos = np.cos(2 * np.pi * np.outer(x_grid, k))
    sin = np.sin(2 * np.pi * np.outer(x_grid, k))
    functions = []
    for _ in range(count):
        a = rng.standard_normal((degree + 1, n)) + 1j * rng.standard_normal((degree + 1, n))
        b = rng.standard_normal((degree + 1, n)) + 1j * rng.standard_normal((degree + 1, n))
        functions.append(cos @ a + sin @ b)
    return np.array(functions)


def reflection_test_functions(witness, x_grid: np.ndarray, count: int, seed: int = 0) -> np.ndarray:
    """
    Test functions orthogonal to every root function of a reflection-symmetric problem
    Args:
        witness: IncompletenessWitness of kind 'reflection_symmetry'
        x_grid: Symmetric uniform grid
        count: Number of functions
        seed: Random seed for the profile vectors
    Returns:
        Array (count, points, n) with f = 0 on [eps, 1 - eps] and f(1 - x) = -A* f(x) near 0
    """
    if witness is None or witness.kind != 'reflection_symmetry':
        raise ValidationError("reflection test functions need a reflection_symmetry witness")
    rng = np.random.default_rng(seed)
    A_star = np.asarray(witness.A).conj().T
    n = A_star.shape[0]
    eps = float(witness.epsilon)
    bump = np.where(x_grid < eps, np.sin(np.pi * x_grid / eps) ** 2, 0.0)
    functions = []
    for _ in range(count):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        f = bump[:, None] * v[None, :]
        # Mirror image supported near x = 1
        f = f - (A_star @ (bump[::-1, None] * v[None, :]).T).T
        functions.append(f)
    return np.array(functions)


def defect_probe(bvp: DiracBVP, region, n_test: int = 8, test_functions: Optional[np.ndarray] = None,
                 grid: Optional[int] = None, seed: Optional[int] = None,
                 settings: Optional[dict] = None) -> DefectReport:
    """
    Project test functions onto the span of the root functions found in a region
    Args:
        bvp: Valid problem
        region: Rectangle searched for eigenvalues
        n_test: Number of random test functions when none are supplied
        test_functions: Array (count, points, n) on the chain grid
        grid: Cells of the chain grid
        seed: Seed of the random test functions
        settings: Overrides for ROOT_FUNCTIONS_CONFIG
    Returns:
        DefectReport with relative residual norms (heuristic evidence only)
    """
    settings = settings or DEFAULT_CONFIG['root_functions']
    cells = grid or settings['grid']
    x_grid = _grid(cells)
    if test_functions is None:
        seed = settings['probe_seed'] if seed is None else seed
        test_functions = random_test_functions(bvp.n, x_grid, n_test, seed, settings['probe_degree'])
    test_functions = np.asarray(test_functions, dtype=complex)
    if test_functions.shape[1:] != (len(x_grid), bvp.n):
        raise ValidationError(f"test functions must have shape (count, {len(x_grid)}, {bvp.n})")

    spectrum = locate_eigenvalues(bvp, region)
    systems = root_system(bvp, spectrum.eigenvalues, cells, settings)
    root_functions = [u for system in systems for chain in system.chains for u in chain.functions]

    sqrt_w = np.repeat(np.sqrt(_quadrature_weights(x_grid)), bvp.n)
    residuals = []
    if root_functions:
        A = np.array(root_functions).reshape(len(root_functions), -1).T * sqrt_w[:, None]
        Q, R, _ = linalg.qr(A, mode='economic', pivoting=True)
        diag = np.abs(np.diag(R))
        rank = int(np.sum(diag > settings['rank_threshold'] * diag[0])) if diag.size and diag[0] > 0 else 0
        Q = Q[:, :rank]
    else:
        Q = np.zeros((len(sqrt_w), 0), dtype=complex)

    for f in test_functions:
        vector = f.reshape(-1) * sqrt_w
        size = np.linalg.norm(vector)
        if size == 0:
            residuals.append(0.0)
            continue
        residual = vector - Q @ (Q.conj().T @ vector)
        residuals.append(float(np.linalg.norm(residual) / size))

    return DefectReport(region=region.to_list(), eigenvalue_count=len(spectrum.eigenvalues),
                        function_count=len(root_functions), residuals=residuals)
