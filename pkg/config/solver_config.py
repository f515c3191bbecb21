"""
Solver Configuration for the Dirac-type Spectral Toolkit
This file contains all the numeric tolerances and worker settings
"""

import math

# System Model Settings
SYSTEM_CONFIG = {
    'rank_tol': 1e-10,  # Relative threshold for the rank of (C D)
    'im_tol': 1e-12,  # Imaginary part below this counts as real weight
    'near_equal_warning': 1e-8,  # Warn when distinct weights are this close
}

# Sector Geometry Settings
SECTOR_CONFIG = {
    'angle_tol': 1e-12,  # Line angles closer than this are merged
    'sign_tol': 1e-14,  # |Re(i b z)| below this means "on a line"
}

# Propagator Settings
PROPAGATOR_CONFIG = {
    'base_steps': 16,  # Steps per unit interval at lambda = 0
    'max_steps': 200000,  # Hard cap on Magnus steps per propagation
    'lambda_scaling': True,  # Grow steps with 1 + |lambda| max|b| / pi
    'cache_size': 4096,  # Cached characteristic matrices per propagator
    'liouville_tol': 1e-8,  # Relative Liouville defect that triggers a warning
    'gauge_cells': 4096,  # Grid cells of the gauge-normalized potential
}

# Classifier Settings
CLASSIFIER_CONFIG = {
    'det_tol': 1e-10,  # |det T| > det_tol * prod(column norms) counts as nonzero
    'triangle_margin': 1e-9,  # Barycentric margin for "strictly inside"
    'symmetry_tol': 1e-9,  # Entrywise tolerance for reflection identities
    'symmetry_min_cells': 3,  # Minimum grid cells for an endpoint sub-interval
    'normality_tol': 1e-10,  # Relative tolerance for C B C* = D B D*
    'degeneracy_probes': 5,  # Probe points for detecting Delta == 0
    'degeneracy_tol': 1e-10,  # |Delta| / Hadamard bound below this is zero
    'growth_ladder': (10.0, 20.0, 40.0, 80.0),  # Ray points for the growth test
    'growth_exponent_limit': 6.0,  # Largest polynomial loss accepted on the ray
}

# Spectrum Settings
SPECTRUM_CONFIG = {
    'tol': 1e-10,  # Root refinement step tolerance
    'edge_nodes': 32,  # Initial phase samples per rectangle edge
    'max_phase_step': math.pi / 4,  # Largest accepted arg increment between samples
    'max_bisection_depth': 40,  # Edge bisection depth before giving up
    'boundary_rel_tol': 1e-12,  # |Delta| / Hadamard bound that flags a boundary zero
    'dilation': 1e-3,  # Relative region growth on boundary zeros
    'max_dilations': 5,  # Retries before a boundary zero is fatal
    'moment_nodes': 64,  # Gauss-Legendre nodes per edge for contour moments
    'moment_tol': 1e-3,  # |s0 - count| accepted for trusted moments
    'min_cell': 1e-8,  # Smallest cell diameter before clusters are merged
    'cluster_spread': 1e-6,  # Relative spread below which zeros form one cluster
    'derivative_step': 1e-5,  # Central difference step, scaled by 1 + |lambda|
    'max_iterations': 60,  # Muller iterations per root
    'max_workers': 4,  # Thread pool size for cells and chains
}

# Root Function Settings
ROOT_FUNCTIONS_CONFIG = {
    'grid': 1000,  # Cells of the output grid
    'derivative_radius': 0.05,  # Cauchy circle radius, divided by max|b|
    'rank_threshold': 1e-8,  # Relative singular value treated as zero
    'probe_seed': 0,  # Seed for random test functions
    'probe_degree': 4,  # Trigonometric degree of random test functions
}

# Resolvent Settings
RESOLVENT_CONFIG = {
    'grid': 1024,  # Cells for quadrature of kernels and traces
    'condition_limit': 1e12,  # cond(C + D Phi(1)) above this is near-spectrum
    'svalue_count': 64,  # Leading s-values computed iteratively
    'dense_limit': 1024,  # Use a dense SVD up to this matrix size
    'fit_window': (5, 20),  # k-window for series limit estimates
}

# Timoshenko Beam Settings
TIMOSHENKO_CONFIG = {
    'nu_tol': 1e-8,  # Allowed relative deviation of EI rho / (K I_rho)
    't_cells': None,  # Cells of the resampled t-grid (None = beam grid)
    'equality_tol': 1e-12,  # Relative tolerance for alpha_j = +-h_j(l)
}

# Performance Monitoring
MONITORING_CONFIG = {
    'enable_performance_logging': False,
    'log_level': 'WARNING',
}

# Production vs Development Settings
def get_production_config():
    """Get tighter settings for production runs"""
    config = {
        'system': SYSTEM_CONFIG.copy(),
        'sector': SECTOR_CONFIG.copy(),
        'propagator': PROPAGATOR_CONFIG.copy(),
        'classifier': CLASSIFIER_CONFIG.copy(),
        'spectrum': SPECTRUM_CONFIG.copy(),
        'root_functions': ROOT_FUNCTIONS_CONFIG.copy(),
        'resolvent': RESOLVENT_CONFIG.copy(),
        'timoshenko': TIMOSHENKO_CONFIG.copy(),
        'monitoring': MONITORING_CONFIG.copy(),
    }

    # Production accuracy
    config['propagator']['base_steps'] = 32
    config['spectrum']['edge_nodes'] = 64
    config['spectrum']['moment_nodes'] = 96
    config['root_functions']['grid'] = 2000
    config['resolvent']['grid'] = 2048

    return config

def get_development_config():
    """Get settings optimized for development/testing"""
    config = {
        'system': SYSTEM_CONFIG.copy(),
        'sector': SECTOR_CONFIG.copy(),
        'propagator': PROPAGATOR_CONFIG.copy(),
        'classifier': CLASSIFIER_CONFIG.copy(),
        'spectrum': SPECTRUM_CONFIG.copy(),
        'root_functions': ROOT_FUNCTIONS_CONFIG.copy(),
        'resolvent': RESOLVENT_CONFIG.copy(),
        'timoshenko': TIMOSHENKO_CONFIG.copy(),
        'monitoring': MONITORING_CONFIG.copy(),
    }

    # Development speed (prioritize turnaround over accuracy)
    config['spectrum']['tol'] = 1e-8
    config['root_functions']['grid'] = 400
    config['resolvent']['grid'] = 512
    config['monitoring']['enable_performance_logging'] = True
    config['monitoring']['log_level'] = 'INFO'

    return config

# Default configuration (balanced)
DEFAULT_CONFIG = {
    'system': SYSTEM_CONFIG,
    'sector': SECTOR_CONFIG,
    'propagator': PROPAGATOR_CONFIG,
    'classifier': CLASSIFIER_CONFIG,
    'spectrum': SPECTRUM_CONFIG,
    'root_functions': ROOT_FUNCTIONS_CONFIG,
    'resolvent': RESOLVENT_CONFIG,
    'timoshenko': TIMOSHENKO_CONFIG,
    'monitoring': MONITORING_CONFIG,
}

def get_config(profile: str = 'default') -> dict:
    """Resolve a named profile to a configuration dictionary"""
    if profile == 'production':
        return get_production_config()
    if profile == 'development':
        return get_development_config()
    if profile == 'default':
        return DEFAULT_CONFIG
    raise ValueError(f"Unknown configuration profile: {profile}")
