"""Invariant sets of hyperbolic-part toral automorphisms with prescribed entropy.

Exact integer spectral analysis, an epsilon-Jordan change of basis, lattice
cell counting in the unstable chart, a parameter solver that emits
certificates, and brute-force oracles that check them.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AmbiguousGrouping, BudgetExceeded, DegenerateProjection, DegreeTooLarge, HypothesisViolated,
    IllConditioned, NoConvergence, NotAutomorphism, PreconditionViolated, SearchExhausted,
    TargetsOutOfRange, ToralError,
)
from .exact_matrix import IntegerMatrix, IntPolynomial, char_poly, determinant, is_irreducible  # noqa: E402
from .spectral import SpectralData, poly_roots, spectral_data, top_entropy  # noqa: E402
from .eps_jordan import EpsJordanForm, eps_jordan, sandwich_check  # noqa: E402
from .cell_geometry import (  # noqa: E402
    UnstableChart, cell_count_bounds, iterated_bounds, omega_k, psi_k, psi_limit, unstable_chart,
)
from .solver import EntropyCertificate, SolverOptions, replay, solve_params  # noqa: E402
from .oracle import (  # noqa: E402
    brute_force_cell_count, component_bounds, matrix_component_bounds, separated_set_entropy,
    verify_cellcover,
)
