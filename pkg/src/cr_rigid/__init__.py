"""Numerical sphericity tests for rigid hypersurfaces ``u = F(z, zbar)`` in C^2."""
from .elliptic import (
    EllipticProblem,
    FirstOrderSystemSolver,
    GridField,
    GridSpec,
    build_problem,
    manufactured_study,
    reconstruct_F_from_f,
    reconstruct_levi_from_mu,
    reim_consistency,
    solve_first_order_system,
    symbol_determinant_first_order,
    symbol_determinant_third_order,
)
from .es_family import ESParams, derive, es_surface, solve_cubic_real_roots
from .exceptions import (
    CRRigidError,
    DomainError,
    GridError,
    ImplicitSolveError,
    JetError,
    LeviDegenerateError,
    RealizationError,
    SpecError,
)
from .jets import (
    UnivariateJet,
    WirtingerJet,
    antiderivative_z_realify,
    antiderivative_zbar_realify,
    d_z,
    d_zbar,
    implicit_jet_solve,
)
from .sphericity import (
    CoeffQuadruple,
    HolomorphicQuadrupleRegressor,
    extract_coeffs_pointwise,
    fit_holomorphic_models,
    mu_jet,
    residual_consistency,
    residual_mu,
    sphericity_report,
)
from .surfaces import (
    Disc,
    HeisenbergSurface,
    ImplicitSurface,
    MappedSurface,
    PolynomialSurface,
    RigidMap,
    SinQuadricSurface,
    apply_rigid_map,
    surface_from_spec,
    surface_jet,
)

__version__ = "0.1.0"
