"""Damped Benjamin-Ono equation on the torus in Birkhoff coordinates.

The package evolves the damped flow through explicit formulas for the
differential of the Birkhoff map, checks it against a pseudospectral
solver of the PDE, and measures the conservation laws and Lyapunov
functionals that control the long-time behaviour.
"""

from .core import (
    Actions,
    BirkhoffState,
    ConfigError,
    FourierFunction,
    InvalidInputError,
    RunConfig,
    fourier_from_samples,
    l2_norm_sq,
    one_gap_potential,
    samples_from_fourier,
    sobolev_norm_sq,
)
from .spectral import (
    SpectralParams,
    a_star_from_params,
    kappa_from_gamma,
    lambda_from_gamma,
    m_entry,
    mu_from_gamma,
    spectral_params,
)
from .birkhoff import (
    LaxSpectrum,
    TruncationError,
    birkhoff_forward,
    build_lax_matrix,
    gamma_from_lambda,
)
from .vector_field import (
    FieldWorkspace,
    b_perp,
    build_workspace,
    c_plus_minus,
    delta_kappa,
    dgamma_dt,
    dzeta_cos,
    dzeta_sin,
    frequencies,
    mode_one_projection,
    vector_field,
    vector_field_gauge,
)
from .integrator import DivergenceError, StiffnessError, Trajectory, evolve, step
from .pde import cross_validate, pde_evolve, pde_rhs
from .diagnostics import (
    DiagnosticReport,
    gap_product_integral,
    generating_function,
    lasalle_check,
    limiting_actions,
    lyapunov_residual,
    ps_derivative,
    ps_derivative_residual,
    ps_functional,
    trace_identities,
)

__version__ = "0.1.0"
