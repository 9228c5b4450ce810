"""Pseudospectral Galerkin solver for fractional thin-film equations.

The equation du/dt = div(f(u) grad (-Laplacian)^s u) with Neumann conditions
is discretized in the cosine eigenbasis of the Neumann Laplacian on a box.
The package provides the spectral calculus, the regularized mobilities and
entropies, an adaptive IMEX integrator with monitored conservation and
dissipation identities, free-boundary diagnostics, and numeric oracles for
the interpolation and iteration lemmas that underpin finite propagation
speed and waiting-time bounds.
"""

from .diagnostics import (
    CutoffFunction,
    SupportSeries,
    build_cutoff,
    detect_waiting_time,
    fit_propagation_exponent,
    flatness_density,
    leibniz_remainder,
    local_entropy_report,
    support_radius,
    tail_estimate_check,
)
from .inequalities import (
    DecreasingSampler,
    LemmaReport,
    gn_ratio,
    stampacchia_classic,
    stampacchia_geometric,
    stampacchia_inhomogeneous,
)
from .initial import InitialConditionSpec, build_initial
from .mobility import (
    LiftParams,
    MobilityParams,
    default_alpha,
    default_lift,
    entropy_G0,
    entropy_integral,
    entropy_reg,
    lift_initial_datum,
    mobility,
    mobility_prime,
)
from .solver import (
    BlowUpError,
    RunRecord,
    SolverConfig,
    SolverState,
    StiffnessError,
    rhs,
    run,
    step,
    verify_identities,
)
from .spectral import (
    DomainGeometry,
    EigenBasis,
    GridField,
    SpectralField,
    build_basis,
    frac_laplacian,
    gradient,
    inner_product,
    seminorm,
    to_coefficients,
    to_grid,
)

__version__ = "0.1.0"
