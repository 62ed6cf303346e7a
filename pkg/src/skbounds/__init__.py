"""Rigorous RS and 1RSB free-energy envelopes for the transverse-field SK model."""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    EvaluationError,
    SkBoundsError,
)
from .quadrature import GaussianRule, HermiteRule, SinhRule, build_rule, expect1, expect2, sinh_rule
from .falk_bruch import FBConstants, f_of, nonexact_condition
from .rs_bound import (
    BoundValue,
    Couplings,
    RSPoint,
    at_criterion,
    minimize_rs,
    phi_lower,
    phi_upper,
    sk_fixed_point,
    sk_rs_value,
)
from .rsb_bound import RSBPoint, minimize_rsb, psi_inner, psi_lower, psi_upper
from .instability import (
    REFERENCE_POINTS,
    ThetaRecord,
    min_theta_over_q,
    scan_region,
    theta,
    theta_record,
    verify_paper_points,
)
from .ed_oracle import (
    DisorderEstimate,
    SpinSystem,
    build_hamiltonian,
    draw_system,
    log_partition,
    phi_n_estimate,
    z2_check,
)
