"""Replica-symmetric envelopes Phi_L <= Phi <= Phi_U and their classical limit.

With X(z, q) = beta * sqrt(q z^2 + b^2),

    Phi_L = E log 2cosh X + beta^2/4 [(1-q)^2 - (1 - (1 - e^-u)/u)]
    Phi_U = E log 2cosh X + beta^2/4 [(1-q)^2 + 2q (1 - tanh(beta b)/(beta b))]

where u = 2 beta b tanh(beta b).  Both reduce to the SK replica-symmetric
functional at b = 0.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import _special as sp
from ._optimize import grid_golden_minimize
from .errors import ConfigurationError, ConvergenceError, EvaluationError
from .quadrature import DEFAULT_ORDER, GAUSS_SPAN, _check_order, _sinh_nodes

BOUND_KINDS = ("rs_lower", "rs_upper", "rsb_lower", "rsb_upper")


@dataclass(frozen=True)
class Couplings:
    """Inverse temperature ``beta`` and transverse field ``b``."""

    beta: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.beta) and 0 < self.beta <= 100):
            raise ConfigurationError(f"beta must be in (0, 100], got {self.beta}")
        if not (math.isfinite(self.b) and 0 <= self.b <= 100):
            raise ConfigurationError(f"b must be in [0, 100], got {self.b}")


@dataclass(frozen=True)
class RSPoint:
    q: float

    def __post_init__(self):
        if not (math.isfinite(self.q) and 0 <= self.q <= 1):
            raise ConfigurationError(f"q must be in [0, 1], got {self.q}")


@dataclass(frozen=True)
class BoundValue:
    """A bound evaluated at quadrature order ``quad_order``.

    ``convergence_gap`` is |value(order) - value(order // 2)|.
    """

    value: float
    kind: str
    quad_order: int
    convergence_gap: float

    def __post_init__(self):
        if self.kind not in BOUND_KINDS:
            raise ConfigurationError(f"unknown bound kind {self.kind!r}")
        if not self.convergence_gap >= 0:
            raise ConfigurationError("convergence_gap must be non-negative")

    def __float__(self):
        return self.value


def check_bound_order(order):
    order = _check_order(order)
    if order < 2:
        raise ConfigurationError("bounds need quadrature order >= 2 to estimate convergence")
    return order


def _finite(value, what):
    if not np.all(np.isfinite(value)):
        raise EvaluationError(f"{what} evaluated to a non-finite value")
    return value


def expect_log2cosh(beta, b, q, order):
    """E log 2cosh(beta*sqrt(q z^2 + b^2)), vectorized over ``q``.

    The integrand bends at z = 0 on the scale strip/sqrt(q), so the sinh rule
    is centred there with that width.
    """
    q = np.asarray(q, dtype=float)
    strip = sp.logcosh_strip(beta, b)
    with np.errstate(divide="ignore"):
        width = np.where(q > 0, np.minimum(1.0, strip / np.sqrt(q)), 1.0)
    z, w = _sinh_nodes(order, np.zeros_like(q), width, -GAUSS_SPAN, GAUSS_SPAN)
    vals = sp.log2cosh(beta * np.sqrt(q[..., None] * z * z + b * b))
    return _finite(np.sum(w * vals, axis=-1), "E log 2cosh X")


def _phi(beta, b, q, which, order):
    q = np.asarray(q, dtype=float)
    e = expect_log2cosh(beta, b, q, order)
    if which == "rs_lower":
        corr = (1.0 - q) ** 2 - sp.lower_correction(beta, b)
    elif which == "rs_upper":
        corr = (1.0 - q) ** 2 + 2.0 * q * sp.upper_correction(beta, b)
    else:
        raise ConfigurationError(f"RS bound kind must be rs_lower or rs_upper, got {which!r}")
    return _finite(e + 0.25 * beta * beta * corr, which)


def _bound(which, c, q, order):
    order = check_bound_order(order)
    hi = float(_phi(c.beta, c.b, q, which, order))
    lo = float(_phi(c.beta, c.b, q, which, order // 2))
    return BoundValue(hi, which, order, abs(hi - lo))


def phi_lower(c, p, order=DEFAULT_ORDER):
    """Lower envelope Phi_L(beta, b, q)."""
    return _bound("rs_lower", c, p.q, order)


def phi_upper(c, p, order=DEFAULT_ORDER):
    """Upper envelope Phi_U(beta, b, q)."""
    return _bound("rs_upper", c, p.q, order)


def minimize_rs(c, which="rs_upper", order=DEFAULT_ORDER):
    """Global minimum over q in [0, 1] of Phi_L or Phi_U.

    1001-point grid scan, then golden section around each grid-local minimum.
    Returns ``(RSPoint, BoundValue)``.
    """
    order = check_bound_order(order)
    q_star, _ = grid_golden_minimize(
        lambda q: float(_phi(c.beta, c.b, q, which, order)),
        lambda qs: _phi(c.beta, c.b, qs, which, order),
    )
    q_star = min(max(q_star, 0.0), 1.0)
    return RSPoint(q_star), _bound(which, c, q_star, order)


def sk_rs_value(beta, q, order=DEFAULT_ORDER):
    """Classical SK replica-symmetric functional E log 2cosh(beta sqrt(q) z) + beta^2/4 (1-q)^2."""
    e = float(expect_log2cosh(beta, 0.0, q, _check_order(order)))
    return e + 0.25 * beta * beta * (1.0 - q) ** 2


def _expect_sk(func, beta, q, order):
    # E func(beta sqrt(q) z) on the rule used for the classical integrands.
    width = min(1.0, sp.logcosh_strip(beta, 0.0) / math.sqrt(q))
    z, w = _sinh_nodes(order, 0.0, width, -GAUSS_SPAN, GAUSS_SPAN)
    return float(np.sum(w * func(beta * math.sqrt(q) * z)))


def _tanh2(x):
    return np.tanh(x) ** 2


def sk_fixed_point(beta, order=DEFAULT_ORDER, damping=0.5, tol=1e-12, max_iter=100_000):
    """Largest solution of q = E tanh^2(beta sqrt(q) z) on [0, 1].

    Damped iteration from q = 1.  For beta <= 1 zero is returned directly:
    tanh^2 x < x^2 gives E tanh^2(beta sqrt(q) z) < beta^2 q <= q for q > 0,
    and the iteration would approach 0 only algebraically.
    """
    order = _check_order(order)
    if not beta > 0:
        raise ConfigurationError(f"beta must be positive, got {beta}")
    if beta <= 1.0:
        return 0.0
    q = 1.0
    for _ in range(max_iter):
        q_new = (1.0 - damping) * q + damping * _expect_sk(_tanh2, beta, q, order)
        if q_new < 1e-10:
            return 0.0
        if abs(q_new - q) < tol:
            return q_new
        q = q_new
    raise ConvergenceError(f"fixed-point iteration did not converge for beta={beta}")


def _sech4(x):
    e = np.exp(-2.0 * np.abs(x))
    return 16.0 * e * e / (1.0 + e) ** 4


def at_criterion(beta, q, order=DEFAULT_ORDER):
    """beta^2 E sech^4(beta sqrt(q) z); at most 1 on the stable side of the AT line."""
    order = _check_order(order)
    if q == 0:
        return beta * beta
    return beta * beta * _expect_sk(_sech4, beta, q, order)
