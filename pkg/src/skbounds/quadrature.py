"""Quadrature rules for expectations over standard Gaussian variables.

Two families of rules are provided. Both store nodes and weights such that
``sum(w * f(x))`` approximates ``E f(z)`` for ``z ~ N(0, 1)``; the Gaussian
density is already folded into the weights.

* :func:`build_rule` gives the classical Gauss-Hermite rule for the
  probabilists' weight ``exp(-z^2/2)``, computed by the Golub-Welsch
  eigen-decomposition of the Hermite recurrence.  Exact on polynomials up to
  degree ``2*order - 1``.

* :func:`sinh_rule` gives a trapezoid rule in the variable ``t`` with
  ``z = center + width*sinh(t)``.  It clusters nodes around ``center`` on
  the scale ``width`` and converges geometrically for integrands that are
  analytic in a thin strip around the real axis, e.g. ``log 2cosh(beta*z)`` at
  large ``beta``, where Gauss-Hermite converges only like ``exp(-c*sqrt(n))``.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import ConfigurationError, EvaluationError

MAX_ORDER = 512
DEFAULT_ORDER = 64
# |z| beyond which the standard normal density (< 1e-22) is negligible.
GAUSS_SPAN = 10.0


@dataclass(frozen=True, eq=False)
class GaussianRule:
    """Nodes and probability weights approximating a standard normal."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        for arr in (self.nodes, self.weights):
            arr.setflags(write=False)


@dataclass(frozen=True, eq=False)
class HermiteRule(GaussianRule):
    """Gauss-Hermite rule for the standard normal weight."""


@dataclass(frozen=True, eq=False)
class SinhRule(GaussianRule):
    """sinh-mapped trapezoid rule clustered at ``center`` on scale ``width``."""

    center: float = 0.0
    width: float = 1.0


def _check_order(order):
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise ConfigurationError(f"quadrature order must be an integer, got {order!r}")
    if not 1 <= order <= MAX_ORDER:
        raise ConfigurationError(f"quadrature order must be in [1, {MAX_ORDER}], got {order}")
    return int(order)


def _christoffel_weights(x, n):
    # Normalized recurrence p_{k+1} = (x p_k - sqrt(k) p_{k-1}) / sqrt(k+1)
    # with p_k = He_k / sqrt(k!); w_i = 1 / sum_k p_k(x_i)^2.  Values are
    # rescaled on the fly because p_k(x_max) overflows for n of a few hundred.
    p_prev = np.zeros_like(x)
    p_cur = np.ones_like(x)
    total = np.ones_like(x)
    log_scale = np.zeros_like(x)
    for k in range(n - 1):
        p_next = (x * p_cur - math.sqrt(k) * p_prev) / math.sqrt(k + 1)
        p_prev, p_cur = p_cur, p_next
        total += p_cur * p_cur
        big = np.abs(p_cur) > 1e100
        if big.any():
            p_prev[big] *= 1e-100
            p_cur[big] *= 1e-100
            total[big] *= 1e-200
            log_scale[big] += 100.0 * math.log(10.0)
    return np.exp(-(np.log(total) + 2.0 * log_scale))


def build_rule(order):
    """Gauss-Hermite rule with ``order`` nodes for E over z ~ N(0, 1).

    Nodes come from the eigenvalues of the Jacobi matrix (zero diagonal,
    off-diagonal sqrt(k)); weights from the Christoffel function, which keeps
    the smallest weights accurate where eigenvector components would not.
    At large orders the outermost weights underflow to zero.
    """
    n = _check_order(order)
    if n == 1:
        return HermiteRule(1, np.zeros(1), np.ones(1))
    off = np.sqrt(np.arange(1, n, dtype=float))
    x = eigh_tridiagonal(np.zeros(n), off, eigvals_only=True)
    x = np.sort(x)
    x = 0.5 * (x - x[::-1])
    if n % 2:
        x[n // 2] = 0.0
    w = _christoffel_weights(x, n)
    w = 0.5 * (w + w[::-1])
    w /= w.sum()
    return HermiteRule(n, x, w)


def _sinh_nodes(order, center, width, lo, hi):
    """Nodes/weights of the sinh-mapped midpoint rule, broadcast over
    ``center`` (one row per center).  Weights are normalized per row."""
    center = np.asarray(center, dtype=float)[..., None]
    width = np.asarray(width, dtype=float)[..., None]
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    t_lo = np.arcsinh((lo - center) / width)
    t_hi = np.arcsinh((hi - center) / width)
    h = (t_hi - t_lo) / order
    t = t_lo + h * (np.arange(order) + 0.5)
    z = center + width * np.sinh(t)
    w = width * np.cosh(t) * np.exp(-0.5 * z * z)
    w = w / w.sum(axis=-1, keepdims=True)
    return z, w


def sinh_rule(order, center=0.0, width=1.0, span=GAUSS_SPAN):
    """Gaussian-expectation rule clustered around ``center``.

    The rule covers ``z`` in [-span, span]; ``width`` should match the
    distance to the integrand's nearest complex singularity (capped at 1, the
    natural scale of the Gaussian itself).
    """
    n = _check_order(order)
    if not width > 0:
        raise ConfigurationError(f"width must be positive, got {width}")
    if not -span < center < span:
        raise ConfigurationError(f"center {center} must lie inside the span")
    z, w = _sinh_nodes(n, [center], [width], [-span], [span])
    return SinhRule(n, z[0], w[0], float(center), float(width))


def _check_finite(values, nodes):
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.unravel_index(np.argmax(bad), bad.shape)
        node = tuple(float(a[idx]) for a in nodes) if len(nodes) > 1 else float(nodes[0][idx])
        raise EvaluationError(f"integrand is not finite at node {node}", node=node)


def expect1(f, rule):
    """E f(z) for z ~ N(0, 1); ``f`` is called once on the node array."""
    x = rule.nodes
    values = np.broadcast_to(np.asarray(f(x), dtype=float), x.shape)
    _check_finite(values, (x,))
    return float(np.dot(rule.weights, values))


def expect2(f, rule):
    """E f(z, z1) for independent standard normals (tensor-product rule)."""
    z, z1 = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    values = np.broadcast_to(np.asarray(f(z, z1), dtype=float), z.shape)
    _check_finite(values, (z, z1))
    w = rule.weights
    return float(w @ values @ w)


__all__ = [
    "DEFAULT_ORDER",
    "GAUSS_SPAN",
    "MAX_ORDER",
    "GaussianRule",
    "HermiteRule",
    "SinhRule",
    "build_rule",
    "expect1",
    "expect2",
    "sinh_rule",
]
