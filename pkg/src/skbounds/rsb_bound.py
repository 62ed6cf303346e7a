"""One-step RSB envelopes Psi_L <= Psi <= Psi_U.

With Y(z, z1) = beta * sqrt((sqrt(q1) z + sqrt(q2 - q1) z1)^2 + b^2),

    Psi_{L,U} = (1/m) E log E_1 [2cosh Y]^m
                + beta^2/4 [m (q1^2 - q2^2) + (1 - q2)^2 + corr_{L,U}]

with the same corrections as the RS envelopes (corr_U scaled by q2).  At
q1 = q2 = q they coincide with Phi_L/Phi_U for every m.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from . import _special as sp
from .errors import ConfigurationError, EvaluationError
from .quadrature import DEFAULT_ORDER, GAUSS_SPAN, _check_order, _sinh_nodes
from .rs_bound import BoundValue, check_bound_order, minimize_rs

M_LIMIT = 1e-6
# Inner-rule width in units of strip / sqrt(q2 - q1); tuned on the
# beta = 10 reference point for 1e-10 agreement at order 64.
INNER_WIDTH_FACTOR = 3.0
_CHUNK = 64


@dataclass(frozen=True)
class RSBPoint:
    """Parisi weight ``m`` and overlaps ``q1 <= q2``."""

    m: float
    q1: float
    q2: float

    def __post_init__(self):
        for name in ("m", "q1", "q2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0 <= v <= 1):
                raise ConfigurationError(f"{name} must be in [0, 1], got {v}")
        if self.q1 > self.q2:
            raise ConfigurationError(f"need q1 <= q2, got q1={self.q1}, q2={self.q2}")

    @classmethod
    def from_box(cls, m, t1, t2):
        """Map (m, t1, t2) in [0, 1]^3 to (m, t1, t1 + t2 (1 - t1))."""
        m, t1, t2 = (min(max(float(v), 0.0), 1.0) for v in (m, t1, t2))
        return cls(m, t1, min(t1 + t2 * (1.0 - t1), 1.0))


def _inner(beta, b, m, q1, q2, z, order):
    """(1/m) log E_1 [2cosh Y]^m for arrays m, q1, q2 of shape (P,) and z of
    shape (P, K); returns shape (P, K)."""
    s = np.sqrt(q2 - q1)[:, None]
    mm = m[:, None]
    c = np.sqrt(q1)[:, None] * z
    x_rs = sp.log2cosh(beta * np.sqrt(c * c + b * b))
    if not np.any(s > 0):
        return x_rs
    strip = sp.logcosh_strip(beta, b)
    s_safe = np.where(s > 0, s, 1.0)
    span = GAUSS_SPAN + mm * beta * s
    center = np.clip(-c / s_safe, -span, span)
    width = np.broadcast_to(np.minimum(1.0, INNER_WIDTH_FACTOR * strip / s_safe), c.shape)
    z1, w1 = _sinh_nodes(order, center, width, np.broadcast_to(-span, c.shape),
                         np.broadcast_to(span, c.shape))
    lc = sp.log2cosh(beta * np.sqrt((c[..., None] + s[..., None] * z1) ** 2 + b * b))
    small = mm < M_LIMIT
    m_safe = np.where(small, 1.0, mm)
    tilted = logsumexp(m_safe[..., None] * lc, b=w1, axis=-1)
    # below M_LIMIT: cumulant expansion E L + (m/2) Var L, exact at m = 0
    mean = np.sum(w1 * lc, axis=-1)
    var = np.sum(w1 * (lc - mean[..., None]) ** 2, axis=-1)
    value = np.where(small, mean + 0.5 * mm * var, tilted / m_safe)
    return np.where(s > 0, value, x_rs)


def _outer_rule(beta, b, q1, q2, order):
    strip = sp.logcosh_strip(beta, b)
    scale = np.sqrt(strip * strip + (q2 - q1))
    with np.errstate(divide="ignore"):
        width = np.where(q1 > 0, np.minimum(1.0, scale / np.sqrt(q1)), 1.0)
    return _sinh_nodes(order, np.zeros_like(q1), width, -GAUSS_SPAN, GAUSS_SPAN)


def _psi(beta, b, m, q1, q2, which, order):
    m, q1, q2 = np.broadcast_arrays(*(np.atleast_1d(np.asarray(v, dtype=float)) for v in (m, q1, q2)))
    out = np.empty(m.shape)
    for lo in range(0, m.size, _CHUNK):
        sl = slice(lo, lo + _CHUNK)
        z, w = _outer_rule(beta, b, q1[sl], q2[sl], order)
        out[sl] = np.sum(w * _inner(beta, b, m[sl], q1[sl], q2[sl], z, order), axis=-1)
    if which == "rsb_lower":
        corr = -sp.lower_correction(beta, b)
    elif which == "rsb_upper":
        corr = 2.0 * q2 * sp.upper_correction(beta, b)
    else:
        raise ConfigurationError(f"1RSB bound kind must be rsb_lower or rsb_upper, got {which!r}")
    out += 0.25 * beta * beta * (m * (q1 * q1 - q2 * q2) + (1.0 - q2) ** 2 + corr)
    if not np.all(np.isfinite(out)):
        raise EvaluationError(f"{which} evaluated to a non-finite value")
    return out


def psi_inner(c, p, z, order=DEFAULT_ORDER):
    """(1/m) log E_1 [2cosh Y(z, z1)]^m at a fixed outer variable ``z``.

    For m below 1e-6 the two-term cumulant expansion E_1 L + (m/2) Var_1 L
    with L = log 2cosh Y is used; at m = 0 this is the limit E_1 L.
    """
    order = _check_order(order)
    m, q1, q2 = (np.array([float(v)]) for v in (p.m, p.q1, p.q2))
    val = _inner(c.beta, c.b, m, q1, q2, np.array([[float(z)]]), order)
    return float(val[0, 0])


def _bound(which, c, p, order):
    order = check_bound_order(order)
    hi = float(_psi(c.beta, c.b, p.m, p.q1, p.q2, which, order)[0])
    lo = float(_psi(c.beta, c.b, p.m, p.q1, p.q2, which, order // 2)[0])
    return BoundValue(hi, which, order, abs(hi - lo))


def psi_lower(c, p, order=DEFAULT_ORDER):
    """Lower envelope Psi_L(beta, b, m, q1, q2)."""
    return _bound("rsb_lower", c, p, order)


def psi_upper(c, p, order=DEFAULT_ORDER):
    """Upper envelope Psi_U(beta, b, m, q1, q2)."""
    return _bound("rsb_upper", c, p, order)


def minimize_rsb(c, order=DEFAULT_ORDER, which="rsb_upper", grid=11, starts=5,
                 xatol=1e-6, maxiter=2000):
    """Approximately minimize Psi_U (or Psi_L) over m, q1 <= q2.

    The box (m, t1, t2) in [0, 1]^3 with q1 = t1, q2 = t1 + t2 (1 - t1) is
    scanned on a ``grid``^3 lattice and Nelder-Mead is run from the best
    ``starts`` cells.  The best point on the replica-symmetric line q1 = q2
    is always a candidate, so the result never exceeds min_q of the
    corresponding RS envelope.  Whatever point is returned, its Psi_U is a
    valid upper bound.
    """
    order = check_bound_order(order)
    beta, b = c.beta, c.b
    axis = np.linspace(0.0, 1.0, grid)
    mg, t1g, t2g = (a.ravel() for a in np.meshgrid(axis, axis, axis, indexing="ij"))
    q1g = t1g
    q2g = np.minimum(t1g + t2g * (1.0 - t1g), 1.0)
    values = _psi(beta, b, mg, q1g, q2g, which, order)

    def objective(x):
        p = RSBPoint.from_box(*x)
        return float(_psi(beta, b, p.m, p.q1, p.q2, which, order)[0])

    rs_kind = "rs_upper" if which == "rsb_upper" else "rs_lower"
    q_rs, _ = minimize_rs(c, rs_kind, order)
    best_x = np.array([1.0, q_rs.q, 0.0])
    best_v = objective(best_x)

    step = 0.5 / max(grid - 1, 1)
    for idx in np.argsort(values, kind="stable")[:starts]:
        x0 = np.array([mg[idx], t1g[idx], t2g[idx]])
        simplex = [x0]
        for k in range(3):
            v = x0.copy()
            v[k] = v[k] + step if v[k] + step <= 1.0 else v[k] - step
            simplex.append(v)
        res = minimize(objective, x0, method="Nelder-Mead", bounds=[(0.0, 1.0)] * 3,
                       options={"initial_simplex": np.array(simplex), "xatol": xatol,
                                "fatol": np.inf, "maxiter": maxiter})
        cand_v = float(res.fun)
        if values[idx] < cand_v:
            cand_x, cand_v = x0, float(values[idx])
        else:
            cand_x = np.asarray(res.x)
        if cand_v < best_v:
            best_x, best_v = cand_x, cand_v
    p_star = RSBPoint.from_box(*best_x)
    return p_star, _bound(which, c, p_star, order)
