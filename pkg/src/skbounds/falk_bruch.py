"""The Falk-Bruch function and the paramagnetic non-exactness test.

F is defined on [0, inf) by F(x tanh x) = tanh(x)/x, F(0) = 1.  It is
decreasing and convex, and bounded below by (1 - exp(-t))/t.
"""

from dataclasses import dataclass
import math

from .errors import ConfigurationError, DomainError, ConvergenceError

SMALL_T = 1e-10


@dataclass(frozen=True)
class FBConstants:
    """kappa is the magnitude of the classical SK ground-state energy density."""

    kappa: float = 0.763
    root_tolerance: float = 1e-13

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ConfigurationError(f"kappa must be positive, got {self.kappa}")
        if not 0 < self.root_tolerance <= 1e-8:
            raise ConfigurationError(
                f"root_tolerance must be in (0, 1e-8], got {self.root_tolerance}"
            )


def _solve_x_tanh_x(t, tol):
    # x tanh x is increasing on [0, inf), lies in [x^2 (1 - x^2/3), x^2] near 0
    # and exceeds x - 1 for large x, which gives the bracket below.
    lo = max(math.sqrt(t) * (1.0 - t), 1e-8)
    hi = max(t, 1.0) + 1.0
    x = min(max(math.sqrt(t), lo), hi) if t < 1.0 else t
    for _ in range(200):
        th = math.tanh(x)
        g = x * th - t
        if g == 0.0:
            return x
        if g > 0:
            hi = x
        else:
            lo = x
        dg = th + x * (1.0 - th * th)
        step = g / dg
        x_new = x - step
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= tol * max(1.0, x_new):
            return x_new
        x = x_new
    raise ConvergenceError(f"x tanh x = {t} did not converge")


def f_of(t, tol=FBConstants.root_tolerance):
    """Falk-Bruch function F(t) for t >= 0."""
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"F is defined on [0, inf), got {t}")
    if t == 0.0:
        return 1.0
    if t < SMALL_T:
        return 1.0 - t / 3.0
    x = _solve_x_tanh_x(t, tol)
    return math.tanh(x) / x


def nonexact_condition(c, constants=FBConstants()):
    """Check beta * F(2 beta b tanh(beta b)) > 2 kappa.

    Returns ``(holds, margin)`` with ``margin = beta*F(...) - 2*kappa``.  When
    it holds, the paramagnetic RS value log 2cosh(beta b) + beta^2/4 is not
    the limiting free energy.
    """
    u = 2.0 * c.beta * c.b * math.tanh(c.beta * c.b) if c.b > 0 else 0.0
    margin = c.beta * f_of(u, constants.root_tolerance) - 2.0 * constants.kappa
    return margin > 0, margin
