import math

import numpy as np
import pytest
from scipy.integrate import quad

from skbounds import _special as sp
from skbounds.errors import ConfigurationError
from skbounds.quadrature import build_rule
from skbounds.rs_bound import Couplings, RSPoint, minimize_rs, phi_lower, phi_upper, sk_rs_value
from skbounds.rsb_bound import (
    M_LIMIT, RSBPoint, minimize_rsb, psi_inner, psi_lower, psi_upper,
)

BETAS = (0.5, 1.0, 2.0, 5.0, 10.0)
FIELDS = (0.0, 1e-3, 0.1, 1.0)
QS = (0.0, 0.25, 0.5, 0.75, 1.0)
MS = (0.1, 0.5, 0.9)


def _phi(z):
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _log2cosh(x):
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x))


def adaptive_inner(beta, b, m, q1, q2, z):
    """(1/m) log E_1 [2cosh Y]^m at fixed z by adaptive quadrature."""
    s, c = math.sqrt(q2 - q1), math.sqrt(q1) * z
    tilt = m * beta * s
    peak = c + s * tilt if c >= 0 else c - s * tilt
    shift = m * _log2cosh(beta * math.hypot(peak, b))
    f = lambda u: math.exp(m * _log2cosh(beta * math.hypot(c + s * u, b)) - shift) * _phi(u)
    k = -c / s
    span = 14.0 + tilt
    pts = sorted(p for p in {k - 1, k, k + 1, -1.0, 0.0, 1.0, tilt, -tilt} if abs(p) < span)
    edges = [-span, *pts, span]
    val = math.fsum(quad(f, a, e, epsabs=0, epsrel=1e-13, limit=200)[0] for a, e in zip(edges, edges[1:]))
    return (shift + math.log(val)) / m


def adaptive_psi_core(beta, b, m, q1, q2):
    edges = (-10, -1, -0.1, 0, 0.1, 1, 10)
    g = lambda z: adaptive_inner(beta, b, m, q1, q2, z) * _phi(z)
    return math.fsum(quad(g, a, e, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
                     for a, e in zip(edges, edges[1:]))


def upper_offset(beta, b, m, q1, q2):
    return 0.25 * beta**2 * (m * (q1**2 - q2**2) + (1 - q2) ** 2 + 2 * q2 * float(sp.upper_correction(beta, b)))


def test_point_validation():
    with pytest.raises(ConfigurationError):
        RSBPoint(0.5, 0.6, 0.4)
    with pytest.raises(ConfigurationError):
        RSBPoint(1.1, 0.1, 0.2)
    with pytest.raises(ConfigurationError):
        RSBPoint(0.5, -0.1, 0.2)
    with pytest.raises(ConfigurationError):
        RSBPoint(math.nan, 0.1, 0.2)


def test_from_box():
    p = RSBPoint.from_box(0.5, 0.2, 0.5)
    assert (p.m, p.q1) == (0.5, 0.2) and abs(p.q2 - 0.6) < 1e-15
    p = RSBPoint.from_box(1.3, -0.1, 2.0)
    assert (p.m, p.q1, p.q2) == (1.0, 0.0, 1.0)


@pytest.mark.parametrize("z", [-2.0, 0.0, 0.7])
def test_inner_collapse(z):
    c = Couplings(3.0, 0.2)
    q = 0.4
    x = 3.0 * math.sqrt(q * z * z + 0.04)
    assert abs(psi_inner(c, RSBPoint(0.3, q, q), z) - _log2cosh(x)) < 1e-15


def test_inner_m_one_plain_expectation():
    c, p, z = Couplings(2.0, 0.3), RSBPoint(1.0, 0.2, 0.7), 0.4
    s, cz = math.sqrt(0.5), math.sqrt(0.2) * z
    ref = quad(lambda u: 2 * math.cosh(2.0 * math.hypot(cz + s * u, 0.3)) * _phi(u), -15, 15,
               epsrel=1e-14, limit=200)[0]
    assert abs(psi_inner(c, p, z) - math.log(ref)) < 1e-12


def test_inner_reference_point_two_orders_and_reference():
    c, p = Couplings(10.0, 1e-3), RSBPoint(0.70, 0.88, 0.99)
    v64, v256 = psi_inner(c, p, 0.0, 64), psi_inner(c, p, 0.0, 256)
    assert abs(v64 - v256) < 1e-8
    assert abs(v256 - adaptive_inner(10.0, 1e-3, 0.7, 0.88, 0.99, 0.0)) < 1e-10


def test_inner_small_m_continuity():
    c, p = Couplings(2.0, 0.1), dict(q1=0.3, q2=0.8)
    for z in (-1.0, 0.0, 1.5):
        a = psi_inner(c, RSBPoint(1e-6, **p), z)
        b = psi_inner(c, RSBPoint(9.9e-7, **p), z)
        assert abs(a - b) < 1e-7
    assert M_LIMIT == 1e-6
    # large inner variance at the low-temperature point
    c, p = Couplings(10.0, 1e-3), dict(q1=0.88, q2=0.99)
    a = psi_inner(c, RSBPoint(1e-6, **p), 0.3)
    b = psi_inner(c, RSBPoint(9.9e-7, **p), 0.3)
    assert abs(a - b) < 1e-7


def test_m_zero_limit_value():
    beta, b, q1, q2, z = 2.0, 0.1, 0.3, 0.8, 0.5
    s, cz = math.sqrt(q2 - q1), math.sqrt(q1) * z
    ref = quad(lambda u: _log2cosh(beta * math.hypot(cz + s * u, b)) * _phi(u), -15, 15,
               points=[-cz / s], epsrel=1e-14, limit=200)[0]
    assert abs(psi_inner(Couplings(beta, b), RSBPoint(0.0, q1, q2), z) - ref) < 1e-12


def test_m_zero_is_quenched_average():
    c, p = Couplings(2.0, 0.1), RSBPoint(0.0, 0.3, 0.8)
    a = psi_inner(c, p, 0.5)
    b = psi_inner(c, RSBPoint(1e-4, 0.3, 0.8), 0.5)
    assert a < b and b - a < 1e-3


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("b", FIELDS)
def test_rs_collapse_grid(beta, b):
    c = Couplings(beta, b)
    for q in QS:
        lo, hi = phi_lower(c, RSPoint(q)).value, phi_upper(c, RSPoint(q)).value
        for m in MS:
            p = RSBPoint(m, q, q)
            pl, pu = psi_lower(c, p).value, psi_upper(c, p).value
            assert abs(pu - hi) < 1e-10
            assert abs(pl - lo) < 1e-10
            if b == 0.0:
                assert abs(pl - sk_rs_value(beta, q)) < 1e-12


@pytest.mark.parametrize("beta", BETAS)
@pytest.mark.parametrize("b", FIELDS)
def test_envelope_ordering(beta, b):
    c = Couplings(beta, b)
    for m in MS:
        for q1, q2 in ((0.0, 0.5), (0.25, 0.75), (0.5, 1.0), (0.1, 0.2)):
            p = RSBPoint(m, q1, q2)
            assert psi_lower(c, p).value <= psi_upper(c, p).value


def test_q1_zero_outer_trivial():
    c, p = Couplings(3.0, 0.5), RSBPoint(0.4, 0.0, 0.6)
    core = psi_inner(c, p, 0.0)
    assert abs(psi_upper(c, p).value - (core + upper_offset(3.0, 0.5, 0.4, 0.0, 0.6))) < 1e-12
    assert psi_inner(c, p, 2.0) == core


@pytest.mark.parametrize("args", [
    (10.0, 1e-3, 0.70, 0.88, 0.99),
    (10.0 / 3.0, 1e-3, 0.76, 0.71, 0.91),
    (2.0, 0.5, 0.3, 0.2, 0.6),
])
def test_psi_upper_against_adaptive(args):
    beta, b, m, q1, q2 = args
    got = psi_upper(Couplings(beta, b), RSBPoint(m, q1, q2)).value
    ref = adaptive_psi_core(*args) + upper_offset(*args)
    assert abs(got - ref) < 1e-9


def test_psi_lower_two_orders():
    c, p = Couplings(10.0 / 3.0, 1e-3), RSBPoint(0.76, 0.71, 0.91)
    assert abs(psi_lower(c, p, 64).value - psi_lower(c, p, 256).value) < 1e-8


def test_psi_upper_nested_monte_carlo():
    # 1e6 outer draws; each inner expectation on a plain order-200 Hermite rule.
    beta, b, m, q1, q2 = 10.0, 1e-3, 0.70, 0.88, 0.99
    rule = build_rule(200)
    rng = np.random.default_rng(7)
    s = math.sqrt(q2 - q1)
    vals = []
    for _ in range(20):
        z = rng.standard_normal(50_000)
        cz = math.sqrt(q1) * z[:, None]
        y = beta * np.sqrt((cz + s * rule.nodes) ** 2 + b * b)
        lc = y + np.log1p(np.exp(-2 * y))
        top = lc.max(axis=1, keepdims=True)
        vals.append((m * top[:, 0] + np.log(np.exp(m * (lc - top)) @ rule.weights)) / m)
    vals = np.concatenate(vals)
    mean, se = vals.mean(), vals.std(ddof=1) / math.sqrt(vals.size)
    got = psi_upper(Couplings(beta, b), RSBPoint(m, q1, q2)).value - upper_offset(beta, b, m, q1, q2)
    assert abs(got - mean) < 3 * se


def test_bad_kind():
    from skbounds.rsb_bound import _psi
    with pytest.raises(ConfigurationError):
        _psi(1.0, 0.0, 0.5, 0.1, 0.2, "rs_upper", 64)


def test_minimize_high_temperature_matches_rs():
    c = Couplings(0.5, 0.0)
    p, v = minimize_rsb(c)
    _, rs = minimize_rs(c, "rs_upper")
    assert abs(v.value - rs.value) < 1e-6
    assert abs(p.q2 - p.q1) < 1e-3 or p.m > 1 - 1e-6 or p.m < 1e-6


@pytest.mark.parametrize("beta,ref", [(10.0, (0.70, 0.88, 0.99)), (10.0 / 9.0, (0.99, 0.10, 0.22))])
def test_minimize_dominates_reference_points(beta, ref):
    c = Couplings(beta, 1e-3)
    _, v = minimize_rsb(c)
    assert v.value <= psi_upper(c, RSBPoint(*ref)).value


@pytest.mark.parametrize("c", [Couplings(2.0, 0.5), Couplings(10.0 / 7.0, 1e-3), Couplings(0.8, 1.0)])
def test_minimize_dominates_rs_line(c):
    _, v = minimize_rsb(c)
    _, rs = minimize_rs(c, "rs_upper")
    assert v.value <= rs.value + 1e-9


def test_minimize_lower_kind():
    c = Couplings(2.0, 0.5)
    p, v = minimize_rsb(c, which="rsb_lower")
    assert v.kind == "rsb_lower"
    assert v.value <= minimize_rs(c, "rs_lower")[1].value + 1e-9
    assert abs(psi_lower(c, p).value - v.value) == 0.0


def test_minimize_deterministic():
    c = Couplings(3.0, 0.2)
    assert minimize_rsb(c) == minimize_rsb(c)
