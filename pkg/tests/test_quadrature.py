import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import roots_hermitenorm

from skbounds.errors import ConfigurationError, EvaluationError
from skbounds.quadrature import HermiteRule, SinhRule, build_rule, expect1, expect2, sinh_rule


def test_order_one_and_two():
    r1 = build_rule(1)
    assert np.allclose(r1.nodes, [0.0]) and np.allclose(r1.weights, [1.0])
    r2 = build_rule(2)
    assert np.allclose(r2.nodes, [-1.0, 1.0], atol=1e-14)
    assert np.allclose(r2.weights, [0.5, 0.5], atol=1e-14)


def test_fourth_moment_order_32():
    r = build_rule(32)
    assert abs(np.sum(r.weights * r.nodes**4) - 3.0) < 1e-9


@pytest.mark.parametrize("order", [1, 2, 3, 7, 16, 64, 128, 256, 512])
def test_rule_invariants(order):
    r = build_rule(order)
    assert isinstance(r, HermiteRule) and r.order == order
    assert abs(r.weights.sum() - 1.0) < 1e-12
    assert np.all(np.diff(r.nodes) > 0)
    assert np.allclose(r.nodes, -r.nodes[::-1], atol=1e-12)
    if order >= 2:
        assert abs(np.sum(r.weights * r.nodes**2) - 1.0) < 1e-10
    if order <= 256:
        assert np.all(r.weights > 0)
    else:
        assert np.all(r.weights >= 0)  # far-tail weights underflow to 0


@pytest.mark.parametrize("order", [5, 20, 100])
def test_matches_scipy_reference(order):
    x, w = roots_hermitenorm(order)
    r = build_rule(order)
    assert np.allclose(r.nodes, x, atol=1e-12)
    assert np.allclose(r.weights, w / w.sum(), rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("order", [0, -1, 513, 2.5, "8"])
def test_bad_order(order):
    with pytest.raises(ConfigurationError):
        build_rule(order)


def test_rule_is_immutable():
    r = build_rule(8)
    with pytest.raises(ValueError):
        r.nodes[0] = 1.0
    with pytest.raises(AttributeError):
        r.order = 3


def _double_factorial(k):
    return math.prod(range(k - 1, 0, -2)) if k > 0 else 1


@pytest.mark.parametrize("order", [4, 10, 20])
def test_exact_on_monomials(order):
    r = build_rule(order)
    for k in range(2 * order):
        exact = 0.0 if k % 2 else float(_double_factorial(k))
        # odd moments cancel in pairs; rounding scales with E|z|^k
        scale = expect1(lambda z: np.abs(z) ** k, r)
        assert abs(expect1(lambda z: z**k, r) - exact) <= 1e-12 * max(1.0, scale)


def test_expect1_examples():
    r = build_rule(32)
    assert abs(expect1(lambda z: z * z, r) - 1.0) < 1e-12
    assert abs(expect1(np.exp, r) - math.exp(0.5)) < 1e-10


def test_expect1_monte_carlo_oracle():
    f = lambda z: np.logaddexp(2.0 * math.sqrt(0.5) * z, -2.0 * math.sqrt(0.5) * z)
    value = expect1(f, build_rule(64))
    rng = np.random.default_rng(20240611)
    samples = np.concatenate([f(rng.standard_normal(1_000_000)) for _ in range(10)])
    mean, se = samples.mean(), samples.std(ddof=1) / math.sqrt(samples.size)
    assert abs(value - mean) < 3.0 * se


def test_expect2_examples():
    r = build_rule(32)
    assert abs(expect2(lambda z, z1: z * z1, r)) < 1e-12
    assert abs(expect2(lambda z, z1: z * z + z1 * z1, r) - 2.0) < 1e-10
    assert abs(expect2(lambda z, z1: (0.5 * z + 0.5 * z1) ** 2, r) - 0.5) < 1e-10


def test_expect2_marginal():
    r = build_rule(24)
    f = lambda z: np.cos(z) + z**3
    assert abs(expect2(lambda z, z1: f(z), r) - expect1(f, r)) < 1e-13


def test_expect2_exact_on_monomials():
    r = build_rule(6)
    for i in range(12):
        for j in range(12):
            exact = (0 if (i % 2 or j % 2) else _double_factorial(i) * _double_factorial(j))
            scale = expect2(lambda z, z1: np.abs(z**i * z1**j), r)
            assert abs(expect2(lambda z, z1: z**i * z1**j, r) - exact) <= 1e-12 * max(1, scale)


def test_evaluation_error_carries_node():
    r = build_rule(3)
    np_err = np.errstate(divide="ignore", invalid="ignore")
    np_err.__enter__()
    with pytest.raises(EvaluationError) as info:
        expect1(lambda z: 1.0 / z, r)
    assert info.value.node == 0.0
    with pytest.raises(EvaluationError) as info:
        expect2(lambda z, z1: np.log(z1 + 10 * z * z), r)
    np_err.__exit__(None, None, None)
    assert np.allclose(info.value.node, (0.0, -math.sqrt(3.0)))


def _adaptive_gauss(f):
    g = lambda z: f(z) * math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    pieces = [quad(g, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
              for a, b in ((-12, -1), (-1, 0), (0, 1), (1, 12))]
    return math.fsum(pieces)


def test_sinh_rule_beats_hermite_on_sharp_log2cosh():
    # log 2cosh(a z) bends on the scale pi / (2a) around z = 0.
    a = 10.0 * math.sqrt(0.92)
    f = lambda z: np.logaddexp(a * z, -a * z)
    ref = _adaptive_gauss(lambda z: float(f(z)))
    r = sinh_rule(64, width=math.pi / (2.0 * a))
    assert isinstance(r, SinhRule)
    assert abs(r.weights.sum() - 1.0) < 1e-14
    assert abs(expect1(f, r) - ref) < 1e-10
    assert abs(expect1(f, build_rule(64)) - ref) > 1e-3


def test_sinh_rule_validation():
    with pytest.raises(ConfigurationError):
        sinh_rule(16, width=0.0)
    with pytest.raises(ConfigurationError):
        sinh_rule(16, center=11.0)
