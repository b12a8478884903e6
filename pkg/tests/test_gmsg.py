import warnings

import numpy as np
import pytest

from pybpmf import (
    DegenerateDivision,
    DiscreteMsg,
    EmptyBelief,
    GaussMsg,
    discrete_moments,
    divide,
    make_constellation,
    product,
    product_over,
    project_gaussian,
)
from .case.gmsg import DISCRETE_MOMENTS_CASE, DIVIDE_CASE, PRODUCT_CASE, PROJECT_GAUSSIAN_CASE


def assert_msg(msg, expected, rtol=1e-12):
    mean, variance = expected
    np.testing.assert_allclose(msg.mean, mean, rtol=rtol, atol=1e-12)
    np.testing.assert_allclose(msg.variance, variance, rtol=rtol, atol=1e-12)


def random_msgs(rng, size):
    mean = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return GaussMsg(mean, rng.uniform(0.05, 5.0, size))


def test_product():
    for pc in PRODUCT_CASE:
        a, b = (GaussMsg(*pc["kwargs"][key]) for key in ("a", "b"))
        assert_msg(product(a, b), pc["result"])


def test_product_matches_grid_integration():
    a = GaussMsg(1 + 1j, 0.5)
    b = GaussMsg(-1 + 0j, 0.25)
    axis = np.linspace(-4, 4, 801)
    re, im = np.meshgrid(axis, axis)
    grid = re + 1j * im
    density = a.pdf(grid) * b.pdf(grid)
    density /= density.sum()
    mean = np.sum(density * grid)
    variance = np.sum(density * np.abs(grid - mean) ** 2)

    result = product(a, b)
    assert abs(result.mean - mean) < 1e-6
    assert abs(result.variance - variance) < 1e-6


def test_product_is_commutative_and_associative():
    rng = np.random.default_rng(1)
    a, b, c = (random_msgs(rng, 10**5) for _ in range(3))
    assert_msg(product(a, b), (product(b, a).mean, product(b, a).variance))
    left = product(product(a, b), c)
    right = product(a, product(b, c))
    np.testing.assert_allclose(left.mean, right.mean, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(left.variance, right.variance, rtol=1e-12)


def test_divide():
    for dc in DIVIDE_CASE:
        num, den = (GaussMsg(*dc["kwargs"][key]) for key in ("num", "den"))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateDivision)
            assert_msg(divide(num, den), dc["result"])


def test_divide_warns_when_clamped():
    with pytest.warns(DegenerateDivision):
        divide(GaussMsg(1, 2.0), GaussMsg(0, 1.0))


def test_divide_inverts_product():
    rng = np.random.default_rng(2)
    a = random_msgs(rng, 10**5)
    b = random_msgs(rng, 10**5)
    b = GaussMsg(b.mean, np.where(np.isclose(a.variance, b.variance), b.variance + 1.0, b.variance))
    restored = divide(product(a, b), b)
    np.testing.assert_allclose(restored.mean, a.mean, rtol=1e-8, atol=1e-8)
    np.testing.assert_allclose(restored.variance, a.variance, rtol=1e-8)


def test_product_over_folds_axis():
    rng = np.random.default_rng(3)
    msgs = random_msgs(rng, (4, 7))
    expected = product(product(product(msgs[0], msgs[1]), msgs[2]), msgs[3])
    assert_msg(product_over(msgs, axis=0), (expected.mean, expected.variance))


def test_gauss_msg_rejects_bad_variance():
    with pytest.raises(ValueError):
        GaussMsg(0, -1.0)
    with pytest.raises(ValueError):
        GaussMsg(np.nan, 1.0)


def test_discrete_moments():
    for dmc in DISCRETE_MOMENTS_CASE:
        msg = DiscreteMsg(dmc["kwargs"]["weights"])
        mean, variance = discrete_moments(msg, make_constellation(dmc["kwargs"]["name"]))
        expected_mean, expected_variance = dmc["result"]
        assert mean == pytest.approx(expected_mean, abs=1e-12)
        assert variance == pytest.approx(expected_variance, abs=1e-12)


def test_discrete_msg_rejects_empty():
    with pytest.raises(EmptyBelief):
        DiscreteMsg([0.0, 0.0, 0.0, 0.0])
    with pytest.raises(EmptyBelief):
        DiscreteMsg.from_log_weights([-np.inf, -np.inf])


def test_project_gaussian():
    for pgc in PROJECT_GAUSSIAN_CASE:
        msg = project_gaussian(**pgc["kwargs"])
        assert_msg(msg, pgc["result"])


def test_project_gaussian_qpsk_likelihood():
    points = make_constellation("qpsk").points
    weights = np.exp(-np.abs(points - (0.3 + 0.2j)) ** 2 / 0.5)
    msg = project_gaussian(points, weights)

    total = sum(weights)
    mean = sum(w * p for w, p in zip(weights, points)) / total
    variance = sum(w * abs(p - mean) ** 2 for w, p in zip(weights, points)) / total
    assert_msg(msg, (mean, variance), rtol=1e-10)


def test_project_gaussian_rejects_zero_weight():
    with pytest.raises(EmptyBelief):
        project_gaussian([1, -1], [0.0, 0.0])


def test_constellations_have_unit_energy():
    for name in ("qpsk", "qam16"):
        points = make_constellation(name).points
        assert np.mean(np.abs(points) ** 2) == pytest.approx(1.0)
    assert np.allclose(np.abs(make_constellation("qpsk").points), 1.0)


def test_unknown_constellation():
    with pytest.raises(ValueError):
        make_constellation("psk8")
