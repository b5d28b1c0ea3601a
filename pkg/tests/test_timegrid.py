import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma

from fracwr.timegrid import (
    InvalidParameterError,
    UnsupportedMeshError,
    build_graded_mesh,
    caputo_weights,
    default_grading,
    l1_weights,
    mesh_for_order,
    sunwu_weights,
)


@pytest.mark.parametrize(
    "T, M, r, expected",
    [
        (1.0, 4, 2.0, [0, 0.0625, 0.25, 0.5625, 1]),
        (1.0, 4, 1.0, [0, 0.25, 0.5, 0.75, 1]),
        (4.0, 2, 3.0, [0, 0.5, 4]),
    ],
)
def test_graded_nodes(T, M, r, expected):
    np.testing.assert_allclose(build_graded_mesh(T, M, r).nodes, expected, rtol=0, atol=1e-15)


@pytest.mark.parametrize("bad", [dict(T=0, M=4), dict(T=1, M=0), dict(T=1, M=4, r=0.5), dict(T=1, M=2.5)])
def test_mesh_rejects(bad):
    with pytest.raises(InvalidParameterError):
        build_graded_mesh(**bad)


def test_default_grading():
    assert default_grading(0.5) == 3.0
    assert default_grading(1.5) == 1.0
    assert mesh_for_order(1, 8, 1.5).kind == "uniform"
    assert mesh_for_order(1, 8, 0.5).r == 3.0


def test_l1_leading_coefficient():
    w = l1_weights(build_graded_mesh(3, 3, 1), 0.5)
    assert w.table[1, 1] == pytest.approx(2 / math.sqrt(math.pi), rel=1e-14)


def test_l1_alpha_one_is_backward_difference():
    mesh = build_graded_mesh(1, 5, 2)
    w = l1_weights(mesh, 1.0)
    u = mesh.nodes**2
    d = w.apply(u)
    np.testing.assert_allclose(d[1:], np.diff(u) / mesh.steps, rtol=1e-13)


def test_l1_exact_on_linear_graded():
    # linear histories are interpolated exactly, so D^a t = t^{1-a}/Gamma(2-a) to roundoff
    mesh = build_graded_mesh(1, 4, 2)
    d = l1_weights(mesh, 0.5).apply(mesh.nodes)
    assert d[-1] == pytest.approx(2 / math.sqrt(math.pi), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(1.0, 4.0), st.integers(2, 40))
def test_l1_exact_on_linear_property(alpha, r, M):
    mesh = build_graded_mesh(2.0, M, r)
    d = l1_weights(mesh, alpha).apply(mesh.nodes)
    exact = mesh.nodes[1:] ** (1 - alpha) / gamma(2 - alpha)
    np.testing.assert_allclose(d[1:], exact, rtol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 1.95), st.integers(2, 30), st.integers(0, 2**31 - 1))
def test_linearity(alpha, M, seed):
    mesh = mesh_for_order(1.0, M, alpha)
    w = caputo_weights(mesh, alpha)
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, M + 1))
    a, b = rng.normal(size=2)
    lhs = w.apply(a * u + b * v)
    rhs = a * w.apply(u) + b * w.apply(v)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(rhs).max()))


@pytest.mark.parametrize("alpha", [0.3, 0.7, 1.0, 1.4, 1.8])
def test_constant_history_has_zero_derivative(alpha):
    mesh = mesh_for_order(1.0, 16, alpha)
    w = caputo_weights(mesh, alpha)
    v0 = 0.0 if alpha > 1 else None
    np.testing.assert_allclose(w.apply(np.full(17, 3.0), v0)[1:], 0, atol=1e-11)


def test_zero_history():
    w = sunwu_weights(build_graded_mesh(1, 8), 1.5)
    assert np.all(w.apply(np.zeros(9), 0.0) == 0)


def test_l1_uniform_weights_positive_decreasing():
    mesh = build_graded_mesh(1.0, 20)
    tab = l1_weights(mesh, 0.6).table
    n = 20
    # coefficient on (u_k - u_{k-1}) at lag n - k
    coef = np.array([tab[n, k] + tab[n, k + 1:].sum() for k in range(1, n + 1)])
    lagged = coef[::-1]
    assert np.all(lagged > 0)
    assert np.all(np.diff(lagged) < 0)


def _l1_error(alpha, M):
    mesh = build_graded_mesh(1.0, M)
    d = l1_weights(mesh, alpha).apply(mesh.nodes**2)
    return abs(d[-1] - 2 / gamma(3 - alpha))


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_l1_order_on_t_squared(alpha):
    errs = [_l1_error(alpha, M) for M in (32, 64, 128)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert rates.min() >= 2 - alpha - 0.3


def test_sunwu_requires_uniform():
    with pytest.raises(UnsupportedMeshError):
        sunwu_weights(build_graded_mesh(1, 8, 2), 1.5)
    with pytest.raises(InvalidParameterError):
        sunwu_weights(build_graded_mesh(1, 8), 0.5)
    with pytest.raises(InvalidParameterError):
        l1_weights(build_graded_mesh(1, 8), 1.5)


def test_sunwu_wave_limit():
    # alpha -> 2: the step-n equation tends to the centred second difference at t_{n-1/2}
    M = 10
    mesh = build_graded_mesh(1.0, M)
    w = sunwu_weights(mesh, 1.999999)
    dt = 1.0 / M
    n = 6
    u = np.random.default_rng(0).normal(size=M + 1)
    # (delta_t u^{n-1/2} - delta_t u^{n-3/2}) / dt with the half-step average used by the scheme
    lead = w.table[n]
    ref = np.zeros(M + 1)
    ref[n], ref[n - 1], ref[n - 2] = 1 / dt**2, -2 / dt**2, 1 / dt**2
    np.testing.assert_allclose(lead, ref, atol=1e-3 / dt**2)


def _sunwu_error(alpha, M):
    mesh = build_graded_mesh(1.0, M)
    w = sunwu_weights(mesh, alpha)
    d = w.apply(mesh.nodes**3, 0.0)
    te = w.eval_times()[-1]
    return abs(d[-1] - 6 * te ** (3 - alpha) / gamma(4 - alpha))


@pytest.mark.parametrize("alpha", [1.2, 1.5, 1.8])
def test_sunwu_order(alpha):
    errs = [_sunwu_error(alpha, M) for M in (32, 64, 128)]
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert rates.min() >= 3 - alpha - 0.3


def test_sunwu_linear_with_velocity():
    mesh = build_graded_mesh(1.0, 12)
    w = sunwu_weights(mesh, 1.5)
    np.testing.assert_allclose(w.apply(mesh.nodes, 1.0)[1:], 0, atol=1e-12)
