import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfc, erfcx

from fracwr.laplace_lab import (
    ContourFailure,
    LaplaceSymbol,
    RhoParams,
    check_lemma,
    eval_rho_blocks,
    eval_rho_closed,
    kernel_catalog,
    kernel_l1_norm,
    lemma_bound,
    log_cosh,
    log_sinh,
    optimal_thetas,
    propagate_error_frequency,
    rho_blocks,
    symbol_at_infinity,
    talbot_invert,
)
from ode_oracle import rho_by_ode


T = np.array([0.25, 0.5, 1.0, 2.0])


@pytest.mark.parametrize(
    "F, f",
    [
        (lambda s: 1 / s, lambda t: np.ones_like(t)),
        (lambda s: 1 / s**2, lambda t: t),
        (lambda s: 1 / (s + 1), lambda t: np.exp(-t)),
        (lambda s: np.exp(-np.sqrt(s)), lambda t: np.exp(-1 / (4 * t)) / (2 * np.sqrt(np.pi * t**3))),
        (lambda s: np.exp(-np.sqrt(s)) / s, lambda t: erfc(1 / (2 * np.sqrt(t)))),
        # Mittag-Leffler E_{1/2}(-sqrt t)
        (lambda s: s**-0.5 / (s**0.5 + 1), lambda t: erfcx(np.sqrt(t))),
    ],
)
def test_talbot_known_pairs(F, f):
    np.testing.assert_allclose(talbot_invert(F, T), f(T), rtol=1e-8, atol=1e-10)


def test_log_evaluator_matches_plain():
    plain = LaplaceSymbol(lambda s: np.exp(-np.sqrt(s)) / s)
    logged = LaplaceSymbol(plain.evaluator, log_evaluator=lambda s: -np.sqrt(s) - np.log(s))
    np.testing.assert_allclose(talbot_invert(logged, T), talbot_invert(plain, T), rtol=1e-12)


def test_trailing_axes_carried():
    out = talbot_invert(lambda s: np.stack([1 / s, 1 / s**2], axis=-1), T)
    assert out.shape == (4, 2)
    np.testing.assert_allclose(out[:, 1], T, rtol=1e-9)


def test_contour_failure():
    with pytest.raises(ContourFailure):
        talbot_invert(lambda s: np.full(np.shape(s), np.nan + 0j), [1.0])
    with pytest.raises(ValueError):
        talbot_invert(lambda s: 1 / s, [0.0])


def _atom_free(name, ls, alpha):
    sym = kernel_catalog(name, ls, alpha)
    atom = symbol_at_infinity(sym, alpha, sym.params["l"])
    return LaplaceSymbol(lambda s: sym(s) - atom, name)


NODE_CASES = [(name, ls, a) for name, ls in [("exp", (1,)), ("P2", (0.5, 1, 2)), ("P3", (2, 1, 0.5)),
                                             ("Phi", (0.5, 1)), ("Psi", (0.5, 1))]
              for a in (0.25, 0.5)]


@pytest.mark.parametrize("name, ls, alpha", NODE_CASES)
def test_halving_nodes_stable(name, ls, alpha):
    sym = _atom_free(name, ls, alpha)
    times = [0.1, 0.5, 1.0]
    np.testing.assert_allclose(talbot_invert(sym, times, 24), talbot_invert(sym, times, 48), rtol=0, atol=1e-8)


@pytest.mark.parametrize(
    "name, ls, alpha",
    [pytest.param(*c, marks=pytest.mark.xfail(strict=True, reason="contour rounding grows like e^{0.17 n}"))
     if c[2] == 0.25 else c for c in NODE_CASES],
)
def test_doubling_nodes_stable(name, ls, alpha):
    sym = _atom_free(name, ls, alpha)
    times = [0.1, 0.5, 1.0]
    np.testing.assert_allclose(talbot_invert(sym, times, 96), talbot_invert(sym, times, 48), rtol=0, atol=1e-8)


def test_log_hyperbolics_far_out():
    w = np.array([800 + 3j, -800 + 3j, 0.3 - 0.2j])
    assert np.all(np.isfinite(log_cosh(w))) and np.all(np.isfinite(log_sinh(w)))
    np.testing.assert_allclose(np.exp(log_cosh(w[2:])), np.cosh(w[2:]), rtol=1e-14)
    np.testing.assert_allclose(np.exp(log_sinh(w[2:])), np.sinh(w[2:]), rtol=1e-14)
    np.testing.assert_allclose(np.exp(log_sinh(-w[2:])), -np.sinh(w[2:]), rtol=1e-14)


# --- kernels ------------------------------------------------------------------------------


def test_subordinator_norm_is_erfc():
    # e^{-sqrt s} inverts to the Levy density; its mass on (0, 1) is erfc(1/2)
    sym = kernel_catalog("exp", (1,), 0.5)
    norm = kernel_l1_norm(sym, 1.0, alpha=0.5, scale=1.0)
    assert norm == pytest.approx(erfc(0.5), abs=1e-3)
    assert norm <= lemma_bound("exp", (1,), 0.5, 1.0) == pytest.approx(math.exp(-0.25))


def test_subordinator_mass_tends_to_one():
    sym = kernel_catalog("exp", (1,), 0.5)
    assert kernel_l1_norm(sym, 400.0, alpha=0.5, scale=1.0) == pytest.approx(erfc(1 / 40), abs=1e-3)


def test_catalog_values():
    one = complex(1.0)
    assert kernel_catalog("Phi", (1, 1), 0.4)(np.array([3 + 1j])) == pytest.approx(1)
    assert kernel_catalog("P1", (1, 1), 1 / 3)(np.array([one]))[0] == pytest.approx(1 / math.cosh(1))
    assert kernel_catalog("P1", (1, 2), 0.5)(np.array([one]))[0] == pytest.approx(math.cosh(1) / math.cosh(2))
    assert kernel_catalog("Q2", (1,), 0.5)(np.array([one]))[0] == pytest.approx(math.e / math.cosh(1))


def test_atom_detected():
    sym = kernel_catalog("Phi", (1, 1), 0.4)
    assert symbol_at_infinity(sym, 0.4, 1.0) == pytest.approx(1.0)
    assert kernel_l1_norm(sym, 1.0, alpha=0.4, scale=1.0) == pytest.approx(1.0, abs=1e-6)


def test_catalog_arity_and_regimes():
    with pytest.raises(ValueError):
        kernel_catalog("P1", (1,), 0.4)
    with pytest.raises(ValueError):
        kernel_catalog("P2", (1, 1), 0.4)
    with pytest.raises(ValueError):
        kernel_catalog("nope", (1,), 0.4)
    with pytest.raises(ValueError):
        kernel_catalog("exp", (1,), 1.2)
    with pytest.raises(ValueError):
        lemma_bound("P1", (1, 1), 0.7, 1.0)
    with pytest.raises(ValueError):
        lemma_bound("Q1", (1, 1), 0.4, 1.0)


@pytest.mark.parametrize(
    "name, alpha, t, ls",
    [("exp", 0.25, 1.0, (0.5,)), ("Lemma5", 0.4, 0.5, (1, 2)), ("P1", 0.5, 1.0, (2, 0.5)),
     ("P2", 0.25, 1.0, (1, 0.5, 2)), ("P3", 0.4, 0.5, (0.5, 2, 1)), ("P4", 0.5, 1.0, (2, 1, 0.5)),
     ("Q1", 0.6, 1.0, (1, 2)), ("Q2", 0.75, 0.5, (1,)), ("Q4", 0.6, 1.0, (0.5, 1, 2))],
)
def test_lemma_sample(name, alpha, t, ls):
    case = check_lemma(name, alpha, t, ls)
    assert np.isfinite(case.norm) and case.holds


# --- iteration matrix ------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 3), st.floats(-3, 3), st.floats(0.1, 0.95))
def test_hyperbolic_identity(re, im, nu):
    p = RhoParams((0.5, 1.0, 1.5), (1, 1, 1), nu)
    sg, gm = p.hyperbolics(np.array([complex(re, im)]))
    lhs = sg[..., 1:] ** 2 - gm[..., 1:] ** 2 + 1
    np.testing.assert_allclose(lhs, 0, atol=1e-12 * (1 + np.abs(gm) ** 2).max())


def test_rho_three_subdomains_example():
    p = RhoParams((1, 1, 1), (1, 1, 1), 0.5, (0.5, 0.5))
    rho = eval_rho_closed(p, np.array(1.0 + 0j))
    assert rho[0, 0] == pytest.approx(0, abs=1e-15)
    assert rho[0, 1] == pytest.approx(1 / (2 * math.cosh(1)))
    assert rho[0, 1] == pytest.approx(0.32403, abs=1e-5)
    np.testing.assert_allclose(rho, rho[::-1, ::-1], atol=1e-15)


def test_optimal_thetas():
    assert optimal_thetas((1, 1, 1)) == pytest.approx((0.5, 0.5))
    assert optimal_thetas((1, 4, 1)) == pytest.approx((1 / 3, 1 / 3))


def test_rho_zero_pattern():
    p = RhoParams((0.4, 0.7, 0.5, 1.1, 0.3, 0.9, 0.6), (1, 2, 0.5, 1, 3, 1, 0.7), 0.3)
    rho = eval_rho_closed(p, np.array(1.3 + 0.4j))
    m = 3
    for i in range(1, 2 * m + 1):
        for j in range(1, 2 * m + 1):
            if i <= m:
                zero = j < i - 1 or j > m + 1
            else:
                zero = j > i + 1 or j < m
            if zero:
                assert rho[i - 1, j - 1] == 0


def _random_draw(rng):
    m = int(rng.integers(1, 4))
    n = 2 * m + 1
    kappa = rng.uniform(0.2, 4, n)
    a = rng.uniform(0.3, 2, n)
    return a, kappa, RhoParams(tuple(a / np.sqrt(kappa)), tuple(kappa), rng.uniform(0.1, 0.95))


def _contour_sample(rng, t):
    th = (np.arange(48) + 0.5) * np.pi / 48
    shape = -0.6122 + 0.5017 * th / np.tan(0.6407 * th) + 0.2645j * th
    return (48 / t * shape)[rng.choice(48, 10, replace=False)]


def test_closed_and_blocks_agree_on_contour():
    rng = np.random.default_rng(11)
    for _ in range(10):
        _, _, p = _random_draw(rng)
        s = _contour_sample(rng, rng.uniform(0.1, 2))
        np.testing.assert_allclose(eval_rho_blocks(p, s), eval_rho_closed(p, s), rtol=0, atol=1e-12)


def test_both_routes_match_ode_oracle():
    rng = np.random.default_rng(5)
    for _ in range(9):
        a, kappa, p = _random_draw(rng)
        theta = tuple(rng.uniform(0.2, 0.8, len(a) - 1))
        p = RhoParams(p.h, p.kappa, 0.35, theta)
        s = complex(rng.uniform(0.2, 3), rng.uniform(-2, 2))
        ref = rho_by_ode(a, kappa, theta, s**0.35)
        np.testing.assert_allclose(eval_rho_closed(p, np.array(s)), ref, atol=1e-13)
        np.testing.assert_allclose(eval_rho_blocks(p, np.array(s)), ref, atol=1e-13)


def test_theta_one_drops_diagonal_of_tl():
    p = RhoParams((0.5, 1, 1.5, 1, 0.5), (1, 2, 1, 0.5, 1), 0.5, (1, 1, 1, 1))
    b = rho_blocks(p, 2.0 + 1j)
    assert np.all(np.diag(b["TL"]) == 0) and np.all(np.diag(b["TR"]) == 0)


def test_propagation_trivial_cases():
    p = RhoParams((1, 1, 1), (1, 1, 1), 0.5)
    zero = propagate_error_frequency(p, lambda s: 0 * s, 3, [0.5, 1.0])
    assert np.all(zero == 0)
    ident = propagate_error_frequency(p, lambda s: 1 / s, 0, [0.5, 1.0])
    np.testing.assert_allclose(ident, 1, rtol=1e-9)
    with pytest.raises(ValueError):
        propagate_error_frequency(p, lambda s: 1 / s, -1, [1.0])


def test_propagation_symmetric_contracts():
    # equal pieces at theta = 1/2: rho is anti-diagonal with entries 1/(2 cosh z)
    p = RhoParams((1, 1, 1), (1, 1, 1), 0.5)
    e1 = propagate_error_frequency(p, lambda s: 1 / s, 1, [1.0])
    e2 = propagate_error_frequency(p, lambda s: 1 / s, 2, [1.0])
    assert np.abs(e2).max() < np.abs(e1).max()
