import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.special import eval_laguerre

from phasetail.oscillator import OscillatorConfig, QuantumState, density, eigenfunction, momentum_density
from phasetail.phasespace import (
    check_equivalence,
    classical_tail_probability,
    ground_state_distribution,
    momentum_marginal,
    position_marginal,
    wigner_marginals,
    wigner_transform,
)

UNIT = OscillatorConfig()
log_uniform = st.floats(math.log(1e-2), math.log(1e2)).map(math.exp)


def laguerre_wigner(n, cfg, x, p):
    """Closed-form oscillator Wigner function (-1)^n/(pi hbar) e^{-2H/hw} L_n(4H/hw)."""
    r = 2 * cfg.hamiltonian(x, p) / (cfg.hbar * cfg.omega)
    return (-1) ** n / (math.pi * cfg.hbar) * np.exp(-r) * eval_laguerre(n, 2 * r)


def test_ground_state_distribution_examples():
    F = ground_state_distribution(UNIT)
    assert (F.sigma_x, F.sigma_p) == pytest.approx((1 / math.sqrt(2), 1 / math.sqrt(2)), rel=1e-15)
    assert F.norm == pytest.approx(1 / math.pi, rel=1e-15)
    F = ground_state_distribution(OscillatorConfig(m=4.0, C=1.0, hbar=1.0))
    assert F.config.alpha == 2.0
    assert (F.sigma_x, F.sigma_p) == pytest.approx((0.5, 1.0), rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(log_uniform, log_uniform, log_uniform)
def test_ground_state_invariants(m, C, hbar):
    cfg = OscillatorConfig(m, C, hbar)
    F = ground_state_distribution(cfg)
    a = cfg.alpha
    assert F.sigma_x**2 == pytest.approx(1 / (2 * a), rel=1e-14)
    assert F.sigma_p**2 == pytest.approx(a * hbar**2 / 2, rel=1e-14)
    assert F.norm == pytest.approx(1 / (math.pi * hbar), rel=1e-14)
    assert F.pdf(0.0, 0.0) == pytest.approx(1 / (math.pi * hbar), rel=1e-14)
    assert F.stationarity_ratio == pytest.approx(1.0, rel=1e-14)
    x, p = 0.3 / math.sqrt(a), -1.1 * math.sqrt(a) * hbar
    assert F.pdf(x, p) == pytest.approx(math.exp(-a * x * x - p * p / (a * hbar**2)) / (math.pi * hbar), rel=1e-13)


def test_total_probability_by_quadrature():
    F = ground_state_distribution(OscillatorConfig(2.0, 3.0, 0.7))
    L = 12
    val, _ = integrate.dblquad(lambda p, x: F.pdf(x, p), -L * F.sigma_x, L * F.sigma_x,
                               -L * F.sigma_p, L * F.sigma_p, epsabs=1e-13, epsrel=1e-12)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_momentum_marginal_examples():
    F = ground_state_distribution(UNIT)
    assert momentum_marginal(F, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)
    assert momentum_marginal(F, 1.0) == pytest.approx(0.2075537487, abs=1e-10)
    oracle, _ = integrate.quad(lambda x: F.pdf(x, 1.0), -np.inf, np.inf, epsabs=1e-14)
    assert momentum_marginal(F, 1.0) == pytest.approx(oracle, abs=1e-12)
    total, _ = integrate.quad(lambda p: momentum_marginal(F, p), -np.inf, np.inf)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_momentum_marginal_closed_form():
    cfg = OscillatorConfig(2.0, 3.0, 0.7)
    F = ground_state_distribution(cfg)
    a, hb = cfg.alpha, cfg.hbar
    p = np.linspace(-5, 5, 41)
    np.testing.assert_allclose(momentum_marginal(F, p),
                               np.exp(-p * p / (a * hb * hb)) / (math.sqrt(math.pi * a) * hb), rtol=1e-13)
    np.testing.assert_allclose(momentum_marginal(F, p), momentum_density(QuantumState(0, cfg), p), rtol=1e-13)


def test_position_marginal_is_quantum_density():
    xs = np.random.default_rng(5).uniform(-4, 4, 100)
    for cfg in (UNIT, OscillatorConfig(2.0, 3.0, 0.7)):
        F = ground_state_distribution(cfg)
        np.testing.assert_allclose(position_marginal(F, xs), density(QuantumState(0, cfg), xs), rtol=1e-12, atol=0)
    assert position_marginal(ground_state_distribution(UNIT), 0.0) == pytest.approx(1 / math.sqrt(math.pi))


def numeric_classical_tail(F, p0):
    # 2 * int_{p0}^inf int F(x, p) dx dp, nested adaptive quadrature
    inner = lambda p: integrate.quad(lambda x: F.pdf(x, p), -np.inf, np.inf, epsabs=1e-15)[0]
    val, _ = integrate.quad(inner, p0, np.inf, epsabs=1e-14)
    return 2 * val


@pytest.mark.parametrize("p0, expected", [(math.sqrt(2), 0.0455002639), (1.0, 0.1572992071)])
def test_classical_tail_examples(p0, expected):
    F = ground_state_distribution(UNIT)
    assert classical_tail_probability(F, p0) == pytest.approx(expected, abs=1e-9)
    assert numeric_classical_tail(F, p0) == pytest.approx(expected, abs=1e-9)


def test_classical_tail_limits_and_errors():
    F = ground_state_distribution(UNIT)
    assert classical_tail_probability(F, 1e-14) == pytest.approx(1.0, abs=1e-13)
    with pytest.raises(ValueError):
        classical_tail_probability(F, 0.0)
    ps = np.linspace(0.01, 8, 200)
    vals = [classical_tail_probability(F, p) for p in ps]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_check_equivalence_examples():
    rep = check_equivalence(UNIT, 1.0)
    assert rep.residual == 0.0
    assert rep.pr_quantum == pytest.approx(0.0455002639, abs=1e-9)
    assert rep.pr_classical == pytest.approx(rep.pr_quantum, rel=1e-12)
    rep = check_equivalence(OscillatorConfig(2.0, 3.0, 1.0), 0.7)
    assert rep.relative_residual <= 1e-12
    assert rep.pr_quantum == pytest.approx(rep.pr_classical, rel=1e-12)
    rep = check_equivalence(UNIT, 0.5)
    assert (rep.pr_quantum, rep.pr_classical) == pytest.approx((0.1572992071, 0.1572992071), abs=1e-9)
    with pytest.raises(ValueError):
        check_equivalence(UNIT, 0.0)


@settings(max_examples=1000, deadline=None)
@given(log_uniform, log_uniform, log_uniform, log_uniform)
def test_equivalence_identity_random_configs(m, C, hbar, H0):
    rep = check_equivalence(OscillatorConfig(m, C, hbar), H0)
    assert rep.relative_residual <= 1e-12
    assert rep.holds()


def test_wigner_examples():
    st0 = QuantumState(0, UNIT)
    assert wigner_transform(st0, [0.0], [0.0])[0, 0] == pytest.approx(1 / math.pi, rel=1e-15)
    g = np.linspace(-4, 4, 101)
    W = wigner_transform(st0, g, g)
    X, P = np.meshgrid(g, g, indexing="ij")
    assert np.abs(W - ground_state_distribution(UNIT).pdf(X, P)).max() <= 1e-10
    assert wigner_transform(QuantumState(1, UNIT), [0.0], [0.0])[0, 0] == pytest.approx(-1 / math.pi, abs=1e-12)


def test_wigner_origin_by_direct_integral():
    # real-axis integral without the contour shift used in the implementation
    for n in range(4):
        st = QuantumState(n, UNIT)
        val, _ = integrate.quad(lambda y: eigenfunction(st, y) * eigenfunction(st, -y), -np.inf, np.inf,
                                epsabs=1e-13)
        assert wigner_transform(st, [0.0], [0.0])[0, 0] == pytest.approx(val / math.pi, abs=1e-10)


@pytest.mark.parametrize("n", range(7))
def test_wigner_matches_laguerre_form(n):
    cfg = OscillatorConfig(2.0, 3.0, 0.7)
    F = ground_state_distribution(cfg)
    x = np.linspace(-5, 5, 31) * F.sigma_x
    p = np.linspace(-5, 5, 29) * F.sigma_p
    X, P = np.meshgrid(x, p, indexing="ij")
    np.testing.assert_allclose(wigner_transform(QuantumState(n, cfg), x, p), laguerre_wigner(n, cfg, X, P),
                               atol=1e-12 / cfg.hbar)


@pytest.mark.parametrize("n", range(6))
def test_wigner_marginals(n):
    cfg = OscillatorConfig(2.0, 3.0, 0.7)
    st = QuantumState(n, cfg)
    x = np.linspace(-12, 12, 481) / math.sqrt(cfg.alpha)
    p = np.linspace(-12, 12, 481) * math.sqrt(cfg.alpha) * cfg.hbar
    mx, mp = wigner_marginals(wigner_transform(st, x, p), x, p)
    np.testing.assert_allclose(mx, density(st, x), atol=1e-8)
    np.testing.assert_allclose(mp, momentum_density(st, p), atol=1e-8)


def test_wigner_negative_for_excited_states():
    g = np.linspace(-3, 3, 61)
    for n in range(1, 6):
        assert wigner_transform(QuantumState(n, UNIT), g, g).min() < 0
    assert wigner_transform(QuantumState(0, UNIT), g, g).min() > 0


def test_wigner_independent_of_evaluation_order():
    st = QuantumState(3, UNIT)
    x = np.linspace(-3, 3, 300)  # spans more than one row block
    p = np.linspace(-2, 2, 7)
    W = wigner_transform(st, x, p)
    W_rev = wigner_transform(st, x[::-1], p[::-1])
    np.testing.assert_array_equal(W, W_rev[::-1, ::-1])
    np.testing.assert_array_equal(W[123:124], wigner_transform(st, x[123:124], p))


@pytest.mark.parametrize("xg, pg", [([], [0.0]), ([0.0], []), ([0.0, 1.0, 3.0], [0.0]), ([np.inf], [0.0])])
def test_wigner_rejects_bad_grids(xg, pg):
    with pytest.raises(ValueError):
        wigner_transform(QuantumState(0, UNIT), xg, pg)
