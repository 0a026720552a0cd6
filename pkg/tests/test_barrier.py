import math

import numpy as np
import pytest
from scipy import integrate

from phasetail.barrier import (
    classical_overbarrier_fraction,
    converged_transmission,
    smooth_profile,
    square_profile,
    square_transmission,
    transfer_matrix,
    width_convergence,
)
from phasetail.config import ConvergenceError
from phasetail.oscillator import OscillatorConfig
from phasetail.phasespace import ground_state_distribution


def ode_transmission(profile, E, m=1.0, hbar=1.0):
    """Oracle: integrate psi'' = 2m(V - E)/hbar^2 psi backwards from a pure transmitted wave."""
    k = math.sqrt(2 * m * E) / hbar
    knots = profile.knots
    hi = knots[-1]

    def rhs(x, y, v_at):
        psi = y[0] + 1j * y[1]
        dpsi = y[2] + 1j * y[3]
        dd = 2 * m * (float(profile(v_at(x))) - E) / hbar**2 * psi
        return [dpsi.real, dpsi.imag, dd.real, dd.imag]

    psi = np.exp(1j * k * hi)
    dpsi = 1j * k * psi
    y = [psi.real, psi.imag, dpsi.real, dpsi.imag]
    # one solve per knot interval, so the square edges are never stepped across
    for right, left in zip(knots[::-1][:-1], knots[::-1][1:]):
        mid = 0.5 * (left + right)
        v_at = (lambda x: x) if profile.kind == "smooth" else (lambda x, mid=mid: mid)
        sol = integrate.solve_ivp(rhs, (right, left), y, method="DOP853", rtol=1e-13, atol=1e-15,
                                  max_step=(right - left) / 50, args=(v_at,))
        y = sol.y[:, -1]
    lo = knots[0]
    psi = y[0] + 1j * y[1]
    dpsi = y[2] + 1j * y[3]
    A = 0.5 * (psi + dpsi / (1j * k)) * np.exp(-1j * k * lo)
    return 1.0 / abs(A) ** 2


def test_free_particle():
    res = square_transmission(0.0, 0.0, 1.0, 0.7)
    assert (res.T, res.R) == (1.0, 0.0)
    assert transfer_matrix(square_profile(0.0, 0.0, 1.0), 0.7, slices=5).T == pytest.approx(1.0, abs=1e-14)


def test_high_energy_transparent():
    assert square_transmission(1.0, 0.0, 1.0, 100.0).T == pytest.approx(1.0, abs=1e-3)


def test_square_closed_form_against_ode_oracle():
    prof = square_profile(1.0, 0.0, 1.0)
    T = square_transmission(1.0, 0.0, 1.0, 0.5).T
    assert T == pytest.approx(ode_transmission(prof, 0.5), abs=1e-8)
    assert transfer_matrix(prof, 0.5, slices=10_000).T == pytest.approx(T, abs=1e-8)
    for E in (0.2, 1.3, 2.9):
        assert square_transmission(1.0, 0.0, 1.0, E).T == pytest.approx(ode_transmission(prof, E), abs=1e-8)


def test_resonant_degenerate_energy():
    m, hbar, V0, a = 2.0, 0.5, 1.5, 0.8
    res = square_transmission(V0, 0.0, a, V0, m, hbar)
    assert res.T == pytest.approx(1 / (1 + m * V0 * a * a / (2 * hbar * hbar)), rel=1e-14)
    left = square_transmission(V0, 0.0, a, V0 * (1 - 1e-9), m, hbar).T
    right = square_transmission(V0, 0.0, a, V0 * (1 + 1e-9), m, hbar).T
    assert left == pytest.approx(res.T, abs=1e-8) and right == pytest.approx(res.T, abs=1e-8)


@pytest.mark.parametrize("E", [0.0, -1.0, math.nan])
def test_rejects_nonpositive_energy(E):
    with pytest.raises(ValueError):
        square_transmission(1.0, 0.0, 1.0, E)


def test_thick_barrier_no_overflow():
    res = square_transmission(1.0, 0.0, 400.0, 0.5)
    assert 0.0 <= res.T < 1e-300 and res.R == 1.0
    tm = transfer_matrix(square_profile(1.0, 0.0, 400.0), 0.5, slices=64)
    assert tm.R == pytest.approx(1.0, abs=1e-12) and np.isfinite(tm.T)
    mid = square_transmission(1.0, 0.0, 30.0, 0.5).T
    assert transfer_matrix(square_profile(1.0, 0.0, 30.0), 0.5, slices=64).T == pytest.approx(mid, rel=1e-10)


@pytest.mark.parametrize("slices", [1, 2, 3, 16, 256, 1000])
@pytest.mark.parametrize("E", [0.1, 0.5, 0.99, 1.0, 1.01, 2.2, 7.0])
def test_transfer_matrix_exact_on_square(slices, E):
    prof = square_profile(1.0, -0.3, 0.9)
    ref = square_transmission(1.0, -0.3, 0.9, E)
    res = transfer_matrix(prof, E, slices=slices)
    assert res.T == pytest.approx(ref.T, abs=1e-12)
    assert res.T + res.R == pytest.approx(1.0, abs=1e-10)


def test_regions_carry_plane_wave_coefficients():
    res = square_transmission(1.0, 0.0, 1.0, 0.5)
    left, inside, right = res.regions
    assert left.A == 1.0
    assert abs(left.B) ** 2 == pytest.approx(res.R, rel=1e-12)
    assert abs(right.A) ** 2 == pytest.approx(res.T, rel=1e-12)
    assert inside.k.real == 0.0 and inside.k.imag == pytest.approx(1.0)  # complex k inside the barrier

    # psi and psi' continuous at both edges
    def psi(r, x):
        return r.A * np.exp(1j * r.k * x) + r.B * np.exp(-1j * r.k * x)

    def dpsi(r, x):
        return 1j * r.k * (r.A * np.exp(1j * r.k * x) - r.B * np.exp(-1j * r.k * x))

    for a, b, x in ((left, inside, 0.0), (inside, right, 1.0)):
        assert psi(a, x) == pytest.approx(psi(b, x), abs=1e-12)
        assert dpsi(a, x) == pytest.approx(dpsi(b, x), abs=1e-12)

    tm = transfer_matrix(smooth_profile(1.0, 0.0, 1.0, 0.2), 0.5, slices=8, with_regions=True)
    assert abs(tm.regions[-1].A) ** 2 == pytest.approx(tm.T, rel=1e-10)
    assert abs(tm.regions[0].B) ** 2 == pytest.approx(tm.R, rel=1e-10)


def test_smooth_profile_shape():
    V0, b, c = 1.0, 0.0, 1.0
    prof = smooth_profile(V0, b, c, (c - b) / 10)
    assert prof(b) == pytest.approx(V0 / 2, abs=1e-15)
    assert prof(c) == pytest.approx(V0 / 2, abs=1e-15)
    assert prof.admissible and not square_profile(V0, b, c).admissible
    xs = np.linspace(-1, 2, 30001)
    v = prof(xs)
    assert v.min() >= 0.0 and v.max() <= V0
    for w in (0.5, 0.1, 0.01, 0.001):
        assert smooth_profile(V0, b, c, w)(0.5 * (b + c)) == pytest.approx(V0)
    assert smooth_profile(V0, b, c, 1e-4)(0.3) == V0 and smooth_profile(V0, b, c, 1e-4)(1.2) == 0.0


def test_smooth_profile_derivative_continuous_and_scaling():
    V0 = 2.0
    for w in (0.4, 0.1, 0.025):
        prof = smooth_profile(V0, 0.0, 1.0, w)
        xs = np.linspace(-0.5, 1.5, 200_001)
        d = prof.derivative(xs)
        assert np.abs(np.diff(d)).max() < 50 * V0 / w * (xs[1] - xs[0]) / w  # no jumps on the fine grid
        h = 1e-7
        fd = (prof(xs[::997] + h) - prof(xs[::997] - h)) / (2 * h)
        np.testing.assert_allclose(fd, d[::997], atol=1e-5 * V0 / w)
        assert np.abs(d).max() * w / V0 == pytest.approx(15 / 8, rel=1e-3)


def test_smooth_profile_rejects_bad_width():
    with pytest.raises(ValueError):
        smooth_profile(1.0, 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        smooth_profile(1.0, 1.0, 0.0, 0.1)


def test_smooth_transmission_against_ode_oracle():
    prof = smooth_profile(1.0, 0.0, 1.0, 0.3)
    res = converged_transmission(prof, 0.5)
    assert res.T == pytest.approx(ode_transmission(prof, 0.5), abs=1e-8)
    assert res.T + res.R == pytest.approx(1.0, abs=1e-10)


def test_self_convergence_in_slices():
    prof = smooth_profile(1.0, 0.0, 1.0, 0.2)
    Ts = [transfer_matrix(prof, 0.5, slices=2**k).T for k in range(6, 13)]
    deltas = np.abs(np.diff(Ts))
    assert np.all(deltas[1:] < deltas[:-1])
    ratios = deltas[:-1] / deltas[1:]
    np.testing.assert_allclose(ratios, 4.0, rtol=0.05)  # second-order midpoint slicing


def test_width_limit_recovers_square():
    widths = [1.0 / 2**k for k in range(1, 9)]
    rows = width_convergence(1.0, 0.0, 1.0, 0.5, widths)
    devs = [r["deviation"] for r in rows]
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert devs[-1] <= 1e-4
    assert all(abs(r["T_smooth"] + r["R_smooth"] - 1) <= 1e-10 for r in rows)


def test_transmission_increasing_below_barrier():
    Es = np.linspace(0.01, 0.99, 60)
    Ts = [square_transmission(1.0, 0.0, 1.0, E).T for E in Es]
    assert all(b > a for a, b in zip(Ts, Ts[1:]))


def test_flux_conservation_everywhere():
    for E in np.linspace(0.05, 3.0, 25):
        for res in (square_transmission(1.0, 0.0, 1.0, E),
                    transfer_matrix(smooth_profile(1.0, 0.0, 1.0, 0.1), E, slices=64),
                    converged_transmission(smooth_profile(1.0, 0.0, 1.0, 0.05), E)):
            assert abs(res.T + res.R - 1) <= 1e-10
            assert 0.0 <= res.T <= 1.0 + 1e-12


def test_convergence_failure_is_reported():
    with pytest.raises(ConvergenceError):
        converged_transmission(smooth_profile(50.0, 0.0, 1.0, 0.5), 10.0, tol=1e-15, max_slices=128)


def test_classical_overbarrier_fraction():
    F = ground_state_distribution(OscillatorConfig())
    assert classical_overbarrier_fraction(F, 1.0) == pytest.approx(0.0455002639, abs=1e-9)
    assert classical_overbarrier_fraction(F, 1e-16) == pytest.approx(1.0, abs=1e-7)
    assert classical_overbarrier_fraction(F, 1e4) == 0.0
    assert classical_overbarrier_fraction(F, math.inf) == 0.0
    oracle, _ = integrate.quad(lambda p: np.exp(-p * p) / math.sqrt(math.pi), math.sqrt(2), np.inf, epsabs=1e-14)
    assert classical_overbarrier_fraction(F, 1.0) == pytest.approx(2 * oracle, abs=1e-12)
    with pytest.raises(ValueError):
        classical_overbarrier_fraction(F, 0.0)
