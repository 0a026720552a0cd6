"""End-to-end acceptance checks, shared by ``phasetail check`` and the test suite.

Each criterion returns a :class:`CriterionResult`; ``passed`` includes the
wall-clock budget.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .barrier import (
    converged_transmission,
    smooth_profile,
    square_profile,
    square_transmission,
    transfer_matrix,
)
from .ensemble import sample, stationarity_check, tail_error_scaling, tail_fractions
from .oscillator import (
    OscillatorConfig,
    QuantumState,
    density,
    eigenfunction,
    h0_ground,
    h0_paper,
    quantum_tail_probability,
    turning_points,
)
from .phasespace import PhaseSpaceGaussian, check_equivalence, ground_state_distribution, wigner_transform
from .specfun import gauss_hermite

# 1 - erf(sqrt 2) and 1 - erf(1), from a 50-digit Maclaurin sum (see tests/test_specfun.py)
PR_PAPER = 0.0455002639
PR_GROUND = 0.1572992071


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    elapsed: float
    budget: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={_fmt(v)}" for k, v in self.details.items())
        return f"[{status}] {self.number}. {self.name} ({self.elapsed:.2f}s / {self.budget:.0f}s) {info}"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def _timed(number, name, budget):
    def deco(fn):
        def run() -> CriterionResult:
            t0 = time.perf_counter()
            ok, details = fn()
            elapsed = time.perf_counter() - t0
            return CriterionResult(number, name, bool(ok) and elapsed < budget, elapsed, budget, details)

        run.__name__ = fn.__name__
        run.number = number
        return run

    return deco


def _log_uniform(rng, n, lo=1e-2, hi=1e2):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


@_timed(1, "equivalence identity over 1000 random configs", 1.0)
def equivalence_identity():
    rng = np.random.default_rng(20240601)
    m, C, hbar, H0 = (_log_uniform(rng, 1000) for _ in range(4))
    worst_gap = 0.0
    worst_res = 0.0
    for i in range(1000):
        rep = check_equivalence(OscillatorConfig(float(m[i]), float(C[i]), float(hbar[i])), float(H0[i]))
        scale = max(rep.pr_quantum, rep.pr_classical)
        gap = rep.probability_gap / scale if scale > 0 else 0.0
        worst_gap = max(worst_gap, gap)
        worst_res = max(worst_res, rep.relative_residual)
    return worst_gap <= 1e-12 and worst_res <= 1e-12, {"max_rel_gap": worst_gap, "max_rel_residual": worst_res}


def _direct_tail(state, x_ret):
    val, _ = integrate.quad(lambda x: density(state, x), x_ret, math.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 2.0 * val


@_timed(2, "headline tail values under both H0 conventions", 1.0)
def headline_tail():
    cfg = OscillatorConfig()
    st = QuantumState(0, cfg)
    tp_paper = turning_points(h0_paper(cfg), cfg)
    tp_ground = turning_points(h0_ground(cfg), cfg)
    pq_paper = quantum_tail_probability(st, tp_paper.x_ret)
    pq_ground = quantum_tail_probability(st, tp_ground.x_ret)
    quad_paper = _direct_tail(st, tp_paper.x_ret)
    quad_ground = _direct_tail(st, tp_ground.x_ret)
    errs = {
        "paper_err": abs(pq_paper - PR_PAPER),
        "paper_quad_err": abs(quad_paper - pq_paper),
        "ground_err": abs(pq_ground - PR_GROUND),
        "ground_quad_err": abs(quad_ground - pq_ground),
    }
    return all(v <= 1e-9 for v in errs.values()), {"pr_paper": pq_paper, "pr_ground": pq_ground, **errs}


@_timed(3, "Monte Carlo tail fractions, N=1e6", 10.0)
def monte_carlo_tails():
    cfg = OscillatorConfig()
    F = ground_state_distribution(cfg)
    tp = turning_points(h0_paper(cfg), cfg)
    rep = tail_fractions(sample(F, 1_000_000, seed=0), tp.x_ret, tp.p0)
    ok = (abs(rep.frac_beyond_x - PR_PAPER) <= 4 * math.sqrt(PR_PAPER * (1 - PR_PAPER) / rep.n_samples)
          and abs(rep.frac_beyond_p - PR_PAPER) <= 4 * math.sqrt(PR_PAPER * (1 - PR_PAPER) / rep.n_samples)
          and rep.z_joint <= 4.0)
    return ok, {"frac_x": rep.frac_beyond_x, "frac_p": rep.frac_beyond_p, "z_x": rep.z_x, "z_p": rep.z_p,
                "z_joint": rep.z_joint}


@_timed(4, "Liouville stationarity with negative control", 30.0)
def liouville_stationarity():
    cfg = OscillatorConfig()
    F = ground_state_distribution(cfg)
    period = 2 * math.pi / cfg.omega
    times = np.random.default_rng(4).uniform(0.0, 10 * period, 10)
    good = stationarity_check(F, 1_000_000, seed=1, times=times)
    bad_F = PhaseSpaceGaussian(F.sigma_x, 2 * cfg.m * cfg.omega * F.sigma_x, cfg)
    bad = stationarity_check(bad_F, 1_000_000, seed=1, times=[math.pi / (2 * cfg.omega)])
    return good.passed and not bad.passed, {"ground_max_z": good.max_deviation,
                                            "control_max_z": bad.max_deviation}


def _wigner_origin_oracle(state):
    # real-axis Wigner integral at (0, 0), no contour shift
    hb = state.config.hbar
    val, _ = integrate.quad(lambda y: eigenfunction(state, y) * eigenfunction(state, -y), -math.inf, math.inf,
                            epsabs=1e-13, epsrel=1e-12)
    return val / (math.pi * hb)


@_timed(5, "Wigner field consistency", 10.0)
def wigner_consistency():
    cfg = OscillatorConfig()
    F = ground_state_distribution(cfg)
    x = np.linspace(-4, 4, 101) * F.sigma_x
    p = np.linspace(-4, 4, 101) * F.sigma_p
    st0 = QuantumState(0, cfg)
    W = wigner_transform(st0, x, p)
    X, P = np.meshgrid(x, p, indexing="ij")
    dev = float(np.abs(W - F.pdf(X, P)).max())
    p_wide = np.linspace(-14, 14, 561) * F.sigma_p
    marg = np.trapezoid(wigner_transform(st0, x, p_wide), p_wide, axis=1)
    marg_dev = float(np.abs(marg - density(st0, x)).max())
    st1 = QuantumState(1, cfg)
    w1 = float(wigner_transform(st1, [0.0], [0.0])[0, 0])
    w1_oracle = _wigner_origin_oracle(st1)
    target = -1.0 / (math.pi * cfg.hbar)
    ok = dev <= 1e-10 and marg_dev <= 1e-8 and abs(w1 - target) <= 1e-8 and abs(w1_oracle - target) <= 1e-8
    return ok, {"max_dev_F0": dev, "marginal_dev": marg_dev, "W1_origin": w1, "W1_oracle": w1_oracle}


@_timed(6, "eigenfunction normalization and orthogonality, n<=20", 5.0)
def oscillator_hygiene():
    cfg = OscillatorConfig(2.0, 3.0, 0.7)
    rule = gauss_hermite(64)
    sa = math.sqrt(cfg.alpha)
    xs = rule.nodes / sa
    wts = rule.weights * np.exp(rule.nodes**2) / sa
    psi = np.array([eigenfunction(QuantumState(n, cfg), xs) for n in range(21)])
    gram = (psi * wts) @ psi.T
    norm_err = float(np.abs(np.diag(gram) - 1.0).max())
    off = gram - np.diag(np.diag(gram))
    orth_err = float(np.abs(off).max())
    return norm_err <= 1e-8 and orth_err <= 1e-8, {"norm_err": norm_err, "orth_err": orth_err}


@_timed(7, "smooth barrier recovers square limit", 30.0)
def barrier_limit():
    V0, b, c, E = 1.0, 0.0, 1.0, 0.5
    t_sq = square_transmission(V0, b, c, E)
    flux = [t_sq.flux_error]
    devs = []
    for k in range(1, 9):
        res = converged_transmission(smooth_profile(V0, b, c, (c - b) / 2**k), E)
        flux.append(res.flux_error)
        devs.append(abs(res.T - t_sq.T))
    decreasing = all(d2 < d1 for d1, d2 in zip(devs, devs[1:]))
    tm_err = 0.0
    for e in (0.1, 0.5, 0.9, 1.0, 1.7, 5.0):
        ref = square_transmission(V0, b, c, e)
        flux.append(ref.flux_error)
        for n in (1, 2, 16, 256):
            r = transfer_matrix(square_profile(V0, b, c), e, slices=n)
            flux.append(r.flux_error)
            tm_err = max(tm_err, abs(r.T - ref.T))
    ok = devs[-1] <= 1e-4 and decreasing and max(flux) <= 1e-10 and tm_err <= 1e-12
    return ok, {"final_dev": devs[-1], "decreasing": decreasing, "max_flux_err": max(flux), "tm_vs_closed": tm_err}


@_timed(8, "Monte Carlo error scaling slope", 60.0)
def mc_convergence_slope():
    cfg = OscillatorConfig()
    F = ground_state_distribution(cfg)
    tp = turning_points(h0_paper(cfg), cfg)
    _, slope = tail_error_scaling(F, [10**3, 10**4, 10**5, 10**6], range(20), tp.p0)
    return abs(slope + 0.5) <= 0.15, {"slope": slope}


CRITERIA = [
    equivalence_identity,
    headline_tail,
    monte_carlo_tails,
    liouville_stationarity,
    wigner_consistency,
    oscillator_hygiene,
    barrier_limit,
    mc_convergence_slope,
]


def run_all(selected=None) -> list[CriterionResult]:
    return [crit() for crit in CRITERIA if selected is None or crit.number in selected]
