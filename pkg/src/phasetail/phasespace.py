"""Classical phase-space picture of the oscillator ground state.

The ground-state ensemble is the product Gaussian

    F0(x, p) = 1/(pi hbar) * exp(-alpha x^2 - p^2 / (alpha hbar^2)),

whose position marginal is the quantum density |psi_0|^2 and whose momentum
tail beyond p0 = sqrt(2 m H0) reproduces the quantum mass beyond the turning
point x_ret = sqrt(2 H0)/C. ``check_equivalence`` evaluates both sides.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES
from .oscillator import OscillatorConfig, QuantumState, quantum_tail_probability, turning_points
from .specfun import erfc, gauss_hermite, hermite

__all__ = [
    "PhaseSpaceGaussian",
    "EquivalenceReport",
    "ground_state_distribution",
    "momentum_marginal",
    "position_marginal",
    "classical_tail_probability",
    "position_tail_probability",
    "check_equivalence",
    "wigner_transform",
    "wigner_marginals",
]


@dataclass(frozen=True)
class PhaseSpaceGaussian:
    """Centred product Gaussian in (x, p) attached to an oscillator config."""

    sigma_x: float
    sigma_p: float
    config: OscillatorConfig

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.sigma_p > 0):
            raise ValueError("sigma_x and sigma_p must be positive")

    @property
    def norm(self) -> float:
        return 1.0 / (2.0 * math.pi * self.sigma_x * self.sigma_p)

    @property
    def stationarity_ratio(self) -> float:
        """sigma_p / (m omega sigma_x); equal to 1 iff the density is invariant under the flow."""
        c = self.config
        return self.sigma_p / (c.m * c.omega * self.sigma_x)

    def pdf(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        return self.norm * np.exp(-0.5 * (x / self.sigma_x) ** 2 - 0.5 * (p / self.sigma_p) ** 2)

    def describe(self) -> dict:
        c = self.config
        return {
            "sigma_x": self.sigma_x,
            "sigma_p": self.sigma_p,
            "m": c.m,
            "C": c.C,
            "hbar": c.hbar,
        }


@dataclass(frozen=True)
class EquivalenceReport:
    pr_quantum: float
    pr_classical: float
    lhs: float  # p0 / (sqrt(alpha) hbar)
    rhs: float  # sqrt(alpha) x_ret
    residual: float
    x_ret: float
    p0: float
    H0: float

    @property
    def relative_residual(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return self.residual / scale if scale else 0.0

    @property
    def probability_gap(self) -> float:
        return abs(self.pr_quantum - self.pr_classical)

    def holds(self, tol: float = DEFAULT_TOLERANCES.equivalence_residual) -> bool:
        scale = max(abs(self.pr_quantum), abs(self.pr_classical))
        return self.relative_residual <= tol and self.probability_gap <= tol * scale


def ground_state_distribution(config: OscillatorConfig) -> PhaseSpaceGaussian:
    a = config.alpha
    return PhaseSpaceGaussian(
        sigma_x=1.0 / math.sqrt(2.0 * a),
        sigma_p=math.sqrt(0.5 * a) * config.hbar,
        config=config,
    )


def momentum_marginal(F: PhaseSpaceGaussian, p):
    """Integral of F over x at fixed p."""
    p = np.asarray(p, dtype=float)
    out = np.exp(-0.5 * (p / F.sigma_p) ** 2) / (math.sqrt(2.0 * math.pi) * F.sigma_p)
    return out[()] if out.ndim == 0 else out


def position_marginal(F: PhaseSpaceGaussian, x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-0.5 * (x / F.sigma_x) ** 2) / (math.sqrt(2.0 * math.pi) * F.sigma_x)
    return out[()] if out.ndim == 0 else out


def classical_tail_probability(F: PhaseSpaceGaussian, p0: float) -> float:
    """Two-sided momentum tail P(|p| > p0) under F; 1 - erf(p0 / (sqrt(alpha) hbar)) for the ground state."""
    if not (p0 > 0):
        raise ValueError(f"p0 must be positive, got {p0!r}")
    return float(erfc(p0 / (math.sqrt(2.0) * F.sigma_p)))


def position_tail_probability(F: PhaseSpaceGaussian, x_ret: float) -> float:
    """Two-sided position tail P(|x| > x_ret) under F."""
    if not (x_ret > 0):
        raise ValueError(f"x_ret must be positive, got {x_ret!r}")
    return float(erfc(x_ret / (math.sqrt(2.0) * F.sigma_x)))


def check_equivalence(config: OscillatorConfig, H0: float) -> EquivalenceReport:
    """Quantum mass beyond +-x_ret versus classical ensemble fraction with |p| > p0."""
    tp = turning_points(H0, config)
    sa = math.sqrt(config.alpha)
    lhs = tp.p0 / (sa * config.hbar)
    rhs = sa * tp.x_ret
    pr_q = quantum_tail_probability(QuantumState(0, config), tp.x_ret)
    pr_cl = classical_tail_probability(ground_state_distribution(config), tp.p0)
    return EquivalenceReport(
        pr_quantum=pr_q,
        pr_classical=pr_cl,
        lhs=lhs,
        rhs=rhs,
        residual=abs(lhs - rhs),
        x_ret=tp.x_ret,
        p0=tp.p0,
        H0=H0,
    )


def _check_grid(g, name):
    g = np.atleast_1d(np.asarray(g, dtype=float))
    if g.ndim != 1 or g.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D grid")
    if not np.all(np.isfinite(g)):
        raise ValueError(f"{name} must be finite")
    if g.size > 2:
        d = np.diff(g)
        if not np.allclose(d, d[0], rtol=1e-9, atol=1e-12 * max(1.0, float(np.abs(g).max()))):
            raise ValueError(f"{name} must be uniform")
    return g


_WIGNER_ROW_BLOCK = 256


def wigner_transform(state: QuantumState, x_grid, p_grid) -> np.ndarray:
    """Wigner function W(x_i, p_j) = 1/(pi hbar) int psi(x+y) psi(x-y) exp(2ipy/hbar) dy.

    Completing the square in y moves the oscillating factor into a complex
    shift of the Hermite arguments; the remaining integrand is e^{-u^2} times a
    polynomial of degree 2n, which a Gauss-Hermite rule of order n+1
    integrates exactly. The ground state therefore reproduces F0 to rounding.
    Returns an array of shape (len(x_grid), len(p_grid)).
    """
    x = _check_grid(x_grid, "x_grid")
    p = _check_grid(p_grid, "p_grid")
    cfg = state.config
    n = state.n
    sa = math.sqrt(cfg.alpha)
    X = sa * x
    Q = p / (sa * cfg.hbar)
    rule = gauss_hermite(n + 1)
    u = rule.nodes
    log_norm = -0.5 * math.log(math.pi) - n * math.log(2.0) - math.lgamma(n + 1)
    pref = math.exp(log_norm) / (math.pi * cfg.hbar)
    gauss_q = np.exp(-Q * Q)

    out = np.empty((x.size, p.size))
    for start in range(0, x.size, _WIGNER_ROW_BLOCK):
        Xb = X[start:start + _WIGNER_ROW_BLOCK, None, None]
        z = 1j * Q[None, :, None] + u[None, None, :]
        s = np.real(hermite(n, Xb + z) * hermite(n, Xb - z)) @ rule.weights
        out[start:start + Xb.shape[0]] = pref * np.exp(-Xb[:, :, 0] ** 2) * gauss_q[None, :] * s
    return out


def wigner_marginals(W: np.ndarray, x_grid, p_grid) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid marginals of a gridded field: (density in x, density in p)."""
    x = np.asarray(x_grid, dtype=float)
    p = np.asarray(p_grid, dtype=float)
    return np.trapezoid(W, p, axis=1), np.trapezoid(W, x, axis=0)
