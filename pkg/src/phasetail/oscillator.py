"""Quantum harmonic oscillator V(x) = C^2 x^2 / 2: spectrum, eigenfunctions,
densities, classical turning points and the probability mass beyond them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, ConvergenceError
from .specfun import erfc, gauss_legendre, hermite_function

__all__ = [
    "OscillatorConfig",
    "QuantumState",
    "TurningPoints",
    "energy",
    "eigenfunction",
    "density",
    "momentum_density",
    "turning_points",
    "quantum_tail_probability",
    "h0_paper",
    "h0_ground",
]


@dataclass(frozen=True)
class OscillatorConfig:
    """Physical parameters (mass, stiffness, reduced Planck constant).

    The stiffness C enters the potential as C^2 x^2 / 2, so the angular
    frequency is C / sqrt(m) and the inverse squared length scale is
    alpha = C sqrt(m) / hbar.
    """

    m: float = 1.0
    C: float = 1.0
    hbar: float = 1.0
    omega: float = field(init=False, repr=False)
    nu: float = field(init=False, repr=False)
    alpha: float = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("m", "C", "hbar"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        object.__setattr__(self, "omega", self.C / math.sqrt(self.m))
        object.__setattr__(self, "nu", self.omega / (2.0 * math.pi))
        object.__setattr__(self, "alpha", self.C * math.sqrt(self.m) / self.hbar)

    @property
    def h(self) -> float:
        return 2.0 * math.pi * self.hbar

    def potential(self, x):
        return 0.5 * self.C**2 * np.asarray(x) ** 2

    def hamiltonian(self, x, p):
        x = np.asarray(x)
        p = np.asarray(p)
        return p * p / (2.0 * self.m) + 0.5 * self.C**2 * x * x


@dataclass(frozen=True)
class QuantumState:
    n: int
    config: OscillatorConfig = OscillatorConfig()

    def __post_init__(self):
        cap = DEFAULT_TOLERANCES.max_quantum_number
        if not (isinstance(self.n, (int, np.integer)) and 0 <= self.n <= cap):
            raise ValueError(f"quantum number must be an integer in [0, {cap}], got {self.n!r}")


@dataclass(frozen=True)
class TurningPoints:
    x_ret: float
    H0: float
    p0: float


def h0_paper(config: OscillatorConfig) -> float:
    """Reference energy hbar*C/sqrt(m) used for the headline turning point (twice E_0)."""
    return config.hbar * config.C / math.sqrt(config.m)


def h0_ground(config: OscillatorConfig) -> float:
    return energy(0, config)


def energy(n: int, config: OscillatorConfig) -> float:
    """E_n = (n + 1/2) h nu."""
    if n < 0:
        raise ValueError(f"quantum number must be non-negative, got {n}")
    return (n + 0.5) * config.h * config.nu


def eigenfunction(state: QuantumState, x):
    """psi_n(x) = (sqrt(alpha) / (sqrt(pi) 2^n n!))^{1/2} exp(-alpha x^2 / 2) H_n(sqrt(alpha) x)."""
    a = state.config.alpha
    return a**0.25 * hermite_function(state.n, math.sqrt(a) * np.asarray(x, dtype=float))


def density(state: QuantumState, x):
    if state.n == 0:
        a = state.config.alpha
        x = np.asarray(x, dtype=float)
        out = math.sqrt(a / math.pi) * np.exp(-a * x * x)
        return out[()] if out.ndim == 0 else out
    psi = eigenfunction(state, x)
    return psi * psi


def momentum_density(state: QuantumState, p):
    """|phi_n(p)|^2 for the momentum-space eigenfunction; width scale sqrt(alpha)*hbar."""
    s = math.sqrt(state.config.alpha) * state.config.hbar
    phi = hermite_function(state.n, np.asarray(p, dtype=float) / s)
    return phi * phi / s


def turning_points(H0: float, config: OscillatorConfig) -> TurningPoints:
    if not (math.isfinite(H0) and H0 > 0):
        raise ValueError(f"H0 must be positive, got {H0!r}")
    return TurningPoints(
        x_ret=math.sqrt(2.0 * H0) / config.C,
        H0=H0,
        p0=math.sqrt(2.0 * config.m * H0),
    )


_PANEL_WIDTH = 0.5
_PANEL_ORDER = 24
_TAIL_SPAN = 12.0


def _scaled_tail(n: int, y0: float, order: int) -> float:
    # 2 * int_{y0}^{inf} h_n(y)^2 dy; the density is below e^{-_TAIL_SPAN^2} past the last panel
    upper = max(y0, math.sqrt(2 * n + 1)) + _TAIL_SPAN
    panels = max(1, math.ceil((upper - y0) / _PANEL_WIDTH))
    rule = gauss_legendre(order)
    edges = np.linspace(y0, upper, panels + 1)
    half = 0.5 * np.diff(edges)
    pts = 0.5 * (edges[:-1] + edges[1:])[:, None] + half[:, None] * rule.nodes[None, :]
    h = hermite_function(n, pts)
    return float(2.0 * np.sum(half * ((h * h) @ rule.weights)))


def quantum_tail_probability(state: QuantumState, x_ret: float) -> float:
    """Probability mass of |psi_n|^2 outside [-x_ret, x_ret].

    Ground state: 1 - erf(sqrt(alpha) x_ret). Excited states: composite
    Gauss-Legendre over the tail in the scaled variable sqrt(alpha) x, checked
    against a second evaluation with doubled node count.
    """
    if not (x_ret > 0):
        raise ValueError(f"x_ret must be positive, got {x_ret!r}")
    y0 = math.sqrt(state.config.alpha) * x_ret
    if state.n == 0:
        return float(erfc(y0))
    coarse = _scaled_tail(state.n, y0, _PANEL_ORDER)
    fine = _scaled_tail(state.n, y0, 2 * _PANEL_ORDER)
    if abs(fine - coarse) > DEFAULT_TOLERANCES.tail_quadrature:
        raise ConvergenceError(f"tail quadrature did not settle for n={state.n}: {coarse} vs {fine}")
    return min(1.0, max(0.0, fine))
