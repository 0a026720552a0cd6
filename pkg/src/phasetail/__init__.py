"""Harmonic-oscillator tails as classical ensemble statistics, plus barrier scattering."""

from .barrier import (
    PotentialProfile,
    ScatteringResult,
    classical_overbarrier_fraction,
    converged_transmission,
    smooth_profile,
    square_profile,
    square_transmission,
    transfer_matrix,
)
from .config import DEFAULT_TOLERANCES, ConvergenceError, Tolerances
from .ensemble import EnsembleSample, TailReport, evolve, sample, stationarity_check, tail_fractions
from .oscillator import (
    OscillatorConfig,
    QuantumState,
    TurningPoints,
    density,
    eigenfunction,
    energy,
    quantum_tail_probability,
    turning_points,
)
from .phasespace import (
    EquivalenceReport,
    PhaseSpaceGaussian,
    check_equivalence,
    classical_tail_probability,
    ground_state_distribution,
    momentum_marginal,
    position_marginal,
    wigner_transform,
)
from .specfun import QuadratureRule, erf, erfc, gauss_hermite, gaussian_tail, hermite

__version__ = "0.1.0"
