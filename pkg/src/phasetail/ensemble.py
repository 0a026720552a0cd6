"""Monte Carlo realisation of the phase-space ensemble.

Particles are drawn from a :class:`~phasetail.phasespace.PhaseSpaceGaussian`,
advanced with the exact harmonic flow, and counted beyond the turning point
(in x) or above the threshold momentum (in |p|).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES
from .oscillator import h0_paper, turning_points
from .phasespace import PhaseSpaceGaussian, classical_tail_probability, position_tail_probability
from .rng import normal_pairs

__all__ = [
    "EnsembleSample",
    "TailReport",
    "StationarityReport",
    "sample",
    "evolve",
    "energies",
    "mean_energy",
    "tail_fractions",
    "stationarity_check",
    "tail_error_scaling",
    "write_sample_csv",
]


@dataclass(frozen=True, eq=False)
class EnsembleSample:
    points: np.ndarray  # shape (N, 2): columns x, p
    seed: int
    source: PhaseSpaceGaussian
    t: float = 0.0

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def p(self) -> np.ndarray:
        return self.points[:, 1]


def _band_z(observed: float, expected: float, n: int) -> float:
    se = math.sqrt(expected * (1.0 - expected) / n)
    diff = abs(observed - expected)
    if se == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / se


@dataclass(frozen=True)
class TailReport:
    pr_q_analytic: float
    pr_cl_analytic: float
    frac_beyond_x: float
    stderr_x: float
    frac_beyond_p: float
    stderr_p: float
    n_samples: int
    seed: int
    x_ret: float
    p0: float
    t: float = 0.0

    @property
    def z_x(self) -> float:
        """Deviation of the position fraction in binomial standard errors (analytic p)."""
        return _band_z(self.frac_beyond_x, self.pr_q_analytic, self.n_samples)

    @property
    def z_p(self) -> float:
        return _band_z(self.frac_beyond_p, self.pr_cl_analytic, self.n_samples)

    @property
    def z_joint(self) -> float:
        n = self.n_samples
        se = math.sqrt((self.pr_q_analytic * (1 - self.pr_q_analytic)
                        + self.pr_cl_analytic * (1 - self.pr_cl_analytic)) / n)
        diff = abs(self.frac_beyond_x - self.frac_beyond_p)
        if se == 0.0:
            return 0.0 if diff == 0.0 else math.inf
        return diff / se

    def within_bands(self, k: float = DEFAULT_TOLERANCES.stderr_band) -> bool:
        return self.z_x <= k and self.z_p <= k and self.z_joint <= k

    def as_dict(self) -> dict:
        return {
            "pr_q_analytic": self.pr_q_analytic,
            "pr_cl_analytic": self.pr_cl_analytic,
            "frac_beyond_x": self.frac_beyond_x,
            "stderr_x": self.stderr_x,
            "frac_beyond_p": self.frac_beyond_p,
            "stderr_p": self.stderr_p,
            "z_x": self.z_x,
            "z_p": self.z_p,
            "z_joint": self.z_joint,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "x_ret": self.x_ret,
            "p0": self.p0,
            "t": self.t,
        }


@dataclass(frozen=True)
class StationarityReport:
    rows: list = field(default_factory=list)
    max_deviation: float = 0.0
    band: float = DEFAULT_TOLERANCES.stderr_band

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.band


def sample(F: PhaseSpaceGaussian, n: int, seed: int, workers: int = 1,
           chunk: int | None = None) -> EnsembleSample:
    """Draw n i.i.d. points x ~ N(0, sigma_x^2), p ~ N(0, sigma_p^2)."""
    if int(n) < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    z = normal_pairs(seed, n, chunk=chunk, workers=workers)
    z *= np.array([F.sigma_x, F.sigma_p])
    return EnsembleSample(points=z, seed=int(seed), source=F)


def evolve(s: EnsembleSample, t: float) -> EnsembleSample:
    """Advance every particle along the exact harmonic-oscillator flow for time t."""
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t!r}")
    cfg = s.source.config
    w = cfg.omega
    mw = cfg.m * w
    c, sn = math.cos(w * t), math.sin(w * t)
    x, p = s.x, s.p
    pts = np.column_stack((x * c + (p / mw) * sn, p * c - (mw * sn) * x))
    return EnsembleSample(points=pts, seed=s.seed, source=s.source, t=s.t + t)


def energies(s: EnsembleSample) -> np.ndarray:
    return s.source.config.hamiltonian(s.x, s.p)


def mean_energy(s: EnsembleSample) -> tuple[float, float]:
    """Sample mean of the Hamiltonian and its standard error."""
    e = energies(s)
    return float(e.mean()), float(e.std(ddof=1) / math.sqrt(e.size)) if e.size > 1 else 0.0


def tail_fractions(s: EnsembleSample, x_ret: float, p0: float) -> TailReport:
    if s.size == 0:
        raise ValueError("empty sample")
    if not (x_ret > 0 and p0 > 0):
        raise ValueError("x_ret and p0 must be positive")
    n = s.size
    fx = np.count_nonzero(np.abs(s.x) > x_ret) / n
    fp = np.count_nonzero(np.abs(s.p) > p0) / n
    return TailReport(
        pr_q_analytic=position_tail_probability(s.source, x_ret),
        pr_cl_analytic=classical_tail_probability(s.source, p0),
        frac_beyond_x=fx,
        stderr_x=math.sqrt(fx * (1 - fx) / n),
        frac_beyond_p=fp,
        stderr_p=math.sqrt(fp * (1 - fp) / n),
        n_samples=n,
        seed=s.seed,
        x_ret=x_ret,
        p0=p0,
        t=s.t,
    )


def stationarity_check(F: PhaseSpaceGaussian, n: int, seed: int, times, x_ret: float | None = None,
                       p0: float | None = None) -> StationarityReport:
    """Evolve one sample to each time and compare tails and variances with the t = 0 analytics.

    Thresholds default to the turning point and momentum of H0 = hbar C / sqrt(m).
    Variances are compared in units of their large-N standard error sigma^2 sqrt(2/N).
    """
    if int(n) < 10_000:
        raise ValueError("stationarity check needs n >= 10^4")
    if x_ret is None or p0 is None:
        tp = turning_points(h0_paper(F.config), F.config)
        x_ret = tp.x_ret if x_ret is None else x_ret
        p0 = tp.p0 if p0 is None else p0
    s0 = sample(F, n, seed)
    var_se = math.sqrt(2.0 / n)
    rows = []
    worst = 0.0
    for t in times:
        st = evolve(s0, float(t))
        rep = tail_fractions(st, x_ret, p0)
        zvx = abs(float(np.var(st.x)) / F.sigma_x**2 - 1.0) / var_se
        zvp = abs(float(np.var(st.p)) / F.sigma_p**2 - 1.0) / var_se
        row = {
            "t": float(t),
            "frac_beyond_x": rep.frac_beyond_x,
            "frac_beyond_p": rep.frac_beyond_p,
            "z_x": rep.z_x,
            "z_p": rep.z_p,
            "z_var_x": zvx,
            "z_var_p": zvp,
        }
        rows.append(row)
        worst = max(worst, rep.z_x, rep.z_p, zvx, zvp)
    return StationarityReport(rows=rows, max_deviation=worst)


def tail_error_scaling(F: PhaseSpaceGaussian, sizes, seeds, p0: float) -> tuple[np.ndarray, float]:
    """Seed-averaged |empirical - analytic| momentum-tail error per sample size, and the log-log slope."""
    sizes = np.asarray(sizes, dtype=int)
    analytic = classical_tail_probability(F, p0)
    errs = np.empty(sizes.size)
    for i, size in enumerate(sizes):
        e = []
        for seed in seeds:
            s = sample(F, int(size), int(seed))
            e.append(abs(np.count_nonzero(np.abs(s.p) > p0) / size - analytic))
        errs[i] = np.mean(e)
    slope = float(np.polyfit(np.log(sizes), np.log(errs), 1)[0])
    return errs, slope


def write_sample_csv(s: EnsembleSample, fh) -> None:
    """Write x, p rows preceded by '#' header lines recording seed, source and time."""
    meta = {"seed": s.seed, "size": s.size, "t": s.t, **s.source.describe()}
    for k, v in meta.items():
        fh.write(f"# {k}={v!r}\n" if isinstance(v, float) else f"# {k}={v}\n")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["x", "p"])
    for x, p in s.points:
        w.writerow([f"{x:.17g}", f"{p:.17g}"])
