"""Numerical tolerances and fixed algorithm constants shared by every module."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields


@dataclass(frozen=True)
class Tolerances:
    # specfun
    quadrature_newton: float = 1e-14
    max_quadrature_order: int = 128
    # oscillator
    max_quantum_number: int = 128
    tail_quadrature: float = 1e-9
    # phasespace
    equivalence_residual: float = 1e-12
    # ensemble
    stderr_band: float = 4.0
    mc_chunk: int = 1 << 16
    # barrier
    barrier_convergence: float = 1e-9
    max_slices: int = 1 << 16
    min_slices: int = 1 << 6
    flux: float = 1e-10

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Tolerances":
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise KeyError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
        kw = {}
        for name, value in data.items():
            default = getattr(cls, name)
            kw[name] = int(value) if isinstance(default, int) else float(value)
        return cls(**kw)


DEFAULT_TOLERANCES = Tolerances()


class ConvergenceError(ArithmeticError):
    """A numerical procedure failed to reach its configured tolerance."""
