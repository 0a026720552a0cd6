"""Command-line front end.

\b
    phasetail tail                      # pr^Q, pr^cl and the equivalence residual
    phasetail ensemble --periods 0,0.25,1
    phasetail barrier --energies 0.1:3:30 --format json
    phasetail wigner --n 1 --out w1.csv
    phasetail check                     # acceptance criteria

\b
Settings resolve as config file < PHASETAIL_* environment < flags.
Exit codes: 0 ok, 1 invalid input, 2 numerical non-convergence, 3 result outside tolerance.
"""

from __future__ import annotations

import functools
import math
import sys

import click
import numpy as np

from . import acceptance
from .barrier import energy_sweep, square_transmission, width_convergence
from .config import ConvergenceError
from .ensemble import evolve, mean_energy, sample, stationarity_check, tail_fractions, write_sample_csv
from .oscillator import QuantumState, energy, h0_ground, h0_paper, turning_points
from .phasespace import check_equivalence, ground_state_distribution, wigner_transform
from .runconfig import ConfigError, RunConfig, apply_env, load_config, write_document

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED, EXIT_OUT_OF_TOLERANCE = 0, 1, 2, 3


class Outcome(Exception):
    def __init__(self, code: int):
        self.code = code


def _parse_h0(value):
    if value is None or value in ("paper", "ground"):
        return value
    try:
        v = float(value)
    except ValueError:
        raise click.BadParameter("expected 'paper', 'ground' or a positive number") from None
    if not v > 0:
        raise click.BadParameter("explicit H0 must be positive")
    return value


def common_options(fn):
    @click.option("--config", "config_path", type=click.Path(dir_okay=False), help="INI run config.")
    @click.option("--seed", type=int, help="RNG seed (unsigned 64-bit).")
    @click.option("--samples", "n_samples", type=int, help="Ensemble size.")
    @click.option("--h0", callback=lambda ctx, p, v: _parse_h0(v), help="paper | ground | VALUE")
    @click.option("--m", type=float, help="Mass (switches to explicit units).")
    @click.option("--C", "C", type=float, help="Stiffness, V = C^2 x^2 / 2.")
    @click.option("--hbar", type=float, help="Reduced Planck constant.")
    @click.option("--out", type=click.Path(dir_okay=False), help="Output file (default stdout).")
    @click.option("--format", "output", type=click.Choice(["csv", "json"]), help="Output format.")
    @functools.wraps(fn)
    def wrapper(config_path, seed, n_samples, h0, m, C, hbar, out, output, **kw):
        cfg = load_config(config_path) if config_path else RunConfig()
        cfg = apply_env(cfg)
        cfg = cfg.with_overrides(seed=seed, n_samples=n_samples, h0=h0, m=m, C=C, hbar=hbar, output=output)
        return fn(cfg, out, **kw)

    return wrapper


def _emit(doc, cfg: RunConfig, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_document(doc, cfg.output, fh)
    else:
        write_document(doc, cfg.output, sys.stdout)


def _config_fields(cfg: RunConfig) -> dict:
    return {"units": cfg.units, "m": cfg.m, "C": cfg.C, "hbar": cfg.hbar, "h0_convention": cfg.h0}


def _float_list(text: str) -> list[float]:
    try:
        if ":" in text:
            lo, hi, num = text.split(":")
            return [float(v) for v in np.linspace(float(lo), float(hi), int(num))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"cannot parse {text!r}; use a,b,c or start:stop:num") from None


@click.group(help=__doc__)
def cli():
    pass


@cli.command()
@common_options
def tail(cfg: RunConfig, out):
    """Quantum tail beyond the turning points vs classical momentum tail."""
    osc = cfg.oscillator
    H0 = cfg.resolve_h0()
    rep = check_equivalence(osc, H0)
    paper = check_equivalence(osc, h0_paper(osc))
    ground = check_equivalence(osc, h0_ground(osc))
    report = {
        **_config_fields(cfg),
        "H0": H0,
        "x_ret": rep.x_ret,
        "p0": rep.p0,
        "pr_quantum": rep.pr_quantum,
        "pr_classical": rep.pr_classical,
        "lhs_p0_over_sqrt_alpha_hbar": rep.lhs,
        "rhs_sqrt_alpha_x_ret": rep.rhs,
        "residual": rep.residual,
        "relative_residual": rep.relative_residual,
        "tail_convention": "two-sided",
        "H0_paper": paper.H0,
        "pr_quantum_paper": paper.pr_quantum,
        "pr_classical_paper": paper.pr_classical,
        "H0_ground": ground.H0,
        "pr_quantum_ground": ground.pr_quantum,
        "pr_classical_ground": ground.pr_classical,
        "ensemble_mean_energy": energy(0, osc),
        "h0_discrepancy": paper.H0 != ground.H0,
    }
    _emit({"report": report}, cfg, out)
    raise Outcome(EXIT_OK if rep.holds(cfg.tolerances.equivalence_residual) else EXIT_OUT_OF_TOLERANCE)


@cli.command()
@common_options
@click.option("--times", default="", help="Comma list of evolution times.")
@click.option("--periods", default="", help="Comma list of times in oscillation periods.")
@click.option("--samples-out", type=click.Path(dir_okay=False), help="Also write the t=0 sample as CSV.")
@click.option("--workers", type=int, default=1, show_default=True)
def ensemble(cfg: RunConfig, out, times, periods, samples_out, workers):
    """Sample the ground-state ensemble and count particles beyond the thresholds."""
    osc = cfg.oscillator
    F = ground_state_distribution(osc)
    tp = turning_points(cfg.resolve_h0(), osc)
    period = 2 * math.pi / osc.omega
    tlist = (_float_list(times) if times else []) + [k * period for k in (_float_list(periods) if periods else [])]
    s0 = sample(F, cfg.n_samples, cfg.seed, workers=workers, chunk=cfg.tolerances.mc_chunk)
    rep = tail_fractions(s0, tp.x_ret, tp.p0)
    e_mean, e_se = mean_energy(s0)
    band = cfg.tolerances.stderr_band
    report = {**_config_fields(cfg), "H0": tp.H0, **rep.as_dict(), "mean_energy": e_mean,
              "mean_energy_stderr": e_se, "mean_energy_analytic": energy(0, osc),
              "within_bands": rep.within_bands(band)}
    ok = rep.within_bands(band)
    doc = {"report": report}
    if tlist:
        rows = []
        worst = 0.0
        for t in tlist:
            r = tail_fractions(evolve(s0, t), tp.x_ret, tp.p0)
            rows.append({"t": t, "frac_beyond_x": r.frac_beyond_x, "frac_beyond_p": r.frac_beyond_p,
                         "z_x": r.z_x, "z_p": r.z_p})
            worst = max(worst, r.z_x, r.z_p)
        doc["tables"] = {"stationarity": rows}
        report["stationarity_max_z"] = worst
        report["stationary"] = worst <= band
        ok = ok and worst <= band
    if samples_out:
        with open(samples_out, "w", encoding="utf-8", newline="") as fh:
            write_sample_csv(s0, fh)
    _emit(doc, cfg, out)
    raise Outcome(EXIT_OK if ok else EXIT_OUT_OF_TOLERANCE)


@cli.command()
@common_options
@click.option("--V0", "V0", type=float, default=1.0, show_default=True)
@click.option("--b", type=float, default=0.0, show_default=True)
@click.option("--c", type=float, default=1.0, show_default=True)
@click.option("--energies", default="0.05:3:60", show_default=True, help="a,b,c or start:stop:num")
@click.option("--widths", default="", help="Smoothing widths; default (c-b)/2^k, k=1..8.")
@click.option("--e-ref", type=float, default=0.5, show_default=True, help="Energy for the width sweep.")
def barrier(cfg: RunConfig, out, V0, b, c, energies, widths, e_ref):
    """Square vs smooth barrier transmission sweeps."""
    if not c > b:
        raise click.BadParameter("need b < c")
    energies = _float_list(energies)
    if not energies or min(energies) <= 0:
        raise click.BadParameter("energies must be positive")
    wl = _float_list(widths) if widths else [(c - b) / 2**k for k in range(1, 9)]
    if min(wl) <= 0:
        raise click.BadParameter("widths must be positive")
    m, hbar = cfg.m, cfg.hbar
    tol, cap = cfg.tolerances.barrier_convergence, cfg.tolerances.max_slices
    sweep = energy_sweep(V0, b, c, energies, wl[-1:], m, hbar, tol, cap)
    conv = width_convergence(V0, b, c, e_ref, wl, m, hbar, tol, cap)
    devs = [r["deviation"] for r in conv]
    flux = max(max(abs(r["T_square"] + r["R_square"] - 1) for r in sweep),
               max(abs(r["T_smooth"] + r["R_smooth"] - 1) for r in conv))
    report = {**_config_fields(cfg), "V0": V0, "b": b, "c": c, "e_ref": e_ref,
              "T_square_ref": square_transmission(V0, b, c, e_ref, m, hbar, with_regions=False).T,
              "final_deviation": devs[-1],
              "deviation_decreasing": all(d2 < d1 for d1, d2 in zip(devs, devs[1:])),
              "max_flux_error": flux}
    _emit({"tables": {"sweep": sweep, "convergence": conv}, "report": report}, cfg, out)
    raise Outcome(EXIT_OK if flux <= cfg.tolerances.flux else EXIT_OUT_OF_TOLERANCE)


@cli.command()
@common_options
@click.option("--n", "n", type=int, default=0, show_default=True, help="Quantum number (<= 10).")
@click.option("--x-grid", default="", help="start:stop:num (default +-4 sigma_x, 101 points)")
@click.option("--p-grid", default="", help="start:stop:num (default +-4 sigma_p, 101 points)")
def wigner(cfg: RunConfig, out, n, x_grid, p_grid):
    """Gridded Wigner field (x, p, W)."""
    if not 0 <= n <= 10:
        raise click.BadParameter("n must be in [0, 10]")
    osc = cfg.oscillator
    F = ground_state_distribution(osc)
    xs = np.array(_float_list(x_grid)) if x_grid else np.linspace(-4, 4, 101) * F.sigma_x
    ps = np.array(_float_list(p_grid)) if p_grid else np.linspace(-4, 4, 101) * F.sigma_p
    if xs.size == 0 or ps.size == 0:
        raise click.BadParameter("grids must be non-empty")
    W = wigner_transform(QuantumState(n, osc), xs, ps)
    X, P = np.meshgrid(xs, ps, indexing="ij")
    rows = [{"x": float(x), "p": float(p), "W": float(w)} for x, p, w in zip(X.ravel(), P.ravel(), W.ravel())]
    k = int(np.argmin(W))
    report = {**_config_fields(cfg), "n": n, "min_value": float(W.ravel()[k]),
              "min_x": float(X.ravel()[k]), "min_p": float(P.ravel()[k]), "negative": bool(W.min() < 0)}
    ok = True
    if n == 0:
        dev = float(np.abs(W - F.pdf(X, P)).max())
        report["max_deviation_F0"] = dev
        ok = dev <= 1e-10
    _emit({"tables": {"wigner": rows}, "report": report}, cfg, out)
    raise Outcome(EXIT_OK if ok else EXIT_OUT_OF_TOLERANCE)


@cli.command()
@click.option("--only", default="", help="Comma list of criterion numbers.")
def check(only):
    """Run the acceptance criteria and print one line per criterion."""
    selected = {int(v) for v in only.split(",") if v.strip()} or None
    results = acceptance.run_all(selected)
    for r in results:
        click.echo(r.line())
    raise Outcome(EXIT_OK if all(r.passed for r in results) else EXIT_OUT_OF_TOLERANCE)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="phasetail", standalone_mode=False)
    except Outcome as o:
        return o.code
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_INVALID
    except click.ClickException as e:
        e.show()
        return EXIT_INVALID
    except (ConfigError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_INVALID
    except ConvergenceError as e:
        click.echo(f"non-convergence: {e}", err=True)
        return EXIT_NONCONVERGED
    return EXIT_OK


def entrypoint():
    sys.exit(main())
