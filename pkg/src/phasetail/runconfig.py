"""Run configuration: INI file format, environment overrides, report serialization."""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import re
from dataclasses import dataclass, field, replace

from .config import DEFAULT_TOLERANCES, Tolerances
from .oscillator import OscillatorConfig, h0_ground, h0_paper

__all__ = ["ConfigError", "RunConfig", "ENV_PREFIX", "load_config", "apply_env", "write_document",
           "read_csv_document"]

ENV_PREFIX = "PHASETAIL_"


class ConfigError(ValueError):
    """Invalid or unparsable run configuration."""


@dataclass(frozen=True)
class RunConfig:
    units: str = "natural"
    m: float = 1.0
    C: float = 1.0
    hbar: float = 1.0
    h0: str = "paper"
    seed: int = 0
    n_samples: int = 1_000_000
    output: str = "csv"
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.units not in ("natural", "explicit"):
            raise ConfigError(f"units must be 'natural' or 'explicit', got {self.units!r}")
        if self.units == "natural" and (self.m, self.C, self.hbar) != (1.0, 1.0, 1.0):
            raise ConfigError("natural units fix m = C = hbar = 1; set units = explicit to change them")
        for name in ("m", "C", "hbar"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive, got {v!r}")
        if self.h0 not in ("paper", "ground"):
            try:
                v = float(self.h0)
            except ValueError:
                raise ConfigError(f"h0 must be 'paper', 'ground' or a positive number, got {self.h0!r}") from None
            if not (math.isfinite(v) and v > 0):
                raise ConfigError(f"explicit h0 must be positive, got {self.h0!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")
        if self.n_samples < 1:
            raise ConfigError(f"n_samples must be positive, got {self.n_samples}")
        if self.output not in ("csv", "json"):
            raise ConfigError(f"output must be 'csv' or 'json', got {self.output!r}")

    @property
    def oscillator(self) -> OscillatorConfig:
        return OscillatorConfig(self.m, self.C, self.hbar)

    def resolve_h0(self, which: str | None = None) -> float:
        which = self.h0 if which is None else which
        cfg = self.oscillator
        if which == "paper":
            return h0_paper(cfg)
        if which == "ground":
            return h0_ground(cfg)
        return float(which)

    def with_overrides(self, **kw) -> "RunConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        if any(k in kw for k in ("m", "C", "hbar")) and "units" not in kw:
            kw["units"] = "explicit"
        try:
            return replace(self, **kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        cp["run"] = {
            "units": self.units,
            "m": repr(self.m),
            "C": repr(self.C),
            "hbar": repr(self.hbar),
            "h0": self.h0,
            "seed": str(self.seed),
            "n_samples": str(self.n_samples),
            "output": self.output,
        }
        cp["tolerances"] = {k: repr(v) for k, v in self.tolerances.as_dict().items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser()
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {exc}") from None
        unknown = set(cp.sections()) - {"run", "tolerances"}
        if unknown:
            sec = sorted(unknown)[0]
            raise ConfigError(f"line {_find_line(text, '[' + sec)}: unknown section [{sec}]")
        kw = {}
        if cp.has_section("run"):
            for key, raw in cp.items("run"):
                kw[key] = _convert(key, raw, text)
        if cp.has_section("tolerances"):
            try:
                kw["tolerances"] = Tolerances.from_dict(dict(cp.items("tolerances")))
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"[tolerances]: {exc}") from None
            for key in sorted(_FIXED_TOLERANCES):
                if getattr(kw["tolerances"], key) != getattr(DEFAULT_TOLERANCES, key):
                    raise ConfigError(f"line {_find_line(text, key)}: {key} is a fixed library constant "
                                      f"({getattr(DEFAULT_TOLERANCES, key)}) and cannot be overridden")
        try:
            return cls(**kw)
        except ConfigError as exc:
            raise ConfigError(f"config value error: {exc}") from None


# echoed in the config for the record, but baked into the numerical kernels
_FIXED_TOLERANCES = {"quadrature_newton", "max_quadrature_order", "max_quantum_number", "tail_quadrature",
                     "min_slices"}

_CONVERTERS = {
    "units": str,
    "m": float,
    "C": float,
    "hbar": float,
    "h0": str,
    "seed": int,
    "n_samples": int,
    "output": str,
}


def _find_line(text: str, key: str) -> int:
    pat = re.compile(rf"^\s*{re.escape(key)}")
    for i, line in enumerate(text.splitlines(), start=1):
        if pat.match(line):
            return i
    return 0


def _convert(key: str, raw: str, text: str):
    if key not in _CONVERTERS:
        raise ConfigError(f"line {_find_line(text, key)}: unknown key {key!r} in [run]")
    try:
        return _CONVERTERS[key](raw.strip())
    except ValueError:
        raise ConfigError(f"line {_find_line(text, key)}: cannot parse {key} = {raw!r}") from None


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return RunConfig.from_ini(text)


_ENV_KEYS = {
    "UNITS": "units",
    "M": "m",
    "C": "C",
    "HBAR": "hbar",
    "H0": "h0",
    "SEED": "seed",
    "SAMPLES": "n_samples",
    "FORMAT": "output",
}


def apply_env(cfg: RunConfig, environ=None) -> RunConfig:
    """Override fields from PHASETAIL_* environment variables."""
    environ = os.environ if environ is None else environ
    kw = {}
    for suffix, key in _ENV_KEYS.items():
        raw = environ.get(ENV_PREFIX + suffix)
        if raw is None:
            continue
        try:
            kw[key] = _CONVERTERS[key](raw)
        except ValueError:
            raise ConfigError(f"cannot parse {ENV_PREFIX + suffix}={raw!r}") from None
    return cfg.with_overrides(**kw)


def _num(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_document(doc: dict, fmt: str, fh) -> None:
    """Serialize ``{"tables": {name: [row, ...]}, "report": {...}}``.

    CSV: each table as a '# table: name' block, then a '# report' key,value block.
    """
    if fmt == "json":
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")
        return
    w = csv.writer(fh, lineterminator="\n")
    for name, rows in doc.get("tables", {}).items():
        fh.write(f"# table: {name}\n")
        if rows:
            cols = list(rows[0])
            w.writerow(cols)
            for row in rows:
                w.writerow([_num(row[c]) for c in cols])
        fh.write("\n")
    fh.write("# report\n")
    w.writerow(["key", "value"])
    for k, v in doc.get("report", {}).items():
        w.writerow([k, _num(v)])


def _parse_scalar(s: str):
    if s in ("true", "false"):
        return s == "true"
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def read_csv_document(text: str) -> dict:
    """Inverse of :func:`write_document` for the CSV layout."""
    doc = {"tables": {}, "report": {}}
    section = None
    header = None
    for row in csv.reader(io.StringIO(text)):
        if not row:
            continue
        if row[0].startswith("# table: "):
            section = row[0][len("# table: "):]
            doc["tables"][section] = []
            header = None
            continue
        if row[0] == "# report":
            section = "report"
            header = None
            continue
        if header is None:
            header = row
            continue
        if section == "report":
            doc["report"][row[0]] = _parse_scalar(row[1])
        else:
            doc["tables"][section].append({h: _parse_scalar(v) for h, v in zip(header, row)})
    return doc
