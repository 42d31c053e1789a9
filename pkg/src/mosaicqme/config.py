"""Run configuration: flat dotted keys stored in TOML files.

Example::

    model.kind = "mosaic"
    model.kappa = 2
    model.N = 12
    bath.eta = 0.1

Unknown keys are rejected.  ``model.kappa`` and ``model.a`` may be lists, in
which case every command runs once per value ("variants").
"""

from __future__ import annotations

import itertools
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError, DomainError
from .lattice import GOLDEN_BETA, ModelSpec, fibonacci_beta
from .laplace import SpectralDensityParams
from .trajectory import time_grid

BUNDLED = ("table1_k2", "table1_k3", "tableA2_gaah", "fig3_k2", "fig3_k3", "figA1")
VARIANT_KEYS = ("model.kappa", "model.a")

# key -> (type, default)
SCHEMA: dict[str, tuple[Any, Any]] = {
    "model.kind": (str, "mosaic"),
    "model.N": (int, 12),
    "model.kappa": (int, 2),
    "model.a": (float, 0.0),
    "model.delta": (float, 2.0),
    "model.phi": (float, 0.0),
    "model.hopping": (float, 1.0),
    "model.beta": (float, GOLDEN_BETA),
    "model.beta_fibonacci": (int, 0),
    "bath.eta": (float, 0.1),
    "bath.omega_c": (float, 1.0),
    "dynamics.T": (float, 50.0),
    "dynamics.h": (float, 1e-3),
    "dynamics.decimation": (int, 10),
    "dynamics.methods": (list, ["residue_reconstruction", "auxiliary_ode", "volterra"]),
    "analysis.initial_states": ((str, list), "all"),
    "analysis.initial_vector": (list, []),
    "analysis.crossing_states": ((str, list), [0, 1, 2, 3]),
    "analysis.tol_steady": (float, 1e-10),
    "analysis.oracle_tol": (float, 1e-6),
    "analysis.volterra_tol": (float, 1e-5),
    "sweep.axis": (str, ""),
    "sweep.values": (list, []),
    "output.dir": (str, ""),
    "output.plot_stub": (bool, False),
}


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _coerce(key: str, value):
    typ, _ = SCHEMA[key]
    if key in VARIANT_KEYS and isinstance(value, list):
        if not value:
            raise ConfigError(f"{key}: empty list")
        return [_coerce_scalar(key, typ, v) for v in value]
    if isinstance(typ, tuple):
        if not isinstance(value, typ):
            raise ConfigError(f"{key}: expected one of {[t.__name__ for t in typ]}, got {value!r}")
        return value
    return _coerce_scalar(key, typ, value)


def _coerce_scalar(key, typ, value):
    if typ is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if typ is int and isinstance(value, int) and not isinstance(value, bool):
        return value
    if typ is float and isinstance(value, str) and value.strip().lower() in ("pi", "-pi"):
        return math.copysign(math.pi, -1.0 if value.strip().startswith("-") else 1.0)
    if isinstance(value, typ) and not (typ is not bool and isinstance(value, bool)):
        return value
    raise ConfigError(f"{key}: expected {typ.__name__}, got {value!r}")


def parse_value(text: str):
    """Interpret an override value as a TOML literal, else as a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    name: str = "run"

    @classmethod
    def from_mapping(cls, mapping: dict, name: str = "run") -> "RunConfig":
        flat = _flatten(mapping)
        unknown = sorted(set(flat) - set(SCHEMA))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        values = {k: default for k, (_, default) in SCHEMA.items()}
        for k, v in flat.items():
            values[k] = _coerce(k, v)
        cfg = cls(values, name)
        cfg.validate()
        return cfg

    @classmethod
    def from_text(cls, text: str, name: str = "run") -> "RunConfig":
        try:
            return cls.from_mapping(tomllib.loads(text), name)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config: {exc}") from exc

    @classmethod
    def load(cls, source: str | Path) -> "RunConfig":
        """Load a config file, or a bundled config by name (e.g. ``table1_k2``)."""
        path = Path(source)
        if path.is_file():
            return cls.from_text(path.read_text(encoding="utf-8"), path.stem)
        if str(source) in BUNDLED:
            text = resources.files("mosaicqme").joinpath("configs").joinpath(f"{source}.toml").read_text(encoding="utf-8")
            return cls.from_text(text, str(source))
        raise ConfigError(f"no config file or bundled config named {source!r}")

    def override(self, assignments: list[str]) -> "RunConfig":
        """Apply ``key=value`` overrides, returning a new config."""
        values = dict(self.values)
        for item in assignments:
            if "=" not in item:
                raise ConfigError(f"override {item!r} is not of the form key=value")
            key, text = item.split("=", 1)
            key = key.strip()
            if key not in SCHEMA:
                raise ConfigError(f"unknown configuration key {key!r}")
            values[key] = _coerce(key, parse_value(text.strip()))
        cfg = RunConfig(values, self.name)
        cfg.validate()
        return cfg

    def __getitem__(self, key):
        return self.values[key]

    def echo(self) -> dict:
        return dict(self.values)

    def validate(self):
        try:
            self.model_specs()
            self.bath()
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        for k in ("dynamics.T", "dynamics.h", "analysis.tol_steady", "analysis.oracle_tol",
                  "analysis.volterra_tol"):
            if not self.values[k] > 0:
                raise ConfigError(f"{k} must be positive")
        if self.values["dynamics.decimation"] < 1:
            raise ConfigError("dynamics.decimation must be >= 1")
        try:
            time_grid(self.values["dynamics.T"], self.values["dynamics.h"], self.values["dynamics.decimation"])
        except DomainError as exc:
            raise ConfigError(f"dynamics: {exc}") from exc
        for k in ("analysis.initial_states", "analysis.crossing_states"):
            v = self.values[k]
            if isinstance(v, str) and v != "all":
                raise ConfigError(f"{k} must be 'all' or a list of level indices")
            if isinstance(v, list) and not all(isinstance(i, int) and not isinstance(i, bool) for i in v):
                raise ConfigError(f"{k} must contain integer level indices")
        bad = set(self.values["dynamics.methods"]) - {"residue_reconstruction", "auxiliary_ode", "volterra"}
        if bad:
            raise ConfigError(f"unknown dynamics methods {sorted(bad)}")

    def model_specs(self) -> list[tuple[str, ModelSpec]]:
        """``(suffix, spec)`` for every combination of list-valued model keys."""
        v = self.values
        axes = []
        for key in VARIANT_KEYS:
            val = v[key]
            axes.append([(key, x) for x in val] if isinstance(val, list) else [(key, val)])
        multi = {key for key in VARIANT_KEYS if isinstance(v[key], list)}
        beta = fibonacci_beta(v["model.beta_fibonacci"]) if v["model.beta_fibonacci"] else v["model.beta"]
        out = []
        for combo in itertools.product(*axes):
            d = dict(combo)
            kind = v["model.kind"]
            spec = ModelSpec(kind=kind, N=v["model.N"], delta=v["model.delta"], phi=v["model.phi"],
                             kappa=d["model.kappa"] if kind == "mosaic" else 1,
                             a=d["model.a"] if kind == "gaah" else 0.0,
                             hopping=v["model.hopping"], beta=beta)
            suffix = "".join(f"_{k.split('.')[1]}{d[k]:g}" for k in VARIANT_KEYS if k in multi)
            out.append((suffix, spec))
        return out

    def bath(self) -> SpectralDensityParams:
        return SpectralDensityParams(self.values["bath.eta"], self.values["bath.omega_c"])
