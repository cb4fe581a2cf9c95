# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

import dataclasses
import hashlib
import math
import os
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, get_args

import yaml

from ..cl_types import ConfigHash, ExperimentKind
from ..config import config
from ..dns import REMAP_PERIODS
from ..grid import TWO_PI, GridSpec, PlaneSpec
from ..multiplier import NormParams
from .exceptions import ConfigHashMismatchError, RunConfigError

CONFIG_COPY = "config.yaml"

# Fields which only say where results go; they do not change the numbers.
_UNHASHED = ("out_dir",)


def hash_values(values: Dict[str, Any]) -> ConfigHash:
    canonical = yaml.safe_dump(values, sort_keys=True, default_flow_style=False)
    return ConfigHash(hashlib.sha256(canonical.encode("utf-8")).hexdigest())


@dataclass(frozen=True)
class RunConfig:
    kind: ExperimentKind = ExperimentKind.DNS
    nu: float = 1e-3
    eps: float = 1e-3
    kappa: float = field(default_factory=lambda: float(config.kappa))
    alpha: int = field(default_factory=lambda: int(config.alpha))
    s: float = field(default_factory=lambda: float(config.s))
    lambda_0: float = field(default_factory=lambda: float(config.lambda_0))
    lambda_prime: float = field(default_factory=lambda: float(config.lambda_prime))
    delta_1: float = field(default_factory=lambda: float(config.delta_1))
    c0: float = 0.0
    nx: int = 64
    ny: int = 128
    nz: int = 64
    lx: float = TWO_PI
    ly: float = 2.0 * TWO_PI
    lz: float = TWO_PI
    dealias: float = field(default_factory=lambda: float(config.dealias))
    dt: float = 0.05
    tmax: float = 100.0
    remap_periods: int = REMAP_PERIODS
    mode: Tuple[float, float, float] = (1.0, 0.0, 1.0)
    k_prime: Optional[int] = None
    seed: int = 0
    out_dir: Optional[str] = None
    series_every: int = 1
    snapshot_every: int = 0

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        for name in ("nu", "eps", "c0"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0.0:
                raise RunConfigError(name, value, "must be finite and non-negative")
        for name in ("dt", "tmax", "kappa", "lx", "ly", "lz"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise RunConfigError(name, value, "must be finite and positive")
        for name in ("nx", "ny", "nz", "series_every", "remap_periods"):
            if getattr(self, name) < 1:
                raise RunConfigError(name, getattr(self, name), "must be at least 1")
        if self.snapshot_every < 0:
            raise RunConfigError("snapshot_every", self.snapshot_every, "must not be negative")
        if len(self.mode) != 3:
            raise RunConfigError("mode", self.mode, "must be k, eta, l")

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, ExperimentKind):
                value = value.value
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "RunConfig":
        names = {f.name: f for f in dataclasses.fields(cls)}
        kwargs: Dict[str, Any] = {}
        for key, value in values.items():
            if key not in names:
                raise RunConfigError(key, value, "is not a run config key")
            kwargs[key] = _coerce(key, names[key].type, value)
        return cls(**kwargs)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True, default_flow_style=False)

    @classmethod
    def from_yaml(cls, text: str) -> "RunConfig":
        try:
            values = yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise RunConfigError("yaml", "", f"could not be parsed: {e}") from e
        if values is None:
            values = {}
        if not isinstance(values, dict):
            raise RunConfigError("yaml", type(values).__name__, "must be a mapping")
        return cls.from_dict(values)

    @classmethod
    def load(cls, filename: str) -> "RunConfig":
        with open(filename, encoding="utf-8") as config_file:
            return cls.from_yaml(config_file.read())

    def save(self, filename: str) -> None:
        with open(filename, "w", encoding="utf-8") as config_file:
            config_file.write(self.to_yaml())

    @property
    def config_hash(self) -> ConfigHash:
        """sha256 of the canonical YAML, output location excluded."""
        return hash_values({k: v for k, v in self.to_dict().items() if k not in _UNHASHED})

    def replace(self, **changes: Any) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def grid(self) -> GridSpec:
        return GridSpec(self.nx, self.ny, self.nz, self.lx, self.ly, self.lz, self.dealias)

    def plane(self) -> PlaneSpec:
        return PlaneSpec(self.ny, self.nz, self.ly, self.lz, self.dealias)

    def norm_params(self) -> NormParams:
        return NormParams(
            lam0=self.lambda_0,
            lam_prime=self.lambda_prime,
            s=self.s,
            alpha=self.alpha,
            delta_1=self.delta_1,
            kappa=self.kappa,
            nu=self.nu,
        )

    def classify_until(self) -> float:
        """The time a run must reach before it can be classified."""
        if self.c0 > 0.0 and self.eps > 0.0:
            return min(self.c0 / self.eps, self.tmax)
        return self.tmax

    def prepare_out_dir(self) -> str:
        """Create out_dir holding a copy of this config; refuse a directory of another config."""
        if self.out_dir is None:
            raise RunConfigError("out_dir", None, "must be set to write results")

        os.makedirs(self.out_dir, exist_ok=True)
        copy = os.path.join(self.out_dir, CONFIG_COPY)
        if os.path.exists(copy):
            existing = RunConfig.load(copy).config_hash
            if existing != self.config_hash:
                raise ConfigHashMismatchError(self.out_dir, self.config_hash, existing)
        else:
            self.save(copy)
        return self.out_dir


def _coerce(key: str, field_type: Any, value: Any) -> Any:
    args = get_args(field_type)
    optional = type(None) in args
    base = next(a for a in args if a is not type(None)) if optional else field_type

    if value is None:
        if optional:
            return None
        raise RunConfigError(key, value, "must not be empty")

    try:
        if base is ExperimentKind:
            return ExperimentKind(value)
        if key == "mode":
            return tuple(float(v) for v in value)
        if base is int:
            if isinstance(value, float) and not value.is_integer():
                raise RunConfigError(key, value, "must be an integer")
            return int(value)
        if base is float:
            return float(value)
        if base is str:
            return str(value)
    except (TypeError, ValueError) as e:
        raise RunConfigError(key, value, f"has the wrong type ({e})") from e
    return value
