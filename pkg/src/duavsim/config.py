"""Simulation parameters: the SimConfig record, file I/O, validation and sweeps.

Keys are named by role rather than by Greek letter::

    area_m2              S      network area (square region of side sqrt(S))
    bandwidth_hz         W      total system bandwidth
    bs_density_per_m2    λ_B    ground base stations
    uav_density_per_m2   λ_U    UAVs
    ue_density_per_m2    λ_A    ground UEs
    eaves_density_per_m2 λ_E    eavesdroppers
    uav_altitude_m       H
    uav_tx_mw            P_A
    ue_tx_mw             P_U
    beta_dbm             β      decoding threshold
    eta                  η      spectrum partition factor
    noise_dbm            σ²
    alpha_air            α_a    exponent for links with an airborne endpoint
    alpha_ground         α_g    exponent for ground-to-ground links

Some texts write the UAV count as S·λ_A and the UE count as S·λ_U; the role
names above sidestep that.

Defaults for parameters the case-study table does not give live in
``DEFAULTS`` and can be overridden from a file or the CLI.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib


class ConfigError(ValueError):
    """Bad configuration file, unknown key or invariant violation."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class Scenario(str, enum.Enum):
    FLYING_BS = "flying-bs"
    AERIAL_UE = "aerial-ue"


class Strategy(str, enum.Enum):
    TRADITIONAL = "traditional"
    NEW = "new"


class BetaInterpretation(str, enum.Enum):
    # received desired power (mW, fading included) against 10^(beta/10) mW
    RSS_DBM = "rss-dbm"
    # SINR in dB against (beta - noise) dB
    SINR_DB = "sinr-db"


@dataclass(frozen=True)
class SimConfig:
    area_m2: float
    bandwidth_hz: float
    bs_density_per_m2: float
    uav_density_per_m2: float
    ue_density_per_m2: float
    eaves_density_per_m2: float
    uav_altitude_m: float
    uav_tx_mw: float
    ue_tx_mw: float
    beta_dbm: float
    eta: float
    noise_dbm: float
    alpha_air: float
    alpha_ground: float
    scenario: Scenario
    strategy: Strategy = Strategy.NEW
    beta_interpretation: BetaInterpretation = BetaInterpretation.RSS_DBM
    jammer_tx_mw: float | None = None
    rician_k_db: float = 10.0
    underlay_prob: float = 0.5
    min_link_distance_m: float = 1.0
    n_drops: int = 200
    master_seed: int = 0

    @property
    def side_m(self):
        return math.sqrt(self.area_m2)

    @property
    def noise_mw(self):
        return dbm_to_mw(self.noise_dbm)

    @property
    def jammer_power_mw(self):
        return self.ue_tx_mw if self.jammer_tx_mw is None else self.jammer_tx_mw

    def with_(self, **changes) -> "SimConfig":
        return replace(self, **changes)


_ENUM_FIELDS = {
    "scenario": Scenario,
    "strategy": Strategy,
    "beta_interpretation": BetaInterpretation,
}
_INT_FIELDS = {"n_drops", "master_seed"}

FIELD_NAMES = tuple(f.name for f in fields(SimConfig))
REQUIRED = tuple(
    f.name for f in fields(SimConfig)
    if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING
)
DEFAULTS = {
    f.name: f.default for f in fields(SimConfig) if f.default is not dataclasses.MISSING
}
NUMERIC_FIELDS = tuple(n for n in FIELD_NAMES if n not in _ENUM_FIELDS)


def dbm_to_mw(dbm):
    return 10.0 ** (dbm / 10.0)


def mw_to_dbm(mw):
    return 10.0 * math.log10(mw)


def preset(scenario, full_scale=True, **overrides) -> SimConfig:
    """Case-study parameter column for ``scenario``.

    ``full_scale=False`` gives the desk-scale variant (S = 1e5 m^2, 200
    drops) with every density left unchanged. The aerial-UE column sweeps
    the UAV density; its first value (1e-3) is used here.
    """
    scenario = Scenario(scenario)
    common = dict(
        area_m2=1e6,
        bandwidth_hz=2e9,
        uav_tx_mw=200.0,
        beta_dbm=-120.0,
        noise_dbm=-130.0,
        alpha_air=2.0,
        alpha_ground=4.0,
        scenario=scenario,
        n_drops=1000,
    )
    if scenario is Scenario.FLYING_BS:
        column = dict(
            bs_density_per_m2=0.0,
            uav_density_per_m2=1e-4,
            ue_density_per_m2=0.2,
            eaves_density_per_m2=0.001,
            uav_altitude_m=300.0,
            ue_tx_mw=230.0,
            eta=0.6,
        )
    else:
        column = dict(
            bs_density_per_m2=4e-5,
            uav_density_per_m2=1e-3,
            ue_density_per_m2=0.01,
            eaves_density_per_m2=0.098,
            uav_altitude_m=200.0,
            ue_tx_mw=300.0,
            eta=0.5,
        )
    cfg = SimConfig(**common, **column)
    if not full_scale:
        cfg = cfg.with_(area_m2=1e5, n_drops=200)
    return cfg.with_(**overrides) if overrides else cfg


def coerce_value(name, value):
    """Convert a raw file/CLI value to the field's type."""
    if name not in FIELD_NAMES:
        raise ConfigError(f"unknown config key {name!r}")
    if name in _ENUM_FIELDS:
        try:
            return _ENUM_FIELDS[name](value)
        except ValueError:
            choices = ", ".join(e.value for e in _ENUM_FIELDS[name])
            raise ConfigError(f"{name}: {value!r} is not one of {choices}") from None
    if name == "jammer_tx_mw" and value in (None, "none", "None", ""):
        return None
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    try:
        if name in _INT_FIELDS:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a number, got {value!r}") from None


def from_mapping(raw: dict[str, Any]) -> SimConfig:
    unknown = sorted(set(raw) - set(FIELD_NAMES))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    missing = [k for k in REQUIRED if k not in raw]
    if missing:
        raise ConfigError(f"required keys absent: {', '.join(missing)}", missing)
    values = {k: coerce_value(k, v) for k, v in raw.items()}
    return SimConfig(**values)


def load_config(path) -> SimConfig:
    """Read a flat TOML or JSON file (chosen by extension, TOML otherwise)
    and return a validated SimConfig."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text()
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(text) if text.strip() else {}
        else:
            raw = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    if not isinstance(raw, dict) or any(isinstance(v, (dict, list)) for v in raw.values()):
        raise ConfigError(f"{path}: expected a flat key = value document")
    cfg = from_mapping(raw)
    check(cfg)
    return cfg


def to_mapping(cfg: SimConfig) -> dict[str, Any]:
    out = {}
    for name in FIELD_NAMES:
        value = getattr(cfg, name)
        if value is None:
            continue
        out[name] = value.value if isinstance(value, enum.Enum) else value
    return out


def _toml_scalar(value):
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def save_config(cfg: SimConfig, path):
    path = Path(path)
    mapping = to_mapping(cfg)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(mapping, indent=2) + "\n")
    else:
        lines = [f"{k} = {_toml_scalar(v)}" for k, v in mapping.items()]
        path.write_text("\n".join(lines) + "\n")


def validate(cfg: SimConfig) -> list[str]:
    """Return every invariant violation (empty list when the config is ok)."""
    bad = []
    if not 0.0 <= cfg.eta <= 1.0:
        bad.append("eta out of [0,1]")
    if not 0.0 <= cfg.underlay_prob <= 1.0:
        bad.append("underlay_prob out of [0,1]")
    for name in ("bs_density_per_m2", "uav_density_per_m2",
                 "ue_density_per_m2", "eaves_density_per_m2"):
        if not getattr(cfg, name) >= 0.0:
            bad.append(f"{name} must be >= 0")
    for name in ("uav_tx_mw", "ue_tx_mw"):
        if not getattr(cfg, name) > 0.0:
            bad.append(f"{name} must be > 0")
    if cfg.jammer_tx_mw is not None and not cfg.jammer_tx_mw > 0.0:
        bad.append("jammer_tx_mw must be > 0")
    if not cfg.area_m2 > 0.0:
        bad.append("area_m2 must be > 0")
    if not cfg.bandwidth_hz > 0.0:
        bad.append("bandwidth_hz must be > 0")
    if not cfg.alpha_air >= 2.0:
        bad.append("alpha_air below free-space exponent 2")
    if not cfg.alpha_ground >= 2.0:
        bad.append("alpha_ground below free-space exponent 2")
    if not cfg.uav_altitude_m >= 0.0:
        bad.append("uav_altitude_m must be >= 0")
    if not cfg.min_link_distance_m > 0.0:
        bad.append("min_link_distance_m must be > 0")
    if math.isnan(cfg.rician_k_db):
        bad.append("rician_k_db is NaN")
    if cfg.n_drops < 1:
        bad.append("n_drops must be a positive integer")
    if not 0 <= cfg.master_seed < 2**64:
        bad.append("master_seed must fit in 64 unsigned bits")
    if cfg.scenario is Scenario.FLYING_BS and not cfg.uav_density_per_m2 > 0.0:
        bad.append("no flying BSs: flying-bs scenario needs uav_density_per_m2 > 0")
    if cfg.scenario is Scenario.AERIAL_UE and not cfg.bs_density_per_m2 > 0.0:
        bad.append("no ground BSs: aerial-ue scenario needs bs_density_per_m2 > 0")
    return bad


def check(cfg: SimConfig) -> SimConfig:
    bad = validate(cfg)
    if bad:
        raise ConfigError("invalid configuration: " + "; ".join(bad), bad)
    return cfg


@dataclass(frozen=True)
class SweepSpec:
    parameter_name: str
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))

    @classmethod
    def parse(cls, text: str) -> "SweepSpec":
        """Parse ``key=v1,v2,...``."""
        name, sep, rest = text.partition("=")
        if not sep or not rest.strip():
            raise ConfigError(f"sweep must look like key=v1,v2,...: {text!r}")
        try:
            values = [float(v) for v in rest.split(",")]
        except ValueError:
            raise ConfigError(f"sweep values must be numbers: {rest!r}") from None
        return cls(name.strip(), tuple(values))


def validate_sweep(sweep: SweepSpec) -> list[str]:
    bad = []
    if sweep.parameter_name not in NUMERIC_FIELDS:
        bad.append(f"sweep parameter {sweep.parameter_name!r} is not a numeric config field")
    vals = sweep.values
    if not vals:
        bad.append("sweep values are empty")
    diffs = [b - a for a, b in zip(vals, vals[1:])]
    if diffs and not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
        bad.append("sweep values must be strictly monotone")
    return bad


def expand_sweep(cfg: SimConfig, sweep: SweepSpec) -> list[SimConfig]:
    """One config per sweep value, in sweep order; everything else copied."""
    bad = validate_sweep(sweep)
    if bad:
        raise ConfigError("invalid sweep: " + "; ".join(bad), bad)
    name = sweep.parameter_name
    return [cfg.with_(**{name: coerce_value(name, v)}) for v in sweep.values]


def apply_overrides(cfg: SimConfig, assignments: Sequence[str]) -> SimConfig:
    """Apply ``key=value`` strings (CLI ``--set``)."""
    changes = {}
    for item in assignments:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        changes[key.strip()] = coerce_value(key.strip(), value.strip())
    return cfg.with_(**changes)
