"""Scenario configuration files (TOML).

Schema::

    radius_m = 500.0          # cell radius, m
    alpha = 3.65              # pathloss exponent
    h0 = 1.0                  # reference gain
    sigma2 = 1e-13            # receiver noise variance
    power_budget = 1.0        # base-station power, same units as sigma2
    total_users = 78.54       # optional, must match the density integral
    channel = "real"          # "real" (1/2 log2) or "complex" (log2)
    grid_size = 1024          # nodes for tabulated noise distributions

    [density]                 # users per m^2
    kind = "uniform"          # or "table"
    u0 = 1e-4
    # table = [[0.0, 2e-4], [500.0, 5e-5]]   # (r_m, u) pairs, piecewise linear

    [traffic]                 # optional shape for `region`, same kinds as density
    kind = "uniform"
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

from .scenario import (
    Density,
    NoiseDistribution,
    PathlossModel,
    RadialProfile,
    Scenario,
    TrafficProfile,
    UniformDensity,
    derive_noise_distribution,
    disk_noise_distribution,
    traffic_to_noise_distribution,
)

__all__ = ["ConfigError", "CellConfig", "load_config", "parse_config"]

_KNOWN_KEYS = {
    "radius_m", "alpha", "h0", "sigma2", "power_budget", "total_users",
    "channel", "grid_size", "density", "traffic",
}


class ConfigError(ValueError):
    """Invalid or incomplete configuration; the message names the key."""


@dataclass(frozen=True)
class CellConfig:
    scenario: Scenario
    traffic: Optional[Density]
    channel: str
    grid_size: int
    raw: dict

    @property
    def rate_factor(self) -> float:
        """Multiplier from real-channel rates to the configured convention."""
        return 2.0 if self.channel == "complex" else 1.0

    def normalized_scenario(self) -> Scenario:
        """The same cell with noise rescaled so the edge noise is 1."""
        sc = self.scenario
        return Scenario(
            sc.radius,
            sc.pathloss,
            sc.sigma2 / sc.nu_edge,
            sc.power_budget / sc.nu_edge,
            sc.density,
            sc.total_users,
        )

    def user_distribution(self) -> NoiseDistribution:
        """User-noise distribution in units of the edge noise."""
        if isinstance(self.scenario.density, UniformDensity):
            return disk_noise_distribution(self.scenario.pathloss.alpha, 1.0)
        return derive_noise_distribution(self.normalized_scenario(), self.grid_size)

    def traffic_distribution(self) -> NoiseDistribution:
        """Traffic-weighted noise distribution in units of the edge noise."""
        shape = self.traffic if self.traffic is not None else self.scenario.density
        if isinstance(shape, UniformDensity):
            return disk_noise_distribution(self.scenario.pathloss.alpha, 1.0)
        profile = TrafficProfile(1.0, shape).normalized(self.scenario.radius)
        return traffic_to_noise_distribution(profile, self.normalized_scenario(), self.grid_size)

    def echo(self) -> str:
        sc = self.scenario
        dens = sc.density
        if isinstance(dens, UniformDensity):
            dtxt = f"uniform u0={dens.u0:.12g}"
        else:
            dtxt = f"table ({len(dens.radii)} points)"
        return (
            f"radius_m={sc.radius:.12g} alpha={sc.pathloss.alpha:.12g} h0={sc.pathloss.h0:.12g} "
            f"sigma2={sc.sigma2:.12g} power_budget={sc.power_budget:.12g} "
            f"total_users={sc.total_users:.12g} density={dtxt} channel={self.channel}"
        )


def _number(raw: dict, key: str, *, positive=True, allow_zero=False, default=None) -> float:
    if key not in raw:
        if default is not None:
            return default
        raise ConfigError(f"missing required key '{key}'")
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key '{key}' must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"key '{key}' must be finite, got {value}")
    if positive and not (value > 0 or (allow_zero and value == 0)):
        bound = ">= 0" if allow_zero else "> 0"
        raise ConfigError(f"key '{key}' must be {bound}, got {value}")
    return value


def _density(section: Any, name: str) -> Density:
    if not isinstance(section, dict):
        raise ConfigError(f"'{name}' must be a table with a 'kind' key")
    kind = section.get("kind")
    if kind == "uniform":
        # a traffic shape is normalized later, so its level is optional
        default = 1.0 if name == "traffic" else None
        return UniformDensity(_number(section, "u0", default=default))
    if kind == "table":
        table = section.get("table")
        if not isinstance(table, list) or len(table) < 2:
            raise ConfigError(f"key '{name}.table' must be a list of at least two [r, u] pairs")
        try:
            radii = tuple(float(row[0]) for row in table)
            values = tuple(float(row[1]) for row in table)
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"key '{name}.table' rows must be [r, u] number pairs") from exc
        try:
            return RadialProfile(radii, values)
        except ValueError as exc:
            raise ConfigError(f"key '{name}.table': {exc}") from exc
    if kind is None:
        raise ConfigError(f"missing required key '{name}.kind'")
    raise ConfigError(f"key '{name}.kind' must be 'uniform' or 'table', got {kind!r}")


def parse_config(raw: dict) -> CellConfig:
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown key '{unknown[0]}'")
    radius = _number(raw, "radius_m")
    alpha = _number(raw, "alpha")
    h0 = _number(raw, "h0")
    sigma2 = _number(raw, "sigma2")
    power = _number(raw, "power_budget", allow_zero=True)
    if "density" not in raw:
        raise ConfigError("missing required key 'density.kind'")
    density = _density(raw["density"], "density")
    total = _number(raw, "total_users") if "total_users" in raw else None
    channel = raw.get("channel", "real")
    if channel not in ("real", "complex"):
        raise ConfigError(f"key 'channel' must be 'real' or 'complex', got {channel!r}")
    grid = raw.get("grid_size", 1024)
    if isinstance(grid, bool) or not isinstance(grid, int) or grid < 16:
        raise ConfigError(f"key 'grid_size' must be an integer >= 16, got {grid!r}")
    traffic = _density(raw["traffic"], "traffic") if "traffic" in raw else None
    try:
        scenario = Scenario(radius, PathlossModel(h0, alpha), sigma2, power, density, total)
    except ValueError as exc:
        key = "total_users" if "total_users" in str(exc) else "density"
        raise ConfigError(f"key '{key}': {exc}") from exc
    if traffic is not None and not float(traffic.cumulative(radius)) > 0:
        raise ConfigError("key 'traffic': shape has no mass inside the cell")
    return CellConfig(scenario, traffic, channel, grid, raw)


def load_config(path) -> CellConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config '{path}': {exc.strerror}") from exc
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config '{path}' is not valid TOML: {exc}") from exc
    return parse_config(raw)
