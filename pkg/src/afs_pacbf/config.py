"""Scenario configuration and its TOML encoding."""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .barrier import BarrierParams, Obstacle
from .errors import ConfigError
from .nominal import NominalParams
from .safety_filter import FilterWeights, InputBounds
from .vehicle import ActuatorParams, AugmentedState, VehicleGeometry


@dataclass(frozen=True)
class ScenarioConfig:
    geometry: VehicleGeometry = VehicleGeometry()
    actuator: ActuatorParams = ActuatorParams()
    nominal: NominalParams = NominalParams()
    barrier: BarrierParams = BarrierParams()
    weights: FilterWeights = FilterWeights()
    bounds: InputBounds = InputBounds()
    obstacles: Tuple[Obstacle, ...] = ()
    start: AugmentedState = AugmentedState.from_array([0.0] * 6)
    goal_tolerance: float = 0.2
    dt: float = 0.01
    t_max: float = 30.0
    filter_enabled: bool = True
    seed: int = 0
    p1_init: Optional[float] = None  # defaults to weights.p1_star

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.t_max <= self.dt:
            raise ConfigError("t_max must exceed dt")
        if self.goal_tolerance <= 0:
            raise ConfigError("goal tolerance must be positive")

    @property
    def goal(self):
        return self.nominal.goal

    @property
    def initial_p1(self) -> float:
        return self.weights.p1_star if self.p1_init is None else self.p1_init

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def _degrees(table: dict, keys) -> dict:
    out = dict(table)
    for k in keys:
        if f"{k}_deg" in out:
            out[k] = math.radians(out.pop(f"{k}_deg"))
    return out


def _build(cls, table, name):
    try:
        return cls(**table)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{name}]: {exc}") from None


def config_from_dict(data: dict) -> ScenarioConfig:
    known = {"vehicle", "actuator", "nominal", "barrier", "weights", "bounds",
             "obstacles", "start", "goal", "sim"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config tables: {sorted(unknown)}")
    goal = data.get("goal", {})
    nominal = dict(data.get("nominal", {}))
    nominal["goal"] = (float(goal.get("x", 9.0)), float(goal.get("y", 9.0)))
    start = dict(data.get("start", {}))
    keys = ["x_f", "y_f", "theta_f", "beta", "v_f", "u_betadot"]
    extra = set(start) - set(keys)
    if extra:
        raise ConfigError(f"[start]: unknown keys {sorted(extra)}")
    sim = dict(data.get("sim", {}))
    extra = set(sim) - {"dt", "t_max", "filter_enabled", "seed", "p1_init"}
    if extra:
        raise ConfigError(f"[sim]: unknown keys {sorted(extra)}")
    try:
        return ScenarioConfig(
            geometry=_build(VehicleGeometry, _degrees(data.get("vehicle", {}), ["beta_max"]), "vehicle"),
            actuator=_build(ActuatorParams, data.get("actuator", {}), "actuator"),
            nominal=_build(NominalParams, nominal, "nominal"),
            barrier=_build(BarrierParams, data.get("barrier", {}), "barrier"),
            weights=_build(FilterWeights, data.get("weights", {}), "weights"),
            bounds=_build(InputBounds, _degrees(data.get("bounds", {}), ["betadot_min", "betadot_max"]), "bounds"),
            obstacles=tuple(_build(Obstacle, o, "obstacles") for o in data.get("obstacles", [])),
            start=AugmentedState.from_array([float(start.get(k, 0.0)) for k in keys]),
            goal_tolerance=float(goal.get("tolerance", 0.2)),
            dt=float(sim.pop("dt", 0.01)),
            t_max=float(sim.pop("t_max", 30.0)),
            filter_enabled=bool(sim.pop("filter_enabled", True)),
            seed=int(sim.pop("seed", 0)),
            p1_init=sim.pop("p1_init", None),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path=None) -> ScenarioConfig:
    """Load a TOML scenario; ``None`` loads the packaged default."""
    try:
        if path is None:
            text = resources.files("afs_pacbf").joinpath("data/default_scenario.toml").read_text()
        else:
            text = Path(path).read_text()
        data = tomllib.loads(text)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from None
    return config_from_dict(data)


def default_config() -> ScenarioConfig:
    return load_config(None)
