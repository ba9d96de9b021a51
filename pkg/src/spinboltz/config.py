"""Scenario configuration: a flat ``section.key = value`` text format.

Lines starting with ``#`` are comments; list values are comma-separated.
Every key has a default, so a file only needs to list overrides.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from .units import BOHR_RADIUS

__all__ = ["ConfigError", "ScenarioConfig", "PRESETS", "preset", "parse_config", "load_config",
           "emit_config"]


class ConfigError(ValueError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


@dataclass(frozen=True)
class PhysicsSection:
    mass: float = 1.4431e-25  # kg
    omega: float = 2 * 3.141592653589793 * 15.0  # rad/s
    field_gauss: float = 0.28  # G, informational: q is set directly
    q_hz: float = 20.1  # q/h
    a0_bohr: float = 101.8  # literature value for Rb-87, not a fitted parameter
    a2_bohr: float = 100.4
    units: str = "si"

    @property
    def scattering_lengths(self) -> dict[int, float]:
        return {0: self.a0_bohr * BOHR_RADIUS, 2: self.a2_bohr * BOHR_RADIUS}


@dataclass(frozen=True)
class ThermalSection:
    temperatures: tuple[float, ...] = (9e-6, 10e-6, 11e-6)  # K
    chemical_potential: float | None = None  # J; None -> peak occupancy rule
    peak_occupancy: float = 0.1
    profile_table: str = ""  # optional two-column (m, K) table


@dataclass(frozen=True)
class GridSection:
    position_min: float = 0.0  # m
    position_max: float = 3e-4  # m
    position_points: int = 121
    momentum_points: int = 257


@dataclass(frozen=True)
class DensitySection:
    profile: str = "equilibrium"  # equilibrium | constant | linear
    peak: float = 3e18  # m^-3, peak 3D density the 1D profile is scaled to
    gradient: float = 1e21  # m^-4, for the linear profile


@dataclass(frozen=True)
class DynamicsSection:
    temperature: float = 10e-6  # K, sets the averaged kernel moments
    epsilon: float = 0.1
    integrator: str = "rk4"  # rk4 | eigen
    kernel: str = "self_consistent"  # self_consistent | frozen | isotropic
    dt: float = 1e-4  # s
    t_max: float = 0.5  # s
    sample_every: int = 1
    statistics: str = "bose"
    relaxation: bool = True
    relaxation_factor: float = 2e-3


@dataclass(frozen=True)
class DampingSection:
    t_eval: float = 0.016  # s


@dataclass(frozen=True)
class GaugeSection:
    coupling: float = 1.0
    transverse_points: int = 9
    elapsed_time: float = 0.016  # s
    minkowski: bool = False
    temperature: float | None = None  # K; None -> highest temperature


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    svg: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    preset: str = "rb87"
    physics: PhysicsSection = field(default_factory=PhysicsSection)
    thermal: ThermalSection = field(default_factory=ThermalSection)
    grid: GridSection = field(default_factory=GridSection)
    density: DensitySection = field(default_factory=DensitySection)
    dynamics: DynamicsSection = field(default_factory=DynamicsSection)
    damping: DampingSection = field(default_factory=DampingSection)
    gauge: GaugeSection = field(default_factory=GaugeSection)
    output: OutputSection = field(default_factory=OutputSection)

    def override(self, **dotted) -> "ScenarioConfig":
        """Return a copy with ``section__key=value`` or {"section.key": value} overrides."""
        items = {k.replace("__", "."): v for k, v in dotted.items()}
        return _apply(self, items, typed=True)

    def validate(self, require_periods: bool = False) -> None:
        problems = []
        p, d, g = self.physics, self.dynamics, self.grid
        for name, val in (("physics.mass", p.mass), ("physics.omega", p.omega), ("dynamics.dt", d.dt),
                          ("dynamics.t_max", d.t_max), ("damping.t_eval", self.damping.t_eval)):
            if not val > 0:
                problems.append(f"{name} must be positive (got {val})")
        for name, val in (("physics.q_hz", p.q_hz), ("physics.a0_bohr", p.a0_bohr),
                          ("physics.a2_bohr", p.a2_bohr), ("density.peak", self.density.peak),
                          ("dynamics.relaxation_factor", d.relaxation_factor)):
            if val < 0:
                problems.append(f"{name} must be non-negative (got {val})")
        if p.units not in ("si", "reduced"):
            problems.append(f"physics.units must be 'si' or 'reduced' (got {p.units!r})")
        if not self.thermal.temperatures or any(t <= 0 for t in self.thermal.temperatures):
            problems.append("thermal.temperatures must be a non-empty list of positive values")
        if not 0 < self.thermal.peak_occupancy:
            problems.append("thermal.peak_occupancy must be positive")
        if not d.temperature > 0:
            problems.append("dynamics.temperature must be positive")
        if not 0 <= d.epsilon <= 1:
            problems.append(f"dynamics.epsilon must lie in [0, 1] (got {d.epsilon})")
        if d.integrator not in ("rk4", "eigen"):
            problems.append(f"dynamics.integrator must be rk4 or eigen (got {d.integrator!r})")
        if d.kernel not in ("self_consistent", "frozen", "isotropic"):
            problems.append(f"dynamics.kernel must be self_consistent, frozen or isotropic (got {d.kernel!r})")
        if d.integrator == "eigen" and d.kernel == "self_consistent":
            problems.append("dynamics.integrator = eigen needs a linear kernel (frozen or isotropic)")
        if d.statistics not in ("bose", "fermi"):
            problems.append(f"dynamics.statistics must be bose or fermi (got {d.statistics!r})")
        if d.sample_every < 1:
            problems.append("dynamics.sample_every must be >= 1")
        if self.density.profile not in ("equilibrium", "constant", "linear"):
            problems.append(f"density.profile must be equilibrium, constant or linear (got {self.density.profile!r})")
        if g.position_points < 5 or g.momentum_points < 5:
            problems.append("grid.position_points and grid.momentum_points must be >= 5")
        if not g.position_max > g.position_min:
            problems.append("grid.position_max must exceed grid.position_min")
        if self.gauge.coupling == 0:
            problems.append("gauge.coupling must be nonzero")
        if self.gauge.transverse_points < 3:
            problems.append("gauge.transverse_points must be >= 3")
        if require_periods and p.q_hz > 0:
            periods = d.t_max * 2 * p.q_hz
            per_period = 1 / (2 * p.q_hz * d.dt * d.sample_every)
            if periods < 10:
                problems.append(f"dynamics.t_max covers only {periods:.1f} oscillation periods (need >= 10)")
            if per_period < 20:
                problems.append(f"sampling gives {per_period:.1f} points per period (need >= 20)")
        if problems:
            raise ConfigError(problems)


PRESETS = {"rb87": ScenarioConfig()}


def preset(name: str) -> ScenarioConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r} (available: {', '.join(PRESETS)})") from None


def _sections(cfg: ScenarioConfig):
    return [f for f in fields(cfg) if dataclasses.is_dataclass(getattr(cfg, f.name))]


def _coerce(raw: str, current, key: str):
    text = raw.strip()
    typ = type(current)
    if text.lower() in ("none", "") and (current is None or key in _OPTIONAL):
        return None
    if isinstance(current, bool):
        if text.lower() in ("true", "yes", "1", "on"):
            return True
        if text.lower() in ("false", "no", "0", "off"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(current, tuple):
        return tuple(float(v) for v in text.split(",") if v.strip())
    if isinstance(current, int):
        return int(text)
    if isinstance(current, float) or current is None:
        return float(text)
    return typ(text)


_OPTIONAL = {"thermal.chemical_potential", "gauge.temperature"}


def _apply(cfg: ScenarioConfig, items: dict, typed: bool = False) -> ScenarioConfig:
    problems = []
    updates: dict[str, dict] = {}
    top = {}
    for key, value in items.items():
        if key == "preset":
            top["preset"] = value
            continue
        if "." not in key:
            problems.append(f"{key}: expected section.key")
            continue
        sec, name = key.split(".", 1)
        section = getattr(cfg, sec, None)
        if section is None or not dataclasses.is_dataclass(section) or not hasattr(section, name):
            problems.append(f"{key}: unknown key")
            continue
        current = getattr(section, name)
        if typed and not isinstance(value, str):
            val = tuple(value) if isinstance(current, tuple) else value
        else:
            try:
                val = _coerce(str(value), current, key)
            except ValueError as exc:
                problems.append(f"{key}: {exc}")
                continue
        updates.setdefault(sec, {})[name] = val
    new = {sec: dataclasses.replace(getattr(cfg, sec), **vals) for sec, vals in updates.items()}
    out = dataclasses.replace(cfg, **top, **new)
    # value problems in the keys that did parse are reported alongside parse problems
    try:
        out.validate()
    except ConfigError as exc:
        problems += exc.problems
    if problems:
        raise ConfigError(problems)
    return out


def parse_config(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    items = {}
    problems = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            problems.append(f"line {lineno}: expected key = value")
            continue
        key, value = (s.strip() for s in stripped.split("=", 1))
        items[key] = value
    if problems:
        raise ConfigError(problems)
    if base is None:
        base = preset(items.get("preset", "rb87"))
    return _apply(base, items)


def load_config(path: str | Path, base: ScenarioConfig | None = None) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text, base)


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_config(cfg: ScenarioConfig) -> str:
    lines = [f"preset = {cfg.preset}"]
    for sec in _sections(cfg):
        section = getattr(cfg, sec.name)
        lines.append("")
        for f in fields(section):
            lines.append(f"{sec.name}.{f.name} = {_fmt(getattr(section, f.name))}")
    return "\n".join(lines) + "\n"
