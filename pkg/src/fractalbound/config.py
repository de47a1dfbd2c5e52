"""Experiment configuration: flat INI sections, strictly validated.

Unknown sections or keys are hard errors; a silent typo in a sweep parameter
would corrupt an exponent fit.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .graphs import Family, FamilySpec


class ConfigError(ValueError):
    pass


@dataclass
class PhysicsConfig:
    j_hop: float = 1.0
    delta_min: float = 1e-3
    delta_max: float = 1e-1
    delta_count: int = 10
    deltas: list[float] | None = None        # explicit grid overrides min/max/count
    coupling_rule: str = "default"           # default | fixed:<g> | ratio:<frac>

    def delta_grid(self) -> np.ndarray:
        if self.deltas is not None:
            grid = np.asarray(self.deltas, dtype=float)
        else:
            grid = np.geomspace(self.delta_min, self.delta_max, self.delta_count)
        if (grid <= 0).any():
            raise ConfigError("detunings must be strictly positive")
        return grid

    def coupling(self, delta: float) -> float:
        rule = self.coupling_rule
        if rule == "default":
            return min(0.1 * delta, 1e-3 * self.j_hop)
        kind, _, value = rule.partition(":")
        try:
            value = float(value)
        except ValueError:
            raise ConfigError(f"bad coupling_rule {rule!r}") from None
        if kind == "fixed":
            return value
        if kind == "ratio":
            return value * delta
        raise ConfigError(f"bad coupling_rule {rule!r}")


@dataclass
class FarfieldConfig:
    anchor: int = 0          # which tagged boundary path supplies the corner anchor
    r_min: float = 5.0
    step: float = 5.0
    variance_width: int = 5


@dataclass
class NearfieldConfig:
    r_bulk: int = 8
    r_window_min: float = 1.0
    r_window_max: float = 10.0
    delta: float = 1e-3
    emitter_cap: int = 200


@dataclass
class SolverConfig:
    tol_eig: float = 1e-12
    tol_lin: float = 1e-10
    krylov_cap: int = 250


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: tuple[str, ...] = ("csv", "json")
    figures: bool = True


@dataclass
class ExperimentConfig:
    lattice: FamilySpec
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    farfield: FarfieldConfig = field(default_factory=FarfieldConfig)
    nearfield: NearfieldConfig = field(default_factory=NearfieldConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: OutputConfig = field(default_factory=OutputConfig)


_LATTICE_KEYS = {"family", "generation", "side", "m_side", "n_removed"}


def _parse_section(parser, name, target, casts):
    if not parser.has_section(name):
        return target
    for key, raw in parser.items(name):
        if key not in casts:
            raise ConfigError(f"unknown key [{name}] {key}")
        setattr(target, key, casts[key](raw))
    return target


def _parse_deltas(raw: str):
    return [float(tok) for tok in raw.replace(",", " ").split()]


def _parse_formats(raw: str):
    fmts = tuple(tok.strip() for tok in raw.split(",") if tok.strip())
    bad = set(fmts) - {"csv", "json"}
    if bad:
        raise ConfigError(f"unknown output formats {sorted(bad)}")
    return fmts


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"bad boolean {raw!r}")


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path) as f:
        parser.read_file(f)
    known = {"lattice", "physics", "farfield", "nearfield", "solver", "output"}
    unknown = set(parser.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections {sorted(unknown)}")
    if not parser.has_section("lattice") or not parser.has_option("lattice", "family"):
        raise ConfigError("config needs a [lattice] section with a family")
    lat = dict(parser.items("lattice"))
    bad = set(lat) - _LATTICE_KEYS
    if bad:
        raise ConfigError(f"unknown key [lattice] {sorted(bad)}")
    try:
        family = Family(lat["family"])
    except ValueError:
        raise ConfigError(f"unknown family {lat['family']!r}") from None
    spec = FamilySpec(
        family=family,
        generation=int(lat.get("generation", 0)),
        side=int(lat["side"]) if "side" in lat else None,
        m_side=int(lat["m_side"]) if "m_side" in lat else None,
        n_removed=int(lat["n_removed"]) if "n_removed" in lat else None,
    )
    spec.validate()
    cfg = ExperimentConfig(lattice=spec)
    _parse_section(parser, "physics", cfg.physics, {
        "j_hop": float, "delta_min": float, "delta_max": float,
        "delta_count": int, "deltas": _parse_deltas, "coupling_rule": str})
    _parse_section(parser, "farfield", cfg.farfield, {
        "anchor": int, "r_min": float, "step": float, "variance_width": int})
    _parse_section(parser, "nearfield", cfg.nearfield, {
        "r_bulk": int, "r_window_min": float, "r_window_max": float,
        "delta": float, "emitter_cap": int})
    _parse_section(parser, "solver", cfg.solver, {
        "tol_eig": float, "tol_lin": float, "krylov_cap": int})
    _parse_section(parser, "output", cfg.output, {
        "directory": str, "formats": _parse_formats, "figures": _parse_bool})
    return cfg
