"""Plain-text scenario files.

One ``key: value`` pair per line, ``#`` starts a comment. Values carry
optional unit suffixes that are converted to SI at parse time::

    atom: rb-ground          # built-in key or path to a fixture file
    sheet: doped
    doping: 1e12 cm^-2
    substrate: gold
    gap_d: 2 um
    z_A: 1 um

A sweep replaces the single height (or gap, or doping) by an axis and a grid::

    sweep: gap_d
    grid: geom(0.1 um, 10 um, 21)

Grids are comma-separated values, ``geom(start, stop, count)`` or
``lin(start, stop, count)``.
"""
from __future__ import annotations

import dataclasses
import hashlib
import io
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Optional, Union

import numpy as np

from .atoms import BUILTIN_ATOMS, AtomModel, load_atom_fixture, load_builtin_atom, two_level
from .constants import A0, C, D_LAYER, E_CHARGE, EV, GAMMA_HOP, GOLD_GAMMA, GOLD_OMEGA_P, HBAR, V_FERMI
from .engine import SWEEP_AXES, Scenario
from .numerics import QuadratureSpec
from .reflection import LayerStack, Mode, SubstrateModel
from .sheets import SheetKind, SheetResponse


class ConfigError(ValueError):
    """Invalid scenario file; ``lineno`` is 1-based, or None for whole-file problems."""

    def __init__(self, message: str, lineno: Optional[int] = None, key: Optional[str] = None):
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(f"{where}{message}")
        self.lineno = lineno
        self.key = key


# unit tables: lower-case suffix -> factor to SI
LENGTH = {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "μm": 1e-6, "nm": 1e-9,
          "a": 1e-10, "å": 1e-10, "angstrom": 1e-10}
DOPING = {"m^-2": 1.0, "cm^-2": 1e4}
ENERGY = {"j": 1.0, "ev": EV, "mev": 1e-3 * EV}
FREQUENCY = {"rad/s": 1.0, "s^-1": 1.0, "1/s": 1.0, "ev": EV / HBAR, "mev": 1e-3 * EV / HBAR}
VELOCITY = {"m/s": 1.0, "c": C}
DIPOLE = {"c m": 1.0, "c*m": 1.0, "a.u.": E_CHARGE * A0, "au": E_CHARGE * A0, "ea0": E_CHARGE * A0}
PLAIN = {"": 1.0}

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")


def parse_quantity(text: str, units: dict, default_unit: str = "") -> float:
    """``'1.5 um'`` -> 1.5e-6. Bare numbers are taken in ``default_unit``."""
    m = _NUMBER.match(text)
    if not m:
        raise ValueError(f"cannot read a number from {text!r}")
    value = float(m.group(1))
    suffix = m.group(2).strip().lower()
    if suffix == "":
        suffix = default_unit
    if suffix not in units:
        accepted = ", ".join(sorted(u for u in units if u)) or "none"
        raise ValueError(f"unknown unit {m.group(2)!r} (accepted: {accepted})")
    return value * units[suffix]


SHEETS = ("none",) + tuple(k.value for k in SheetKind)
SUBSTRATES = ("vacuum", "gold", "drude", "perfect")
MODES = tuple(m.value for m in Mode)
STATES = ("ground", "excited")


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario file, all quantities in SI."""

    atom: str
    sheet: str = "none"
    substrate: str = "vacuum"
    z_A: Optional[float] = None
    gap_d: Optional[float] = None
    doping: Optional[float] = None
    sweep: Optional[str] = None
    grid: tuple = ()
    v_F: float = V_FERMI
    g: float = 4.0
    gamma_hop: float = GAMMA_HOP
    d_layer: float = D_LAYER
    omega_p: float = GOLD_OMEGA_P
    gamma_e: float = GOLD_GAMMA
    transition_omega: Optional[float] = None
    transition_dipole: Optional[float] = None
    atom_state: str = "ground"
    mode: str = Mode.MIXED.value
    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_refinements: int = 2000
    workers: int = 1
    out: Optional[str] = None

    @property
    def is_sweep(self) -> bool:
        return self.sweep is not None

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


# key -> "text", "int", "grid" or (canonical SI unit, unit table)
_KEYS = {
    "atom": "text",
    "sheet": "text",
    "substrate": "text",
    "z_A": ("m", LENGTH),
    "gap_d": ("m", LENGTH),
    "doping": ("m^-2", DOPING),
    "sweep": "text",
    "grid": "grid",
    "v_F": ("m/s", VELOCITY),
    "g": ("", PLAIN),
    "gamma_hop": ("J", ENERGY),
    "d_layer": ("m", LENGTH),
    "omega_p": ("rad/s", FREQUENCY),
    "gamma_e": ("rad/s", FREQUENCY),
    "transition_omega": ("rad/s", FREQUENCY),
    "transition_dipole": ("C m", DIPOLE),
    "atom_state": "text",
    "mode": "text",
    "rel_tol": ("", PLAIN),
    "abs_tol": ("", PLAIN),
    "max_refinements": "int",
    "workers": "int",
    "out": "text",
}
_ALIASES = {"z_a": "z_A", "za": "z_A", "d": "gap_d", "gap": "gap_d", "n": "doping",
            "doping_n": "doping", "v_f": "v_F", "vf": "v_F", "state": "atom_state"}
_AXIS_UNITS = {"z_A": LENGTH, "gap_d": LENGTH, "doping_n": DOPING}
_AXIS_KEY = {"z_A": "z_A", "gap_d": "gap_d", "doping_n": "doping"}

_RANGE = re.compile(r"^(geom|lin)\s*\((.*)\)$", re.IGNORECASE)


def parse_grid(text: str, units: dict) -> tuple:
    text = text.strip()
    m = _RANGE.match(text)
    if m:
        parts = [p.strip() for p in m.group(2).split(",")]
        if len(parts) != 3:
            raise ValueError(f"{m.group(1)}() takes start, stop, count")
        start = parse_quantity(parts[0], units, _default(units))
        stop = parse_quantity(parts[1], units, _default(units))
        try:
            count = int(parts[2])
        except ValueError:
            raise ValueError(f"grid count must be an integer, got {parts[2]!r}") from None
        if count < 1:
            raise ValueError("grid count must be >= 1")
        if m.group(1).lower() == "geom":
            if start <= 0 or stop <= 0:
                raise ValueError("geom() needs positive end points")
            values = np.geomspace(start, stop, count)
        else:
            values = np.linspace(start, stop, count)
        return tuple(float(v) for v in values)
    items = [p for p in (s.strip() for s in text.split(",")) if p]
    if not items:
        raise ValueError("empty grid")
    return tuple(parse_quantity(p, units, _default(units)) for p in items)


def _default(units: dict) -> str:
    for unit, factor in units.items():
        if factor == 1.0:
            return unit
    return ""


def _canonical_key(raw: str) -> Optional[str]:
    if raw in _KEYS:
        return raw
    low = raw.lower()
    if low in _ALIASES:
        return _ALIASES[low]
    for key in _KEYS:
        if key.lower() == low:
            return key
    return None


def parse_scenario(source: Union[IO, bytes, str]) -> ScenarioConfig:
    """Parse and validate a scenario file.

    Errors (unknown key, duplicate key, bad unit, missing or conflicting
    settings) raise :class:`ConfigError` carrying the line number.
    """
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)

    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(source, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError(f"expected 'key: value', got {line!r}", lineno)
        key_text, _, value = line.partition(":")
        key = _canonical_key(key_text.strip())
        if key is None:
            raise ConfigError(f"unknown key {key_text.strip()!r}", lineno, key_text.strip())
        if key in raw:
            raise ConfigError(f"duplicate key {key!r} (first on line {raw[key][1]})", lineno, key)
        raw[key] = (value.strip(), lineno)

    values = {}
    for key, (text, lineno) in raw.items():
        kind = _KEYS[key]
        try:
            if kind == "text":
                values[key] = text
            elif kind == "int":
                values[key] = int(text)
            elif kind == "grid":
                continue  # needs the sweep axis; handled below
            else:
                default_unit, units = kind
                values[key] = parse_quantity(text, units, default_unit.lower())
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}", lineno, key) from None

    if "sweep" in values:
        axis = values["sweep"]
        if axis not in SWEEP_AXES:
            raise ConfigError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}",
                              raw["sweep"][1], "sweep")
        if "grid" not in raw:
            raise ConfigError("sweep given without grid", raw["sweep"][1], "sweep")
        text, lineno = raw["grid"]
        try:
            values["grid"] = parse_grid(text, _AXIS_UNITS[axis])
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}", lineno, "grid") from None
        swept = _AXIS_KEY[axis]
        if swept in raw:
            raise ConfigError(f"{swept} is set and also swept; give one or the other",
                              raw[swept][1], swept)
    elif "grid" in raw:
        raise ConfigError("grid given without a sweep axis", raw["grid"][1], "grid")

    return _validate(values, raw)


def _fail(msg, raw, key):
    raise ConfigError(msg, raw.get(key, (None, None))[1], key)


def _validate(values: dict, raw: dict) -> ScenarioConfig:
    if "atom" not in values:
        raise ConfigError("missing required key 'atom'", None, "atom")
    for key, options in (("sheet", SHEETS), ("substrate", SUBSTRATES), ("mode", MODES),
                         ("atom_state", STATES)):
        if key in values:
            values[key] = values[key].lower()
            if values[key] not in options:
                _fail(f"{key} must be one of {options}, got {values[key]!r}", raw, key)
    cfg = ScenarioConfig(**values)

    if not cfg.is_sweep and cfg.z_A is None:
        raise ConfigError("missing required key 'z_A' (or a sweep over z_A)", None, "z_A")
    if cfg.sweep == "doping_n" and cfg.sheet not in ("doped", "undoped", "none"):
        _fail("a doping sweep needs a Dirac sheet", raw, "sheet")
    if cfg.sheet == "doped" and cfg.doping is None and cfg.sweep != "doping_n":
        _fail("sheet: doped needs a doping value", raw, "sheet")
    if cfg.doping is not None and cfg.sheet != "doped":
        _fail("doping is only meaningful for sheet: doped", raw, "doping")
    if cfg.atom.lower() == "two-level":
        if cfg.transition_omega is None or cfg.transition_dipole is None:
            _fail("atom: two-level needs transition_omega and transition_dipole", raw, "atom")
    elif cfg.transition_omega is not None or cfg.transition_dipole is not None:
        _fail("transition_* keys only apply to atom: two-level", raw,
              "transition_omega" if cfg.transition_omega is not None else "transition_dipole")

    checks = [
        ("z_A", cfg.z_A is None or cfg.z_A > 0, "must be positive"),
        ("gap_d", cfg.gap_d is None or cfg.gap_d >= 0, "must be >= 0"),
        ("doping", cfg.doping is None or cfg.doping > 0, "must be positive"),
        ("v_F", cfg.v_F > 0, "must be positive"),
        ("g", cfg.g > 0, "must be positive"),
        ("gamma_hop", cfg.gamma_hop > 0, "must be positive"),
        ("d_layer", cfg.d_layer > 0, "must be positive"),
        ("omega_p", cfg.omega_p > 0, "must be positive"),
        ("gamma_e", cfg.gamma_e > 0, "must be positive"),
        ("transition_omega", cfg.transition_omega is None or cfg.transition_omega > 0,
         "must be positive"),
        ("transition_dipole", cfg.transition_dipole is None or cfg.transition_dipole >= 0,
         "must be >= 0"),
        ("rel_tol", cfg.rel_tol > 0, "must be positive"),
        ("abs_tol", cfg.abs_tol >= 0, "must be >= 0"),
        ("max_refinements", cfg.max_refinements >= 1, "must be >= 1"),
        ("workers", cfg.workers >= 1, "must be >= 1"),
    ]
    for key, ok, msg in checks:
        if not ok:
            _fail(f"{key} {msg}", raw, key)
    if cfg.is_sweep:
        grid = cfg.grid
        if any(v <= 0 for v in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            _fail("grid must be positive and strictly increasing", raw, "grid")
    return cfg


def serialize(cfg: ScenarioConfig) -> str:
    """Canonical text form in SI units; ``parse_scenario(serialize(c)) == c``."""
    lines = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if value is None or (f.name == "grid" and not value):
            continue
        kind = _KEYS[f.name]
        if kind == "grid":
            unit = " m^-2" if cfg.sweep == "doping_n" else " m"
            lines.append("grid: " + ", ".join(f"{v!r}{unit}" for v in value))
        elif kind in ("text", "int"):
            lines.append(f"{f.name}: {value}")
        else:
            unit = kind[0]
            lines.append(f"{f.name}: {float(value)!r}" + (f" {unit}" if unit else ""))
    return "\n".join(lines) + "\n"


def config_hash(cfg: ScenarioConfig) -> str:
    """Short SHA-256 of the canonical form, for provenance headers."""
    return hashlib.sha256(serialize(cfg).encode("utf-8")).hexdigest()[:16]


# -- building library objects ------------------------------------------------

def build_atom(cfg: ScenarioConfig, base_dir: Union[str, Path, None] = None) -> AtomModel:
    key = cfg.atom
    if key.lower() == "two-level":
        return two_level(cfg.transition_omega, cfg.transition_dipole ** 2,
                         excited=cfg.atom_state == "excited")
    if key.lower() in BUILTIN_ATOMS:
        return load_builtin_atom(key)
    path = Path(key)
    if not path.is_absolute() and base_dir is not None:
        path = Path(base_dir) / path
    with open(path, "rb") as fh:
        return load_atom_fixture(fh)


def build_sheet(cfg: ScenarioConfig, doping: Optional[float] = None) -> Optional[SheetResponse]:
    common = dict(v_F=cfg.v_F, g=cfg.g)
    sheet = cfg.sheet
    n = doping if doping is not None else cfg.doping
    if sheet == "none":
        return None
    if sheet == "undoped":
        return SheetResponse.undoped(**common)
    if sheet == "doped":
        return SheetResponse.doped(n, **common)
    if sheet == "bilayer":
        return SheetResponse.bilayer(gamma_hop=cfg.gamma_hop, d_layer=cfg.d_layer, v_F=cfg.v_F)
    return SheetResponse.perfect()


def build_substrate(cfg: ScenarioConfig) -> SubstrateModel:
    if cfg.substrate == "gold":
        return SubstrateModel.gold()
    if cfg.substrate == "drude":
        return SubstrateModel.drude(cfg.omega_p, cfg.gamma_e)
    if cfg.substrate == "perfect":
        return SubstrateModel.perfect()
    return SubstrateModel.vacuum()


def build_quad(cfg: ScenarioConfig) -> QuadratureSpec:
    return QuadratureSpec(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                          max_refinements=cfg.max_refinements)


def build_scenario(cfg: ScenarioConfig, base_dir: Union[str, Path, None] = None) -> Scenario:
    """Scenario for a single point, or the sweep template (first grid value fills the axis)."""
    doping = cfg.grid[0] if cfg.sweep == "doping_n" else None
    if cfg.sweep == "doping_n" and cfg.sheet in ("none", "undoped"):
        sheet = build_sheet(cfg.replace(sheet="doped"), doping)
    else:
        sheet = build_sheet(cfg, doping)
    gap = cfg.gap_d if cfg.gap_d is not None else (cfg.grid[0] if cfg.sweep == "gap_d" else 0.0)
    stack = LayerStack(sheet, gap, build_substrate(cfg))
    z = cfg.z_A if cfg.z_A is not None else cfg.grid[0]
    return Scenario(build_atom(cfg, base_dir), stack, z, build_quad(cfg), Mode(cfg.mode))
