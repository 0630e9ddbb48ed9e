"""Atomic states as lists of dipole transitions.

A :class:`Transition` stores the signed frequency omega_k = (E_k - E_n)/hbar
to a coupled state k (positive when k lies above the atom's state n) and the
direction-averaged squared dipole d2, normalised so the isotropic
polarizability is alpha(0) = sum 2 d2 / (hbar omega).
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from importlib import resources
from typing import IO, Union

import numpy as np

from .constants import HBAR


class AtomFixtureError(ValueError):
    """Malformed atom fixture; ``lineno`` is 1-based."""

    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Transition:
    omega: float  # rad/s, signed
    d2: float  # C^2 m^2

    def __post_init__(self):
        if not np.isfinite(self.omega) or self.omega == 0:
            raise ValueError(f"transition frequency must be finite and nonzero, got {self.omega}")
        if not np.isfinite(self.d2) or self.d2 < 0:
            raise ValueError(f"d2 must be finite and >= 0, got {self.d2}")


@dataclass(frozen=True)
class AtomModel:
    name: str
    state: str
    transitions: tuple[Transition, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "transitions", tuple(self.transitions))
        if not self.transitions:
            raise ValueError("an atom needs at least one transition")
        if self.state.strip().lower() == "ground" and not self.is_ground:
            raise ValueError("a ground-state model may only couple to states above it")

    @property
    def is_ground(self) -> bool:
        return all(t.omega > 0 for t in self.transitions)

    @property
    def dominant_frequency(self) -> float:
        """Oscillator-strength weighted mean of |omega|, a natural xi scale."""
        w = np.array([abs(t.omega) for t in self.transitions])
        s = np.array([t.d2 * abs(t.omega) for t in self.transitions])
        if s.sum() == 0:
            return float(w.min())
        return float(np.dot(w, s) / s.sum())

    def scaled(self, factor: float) -> "AtomModel":
        return AtomModel(self.name, self.state,
                         tuple(Transition(t.omega, t.d2 * factor) for t in self.transitions))


def two_level(omega: float, d2: float, excited: bool = False, name: str = "two-level") -> AtomModel:
    """Two-level atom; ``excited=True`` puts the atom in the upper level."""
    if excited:
        return AtomModel(name, "excited", (Transition(-abs(omega), d2),))
    return AtomModel(name, "ground", (Transition(abs(omega), d2),))


def polarizability_imag(atom: AtomModel, xi):
    """alpha(i xi) = (2/hbar) sum omega d2 / (omega^2 + xi^2), in C^2 m^2 / J.

    ``xi`` may be a scalar or an array.
    """
    xi = np.asarray(xi, dtype=float)
    if np.any(xi < 0):
        raise ValueError("xi must be >= 0")
    xi2 = xi * xi
    total = np.zeros_like(xi)
    for t in atom.transitions:
        total = total + t.omega * t.d2 / (t.omega * t.omega + xi2)
    out = 2.0 / HBAR * total
    return float(out) if out.ndim == 0 else out


def downward_transitions(atom: AtomModel) -> list[Transition]:
    """Emission channels: transitions to lower states (omega < 0).

    The transitions are returned unchanged; the emission frequency is
    ``-t.omega``.
    """
    return [t for t in atom.transitions if t.omega < 0]


def load_atom_fixture(source: Union[IO, bytes, str]) -> AtomModel:
    """Parse the plain-text fixture format.

    ``#`` starts a comment; ``name:`` and ``state:`` header lines; every other
    non-blank line is ``omega_rad_per_s  d_squared_C2m2`` in SI units.
    """
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)
    header = {}
    transitions = []
    lineno = 0
    for lineno, raw in enumerate(source, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line:
            key, _, value = line.partition(":")
            key = key.strip().lower()
            if key not in ("name", "state"):
                raise AtomFixtureError(f"unknown header key {key!r}", lineno)
            header[key] = value.strip()
            continue
        parts = line.split()
        if len(parts) != 2:
            raise AtomFixtureError(f"expected 'omega d2', got {line!r}", lineno)
        try:
            omega, d2 = float(parts[0]), float(parts[1])
        except ValueError:
            raise AtomFixtureError(f"cannot parse numbers in {line!r}", lineno) from None
        if d2 < 0:
            raise AtomFixtureError(f"negative d2 {d2}", lineno)
        if omega == 0 or not np.isfinite(omega):
            raise AtomFixtureError(f"invalid transition frequency {omega}", lineno)
        transitions.append(Transition(omega, d2))
    if not transitions:
        raise AtomFixtureError("no transitions found", max(lineno, 1))
    try:
        return AtomModel(header.get("name", "atom"), header.get("state", "ground"), tuple(transitions))
    except ValueError as exc:
        raise AtomFixtureError(str(exc), lineno) from None


BUILTIN_ATOMS = {
    "rb-ground": "rb_ground.txt",
    "rb-32s": "rb_32s.txt",
    "rb-43s": "rb_43s.txt",
    "rb-54s": "rb_54s.txt",
}


def load_builtin_atom(key: str) -> AtomModel:
    try:
        filename = BUILTIN_ATOMS[key.lower()]
    except KeyError:
        raise KeyError(f"unknown built-in atom {key!r}; choose from {sorted(BUILTIN_ATOMS)}") from None
    with resources.files("cpgraphene.data").joinpath(filename).open("r") as fh:
        return load_atom_fixture(fh)


def static_polarizability(atom: AtomModel) -> float:
    return polarizability_imag(atom, 0.0)
