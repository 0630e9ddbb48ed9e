"""Casimir-Polder potential of an atom above a planar stack.

Nonresonant part (imaginary frequencies)::

    U/hbar = mu0/(8 pi^2) int_0^inf dxi xi^2 alpha(i xi)
             int_0^inf dk (k/kappa) exp(-2 kappa z) [R_TE + R_TM (1 - 2 kappa^2 c^2 / xi^2)]

with kappa = sqrt(k^2 + xi^2/c^2). The inner integral is done in
u = kappa - xi/c (so k dk / kappa = du) and the factor exp(-2 xi z / c)
is pulled out. Resonant part for excited atoms, one integral per emission line
at its real frequency omega::

    U_R/hbar = -mu0/(4 pi hbar) sum d2 omega^2
               int_0^inf dkappa exp(-2 kappa z) [Re R_TE + Re R_TM (1 + 2 kappa^2 c^2 / omega^2)]

with the reflection coefficients taken at k = kappa.
"""
from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .atoms import AtomModel, downward_transitions, polarizability_imag
from .constants import C, HBAR, MU0
from .numerics import QuadratureError, QuadratureSpec, integrate_interval, integrate_semi_infinite
from .reflection import (LayerStack, Mode, SubstrateKind, SubstrateModel, stack_reflection,
                         stack_reflection_real_axis)
from .sheets import SheetKind, SheetResponse, fermi_parameters

#: lower end of the xi integration, rad/s; keeps Drude and bilayer responses finite
XI_MIN = 1e-3

DEFAULT_QUAD = QuadratureSpec(rel_tol=1e-8)


@dataclass(frozen=True)
class PotentialResult:
    """U/hbar in rad/s split into nonresonant and resonant parts."""

    u_over_hbar: float
    u_joule: float
    nonresonant: float
    resonant: float
    err_estimate: float

    @classmethod
    def from_parts(cls, nonresonant: float = 0.0, resonant: float = 0.0,
                   err_estimate: float = 0.0) -> "PotentialResult":
        total = nonresonant + resonant
        return cls(total, HBAR * total, nonresonant, resonant, err_estimate)

    def __add__(self, other: "PotentialResult") -> "PotentialResult":
        return PotentialResult.from_parts(self.nonresonant + other.nonresonant,
                                          self.resonant + other.resonant,
                                          math.hypot(self.err_estimate, other.err_estimate))


@dataclass(frozen=True)
class Scenario:
    atom: AtomModel
    stack: LayerStack
    z_A: float
    quad: QuadratureSpec = DEFAULT_QUAD
    mode: Mode = Mode.MIXED

    def __post_init__(self):
        if not self.z_A > 0:
            raise ValueError(f"z_A must be positive, got {self.z_A}")
        object.__setattr__(self, "mode", Mode(self.mode))

    def replace(self, **changes) -> "Scenario":
        return dataclasses.replace(self, **changes)


class StageError(QuadratureError):
    """Quadrature failure tagged with the integration stage ('xi', 'k' or 'kappa')."""

    def __init__(self, stage: str, cause: QuadratureError, where: str = ""):
        msg = f"{stage}-integral failed{where}: {cause}"
        super().__init__(msg, cause.estimate, cause.error)
        self.stage = stage


def _xi_scale(s: Scenario) -> float:
    scale = s.atom.dominant_frequency
    if s.mode is Mode.MIXED:
        scale = min(scale, C / (2 * s.z_A))
    return scale


def _inner_k_integral(s: Scenario, xi: float, spec: QuadratureSpec) -> tuple[float, float]:
    """int du exp(-2 u z) [xi^2 (R_TE + R_TM) - 2 c^2 kappa^2 R_TM].

    In nonretarded mode (c -> infinity) only -2 c^2 k^2 R_TM survives.
    """
    z = s.z_A
    retarded = s.mode is Mode.MIXED
    q = xi / C if retarded else 0.0

    def integrand(u):
        kappa = u + q
        k = np.sqrt(u * (u + 2 * q))
        r = stack_reflection(s.stack, k, xi, s.mode)
        bracket = -2 * C * C * kappa * kappa * r.r_tm
        if retarded:
            bracket = bracket + xi * xi * (r.r_te + r.r_tm)
        return np.exp(-2 * u * z) * bracket

    return integrate_semi_infinite(integrand, spec)


def nonresonant_potential(s: Scenario) -> PotentialResult:
    """Imaginary-frequency (nonresonant) part of the potential."""
    if s.stack.is_vacuum:
        return PotentialResult.from_parts()
    z = s.z_A
    inner_spec = s.quad.replace(rel_tol=s.quad.rel_tol / 10, abs_tol=0.0,
                                map_scale=1 / (2 * z))
    outer_spec = s.quad.replace(map_scale=_xi_scale(s), abs_tol=0.0)
    retard = 1.0 if s.mode is Mode.MIXED else 0.0
    worst_inner = [0.0]

    def outer(xp):
        xis = XI_MIN + np.asarray(xp, dtype=float)
        out = np.empty_like(xis)
        alpha = polarizability_imag(s.atom, xis)
        for i, xi in enumerate(xis):
            weight = alpha[i] * math.exp(-2 * xi * z * retard / C)
            if weight == 0.0:
                out[i] = 0.0
                continue
            try:
                val, err = _inner_k_integral(s, float(xi), inner_spec)
            except QuadratureError as exc:
                raise StageError("k", exc, f" at xi = {xi:.6g} rad/s") from exc
            if val != 0.0:
                worst_inner[0] = max(worst_inner[0], err / abs(val))
            out[i] = weight * val
        return out

    try:
        value, err = integrate_semi_infinite(outer, outer_spec)
    except StageError:
        raise
    except QuadratureError as exc:
        raise StageError("xi", exc) from exc
    prefactor = MU0 / (8 * math.pi ** 2)
    u = prefactor * value
    total_err = math.hypot(prefactor * err, worst_inner[0] * abs(u))
    return PotentialResult.from_parts(nonresonant=u, err_estimate=total_err)


def _tm_poles(stack: LayerStack, omega: float, k_lo: float, k_hi: float,
              samples: int = 1500) -> list[float]:
    """Real-axis poles of R_TM (guided plasmon modes) inside [k_lo, k_hi].

    A pole shows up as a sign change of Re(1/R_TM) where |R_TM| is large; it
    is bracketed on a log grid and refined with Brent's method.
    """
    def inv(k):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (1.0 / stack_reflection_real_axis(stack, k, omega).r_tm).real

    grid = np.geomspace(k_lo, k_hi, samples)
    g = inv(grid)
    poles = []
    for i in np.flatnonzero(np.isfinite(g[:-1]) & np.isfinite(g[1:]) & (g[:-1] * g[1:] < 0)):
        root = brentq(lambda k: float(inv(k)), grid[i], grid[i + 1], xtol=1e-300, rtol=1e-15)
        if abs(stack_reflection_real_axis(stack, root, omega).r_tm) > 1e3:
            poles.append(root)
    return poles


def _resonant_breakpoints(stack: LayerStack, omega: float) -> list[float]:
    """Kinks of the real-axis reflection coefficients in kappa."""
    points = [omega / C]
    sheet = stack.sheet
    if sheet is not None and sheet.kind in (SheetKind.UNDOPED, SheetKind.DOPED):
        points.append(omega / sheet.v_F)
        if sheet.kind is SheetKind.DOPED:
            _, e_F, _ = fermi_parameters(sheet.n, sheet.v_F, sheet.g)
            w_F = 2 * e_F / HBAR
            points += [(omega + w_F) / sheet.v_F, abs(omega - w_F) / sheet.v_F]
    return sorted(set(p for p in points if p > 0))


def _pole_windows(stack: LayerStack, omega: float, z: float,
                  points: Sequence[float]) -> list[tuple[float, float]]:
    """(pole, half-width) pairs; windows avoid each other and the kinks."""
    sheet = stack.sheet
    if sheet is None or sheet.kind is not SheetKind.DOPED:
        return []
    poles = _tm_poles(stack, omega, 1e-3 * min(omega / C, 1 / z), 40 / z)
    others = list(points) + poles
    windows = []
    for pole in poles:
        gaps = [abs(pole - q) for q in others if q != pole]
        half = min([0.01 * pole] + [0.5 * g for g in gaps])
        windows.append((pole, half))
    return windows


def resonant_line_integral(stack: LayerStack, omega: float, z: float,
                           spec: QuadratureSpec) -> tuple[float, float]:
    """int dkappa exp(-2 kappa z) [omega^2 Re R_TE + Re R_TM (omega^2 + 2 kappa^2 c^2)].

    A guided plasmon puts a narrow pole of R_TM on the real kappa axis. Near
    it Re R_TM is odd about the pole, so a small window around each pole is
    integrated in folded form f(p + x) + f(p - x), where the singular part
    cancels, and masked out of the main integral.
    """

    def integrand(kappa):
        r = stack_reflection_real_axis(stack, kappa, omega)
        return np.exp(-2 * kappa * z) * (
            omega * omega * r.r_te.real
            + r.r_tm.real * (omega * omega + 2 * C * C * kappa * kappa))

    points = _resonant_breakpoints(stack, omega)
    windows = _pole_windows(stack, omega, z, points)

    def masked(kappa):
        kappa = np.asarray(kappa, dtype=float)
        inside = np.zeros(kappa.shape, dtype=bool)
        for pole, half in windows:
            inside |= np.abs(kappa - pole) < half
        out = np.zeros(kappa.shape)
        if not inside.all():
            out[~inside] = integrand(kappa[~inside])
        return out

    edges = points + [p + s * h for p, h in windows for s in (-1, 1)]
    main_spec = spec.replace(map_scale=1 / (2 * z), abs_tol=0.0)
    value, err = integrate_semi_infinite(masked, main_spec, points=edges)
    for pole, half in windows:
        folded_spec = spec.replace(abs_tol=spec.rel_tol * abs(value))
        v, e = integrate_interval(lambda x, p=pole: integrand(p + x) + integrand(p - x),
                                  0.0, half, folded_spec)
        value += v
        err += e
    return value, err


def resonant_potential(s: Scenario) -> PotentialResult:
    """Real-frequency (resonant) part; zero for ground states."""
    lines = downward_transitions(s.atom)
    if not lines or s.stack.is_vacuum:
        return PotentialResult.from_parts()
    total = 0.0
    err2 = 0.0
    prefactor = -MU0 / (4 * math.pi * HBAR)
    for t in lines:
        if t.d2 == 0:
            continue
        try:
            val, err = resonant_line_integral(s.stack, -t.omega, s.z_A, s.quad)
        except QuadratureError as exc:
            raise StageError("kappa", exc, f" for the line at {-t.omega:.6g} rad/s") from exc
        total += prefactor * t.d2 * val
        err2 += (prefactor * t.d2 * err) ** 2
    return PotentialResult.from_parts(resonant=total, err_estimate=math.sqrt(err2))


def total_potential(s: Scenario) -> PotentialResult:
    return nonresonant_potential(s) + resonant_potential(s)


def sheet_alone(s: Scenario) -> Scenario:
    return s.replace(stack=s.stack.without_substrate())


def shielding_ratio(atom: AtomModel, sheet: SheetResponse, substrate: SubstrateModel,
                    z_A: float, d: float, quad: QuadratureSpec = DEFAULT_QUAD,
                    mode: Mode = Mode.MIXED) -> float:
    """U(sheet over substrate at gap d) / U(sheet alone), both at height z_A."""
    if sheet is None:
        raise ValueError("the shielding ratio needs a sheet")
    if substrate.kind is SubstrateKind.VACUUM:
        return 1.0
    composite = Scenario(atom, LayerStack(sheet, d, substrate), z_A, quad, mode)
    reference = sheet_alone(composite)
    u_ref = total_potential(reference).u_over_hbar
    if u_ref == 0:
        raise ZeroDivisionError("sheet-alone potential vanishes")
    return total_potential(composite).u_over_hbar / u_ref


# -- sweeps -----------------------------------------------------------------

SWEEP_AXES = ("z_A", "gap_d", "doping_n")


@dataclass(frozen=True)
class SweepRow:
    value: float
    result: Optional[PotentialResult]
    ratio: float = float("nan")
    error: str = ""


def scenario_at(template: Scenario, axis: str, value: float) -> Scenario:
    if axis == "z_A":
        return template.replace(z_A=value)
    if axis == "gap_d":
        return template.replace(stack=template.stack.with_gap(value))
    if axis == "doping_n":
        old = template.stack.sheet or SheetResponse()
        sheet = dataclasses.replace(old, kind=SheetKind.DOPED, n=value)
        stack = dataclasses.replace(template.stack, sheet=sheet)
        return template.replace(stack=stack)
    raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def _has_ratio(s: Scenario) -> bool:
    return s.stack.sheet is not None and s.stack.substrate.kind is not SubstrateKind.VACUUM


def evaluate_row(template: Scenario, axis: str, value: float,
                 reference: Optional[float] = None) -> SweepRow:
    """One sweep point; numerical failures are captured in the row."""
    s = scenario_at(template, axis, value)
    try:
        result = total_potential(s)
        ratio = float("nan")
        if _has_ratio(s):
            ref = reference if reference is not None else total_potential(sheet_alone(s)).u_over_hbar
            ratio = result.u_over_hbar / ref
        return SweepRow(value, result, ratio)
    except (QuadratureError, ZeroDivisionError, ValueError) as exc:
        return SweepRow(value, None, float("nan"), f"{type(exc).__name__}: {exc}")


def _evaluate_row_args(args):
    return evaluate_row(*args)


def sweep(template: Scenario, axis: str, grid: Sequence[float], workers: int = 1) -> list[SweepRow]:
    """Evaluate ``template`` along ``axis`` at each grid value.

    Rows are independent; with ``workers > 1`` they run in separate processes.
    """
    grid = [float(v) for v in grid]
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    if not grid:
        raise ValueError("sweep grid is empty")
    if any(v <= 0 for v in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("sweep grid must be positive and strictly increasing")

    reference = None
    if axis == "gap_d" and _has_ratio(template):
        try:
            reference = total_potential(sheet_alone(template)).u_over_hbar
        except QuadratureError:
            reference = None
    jobs = [(template, axis, v, reference) for v in grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate_row_args, jobs))
    return [evaluate_row(*job) for job in jobs]
