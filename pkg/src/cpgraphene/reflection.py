"""TM/TE reflection coefficients of the planar stack

    vacuum (atom) | sheet | vacuum gap d | substrate half-space

on the imaginary frequency axis and, for the resonant term, at real frequency.
Everything is vectorised over the in-plane wavenumber k.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .constants import C, GOLD_GAMMA, GOLD_OMEGA_P
from .sheets import DomainError, SheetKind, SheetResponse, sheet_alpha, sheet_alpha_real_axis


class Mode(str, enum.Enum):
    """How retardation is treated.

    ``MIXED``: retarded substrate and gap phase, nonretarded sheet (the default).
    ``NONRETARDED``: kappa -> k everywhere.
    """

    MIXED = "mixed"
    NONRETARDED = "nonretarded"


class SubstrateKind(str, enum.Enum):
    DRUDE = "drude"
    PERFECT = "perfect"
    VACUUM = "vacuum"


@dataclass(frozen=True)
class SubstrateModel:
    kind: SubstrateKind = SubstrateKind.VACUUM
    omega_p: float = GOLD_OMEGA_P
    gamma: float = GOLD_GAMMA

    def __post_init__(self):
        object.__setattr__(self, "kind", SubstrateKind(self.kind))
        if self.kind is SubstrateKind.DRUDE and not (self.omega_p > 0 and self.gamma > 0):
            raise ValueError("Drude parameters must be positive")

    @classmethod
    def gold(cls):
        return cls(SubstrateKind.DRUDE, GOLD_OMEGA_P, GOLD_GAMMA)

    @classmethod
    def drude(cls, omega_p: float, gamma: float):
        return cls(SubstrateKind.DRUDE, omega_p, gamma)

    @classmethod
    def perfect(cls):
        return cls(SubstrateKind.PERFECT)

    @classmethod
    def vacuum(cls):
        return cls(SubstrateKind.VACUUM)


@dataclass(frozen=True)
class LayerStack:
    sheet: Optional[SheetResponse] = None
    gap_d: float = 0.0
    substrate: SubstrateModel = SubstrateModel()

    def __post_init__(self):
        if not self.gap_d >= 0:
            raise ValueError(f"gap_d must be >= 0, got {self.gap_d}")

    @property
    def is_vacuum(self) -> bool:
        return self.sheet is None and self.substrate.kind is SubstrateKind.VACUUM

    def with_gap(self, d: float) -> "LayerStack":
        return LayerStack(self.sheet, d, self.substrate)

    def without_substrate(self) -> "LayerStack":
        return LayerStack(self.sheet, self.gap_d, SubstrateModel.vacuum())


class ReflectionPair(NamedTuple):
    r_tm: np.ndarray
    r_te: np.ndarray


def drude_eps_imag(sub: SubstrateModel, xi):
    """eps(i xi) = 1 + omega_p^2 / (xi (xi + gamma))."""
    xi = np.asarray(xi, dtype=float)
    if np.any(xi <= 0):
        raise DomainError("the Drude permittivity diverges at xi = 0")
    out = 1.0 + sub.omega_p ** 2 / (xi * (xi + sub.gamma))
    return out.item() if out.ndim == 0 else out


def drude_eps_real(sub: SubstrateModel, omega):
    """eps(omega) = 1 - omega_p^2 / (omega (omega + i gamma))."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("omega must be > 0")
    out = 1.0 - sub.omega_p ** 2 / (omega * (omega + 1j * sub.gamma))
    return out.item() if out.ndim == 0 else out


def _fresnel_with_complement(sub: SubstrateModel, k, xi, mode: Mode):
    """(R_TM, R_TE, 1 - R_TM), the complement in closed form."""
    k = np.asarray(k, dtype=float)
    xi = np.asarray(xi, dtype=float)
    shape = np.broadcast(k, xi).shape
    if sub.kind is SubstrateKind.VACUUM:
        return np.zeros(shape), np.zeros(shape), np.ones(shape)
    if sub.kind is SubstrateKind.PERFECT:
        return np.ones(shape), -np.ones(shape), np.zeros(shape)
    eps = drude_eps_imag(sub, xi)
    if Mode(mode) is Mode.NONRETARDED:
        r_tm = np.broadcast_to((eps - 1.0) / (eps + 1.0), shape).copy()
        return r_tm, np.zeros(shape), np.broadcast_to(2.0 / (eps + 1.0), shape).copy()
    q2 = (xi / C) ** 2
    kappa0 = np.sqrt(k * k + q2)
    kappas = np.sqrt(k * k + eps * q2)
    denom = eps * kappa0 + kappas
    r_tm = (eps * kappa0 - kappas) / denom
    r_te = (kappa0 - kappas) / (kappa0 + kappas)
    return (np.broadcast_to(r_tm, shape).copy(), np.broadcast_to(r_te, shape).copy(),
            np.broadcast_to(2.0 * kappas / denom, shape).copy())


def fresnel_substrate(sub: SubstrateModel, k, xi, mode: Mode = Mode.MIXED) -> ReflectionPair:
    """Vacuum/substrate Fresnel coefficients at imaginary frequency.

    R_TM = (eps kappa_0 - kappa_s) / (eps kappa_0 + kappa_s),
    R_TE = (kappa_0 - kappa_s) / (kappa_0 + kappa_s),
    kappa_i = sqrt(k^2 + eps_i xi^2 / c^2). In nonretarded mode the kappas are
    set equal, leaving R_TM = (eps - 1)/(eps + 1) and R_TE = 0.
    """
    r_tm, r_te, _ = _fresnel_with_complement(sub, k, xi, mode)
    return ReflectionPair(r_tm, r_te)


def _sheet_with_complement(sheet: SheetResponse, k, xi):
    """(R_TM, R_TE, 1 - R_TM) with 1 - R_TM = 1 / (1 + alpha)."""
    k = np.asarray(k, dtype=float)
    xi = np.asarray(xi, dtype=float)
    shape = np.broadcast(k, xi).shape
    if sheet.kind is SheetKind.PERFECT:
        return np.ones(shape), -np.ones(shape), np.zeros(shape)
    alpha = np.broadcast_to(np.asarray(sheet_alpha(sheet, k, xi), dtype=float), shape)
    return alpha / (1.0 + alpha), np.zeros(shape), 1.0 / (1.0 + alpha)


def sheet_reflection(sheet: SheetResponse, k, xi) -> ReflectionPair:
    """R_TM = alpha / (1 + alpha) with gamma_0z -> 1; graphene has no TE channel."""
    r_tm, r_te, _ = _sheet_with_complement(sheet, k, xi)
    return ReflectionPair(r_tm, r_te)


def compose(r_sheet: ReflectionPair, r_sub: ReflectionPair, phase,
            sheet_tm_complement=None, sub_tm_complement=None,
            phase_complement=None) -> ReflectionPair:
    """Sheet above substrate; ``phase`` is exp(2 i k_z d) (exp(-2 kappa d) on the imaginary axis).

    TE uses T = 1 + R_G and TM uses T = 1 - R_G for the sheet transmission:
    R = R_G + T^2 x / (1 - R_G x) with x = R_sub * phase. Evaluated as

        TM: R = 1 - (1 - R_G)(1 - x) / (1 - R_G x)
        TE: R = -1 + (1 + R_G)(1 + x) / (1 - R_G x)

    which stays accurate when R_G and x both approach a mirror. The optional
    complements 1 - R_G, 1 - R_sub (TM) and 1 - phase may be supplied in
    closed form; otherwise they are formed by subtraction.
    """
    rg_tm = np.asarray(r_sheet.r_tm)
    rs_tm = np.asarray(r_sub.r_tm)
    phase = np.asarray(phase)
    cg = 1.0 - rg_tm if sheet_tm_complement is None else np.asarray(sheet_tm_complement)
    cs = 1.0 - rs_tm if sub_tm_complement is None else np.asarray(sub_tm_complement)
    cp = 1.0 - phase if phase_complement is None else np.asarray(phase_complement)

    x = rs_tm * phase
    one_minus_x = cs + rs_tm * cp
    denom = one_minus_x + x * cg  # = 1 - R_G x
    with np.errstate(divide="ignore", invalid="ignore"):
        tm = 1.0 - cg * one_minus_x / denom
    # perfect sheet (cg = 0): R = 1 even when the substrate is a touching mirror
    tm = np.where(cg == 0, 1.0, tm)
    # substrate out of reach: keep R_G bit for bit
    tm = np.where(x == 0, rg_tm, tm)

    rg_te = np.asarray(r_sheet.r_te)
    x_te = np.asarray(r_sub.r_te) * phase
    with np.errstate(divide="ignore", invalid="ignore"):
        te = -1.0 + (1.0 + rg_te) * (1.0 + x_te) / (1.0 - rg_te * x_te)
    te = np.where(1.0 + rg_te == 0, -1.0, te)
    return ReflectionPair(tm, te)


def stack_reflection(stack: LayerStack, k, xi, mode: Mode = Mode.MIXED) -> ReflectionPair:
    """Effective reflection seen from the atom's side at imaginary frequency xi."""
    k = np.asarray(k, dtype=float)
    xi = np.asarray(xi, dtype=float)
    sub_tm, sub_te, sub_c = _fresnel_with_complement(stack.substrate, k, xi, mode)
    if stack.sheet is None:
        return ReflectionPair(sub_tm, sub_te)
    sheet_tm, sheet_te, sheet_c = _sheet_with_complement(stack.sheet, k, xi)
    if stack.substrate.kind is SubstrateKind.VACUUM:
        return ReflectionPair(sheet_tm, sheet_te)
    if Mode(mode) is Mode.NONRETARDED:
        kappa = k
    else:
        kappa = np.sqrt(k * k + (xi / C) ** 2)
    phase = np.exp(-2.0 * kappa * stack.gap_d)
    return compose(ReflectionPair(sheet_tm, sheet_te), ReflectionPair(sub_tm, sub_te), phase,
                   sheet_c, sub_c, -np.expm1(-2.0 * kappa * stack.gap_d))


def _kz_imag(k, eps_w2_c2):
    """sqrt(k^2 - eps omega^2 / c^2) with Re >= 0 (decaying) and Im <= 0 (outgoing)."""
    arg = k * k - eps_w2_c2
    root = np.sqrt(np.asarray(arg, dtype=complex))
    # vacuum with k < omega/c sits on the cut: pick -i sqrt(|arg|)
    return np.where((root.real == 0) & (root.imag > 0), -root, root)


def fresnel_substrate_real_axis(sub: SubstrateModel, k, omega) -> ReflectionPair:
    k = np.asarray(k, dtype=float)
    omega = np.asarray(omega, dtype=float)
    shape = np.broadcast(k, omega).shape
    if sub.kind is SubstrateKind.VACUUM:
        return ReflectionPair(np.zeros(shape, complex), np.zeros(shape, complex))
    if sub.kind is SubstrateKind.PERFECT:
        return ReflectionPair(np.ones(shape, complex), -np.ones(shape, complex))
    eps = drude_eps_real(sub, omega)
    w2 = (omega / C) ** 2
    k0 = _kz_imag(k, w2 + 0 * k)
    ks = _kz_imag(k, eps * w2 + 0 * k)
    r_tm = (eps * k0 - ks) / (eps * k0 + ks)
    r_te = (k0 - ks) / (k0 + ks)
    return ReflectionPair(np.broadcast_to(r_tm, shape), np.broadcast_to(r_te, shape))


def sheet_reflection_real_axis(sheet: SheetResponse, k, omega) -> ReflectionPair:
    k = np.asarray(k, dtype=float)
    omega = np.asarray(omega, dtype=float)
    shape = np.broadcast(k, omega).shape
    if sheet.kind is SheetKind.PERFECT:
        return ReflectionPair(np.ones(shape, complex), -np.ones(shape, complex))
    alpha = np.asarray(sheet_alpha_real_axis(sheet, k, omega))
    return ReflectionPair(np.broadcast_to(alpha / (1.0 + alpha), shape), np.zeros(shape, complex))


def stack_reflection_real_axis(stack: LayerStack, k, omega) -> ReflectionPair:
    """Complex reflection coefficients at real frequency omega > 0.

    Same composition rules as :func:`stack_reflection`; the gap phase is
    exp(-2 kappa d) with kappa = sqrt(k^2 - omega^2/c^2) on the decaying/outgoing branch.
    """
    k = np.asarray(k, dtype=float)
    omega = np.asarray(omega, dtype=float)
    r_sub = fresnel_substrate_real_axis(stack.substrate, k, omega)
    if stack.sheet is None:
        return r_sub
    r_sheet = sheet_reflection_real_axis(stack.sheet, k, omega)
    if stack.substrate.kind is SubstrateKind.VACUUM:
        return r_sheet
    kappa = _kz_imag(k, (omega / C) ** 2 + 0 * k)
    phase = np.exp(-2.0 * kappa * stack.gap_d)
    return compose(r_sheet, r_sub, phase)
