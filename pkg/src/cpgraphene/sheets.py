"""Response functions of graphene sheets in the Dirac model.

Density-density correlation functions chi(k, i xi) for undoped and doped
single layers, the AB-bilayer conductivities and the dimensionless sheet
polarizability alpha(k, i xi) = -e^2 chi / (2 eps0 k) = sigma(i xi) k / (2 eps0 xi)
that enters the TM reflection coefficient.

All frequencies are angular (rad/s), wavenumbers in 1/m and doping in 1/m^2.
Energies given as parameters (the interlayer hopping) are in joules.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .constants import D_LAYER, E_CHARGE, EPS0, GAMMA_HOP, HBAR, V_FERMI
from .numerics import QuadratureSpec, make_complex, casin, kramers_kronig_dissipative


class DomainError(ValueError):
    """Argument outside the domain where a response function is defined."""


class SheetKind(str, enum.Enum):
    UNDOPED = "undoped"
    DOPED = "doped"
    BILAYER = "bilayer"
    PERFECT = "perfect"


def _as_array(x, dtype=float):
    return np.asarray(x, dtype=dtype)


def _scalar_or_array(out):
    return np.asarray(out).item() if np.ndim(out) == 0 else out


def chi_undoped(k, xi, v_F: float = V_FERMI, g: float = 4.0):
    """chi(k, i xi) = -(g / 16 hbar) k^2 / sqrt(v_F^2 k^2 + xi^2), units 1/(J m^2).

    A complex ``xi`` = -i (omega + i0) continues the function to real frequencies.
    """
    k = _as_array(k)
    xi = np.asarray(xi)
    if np.any(k < 0):
        raise DomainError("k must be >= 0")
    if np.any((k == 0) & (xi == 0)):
        raise DomainError("chi_undoped is undefined at k = 0, xi = 0")
    root = np.sqrt(v_F * v_F * k * k + xi * xi)
    return _scalar_or_array(-(g / (16.0 * HBAR)) * k * k / root)


def fermi_parameters(n: float, v_F: float = V_FERMI, g: float = 4.0):
    """(k_F, E_F, D0) for doping n: k_F = sqrt(4 pi n / g), E_F = hbar v_F k_F,
    D0 = sqrt(g n / (pi hbar^2 v_F^2))."""
    if not n > 0:
        raise DomainError(f"doping must be positive, got {n}")
    k_F = np.sqrt(4 * np.pi * n / g)
    e_F = HBAR * v_F * k_F
    d0 = np.sqrt(g * n / (np.pi * HBAR ** 2 * v_F ** 2))
    return k_F, e_F, d0


def f_doped(k_tilde, xi_tilde):
    """The combination of complex arcsines and roots in the doped chi, taken
    term by term. Real up to rounding for real xi_tilde >= 0."""
    kt = _as_array(k_tilde)
    xt = _as_array(xi_tilde)
    if np.any(kt <= 0):
        raise DomainError("k_tilde must be > 0")
    plus = make_complex(1.0 / kt, xt / kt)  # (1 + i xi)/k
    minus = make_complex(1.0 / kt, -(xt / kt))  # (1 - i xi)/k, -0 imaginary part at xi = 0
    root_plus = np.sqrt(_one_minus_square(plus))
    root_minus = np.sqrt(_one_minus_square(minus))
    out = casin(minus) + casin(plus) + minus * root_minus + plus * root_plus
    return _scalar_or_array(out)


def _one_minus_square(w):
    x, y = w.real, w.imag
    return make_complex(1.0 - x * x + y * y, -2.0 * x * y)


def _chi_doped_complex(k, xi, n, v_F, g):
    k_F, e_F, d0 = fermi_parameters(n, v_F, g)
    kt = _as_array(k) / (2 * k_F)
    xt = np.asarray(xi) * (HBAR / (2 * e_F))
    if np.any(kt <= 0):
        raise DomainError("k must be > 0")
    if np.iscomplexobj(xt):
        plus = (1.0 + 1j * xt) / kt
        minus = (1.0 - 1j * xt) / kt
    else:
        plus = make_complex(1.0 / kt, xt / kt)
        minus = make_complex(1.0 / kt, -(xt / kt))
    # f = 4 xi/k^2 + R(plus) + R(minus): the large pieces of the two
    # w sqrt(1 - w^2) terms cancel analytically, leaving well-conditioned rests.
    r_plus = casin(plus) + plus / (np.sqrt(_one_minus_square(plus)) - 1j * plus)
    r_minus = casin(minus) + minus / (np.sqrt(_one_minus_square(minus)) + 1j * minus)
    s = np.sqrt(kt * kt + xt * xt)
    bracket = kt * kt / s * (1.0 / (s + xt) + (np.pi - r_plus - r_minus) / 4.0)
    return -d0 * bracket


def chi_doped(k, xi, n, v_F: float = V_FERMI, g: float = 4.0):
    """Doped-graphene chi(k, i xi) on the imaginary axis, units 1/(J m^2).

    chi = -D0 [1 + kt^2 (pi - f) / (4 sqrt(kt^2 + xt^2))] with kt = k/2k_F and
    xt = hbar xi / 2E_F, evaluated in a rearranged form that stays accurate
    for kt << 1 where f itself grows like 4 xt / kt^2.
    """
    xi = np.asarray(xi)
    if np.iscomplexobj(xi):
        return _scalar_or_array(_chi_doped_complex(k, xi, n, v_F, g))
    if np.any(xi < 0):
        raise DomainError("xi must be >= 0")
    return _scalar_or_array(_chi_doped_complex(k, xi, n, v_F, g).real)


def _heaviside(x):
    return np.heaviside(x, 0.5)


def bilayer_sigma_xx(omega, gamma_hop: float = GAMMA_HOP):
    """In-plane conductivity of undoped AB bilayer graphene (absorptive part), S.

    Heaviside steps use Theta(0) = 1/2; the hopping energy is converted to an
    angular frequency internally.
    """
    w = _as_array(omega)
    if np.any(w <= 0):
        raise DomainError("omega must be > 0")
    gam = gamma_hop / HBAR
    step1 = _heaviside(w - gam)
    step2 = _heaviside(w - 2 * gam)
    with np.errstate(divide="ignore", invalid="ignore"):
        second = np.where(step2 > 0, (w - 2 * gam) / (2 * (w - gam)), 0.0) * step2
    bracket = ((w + 2 * gam) / (2 * (w + gam)) + second
               + gam ** 2 / (2 * w ** 2) * step1 * (step1 + _heaviside(w + gam)))
    return _scalar_or_array(E_CHARGE ** 2 / (2 * HBAR) * bracket)


def bilayer_sigma_zz(omega, gamma_hop: float = GAMMA_HOP, d_layer: float = D_LAYER,
                     v_F: float = V_FERMI):
    """Out-of-plane conductivity of undoped AB bilayer graphene, S."""
    w = _as_array(omega)
    if np.any(w <= 0):
        raise DomainError("omega must be > 0")
    gam = gamma_hop / HBAR
    step2 = _heaviside(w - 2 * gam)
    with np.errstate(divide="ignore", invalid="ignore"):
        second = np.where(step2 > 0, w / (2 * (w - gam)), 0.0) * step2
    prefactor = E_CHARGE ** 2 / (4 * HBAR) * (gamma_hop * d_layer / (HBAR * v_F)) ** 2
    return _scalar_or_array(prefactor * (w / (2 * (w + gam)) + second))


# log10 range of the cached sigma(i xi) grid; outside it sigma(i xi) is
# clamped, which is within 1e-5 of the true value (both limits equal e^2 / 2 hbar)
_KK_LOG_RANGE = (9.0, 20.0)
_KK_POINTS = 221


def _bilayer_kk_table(gamma_hop: float) -> CubicSpline:
    gam = gamma_hop / HBAR
    sigma_inf = E_CHARGE ** 2 / (2 * HBAR)
    spec = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-13 * sigma_inf, map_scale=gam)

    def excess(w):
        return bilayer_sigma_xx(w, gamma_hop) - sigma_inf

    log_xi = np.linspace(*_KK_LOG_RANGE, _KK_POINTS)
    values = np.array([
        sigma_inf + kramers_kronig_dissipative(excess, 10.0 ** lx, spec, points=(gam, 2 * gam))
        for lx in log_xi])
    return CubicSpline(log_xi, values)


@dataclass(frozen=True)
class SheetResponse:
    """A single 2D sheet: undoped/doped Dirac graphene, AB bilayer or an ideal mirror."""

    kind: SheetKind = SheetKind.UNDOPED
    v_F: float = V_FERMI
    n: float = 0.0
    g: float = 4.0
    gamma_hop: float = GAMMA_HOP
    d_layer: float = D_LAYER
    _kk: object = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", SheetKind(self.kind))
        if not self.v_F > 0:
            raise ValueError("v_F must be positive")
        if self.n < 0:
            raise ValueError("doping must be >= 0")
        if self.kind is SheetKind.DOPED and not self.n > 0:
            raise ValueError("a doped sheet needs n > 0")
        if not self.g > 0 or not self.gamma_hop > 0 or not self.d_layer > 0:
            raise ValueError("g, gamma_hop and d_layer must be positive")
        if self.kind is SheetKind.BILAYER:
            object.__setattr__(self, "_kk", _bilayer_kk_table(self.gamma_hop))

    @classmethod
    def undoped(cls, **kw):
        return cls(SheetKind.UNDOPED, **kw)

    @classmethod
    def doped(cls, n: float, **kw):
        return cls(SheetKind.DOPED, n=n, **kw)

    @classmethod
    def bilayer(cls, **kw):
        return cls(SheetKind.BILAYER, **kw)

    @classmethod
    def perfect(cls):
        return cls(SheetKind.PERFECT)

    def sigma_imag_axis(self, xi):
        """Bilayer sigma_xx(i xi) from the Kramers-Kronig rotation, S."""
        if self.kind is not SheetKind.BILAYER:
            raise TypeError("sigma(i xi) is tabulated for bilayer sheets only")
        xi = _as_array(xi)
        if np.any(xi <= 0):
            raise DomainError("xi must be > 0 for the bilayer conductivity")
        lx = np.clip(np.log10(xi), *_KK_LOG_RANGE)
        return _scalar_or_array(self._kk(lx))

    def chi(self, k, xi):
        if self.kind is SheetKind.UNDOPED:
            return chi_undoped(k, xi, self.v_F, self.g)
        if self.kind is SheetKind.DOPED:
            return chi_doped(k, xi, self.n, self.v_F, self.g)
        raise TypeError(f"no density response for {self.kind.value} sheets")


def sheet_alpha(response: SheetResponse, k, xi):
    """Dimensionless sheet polarizability on the imaginary axis.

    Returns +inf for a perfect sheet.
    """
    k = _as_array(k)
    xi = _as_array(xi)
    if np.any(k <= 0):
        raise DomainError("k must be > 0")
    if np.any(xi < 0):
        raise DomainError("xi must be >= 0")
    kind = response.kind
    if kind is SheetKind.PERFECT:
        return _scalar_or_array(np.full(np.broadcast(k, xi).shape, np.inf))
    if kind is SheetKind.BILAYER:
        if np.any(xi == 0):
            raise DomainError("bilayer alpha needs xi > 0")
        return _scalar_or_array(response.sigma_imag_axis(xi) * k / (2 * EPS0 * xi))
    chi = response.chi(k, xi)
    return _scalar_or_array(-(E_CHARGE ** 2) * np.asarray(chi) / (2 * EPS0 * k))


def sheet_alpha_real_axis(response: SheetResponse, k, omega, damping: float = 1e-9):
    """Complex sheet polarizability at real frequency omega > 0.

    Dirac sheets are continued through xi = -i omega (1 + i damping); the
    bilayer uses alpha = i sigma_xx(omega) k / (2 eps0 omega) with the
    tabulated absorptive conductivity.
    """
    k = _as_array(k)
    omega = _as_array(omega)
    if np.any(k <= 0) or np.any(omega <= 0):
        raise DomainError("k and omega must be > 0")
    kind = response.kind
    if kind is SheetKind.PERFECT:
        return _scalar_or_array(np.full(np.broadcast(k, omega).shape, np.inf + 0j))
    if kind is SheetKind.BILAYER:
        sigma = bilayer_sigma_xx(omega, response.gamma_hop)
        return _scalar_or_array(1j * sigma * k / (2 * EPS0 * omega))
    xi = -1j * omega * (1 + 1j * damping)
    chi = response.chi(k, xi)
    return _scalar_or_array(-(E_CHARGE ** 2) * chi / (2 * EPS0 * k))
