"""Quadrature on [0, inf), the principal-branch complex arcsine and the
Kramers-Kronig rotation to the imaginary frequency axis.

All integrands are expected to be vectorised: they receive a 1-D numpy array
of abscissae and return an array of the same shape.
"""
from __future__ import annotations

import dataclasses
import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# Gauss-Kronrod 7/15 (QUADPACK qk15): Kronrod abscissae on [0, 1], odd
# indices are shared with the 7-point Gauss rule.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1:7:2] = _WG[:3]
_GAUSS[7] = _WG[3]
_GAUSS[9:15:2] = _WG[2::-1]

_EPS = np.finfo(float).eps

Integrand = Callable[[np.ndarray], np.ndarray]


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance.

    ``estimate`` and ``error`` carry the best value obtained before giving up.
    """

    def __init__(self, message: str, estimate: float = float("nan"),
                 error: float = float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class IntegrandError(QuadratureError):
    """The integrand returned NaN or Inf at ``abscissa``."""

    def __init__(self, message: str, abscissa: float):
        super().__init__(message)
        self.abscissa = abscissa


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and the scale of the map x = map_scale * t / (1 - t)."""

    rel_tol: float = 1e-8
    abs_tol: float = 0.0
    max_refinements: int = 2000
    map_scale: float = 1.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise ValueError(f"abs_tol must be >= 0, got {self.abs_tol}")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")
        if not self.map_scale > 0 or not np.isfinite(self.map_scale):
            raise ValueError(f"map_scale must be positive, got {self.map_scale}")

    def replace(self, **changes) -> "QuadratureSpec":
        return dataclasses.replace(self, **changes)


def _panel(g: Integrand, a: float, b: float):
    half = 0.5 * (b - a)
    centre = 0.5 * (a + b)
    x = centre + half * _NODES
    y = np.asarray(g(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    if not np.all(np.isfinite(y)):
        bad = x[~np.isfinite(y)][0]
        raise IntegrandError(f"integrand is not finite at t = {bad!r}", float(bad))
    kronrod = half * np.dot(_KRONROD, y)
    gauss = half * np.dot(_GAUSS, y)
    mean = kronrod / (b - a)
    resasc = abs(half) * np.dot(_KRONROD, np.abs(y - mean))
    resabs = abs(half) * np.dot(_KRONROD, np.abs(y))
    err = abs(kronrod - gauss)
    if resasc != 0.0 and err != 0.0:
        err = resasc * min(1.0, (200.0 * err / resasc) ** 1.5)
    if resabs > np.finfo(float).tiny / (50 * _EPS):
        err = max(50 * _EPS * resabs, err)
    return kronrod, err


def _adaptive(g: Integrand, edges: Sequence[float], spec: QuadratureSpec) -> tuple[float, float]:
    """Globally adaptive GK15 over the panels delimited by ``edges``.

    The panel with the largest error estimate is bisected until the summed
    error meets the tolerance, so breakpoints only seed the panel list.
    """
    heap = []
    total = 0.0
    total_err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _panel(g, lo, hi)
        heapq.heappush(heap, (-err, lo, hi, val))
        total += val
        total_err += err

    for _ in range(spec.max_refinements):
        if total_err <= max(spec.rel_tol * abs(total), spec.abs_tol):
            return total, total_err
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            heapq.heappush(heap, (neg_err, lo, hi, val))
            break
        v1, e1 = _panel(g, lo, mid)
        v2, e2 = _panel(g, mid, hi)
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))

    # recompute sums to shed accumulated rounding before the last check
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    if total_err <= max(spec.rel_tol * abs(total), spec.abs_tol):
        return total, total_err
    raise QuadratureError(
        f"no convergence after {spec.max_refinements} refinements: "
        f"estimate {total!r} +/- {total_err!r}", total, total_err)


def _seed_edges(a: float, b: float, points: Sequence[float], initial_panels: int = 8) -> list[float]:
    """Uniform seed grid on [a, b] merged with the interior breakpoints."""
    seeds = set(np.linspace(a, b, initial_panels + 1).tolist())
    seeds.update(float(p) for p in points if a < p < b)
    return sorted(seeds)


def integrate_interval(f: Integrand, a: float, b: float,
                       spec: QuadratureSpec = QuadratureSpec(),
                       points: Sequence[float] = ()) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod integral of ``f`` over the finite interval [a, b]."""
    if a == b:
        return 0.0, 0.0
    if b < a:
        val, err = integrate_interval(f, b, a, spec, points)
        return -val, err
    try:
        return _adaptive(f, _seed_edges(float(a), float(b), points), spec)
    except IntegrandError as exc:
        raise IntegrandError(f"integrand is not finite at x = {exc.abscissa!r}",
                             exc.abscissa) from None


def integrate_semi_infinite(f: Integrand, spec: QuadratureSpec = QuadratureSpec(),
                            lower: float = 0.0,
                            points: Sequence[float] = ()) -> tuple[float, float]:
    """Integrate ``f`` over [lower, inf).

    The range is mapped onto [0, 1) by x = lower + map_scale * t / (1 - t) and
    refined adaptively there. Interior ``points`` (kinks, thresholds, narrow
    peaks) become initial panel edges in the mapped variable.

    Returns ``(value, error_estimate)``; raises :class:`QuadratureError` when
    the tolerance is not met and :class:`IntegrandError` on NaN/Inf.
    """
    x0 = float(lower)
    s = spec.map_scale

    def mapped(t):
        one_minus = 1.0 - t
        # nodes of panels squeezed against t = 1 can round onto it; f decays there
        inside = one_minus > 0
        out = np.zeros(t.shape)
        if inside.any():
            om = one_minus[inside]
            out[inside] = np.asarray(f(x0 + s * t[inside] / om), dtype=float) * (s / (om * om))
        return out

    cuts = [(p - x0) / (p - x0 + s) for p in points if p > x0]
    try:
        return _adaptive(mapped, _seed_edges(0.0, 1.0, cuts), spec)
    except IntegrandError as exc:
        t = exc.abscissa
        x = x0 + s * t / (1 - t)
        raise IntegrandError(f"integrand is not finite at x = {x!r}", x) from None


def make_complex(re, im):
    re, im = np.broadcast_arrays(np.asarray(re, float), np.asarray(im, float))
    out = np.empty(re.shape, dtype=complex)
    out.real = re
    out.imag = im
    return out


def casin(z):
    """Principal complex arcsine, vectorised.

    On the cuts (-inf, -1) and (1, inf) a +0 imaginary part selects the
    value continuous from above and -0 the value from below. Built from
    log and sqrt; the form is chosen per half plane so that the argument of
    the logarithm never suffers cancellation.
    """
    scalar = np.ndim(z) == 0
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    root = np.sqrt(make_complex(1.0 - x * x + y * y, -2.0 * x * y))
    iz = make_complex(-y, x)
    with np.errstate(divide="ignore", invalid="ignore"):
        upper = 1j * np.log(root - iz)
        lower = -1j * np.log(iz + root)
    out = np.where(np.signbit(y), lower, upper)
    return complex(out) if scalar else out


def kramers_kronig_imag_axis(im_sigma: Integrand, xi: float,
                             spec: QuadratureSpec = QuadratureSpec(),
                             points: Sequence[float] = ()) -> float:
    """sigma(i xi) = (2/pi) int_0^inf omega Im sigma(omega) / (omega^2 + xi^2) d omega."""
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi}")
    xi2 = xi * xi

    def integrand(w):
        return w * np.asarray(im_sigma(w), dtype=float) / (w * w + xi2)

    value, _ = integrate_semi_infinite(integrand, spec, points=points)
    return 2.0 / np.pi * value


def kramers_kronig_dissipative(re_sigma: Integrand, xi: float,
                               spec: QuadratureSpec = QuadratureSpec(),
                               points: Sequence[float] = ()) -> float:
    """sigma(i xi) = (2/pi) int_0^inf xi Re sigma(omega) / (omega^2 + xi^2) d omega.

    Same rotation as :func:`kramers_kronig_imag_axis` but driven by the
    absorptive part; converges for conductivities that tend to a constant.
    """
    if not xi > 0:
        raise ValueError(f"xi must be positive, got {xi}")
    xi2 = xi * xi

    def integrand(w):
        return xi * np.asarray(re_sigma(w), dtype=float) / (w * w + xi2)

    value, _ = integrate_semi_infinite(integrand, spec, points=points)
    return 2.0 / np.pi * value
