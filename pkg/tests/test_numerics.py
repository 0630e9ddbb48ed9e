import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpgraphene.numerics import (IntegrandError, QuadratureError, QuadratureSpec, casin,
                                 integrate_interval, integrate_semi_infinite,
                                 kramers_kronig_dissipative, kramers_kronig_imag_axis,
                                 make_complex)


def trapezoid_oracle(f, upper, nodes):
    x = np.linspace(0.0, upper, nodes)
    return np.trapezoid(f(x), x)


class TestQuadratureSpec:
    def test_defaults(self):
        spec = QuadratureSpec()
        assert spec.rel_tol == 1e-8 and spec.abs_tol == 0.0 and spec.map_scale == 1.0

    @pytest.mark.parametrize("kwargs", [dict(rel_tol=0), dict(rel_tol=-1e-3), dict(abs_tol=-1.0),
                                        dict(max_refinements=0), dict(map_scale=0.0),
                                        dict(map_scale=float("inf"))])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            QuadratureSpec(**kwargs)

    def test_replace_validates(self):
        with pytest.raises(ValueError):
            QuadratureSpec().replace(map_scale=-2.0)


class TestSemiInfinite:
    @pytest.mark.parametrize("f, exact", [
        (lambda x: np.exp(-x), 1.0),
        (lambda x: x * np.exp(-2 * x), 0.25),
        (lambda x: 1.0 / (1.0 + x * x), math.pi / 2),
    ])
    def test_analytic(self, f, exact):
        value, err = integrate_semi_infinite(f, QuadratureSpec())
        assert value == pytest.approx(exact, rel=1e-8)
        assert 0 <= err <= 1e-8 * abs(value)

    def test_map_scale_follows_physical_scale(self):
        # exp(-2 z k) with z = 1 um, the inner-integral situation
        z = 1e-6
        value, _ = integrate_semi_infinite(lambda k: np.exp(-2 * z * k),
                                           QuadratureSpec(map_scale=1 / (2 * z)))
        assert value == pytest.approx(1 / (2 * z), rel=1e-10)

    def test_lower_and_breakpoints(self):
        # kink at x = 1: integral of exp(-x) |x - 1| over [0, inf) = 2/e
        f = lambda x: np.exp(-x) * np.abs(x - 1)
        value, _ = integrate_semi_infinite(f, QuadratureSpec(), points=[1.0])
        assert value == pytest.approx(2 / math.e, rel=1e-10)
        value, _ = integrate_semi_infinite(lambda x: np.exp(-x), QuadratureSpec(), lower=2.0)
        assert value == pytest.approx(math.exp(-2.0), rel=1e-10)

    def test_far_breakpoints_do_not_block_convergence(self):
        # breakpoints deep in the exponential tail contribute ~0
        value, _ = integrate_semi_infinite(lambda x: np.exp(-x), QuadratureSpec(),
                                           points=[1e3, 1e5, 1e8])
        assert value == pytest.approx(1.0, rel=1e-10)

    def test_non_convergence_carries_estimate(self):
        with pytest.raises(QuadratureError) as info:
            integrate_semi_infinite(lambda x: 1.0 / (1.0 + x), QuadratureSpec(max_refinements=30))
        assert not isinstance(info.value, IntegrandError)
        assert math.isfinite(info.value.estimate) and info.value.error > 0

    def test_nan_names_abscissa(self):
        f = lambda x: np.where(x > 2.0, np.nan, np.exp(-x))
        with pytest.raises(IntegrandError) as info:
            integrate_semi_infinite(f, QuadratureSpec())
        assert info.value.abscissa > 2.0
        assert "not finite" in str(info.value)

    def test_inf_in_finite_interval(self):
        with pytest.raises(IntegrandError) as info:
            integrate_interval(lambda x: np.where(x < 0.5, np.inf, 1.0), 0.0, 1.0)
        assert info.value.abscissa < 0.5

    def test_interval_orientation(self):
        a, _ = integrate_interval(np.sin, 0.0, math.pi)
        b, _ = integrate_interval(np.sin, math.pi, 0.0)
        assert a == pytest.approx(2.0, rel=1e-12) and b == pytest.approx(-2.0, rel=1e-12)
        assert integrate_interval(np.sin, 1.0, 1.0) == (0.0, 0.0)

    def test_abs_tol_floor(self):
        # zero integrand converges immediately
        assert integrate_semi_infinite(lambda x: 0 * x, QuadratureSpec()) == (0.0, 0.0)

    def test_trapezoid_corpus(self):
        """20 random rational-times-exponential integrands against a dense trapezoid."""
        rng = np.random.default_rng(20240611)
        for _ in range(20):
            a0, a1, a2 = rng.uniform(0.1, 2.0, 3)
            b = rng.uniform(0.1, 5.0)
            c = rng.uniform(0.5, 3.0)
            f = lambda x: (a0 + a1 * x + a2 * x * x) / (1 + b * x * x) * np.exp(-c * x)
            value, _ = integrate_semi_infinite(f, QuadratureSpec(map_scale=1 / c))
            oracle = trapezoid_oracle(f, 60.0 / c, 2_000_001)
            assert value == pytest.approx(oracle, rel=1e-6)

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 4), st.floats(0.2, 4),
           st.floats(0.0, 3.0))
    def test_linearity(self, a, b, c1, c2, shift):
        spec = QuadratureSpec()
        f = lambda x: np.exp(-c1 * x) / (1 + x * x)
        g = lambda x: (x + shift) * np.exp(-c2 * x)
        vf, _ = integrate_semi_infinite(f, spec)
        vg, _ = integrate_semi_infinite(g, spec)
        vc, _ = integrate_semi_infinite(lambda x: a * f(x) + b * g(x), spec)
        scale = abs(a * vf) + abs(b * vg)
        assert abs(vc - (a * vf + b * vg)) <= 10 * spec.rel_tol * max(scale, 1e-300)


class TestCasin:
    def test_values(self):
        assert casin(0) == 0
        assert casin(1) == pytest.approx(math.pi / 2, abs=1e-15)
        value = casin(2 + 0j)
        assert value.real == pytest.approx(math.pi / 2, rel=1e-15)
        assert value.imag == pytest.approx(math.acosh(2.0), rel=1e-14)
        assert value.imag == pytest.approx(1.316957896924816, rel=1e-14)

    def test_cut_sides(self):
        above = casin(complex(2.0, 0.0))
        below = casin(make_complex(2.0, -0.0))
        assert above.imag > 0 and below.imag < 0
        assert casin(complex(-2.0, 0.0)) == pytest.approx(complex(-math.pi / 2, math.acosh(2)))
        assert casin(complex(2.0, 1e-12)) == pytest.approx(above, rel=1e-10)
        assert complex(casin(make_complex(2.0, -0.0))) == pytest.approx(
            casin(complex(2.0, -1e-12)), rel=1e-10)

    def test_round_trip_grid(self):
        re = np.linspace(-10, 10, 201)
        im = np.linspace(-10, 10, 201)
        z = (re[:, None] + 1j * im[None, :]).ravel()
        on_cut = (np.abs(z.imag) < 1e-6) & (np.abs(z.real) > 1 - 1e-6)
        z = z[(np.abs(z) <= 10) & ~on_cut]
        back = np.sin(casin(z))
        assert np.all(np.abs(back - z) <= 1e-12 * np.maximum(np.abs(z), 1.0))

    def test_matches_mpmath(self):
        rng = np.random.default_rng(7)
        for z in rng.uniform(-5, 5, 40) + 1j * rng.uniform(-5, 5, 40):
            assert casin(z) == pytest.approx(complex(mpmath.asin(z)), rel=1e-13, abs=1e-15)

    def test_vectorised_and_scalar(self):
        arr = casin(np.array([0.3, 0.5j]))
        assert arr.shape == (2,)
        assert isinstance(casin(0.3), complex)

    @given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
    def test_round_trip_property(self, z):
        if abs(z.imag) < 1e-6 and abs(z.real) > 1 - 1e-6:
            return
        assert abs(np.sin(casin(z)) - z) <= 1e-12 * max(abs(z), 1.0)


class TestKramersKronig:
    @pytest.mark.parametrize("xi_tau", [0.01, 1.0, 100.0])
    def test_drude(self, xi_tau):
        tau, sigma0 = 1e-14, 3.0
        im_sigma = lambda w: sigma0 * w * tau / (1 + (w * tau) ** 2)
        xi = xi_tau / tau
        got = kramers_kronig_imag_axis(im_sigma, xi, QuadratureSpec(map_scale=1 / tau),
                                       points=[xi])
        assert got == pytest.approx(sigma0 / (1 + xi_tau), rel=1e-6)

    def test_zero(self):
        assert kramers_kronig_imag_axis(lambda w: 0 * w, 1.0) == 0.0

    def test_exponential_against_trapezoid(self):
        im_sigma = lambda w: w * np.exp(-w)
        got = kramers_kronig_imag_axis(im_sigma, 1.0)
        w = np.linspace(0.0, 50.0, 10_000_001)
        oracle = 2 / np.pi * np.trapezoid(w * im_sigma(w) / (w * w + 1.0), w)
        assert got == pytest.approx(oracle, rel=1e-6)

    def test_dissipative_form_drude(self):
        # Re sigma = sigma0 / (1 + w^2 tau^2) gives the same sigma0 / (1 + xi tau)
        tau, sigma0 = 2.0, 1.5
        for xi in (0.01, 0.5, 50.0):
            got = kramers_kronig_dissipative(lambda w: sigma0 / (1 + (w * tau) ** 2), xi,
                                             QuadratureSpec(map_scale=1 / tau), points=[xi])
            assert got == pytest.approx(sigma0 / (1 + xi * tau), rel=1e-8)

    def test_rejects_nonpositive_xi(self):
        with pytest.raises(ValueError):
            kramers_kronig_imag_axis(lambda w: w, 0.0)
        with pytest.raises(ValueError):
            kramers_kronig_dissipative(lambda w: w, -1.0)
