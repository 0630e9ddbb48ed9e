import math

import numpy as np
import pytest

from cpgraphene.atoms import AtomModel, Transition, static_polarizability, two_level
from cpgraphene.constants import C, EPS0, HBAR, MU0
from cpgraphene.engine import (PotentialResult, Scenario, StageError, SweepRow, evaluate_row,
                               nonresonant_potential, resonant_line_integral,
                               resonant_potential, scenario_at, sheet_alone, shielding_ratio,
                               sweep, total_potential)
from cpgraphene.numerics import QuadratureSpec
from cpgraphene.reflection import LayerStack, Mode, SubstrateModel
from cpgraphene.sheets import SheetResponse

from oracles import nonresonant_bruteforce, resonant_pc_bruteforce

UM = 1e-6
D2_RB = 1.2e-58  # C^2 m^2, order of the Rb D lines
OMEGA_RB = 2.4e15

PERFECT = LayerStack(None, 0.0, SubstrateModel.perfect())
GOLD = LayerStack(None, 0.0, SubstrateModel.gold())
VACUUM = LayerStack(None, 0.0, SubstrateModel.vacuum())


def sheet_stack(sheet, d=0.0, substrate=None):
    return LayerStack(sheet, d, substrate or SubstrateModel.vacuum())


class TestPotentialResult:
    def test_parts_add_up(self):
        r = PotentialResult.from_parts(-3.0, 1.25, 0.1)
        assert r.u_over_hbar == -1.75
        assert r.u_joule == pytest.approx(HBAR * -1.75, rel=1e-12)

    def test_addition_combines_errors_in_quadrature(self):
        a = PotentialResult.from_parts(-1.0, 0.0, 3.0)
        b = PotentialResult.from_parts(0.0, 2.0, 4.0)
        s = a + b
        assert (s.nonresonant, s.resonant, s.err_estimate) == (-1.0, 2.0, 5.0)

    def test_scenario_rejects_nonpositive_height(self, rb_ground):
        with pytest.raises(ValueError):
            Scenario(rb_ground, PERFECT, 0.0)

    def test_mode_is_coerced(self, rb_ground):
        assert Scenario(rb_ground, PERFECT, UM, mode="nonretarded").mode is Mode.NONRETARDED


class TestNonresonant:
    def test_perfect_conductor_retarded_limit(self):
        atom = two_level(OMEGA_RB, D2_RB)
        z = 10 * UM
        u = nonresonant_potential(Scenario(atom, PERFECT, z)).u_over_hbar
        closed = -3 * C * static_polarizability(atom) / (32 * math.pi ** 2 * EPS0 * z ** 4)
        assert u == pytest.approx(closed, rel=0.03)

    def test_perfect_conductor_nonretarded_limit(self):
        # z << c / omega: int alpha dxi = pi d2 / hbar, so U/hbar = -d2 / (16 pi eps0 hbar z^3)
        atom = two_level(OMEGA_RB, D2_RB)
        z = 2e-9
        u = nonresonant_potential(Scenario(atom, PERFECT, z)).u_over_hbar
        closed = -D2_RB / (16 * math.pi * EPS0 * HBAR * z ** 3)
        assert u == pytest.approx(closed, rel=0.02)

    def test_nonretarded_mode_is_exact_z3(self):
        atom = two_level(OMEGA_RB, D2_RB)
        a = nonresonant_potential(Scenario(atom, PERFECT, UM, mode="nonretarded")).u_over_hbar
        b = nonresonant_potential(Scenario(atom, PERFECT, 2 * UM, mode="nonretarded")).u_over_hbar
        assert a / b == pytest.approx(8.0, rel=1e-7)
        assert a == pytest.approx(-D2_RB / (16 * math.pi * EPS0 * HBAR * UM ** 3), rel=1e-7)

    @pytest.mark.parametrize("sheet", [SheetResponse.undoped(), SheetResponse.doped(1e16),
                                       SheetResponse.bilayer()])
    def test_nonretarded_mode_for_sheets(self, rb_ground, sheet):
        # at 5 nm retardation is a sub-percent correction, and it deepens the well
        mixed = total_potential(Scenario(rb_ground, sheet_stack(sheet), 5e-9)).u_over_hbar
        nonret = total_potential(Scenario(rb_ground, sheet_stack(sheet), 5e-9,
                                          mode="nonretarded")).u_over_hbar
        assert nonret == pytest.approx(mixed, rel=0.01)
        assert abs(nonret) > abs(mixed)

    def test_vacuum_stack_is_exactly_zero(self, rb_ground):
        r = total_potential(Scenario(rb_ground, VACUUM, UM))
        assert (r.u_over_hbar, r.nonresonant, r.resonant, r.err_estimate) == (0.0, 0.0, 0.0, 0.0)

    def test_zero_dipole_atom(self):
        atom = AtomModel("dark", "ground", (Transition(1e15, 0.0),))
        assert total_potential(Scenario(atom, PERFECT, UM)).u_over_hbar == 0.0

    @pytest.mark.parametrize("stack,z", [
        (PERFECT, 1 * UM),
        (sheet_stack(SheetResponse.undoped()), 1 * UM),
        (sheet_stack(SheetResponse.doped(1e16), 0.5 * UM, SubstrateModel.gold()), 0.7 * UM),
        (sheet_stack(SheetResponse.bilayer(), 2 * UM, SubstrateModel.gold()), 2 * UM),
    ])
    def test_matches_bruteforce(self, rb_ground, stack, z):
        engine = nonresonant_potential(Scenario(rb_ground, stack, z)).u_over_hbar
        assert engine == pytest.approx(nonresonant_bruteforce(rb_ground, stack, z), rel=1e-6)

    def test_error_estimate_is_small_and_positive(self, rb_ground):
        r = nonresonant_potential(Scenario(rb_ground, sheet_stack(SheetResponse.undoped()), UM))
        assert 0 < r.err_estimate < 1e-6 * abs(r.u_over_hbar)

    def test_failure_names_stage(self, rb_ground):
        starved = QuadratureSpec(rel_tol=1e-14, max_refinements=1)
        s = Scenario(rb_ground, sheet_stack(SheetResponse.doped(1e16)), UM, quad=starved)
        with pytest.raises(StageError) as info:
            nonresonant_potential(s)
        assert info.value.stage in ("xi", "k")
        assert info.value.stage in str(info.value)

    @pytest.mark.parametrize("stack", [
        PERFECT, GOLD,
        sheet_stack(SheetResponse.undoped()),
        sheet_stack(SheetResponse.doped(1e17)),
        sheet_stack(SheetResponse.bilayer()),
        sheet_stack(SheetResponse.perfect()),
        sheet_stack(SheetResponse.undoped(), 1 * UM, SubstrateModel.gold()),
    ])
    @pytest.mark.parametrize("z", [0.1 * UM, 1 * UM, 10 * UM])
    def test_ground_state_is_attracted(self, rb_ground, stack, z):
        assert total_potential(Scenario(rb_ground, stack, z)).u_over_hbar < 0

    @pytest.mark.parametrize("sheet", [
        SheetResponse.undoped(), SheetResponse.doped(1e14), SheetResponse.doped(1e17),
        SheetResponse.bilayer(),
    ])
    def test_graphene_weaker_than_perfect_conductor(self, rb_ground, sheet):
        for z in (0.3 * UM, 3 * UM):
            u_g = total_potential(Scenario(rb_ground, sheet_stack(sheet), z)).u_over_hbar
            u_pc = total_potential(Scenario(rb_ground, PERFECT, z)).u_over_hbar
            assert abs(u_g) <= abs(u_pc)

    def test_perfect_sheet_equals_perfect_conductor(self, rb_ground):
        a = total_potential(Scenario(rb_ground, sheet_stack(SheetResponse.perfect()), UM))
        b = total_potential(Scenario(rb_ground, PERFECT, UM))
        # the sheet has no TE channel, so only TM coincides; the TE share is small
        assert a.u_over_hbar == pytest.approx(b.u_over_hbar, rel=0.1)

    def test_doping_monotone(self, rb_ground):
        values = [total_potential(Scenario(rb_ground, sheet_stack(SheetResponse.undoped()), UM)).u_over_hbar]
        for n in (1e14, 1e15, 1e16, 1e17):
            s = Scenario(rb_ground, sheet_stack(SheetResponse.doped(n)), UM)
            values.append(total_potential(s).u_over_hbar)
        assert all(abs(b) > abs(a) for a, b in zip(values, values[1:]))


class TestResonant:
    def test_ground_state_has_no_resonant_part(self, rb_ground):
        r = resonant_potential(Scenario(rb_ground, GOLD, UM))
        assert r.resonant == 0.0 and r.u_over_hbar == 0.0

    def test_vacuum_stack(self):
        atom = two_level(1e13, D2_RB, excited=True)
        assert resonant_potential(Scenario(atom, VACUUM, UM)).resonant == 0.0

    def test_perfect_conductor_matches_trapezoid(self):
        omega, z = 1e12, 1 * UM  # omega z / c ~ 3e-3
        atom = two_level(omega, D2_RB, excited=True)
        r = resonant_potential(Scenario(atom, PERFECT, z)).resonant
        oracle = -MU0 / (4 * math.pi * HBAR) * D2_RB * resonant_pc_bruteforce(omega, z)
        assert r == pytest.approx(oracle, rel=0.02)
        # closed form of the same integral: -d2 / (8 pi eps0 hbar z^3)
        assert r == pytest.approx(-D2_RB / (8 * math.pi * EPS0 * HBAR * z ** 3), rel=1e-7)

    def test_line_integral_of_mirror(self):
        val, err = resonant_line_integral(PERFECT, 1e13, UM, QuadratureSpec())
        assert val == pytest.approx(C * C / (2 * UM ** 3), rel=1e-9)
        assert err < 1e-8 * val

    @pytest.mark.parametrize("stack", [
        GOLD,
        sheet_stack(SheetResponse.undoped()),
        sheet_stack(SheetResponse.doped(1e16)),
        sheet_stack(SheetResponse.bilayer(), 1 * UM, SubstrateModel.gold()),
    ])
    def test_excited_atom_has_finite_nonzero_resonant_part(self, stack):
        atom = two_level(2e13, D2_RB, excited=True)
        r = resonant_potential(Scenario(atom, stack, UM))
        assert np.isfinite(r.resonant) and r.resonant != 0.0

    def test_total_is_additive(self):
        atom = two_level(2e13, D2_RB, excited=True)
        s = Scenario(atom, sheet_stack(SheetResponse.undoped(), 2 * UM, SubstrateModel.gold()), UM)
        t = total_potential(s)
        n = nonresonant_potential(s)
        r = resonant_potential(s)
        assert t.nonresonant == n.nonresonant and t.resonant == r.resonant
        assert t.u_over_hbar == pytest.approx(n.u_over_hbar + r.u_over_hbar, rel=1e-12)

    def test_ground_total_equals_nonresonant(self, rb_ground):
        s = Scenario(rb_ground, GOLD, UM)
        assert total_potential(s).u_over_hbar == nonresonant_potential(s).u_over_hbar


class TestShielding:
    def test_far_substrate_gives_one(self, rb_ground):
        ratio = shielding_ratio(rb_ground, SheetResponse.undoped(), SubstrateModel.gold(), UM, 1.0)
        assert ratio == pytest.approx(1.0, abs=1e-3)

    def test_vacuum_substrate_gives_exactly_one(self, rb_ground):
        assert shielding_ratio(rb_ground, SheetResponse.undoped(), SubstrateModel.vacuum(), UM, UM) == 1.0

    def test_needs_a_sheet(self, rb_ground):
        with pytest.raises(ValueError):
            shielding_ratio(rb_ground, None, SubstrateModel.gold(), UM, UM)

    def test_monotone_above_one(self, rb_ground):
        gaps = [10, 5, 2, 1, 0.5, 0.2, 0.1]
        ratios = [shielding_ratio(rb_ground, SheetResponse.undoped(), SubstrateModel.gold(), UM, d * UM)
                  for d in gaps]
        assert all(r > 1 for r in ratios)
        assert all(b > a for a, b in zip(ratios, ratios[1:]))

    def test_approach_to_one(self, rb_ground):
        dev = [abs(shielding_ratio(rb_ground, SheetResponse.undoped(), SubstrateModel.gold(), UM, d * UM) - 1)
               for d in (2, 4, 8, 16)]
        assert all(b < a for a, b in zip(dev, dev[1:]))
        assert dev[-1] < 0.05

    def test_sheet_alone_drops_substrate(self, rb_ground):
        s = Scenario(rb_ground, sheet_stack(SheetResponse.undoped(), UM, SubstrateModel.gold()), UM)
        assert sheet_alone(s).stack.substrate == SubstrateModel.vacuum()

    @pytest.mark.parametrize("sheet", [SheetResponse.undoped(), SheetResponse.bilayer()])
    @pytest.mark.parametrize("z", [0.2 * UM, 1 * UM, 5 * UM])
    def test_composite_bound(self, rb_ground, sheet, z):
        # gold alone is taken at the atom height, replacing the sheet
        u_s = abs(total_potential(Scenario(rb_ground, sheet_stack(sheet), z)).u_over_hbar)
        u_g = abs(total_potential(Scenario(rb_ground, GOLD, z)).u_over_hbar)
        for d in (0.001, 0.1, 1.0, 10.0):
            stack = sheet_stack(sheet, d * UM, SubstrateModel.gold())
            u_c = abs(total_potential(Scenario(rb_ground, stack, z)).u_over_hbar)
            assert u_s <= u_c <= max(u_s, u_g)


class TestSweep:
    def test_singleton_matches_direct_call(self, rb_ground):
        template = Scenario(rb_ground, sheet_stack(SheetResponse.undoped()), UM)
        rows = sweep(template, "z_A", [2 * UM])
        assert len(rows) == 1
        assert rows[0].result == total_potential(template.replace(z_A=2 * UM))
        assert math.isnan(rows[0].ratio) and rows[0].error == ""

    def test_doping_axis_ordering(self, rb_ground):
        template = Scenario(rb_ground, sheet_stack(SheetResponse.undoped()), UM)
        rows = sweep(template, "doping_n", [1e14, 1e15, 1e16, 1e17])
        undoped = total_potential(template).u_over_hbar
        mags = [abs(undoped)] + [abs(r.result.u_over_hbar) for r in rows]
        assert all(b > a for a, b in zip(mags, mags[1:]))

    def test_z_slope_crosses_over(self):
        # c / omega = 1 um puts the crossover inside the grid
        grid = np.geomspace(0.2, 10, 12) * UM
        rows = sweep(Scenario(two_level(3e14, D2_RB), PERFECT, UM), "z_A", grid)
        u = np.array([r.result.u_over_hbar for r in rows])
        slope = np.diff(np.log(-u)) / np.diff(np.log(grid))
        assert slope[0] == pytest.approx(-3.0, abs=0.2)
        assert slope[-1] == pytest.approx(-4.0, abs=0.1)
        assert np.all(np.diff(slope) < 0)

    def test_gap_axis_has_ratio(self, rb_ground):
        template = Scenario(rb_ground, sheet_stack(SheetResponse.undoped(), UM, SubstrateModel.gold()), UM)
        rows = sweep(template, "gap_d", [2 * UM, 4 * UM])
        direct = shielding_ratio(rb_ground, SheetResponse.undoped(), SubstrateModel.gold(), UM, 2 * UM)
        assert rows[0].ratio == pytest.approx(direct, rel=1e-12)
        assert rows[1].ratio < rows[0].ratio

    @pytest.mark.parametrize("grid", [[], [1e-6, 1e-6], [2e-6, 1e-6], [-1e-6]])
    def test_grid_validation(self, rb_ground, grid):
        with pytest.raises(ValueError):
            sweep(Scenario(rb_ground, PERFECT, UM), "z_A", grid)

    def test_unknown_axis(self, rb_ground):
        with pytest.raises(ValueError):
            sweep(Scenario(rb_ground, PERFECT, UM), "temperature", [1.0])

    def test_failures_stay_in_their_row(self, rb_ground):
        starved = QuadratureSpec(rel_tol=1e-14, max_refinements=1)
        template = Scenario(rb_ground, sheet_stack(SheetResponse.doped(1e16)), UM, quad=starved)
        row = evaluate_row(template, "z_A", UM)
        assert isinstance(row, SweepRow) and row.result is None
        assert "StageError" in row.error

    def test_workers_give_identical_rows(self, rb_ground):
        template = Scenario(rb_ground, sheet_stack(SheetResponse.undoped()), UM)
        grid = [0.5 * UM, 1 * UM, 2 * UM]
        parallel = sweep(template, "z_A", grid, workers=2)
        serial = sweep(template, "z_A", grid)
        assert [(r.value, r.result, r.error) for r in parallel] == \
            [(r.value, r.result, r.error) for r in serial]

    def test_scenario_at_doping_keeps_sheet_parameters(self, rb_ground):
        base = SheetResponse.undoped(v_F=1.1e6)
        s = scenario_at(Scenario(rb_ground, sheet_stack(base), UM), "doping_n", 1e15)
        assert s.stack.sheet.n == 1e15 and s.stack.sheet.v_F == 1.1e6
