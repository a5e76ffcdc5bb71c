"""Tests for generator outputs, sweeps, the couple-count optimizer and bench scenarios."""

import math
from dataclasses import replace

import numpy as np
import pytest
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from teg_sim.config import load_config
from teg_sim.errors import GeometryError, InvalidInputError
from teg_sim.generator import (
    arrangement_gap_resistance,
    chuck_matrix,
    chuck_scenario,
    chuck_voltage_curve,
    compare_arrangements,
    couple_resistance,
    couples_for_voltage,
    density_ratio,
    internal_resistance,
    matched_load_power,
    matched_power_curve,
    open_circuit_voltage,
    optimize_couples,
    power_ceiling,
    simulate,
    sweep_designs,
    watch_gap_resistance,
)
from teg_sim.leg_thermal import analytic_cell_resistance
from teg_sim.materials import builtin_poly_sige
from teg_sim.units import um, um2


@pytest.fixture(scope="module")
def resolved():
    return load_config()


class TestElectrical:
    def setup_method(self):
        self.config = load_config()
        self.design = self.config.design()

    def test_open_circuit_voltage(self):
        assert open_circuit_voltage(2350, builtin_poly_sige(), 1.0) == pytest.approx(2350 * 317e-6)

    def test_zero_couples_rejected(self):
        with pytest.raises(InvalidInputError):
            open_circuit_voltage(0, builtin_poly_sige(), 1.0)

    def test_couple_resistance_of_stepped_legs(self):
        """p legs 17.85, n legs 99.79 and four contacts 2.52 ohm."""
        assert couple_resistance(self.design) == pytest.approx(120.16, rel=1e-3)
        assert internal_resistance(self.design) == pytest.approx(282376, rel=1e-3)

    def test_contacts_small_against_uniform_legs(self):
        """Uniform 3 x 1 um legs on a 10 um path with 10 um square contacts."""
        design = replace(
            self.design.with_geometry(
                end_width_a=um(3),
                middle_width_b=um(3),
                step_height_h=0.0,
                end_segment_length=um(1),
                middle_segment_length=um(8),
            ),
            contact_area_per_junction=um2(100),
        )
        legs = 35.0 + 195.667
        total = couple_resistance(design)
        assert total == pytest.approx(legs + 2.52, rel=1e-3)
        assert (total - legs) / total < 0.02

    def test_interconnect_adds_per_couple(self):
        design = replace(self.design, interconnect_resistance_per_couple=5.0)
        assert couple_resistance(design) == pytest.approx(couple_resistance(self.design) + 5.0)

    def test_matched_load_power(self):
        assert matched_load_power(2.0, 1.0) == pytest.approx(1.0)
        with pytest.raises(InvalidInputError):
            matched_load_power(1.0, 0.0)

    def test_couples_for_one_volt(self):
        assert couples_for_voltage(builtin_poly_sige(), 1.4811) == 2130

    def test_couples_for_voltage_needs_temperature_difference(self):
        with pytest.raises(InvalidInputError):
            couples_for_voltage(builtin_poly_sige(), 0.0)


class TestDesign:
    def test_reference_design_label(self, resolved):
        assert resolved.design().label == "10-3-A"

    def test_type_b_uses_two_rows(self, resolved):
        design = resolved.design("B")
        assert design.n_couples == 4700
        assert design.layout.rows == 2

    def test_unknown_type_rejected(self, resolved):
        with pytest.raises(InvalidInputError, match="unknown design type"):
            resolved.design().with_type("C")

    def test_rim_overflow_rejected(self, resolved):
        with pytest.raises(GeometryError, match="rim too short"):
            resolved.design().with_couples(4700, rows=1)

    def test_with_couples_grows_rows(self, resolved):
        assert resolved.design().with_couples(6102).layout.rows == 3

    def test_contact_area_defaults_to_end_width_square(self, resolved):
        assert resolved.design().contact_area == pytest.approx(um2(100))


class TestSimulate:
    """The watch-size reference design on the wrist."""

    def setup_method(self):
        self.config = load_config()
        self.design = self.config.design()
        self.env = self.config.environment()

    def test_gap_resistance(self):
        assert watch_gap_resistance(self.design) == pytest.approx(24.28, rel=1e-3)

    def test_network_outputs(self):
        report = simulate(self.design, self.env)
        assert report.delta_t_junctions == pytest.approx(1.4811, rel=1e-3)
        assert report.q_total == pytest.approx(0.0845, rel=1e-3)
        assert report.v_oc == pytest.approx(1.1034, rel=1e-3)
        assert report.p_matched == pytest.approx(1.0778e-6, rel=1e-3)
        assert report.r_pile == pytest.approx(63.05, rel=1e-3)
        assert report.couples_for_1v == 2130

    def test_constant_flow_forces_more_heat_through_pile(self):
        network = simulate(self.design, self.env, "network")
        forced = simulate(self.design, self.env, "constant_flow")
        assert forced.q_total > network.q_total
        assert forced.delta_t_junctions > network.delta_t_junctions

    def test_areal_density_uses_device_area(self):
        report = simulate(self.design, self.env)
        assert report.areal_voltage_density == pytest.approx(report.v_oc * 1e3 / (15.0 * 3.0), rel=1e-9)

    def test_unknown_hypothesis_rejected(self):
        with pytest.raises(InvalidInputError, match="hypothesis"):
            simulate(self.design, self.env, "adiabatic")

    def test_precomputed_cell_resistance_reused(self):
        r_cell = analytic_cell_resistance(self.design.cell, self.design.k_leg)
        assert simulate(self.design, self.env, r_cell=r_cell).v_oc == pytest.approx(
            simulate(self.design, self.env).v_oc
        )

    def test_ceiling_bounds_both_hypotheses(self):
        r_cell = analytic_cell_resistance(self.design.cell, self.design.k_leg)
        ceiling = power_ceiling(self.design, self.env, r_cell)
        assert ceiling == pytest.approx(1.6526e-6, rel=1e-3)
        for hypothesis in ("network", "constant_flow"):
            assert simulate(self.design, self.env, hypothesis).p_matched <= ceiling

    def test_no_temperature_difference_gives_zero_output(self):
        report = simulate(self.design, replace(self.env, t_body=self.env.t_ambient))
        assert report.delta_t_junctions == 0.0
        assert report.q_total == 0.0
        assert report.v_oc == 0.0
        assert report.p_matched == 0.0
        assert report.areal_voltage_density == 0.0
        assert report.couples_for_1v is None

    def test_constant_flow_dilutes_with_more_couples(self):
        """Q fixed: dT(n) = Q R_gap / (1 + n R_gap / R_cell)."""
        base = simulate(self.design, self.env, "constant_flow")
        n = 2 * self.design.n_couples
        doubled = simulate(self.design.with_couples(n), self.env, "constant_flow")
        expected = base.q_total * base.r_gap / (1 + n * base.r_gap / base.r_cell)
        assert doubled.q_total == pytest.approx(base.q_total)
        assert doubled.delta_t_junctions == pytest.approx(expected, rel=1e-9)
        assert doubled.delta_t_junctions < base.delta_t_junctions


class TestSweepDesigns:
    def test_every_mask_in_every_type(self, resolved):
        table = sweep_designs(resolved.design(), resolved.environment(), resolved.design_catalog(), resolved.design_types())
        assert len(table) == 20
        assert (table["error"] == "").all()
        assert table["design"].tolist()[:2] == ["3-1-A", "3-1-B"]
        assert (table["P_matched_W"] <= table["P_ceiling_W"]).all()

    def test_bad_row_does_not_stop_sweep(self, resolved):
        catalog = [(um(10), um(3), "A"), (um(2), um(3), "A"), (um(10), um(3), "Z")]
        table = sweep_designs(resolved.design(), resolved.environment(), catalog, resolved.design_types())
        errors = table["error"].tolist()
        assert errors[0] == ""
        assert "end_width_a >= middle_width_b" in errors[1]
        assert "unknown design type" in errors[2]


class TestOptimizer:
    def setup_method(self):
        self.config = load_config()
        self.design = self.config.design()
        self.env = self.config.environment()

    def test_constant_flow_optimum_matches_gap(self):
        """n* sits where R_cell / n equals R_gap."""
        result = optimize_couples(self.design, self.env, range(100, 10001))
        assert abs(result.n_optimal - 6102) <= 1
        report = result.report
        assert abs(report.r_pile - report.r_gap) / report.r_gap <= 0.05
        assert len(result.curve) == 9901

    def test_network_optimum_is_a_maximum(self):
        result = optimize_couples(self.design, self.env, range(100, 10001), hypothesis="network")
        curve = result.curve.set_index("n_couples")["P_matched_W"]
        assert curve[result.n_optimal] == curve.max()

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_brute_force_sweep_places_optimum_at_matching(self, seed):
        rng = np.random.default_rng(seed)
        r_cell = rng.uniform(1e4, 1e6)
        r_gap = rng.uniform(10.0, 200.0)
        n_values = np.arange(1, int(3 * r_cell / r_gap) + 2)
        power = matched_power_curve(n_values, r_cell, r_gap, 120.0, 317e-6, q_total=0.1)
        n_best = n_values[int(np.argmax(power))]
        assert abs(r_cell / n_best - r_gap) / r_gap <= 0.05

    def test_single_count_is_returned(self):
        assert optimize_couples(self.design, self.env, [3000]).n_optimal == 3000

    def test_open_bypass_power_falls_with_couples(self):
        power = matched_power_curve([10, 100, 1000], 1e5, math.inf, 120.0, 317e-6, q_total=0.1)
        assert power[0] > power[1] > power[2]

    def test_nearly_open_bypass_picks_smallest_count(self):
        """Constant flow with R_gap far above R_cell: the optimum n = R_cell / R_gap is below the range."""
        design = replace(self.design, gap_conductivity=1e-12)
        result = optimize_couples(design, self.env, range(100, 1001))
        assert result.n_optimal == 100

    def test_shorted_gap_gives_no_power(self):
        power = matched_power_curve([10, 100], 1e5, 0.0, 120.0, 317e-6, q_total=0.1)
        assert (power == 0).all()

    def test_curve_needs_a_drive(self):
        with pytest.raises(InvalidInputError):
            matched_power_curve([10], 1e5, 20.0, 120.0, 317e-6)

    def test_empty_range_rejected(self):
        with pytest.raises(InvalidInputError):
            optimize_couples(self.design, self.env, [])


class TestChuck:
    """Die on a heated chuck: rim against no rim, released against unreleased."""

    def setup_method(self):
        self.config = load_config()
        self.design = self.config.design()
        self.setup = self.config.chuck_setup()

    def _density(self, rim, forced, released):
        return chuck_scenario(self.design, self.setup, rim, forced, released).areal_voltage_density

    @pytest.mark.parametrize("forced", [False, True])
    def test_rim_ratio(self, forced):
        ratio = self._density(True, forced, False) / self._density(False, forced, False)
        assert 2.0 <= ratio <= 3.0

    def test_natural_convection_ratio(self):
        ratio = self._density(True, False, False) / self._density(False, False, False)
        assert ratio == pytest.approx(2.404, rel=1e-3)

    @pytest.mark.parametrize("rim", [False, True])
    def test_released_beats_unreleased(self, rim):
        assert self._density(rim, True, True) > self._density(rim, True, False)

    def test_density_rises_with_convection_coefficient(self):
        densities = [
            chuck_scenario(self.design, replace(self.setup, h_natural=h), True, False, False).areal_voltage_density
            for h in (5.0, 10.0, 20.0, 50.0)
        ]
        assert all(later > earlier for earlier, later in zip(densities, densities[1:]))

    def test_ratio_against_zero_density_is_undefined(self):
        assert math.isnan(density_ratio(1.0, 0.0))
        assert density_ratio(3.0, 1.5) == pytest.approx(2.0)

    def test_chuck_at_ambient_gives_zero_density(self):
        at_ambient = replace(self.setup, t_chuck=self.setup.t_ambient)
        assert chuck_scenario(self.design, at_ambient, True, False, False).areal_voltage_density == 0.0
        table = chuck_matrix(self.design, at_ambient)
        assert table["rim_gain"].isna().all()

    def test_matrix_has_all_combinations(self):
        table = chuck_matrix(self.design, self.setup)
        assert len(table) == 8
        assert (table["rim_gain"] > 1).all()
        assert (table["forced_gain"] > 1).all()

    def test_voltage_curve_is_linear_in_chuck_difference(self):
        curve = chuck_voltage_curve(self.design, self.setup, True, True, False, [2.0, 4.0, 8.0])
        voltages = curve["V_oc_V"].tolist()
        assert voltages[1] == pytest.approx(2 * voltages[0])
        assert voltages[2] == pytest.approx(4 * voltages[0])


class TestArrangements:
    def setup_method(self):
        self.config = load_config()
        self.design = self.config.design()
        self.env = self.config.environment()

    def test_rim_keeps_most_of_the_temperature_difference(self):
        table = compare_arrangements(self.design, self.env, self.config.chip_stack_thickness)
        dt = dict(zip(table["arrangement"], table["dT_junctions_K"]))
        assert dt["sandwich"] < dt["chip"]
        assert dt["sandwich"] < dt["rim"]
        assert dt["sandwich"] < 0.05 * dt["rim"]
        assert dt["rim"] == pytest.approx(1.4811, rel=1e-3)

    def test_unknown_arrangement_rejected(self):
        with pytest.raises(InvalidInputError):
            arrangement_gap_resistance(self.design, "stack", 5e-4, 1e-3)
