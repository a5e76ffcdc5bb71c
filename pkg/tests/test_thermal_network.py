"""Tests for the lumped body-device-ambient thermal circuit."""

import math
from dataclasses import replace

import pytest
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from teg_sim.errors import InvalidInputError, SingularCircuitError
from teg_sim.thermal_network import (
    NODE_NAMES,
    Environment,
    ThermalCircuit,
    convection_resistance,
    gap_resistance,
    matched_fill_fraction,
    parallel,
    radiation_conductance,
    solve_network,
)
from teg_sim.units import celsius_to_kelvin


def watch_environment(**changes):
    values = dict(
        t_body=celsius_to_kelvin(37.0),
        t_ambient=celsius_to_kelvin(22.0),
        body_specific_resistance=300.0e-4,
        body_contact_area=5e-4,
        radiator_area=10e-4,
    )
    values.update(changes)
    return Environment(**values)


class TestElements:
    def test_parallel(self):
        assert parallel(2.0, 2.0) == pytest.approx(1.0)
        assert parallel(math.inf, 3.0) == 3.0
        assert parallel(0.0, 3.0) == 0.0

    def test_gap_resistance(self):
        assert gap_resistance(250e-6, 1.5625e-4, 0.026) == pytest.approx(61.54, rel=1e-3)

    def test_gap_resistance_rejects_zero_area(self):
        with pytest.raises(InvalidInputError):
            gap_resistance(1e-6, 0.0, 0.026)

    def test_convection_resistance(self):
        assert convection_resistance(10.0, 10e-4) == pytest.approx(100.0)

    def test_radiation_conductance(self):
        assert radiation_conductance(1.0, 1.0, 300.0) == pytest.approx(4 * 5.670374419e-8 * 300.0 ** 3)

    def test_emissivity_range(self):
        with pytest.raises(InvalidInputError, match="emissivity"):
            radiation_conductance(1.5, 1.0, 300.0)

    def test_matched_fill_fraction(self):
        """Air against poly-SiGe: roughly one part in a hundred."""
        assert 0.008 <= matched_fill_fraction(3.0, 0.026) <= 0.010
        assert matched_fill_fraction(1.0, 1.0) == 1.0


class TestSolveNetwork:
    """Watch on the wrist: the reference design's circuit."""

    def setup_method(self):
        self.env = watch_environment()
        self.circuit = self.env.circuit(r_pile=63.05, r_gap=24.28)
        self.solution = solve_network(self.circuit)

    def test_environment_resistances(self):
        assert self.env.r_body == pytest.approx(60.0)
        assert self.env.r_sink == pytest.approx(100.0)

    def test_heat_flow_and_junction_difference(self):
        assert self.solution.q_total == pytest.approx(0.0845, rel=1e-3)
        assert self.solution.delta_t_junctions == pytest.approx(1.4811, rel=1e-3)

    def test_branch_flows_add_up(self):
        assert self.solution.q_pile + self.solution.q_gap == pytest.approx(self.solution.q_total)
        assert self.solution.q_pile == pytest.approx(self.solution.delta_t_junctions / 63.05)

    def test_node_temperatures_fall_towards_ambient(self):
        temps = [self.solution.node_temperatures[name] for name in NODE_NAMES]
        assert all(later <= earlier for earlier, later in zip(temps, temps[1:]))
        assert temps[0] == pytest.approx(celsius_to_kelvin(37.0))
        assert temps[-1] == pytest.approx(celsius_to_kelvin(22.0))

    def test_radiator_drop_matches_sink(self):
        nodes = self.solution.node_temperatures
        assert nodes["radiator"] - nodes["ambient"] == pytest.approx(self.solution.q_total * 100.0)

    def test_larger_sink_resistance_lowers_flow_and_difference(self):
        previous = self.solution
        for r_sink in (150.0, 300.0, 1000.0):
            solution = solve_network(replace(self.circuit, r_sink=r_sink))
            assert solution.q_total < previous.q_total
            assert solution.delta_t_junctions < previous.delta_t_junctions
            previous = solution

    def test_shorted_pile_takes_all_flow(self):
        solution = solve_network(self.env.circuit(r_pile=0.0, r_gap=24.28))
        assert solution.q_pile == solution.q_total
        assert solution.delta_t_junctions == 0.0

    def test_zero_total_resistance_is_singular(self):
        circuit = ThermalCircuit(310.0, 295.0, 0.0, 0.0, 0.0, 0.0, 10.0, 0.0)
        with pytest.raises(SingularCircuitError):
            solve_network(circuit)

    def test_open_circuit_is_singular(self):
        circuit = ThermalCircuit(310.0, 295.0, 60.0, 0.0, 0.0, 63.0, 24.0, math.inf)
        with pytest.raises(SingularCircuitError, match="open"):
            solve_network(circuit)

    def test_negative_resistance_rejected(self):
        with pytest.raises(InvalidInputError, match="r_gap"):
            ThermalCircuit(310.0, 295.0, 60.0, 0.0, 0.0, 63.0, -1.0, 100.0)


class TestEnvironment:
    def test_forced_convection_lowers_sink(self):
        assert watch_environment(convection="forced").r_sink == pytest.approx(20.0)

    def test_radiation_in_parallel_with_convection(self):
        plain = watch_environment()
        radiating = watch_environment(radiation_enabled=True)
        assert radiating.r_sink < plain.r_sink

    def test_unknown_convection_rejected(self):
        with pytest.raises(InvalidInputError, match="convection"):
            watch_environment(convection="jet")
