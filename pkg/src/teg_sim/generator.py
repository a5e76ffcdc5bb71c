"""Generator predictions: voltage, internal resistance, matched-load power.

The thermal side comes from :mod:`teg_sim.leg_thermal` (one cell) and
:mod:`teg_sim.thermal_network` (the whole device in its environment). Single pass:
Peltier heat carried by the load current is ignored.

Two heat-flow hypotheses are supported wherever the couple count varies:

- ``network``: the circuit is solved for each design at fixed source/ambient temperatures.
- ``constant_flow``: the heat flow is fixed by the external resistances alone,
  Q = ΔT_env / (R_body + plates + R_sink), and forced through the junction block.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .couple_geometry import RimLayout, ThermocoupleGeometry, UnitCell, leg_segments, validate_rim
from .errors import GeometryError, InvalidInputError, SingularCircuitError
from .leg_thermal import NumericSettings, cell_resistance
from .materials import CoupleMaterials, contact_resistance
from .sweep_runner import run_rows
from .thermal_network import (
    Environment,
    ThermalCircuit,
    convection_resistance,
    gap_resistance,
    parallel,
    solve_network,
)
from .units import to_cm2

logger = logging.getLogger(__name__)

HYPOTHESES = ("network", "constant_flow")
AIR_CONDUCTIVITY = 0.026  # W/(m·K)
TEOS_CONDUCTIVITY = 1.4  # W/(m·K)
CONTACTS_PER_LEG = 2

# Mask types: couple count and rim rows.
DESIGN_TYPES: Dict[str, Tuple[int, int]] = {"A": (2350, 1), "B": (4700, 2)}


@dataclass
class GeneratorDesign:
    n_couples: int
    geometry: ThermocoupleGeometry
    materials: CoupleMaterials
    cell: UnitCell
    layout: RimLayout
    contact_area_per_junction: Optional[float] = None  # m², None: a × a
    interconnect_resistance_per_couple: float = 0.0
    gap_conductivity: float = AIR_CONDUCTIVITY
    device_area: float = 3e-4  # m²
    design_type: str = ""

    def __post_init__(self):
        if self.n_couples < 1:
            raise GeometryError(f"n_couples must be >= 1, got {self.n_couples}")
        if self.cell.geometry != self.geometry:
            self.cell = replace(self.cell, geometry=self.geometry)
        if self.layout.n_couples != self.n_couples:
            self.layout = self.layout.with_couples(self.n_couples)
        check = validate_rim(self.layout)
        if not check.ok:
            raise GeometryError(f"{self.n_couples} couples on {self.layout.rows} row(s): {check.describe()}")
        if self.interconnect_resistance_per_couple < 0:
            raise InvalidInputError("interconnect_resistance_per_couple must be >= 0")
        if not self.device_area > 0:
            raise InvalidInputError("device_area must be > 0")

    @property
    def label(self) -> str:
        a = round(self.geometry.end_width_a * 1e6, 3)
        b = round(self.geometry.middle_width_b * 1e6, 3)
        return f"{a:g}-{b:g}-{self.design_type}" if self.design_type else f"{a:g}-{b:g}"

    @property
    def contact_area(self) -> float:
        if self.contact_area_per_junction is None:
            return self.geometry.end_width_a ** 2
        return self.contact_area_per_junction

    @property
    def k_leg(self) -> float:
        return self.materials.mean_thermal_conductivity

    def with_couples(self, n_couples: int, rows: Optional[int] = None) -> "GeneratorDesign":
        """Same design with another couple count; rows grow if the rim would overflow."""
        if rows is None:
            rows = max(self.layout.rows, rows_needed(self.layout, n_couples))
        return replace(self, n_couples=n_couples, layout=self.layout.with_couples(n_couples, rows))

    def with_type(self, design_type: str, types: Optional[Dict[str, Tuple[int, int]]] = None) -> "GeneratorDesign":
        types = types or DESIGN_TYPES
        if design_type not in types:
            raise InvalidInputError(f"unknown design type '{design_type}', expected one of {', '.join(types)}")
        n_couples, rows = types[design_type]
        return replace(
            self,
            n_couples=n_couples,
            layout=self.layout.with_couples(n_couples, rows),
            design_type=design_type,
        )

    def with_geometry(self, **changes) -> "GeneratorDesign":
        geometry = self.geometry.with_changes(**changes)
        return replace(
            self,
            geometry=geometry,
            cell=replace(self.cell, geometry=geometry),
        )


def rows_needed(layout: RimLayout, n_couples: int) -> int:
    return max(1, math.ceil(n_couples * layout.couple_pitch / layout.rim_length))


@dataclass
class GeneratorReport:
    n_couples: int
    v_oc: float
    r_internal: float
    p_matched: float
    delta_t_junctions: float
    q_total: float
    areal_voltage_density: float  # mV/(K·cm²)
    r_cell: float = math.nan
    r_pile: float = math.nan
    r_gap: float = math.nan
    hypothesis: str = "network"
    couples_for_1v: Optional[int] = None
    notes: List[str] = field(default_factory=list)

    def as_row(self) -> Dict[str, float]:
        return {
            "n_couples": self.n_couples,
            "V_oc_V": self.v_oc,
            "R_internal_ohm": self.r_internal,
            "P_matched_W": self.p_matched,
            "dT_junctions_K": self.delta_t_junctions,
            "Q_total_W": self.q_total,
            "areal_voltage_density_mV_per_K_cm2": self.areal_voltage_density,
            "R_cell_K_per_W": self.r_cell,
            "R_pile_K_per_W": self.r_pile,
            "R_gap_K_per_W": self.r_gap,
        }


def open_circuit_voltage(n: int, pair: CoupleMaterials, delta_t: float) -> float:
    """n·(S_p - S_n)·ΔT."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    return n * pair.delta_seebeck * delta_t


def _leg_electrical_resistance(geometry: ThermocoupleGeometry, resistivity: float) -> float:
    return sum(resistivity * length / (width * thickness) for length, width, thickness in leg_segments(geometry))


def couple_resistance(d: GeneratorDesign) -> float:
    """Electrical resistance of one couple: both legs, four contacts, interconnect."""
    pair = d.materials
    area = d.contact_area
    legs = _leg_electrical_resistance(d.geometry, pair.p.electrical_resistivity) + _leg_electrical_resistance(
        d.geometry, pair.n.electrical_resistivity
    )
    contacts = CONTACTS_PER_LEG * (contact_resistance(pair.p, area) + contact_resistance(pair.n, area))
    return legs + contacts + d.interconnect_resistance_per_couple


def internal_resistance(d: GeneratorDesign) -> float:
    """n × single-couple resistance (couples in series)."""
    return d.n_couples * couple_resistance(d)


def matched_load_power(v_oc: float, r_internal: float) -> float:
    """V²/(4R)."""
    if not r_internal > 0:
        raise InvalidInputError(f"internal resistance must be > 0, got {r_internal}")
    return v_oc ** 2 / (4.0 * r_internal)


def couples_for_voltage(pair: CoupleMaterials, delta_t: float, target_voltage: float = 1.0) -> int:
    """Series couples needed to reach ``target_voltage`` at a junction ΔT."""
    per_couple = abs(pair.delta_seebeck * delta_t)
    if per_couple == 0:
        raise InvalidInputError("no voltage per couple at zero junction temperature difference")
    return math.ceil(abs(target_voltage) / per_couple)


def diluted_delta_t(q_total: float, r_gap: float, r_cell: float, n: int) -> float:
    """Junction ΔT with Q forced through n cells in parallel with the gap."""
    return q_total * parallel(r_cell / n, r_gap)


def areal_density(v_oc: float, delta_t_env: float, area: float) -> float:
    """mV per kelvin of source-ambient difference per cm² of device."""
    if delta_t_env == 0:
        return 0.0
    return v_oc * 1e3 / (delta_t_env * to_cm2(area))


def watch_gap_resistance(d: GeneratorDesign) -> float:
    """Air path beside the pile: etch depth over the etched die area."""
    return gap_resistance(d.layout.etch_depth, d.layout.etched_area, d.gap_conductivity)


def _check_hypothesis(hypothesis: str) -> None:
    if hypothesis not in HYPOTHESES:
        raise InvalidInputError(f"unknown hypothesis '{hypothesis}', expected one of {', '.join(HYPOTHESES)}")


def constant_flow(circuit: ThermalCircuit) -> float:
    """Heat flow set by the external resistances alone."""
    if circuit.r_external == 0:
        raise SingularCircuitError("constant-flow hypothesis needs a non-zero external resistance")
    return (circuit.t_source - circuit.t_ambient) / circuit.r_external


def report_for_circuit(
    d: GeneratorDesign,
    circuit: ThermalCircuit,
    r_cell: float,
    hypothesis: str = "network",
    density_area: Optional[float] = None,
) -> GeneratorReport:
    """Electrical outputs once the thermal circuit is known."""
    _check_hypothesis(hypothesis)
    if hypothesis == "network":
        solution = solve_network(circuit)
        q_total, delta_t = solution.q_total, solution.delta_t_junctions
    else:
        q_total = constant_flow(circuit)
        delta_t = diluted_delta_t(q_total, circuit.r_gap, r_cell, d.n_couples)

    v_oc = open_circuit_voltage(d.n_couples, d.materials, delta_t)
    r_int = internal_resistance(d)
    report = GeneratorReport(
        n_couples=d.n_couples,
        v_oc=v_oc,
        r_internal=r_int,
        p_matched=matched_load_power(v_oc, r_int),
        delta_t_junctions=delta_t,
        q_total=q_total,
        areal_voltage_density=areal_density(
            v_oc, circuit.t_source - circuit.t_ambient, density_area or d.device_area
        ),
        r_cell=r_cell,
        r_pile=circuit.r_pile,
        r_gap=circuit.r_gap,
        hypothesis=hypothesis,
    )
    if delta_t != 0:
        report.couples_for_1v = couples_for_voltage(d.materials, delta_t)
    return report


def simulate(
    d: GeneratorDesign,
    env: Environment,
    hypothesis: str = "network",
    backend: str = "analytic",
    settings: Optional[NumericSettings] = None,
    r_cell: Optional[float] = None,
) -> GeneratorReport:
    """Full single-pass prediction for one design in one environment."""
    _check_hypothesis(hypothesis)
    if r_cell is None:
        r_cell = cell_resistance(d.cell, d.k_leg, backend, settings)
    circuit = env.circuit(r_pile=r_cell / d.n_couples, r_gap=watch_gap_resistance(d))
    report = report_for_circuit(d, circuit, r_cell, hypothesis)
    logger.info(
        "%s: n=%d dT=%.4g K V_oc=%.4g V P=%.4g W",
        d.label or "design", d.n_couples, report.delta_t_junctions, report.v_oc, report.p_matched,
    )
    return report


def power_ceiling(d: GeneratorDesign, env: Environment, r_cell: float) -> float:
    """Upper bound on matched power over any couple count.

    With Q bounded by ΔT_env / R_external, P(n) peaks at n·R_gap = R_cell at
    (ΔS·Q)²·R_gap·R_cell / (16·r_couple).
    """
    circuit = env.circuit(r_pile=r_cell / d.n_couples, r_gap=watch_gap_resistance(d))
    q_max = constant_flow(circuit)
    return (d.materials.delta_seebeck * q_max) ** 2 * circuit.r_gap * r_cell / (16.0 * couple_resistance(d))


def sweep_designs(
    template: GeneratorDesign,
    env: Environment,
    catalog: Sequence[Tuple[float, float, str]],
    types: Optional[Dict[str, Tuple[int, int]]] = None,
    hypothesis: str = "network",
    backend: str = "analytic",
    settings: Optional[NumericSettings] = None,
    parallelism: int = 1,
) -> pd.DataFrame:
    """One report row per (a, b, type); failing rows keep their error text."""
    _check_hypothesis(hypothesis)

    def evaluate(row):
        a, b, design_type = row
        design = template.with_geometry(end_width_a=a, middle_width_b=b).with_type(design_type, types)
        r_cell = cell_resistance(design.cell, design.k_leg, backend, settings)
        report = simulate(design, env, hypothesis, r_cell=r_cell)
        return report, power_ceiling(design, env, r_cell)

    outcomes = run_rows(evaluate, [tuple(row) for row in catalog], parallelism)
    records = []
    for outcome in outcomes:
        a, b, design_type = outcome.item
        label = f"{a * 1e6:g}-{b * 1e6:g}-{design_type}"
        record = {"design": label, "end_width_a_m": a, "middle_width_b_m": b, "type": design_type}
        if outcome.ok:
            report, ceiling = outcome.value
            record.update(report.as_row())
            record["P_ceiling_W"] = ceiling
        record["error"] = outcome.error or ""
        records.append(record)
    columns = [
        "design", "end_width_a_m", "middle_width_b_m", "type", "n_couples", "V_oc_V", "R_internal_ohm",
        "P_matched_W", "dT_junctions_K", "Q_total_W", "areal_voltage_density_mV_per_K_cm2",
        "R_cell_K_per_W", "R_pile_K_per_W", "R_gap_K_per_W", "P_ceiling_W", "error",
    ]
    return pd.DataFrame.from_records(records, columns=columns)


def matched_power_curve(
    n_values: Sequence[int],
    r_cell: float,
    r_gap: float,
    r_couple: float,
    delta_seebeck: float,
    q_total: Optional[float] = None,
    t_difference: Optional[float] = None,
    r_external: Optional[float] = None,
) -> np.ndarray:
    """Matched-load power over couple counts.

    Pass ``q_total`` for the constant-flow hypothesis, or ``t_difference`` and
    ``r_external`` to solve the circuit for every n.
    """
    n = np.asarray(n_values, dtype=float)
    if r_gap == 0:
        r_block = np.zeros_like(n)
    else:
        r_block = 1.0 / (n / r_cell + 1.0 / r_gap)
    if q_total is not None:
        q = np.full_like(n, q_total)
    elif t_difference is not None and r_external is not None:
        q = t_difference / (r_external + r_block)
    else:
        raise InvalidInputError("give q_total, or t_difference with r_external")
    v_oc = n * delta_seebeck * q * r_block
    return v_oc ** 2 / (4.0 * n * r_couple)


@dataclass
class OptimizationResult:
    n_optimal: int
    report: GeneratorReport
    curve: pd.DataFrame


def optimize_couples(
    template: GeneratorDesign,
    env: Environment,
    n_range: Sequence[int],
    hypothesis: str = "constant_flow",
    backend: str = "analytic",
    settings: Optional[NumericSettings] = None,
) -> OptimizationResult:
    """Couple count with the highest matched power; ties go to the smaller n."""
    _check_hypothesis(hypothesis)
    n_values = sorted({int(n) for n in n_range})
    if not n_values or n_values[0] < 1:
        raise InvalidInputError("n_range must hold at least one count >= 1")

    r_cell = cell_resistance(template.cell, template.k_leg, backend, settings)
    r_gap = watch_gap_resistance(template)
    circuit = env.circuit(r_pile=r_cell / template.n_couples, r_gap=r_gap)
    kwargs = (
        {"q_total": constant_flow(circuit)}
        if hypothesis == "constant_flow"
        else {"t_difference": circuit.t_source - circuit.t_ambient, "r_external": circuit.r_external}
    )
    power = matched_power_curve(
        n_values, r_cell, r_gap, couple_resistance(template), template.materials.delta_seebeck, **kwargs
    )
    best = int(np.argmax(power))  # first maximum, i.e. the smallest n
    n_opt = n_values[best]
    logger.info("optimum n=%d (R_cell/R_gap=%.1f)", n_opt, r_cell / r_gap)

    design = template.with_couples(n_opt)
    report = simulate(design, env, hypothesis, r_cell=r_cell)
    curve = pd.DataFrame({"n_couples": n_values, "P_matched_W": power})
    return OptimizationResult(n_optimal=n_opt, report=report, curve=curve)


@dataclass
class ChuckSetup:
    """Bench emulation: die on a heated chuck, bare Si die on top as the radiator."""

    t_chuck: float  # K
    t_ambient: float  # K
    radiator_area: float  # m², also bounds the gap under the radiator
    chuck_contact_resistance: float = 0.0
    h_natural: float = 10.0
    h_forced: float = 50.0
    teos_conductivity: float = TEOS_CONDUCTIVITY
    air_conductivity: float = AIR_CONDUCTIVITY
    device_area: Optional[float] = None  # m², None: radiator area

    def __post_init__(self):
        if not self.radiator_area > 0:
            raise InvalidInputError("radiator_area must be > 0")
        if self.chuck_contact_resistance < 0:
            raise InvalidInputError("chuck_contact_resistance must be >= 0")


@dataclass
class ChuckResult:
    rim: bool
    forced_convection: bool
    released: bool
    areal_voltage_density: float  # mV/(K·cm²)
    report: GeneratorReport
    note: str = (
        "absolute densities depend on unstated bench geometry; "
        "compare ratios between flag settings, not absolute values"
    )


def chuck_scenario(
    d: GeneratorDesign,
    setup: ChuckSetup,
    rim: bool,
    forced_convection: bool,
    released: bool,
    backend: str = "analytic",
    settings: Optional[NumericSettings] = None,
) -> ChuckResult:
    """Areal voltage density on the chuck for one set of flags."""
    fill = setup.air_conductivity if released else setup.teos_conductivity
    cell = d.cell.with_changes(fill_conductivity=fill)
    r_cell = cell_resistance(cell, d.k_leg, backend, settings)
    gap = d.layout.etch_depth if rim else cell.plate_separation
    h_coeff = setup.h_forced if forced_convection else setup.h_natural
    circuit = ThermalCircuit(
        t_source=setup.t_chuck,
        t_ambient=setup.t_ambient,
        r_body=setup.chuck_contact_resistance,
        r_hot_plate=0.0,
        r_cold_plate=0.0,
        r_pile=r_cell / d.n_couples,
        r_gap=gap_resistance(gap, setup.radiator_area, setup.air_conductivity),
        r_sink=convection_resistance(h_coeff, setup.radiator_area),
    )
    report = report_for_circuit(d, circuit, r_cell, "network", setup.device_area or setup.radiator_area)
    logger.debug(
        "chuck rim=%s forced=%s released=%s: %.4g mV/(K cm2)",
        rim, forced_convection, released, report.areal_voltage_density,
    )
    return ChuckResult(rim, forced_convection, released, report.areal_voltage_density, report)


def density_ratio(density: float, reference: float) -> float:
    """Ratio of two areal densities, nan when the reference density is zero."""
    if reference == 0:
        return math.nan
    return density / reference


def chuck_matrix(
    d: GeneratorDesign,
    setup: ChuckSetup,
    backend: str = "analytic",
    settings: Optional[NumericSettings] = None,
) -> pd.DataFrame:
    """All eight flag combinations, with the rim and forced-convection gains per row."""
    records = []
    for released in (False, True):
        for forced in (False, True):
            for rim in (False, True):
                result = chuck_scenario(d, setup, rim, forced, released, backend, settings)
                records.append(
                    {
                        "released": released,
                        "forced_convection": forced,
                        "rim": rim,
                        "V_oc_V": result.report.v_oc,
                        "dT_junctions_K": result.report.delta_t_junctions,
                        "areal_voltage_density_mV_per_K_cm2": result.areal_voltage_density,
                    }
                )
    table = pd.DataFrame.from_records(records)
    density = "areal_voltage_density_mV_per_K_cm2"
    keyed = table.set_index(["released", "forced_convection", "rim"])[density]
    table["rim_gain"] = [
        density_ratio(keyed[(rel, fc, True)], keyed[(rel, fc, False)])
        for rel, fc in zip(table["released"], table["forced_convection"])
    ]
    table["forced_gain"] = [
        density_ratio(keyed[(rel, True, rim)], keyed[(rel, False, rim)])
        for rel, rim in zip(table["released"], table["rim"])
    ]
    return table


def chuck_voltage_curve(
    d: GeneratorDesign,
    setup: ChuckSetup,
    rim: bool,
    forced_convection: bool,
    released: bool,
    delta_t_values: Sequence[float],
    backend: str = "analytic",
    settings: Optional[NumericSettings] = None,
) -> pd.DataFrame:
    """Open-circuit voltage against chuck-ambient temperature difference."""
    voltages = []
    for delta_t in delta_t_values:
        shifted = replace(setup, t_chuck=setup.t_ambient + delta_t)
        voltages.append(chuck_scenario(d, shifted, rim, forced_convection, released, backend, settings).report.v_oc)
    return pd.DataFrame({"dT_chuck_K": list(delta_t_values), "V_oc_V": voltages})


ARRANGEMENTS = ("sandwich", "chip", "rim")


def arrangement_gap_resistance(
    d: GeneratorDesign, arrangement: str, plate_area: float, chip_stack_thickness: float
) -> float:
    """Parasitic path beside the pile for the three ways of assembling the device.

    sandwich: couples spread between full plates, micrometre air gap over the whole plate.
    chip: die clamped between plates; thick air layer outside the die, micrometre gap on it.
    rim: deep-etched die, air path as long as the etch depth.
    """
    k = d.gap_conductivity
    pile_area = d.n_couples * d.cell.footprint
    if arrangement == "sandwich":
        return gap_resistance(d.cell.plate_separation, plate_area - pile_area, k)
    if arrangement == "chip":
        on_die = gap_resistance(d.cell.plate_separation, d.layout.die_area - pile_area, k)
        outside = plate_area - d.layout.die_area
        if outside <= 0:
            return on_die
        return parallel(on_die, gap_resistance(chip_stack_thickness, outside, k))
    if arrangement == "rim":
        return watch_gap_resistance(d)
    raise InvalidInputError(f"unknown arrangement '{arrangement}'")


def compare_arrangements(
    d: GeneratorDesign,
    env: Environment,
    chip_stack_thickness: float,
    backend: str = "analytic",
    settings: Optional[NumericSettings] = None,
) -> pd.DataFrame:
    """Gap resistance, junction ΔT and outputs for sandwich, chip and rim assemblies."""
    r_cell = cell_resistance(d.cell, d.k_leg, backend, settings)
    records = []
    for arrangement in ARRANGEMENTS:
        r_gap = arrangement_gap_resistance(d, arrangement, env.body_contact_area, chip_stack_thickness)
        report = report_for_circuit(d, env.circuit(r_cell / d.n_couples, r_gap), r_cell)
        records.append(
            {
                "arrangement": arrangement,
                "R_gap_K_per_W": r_gap,
                "dT_junctions_K": report.delta_t_junctions,
                "V_oc_V": report.v_oc,
                "P_matched_W": report.p_matched,
            }
        )
    return pd.DataFrame.from_records(records)
