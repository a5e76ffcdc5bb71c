"""Lumped thermal circuit of a TEG between a heat source and the ambient.

    source -- R_body -- R_hot_plate --+-- R_pile --+-- R_cold_plate -- R_sink -- ambient
                                      +-- R_gap  --+

R_pile is all couples in parallel, R_gap the air (or oxide) path beside them.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict

from .errors import InvalidInputError, SingularCircuitError
from .units import STEFAN_BOLTZMANN

logger = logging.getLogger(__name__)

NODE_NAMES = ("source", "body_surface", "hot_junction", "cold_junction", "radiator", "ambient")


def parallel(r_a: float, r_b: float) -> float:
    """Two resistors in parallel; inf is an open branch, 0 a short."""
    if r_a == 0 or r_b == 0:
        return 0.0
    return 1.0 / (1.0 / r_a + 1.0 / r_b)


def gap_resistance(gap: float, area: float, k_fill: float) -> float:
    """Conduction through a fill layer: gap / (k·A)."""
    if not gap > 0 or not area > 0 or not k_fill > 0:
        raise InvalidInputError(
            f"gap, area and conductivity must be > 0 (gap={gap}, area={area}, k={k_fill})"
        )
    return gap / (k_fill * area)


def convection_resistance(h_coeff: float, area: float) -> float:
    """1 / (h·A)."""
    if not h_coeff > 0 or not area > 0:
        raise InvalidInputError(f"h and area must be > 0 (h={h_coeff}, area={area})")
    return 1.0 / (h_coeff * area)


def radiation_conductance(emissivity: float, area: float, temperature: float) -> float:
    """Linearized grey-body exchange with the surroundings, 4·ε·σ·T³·A (W/K)."""
    if not 0 < emissivity <= 1:
        raise InvalidInputError(f"emissivity must be in (0, 1], got {emissivity}")
    if not area > 0 or not temperature > 0:
        raise InvalidInputError("area and temperature must be > 0")
    return 4.0 * emissivity * STEFAN_BOLTZMANN * temperature ** 3 * area


def matched_fill_fraction(k_material: float, k_fill: float) -> float:
    """Area fraction at which material and fill columns of equal height match.

    Equal conductivities match only at the full split, so the ratio is capped at 1.
    """
    if not k_material > 0 or not k_fill > 0:
        raise InvalidInputError("conductivities must be > 0")
    return min(1.0, k_fill / k_material)


@dataclass
class ThermalCircuit:
    t_source: float  # K
    t_ambient: float  # K
    r_body: float
    r_hot_plate: float
    r_cold_plate: float
    r_pile: float
    r_gap: float
    r_sink: float

    def __post_init__(self):
        if not self.t_source > 0 or not self.t_ambient > 0:
            raise InvalidInputError("temperatures must be > 0 K")
        for name in ("r_body", "r_hot_plate", "r_cold_plate", "r_pile", "r_gap", "r_sink"):
            value = getattr(self, name)
            if math.isnan(value) or value < 0:
                raise InvalidInputError(f"{name} must be >= 0, got {value}")
        if self.r_pile == 0 and self.r_gap == 0:
            raise InvalidInputError("r_pile and r_gap cannot both be zero")

    @property
    def r_junction_block(self) -> float:
        return parallel(self.r_pile, self.r_gap)

    @property
    def r_external(self) -> float:
        """Everything in series with the junction block."""
        return self.r_body + self.r_hot_plate + self.r_cold_plate + self.r_sink

    @property
    def r_total(self) -> float:
        return self.r_external + self.r_junction_block


@dataclass
class NetworkSolution:
    q_total: float
    q_pile: float
    q_gap: float
    delta_t_junctions: float
    node_temperatures: Dict[str, float] = field(default_factory=dict)


def solve_network(c: ThermalCircuit) -> NetworkSolution:
    """Series chain driven by T_source - T_ambient, junction block split by conductance."""
    r_total = c.r_total
    if r_total == 0:
        raise SingularCircuitError("thermal circuit has zero total resistance")
    if math.isinf(r_total):
        raise SingularCircuitError("thermal circuit is open (infinite resistance)")

    q_total = (c.t_source - c.t_ambient) / r_total
    r_block = c.r_junction_block
    delta_t = q_total * r_block
    if c.r_pile == 0:
        q_pile, q_gap = q_total, 0.0
    elif c.r_gap == 0:
        q_pile, q_gap = 0.0, q_total
    else:
        q_pile = delta_t / c.r_pile
        q_gap = q_total - q_pile

    nodes = {"source": c.t_source}
    nodes["body_surface"] = nodes["source"] - q_total * c.r_body
    nodes["hot_junction"] = nodes["body_surface"] - q_total * c.r_hot_plate
    nodes["cold_junction"] = nodes["hot_junction"] - delta_t
    nodes["radiator"] = nodes["cold_junction"] - q_total * c.r_cold_plate
    nodes["ambient"] = c.t_ambient

    logger.debug("network: Q=%.4g W, dT_junctions=%.4g K, R_total=%.4g K/W", q_total, delta_t, r_total)
    return NetworkSolution(
        q_total=q_total,
        q_pile=q_pile,
        q_gap=q_gap,
        delta_t_junctions=delta_t,
        node_temperatures=nodes,
    )


@dataclass
class Environment:
    """Body-side and ambient-side conditions around the device, SI units."""

    t_body: float
    t_ambient: float
    body_specific_resistance: float  # m²·K/W
    body_contact_area: float  # m²
    radiator_area: float  # m²
    h_natural: float = 10.0
    h_forced: float = 50.0
    convection: str = "natural"
    r_hot_plate: float = 0.0
    r_cold_plate: float = 0.0
    radiation_enabled: bool = False
    emissivity: float = 0.9

    def __post_init__(self):
        if self.convection not in ("natural", "forced"):
            raise InvalidInputError(f"convection must be 'natural' or 'forced', got '{self.convection}'")
        if not self.body_contact_area > 0 or not self.radiator_area > 0:
            raise InvalidInputError("body_contact_area and radiator_area must be > 0")
        if self.body_specific_resistance < 0:
            raise InvalidInputError("body_specific_resistance must be >= 0")

    @property
    def h_coefficient(self) -> float:
        return self.h_forced if self.convection == "forced" else self.h_natural

    @property
    def r_body(self) -> float:
        return self.body_specific_resistance / self.body_contact_area

    @property
    def r_sink(self) -> float:
        """Convection from the radiator, with the radiation branch in parallel when enabled."""
        r_conv = convection_resistance(self.h_coefficient, self.radiator_area)
        if not self.radiation_enabled:
            return r_conv
        r_rad = 1.0 / radiation_conductance(self.emissivity, self.radiator_area, self.t_ambient)
        return parallel(r_conv, r_rad)

    @property
    def delta_t(self) -> float:
        return self.t_body - self.t_ambient

    def circuit(self, r_pile: float, r_gap: float) -> ThermalCircuit:
        return ThermalCircuit(
            t_source=self.t_body,
            t_ambient=self.t_ambient,
            r_body=self.r_body,
            r_hot_plate=self.r_hot_plate,
            r_cold_plate=self.r_cold_plate,
            r_pile=r_pile,
            r_gap=r_gap,
            r_sink=self.r_sink,
        )
