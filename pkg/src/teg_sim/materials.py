"""Thermoelectric material constants and figures of merit."""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional

from .errors import InvalidInputError
from .units import MICROVOLT_PER_K, MILLIOHM_CM, OHM_SQUARE_MICROMETER

# Room-temperature ZT values quoted for the characterized poly-SiGe films.
# They are kept for comparison only; reports always use the formula value.
REPORTED_ZT: Dict[str, float] = {"p": 0.025, "n": 0.096}

# Relative gap above which a formula/reported ZT mismatch is flagged.
DISCREPANCY_THRESHOLD = 0.15


@dataclass(frozen=True)
class MaterialProps:
    """Transport constants of one thermoelectric film, SI units."""

    seebeck_coefficient: float  # V/K, sign encodes carrier type
    electrical_resistivity: float  # Ω·m
    thermal_conductivity: float  # W/(m·K)
    specific_contact_resistance: float = 0.0  # Ω·m²

    def __post_init__(self):
        if not math.isfinite(self.seebeck_coefficient):
            raise InvalidInputError("seebeck_coefficient must be finite")
        if not self.electrical_resistivity > 0:
            raise InvalidInputError(
                f"electrical_resistivity must be > 0, got {self.electrical_resistivity}"
            )
        if not self.thermal_conductivity > 0:
            raise InvalidInputError(
                f"thermal_conductivity must be > 0, got {self.thermal_conductivity}"
            )
        if self.specific_contact_resistance < 0:
            raise InvalidInputError(
                f"specific_contact_resistance must be >= 0, got {self.specific_contact_resistance}"
            )

    @classmethod
    def from_lab_units(
        cls,
        seebeck_uv_per_k: float,
        resistivity_mohm_cm: float,
        thermal_conductivity: float,
        contact_resistance_ohm_um2: float = 0.0,
    ) -> "MaterialProps":
        """Build from the units datasheets quote (μV/K, mΩ·cm, W/(m·K), Ω·μm²)."""
        return cls(
            seebeck_coefficient=seebeck_uv_per_k * MICROVOLT_PER_K,
            electrical_resistivity=resistivity_mohm_cm * MILLIOHM_CM,
            thermal_conductivity=thermal_conductivity,
            specific_contact_resistance=contact_resistance_ohm_um2 * OHM_SQUARE_MICROMETER,
        )


@dataclass(frozen=True)
class CoupleMaterials:
    """The p and n films of one thermocouple."""

    p: MaterialProps
    n: MaterialProps

    def __post_init__(self):
        if self.p.seebeck_coefficient == self.n.seebeck_coefficient:
            raise InvalidInputError(
                "p and n Seebeck coefficients are equal; the couple would produce no voltage"
            )

    @property
    def delta_seebeck(self) -> float:
        """S_p - S_n in V/K."""
        return self.p.seebeck_coefficient - self.n.seebeck_coefficient

    @property
    def mean_thermal_conductivity(self) -> float:
        return 0.5 * (self.p.thermal_conductivity + self.n.thermal_conductivity)


def builtin_poly_sige() -> CoupleMaterials:
    """Characterized p/n poly-SiGe films."""
    return CoupleMaterials(
        p=MaterialProps.from_lab_units(69.0, 1.05, 3.0, 86.0),
        n=MaterialProps.from_lab_units(-248.0, 5.87, 3.0, 40.0),
    )


def _check_temperature(temperature: float) -> None:
    if not temperature > 0:
        raise InvalidInputError(f"temperature must be > 0 K, got {temperature}")


def figure_of_merit(mat: MaterialProps, temperature: float) -> float:
    """Z·T = S²·T / (ρ·k)."""
    _check_temperature(temperature)
    return mat.seebeck_coefficient ** 2 * temperature / (
        mat.electrical_resistivity * mat.thermal_conductivity
    )


def couple_figure_of_merit(pair: CoupleMaterials, temperature: float) -> float:
    """Z_pn·T with Z_pn = (S_p - S_n)² / (√(ρ_p k_p) + √(ρ_n k_n))²."""
    _check_temperature(temperature)
    denominator = (
        math.sqrt(pair.p.electrical_resistivity * pair.p.thermal_conductivity)
        + math.sqrt(pair.n.electrical_resistivity * pair.n.thermal_conductivity)
    ) ** 2
    return pair.delta_seebeck ** 2 / denominator * temperature


def contact_resistance(mat: MaterialProps, contact_area: float) -> float:
    """Ohmic resistance of one contact of the given area (m²)."""
    if not contact_area > 0:
        raise InvalidInputError(f"contact_area must be > 0, got {contact_area}")
    return mat.specific_contact_resistance / contact_area


@dataclass
class ZTRow:
    """One line of the figure-of-merit report."""

    film: str
    temperature: float
    zt_formula: float
    zt_reported: Optional[float]
    discrepancy: Optional[float]  # relative, formula vs reported
    flagged: bool


def zt_report(pair: CoupleMaterials, temperature: float) -> List[ZTRow]:
    """Formula ZT per film and for the couple, next to the quoted values."""
    rows = []
    for film, mat in (("p", pair.p), ("n", pair.n)):
        zt = figure_of_merit(mat, temperature)
        reported = REPORTED_ZT.get(film)
        discrepancy = None
        flagged = False
        if reported is not None:
            discrepancy = (zt - reported) / reported
            flagged = abs(discrepancy) > DISCREPANCY_THRESHOLD
        rows.append(ZTRow(film, temperature, zt, reported, discrepancy, flagged))
    rows.append(
        ZTRow("couple", temperature, couple_figure_of_merit(pair, temperature), None, None, False)
    )
    return rows
