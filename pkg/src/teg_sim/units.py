"""Exact conversion factors between the mixed lab units used in config files and SI.

Config files speak the units thin-film people quote (mΩ·cm, μV/K, Ω·μm², μm, cm², °C);
everything past the config layer is SI.
"""

MICROMETER = 1e-6  # m
SQUARE_MICROMETER = 1e-12  # m²
SQUARE_CENTIMETER = 1e-4  # m²

MILLIOHM_CM = 1e-5  # Ω·m per mΩ·cm
MICROVOLT_PER_K = 1e-6  # V/K per μV/K
OHM_SQUARE_MICROMETER = 1e-12  # Ω·m² per Ω·μm²
CM2_K_PER_W = 1e-4  # m²·K/W per cm²·K/W

ZERO_CELSIUS = 273.15  # K

STEFAN_BOLTZMANN = 5.670374419e-8  # W/(m²·K⁴)


def um(value: float) -> float:
    """Micrometres to metres."""
    return value * MICROMETER


def um2(value: float) -> float:
    return value * SQUARE_MICROMETER


def cm2(value: float) -> float:
    return value * SQUARE_CENTIMETER


def celsius_to_kelvin(value: float) -> float:
    return value + ZERO_CELSIUS


def kelvin_to_celsius(value: float) -> float:
    return value - ZERO_CELSIUS


def to_um(value_m: float) -> float:
    """Metres back to micrometres, for reports."""
    return value_m / MICROMETER


def to_cm2(value_m2: float) -> float:
    return value_m2 / SQUARE_CENTIMETER
