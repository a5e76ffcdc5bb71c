"""teg-sim - design and simulation toolkit for body-worn micromachined thermoelectric generators."""

__version__ = "0.1.0"
__author__ = "teg-sim Team"

from .materials import CoupleMaterials, MaterialProps, builtin_poly_sige
from .couple_geometry import RimLayout, ThermocoupleGeometry, UnitCell
from .thermal_network import ThermalCircuit, NetworkSolution, solve_network
from .generator import GeneratorDesign, GeneratorReport, simulate
from .config import ResolvedConfig, load_config

__all__ = [
    "CoupleMaterials",
    "MaterialProps",
    "builtin_poly_sige",
    "RimLayout",
    "ThermocoupleGeometry",
    "UnitCell",
    "ThermalCircuit",
    "NetworkSolution",
    "solve_network",
    "GeneratorDesign",
    "GeneratorReport",
    "simulate",
    "ResolvedConfig",
    "load_config",
]
