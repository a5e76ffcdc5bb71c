"""Thermal resistance of one thermocouple unit cell, and the width/height/mask sweeps.

Two backends:

- ``analytic``: the two legs as segmented 1-D columns in parallel with a fill column of the
  same height over the remaining footprint.
- ``numeric``: the voxelized cell solved by :mod:`teg_sim.voxel_solver`, R = ΔT/Q.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .couple_geometry import LEGS_PER_COUPLE, UnitCell, leg_segments
from .errors import InvalidInputError
from .sweep_runner import run_rows
from .units import to_um
from .voxel_solver import (
    DEFAULT_ITERATION_FACTOR,
    DEFAULT_MAX_VOXELS,
    DEFAULT_RESOLUTION,
    DEFAULT_SUBSTRATE_CONDUCTIVITY,
    DEFAULT_SUBSTRATE_THICKNESS,
    DEFAULT_TOLERANCE,
    solve_steady_state,
    voxelize,
)

logger = logging.getLogger(__name__)

BACKENDS = ("analytic", "numeric")

# Probe values for the numeric extraction; R does not depend on them.
PROBE_HEAT_FLOW = 1e-6  # W
PROBE_TOP_TEMPERATURE = 300.0  # K


@dataclass
class NumericSettings:
    """Discretization and solver knobs for the numeric backend."""

    resolution: float = DEFAULT_RESOLUTION  # voxels per μm
    tolerance: float = DEFAULT_TOLERANCE
    iteration_factor: int = DEFAULT_ITERATION_FACTOR
    max_voxels: int = DEFAULT_MAX_VOXELS
    substrate_thickness: float = DEFAULT_SUBSTRATE_THICKNESS
    substrate_conductivity: float = DEFAULT_SUBSTRATE_CONDUCTIVITY


@dataclass
class CellResistance:
    """Analytic breakdown. r_fill is inf when no fill area is left."""

    r_cell: float
    r_legs: float
    r_fill: float
    notes: List[str] = field(default_factory=list)


def single_leg_resistance(cell: UnitCell, k_leg: float) -> float:
    """Σ L/(k·w·t) over one leg, plus the cold-junction block if the plates sit further apart."""
    geom = cell.geometry
    total = sum(length / (k_leg * width * thickness) for length, width, thickness in leg_segments(geom))
    if cell.junction_block_height > 0:
        total += cell.junction_block_height / (k_leg * geom.end_width_a * geom.film_thickness_t)
    return total


def cell_resistance_breakdown(cell: UnitCell, k_leg: float) -> CellResistance:
    if not k_leg > 0:
        raise InvalidInputError(f"k_leg must be > 0, got {k_leg}")
    r_legs = single_leg_resistance(cell, k_leg) / LEGS_PER_COUPLE
    if cell.fill_area <= 0:
        note = "no fill area left beside the legs; fill path ignored"
        logger.info(note)
        return CellResistance(r_cell=r_legs, r_legs=r_legs, r_fill=math.inf, notes=[note])
    r_fill = cell.plate_separation / (cell.fill_conductivity * cell.fill_area)
    r_cell = 1.0 / (1.0 / r_legs + 1.0 / r_fill)
    return CellResistance(r_cell=r_cell, r_legs=r_legs, r_fill=r_fill)


def analytic_cell_resistance(cell: UnitCell, k_leg: float) -> float:
    """Legs in parallel with the fill column, K/W."""
    return cell_resistance_breakdown(cell, k_leg).r_cell


def cell_resistance_numeric(
    cell: UnitCell, k_leg: float, settings: Optional[NumericSettings] = None
) -> float:
    """(mean bottom temperature - top temperature) / Q from the voxel solve, K/W."""
    settings = settings or NumericSettings()
    grid = voxelize(
        cell,
        settings.resolution,
        k_leg,
        substrate_thickness=settings.substrate_thickness,
        substrate_conductivity=settings.substrate_conductivity,
        max_voxels=settings.max_voxels,
    )
    solution = solve_steady_state(
        grid,
        PROBE_HEAT_FLOW,
        PROBE_TOP_TEMPERATURE,
        tolerance=settings.tolerance,
        iteration_factor=settings.iteration_factor,
    )
    return solution.resistance


def cell_resistance(
    cell: UnitCell, k_leg: float, backend: str = "analytic", settings: Optional[NumericSettings] = None
) -> float:
    if backend == "analytic":
        return analytic_cell_resistance(cell, k_leg)
    if backend == "numeric":
        return cell_resistance_numeric(cell, k_leg, settings)
    raise InvalidInputError(f"unknown backend '{backend}', expected one of {', '.join(BACKENDS)}")


def _sweep(cell_for_value, values, k_leg, backend, settings, parallelism):
    def evaluate(value):
        return cell_resistance(cell_for_value(value), k_leg, backend, settings)

    return run_rows(evaluate, values, parallelism)


def _resistance_table(outcomes, columns) -> pd.DataFrame:
    records = []
    for outcome in outcomes:
        row = dict(zip(columns, outcome.item if isinstance(outcome.item, tuple) else (outcome.item,)))
        row["resistance_K_per_W"] = outcome.value if outcome.ok else float("nan")
        row["error"] = outcome.error or ""
        records.append(row)
    return pd.DataFrame.from_records(records, columns=[*columns, "resistance_K_per_W", "error"])


def sweep_width(
    cell: UnitCell,
    b_values: Sequence[float],
    k_leg: float,
    backend: str = "analytic",
    settings: Optional[NumericSettings] = None,
    parallelism: int = 1,
) -> pd.DataFrame:
    """R against middle width b (m), end width fixed."""
    outcomes = _sweep(
        lambda b: cell.with_geometry(middle_width_b=b), b_values, k_leg, backend, settings, parallelism
    )
    return _resistance_table(outcomes, ["middle_width_b_m"])


def sweep_height(
    cell: UnitCell,
    h_values: Sequence[float],
    k_leg: float,
    backend: str = "analytic",
    settings: Optional[NumericSettings] = None,
    parallelism: int = 1,
) -> pd.DataFrame:
    """R against step height h (m)."""
    outcomes = _sweep(
        lambda h: cell.with_geometry(step_height_h=h), h_values, k_leg, backend, settings, parallelism
    )
    return _resistance_table(outcomes, ["step_height_h_m"])


def sweep_mask_types(
    cell: UnitCell,
    catalog: Sequence[Tuple[float, float]],
    k_leg: float,
    step_height: float,
    backend: str = "analytic",
    settings: Optional[NumericSettings] = None,
    parallelism: int = 1,
) -> pd.DataFrame:
    """R for every (a, b) mask type at one step height."""
    outcomes = _sweep(
        lambda ab: cell.with_geometry(end_width_a=ab[0], middle_width_b=ab[1], step_height_h=step_height),
        [tuple(pair) for pair in catalog],
        k_leg,
        backend,
        settings,
        parallelism,
    )
    return _resistance_table(outcomes, ["end_width_a_m", "middle_width_b_m"])


def grid_refinement(
    cell: UnitCell,
    k_leg: float,
    resolutions: Sequence[float],
    settings: Optional[NumericSettings] = None,
) -> pd.DataFrame:
    """Numeric R at successively finer grids and the change from the previous level."""
    base = settings or NumericSettings()
    rows = []
    previous = None
    for resolution in resolutions:
        level = NumericSettings(**{**base.__dict__, "resolution": resolution})
        r = cell_resistance_numeric(cell, k_leg, level)
        delta = float("nan") if previous is None else r - previous
        logger.info("refinement %.3g voxels/um: R=%.6g K/W", resolution, r)
        rows.append({"resolution_per_um": resolution, "resistance_K_per_W": r, "delta_K_per_W": delta})
        previous = r
    return pd.DataFrame(rows, columns=["resolution_per_um", "resistance_K_per_W", "delta_K_per_W"])


@dataclass
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def linear_fit(x: Sequence[float], y: Sequence[float]) -> LinearFit:
    """Least-squares line and its coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2:
        raise InvalidInputError("a linear fit needs at least two points")
    slope, intercept = np.polyfit(x, y, 1)
    predicted = slope * x + intercept
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return LinearFit(float(slope), float(intercept), r_squared)


def describe_cell(cell: UnitCell) -> str:
    geom = cell.geometry
    return (
        f"a={to_um(geom.end_width_a):g} um, b={to_um(geom.middle_width_b):g} um, "
        f"h={to_um(geom.step_height_h):g} um, t={to_um(geom.film_thickness_t):g} um, "
        f"fill k={cell.fill_conductivity:g} W/(m K)"
    )
