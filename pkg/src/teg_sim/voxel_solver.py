"""Voxelized steady-state heat conduction in one thermocouple unit cell.

The cell is rasterized on a regular grid of cubic voxels (index k = 0 at the hot side).
Boundary conditions:

- bottom face: uniform heat flux over the hot-junction footprint (``flux_mask``), the
  rest of the bottom face is adiabatic
- top face: fixed temperature (the cold plate)
- side faces: adiabatic (the cell repeats)

The discrete operator is the 7-point finite-volume stencil with harmonic-mean face
conductances. The system is symmetric positive definite and is solved with a
Jacobi-preconditioned conjugate-gradient iteration for θ = T - T_top.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from .couple_geometry import UnitCell
from .errors import InvalidInputError, ResourceLimitError, SolverConvergenceError
from .units import MICROMETER, to_um

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 2.0  # voxels per μm
DEFAULT_TOLERANCE = 1e-8
DEFAULT_ITERATION_FACTOR = 50
DEFAULT_MAX_VOXELS = 2_000_000
DEFAULT_SUBSTRATE_THICKNESS = 1.0 * MICROMETER
DEFAULT_SUBSTRATE_CONDUCTIVITY = 148.0  # W/(m·K), crystalline Si

RESIDUAL_SAMPLE_EVERY = 25


@dataclass
class VoxelGrid:
    """Discretized cell: per-voxel conductivity, flux inlet at the bottom, fixed-temperature top."""

    conductivity: np.ndarray  # (nx, ny, nz) W/(m·K)
    dx: float
    dy: float
    dz: float
    flux_mask: np.ndarray  # (nx, ny) bottom voxels receiving the heat flux
    substrate_layers: int = 0
    leg_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.conductivity.ndim != 3:
            raise InvalidInputError("conductivity must be a 3-D array")
        if not np.all(self.conductivity > 0):
            raise InvalidInputError("all voxel conductivities must be > 0")
        if self.flux_mask.shape != self.conductivity.shape[:2]:
            raise InvalidInputError("flux_mask must match the grid footprint")
        if not self.flux_mask.any():
            raise InvalidInputError("flux_mask selects no voxels")
        if min(self.dx, self.dy, self.dz) <= 0:
            raise InvalidInputError("voxel sizes must be > 0")

    @property
    def shape(self):
        return self.conductivity.shape

    @property
    def nx(self) -> int:
        return self.conductivity.shape[0]

    @property
    def ny(self) -> int:
        return self.conductivity.shape[1]

    @property
    def nz(self) -> int:
        return self.conductivity.shape[2]

    @property
    def n_voxels(self) -> int:
        return int(self.conductivity.size)

    @property
    def leg_voxel_count(self) -> int:
        return 0 if self.leg_mask is None else int(self.leg_mask.sum())

    @property
    def leg_volume_fraction(self) -> float:
        """Leg share of the thermocouple layer (substrate excluded)."""
        if self.leg_mask is None:
            return 0.0
        layer = self.leg_mask[:, :, self.substrate_layers:]
        return float(layer.sum()) / layer.size


@dataclass
class HeatSolution:
    temperature: np.ndarray  # K per voxel
    heat_flow: float  # injected Q, W
    mean_bottom_temperature: float  # over the flux footprint, at the face
    top_temperature: float
    iterations: int
    residual: float
    outflow: float  # heat leaving through the fixed-temperature face
    bottom_rise: float  # mean bottom-face temperature above the top face
    residual_history: List[float] = field(default_factory=list)

    @property
    def delta_t(self) -> float:
        return self.bottom_rise

    @property
    def resistance(self) -> float:
        return self.delta_t / self.heat_flow

    @property
    def energy_imbalance(self) -> float:
        """|flux in - flux out| / Q."""
        return abs(self.heat_flow - self.outflow) / self.heat_flow


def _round_half_up(value: float) -> int:
    # tolerance absorbs the μm <-> m round trip (3.5e-6 / 1e-6 != 3.5)
    return int(math.floor(value + 0.5 + 1e-9))


def _voxels(length_m: float, resolution: float, minimum: int = 0) -> int:
    """Round a physical length to a whole number of voxels, halves rounded up."""
    return max(minimum, _round_half_up(to_um(length_m) * resolution))


def voxelize(
    cell: UnitCell,
    resolution: float,
    k_leg: float,
    substrate_thickness: float = DEFAULT_SUBSTRATE_THICKNESS,
    substrate_conductivity: float = DEFAULT_SUBSTRATE_CONDUCTIVITY,
    max_voxels: int = DEFAULT_MAX_VOXELS,
) -> VoxelGrid:
    """Rasterize the straightened two-leg cell on a cubic grid (resolution in voxels/μm)."""
    if not resolution > 0:
        raise InvalidInputError(f"resolution must be > 0, got {resolution}")
    if not k_leg > 0:
        raise InvalidInputError(f"k_leg must be > 0, got {k_leg}")

    geom = cell.geometry
    nx = _voxels(cell.cell_pitch_x, resolution, 1)
    ny = _voxels(cell.cell_pitch_y, resolution, 1)
    n_sub = _voxels(substrate_thickness, resolution, 1) if substrate_thickness > 0 else 0
    n_end = _voxels(geom.end_segment_length, resolution, 1)
    n_mid = _voxels(geom.middle_path_length, resolution, 1)
    n_block = _voxels(cell.junction_block_height, resolution)
    nz = n_sub + 2 * n_end + n_mid + n_block

    count = nx * ny * nz
    if count > max_voxels:
        suggested = resolution * (max_voxels / count) ** (1.0 / 3.0)
        suggested = math.floor(suggested * 100) / 100
        raise ResourceLimitError(
            f"grid of {nx}x{ny}x{nz} = {count} voxels exceeds the budget of {max_voxels}; "
            f"try --resolution {suggested:g}",
            suggested_resolution=suggested,
        )

    a_vox = min(nx, _voxels(geom.end_width_a, resolution, 1))
    b_vox = min(a_vox, _voxels(geom.middle_width_b, resolution, 1))
    t_vox = _voxels(geom.film_thickness_t, resolution, 1)
    x0 = (nx - a_vox) // 2
    xb = x0 + (a_vox - b_vox) // 2

    # Legs centred in their half of the cell along y.
    y_offset_um = (to_um(cell.cell_pitch_y) / 2 - to_um(geom.film_thickness_t)) / 2
    y_starts = [
        _round_half_up(y_offset_um * resolution),
        _round_half_up((to_um(cell.cell_pitch_y) / 2 + y_offset_um) * resolution),
    ]
    y_starts = [min(max(0, y), ny - t_vox) for y in y_starts]

    leg_mask = np.zeros((nx, ny, nz), dtype=bool)
    flux_mask = np.zeros((nx, ny), dtype=bool)
    z_hot_end = n_sub + n_end
    z_mid_end = z_hot_end + n_mid
    for y0 in y_starts:
        ys = slice(y0, y0 + t_vox)
        leg_mask[x0:x0 + a_vox, ys, n_sub:z_hot_end] = True
        leg_mask[xb:xb + b_vox, ys, z_hot_end:z_mid_end] = True
        # cold end plus the junction block (pad merged in) up to the cold plate
        leg_mask[x0:x0 + a_vox, ys, z_mid_end:nz] = True
        flux_mask[x0:x0 + a_vox, ys] = True

    conductivity = np.full((nx, ny, nz), cell.fill_conductivity, dtype=float)
    conductivity[leg_mask] = k_leg
    if n_sub:
        conductivity[:, :, :n_sub] = substrate_conductivity

    spacing = MICROMETER / resolution
    logger.debug(
        "voxelized cell %dx%dx%d (substrate %d layers, a=%d b=%d t=%d voxels)",
        nx, ny, nz, n_sub, a_vox, b_vox, t_vox,
    )
    return VoxelGrid(
        conductivity=conductivity,
        dx=spacing,
        dy=spacing,
        dz=spacing,
        flux_mask=flux_mask,
        substrate_layers=n_sub,
        leg_mask=leg_mask,
    )


def harmonic_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 2.0 * a * b / (a + b)


def _top_conductance(grid: VoxelGrid) -> np.ndarray:
    """Voxel centre to fixed-temperature face, half a voxel away."""
    return grid.conductivity[:, :, -1] * grid.dx * grid.dy / (0.5 * grid.dz)


def assemble_operator(grid: VoxelGrid) -> sp.csr_matrix:
    """Conductance matrix G with G·θ = injected heat, θ relative to the top face."""
    k = grid.conductivity
    index = np.arange(k.size).reshape(k.shape)
    diagonal = np.zeros(k.size)
    rows, cols, vals = [], [], []

    face_factors = (
        grid.dy * grid.dz / grid.dx,
        grid.dx * grid.dz / grid.dy,
        grid.dx * grid.dy / grid.dz,
    )
    for axis, factor in enumerate(face_factors):
        if k.shape[axis] < 2:
            continue
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        g = (factor * harmonic_mean(k[tuple(lo)], k[tuple(hi)])).ravel()
        a = index[tuple(lo)].ravel()
        b = index[tuple(hi)].ravel()
        rows.extend((a, b))
        cols.extend((b, a))
        vals.extend((-g, -g))
        np.add.at(diagonal, a, g)
        np.add.at(diagonal, b, g)

    np.add.at(diagonal, index[:, :, -1].ravel(), _top_conductance(grid).ravel())

    if rows:
        off = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(k.size, k.size),
        )
        matrix = (off + sp.diags(diagonal)).tocsr()
    else:
        matrix = sp.diags(diagonal).tocsr()
    return matrix


def solve_steady_state(
    grid: VoxelGrid,
    heat_flow: float,
    top_temperature: float,
    tolerance: float = DEFAULT_TOLERANCE,
    iteration_factor: int = DEFAULT_ITERATION_FACTOR,
) -> HeatSolution:
    """Steady temperature field for a heat flow Q forced through the bottom footprint."""
    if not heat_flow > 0:
        raise InvalidInputError(f"heat flow must be > 0, got {heat_flow}")

    matrix = assemble_operator(grid)
    index = np.arange(grid.n_voxels).reshape(grid.shape)
    inlet = index[:, :, 0][grid.flux_mask]
    per_voxel = heat_flow / inlet.size
    rhs = np.zeros(grid.n_voxels)
    rhs[inlet] = per_voxel

    jacobi = sp.diags(1.0 / matrix.diagonal())
    max_iterations = iteration_factor * (grid.nx + grid.ny + grid.nz)
    rhs_norm = np.linalg.norm(rhs)
    history: List[float] = []
    counter = {"iterations": 0}

    def track(theta_k):
        counter["iterations"] += 1
        if counter["iterations"] % RESIDUAL_SAMPLE_EVERY == 0:
            history.append(float(np.linalg.norm(rhs - matrix @ theta_k) / rhs_norm))

    logger.info(
        "solving %dx%dx%d grid (%d unknowns, cap %d iterations)",
        grid.nx, grid.ny, grid.nz, grid.n_voxels, max_iterations,
    )
    theta, info = cg(matrix, rhs, rtol=tolerance, atol=0.0, maxiter=max_iterations, M=jacobi, callback=track)
    residual = float(np.linalg.norm(rhs - matrix @ theta) / rhs_norm)
    history.append(residual)
    if info != 0:
        raise SolverConvergenceError(
            f"conjugate gradient stopped after {counter['iterations']} iterations at relative "
            f"residual {residual:.3e} (target {tolerance:.1e})",
            residual_history=history,
            iterations=counter["iterations"],
        )

    theta = theta.reshape(grid.shape)
    k_bottom = grid.conductivity[:, :, 0][grid.flux_mask]
    # extrapolate from voxel centres to the bottom face through half a voxel
    face = theta[:, :, 0][grid.flux_mask] + per_voxel * (0.5 * grid.dz) / (k_bottom * grid.dx * grid.dy)
    outflow = float(np.sum(_top_conductance(grid) * theta[:, :, -1]))

    logger.info("converged in %d iterations, residual %.2e", counter["iterations"], residual)
    return HeatSolution(
        temperature=theta + top_temperature,
        heat_flow=heat_flow,
        mean_bottom_temperature=float(face.mean()) + top_temperature,
        top_temperature=top_temperature,
        iterations=counter["iterations"],
        residual=residual,
        outflow=outflow,
        bottom_rise=float(face.mean()),
        residual_history=history,
    )
