"""Stepped thermocouple legs, the unit cell they sit in, and the rim-shaped array layout.

Each leg is a thin film of thickness t with a wide end block (width a, length L_end) at
both junctions and a narrow middle section (width b). The middle section climbs a step of
height h; the conformal film is lengthened by γ·h.

Thermally the cell is treated as two legs standing between the hot and the cold plate,
each leg a column whose cross-section is (segment width) × t, surrounded by the fill
(air or unreleased TEOS). When the plate separation exceeds the leg path length, the
remainder is a cold-junction block of width a.
"""

from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

from .errors import GeometryError
from .units import to_um

Segment = Tuple[float, float, float]  # (length, width, thickness), m

LEGS_PER_COUPLE = 2


@dataclass(frozen=True)
class ThermocoupleGeometry:
    """Geometry of one leg; both legs of a couple share it. SI units."""

    end_width_a: float
    middle_width_b: float
    step_height_h: float
    film_thickness_t: float
    end_segment_length: float
    middle_segment_length: float
    step_path_factor_gamma: float = 2.0

    def __post_init__(self):
        if not self.middle_width_b > 0:
            raise GeometryError(f"middle_width_b must be > 0, got {self.middle_width_b}")
        if self.end_width_a < self.middle_width_b:
            raise GeometryError(
                "end_width_a >= middle_width_b violated "
                f"(a={to_um(self.end_width_a):g} um, b={to_um(self.middle_width_b):g} um)"
            )
        if not self.film_thickness_t > 0:
            raise GeometryError(f"film_thickness_t must be > 0, got {self.film_thickness_t}")
        if self.step_height_h < 0:
            raise GeometryError(f"step_height_h must be >= 0, got {self.step_height_h}")
        if not self.end_segment_length > 0 or not self.middle_segment_length > 0:
            raise GeometryError("segment lengths must be > 0")
        if self.step_path_factor_gamma < 0:
            raise GeometryError("step_path_factor_gamma must be >= 0")

    @property
    def middle_path_length(self) -> float:
        return self.middle_segment_length + self.step_path_factor_gamma * self.step_height_h

    @property
    def leg_path_length(self) -> float:
        return 2 * self.end_segment_length + self.middle_path_length

    def with_changes(self, **changes) -> "ThermocoupleGeometry":
        return replace(self, **changes)


def leg_segments(geom: ThermocoupleGeometry) -> List[Segment]:
    """Segments of one leg from hot to cold junction: end, middle (step included), end."""
    end = (geom.end_segment_length, geom.end_width_a, geom.film_thickness_t)
    middle = (geom.middle_path_length, geom.middle_width_b, geom.film_thickness_t)
    return [end, middle, end]


@dataclass(frozen=True)
class UnitCell:
    """Repeating region holding one couple and its share of the fill."""

    geometry: ThermocoupleGeometry
    cell_pitch_x: float
    cell_pitch_y: float
    fill_conductivity: float
    gap_height: Optional[float] = None  # None: plates touch both junction ends

    def __post_init__(self):
        geom = self.geometry
        if not self.fill_conductivity > 0:
            raise GeometryError(f"fill_conductivity must be > 0, got {self.fill_conductivity}")
        if geom.end_width_a > self.cell_pitch_x:
            raise GeometryError(
                f"cell_pitch_x ({to_um(self.cell_pitch_x):g} um) cannot hold end width "
                f"a={to_um(geom.end_width_a):g} um"
            )
        if LEGS_PER_COUPLE * geom.film_thickness_t > self.cell_pitch_y:
            raise GeometryError(
                f"cell_pitch_y ({to_um(self.cell_pitch_y):g} um) cannot hold two legs of "
                f"thickness {to_um(geom.film_thickness_t):g} um"
            )
        if self.gap_height is not None:
            if self.gap_height < geom.step_height_h:
                raise GeometryError("gap_height >= step_height_h violated")
            if self.gap_height < geom.leg_path_length:
                raise GeometryError(
                    f"gap_height ({to_um(self.gap_height):g} um) shorter than the leg path "
                    f"({to_um(geom.leg_path_length):g} um)"
                )

    @property
    def plate_separation(self) -> float:
        if self.gap_height is None:
            return self.geometry.leg_path_length
        return self.gap_height

    @property
    def junction_block_height(self) -> float:
        """Cold-junction block filling any separation beyond the leg path."""
        return self.plate_separation - self.geometry.leg_path_length

    @property
    def footprint(self) -> float:
        return self.cell_pitch_x * self.cell_pitch_y

    @property
    def leg_footprint(self) -> float:
        geom = self.geometry
        return LEGS_PER_COUPLE * geom.end_width_a * geom.film_thickness_t

    @property
    def fill_area(self) -> float:
        return self.footprint - self.leg_footprint

    def with_geometry(self, **changes) -> "UnitCell":
        return replace(self, geometry=self.geometry.with_changes(**changes))

    def with_changes(self, **changes) -> "UnitCell":
        return replace(self, **changes)


@dataclass(frozen=True)
class RimLayout:
    """Couples placed along the perimeter of a deep-etched die."""

    n_couples: int
    couple_pitch: float
    rim_band_width: float
    die_side: float
    etch_depth: float
    rows: int = 1

    def __post_init__(self):
        if self.n_couples < 0:
            raise GeometryError("n_couples must be >= 0")
        if not self.couple_pitch > 0:
            raise GeometryError("couple_pitch must be > 0")
        if not self.etch_depth > 0:
            raise GeometryError("etch_depth must be > 0")
        if not self.rim_band_width > 0 or 2 * self.rim_band_width >= self.die_side:
            raise GeometryError("rim_band_width must be > 0 and leave an etched centre")
        if self.rows < 1:
            raise GeometryError("rows must be >= 1")

    @property
    def rim_length(self) -> float:
        """Centre-line perimeter of the rim band."""
        return 4 * (self.die_side - self.rim_band_width)

    @property
    def rim_band_area(self) -> float:
        return self.rim_length * self.rim_band_width

    @property
    def etched_area(self) -> float:
        """Die area outside the rim band, where the air path is etch_depth long."""
        return self.die_side ** 2 - self.rim_band_area

    @property
    def die_area(self) -> float:
        return self.die_side ** 2

    def with_couples(self, n_couples: int, rows: Optional[int] = None) -> "RimLayout":
        return replace(self, n_couples=n_couples, rows=self.rows if rows is None else rows)


@dataclass
class RimCheck:
    """Outcome of the rim capacity check. deficit is 0 when ok."""

    ok: bool
    capacity: float  # m of rim available (all rows)
    required: float  # m of rim needed
    deficit: float

    def describe(self) -> str:
        if self.ok:
            return (
                f"rim holds the array ({self.required * 100:.2f} cm needed, "
                f"{self.capacity * 100:.2f} cm available)"
            )
        return (
            f"rim too short by {self.deficit * 100:.2f} cm ({self.required * 100:.2f} cm needed, "
            f"{self.capacity * 100:.2f} cm available); increase layout.rows"
        )


def validate_rim(layout: RimLayout) -> RimCheck:
    """Single row of couples per band edge, `rows` bands stacked inward."""
    capacity = layout.rim_length * layout.rows
    required = layout.n_couples * layout.couple_pitch
    deficit = max(0.0, required - capacity)
    return RimCheck(ok=deficit == 0.0, capacity=capacity, required=required, deficit=deficit)
