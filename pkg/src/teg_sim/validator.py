"""Invariant pre-checks for a merged configuration.

Every check returns a list of messages; each message names the dotted key and, when the
key came from a file, the file and line it was read from.
"""

import math
from dataclasses import dataclass
from numbers import Number
from typing import Any, Dict, Iterable, List, Optional

OPEN_SECTIONS = ("generator.types",)
NULLABLE_NUMBERS = ("cell.gap_height", "generator.contact_area", "scenario.device_area")
FILLS = ("air", "teos")
CONVECTION_MODES = ("natural", "forced")
HYPOTHESES = ("network", "constant_flow")
BACKENDS = ("analytic", "numeric")
FORMATS = ("csv", "plot")


@dataclass
class ValidationResult:
    """Result of config validation."""
    is_valid: bool
    errors: List[str]
    warnings: List[str] = None

    def __post_init__(self):
        if self.warnings is None:
            self.warnings = []


def flatten(data: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
    """Nested mapping to {"section.key": leaf}. Lists are leaves."""
    flat = {}
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else str(key)
        if isinstance(value, dict) and value:
            flat.update(flatten(value, path))
        else:
            flat[path] = value
    return flat


def get_path(data: Dict[str, Any], key: str) -> Any:
    node: Any = data
    for part in key.split("."):
        if not isinstance(node, dict) or part not in node:
            return None
        node = node[part]
    return node


def _is_number(value: Any) -> bool:
    return isinstance(value, Number) and not isinstance(value, bool) and math.isfinite(value)


class ConfigValidator:
    """Validates a merged config mapping against the known schema and the model invariants."""

    def __init__(self, template: Dict[str, Any], sources: Optional[Dict[str, str]] = None):
        self.template = flatten(template)
        self.sources = sources or {}

    def validate(self, data: Dict[str, Any]) -> ValidationResult:
        errors = []
        warnings = []

        errors.extend(self._validate_keys(data))
        errors.extend(self._validate_types(data))
        if errors:
            # value checks assume the shape is right
            return ValidationResult(is_valid=False, errors=errors, warnings=warnings)

        errors.extend(self._validate_materials(data))
        errors.extend(self._validate_geometry(data))
        errors.extend(self._validate_cell(data))
        errors.extend(self._validate_layout(data))
        errors.extend(self._validate_environment(data))
        errors.extend(self._validate_generator(data))
        errors.extend(self._validate_scenario(data))
        errors.extend(self._validate_sweeps(data))
        errors.extend(self._validate_solver(data))

        warnings.extend(self._generate_warnings(data))

        return ValidationResult(is_valid=len(errors) == 0, errors=errors, warnings=warnings)

    def _where(self, key: str) -> str:
        prefix = key
        while prefix:
            if prefix in self.sources:
                return self.sources[prefix]
            prefix = prefix.rpartition(".")[0]
        return ""

    def _msg(self, key: str, message: str) -> str:
        where = self._where(key)
        return f"{where}: {key}: {message}" if where else f"{key}: {message}"

    def _known(self, key: str) -> bool:
        if key in self.template:
            return True
        if any(key == s or key.startswith(s + ".") for s in OPEN_SECTIONS):
            return True
        # a leaf replaced by a mapping, or a mapping emptied
        return any(t.startswith(key + ".") for t in self.template)

    def _validate_keys(self, data: Dict[str, Any]) -> List[str]:
        errors = []
        for key in flatten(data):
            if not self._known(key):
                errors.append(self._msg(key, "unknown key"))
        return errors

    def _validate_types(self, data: Dict[str, Any]) -> List[str]:
        errors = []
        flat = flatten(data)
        for key, expected in self.template.items():
            if any(key.startswith(s + ".") for s in OPEN_SECTIONS):
                continue
            value = flat.get(key)
            if key in NULLABLE_NUMBERS:
                if value is not None and not _is_number(value):
                    errors.append(self._msg(key, f"expected a number or null, got {value!r}"))
            elif _is_number(expected) and not _is_number(value):
                errors.append(self._msg(key, f"expected a number, got {value!r}"))
            elif isinstance(expected, bool) and not isinstance(value, bool):
                errors.append(self._msg(key, f"expected true or false, got {value!r}"))
            elif isinstance(expected, str) and not isinstance(value, str):
                errors.append(self._msg(key, f"expected a string, got {value!r}"))
            elif isinstance(expected, list) and not isinstance(value, list):
                errors.append(self._msg(key, f"expected a list, got {value!r}"))
        types = get_path(data, "generator.types")
        if not isinstance(types, dict) or not types:
            errors.append(self._msg("generator.types", "expected a mapping of design types"))
        else:
            for name, type_spec in types.items():
                key = f"generator.types.{name}"
                if not isinstance(type_spec, dict) or set(type_spec) != {"n_couples", "rows"}:
                    errors.append(self._msg(key, "expected n_couples and rows"))
                    continue
                for field_name in ("n_couples", "rows"):
                    value = type_spec[field_name]
                    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                        errors.append(self._msg(f"{key}.{field_name}", f"expected an integer >= 1, got {value!r}"))
        return errors

    def _positive(self, data, keys: Iterable[str], strict: bool = True) -> List[str]:
        errors = []
        for key in keys:
            value = get_path(data, key)
            if value is None:
                continue
            if strict and not value > 0:
                errors.append(self._msg(key, f"must be > 0, got {value}"))
            elif not strict and value < 0:
                errors.append(self._msg(key, f"must be >= 0, got {value}"))
        return errors

    def _one_of(self, data, key: str, choices) -> List[str]:
        value = get_path(data, key)
        if value not in choices:
            return [self._msg(key, f"must be one of {', '.join(choices)}, got {value!r}")]
        return []

    def _validate_materials(self, data) -> List[str]:
        errors = []
        for film in ("p", "n"):
            base = f"materials.{film}"
            errors.extend(
                self._positive(data, [f"{base}.resistivity_mohm_cm", f"{base}.thermal_conductivity"])
            )
            errors.extend(self._positive(data, [f"{base}.contact_resistance_ohm_um2"], strict=False))
        if get_path(data, "materials.p.seebeck_uv_per_k") == get_path(data, "materials.n.seebeck_uv_per_k"):
            errors.append(
                self._msg("materials.n.seebeck_uv_per_k", "p and n Seebeck coefficients must differ")
            )
        if get_path(data, "materials.reference_temperature") <= -273.15:
            errors.append(self._msg("materials.reference_temperature", "must be above absolute zero"))
        return errors

    def _validate_geometry(self, data) -> List[str]:
        g = lambda k: get_path(data, f"geometry.{k}")  # noqa: E731
        errors = self._positive(
            data,
            [
                "geometry.middle_width_b",
                "geometry.film_thickness_t",
                "geometry.end_segment_length",
                "geometry.middle_segment_length",
            ],
        )
        errors.extend(self._positive(data, ["geometry.step_height_h", "geometry.step_path_factor_gamma"], strict=False))
        if g("end_width_a") < g("middle_width_b"):
            errors.append(
                self._msg(
                    "geometry.middle_width_b",
                    f"violates end_width_a >= middle_width_b (a={g('end_width_a')}, b={g('middle_width_b')})",
                )
            )
        return errors

    def _validate_cell(self, data) -> List[str]:
        errors = self._one_of(data, "cell.fill", FILLS)
        errors.extend(self._positive(data, ["cell.pitch_x", "cell.pitch_y"]))
        errors.extend(self._positive(data, [f"cell.fill_conductivity.{f}" for f in FILLS]))
        a = get_path(data, "geometry.end_width_a")
        t = get_path(data, "geometry.film_thickness_t")
        if get_path(data, "cell.pitch_x") < a:
            errors.append(self._msg("cell.pitch_x", f"must hold the end width a={a}"))
        if get_path(data, "cell.pitch_y") < 2 * t:
            errors.append(self._msg("cell.pitch_y", f"must hold two legs of thickness t={t}"))
        gap = get_path(data, "cell.gap_height")
        if gap is not None:
            geom = data["geometry"]
            path = (
                2 * geom["end_segment_length"]
                + geom["middle_segment_length"]
                + geom["step_path_factor_gamma"] * geom["step_height_h"]
            )
            if gap < geom["step_height_h"]:
                errors.append(self._msg("cell.gap_height", "violates gap_height >= step_height_h"))
            elif gap < path:
                errors.append(self._msg("cell.gap_height", f"shorter than the leg path length {path:g}"))
        return errors

    def _validate_layout(self, data) -> List[str]:
        errors = self._positive(
            data, ["layout.die_side", "layout.rim_band_width", "layout.couple_pitch", "layout.etch_depth"]
        )
        layout = data["layout"]
        if 2 * layout["rim_band_width"] >= layout["die_side"]:
            errors.append(self._msg("layout.rim_band_width", "leaves no etched area inside the rim"))
        if not isinstance(layout["rows"], int) or layout["rows"] < 1:
            errors.append(self._msg("layout.rows", "must be an integer >= 1"))
        design_type = get_path(data, "generator.design_type")
        type_spec = get_path(data, f"generator.types.{design_type}")
        if isinstance(type_spec, dict) and not errors:
            rows = max(layout["rows"], type_spec["rows"])
            capacity = 4 * (layout["die_side"] - layout["rim_band_width"]) * rows
            required = type_spec["n_couples"] * layout["couple_pitch"]
            if required > capacity:
                errors.append(
                    self._msg(
                        "layout.rows",
                        f"rim holds {capacity / 1e4:.2f} cm of couples on {rows} row(s), "
                        f"type {design_type} needs {required / 1e4:.2f} cm",
                    )
                )
        return errors

    def _validate_environment(self, data) -> List[str]:
        errors = self._one_of(data, "environment.convection", CONVECTION_MODES)
        errors.extend(
            self._positive(
                data,
                [
                    "environment.body_contact_area",
                    "environment.radiator_area",
                    "environment.h_natural",
                    "environment.h_forced",
                ],
            )
        )
        errors.extend(
            self._positive(
                data,
                [
                    "environment.body_specific_resistance",
                    "environment.hot_plate_resistance",
                    "environment.cold_plate_resistance",
                ],
                strict=False,
            )
        )
        emissivity = get_path(data, "environment.radiation.emissivity")
        if not 0 < emissivity <= 1:
            errors.append(self._msg("environment.radiation.emissivity", "must be in (0, 1]"))
        return errors

    def _validate_generator(self, data) -> List[str]:
        errors = []
        types = get_path(data, "generator.types")
        if get_path(data, "generator.design_type") not in types:
            errors.append(
                self._msg("generator.design_type", f"must be one of {', '.join(map(str, types))}")
            )
        errors.extend(self._one_of(data, "generator.hypothesis", HYPOTHESES))
        errors.extend(self._one_of(data, "generator.optimize.hypothesis", HYPOTHESES))
        errors.extend(
            self._positive(
                data, ["generator.device_area", "generator.contact_area", "generator.chip_stack_thickness"]
            )
        )
        errors.extend(self._positive(data, ["generator.interconnect_resistance"], strict=False))
        n_min = get_path(data, "generator.optimize.n_min")
        n_max = get_path(data, "generator.optimize.n_max")
        if not isinstance(n_min, int) or n_min < 1:
            errors.append(self._msg("generator.optimize.n_min", "must be an integer >= 1"))
        elif not isinstance(n_max, int) or n_max < n_min:
            errors.append(self._msg("generator.optimize.n_max", "must be an integer >= n_min"))
        return errors

    def _validate_scenario(self, data) -> List[str]:
        errors = self._positive(data, ["scenario.radiator_area", "scenario.device_area"])
        errors.extend(self._positive(data, ["scenario.chuck_contact_resistance"], strict=False))
        curve = get_path(data, "scenario.curve_delta_t")
        if not curve or not all(_is_number(v) for v in curve):
            errors.append(self._msg("scenario.curve_delta_t", "must be a non-empty list of numbers"))
        return errors

    def _number_list(self, data, key: str, minimum_exclusive: Optional[float] = 0.0) -> List[str]:
        values = get_path(data, key)
        if not values or not all(_is_number(v) for v in values):
            return [self._msg(key, "must be a non-empty list of numbers")]
        if minimum_exclusive is not None and any(v <= minimum_exclusive for v in values):
            return [self._msg(key, f"values must be > {minimum_exclusive:g}")]
        return []

    def _validate_sweeps(self, data) -> List[str]:
        errors = self._number_list(data, "sweeps.width_values")
        errors.extend(self._number_list(data, "sweeps.height_values", minimum_exclusive=None))
        errors.extend(self._number_list(data, "sweeps.refinement_resolutions"))
        errors.extend(self._positive(data, ["sweeps.mask_step_height"], strict=False))
        catalog = get_path(data, "sweeps.mask_catalog")
        if not catalog:
            errors.append(self._msg("sweeps.mask_catalog", "must list at least one [a, b] pair"))
        else:
            for i, pair in enumerate(catalog):
                if not isinstance(pair, list) or len(pair) != 2 or not all(_is_number(v) for v in pair):
                    errors.append(self._msg("sweeps.mask_catalog", f"entry {i} must be [a, b]"))
        return errors

    def _validate_solver(self, data) -> List[str]:
        errors = self._one_of(data, "solver.backend", BACKENDS)
        errors.extend(
            self._positive(
                data,
                ["solver.resolution", "solver.tolerance", "solver.substrate_conductivity", "solver.max_voxels"],
            )
        )
        errors.extend(self._positive(data, ["solver.substrate_thickness"], strict=False))
        if get_path(data, "solver.tolerance") >= 1:
            errors.append(self._msg("solver.tolerance", "must be < 1"))
        for key in ("solver.parallelism", "solver.iteration_factor"):
            value = get_path(data, key)
            if not isinstance(value, int) or value < 1:
                errors.append(self._msg(key, "must be an integer >= 1"))
        errors.extend(self._one_of(data, "output.format", FORMATS))
        return errors

    def _generate_warnings(self, data) -> List[str]:
        warnings = []
        env = data["environment"]
        if env["body_temperature"] < env["ambient_temperature"]:
            warnings.append("environment: body colder than ambient, heat flows in reverse")
        scenario = data["scenario"]
        if scenario["chuck_temperature"] <= scenario["ambient_temperature"]:
            warnings.append("scenario: chuck not above ambient, densities will be zero or negative")
        if data["solver"]["backend"] == "numeric" and data["solver"]["resolution"] < 1:
            warnings.append("solver: resolution below 1 voxel/um rounds sub-micrometre features")
        return warnings
