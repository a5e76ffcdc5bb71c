"""YAML configuration: merge, validate, and build the SI domain objects.

Precedence, last wins: built-in defaults, the shipped reference design, the user file,
then ``--set section.key=value`` overrides.
"""

import copy
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import yaml

from .couple_geometry import RimLayout, ThermocoupleGeometry, UnitCell
from .errors import ConfigError, ValidationError
from .generator import ChuckSetup, GeneratorDesign
from .leg_thermal import NumericSettings
from .materials import CoupleMaterials, MaterialProps
from .thermal_network import Environment
from .units import CM2_K_PER_W, celsius_to_kelvin, cm2, um, um2
from .validator import ConfigValidator

logger = logging.getLogger(__name__)

REFERENCE_CONFIG_PATH = Path(__file__).parent / "data" / "reference.yaml"

BUILTIN_DEFAULTS: Dict[str, Any] = {
    "solver": {
        "backend": "analytic",
        "resolution": 2.0,  # voxels per um
        "tolerance": 1e-8,
        "iteration_factor": 50,
        "max_voxels": 2000000,
        "substrate_thickness": 1.0,  # um
        "substrate_conductivity": 148.0,
        "parallelism": 1,
    },
    "output": {
        "directory": "results",
        "format": "csv",
        "timestamp": True,
    },
}

GEOMETRY_LENGTHS = (
    "end_width_a",
    "middle_width_b",
    "step_height_h",
    "film_thickness_t",
    "end_segment_length",
    "middle_segment_length",
)


def deep_merge(base: Dict[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _line_index(root: Optional[yaml.Node], label: str) -> Dict[str, str]:
    """Dotted key -> "file:line" for every mapping key in the document."""
    index: Dict[str, str] = {}

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                path = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
                index[path] = f"{label}:{key_node.start_mark.line + 1}"
                walk(value_node, path)

    if root is not None:
        walk(root, "")
    return index


def read_yaml(path: Union[str, Path]) -> Tuple[Dict[str, Any], Dict[str, str]]:
    """Parse one config file; returns the mapping and its key -> line index."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark is not None else str(path)
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"{where}: {problem}") from e
    if data is None:
        return {}, {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping of sections")
    return data, _line_index(root, str(path))


def parse_override(text: str) -> Tuple[str, Any]:
    """``section.key=value``; the value is read as a YAML scalar or flow sequence."""
    key, sep, raw = text.partition("=")
    key = key.strip()
    if not sep or not key or any(not part for part in key.split(".")):
        raise ConfigError(f"--set expects section.key=value, got '{text}'")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigError(f"--set {key}: cannot parse value '{raw}'") from e
    return key, value


def set_path(data: Dict[str, Any], key: str, value: Any) -> None:
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"--set {key}: '{part}' is not a section")
        node = child
    node[parts[-1]] = value


def base_config() -> Tuple[Dict[str, Any], Dict[str, str]]:
    """Built-in defaults merged with the shipped reference design."""
    reference, lines = read_yaml(REFERENCE_CONFIG_PATH)
    return deep_merge(BUILTIN_DEFAULTS, reference), lines


@dataclass
class ResolvedConfig:
    """Merged, validated configuration. File units in ``data``; builders return SI objects."""

    data: Dict[str, Any]
    sources: Dict[str, str] = field(default_factory=dict, compare=False)
    warnings: List[str] = field(default_factory=list, compare=False)

    def get(self, key: str) -> Any:
        node: Any = self.data
        for part in key.split("."):
            node = node[part]
        return node

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.data, sort_keys=True, default_flow_style=False, allow_unicode=True)

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form."""
        return hashlib.sha256(self.to_json().encode("utf-8")).hexdigest()

    # -- materials -----------------------------------------------------------

    def materials(self) -> CoupleMaterials:
        block = self.data["materials"]
        return CoupleMaterials(
            p=MaterialProps.from_lab_units(**block["p"]),
            n=MaterialProps.from_lab_units(**block["n"]),
        )

    @property
    def reference_temperature(self) -> float:
        return celsius_to_kelvin(self.data["materials"]["reference_temperature"])

    # -- geometry ------------------------------------------------------------

    def geometry(self) -> ThermocoupleGeometry:
        block = self.data["geometry"]
        return ThermocoupleGeometry(
            **{name: um(block[name]) for name in GEOMETRY_LENGTHS},
            step_path_factor_gamma=block["step_path_factor_gamma"],
        )

    def fill_conductivity(self, fill: Optional[str] = None) -> float:
        block = self.data["cell"]
        return block["fill_conductivity"][fill or block["fill"]]

    def unit_cell(self, fill: Optional[str] = None) -> UnitCell:
        block = self.data["cell"]
        gap = block["gap_height"]
        return UnitCell(
            geometry=self.geometry(),
            cell_pitch_x=um(block["pitch_x"]),
            cell_pitch_y=um(block["pitch_y"]),
            fill_conductivity=self.fill_conductivity(fill),
            gap_height=None if gap is None else um(gap),
        )

    @property
    def k_leg(self) -> float:
        return self.materials().mean_thermal_conductivity

    def design_types(self) -> Dict[str, Tuple[int, int]]:
        types = self.data["generator"]["types"]
        return {name: (entry["n_couples"], entry["rows"]) for name, entry in types.items()}

    @property
    def design_type(self) -> str:
        return self.data["generator"]["design_type"]

    def layout(self, design_type: Optional[str] = None) -> RimLayout:
        block = self.data["layout"]
        n_couples, rows = self.design_types()[design_type or self.design_type]
        return RimLayout(
            n_couples=n_couples,
            couple_pitch=um(block["couple_pitch"]),
            rim_band_width=um(block["rim_band_width"]),
            die_side=um(block["die_side"]),
            etch_depth=um(block["etch_depth"]),
            rows=max(rows, block["rows"]),
        )

    # -- environment and generator ---------------------------------------------

    def environment(self) -> Environment:
        block = self.data["environment"]
        return Environment(
            t_body=celsius_to_kelvin(block["body_temperature"]),
            t_ambient=celsius_to_kelvin(block["ambient_temperature"]),
            body_specific_resistance=block["body_specific_resistance"] * CM2_K_PER_W,
            body_contact_area=cm2(block["body_contact_area"]),
            radiator_area=cm2(block["radiator_area"]),
            h_natural=block["h_natural"],
            h_forced=block["h_forced"],
            convection=block["convection"],
            r_hot_plate=block["hot_plate_resistance"],
            r_cold_plate=block["cold_plate_resistance"],
            radiation_enabled=block["radiation"]["enabled"],
            emissivity=block["radiation"]["emissivity"],
        )

    def design(self, design_type: Optional[str] = None) -> GeneratorDesign:
        block = self.data["generator"]
        design_type = design_type or self.design_type
        layout = self.layout(design_type)
        contact = block["contact_area"]
        return GeneratorDesign(
            n_couples=layout.n_couples,
            geometry=self.geometry(),
            materials=self.materials(),
            cell=self.unit_cell(),
            layout=layout,
            contact_area_per_junction=None if contact is None else um2(contact),
            interconnect_resistance_per_couple=block["interconnect_resistance"],
            gap_conductivity=self.fill_conductivity("air"),
            device_area=cm2(block["device_area"]),
            design_type=design_type,
        )

    @property
    def hypothesis(self) -> str:
        return self.data["generator"]["hypothesis"]

    @property
    def chip_stack_thickness(self) -> float:
        return um(self.data["generator"]["chip_stack_thickness"])

    def optimize_range(self) -> range:
        block = self.data["generator"]["optimize"]
        return range(block["n_min"], block["n_max"] + 1)

    @property
    def optimize_hypothesis(self) -> str:
        return self.data["generator"]["optimize"]["hypothesis"]

    def chuck_setup(self) -> ChuckSetup:
        block = self.data["scenario"]
        env = self.data["environment"]
        device_area = block["device_area"]
        return ChuckSetup(
            t_chuck=celsius_to_kelvin(block["chuck_temperature"]),
            t_ambient=celsius_to_kelvin(block["ambient_temperature"]),
            radiator_area=cm2(block["radiator_area"]),
            chuck_contact_resistance=block["chuck_contact_resistance"],
            h_natural=env["h_natural"],
            h_forced=env["h_forced"],
            teos_conductivity=self.fill_conductivity("teos"),
            air_conductivity=self.fill_conductivity("air"),
            device_area=None if device_area is None else cm2(device_area),
        )

    def scenario_flags(self) -> Dict[str, bool]:
        block = self.data["scenario"]
        return {name: block[name] for name in ("rim", "forced_convection", "released")}

    def chuck_curve_delta_t(self) -> List[float]:
        return list(self.data["scenario"]["curve_delta_t"])

    # -- sweeps and solver -----------------------------------------------------

    def width_values(self) -> List[float]:
        return [um(v) for v in self.data["sweeps"]["width_values"]]

    def height_values(self) -> List[float]:
        return [um(v) for v in self.data["sweeps"]["height_values"]]

    def mask_catalog(self) -> List[Tuple[float, float]]:
        return [(um(a), um(b)) for a, b in self.data["sweeps"]["mask_catalog"]]

    @property
    def mask_step_height(self) -> float:
        return um(self.data["sweeps"]["mask_step_height"])

    def design_catalog(self) -> List[Tuple[float, float, str]]:
        """Every mask type in every design type."""
        return [(a, b, name) for a, b in self.mask_catalog() for name in self.design_types()]

    def refinement_resolutions(self) -> List[float]:
        return list(self.data["sweeps"]["refinement_resolutions"])

    def numeric_settings(self) -> NumericSettings:
        block = self.data["solver"]
        return NumericSettings(
            resolution=block["resolution"],
            tolerance=block["tolerance"],
            iteration_factor=block["iteration_factor"],
            max_voxels=block["max_voxels"],
            substrate_thickness=um(block["substrate_thickness"]),
            substrate_conductivity=block["substrate_conductivity"],
        )

    @property
    def backend(self) -> str:
        return self.data["solver"]["backend"]

    @property
    def parallelism(self) -> int:
        return self.data["solver"]["parallelism"]

    # -- output ----------------------------------------------------------------

    @property
    def output_directory(self) -> Path:
        return Path(self.data["output"]["directory"])

    @property
    def output_format(self) -> str:
        return self.data["output"]["format"]

    @property
    def timestamp(self) -> bool:
        return self.data["output"]["timestamp"]


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Sequence[str] = (),
    settings: Optional[Mapping[str, Any]] = None,
) -> ResolvedConfig:
    """Merge defaults, reference, ``path`` and overrides, then validate.

    ``overrides`` are raw ``key=value`` strings; ``settings`` are already-typed values
    keyed by dotted path (command-line flags).
    """
    template, sources = base_config()
    data = copy.deepcopy(template)
    if path is not None:
        user, user_lines = read_yaml(path)
        data = deep_merge(data, user)
        sources.update(user_lines)
        logger.info("loaded config %s (%d keys)", path, len(user_lines))

    for text in overrides:
        key, value = parse_override(text)
        set_path(data, key, value)
        sources[key] = "--set"
    for key, value in (settings or {}).items():
        set_path(data, key, value)
        sources[key] = "command line"

    result = ConfigValidator(template, sources).validate(data)
    if not result.is_valid:
        raise ValidationError(result.errors)
    for warning in result.warnings:
        logger.warning(warning)
    return ResolvedConfig(data=data, sources=sources, warnings=result.warnings)
