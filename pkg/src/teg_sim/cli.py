"""Command-line interface for teg-sim.

Exit codes: 0 ok, 1 unexpected error, 2 config error (and click usage errors),
3 solver non-convergence, 4 validation error, 5 resource limit.
"""

import functools
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import click
import pandas as pd

from . import __version__
from .config import ResolvedConfig, load_config
from .couple_geometry import validate_rim
from .errors import ResourceLimitError, SolverConvergenceError, TegSimError, ValidationError
from .generator import (
    HYPOTHESES,
    ChuckResult,
    chuck_matrix,
    chuck_scenario,
    chuck_voltage_curve,
    compare_arrangements,
    density_ratio,
    optimize_couples,
    simulate,
    sweep_designs,
    watch_gap_resistance,
)
from .leg_thermal import (
    BACKENDS,
    cell_resistance,
    cell_resistance_breakdown,
    describe_cell,
    grid_refinement,
    linear_fit,
    sweep_height,
    sweep_mask_types,
    sweep_width,
)
from .materials import zt_report
from .report_writer import ReportWriter
from .thermal_network import NODE_NAMES, solve_network
from .units import kelvin_to_celsius, to_um

logger = logging.getLogger(__name__)


@dataclass
class CliState:
    config_path: Optional[Path]
    overrides: Tuple[str, ...]
    settings: Dict[str, Any] = field(default_factory=dict)

    def load(self) -> ResolvedConfig:
        return load_config(self.config_path, self.overrides, self.settings)


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def handle_errors(func):
    """Map toolkit errors to their exit codes with a one-line diagnostic."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValidationError as e:
            click.echo("❌ Validation failed:", err=True)
            for error in e.errors:
                click.echo(f"  • {error}", err=True)
            sys.exit(e.exit_code)
        except ResourceLimitError as e:
            click.echo(f"❌ Resource limit: {e}", err=True)
            sys.exit(e.exit_code)
        except SolverConvergenceError as e:
            click.echo(f"❌ Solver did not converge: {e}", err=True)
            if e.residual_history:
                tail = ", ".join(f"{r:.2e}" for r in e.residual_history[-5:])
                click.echo(f"  residual history (last samples): {tail}", err=True)
            sys.exit(e.exit_code)
        except TegSimError as e:
            click.echo(f"❌ {e}", err=True)
            sys.exit(e.exit_code)
        except Exception as e:
            logger.debug("unexpected error", exc_info=True)
            click.echo(f"❌ Unexpected error: {e}", err=True)
            sys.exit(1)

    return wrapper


def _emit(config: ResolvedConfig, command: str, table: pd.DataFrame, plot_columns: Tuple[str, str]) -> Path:
    path = ReportWriter(config, command).write(command.replace(" ", "-"), table, plot_columns)
    click.echo(f"✓ Wrote {path}")
    return path


def _backend_option(func):
    return click.option(
        "--backend",
        type=click.Choice(BACKENDS),
        default=None,
        help="Cell resistance backend (default: solver.backend)",
    )(func)


def _fmt(value: float, digits: int = 4) -> str:
    return f"{value:.{digits}g}"


@click.group()
@click.version_option(version=__version__)
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    envvar="TEG_SIM_CONFIG",
    help="YAML config merged over the reference design (env: TEG_SIM_CONFIG)",
)
@click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE", help="Override one config key")
@click.option("--out", type=click.Path(path_type=Path), help="Output directory")
@click.option("--format", "fmt", type=click.Choice(["csv", "plot"]), help="Output file format")
@click.option("--resolution", type=float, help="Voxels per micrometre for the numeric backend")
@click.option("--no-timestamp", is_flag=True, help="Omit the generated-at comment line")
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for solver detail")
@click.pass_context
def cli(ctx, config_path, overrides, out, fmt, resolution, no_timestamp, verbose):
    """teg-sim - design and simulation of micromachined thermoelectric generators."""
    _configure_logging(verbose)
    settings: Dict[str, Any] = {}
    if out is not None:
        settings["output.directory"] = str(out)
    if fmt is not None:
        settings["output.format"] = fmt
    if resolution is not None:
        settings["solver.resolution"] = resolution
    if no_timestamp:
        settings["output.timestamp"] = False
    ctx.obj = CliState(config_path=config_path, overrides=tuple(overrides), settings=settings)


@cli.group()
def config():
    """Inspect the resolved configuration."""


@config.command("show")
@click.pass_obj
@handle_errors
def config_show(state: CliState):
    """Print the resolved configuration as YAML."""
    resolved = state.load()
    click.echo(resolved.to_yaml(), nl=False)


@cli.group()
def materials():
    """Material constants and figures of merit."""


@materials.command("zt")
@click.option("--temperature", type=float, help="Temperature in K (default: materials.reference_temperature)")
@click.pass_obj
@handle_errors
def materials_zt(state: CliState, temperature: Optional[float]):
    """Figure of merit ZT of each film and of the couple."""
    resolved = state.load()
    if temperature is None:
        temperature = resolved.reference_temperature
    rows = zt_report(resolved.materials(), temperature)

    click.echo(f"Figure of merit at {temperature:.2f} K:")
    for row in rows:
        line = f"  {row.film:<7} ZT = {row.zt_formula:.4f}"
        if row.zt_reported is not None:
            line += f"  (reported {row.zt_reported:.3f}, {row.discrepancy:+.0%})"
            if row.flagged:
                line += "  ⚠ discrepancy: S^2 T/(rho k) from the quoted S, rho, k does not give the reported value"
        click.echo(line)

    table = pd.DataFrame(
        [
            {
                "film": r.film,
                "temperature_K": r.temperature,
                "zt_formula": r.zt_formula,
                "zt_reported": r.zt_reported,
                "relative_discrepancy": r.discrepancy,
                "flagged": r.flagged,
            }
            for r in rows
        ]
    )
    _emit(resolved, "materials zt", table, ("film", "zt_formula"))


@cli.group()
def leg():
    """Thermal resistance of one thermocouple cell."""


@leg.command("resistance")
@_backend_option
@click.pass_obj
@handle_errors
def leg_resistance(state: CliState, backend: Optional[str]):
    """Cell resistance of the configured geometry."""
    resolved = state.load()
    backend = backend or resolved.backend
    cell = resolved.unit_cell()
    k_leg = resolved.k_leg
    breakdown = cell_resistance_breakdown(cell, k_leg)
    r_cell = cell_resistance(cell, k_leg, backend, resolved.numeric_settings())

    click.echo(f"Cell: {describe_cell(cell)}")
    click.echo(f"  R_cell ({backend}): {_fmt(r_cell, 5)} K/W")
    click.echo(f"  R_legs (analytic):  {_fmt(breakdown.r_legs, 5)} K/W")
    click.echo(f"  R_fill (analytic):  {_fmt(breakdown.r_fill, 5)} K/W")
    for note in breakdown.notes:
        click.echo(f"  note: {note}")

    table = pd.DataFrame(
        [
            {
                "backend": backend,
                "resistance_K_per_W": r_cell,
                "r_legs_analytic_K_per_W": breakdown.r_legs,
                "r_fill_analytic_K_per_W": breakdown.r_fill,
            }
        ]
    )
    _emit(resolved, "leg resistance", table, ("backend", "resistance_K_per_W"))


def _echo_sweep(table: pd.DataFrame, x_column: str) -> None:
    for row in table.itertuples(index=False):
        x = getattr(row, x_column)
        if row.error:
            click.echo(f"  {to_um(x):6.3g} um  ❌ {row.error}")
        else:
            click.echo(f"  {to_um(x):6.3g} um  R = {_fmt(row.resistance_K_per_W, 5)} K/W")


@leg.command("sweep-width")
@_backend_option
@click.pass_obj
@handle_errors
def leg_sweep_width(state: CliState, backend: Optional[str]):
    """R against middle width b."""
    resolved = state.load()
    backend = backend or resolved.backend
    table = sweep_width(
        resolved.unit_cell(),
        resolved.width_values(),
        resolved.k_leg,
        backend,
        resolved.numeric_settings(),
        resolved.parallelism,
    )
    click.echo(f"Width sweep ({backend}):")
    _echo_sweep(table, "middle_width_b_m")
    valid = table["resistance_K_per_W"].dropna()
    if len(valid) > 1 and valid.is_monotonic_decreasing and valid.is_unique:
        click.echo("✓ R strictly decreases with width")
    _emit(resolved, "leg sweep-width", table, ("middle_width_b_m", "resistance_K_per_W"))


@leg.command("sweep-height")
@_backend_option
@click.pass_obj
@handle_errors
def leg_sweep_height(state: CliState, backend: Optional[str]):
    """R against step height h."""
    resolved = state.load()
    backend = backend or resolved.backend
    table = sweep_height(
        resolved.unit_cell(),
        resolved.height_values(),
        resolved.k_leg,
        backend,
        resolved.numeric_settings(),
        resolved.parallelism,
    )
    click.echo(f"Height sweep ({backend}):")
    _echo_sweep(table, "step_height_h_m")
    valid = table.dropna(subset=["resistance_K_per_W"])
    if len(valid) > 1:
        fit = linear_fit(valid["step_height_h_m"] * 1e6, valid["resistance_K_per_W"])
        click.echo(f"  linear fit: slope {_fmt(fit.slope)} K/W per um, R^2 = {fit.r_squared:.5f}")
    _emit(resolved, "leg sweep-height", table, ("step_height_h_m", "resistance_K_per_W"))


@leg.command("sweep-mask")
@_backend_option
@click.pass_obj
@handle_errors
def leg_sweep_mask(state: CliState, backend: Optional[str]):
    """R for every (a, b) mask type at the mask step height."""
    resolved = state.load()
    backend = backend or resolved.backend
    table = sweep_mask_types(
        resolved.unit_cell(),
        resolved.mask_catalog(),
        resolved.k_leg,
        resolved.mask_step_height,
        backend,
        resolved.numeric_settings(),
        resolved.parallelism,
    )
    table.insert(0, "mask_type", [f"{to_um(a):g}-{to_um(b):g}" for a, b in resolved.mask_catalog()])
    click.echo(f"Mask types at h = {to_um(resolved.mask_step_height):g} um ({backend}):")
    for row in table.itertuples(index=False):
        status = f"❌ {row.error}" if row.error else f"R = {_fmt(row.resistance_K_per_W, 5)} K/W"
        click.echo(f"  {row.mask_type:>6}  {status}")
    _emit(resolved, "leg sweep-mask", table, ("mask_type", "resistance_K_per_W"))


@leg.command("refine")
@click.pass_obj
@handle_errors
def leg_refine(state: CliState):
    """Numeric R over successively finer grids."""
    resolved = state.load()
    table = grid_refinement(
        resolved.unit_cell(), resolved.k_leg, resolved.refinement_resolutions(), resolved.numeric_settings()
    )
    click.echo("Grid refinement:")
    for row in table.itertuples(index=False):
        click.echo(f"  {row.resolution_per_um:g}/um  R = {_fmt(row.resistance_K_per_W, 6)} K/W")
    _emit(resolved, "leg refine", table, ("resolution_per_um", "resistance_K_per_W"))


@cli.group()
def network():
    """Lumped thermal circuit of the device on the body."""


@network.command("solve")
@_backend_option
@click.pass_obj
@handle_errors
def network_solve(state: CliState, backend: Optional[str]):
    """Solve the body-TEG-ambient circuit for the configured design."""
    resolved = state.load()
    backend = backend or resolved.backend
    design = resolved.design()
    env = resolved.environment()
    r_cell = cell_resistance(design.cell, design.k_leg, backend, resolved.numeric_settings())
    circuit = env.circuit(r_pile=r_cell / design.n_couples, r_gap=watch_gap_resistance(design))
    solution = solve_network(circuit)

    click.echo("Thermal circuit:")
    for label, value in (
        ("R_body", circuit.r_body),
        ("R_hot_plate", circuit.r_hot_plate),
        ("R_pile", circuit.r_pile),
        ("R_gap", circuit.r_gap),
        ("R_cold_plate", circuit.r_cold_plate),
        ("R_sink", circuit.r_sink),
    ):
        click.echo(f"  {label:<14}{_fmt(value, 5):>12} K/W")
    click.echo("Solution:")
    click.echo(f"  {'Q_total':<14}{_fmt(solution.q_total, 5):>12} W")
    click.echo(f"  {'Q_pile':<14}{_fmt(solution.q_pile, 5):>12} W")
    click.echo(f"  {'Q_gap':<14}{_fmt(solution.q_gap, 5):>12} W")
    click.echo(f"  {'dT_junctions':<14}{_fmt(solution.delta_t_junctions, 5):>12} K")
    for name in NODE_NAMES:
        click.echo(f"  T_{name:<12}{kelvin_to_celsius(solution.node_temperatures[name]):>12.4f} C")

    table = pd.DataFrame(
        [{"node": name, "temperature_K": solution.node_temperatures[name]} for name in NODE_NAMES]
        + [
            {"node": "dT_junctions", "temperature_K": solution.delta_t_junctions},
        ]
    )
    table["q_total_W"] = solution.q_total
    _emit(resolved, "network solve", table, ("node", "temperature_K"))


@cli.group()
def gen():
    """Generator output predictions."""


@gen.command("simulate")
@click.option("--type", "design_type", help="Design type (default: generator.design_type)")
@click.option("--hypothesis", type=click.Choice(HYPOTHESES), help="Heat-flow hypothesis")
@_backend_option
@click.pass_obj
@handle_errors
def gen_simulate(state: CliState, design_type: Optional[str], hypothesis: Optional[str], backend: Optional[str]):
    """Voltage and power of one design in the configured environment."""
    resolved = state.load()
    design = resolved.design(design_type)
    report = simulate(
        design,
        resolved.environment(),
        hypothesis or resolved.hypothesis,
        backend or resolved.backend,
        resolved.numeric_settings(),
    )

    click.echo(f"Design {design.label}: {design.n_couples} couples, {validate_rim(design.layout).describe()}")
    click.echo(f"  dT_junctions      {_fmt(report.delta_t_junctions)} K")
    click.echo(f"  Q_total           {_fmt(report.q_total)} W")
    click.echo(f"  V_oc              {_fmt(report.v_oc)} V")
    click.echo(f"  R_internal        {_fmt(report.r_internal)} ohm")
    click.echo(f"  P_matched         {_fmt(report.p_matched * 1e6)} uW")
    click.echo(f"  areal density     {_fmt(report.areal_voltage_density)} mV/(K cm2)")
    if report.couples_for_1v is not None:
        click.echo(f"  couples for 1 V   {report.couples_for_1v}")
    if report.v_oc >= 1.0:
        click.echo("✓ open-circuit voltage above 1 V")

    row = {"design": design.label, **report.as_row(), "couples_for_1V": report.couples_for_1v}
    _emit(resolved, "gen simulate", pd.DataFrame([row]), ("V_oc_V", "P_matched_W"))


@gen.command("sweep")
@click.option("--hypothesis", type=click.Choice(HYPOTHESES), help="Heat-flow hypothesis")
@_backend_option
@click.pass_obj
@handle_errors
def gen_sweep(state: CliState, hypothesis: Optional[str], backend: Optional[str]):
    """Every mask type in every design type."""
    resolved = state.load()
    table = sweep_designs(
        resolved.design(),
        resolved.environment(),
        resolved.design_catalog(),
        resolved.design_types(),
        hypothesis or resolved.hypothesis,
        backend or resolved.backend,
        resolved.numeric_settings(),
        resolved.parallelism,
    )
    click.echo("Design sweep:")
    for row in table.itertuples(index=False):
        if row.error:
            click.echo(f"  {row.design:>9}  ❌ {row.error}")
        else:
            click.echo(f"  {row.design:>9}  V_oc {_fmt(row.V_oc_V):>8} V   P {_fmt(row.P_matched_W * 1e6):>8} uW")
    _emit(resolved, "gen sweep", table, ("design", "V_oc_V"))


@gen.command("optimize")
@click.option("--hypothesis", type=click.Choice(HYPOTHESES), help="Heat-flow hypothesis")
@_backend_option
@click.pass_obj
@handle_errors
def gen_optimize(state: CliState, hypothesis: Optional[str], backend: Optional[str]):
    """Couple count maximizing matched-load power."""
    resolved = state.load()
    result = optimize_couples(
        resolved.design(),
        resolved.environment(),
        resolved.optimize_range(),
        hypothesis or resolved.optimize_hypothesis,
        backend or resolved.backend,
        resolved.numeric_settings(),
    )
    report = result.report
    mismatch = abs(report.r_pile - report.r_gap) / report.r_gap
    click.echo(f"Optimum: n* = {result.n_optimal}")
    click.echo(f"  R_pile(n*) = {_fmt(report.r_pile)} K/W vs R_gap = {_fmt(report.r_gap)} K/W ({mismatch:.1%} apart)")
    click.echo(f"  V_oc = {_fmt(report.v_oc)} V, P_matched = {_fmt(report.p_matched * 1e6)} uW")
    _emit(resolved, "gen optimize", result.curve, ("n_couples", "P_matched_W"))


@gen.command("arrangements")
@_backend_option
@click.pass_obj
@handle_errors
def gen_arrangements(state: CliState, backend: Optional[str]):
    """Sandwich, chip and rim assemblies side by side."""
    resolved = state.load()
    table = compare_arrangements(
        resolved.design(),
        resolved.environment(),
        resolved.chip_stack_thickness,
        backend or resolved.backend,
        resolved.numeric_settings(),
    )
    click.echo("Assembly comparison:")
    for row in table.itertuples(index=False):
        click.echo(
            f"  {row.arrangement:<9} R_gap {_fmt(row.R_gap_K_per_W):>8} K/W  "
            f"dT {_fmt(row.dT_junctions_K):>8} K  V_oc {_fmt(row.V_oc_V):>8} V"
        )
    _emit(resolved, "gen arrangements", table, ("arrangement", "dT_junctions_K"))


@cli.group()
def scenario():
    """Bench scenarios."""


@scenario.command("chuck")
@click.option("--rim/--no-rim", default=None, help="Deep-etched rim die")
@click.option("--forced/--natural", "forced", default=None, help="Nitrogen flush over the radiator")
@click.option("--released/--unreleased", default=None, help="Sacrificial oxide removed")
@click.option("--matrix", is_flag=True, help="Evaluate all eight flag combinations")
@_backend_option
@click.pass_obj
@handle_errors
def scenario_chuck(state: CliState, rim, forced, released, matrix, backend):
    """Areal voltage density of the die on a heated chuck."""
    resolved = state.load()
    backend = backend or resolved.backend
    settings = resolved.numeric_settings()
    design = resolved.design()
    setup = resolved.chuck_setup()
    flags = resolved.scenario_flags()
    rim = flags["rim"] if rim is None else rim
    forced = flags["forced_convection"] if forced is None else forced
    released = flags["released"] if released is None else released

    if matrix:
        table = chuck_matrix(design, setup, backend, settings)
        click.echo("Chuck scenario, all flag combinations:")
        for row in table.itertuples(index=False):
            click.echo(
                f"  released={row.released!s:<5} forced={row.forced_convection!s:<5} rim={row.rim!s:<5} "
                f"{_fmt(row.areal_voltage_density_mV_per_K_cm2):>8} mV/(K cm2)  rim gain {row.rim_gain:.2f}"
            )
    else:
        result = chuck_scenario(design, setup, rim, forced, released, backend, settings)
        without_rim = chuck_scenario(design, setup, not rim, forced, released, backend, settings)
        ratio = density_ratio(result.areal_voltage_density, without_rim.areal_voltage_density)
        click.echo(f"Chuck scenario (rim={rim}, forced={forced}, released={released}):")
        click.echo(f"  dT_junctions   {_fmt(result.report.delta_t_junctions)} K")
        click.echo(f"  V_oc           {_fmt(result.report.v_oc)} V")
        click.echo(f"  density        {_fmt(result.areal_voltage_density)} mV/(K cm2)")
        if math.isnan(ratio):
            click.echo(f"  rim={rim} vs rim={not rim} ratio undefined: zero density with chuck not above ambient")
        else:
            click.echo(f"  rim={rim} vs rim={not rim} ratio {ratio:.3f}")
        table = pd.DataFrame(
            [
                {
                    "rim": rim,
                    "forced_convection": forced,
                    "released": released,
                    "V_oc_V": result.report.v_oc,
                    "dT_junctions_K": result.report.delta_t_junctions,
                    "areal_voltage_density_mV_per_K_cm2": result.areal_voltage_density,
                    "ratio_vs_other_rim_setting": ratio,
                }
            ]
        )
    click.echo(f"  note: {ChuckResult.note}")
    _emit(resolved, "scenario chuck", table, ("rim", "areal_voltage_density_mV_per_K_cm2"))

    curve = chuck_voltage_curve(design, setup, rim, forced, released, resolved.chuck_curve_delta_t(), backend, settings)
    _emit(resolved, "scenario chuck-curve", curve, ("dT_chuck_K", "V_oc_V"))


if __name__ == "__main__":
    cli()
