"""Command-line front end: `cavity-diffusion <subcommand> [options]`, CSV on stdout or --output."""
from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace
from typing import Any, Optional

from src.analysis.regimes import RegimeAnalysis
from src.analysis.sweep import PEAK_COLUMNS, SWEEPABLE, ParameterSweep, Peak, SweepRow, SweepSpec
from src.cli.csv_output import emit_csv, write_output
from src.cli.presets import PRESETS, figure_preset
from src.cli.scene_config import CONFIG_KEYS, RunConfig, format_scene, parse_config
from src.oracle.lindblad_oracle import LindbladOracle
from src.oracle.truncated_space import TruncatedSpace
from src.physics.diffusion import DiffusionCalculator, DiffusionResult
from src.physics.model import SceneConfig
from src.physics.steady_state import SteadyStateSolver
from utils.config import TOOL_NAME, TOOL_VERSION, cli_logger
from utils.exceptions import CavityDiffusionError, SceneConfigError

TENSOR_COMPONENTS = {"xx": (0, 0), "yy": (1, 1), "zz": (2, 2), "xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}
DIFFUSION_ROUTES = ("mean_field", "matrix", "finite_difference", "free_space")


def _common_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", metavar="PATH", help="flat key=value scene file")
    parent.add_argument("--output", metavar="PATH", help="write CSV here instead of stdout")
    parent.add_argument("--precision", type=int, default=9, help="significant digits, 6 to 17 (default 9)")
    parent.add_argument("--cross-check", action="store_true", help="fail with exit 4 if closed form and matrix route disagree")
    scene = parent.add_argument_group("scene keys (override the config file)")
    for key in CONFIG_KEYS:
        scene.add_argument(f"--{key}", dest=key, metavar="VALUE")
    return parent


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog=TOOL_NAME, description="Momentum diffusion of a driven atom in a driven cavity.")
    parser.add_argument("--version", action="version", version=f"{TOOL_NAME} {TOOL_VERSION}")
    commands = parser.add_subparsers(dest="subcommand", required=True)

    commands.add_parser("steady", parents=[common], help="steady-state means")

    diffusion = commands.add_parser("diffusion", parents=[common], help="diffusion at one position")
    diffusion.add_argument("--route", choices=DIFFUSION_ROUTES, default="mean_field")
    diffusion.add_argument("--fd-step", type=float, default=None)
    diffusion.add_argument("--richardson", action="store_true")

    sweep = commands.add_parser("sweep", parents=[common], help="one-dimensional parameter sweep")
    sweep.add_argument(
        "--parameter", choices=SWEEPABLE, required=True,
        help="omega_L, omega_cav, x, y, z, a SystemParams field or its config key (delta_a, eta0_re, ...)",
    )
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    _add_sweep_output_options(sweep)

    oracle = commands.add_parser("oracle", parents=[common], help="truncated master-equation diffusion")
    oracle.add_argument("--n-atom", type=int, default=6)
    oracle.add_argument("--n-cav", type=int, default=6)

    regime = commands.add_parser("regime", parents=[common], help="regime ratios and their predictions")
    regime.add_argument("--points", type=int, default=None)

    figure = commands.add_parser("figure", parents=[common], help="preset figure sweeps")
    figure.add_argument("name", choices=sorted(PRESETS))
    figure.add_argument("--steps", type=int, default=None)
    _add_sweep_output_options(figure)
    return parser


def _add_sweep_output_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--peaks", action="store_true", help="emit the peaks instead of the rows")
    parser.add_argument("--peak-column", choices=PEAK_COLUMNS, default="two_D_total")


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    return {key: getattr(args, key) for key in CONFIG_KEYS if getattr(args, key, None) is not None}


def load_scene(args: argparse.Namespace, base: Optional[SceneConfig] = None) -> SceneConfig:
    """Scene from --config (or a preset base) with command-line keys applied on top."""
    if base is not None:
        text = "\n".join(format_scene(base))
    elif args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as file:
                text = file.read()
        except OSError as e:
            cli_logger.error(f"Could not read config {args.config}: {e}")
            raise SceneConfigError(f"{args.config}: {e}") from e
    else:
        text = ""
    return parse_config(text, _overrides(args))


def _diffusion_row(result: DiffusionResult, force_along_axis: float, removal_rate: float) -> dict[str, Any]:
    row = {
        "two_D_spont": result.two_D_spont,
        "two_D_atom": result.two_D_atom,
        "two_D_mode": result.two_D_mode,
        "two_D_total": result.two_D_total,
        "P_e": result.steady.P_e,
        "N_cav": result.steady.N_cav,
        "force": force_along_axis,
        "removal_rate": removal_rate,
    }
    if result.heating_rate is not None:
        row["heating_rate"] = result.heating_rate
    for name, (i, j) in TENSOR_COMPONENTS.items():
        row[f"tensor_{name}"] = result.tensor[i, j]
    row["P_e_small"] = int(result.validity.P_e_small)
    row["harmonic_ok"] = int(result.validity.harmonic_ok)
    return row


def run_steady(scene: SceneConfig, args: argparse.Namespace) -> list[dict[str, Any]]:
    steady = SteadyStateSolver.steady_closed_form(scene)
    return [{
        "sigma": steady.sigma_mean,
        "a": steady.a_mean,
        "P_e": steady.P_e,
        "N_cav": steady.N_cav,
        "nu": steady.nu,
        "one_minus_nu_sq": steady.one_minus_nu_sq,
    }]


def run_diffusion(scene: SceneConfig, args: argparse.Namespace) -> list[dict[str, Any]]:
    if args.route == "matrix":
        result = DiffusionCalculator.diffusion_matrix_form(scene)
    elif args.route == "finite_difference":
        result = DiffusionCalculator.diffusion_finite_difference(scene, step=args.fd_step, richardson=args.richardson)
    elif args.route == "free_space":
        result = DiffusionCalculator.diffusion_free_space(scene)
    else:
        result = DiffusionCalculator.diffusion_mean_field(scene)
    force = DiffusionCalculator.mean_force(scene)
    return [_diffusion_row(result, float(result.axis @ force.force), force.removal_rate)]


def _sweep_rows(spec: SweepSpec, args: argparse.Namespace) -> list[Any]:
    rows = ParameterSweep.sweep(spec, workers=args.workers, cross_check=args.cross_check)
    if args.peaks:
        return ParameterSweep.find_peaks(rows, column=args.peak_column)
    return rows


def _sweep_columns(args: argparse.Namespace) -> list[str]:
    return [f.name for f in fields(Peak if args.peaks else SweepRow)]


def run_sweep(scene: SceneConfig, args: argparse.Namespace) -> list[Any]:
    spec = SweepSpec(args.parameter, args.start, args.stop, args.steps, scene)
    return _sweep_rows(spec, args)


def run_oracle(scene: SceneConfig, args: argparse.Namespace) -> list[dict[str, Any]]:
    space = TruncatedSpace(n_atom=args.n_atom, n_cav=args.n_cav)
    oracle = LindbladOracle.regression_diffusion(scene, space=space)
    mean_field = DiffusionCalculator.diffusion_mean_field(scene)
    return [{
        "n_atom": space.n_atom,
        "n_cav": space.n_cav,
        "two_D_force_oracle": oracle.two_D_force,
        "two_D_force_mean_field": mean_field.two_D_force,
        "relative_deviation": LindbladOracle._relative_error(mean_field.two_D_force, oracle.two_D_force),
        "imag_residual": oracle.imag_residual,
        "two_D_spont": oracle.two_D_spont,
        "P_e": oracle.P_e,
        "N_cav": oracle.N_cav,
        "purity": oracle.purity,
        "harmonic_residual": oracle.harmonic_residual,
    }]


def run_regime(scene: SceneConfig, args: argparse.Namespace) -> list[dict[str, Any]]:
    report = RegimeAnalysis.regime_report(scene, points=args.points)
    return [
        {
            "name": entry.name,
            "measured": entry.measured,
            "predicted": entry.predicted,
            "ratio": entry.ratio,
            "relative_deviation": entry.relative_deviation,
        }
        for entry in report.entries
    ]


RUNNERS = {
    "steady": run_steady,
    "diffusion": run_diffusion,
    "sweep": run_sweep,
    "oracle": run_oracle,
    "regime": run_regime,
}


def execute(args: argparse.Namespace) -> str:
    """Run one parsed invocation and return its CSV text."""
    config = RunConfig(
        subcommand=args.subcommand,
        precision=args.precision,
        cross_check=args.cross_check,
        n_atom=getattr(args, "n_atom", 6),
        n_cav=getattr(args, "n_cav", 6),
        output=args.output,
        config_path=args.config,
    )
    if args.subcommand == "figure":
        spec = figure_preset(args.name)
        scene = load_scene(args, base=spec.scene)
        spec = replace(spec, scene=scene, steps=args.steps or spec.steps)
        rows = _sweep_rows(spec, args)
        columns = _sweep_columns(args)
    else:
        scene = load_scene(args)
        if config.cross_check and args.subcommand != "sweep":
            SteadyStateSolver.cross_check(scene)
            DiffusionCalculator.cross_check(scene)
        rows = RUNNERS[args.subcommand](scene, args)
        columns = _sweep_columns(args) if args.subcommand == "sweep" else None
    return emit_csv(rows, config, scene, columns=columns)


def main(argv: Optional[list[str]] = None) -> int:
    """
    Parse arguments, run the subcommand and write its CSV.

    Returns:
        int: 0 on success, 2 for configuration errors, 3 for numerical failures,
        4 for cross-check failures.
    """
    args = build_parser().parse_args(argv)
    try:
        text = execute(args)
        write_output(text, args.output, sys.stdout)
    except CavityDiffusionError as e:
        cli_logger.error(f"{args.subcommand} failed with exit code {e.exit_code}: {e}")
        print(f"{TOOL_NAME}: error: {e}", file=sys.stderr)
        return e.exit_code
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
