#   Copyright 2022 Modelyst LLC
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.

"""The analysis subcommands; they share one set of options and differ in the pipeline they run."""
import json
from logging import getLogger
from pathlib import Path
from typing import Callable, List, Optional

import typer

import bifurcade.cli.styles as styles
from bifurcade._enum import Command, OutputFormat
from bifurcade.cli.options import (
    config_option,
    crossing_option,
    env_file_option,
    format_option,
    lambda_hi_option,
    lambda_lo_option,
    lambda_option,
    level_option,
    log_file_option,
    model_option,
    order_option,
    out_option,
    seed_option,
)
from bifurcade.cli.utils import build_run_config, format_values, set_logging
from bifurcade.core.run import REPORT_NAME, run
from bifurcade.utils.log import LogLevel

logger = getLogger(__name__)

HELP = {
    Command.spectrum: "Print the linear coefficients beta_k(lambda) of every mode.",
    Command.detect: "Locate the bifurcation values in the parameter window.",
    Command.reduce: "Compute the center manifold reduction at a crossing.",
    Command.classify: "Classify the origin on the center manifold and compare Conley indices.",
    Command.localbif: "Compute the bifurcating invariant set near a crossing.",
    Command.index: "Compute the Conley index of the bifurcating invariant set.",
    Command.branch: "Continue the bifurcation branch from a crossing.",
    Command.global_: "Continue every branch in the window and report the global alternatives.",
    Command.probe: "Probe connecting orbits out of the origin with the Lyapunov functional.",
    Command.simulate: "Integrate the Galerkin model from an initial state.",
}


def make_command(command: Command) -> Callable:
    def analysis(
        model_file: Optional[Path] = model_option,
        config_file: Optional[Path] = config_option,
        out: Optional[Path] = out_option,
        formats: Optional[List[OutputFormat]] = format_option,
        lambda_lo: Optional[float] = lambda_lo_option,
        lambda_hi: Optional[float] = lambda_hi_option,
        lam: Optional[float] = lambda_option,
        crossing: Optional[float] = crossing_option,
        order: Optional[int] = order_option,
        seed: Optional[int] = seed_option,
        length: Optional[float] = typer.Option(None, "--length", help="Cahn-Hilliard domain length L."),
        b2: Optional[float] = typer.Option(None, "--b2", help="Cahn-Hilliard quadratic coefficient."),
        b3: Optional[float] = typer.Option(None, "--b3", help="Cahn-Hilliard cubic coefficient."),
        modes: Optional[int] = typer.Option(None, "--modes", "-N", help="Cahn-Hilliard Galerkin modes."),
        level: Optional[LogLevel] = level_option,
        log_file: Optional[Path] = log_file_option,
        _env_file: Path = env_file_option,
    ):
        set_logging(level, log_file)
        run_config = build_run_config(
            config_file,
            {
                'out': out,
                'formats': format_values(formats),
                'lambda_lo': lambda_lo,
                'lambda_hi': lambda_hi,
                'lambda_value': lam,
                'crossing': crossing,
                'order': order,
                'seed': seed,
            },
            {'path': model_file, 'L': length, 'b2': b2, 'b3': b3, 'N': modes},
        )
        styles.theme_typer_print(f"Running [bold]{command.value}[/bold]...")
        code = run(command, run_config)
        styles.delimiter()
        report_path = run_config.out / REPORT_NAME
        if report_path.exists() and (code == 3 or (code == 0 and OutputFormat.json in run_config.formats)):
            styles.console.print(styles.report_table(json.loads(report_path.read_text())))
        if code:
            styles.bad_typer_print(f"{command.value} failed with exit code {code}")
        else:
            styles.good_typer_print(f"Results written to {run_config.out}")
        raise typer.Exit(code=code)

    analysis.__doc__ = HELP[command]
    analysis.__name__ = f"{command.name}_command"
    return analysis


def register(app: typer.Typer) -> None:
    for command in Command:
        app.command(command.value, help=HELP[command])(make_command(command))
