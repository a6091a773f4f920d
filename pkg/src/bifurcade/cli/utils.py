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

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

import typer

from bifurcade.cli.styles import LOGO_STYLE
from bifurcade.configuration import root_logger, stdout_handler, update_config
from bifurcade.core.run import RunConfig, load_run_config
from bifurcade.exceptions import BifurcadeValidationError
from bifurcade.utils.log import LogLevel, add_file_handler

logger = logging.getLogger(__name__)


def version_callback(value: bool):
    """
    Eagerly print the version LOGO

    Raises:
        typer.Exit: exits after showing version
    """
    if value:
        typer.echo(LOGO_STYLE)
        raise typer.Exit()


def env_file_callback(env_file: Path):
    if env_file.exists():
        update_config(env_file)
    elif str(env_file.name) != '.env':
        raise typer.BadParameter(f'Settings file \'{env_file}\' does not exist')
    return env_file


def existing_file(value: Optional[Path]):
    if value is not None and not value.exists():
        raise typer.BadParameter(f"File '{value}' does not exist")
    return value


def set_logging(level: Optional[LogLevel], log_file: Optional[Path]) -> None:
    """Apply --level to the stdout logger and attach a --log-file handler."""
    if level is not None:
        root_logger.setLevel(level.get_log_level())
        stdout_handler.setLevel(level.get_log_level())
    if log_file is not None:
        add_file_handler(root_logger, level or LogLevel.DEBUG, log_file)


def build_run_config(
    config_file: Optional[Path], overrides: Dict[str, Any], model_args: Dict[str, Any]
) -> RunConfig:
    """Merge the run config file with the CLI flags; bad input becomes a usage error (exit code 2)."""
    model = {key: value for key, value in model_args.items() if value is not None}
    if model:
        overrides = {**overrides, 'model': model}
    try:
        return load_run_config(config_file, overrides)
    except BifurcadeValidationError as exc:
        raise typer.BadParameter(exc.msg) from exc


def format_values(formats: Optional[List[Any]]) -> Optional[List[str]]:
    return [f.value for f in formats] if formats else None
