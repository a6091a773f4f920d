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

"""Logging setup: a rich console handler on the `bifurcade` logger plus an optional log file."""
import logging
from enum import Enum
from logging import Formatter, Logger
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional, Tuple

from rich.console import Console
from rich.logging import RichHandler
from rich.traceback import install

install()

logging_console = Console()
ROOT_LOGGER_NAME = "bifurcade"
CONSOLE_FORMAT = r"[magenta]\[%(name)s][/magenta] - %(message)s"
FILE_FORMAT = "[%(asctime)s] - %(name)s - %(levelname)s - %(message)s"


class LogLevel(str, Enum):
    DEBUG = 'DEBUG'
    INFO = 'INFO'
    WARNING = 'WARNING'
    ERROR = 'ERROR'
    CRITICAL = 'CRITICAL'

    def get_log_level(self) -> int:
        return getattr(logging, self.value)

    @classmethod
    def parse(cls, value: str) -> 'LogLevel':
        """Accept the short spellings used by BIFURCADE_LOG (error, warn, info, debug)."""
        normalized = str(value).strip().upper()
        if normalized == 'WARN':
            normalized = 'WARNING'
        return cls(normalized)


def setup_logger(
    level: LogLevel = LogLevel.DEBUG, std_out_level: Optional[LogLevel] = LogLevel.INFO
) -> Tuple[Logger, RichHandler]:
    """Configure the package logger once at import; returns it with its console handler."""
    logger = logging.getLogger(ROOT_LOGGER_NAME)
    logger.setLevel(level.get_log_level())
    handler = RichHandler(level=(std_out_level or level).get_log_level(), markup=True, console=logging_console)
    handler.setFormatter(Formatter(CONSOLE_FORMAT))
    logger.addHandler(handler)
    return logger, handler


def add_file_handler(logger: Logger, level: LogLevel, file_name: Path) -> RotatingFileHandler:
    """Mirror `logger` into `file_name` from `level` up (backs --log-file)."""
    handler = RotatingFileHandler(str(file_name))
    handler.setFormatter(Formatter(FILE_FORMAT))
    handler.setLevel(level.get_log_level())
    logger.addHandler(handler)
    return handler
