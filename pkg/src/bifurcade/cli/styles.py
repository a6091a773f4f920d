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

"""Console output of the CLI: banner, status lines and the report summary table."""
from typing import Any, Callable, Dict, Union

from rich.console import Console, Group, RenderableType
from rich.panel import Panel
from rich.table import Table
from rich.text import Text
from rich.theme import Theme

from bifurcade import __version__

console = Console(theme=Theme({'theme': 'magenta', 'good': 'green', 'bad': 'red'}))
LOGO = r"""
    __    _ ____                          __
   / /_  (_) __/_  ___________ _____ ____/ /__
  / __ \/ / /_/ / / / ___/ ___/ __ `/ __  / _ \
 / /_/ / / __/ /_/ / /  / /__/ /_/ / /_/ /  __/
/_.___/_/_/  \__,_/_/   \___/\__,_/\__,_/\___/
"""

LOGO_STYLE = Panel.fit(
    Group(Panel(Text(LOGO)), Panel(Text(f"VERSION: {__version__}", justify='center'))),
    style='theme',
)

Printer = Callable[[Union[str, RenderableType]], None]


def printer(style: str) -> Printer:
    def _print(message: Union[str, RenderableType]) -> None:
        console.print(message, style=style)

    return _print


good_typer_print = printer('good')
bad_typer_print = printer('bad')
theme_typer_print = printer('theme')


def delimiter(style: str = 'theme') -> None:
    console.rule(style=style)


def report_table(document: Dict[str, Any]) -> Table:
    """Summary of a report.json document: scalar results, sizes of listed results and any diagnostics."""
    table = Table(title=f"{document['command']} ({document['status']})", title_style='theme')
    table.add_column("entry", style='theme')
    table.add_column("value")
    for key, value in (document.get('result') or {}).items():
        if isinstance(value, (str, int, float, bool)):
            table.add_row(key, str(value))
        elif isinstance(value, list):
            table.add_row(key, f"{len(value)} entries")
        elif isinstance(value, dict):
            table.add_row(key, ", ".join(sorted(value)) or "-")
    for key, value in (document.get('diagnostics') or {}).items():
        if key != 'details':
            table.add_row(key, str(value), style='bad')
    return table
