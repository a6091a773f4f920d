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

"""Report documents and plot-data tables written at the end of a run."""
import csv
import json
from datetime import datetime
from logging import getLogger
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from bifurcade import __version__
from bifurcade.core.base import to_builtin
from bifurcade.core.continuation import Branch
from bifurcade.exceptions import InvalidArgument

logger = getLogger(__name__)

SCHEMA_VERSION = 1
TIMESTAMP_KEY = 'timestamp'

Table = Tuple[List[str], List[List[Any]]]


def build_report(
    command: str,
    run_config: Dict[str, Any],
    result: Optional[Dict[str, Any]] = None,
    diagnostics: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    return {
        'schema': SCHEMA_VERSION,
        'bifurcade_version': __version__,
        'command': command,
        'status': 'ok' if diagnostics is None else 'failed',
        'config': run_config,
        'result': result,
        'diagnostics': diagnostics,
        TIMESTAMP_KEY: datetime.now().isoformat(timespec='seconds'),
    }


def dumps(document: Dict[str, Any]) -> str:
    """Deterministic JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(to_builtin(document), sort_keys=True, indent=2) + "\n"


def write_json(document: Dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(document))
    logger.debug(f"Wrote {path}")
    return path


def write_csv(header: Sequence[str], rows: Sequence[Sequence[Any]], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.debug(f"Wrote {path} with {len(rows)} rows")
    return path


def branch_table(branch: Branch) -> Table:
    dim = len(branch.points[0].a) if branch.points else 0
    header = ['lambda', 'arclength', 'v_norm', *[f'a_{k}' for k in range(1, dim + 1)], 'n_unstable']
    rows = [[p.lam, p.arclength, p.v_norm, *p.a, p.n_unstable] for p in branch.points]
    return header, rows


def diagram_tables(branches: Sequence[Branch]) -> Dict[str, Table]:
    """One table per branch plus the combined (lambda, v_norm, n_unstable, branch_id) table."""
    if not branches:
        raise InvalidArgument("A bifurcation diagram needs at least one branch")
    tables = {f'branch_{i}.csv': branch_table(branch) for i, branch in enumerate(branches)}
    combined = [
        [p.lam, p.v_norm, p.n_unstable, i] for i, branch in enumerate(branches) for p in branch.points
    ]
    tables['diagram.csv'] = (['lambda', 'v_norm', 'n_unstable', 'branch_id'], combined)
    return tables


def emit_diagram(branches: Sequence[Branch], path: Path) -> List[Path]:
    """Write the branch tables under the directory `path`."""
    return [write_csv(header, rows, path / name) for name, (header, rows) in diagram_tables(branches).items()]
