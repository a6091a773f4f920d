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

import json

import numpy as np
import pytest

from bifurcade import __version__
from bifurcade._enum import Termination
from bifurcade.core.continuation import Branch, BranchPoint
from bifurcade.core.report import (
    SCHEMA_VERSION,
    TIMESTAMP_KEY,
    build_report,
    diagram_tables,
    dumps,
    emit_diagram,
    write_csv,
    write_json,
)
from bifurcade.exceptions import InvalidArgument


def make_branch(lambdas, termination=Termination.param_boundary):
    points = [
        BranchPoint(lam=lam, a=[0.1 * i, 0.0], v_norm=0.1 * i, n_unstable=0, arclength=0.1 * i)
        for i, lam in enumerate(lambdas)
    ]
    return Branch(lambda0=lambdas[0], points=points, termination=termination, termination_value=lambdas[-1])


def test_build_report():
    report = build_report('detect', {'lambda_lo': 0.0}, {'crossings': []})
    assert report['status'] == 'ok'
    assert report['schema'] == SCHEMA_VERSION
    assert report['bifurcade_version'] == __version__
    assert report['diagnostics'] is None
    assert TIMESTAMP_KEY in report
    failed = build_report('index', {}, None, {'error': 'PersistentTangency'})
    assert failed['status'] == 'failed'
    assert failed['result'] is None


def test_dumps_is_deterministic():
    document = {'b': np.float64(1.5), 'a': [np.int64(2), np.array([1.0, 2.0])]}
    text = dumps(document)
    assert text == dumps(dict(reversed(list(document.items()))))
    assert json.loads(text) == {'a': [2, [1.0, 2.0]], 'b': 1.5}
    assert text.index('"a"') < text.index('"b"')


def test_write_json(tmp_path):
    path = write_json({'value': 1}, tmp_path / "nested" / "report.json")
    assert json.loads(path.read_text()) == {'value': 1}


def test_write_csv(tmp_path):
    path = write_csv(['lambda', 'v_norm'], [[1.0, 0.0], [1.5, 0.25]], tmp_path / "table.csv")
    assert path.read_text() == "lambda,v_norm\n1.0,0.0\n1.5,0.25\n"


def test_diagram_tables():
    tables = diagram_tables([make_branch([1.0, 1.1, 1.2]), make_branch([4.0, 4.1])])
    assert sorted(tables) == ['branch_0.csv', 'branch_1.csv', 'diagram.csv']
    header, rows = tables['branch_0.csv']
    assert header == ['lambda', 'arclength', 'v_norm', 'a_1', 'a_2', 'n_unstable']
    assert len(rows) == 3
    header, rows = tables['diagram.csv']
    assert header == ['lambda', 'v_norm', 'n_unstable', 'branch_id']
    assert [row[-1] for row in rows] == [0, 0, 0, 1, 1]
    with pytest.raises(InvalidArgument):
        diagram_tables([])


def test_emit_diagram(tmp_path):
    written = emit_diagram([make_branch([1.0, 1.1])], tmp_path)
    assert sorted(p.name for p in written) == ['branch_0.csv', 'diagram.csv']
    assert (tmp_path / "diagram.csv").read_text().splitlines()[1] == "1.0,0.0,0,0"


def test_branch_document_names_alternative():
    document = make_branch([1.0, 1.1], Termination.reconnect).to_document()
    assert document['alternative'] == 'reconnects_trivial'
    assert document['termination'] == Termination.reconnect.value
