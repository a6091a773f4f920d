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
import math
from pathlib import Path

import pytest

from bifurcade._enum import Command, OutputFormat
from bifurcade.core.run import ModelSource, RunConfig, load_run_config, run, select_crossing
from bifurcade.exceptions import InvalidArgument


def test_defaults():
    run_config = RunConfig()
    assert run_config.model.builtin == 'cahn_hilliard_1d'
    assert run_config.model.L == pytest.approx(math.pi)
    assert run_config.order == 3
    assert run_config.formats == [OutputFormat.json, OutputFormat.csv]
    assert run_config.window.lam_hi == 10.0


@pytest.mark.parametrize(
    "changes",
    [
        {'order': 6},
        {'order': 1},
        {'h': 0.0},
        {'lambda_lo': 2.0, 'lambda_hi': 1.0},
        {'grid': 0},
        {'unknown': 1},
        {'step': {'ds_min': 1.0, 'ds_init': 0.1}},
    ],
)
def test_invalid_overrides(changes):
    with pytest.raises(InvalidArgument):
        load_run_config(None, changes)


def test_model_source(example_dir):
    with pytest.raises(ValueError):
        ModelSource(builtin='cahn_hilliard_1d', path=example_dir / "circle.yaml")
    with pytest.raises(ValueError):
        ModelSource(path=example_dir / "missing.yaml")
    assert ModelSource(path=example_dir / "circle.yaml").load().label == 'circle'
    assert ModelSource(N=5).load().dim == 5


def test_load_from_file(example_dir):
    run_config = load_run_config(example_dir / "run_config.yaml")
    assert run_config.lambda_hi == 1.5
    assert run_config.model.N == 6
    overridden = load_run_config(example_dir / "run_config.yaml", {'order': 5, 'lambda_hi': None})
    assert overridden.order == 5
    assert overridden.lambda_hi == 1.5


def test_model_path_replaces_builtin(example_dir):
    run_config = load_run_config(
        example_dir / "run_config.yaml", {'model': {'path': example_dir / "circle.yaml"}}
    )
    assert run_config.model.builtin is None
    assert run_config.model.path == example_dir / "circle.yaml"


def test_unreadable_config(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("- a\n- b\n")
    with pytest.raises(InvalidArgument):
        load_run_config(path)
    with pytest.raises(InvalidArgument):
        load_run_config(tmp_path / "missing.yaml")


def test_select_crossing(pitchfork_model):
    run_config = RunConfig(lambda_lo=0.0, lambda_hi=10.0, crossing=4.0)
    assert select_crossing(pitchfork_model, run_config).lambda0 == pytest.approx(4.0)
    assert select_crossing(pitchfork_model, RunConfig()).lambda0 == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        select_crossing(pitchfork_model, RunConfig(crossing=2.0))
    with pytest.raises(InvalidArgument):
        select_crossing(pitchfork_model, RunConfig(lambda_lo=1.5, lambda_hi=3.5))


def read_report(out: Path):
    return json.loads((out / "report.json").read_text())


def test_run_detect_writes_artifacts(tmp_path):
    run_config = RunConfig(model={'N': 6}, out=tmp_path)
    assert run(Command.detect, run_config) == 0
    report = read_report(tmp_path)
    assert report['status'] == 'ok'
    assert [c['lambda0'] for c in report['result']['crossings']] == pytest.approx([1.0, 4.0, 9.0], abs=1e-6)
    assert (tmp_path / "crossings.csv").read_text().startswith("lambda0,n,m,center_modes")


def test_run_is_reproducible(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    for out in (first, second):
        assert run(Command.simulate, RunConfig(model={'N': 4}, out=out, lambda_value=0.5, t_max=5.0, seed=3)) == 0
    assert (first / "trajectory.csv").read_text() == (second / "trajectory.csv").read_text()
    assert read_report(first)['result'] == read_report(second)['result']


def test_run_respects_formats(tmp_path):
    run_config = RunConfig(model={'N': 4}, out=tmp_path, formats=['csv'], lambda_value=0.0)
    assert run(Command.spectrum, run_config) == 0
    assert not (tmp_path / "report.json").exists()
    assert (tmp_path / "spectrum.csv").exists()


def test_validation_failure_writes_nothing(tmp_path):
    run_config = RunConfig(model={'N': 4}, out=tmp_path)
    assert run(Command.probe, run_config) == 2
    assert not any(tmp_path.iterdir())


def test_numerical_failure_writes_diagnostics(tmp_path):
    run_config = RunConfig(
        model={'N': 6}, out=tmp_path, lambda_lo=0.5, lambda_hi=1.5, lambda_value=1.1, box_half_width=0.1
    )
    assert run(Command.localbif, run_config) == 3
    report = read_report(tmp_path)
    assert report['status'] == 'failed'
    assert report['diagnostics']['error'] == 'NoInvariantSetFound'
    assert report['diagnostics']['details']['verdict'] == 'AttractorOnCenter'
    assert report['result'] is None
    assert not (tmp_path / "points.csv").exists()


def test_run_reduce(tmp_path):
    run_config = RunConfig(model={'N': 6}, out=tmp_path, lambda_lo=0.5, lambda_hi=1.5)
    assert run(Command.reduce, run_config) == 0
    reduced = read_report(tmp_path)['result']['reduced']
    assert reduced['field'][0] == [{'monomial': [3], 'coefficient': pytest.approx(-0.75), 'exact': '-3/4'}]
    assert reduced['slave']['3'][0]['exact'] == '-1/32'
    rows = (tmp_path / "reduced.csv").read_text().splitlines()
    assert rows[0] == "polynomial,monomial,coefficient"
    assert "F1,3,-0.75" in rows


def test_run_classify(tmp_path):
    run_config = RunConfig(model={'N': 6}, out=tmp_path, lambda_lo=0.5, lambda_hi=1.5)
    assert run(Command.classify, run_config) == 0
    result = read_report(tmp_path)['result']
    assert result['classification']['verdict'] == 'AttractorOnCenter'
    assert result['static_alternative'] == 'OneSidedTwoSolutions'
    assert result['origin_index']['label'] == 'Sigma^0'
    assert result['trivial_index_above']['label'] == 'Sigma^1'
    assert result['nontrivial_sides'] == ['above']


def test_run_global_reconnect(tmp_path, example_dir):
    run_config = RunConfig(
        model={'path': example_dir / "reconnect.yaml"}, out=tmp_path, lambda_lo=0.0, lambda_hi=4.0
    )
    assert run(Command.global_, run_config) == 0
    branches = read_report(tmp_path)['result']['global']['branches']
    assert [branch['direction'] for branch in branches] == [1, -1]
    for branch in branches:
        assert branch['alternative'] == 'reconnects_trivial'
        assert branch['termination_value'] == pytest.approx(2.0, abs=1e-6)
    rows = (tmp_path / "branch_0.csv").read_text().splitlines()
    first, last = rows[1].split(','), rows[-1].split(',')
    assert float(first[0]) == pytest.approx(1.0, abs=1e-6)
    assert float(last[0]) == pytest.approx(2.0, abs=1e-6)
    assert float(last[2]) <= 1e-6
    assert (tmp_path / "diagram.csv").exists()
    assert (tmp_path / "branch_1.csv").exists()


def test_global_run_is_reproducible(tmp_path, example_dir):
    first, second = tmp_path / "first", tmp_path / "second"
    for out in (first, second):
        run_config = RunConfig(model={'path': example_dir / "reconnect.yaml"}, out=out, lambda_lo=0.0, lambda_hi=4.0)
        assert run(Command.global_, run_config) == 0
    names = sorted(path.name for path in first.glob("*.csv"))
    assert names == ["branch_0.csv", "branch_1.csv", "diagram.csv"]
    assert names == sorted(path.name for path in second.glob("*.csv"))
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes()
    assert read_report(first)['result'] == read_report(second)['result']
