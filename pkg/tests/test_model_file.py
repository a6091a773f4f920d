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

import numpy as np
import pytest
import yaml
from hypothesis import given, settings

from bifurcade.core.model_file import ModelDescription, build_custom, dump_model_file, load_model_file
from bifurcade.exceptions import InvalidModel
from tests.strategies.models import model_descriptions


def test_load_circle(circle_model):
    assert circle_model.dim == 2
    # the a_1 a_2^2 monomial in the equation of mode 1 is spread over two orderings
    assert circle_model.C[0, 1, 1, 0] == pytest.approx(-1.0 / 3.0)
    w = np.array([0.3, 0.4])
    assert np.allclose(circle_model.nonlinearity(w), -0.25 * w)


def test_load_reconnect(reconnect_model):
    assert not reconnect_model.is_affine
    assert reconnect_model.beta(1.0)[0] == pytest.approx(0.0)
    assert reconnect_model.beta(2.0)[0] == pytest.approx(0.0)
    assert reconnect_model.beta(1.5)[1] == pytest.approx(5.0)
    assert reconnect_model.gradient_info is not None


def test_load_malformed(example_dir):
    with pytest.raises(InvalidModel):
        load_model_file(example_dir / "malformed.yaml")


def test_load_missing_file(tmp_path):
    with pytest.raises(InvalidModel):
        load_model_file(tmp_path / "missing.yaml")


def test_load_json(tmp_path):
    path = tmp_path / "model.json"
    path.write_text('{"dim": 1, "mu": [1.0], "linear": {"c0": [0.0], "c1": [1.0]}, "Q": [[1, 1, 1, 2.0]]}')
    model = load_model_file(path)
    assert model.Q[0, 0, 0] == 2.0


@pytest.mark.parametrize(
    "change",
    [
        {'Q': [[1, 1, 3, 1.0]]},
        {'Q': [[1, 1, 2, 1.0], [1, 2, 1, 1.0]]},
        {'C': [[1, 1, 1, 1.0]]},
        {'linear': {'c0': [1.0, 2.0]}},
        {'linear': {'c0': [1.0, 2.0], 'c1': [1.0, 1.0], 'polynomial': [[1.0], [1.0]]}},
        {'extra_key': 1},
        {'Q_dense': np.zeros((2, 2, 2)).tolist(), 'Q': [[1, 1, 1, 1.0]]},
        {'Q_dense': [[[0.0, 0.0], [0.0]], [[0.0, 0.0], [0.0, 0.0]]]},
        {'C_dense': [[[['x', 0.0]] * 2] * 2] * 2},
    ],
)
def test_invalid_descriptions(change):
    document = {'dim': 2, 'mu': [1.0, 2.0], 'linear': {'c0': [1.0, 2.0], 'c1': [1.0, 0.0]}}
    document.update(change)
    with pytest.raises(InvalidModel):
        build_custom(document)


def test_dense_tensors():
    dense = np.zeros((2, 2, 2))
    dense[0, 0, 1] = dense[0, 1, 0] = 0.5
    model = build_custom(
        {'dim': 2, 'mu': [1.0, 2.0], 'linear': {'c0': [1.0, 2.0], 'c1': [1.0, 0.0]}, 'Q_dense': dense.tolist()}
    )
    assert np.allclose(model.Q, dense)
    dense[0, 1, 0] = 0.0
    with pytest.raises(InvalidModel):
        build_custom(
            {'dim': 2, 'mu': [1.0, 2.0], 'linear': {'c0': [1.0, 2.0], 'c1': [1.0, 0.0]}, 'Q_dense': dense.tolist()}
        )


def test_gradient_structure_is_checked():
    document = {
        'dim': 2,
        'mu': [1.0, 2.0],
        'linear': {'c0': [1.0, 2.0], 'c1': [1.0, 0.0]},
        'Q': [[2, 1, 1, 1.0]],
        'gradient_info': {'weights': [1.0, 1.0]},
    }
    with pytest.raises(InvalidModel):
        build_custom(document)
    document['Q'].append([1, 1, 2, 2.0])
    assert build_custom(document).gradient_info is not None


def test_description_object_is_accepted():
    description = ModelDescription(dim=1, mu=[1.0], linear={'c0': [1.0], 'c1': [1.0]})
    assert build_custom(description).dim == 1


def test_dump_reloads(tmp_path, reconnect_model):
    path = tmp_path / "dumped.yaml"
    path.write_text(yaml.safe_dump(dump_model_file(reconnect_model)))
    again = load_model_file(path)
    assert np.allclose(again.linear, reconnect_model.linear)
    assert np.allclose(again.C, reconnect_model.C)


@settings(deadline=None, max_examples=30)
@given(model_descriptions())
def test_drawn_descriptions_build(document):
    model = build_custom(document)
    assert model.dim == document['dim']
    assert np.allclose(model.linear_c1, document['linear']['c1'])
    for mode, i, j, value in document['Q']:
        assert model.Q[mode - 1, i - 1, j - 1] + model.Q[mode - 1, j - 1, i - 1] == pytest.approx(
            value if i != j else 2 * value
        )
