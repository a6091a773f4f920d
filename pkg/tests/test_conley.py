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
from pydantic import ValidationError

from bifurcade._enum import FaceLabel
from bifurcade.core.center_manifold import reduce
from bifurcade.core.conley import (
    ConleyIndex,
    block_index,
    boundary_faces,
    build_isolating_block,
    classify_faces,
    index_at_crossing,
    index_constancy_sweep,
    relative_betti,
    suspend,
    trivial_index,
    wedge,
)
from bifurcade.core.spectrum import detect_bifurcation_values
from bifurcade.exceptions import InvalidArgument, IsolationLost, PersistentTangency

UNIT = [(-1.0, 1.0)]
SQUARE = [(-1.0, 1.0), (-1.0, 1.0)]


def linear(*rates):
    return lambda points: np.asarray(points) * np.array(rates)


def test_index_validation():
    index = ConleyIndex(betti={1: 0, 0: 2})
    assert index.betti == {0: 2}
    assert not index.trivial
    assert index.label == "Sigma^0 v Sigma^0"
    assert ConleyIndex.null().trivial
    assert ConleyIndex.null().label == "0"
    assert ConleyIndex.sigma(2) == ConleyIndex(betti={2: 1})
    with pytest.raises(ValidationError):
        ConleyIndex(betti={-1: 1})


def test_index_document():
    assert ConleyIndex.sigma(1).to_document() == {'betti': {'1': 1}, 'trivial': False, 'label': 'Sigma^1'}


def test_suspend_and_wedge():
    assert suspend(ConleyIndex.sigma(0), 2) == ConleyIndex.sigma(2)
    assert suspend(ConleyIndex.null(), 3).trivial
    assert wedge(ConleyIndex.sigma(1), ConleyIndex.sigma(1), ConleyIndex.sigma(0)).betti == {0: 1, 1: 2}
    with pytest.raises(InvalidArgument):
        suspend(ConleyIndex.sigma(0), -1)


@pytest.mark.parametrize(
    "rates,expected",
    [
        ((1.0,), {1: 1}),
        ((-1.0,), {0: 1}),
        ((1.0, 1.0), {2: 1}),
        ((-1.0, -1.0), {0: 1}),
        ((1.0, -1.0), {1: 1}),
        ((-1.0, 1.0), {1: 1}),
    ],
)
def test_hyperbolic_indices(rates, expected):
    box = UNIT if len(rates) == 1 else SQUARE
    index, block = block_index(linear(*rates), box, grid=4)
    assert index.betti == expected
    assert block.accepted
    assert block.refinements == 0


def test_face_labels_of_saddle():
    faces = classify_faces(linear(1.0, -1.0), boundary_faces(SQUARE, [2, 2]))
    exits = {(f.axis, f.normal) for f in faces if f.label == FaceLabel.exit}
    ingress = {(f.axis, f.normal) for f in faces if f.label == FaceLabel.ingress}
    assert exits == {(0, 1), (0, -1)}
    assert ingress == {(1, 1), (1, -1)}
    assert len(faces) == 8


def test_annulus_around_attracting_circle():
    def field(points):
        points = np.asarray(points)
        return points * (0.1 - np.sum(points**2, axis=1))[:, None]

    index, block = block_index(field, [(-0.5, 0.5)] * 2, grid=8, hole=[(-0.1, 0.1)] * 2)
    assert index.betti == {0: 1, 1: 1}
    assert all(face.label == FaceLabel.ingress for face in block.faces)
    assert any(face.hole for face in block.faces)


def test_rotation_has_no_isolating_box():
    rotation = lambda points: np.asarray(points)[:, ::-1] * np.array([1.0, -1.0])
    with pytest.raises(PersistentTangency) as excinfo:
        build_isolating_block(rotation, SQUARE, grid=2, max_refinements=2)
    assert excinfo.value.details['tangent_faces']


def test_geometry_is_checked():
    with pytest.raises(InvalidArgument):
        build_isolating_block(linear(1.0, 1.0), SQUARE, hole=[(-2.0, 0.5), (-0.5, 0.5)])
    with pytest.raises(InvalidArgument):
        build_isolating_block(linear(1.0), [(1.0, -1.0)])
    with pytest.raises(InvalidArgument):
        build_isolating_block(linear(1.0, 1.0, 1.0), [(-1.0, 1.0)] * 3)


def test_sweep_loses_isolation_at_zero():
    family = lambda nu: linear(nu)
    with pytest.raises(IsolationLost) as excinfo:
        index_constancy_sweep(family, -1.0, 1.0, UNIT, steps=21)
    assert excinfo.value.lam == 0.0
    sweep = index_constancy_sweep(family, -1.0, 1.0, UNIT, steps=21, strict=False)
    assert sweep.isolation_lost == [0.0]
    assert sweep.changes == [pytest.approx(0.1)]
    assert not sweep.constant


def test_sweep_constant_index():
    sweep = index_constancy_sweep(lambda nu: linear(-1.0 - nu), 0.0, 1.0, UNIT, steps=5)
    assert sweep.constant
    assert all(index == ConleyIndex.sigma(0) for _, index in sweep.samples)


def test_trivial_index(pitchfork_crossing):
    assert trivial_index(pitchfork_crossing, -1) == ConleyIndex.sigma(0)
    assert trivial_index(pitchfork_crossing, 1) == ConleyIndex.sigma(1)
    with pytest.raises(InvalidArgument):
        trivial_index(pitchfork_crossing, 0)


def test_index_at_crossing(pitchfork_model, pitchfork_crossing, transcritical_model):
    reduced = reduce(pitchfork_model, pitchfork_crossing)
    assert index_at_crossing(reduced, pitchfork_crossing) == ConleyIndex.sigma(0)
    (crossing,) = detect_bifurcation_values(transcritical_model, -1.0, 1.0)
    assert index_at_crossing(reduce(transcritical_model, crossing), crossing).trivial
