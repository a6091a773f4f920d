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

import math

import numpy as np
import pytest

from bifurcade.core.model import build_cahn_hilliard_1d
from bifurcade.core.model_file import build_custom
from bifurcade.core.spectrum import (
    crossing_data,
    detect_bifurcation_values,
    linear_spectrum,
    mode_roots,
    usable_crossings,
)
from bifurcade.exceptions import Degenerate, InvalidArgument


def test_linear_spectrum(pitchfork_model):
    spectrum = linear_spectrum(pitchfork_model, 0.0)
    assert [k for k, _ in spectrum] == list(range(1, 9))
    assert [beta for _, beta in spectrum] == pytest.approx([float(k**4) for k in range(1, 9)])
    with pytest.raises(InvalidArgument):
        linear_spectrum(pitchfork_model, math.inf)


def test_detect_cahn_hilliard(pitchfork_model):
    crossings = detect_bifurcation_values(pitchfork_model, 0.0, 10.0)
    assert [c.lambda0 for c in crossings] == pytest.approx([1.0, 4.0, 9.0])
    assert [c.m for c in crossings] == [0, 1, 2]
    assert all(c.n == 1 and not c.degenerate for c in crossings)
    assert [c.center_modes for c in crossings] == [[1], [2], [3]]
    assert all(c.h4_orientation == -1 for c in crossings)


def test_crossing_interval_and_gaps(pitchfork_crossing):
    # halved once from the separation 3 until the center values fit inside the gaps
    assert pitchfork_crossing.interval == pytest.approx((0.25, 1.75))
    assert pitchfork_crossing.half_width == pytest.approx(0.75)
    alpha1, alpha2, alpha3, alpha4 = pitchfork_crossing.gaps
    assert alpha2 == pytest.approx(alpha1 / 2)
    assert alpha3 == pytest.approx(alpha4 / 2)
    assert pitchfork_crossing.transversality == pytest.approx([-1.0])


def test_domain_length_moves_crossings():
    model = build_cahn_hilliard_1d(2 * math.pi, 0.0, 1.0, 6)
    crossings = detect_bifurcation_values(model, 0.0, 1.1)
    assert [c.lambda0 for c in crossings] == pytest.approx([0.25, 1.0])


def test_empty_window(pitchfork_model):
    with pytest.raises(InvalidArgument):
        detect_bifurcation_values(pitchfork_model, 2.0, 1.0)
    assert detect_bifurcation_values(pitchfork_model, 1.5, 3.5) == []


def test_simultaneous_crossing(circle_model):
    (crossing,) = detect_bifurcation_values(circle_model, 0.0, 2.0)
    assert crossing.n == 2
    assert crossing.center_modes == [1, 2]
    assert crossing.m == 0
    assert crossing.half_width == pytest.approx(1.0)


def test_polynomial_linear_part(reconnect_model):
    crossings = detect_bifurcation_values(reconnect_model, 0.0, 4.0)
    assert [c.lambda0 for c in crossings] == pytest.approx([1.0, 2.0])
    assert [c.transversality[0] for c in crossings] == pytest.approx([-1.0, 1.0])
    assert [c.h4_orientation for c in crossings] == [-1, 1]


def test_opposite_slopes_are_degenerate():
    model = build_custom({'dim': 2, 'mu': [1.0, 1.0], 'linear': {'polynomial': [[1.0, -1.0], [-1.0, 1.0]]}})
    (crossing,) = detect_bifurcation_values(model, 0.0, 2.0)
    assert crossing.degenerate
    assert crossing.n == 2
    assert usable_crossings([crossing]) == []
    assert usable_crossings([crossing], force=True) == [crossing]


def test_vanishing_mode_is_degenerate():
    model = build_custom({'dim': 1, 'mu': [1.0], 'linear': {'polynomial': [[0.0]]}})
    with pytest.raises(Degenerate):
        mode_roots(model, 0)


def test_crossing_data_requires_root(pitchfork_model):
    with pytest.raises(InvalidArgument):
        crossing_data(pitchfork_model, 2.0)


def test_mode_roots_are_polished(reconnect_model):
    assert np.allclose(mode_roots(reconnect_model, 0), [1.0, 2.0], atol=1e-12)
    assert mode_roots(reconnect_model, 1).size == 0
