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
from hypothesis import given, settings
from pydantic import ValidationError

from bifurcade._enum import TrajectoryStatus
from bifurcade.core.model import (
    SpectralModel,
    build_cahn_hilliard_1d,
    check_cube_integral,
    cosine_product_counts,
    integrate,
    is_symmetric,
    jacobian,
    lyapunov_gradient,
    lyapunov_value,
    steady_state,
    v_norm,
    vector_field,
)
from bifurcade.exceptions import InvalidArgument, InvalidModel, InvalidState, Unsupported
from tests.strategies.models import small_states


def test_cahn_hilliard_linear_part(pitchfork_model):
    assert np.allclose(pitchfork_model.mu, np.arange(1, 9) ** 2)
    assert np.allclose(pitchfork_model.beta(0.0), np.arange(1, 9) ** 4)
    assert np.allclose(pitchfork_model.beta(1.0)[0], 0.0)
    assert np.allclose(pitchfork_model.linear_c1, pitchfork_model.mu)


def test_cahn_hilliard_cubic_coefficients(pitchfork_model):
    # e_1^3 projects onto e_1 with 3/4 and onto e_3 with 1/4
    C = pitchfork_model.C
    assert C[0, 0, 0, 0] == pytest.approx(-0.75)
    assert C[2, 0, 0, 0] == pytest.approx(-9.0 / 4.0)
    assert np.allclose(pitchfork_model.Q, 0.0)


def test_cahn_hilliard_quadratic_coefficients():
    model = build_cahn_hilliard_1d(math.pi, 1.0, 1.0, 4)
    assert model.Q[1, 0, 0] == pytest.approx(-2.0)
    assert model.Q[0, 0, 1] == pytest.approx(-0.5)
    assert model.Q[0, 0, 1] == model.Q[0, 1, 0]


@pytest.mark.parametrize("kwargs", [dict(L=-1.0), dict(b3=0.0), dict(N=2)])
def test_cahn_hilliard_rejects_bad_parameters(kwargs):
    params = dict(L=math.pi, b2=0.0, b3=1.0, N=6)
    params.update(kwargs)
    with pytest.raises(InvalidModel):
        build_cahn_hilliard_1d(**params)


def test_cosine_product_counts():
    counts = cosine_product_counts(3, 3)
    assert counts[0, 0, 1] == 1
    assert counts[1, 0, 0] == 1
    assert counts[0, 0, 0] == 0
    assert cosine_product_counts(4, 1)[0, 0, 0, 0] == 3


def test_cube_integrals(pitchfork_model):
    # integral of cos(kx)^3 over [0, pi] vanishes for every k
    for k in range(1, 4):
        assert check_cube_integral(pitchfork_model, k) == 0.0
    with pytest.raises(InvalidArgument):
        check_cube_integral(pitchfork_model, 0)


def test_model_validation():
    base = dict(mu=[1.0, 2.0], linear=[[1.0, -1.0], [2.0, 0.0]], Q=np.zeros((2, 2, 2)), C=np.zeros((2, 2, 2, 2)))
    model = SpectralModel(**base)
    assert model.dim == 2
    with pytest.raises(ValidationError):
        SpectralModel(**{**base, 'mu': [2.0, 1.0]})
    with pytest.raises(ValidationError):
        SpectralModel(**{**base, 'mu': [0.0, 1.0]})
    with pytest.raises(ValidationError):
        SpectralModel(**{**base, 'Q': np.zeros((3, 3, 3))})
    asymmetric = np.zeros((2, 2, 2))
    asymmetric[0, 0, 1] = 1.0
    with pytest.raises(ValidationError):
        SpectralModel(**{**base, 'Q': asymmetric})


def test_model_is_frozen(pitchfork_model):
    with pytest.raises(TypeError):
        pitchfork_model.label = 'other'
    with pytest.raises(ValueError):
        pitchfork_model.mu[0] = 3.0


def test_is_symmetric():
    tensor = np.zeros((2, 2, 2))
    tensor[0, 0, 1] = tensor[0, 1, 0] = 1.0
    assert is_symmetric(tensor, lower=True)
    assert not is_symmetric(tensor)


def test_state_shape_is_checked(pitchfork_model):
    with pytest.raises(InvalidState):
        vector_field(pitchfork_model, 1.0, [0.0, 0.0])


def test_vector_field_at_origin(pitchfork_model):
    assert np.allclose(vector_field(pitchfork_model, 3.0, np.zeros(8)), 0.0)
    assert np.allclose(jacobian(pitchfork_model, 3.0, np.zeros(8)), -np.diag(pitchfork_model.beta(3.0)))


@settings(deadline=None, max_examples=25)
@given(small_states(8))
def test_jacobian_matches_finite_differences(pitchfork_model, state):
    lam = 2.0
    analytic = jacobian(pitchfork_model, lam, state)
    eps = 1e-6
    numeric = np.empty_like(analytic)
    for j in range(8):
        shift = np.zeros(8)
        shift[j] = eps
        numeric[:, j] = (
            vector_field(pitchfork_model, lam, state + shift) - vector_field(pitchfork_model, lam, state - shift)
        ) / (2 * eps)
    assert np.allclose(analytic, numeric, atol=1e-5)


@settings(deadline=None, max_examples=15)
@given(small_states(4))
def test_lyapunov_gradient_matches_finite_differences(state):
    model = build_cahn_hilliard_1d(math.pi, 0.5, 1.0, 4)
    lam = 1.5
    gradient = lyapunov_gradient(model, lam, state)
    eps = 1e-6
    for j in range(4):
        shift = np.zeros(4)
        shift[j] = eps
        numeric = (lyapunov_value(model, lam, state + shift) - lyapunov_value(model, lam, state - shift)) / (2 * eps)
        assert numeric == pytest.approx(gradient[j], abs=1e-5)


def test_lyapunov_value_custom(reconnect_model):
    assert lyapunov_value(reconnect_model, 1.0, [0.5, 0.0]) == pytest.approx(0.015625)
    assert lyapunov_value(reconnect_model, 1.5, [0.5, 0.0]) == pytest.approx(-0.015625)


def test_lyapunov_decreases_along_trajectory():
    model = build_cahn_hilliard_1d(math.pi, 0.5, 1.0, 4)
    a0 = 0.1 * np.random.default_rng(2).standard_normal(4)
    trajectory = integrate(model, 2.5, a0, 20.0, tolerance=1e-10, samples=40)
    assert trajectory.status == TrajectoryStatus.completed
    values = [lyapunov_value(model, 2.5, state) for state in trajectory.states]
    assert all(after <= before + 1e-10 for before, after in zip(values[:-1], values[1:]))
    assert values[-1] < values[0]


def test_lyapunov_needs_gradient_info(transcritical_model):
    with pytest.raises(Unsupported):
        lyapunov_value(transcritical_model, 0.0, [0.1, 0.0])


def test_v_norm(pitchfork_model):
    a = np.zeros(8)
    a[1] = 0.5
    assert v_norm(pitchfork_model, a) == pytest.approx(1.0)


def test_integrate_decays_below_crossing(pitchfork_model):
    a0 = np.full(8, 1e-2)
    trajectory = integrate(pitchfork_model, 0.5, a0, 20.0, samples=20)
    assert trajectory.status == TrajectoryStatus.completed
    assert np.linalg.norm(trajectory.final) < 1e-3
    assert trajectory.times[-1] == pytest.approx(20.0)


@pytest.mark.slow
def test_steady_state_reaches_pitchfork_branch(pitchfork_model):
    a0 = np.zeros(8)
    a0[0] = 0.1
    trajectory = steady_state(pitchfork_model, 1.1, a0, t_max=400.0)
    assert trajectory.status == TrajectoryStatus.steady
    assert trajectory.final[0] == pytest.approx(math.sqrt(0.4 / 3.0), rel=2e-2)


def test_integrate_detects_blowup():
    model = build_cahn_hilliard_1d(math.pi, 0.0, 1.0, 4)
    unstable = model.copy(update={'C': -model.C})
    a0 = np.zeros(4)
    a0[0] = 1.0
    trajectory = integrate(unstable, 0.5, a0, 50.0, blowup_bound=1e3)
    assert trajectory.status == TrajectoryStatus.diverged


def test_integrate_rejects_bad_arguments(pitchfork_model):
    with pytest.raises(InvalidArgument):
        integrate(pitchfork_model, 1.0, np.zeros(8), -1.0)
