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

"""Spectral Galerkin evolution models u_t + L_lambda u = g_lambda(u) in a cosine basis."""
import math
from itertools import product
from logging import getLogger
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import ValidationError, root_validator, validator
from scipy.integrate import quad, solve_ivp
from typing_extensions import Literal

from bifurcade._enum import TrajectoryStatus
from bifurcade.configuration import config
from bifurcade.core.base import Base, as_frozen_array
from bifurcade.exceptions import InvalidArgument, InvalidModel, InvalidState, Unsupported

logger = getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12


class GradientInfo(Base):
    """
    Data that turns a model into a gradient system.

    The flow satisfies da_k/dt = -(1/weights[k]) dJ/da_k. For Cahn-Hilliard the weights are
    ||e_k||^2 / mu_k, which is the H^{-1} gradient structure of the equation.
    """

    kind: Literal['cahn_hilliard_1d', 'custom'] = 'custom'
    weights: np.ndarray
    norms: np.ndarray
    b2: float = 0.0
    b3: float = 0.0
    length: Optional[float] = None
    cube_integrals: Optional[np.ndarray] = None

    @validator('weights', 'norms', 'cube_integrals', pre=True)
    def validate_vectors(cls, value):
        if value is None:
            return value
        return as_frozen_array(value, ndim=1)

    @validator('weights')
    def validate_weights(cls, weights: np.ndarray) -> np.ndarray:
        if np.any(weights <= 0):
            raise ValueError("gradient weights must be positive")
        return weights


class SpectralModel(Base):
    """Finite mode system da/dt = -beta(lambda) a + Q(a, a) + C(a, a, a)."""

    label: str = 'model'
    mu: np.ndarray
    # beta_k(lambda) = sum_p linear[k, p] lambda**p
    linear: np.ndarray
    Q: np.ndarray
    C: np.ndarray
    gradient_info: Optional[GradientInfo] = None

    @validator('mu', pre=True)
    def validate_mu(cls, mu):
        mu = as_frozen_array(mu, ndim=1)
        if mu.size == 0:
            raise ValueError("a model needs at least one mode")
        if np.any(mu <= 0):
            raise ValueError("mu must be strictly positive")
        if np.any(np.diff(mu) < 0):
            raise ValueError("mu must be sorted non-decreasing")
        return mu

    @validator('linear', pre=True)
    def validate_linear(cls, linear):
        return as_frozen_array(linear, ndim=2)

    @validator('Q', pre=True)
    def validate_quadratic(cls, Q):
        return as_frozen_array(Q, ndim=3)

    @validator('C', pre=True)
    def validate_cubic(cls, C):
        return as_frozen_array(C, ndim=4)

    @root_validator(skip_on_failure=True)
    def validate_shapes(cls, values):
        dim = values['mu'].shape[0]
        if values['linear'].shape[0] != dim:
            raise ValueError(f"linear part has {values['linear'].shape[0]} rows for {dim} modes")
        if values['Q'].shape != (dim,) * 3:
            raise ValueError(f"Q must have shape {(dim,) * 3}, got {values['Q'].shape}")
        if values['C'].shape != (dim,) * 4:
            raise ValueError(f"C must have shape {(dim,) * 4}, got {values['C'].shape}")
        if not is_symmetric(values['Q'], lower=True):
            raise ValueError("Q must be symmetric in its lower indices")
        if not is_symmetric(values['C'], lower=True):
            raise ValueError("C must be symmetric in its lower indices")
        info = values.get('gradient_info')
        if info is not None:
            for name in ('weights', 'norms', 'cube_integrals'):
                vector = getattr(info, name)
                if vector is not None and vector.shape != (dim,):
                    raise ValueError(f"gradient_info.{name} must have {dim} entries")
            weighted_q = info.weights[:, None, None] * values['Q']
            weighted_c = info.weights[:, None, None, None] * values['C']
            if not (is_symmetric(weighted_q) and is_symmetric(weighted_c)):
                raise ValueError("not a gradient system: weighted tensors are not fully symmetric")
        return values

    @property
    def dim(self) -> int:
        return int(self.mu.shape[0])

    @property
    def is_affine(self) -> bool:
        return self.linear.shape[1] <= 2 or not np.any(self.linear[:, 2:])

    @property
    def linear_c0(self) -> np.ndarray:
        return self.linear[:, 0]

    @property
    def linear_c1(self) -> np.ndarray:
        if not self.is_affine:
            raise Unsupported(f"Model {self.label!r} has a non-affine linear part")
        if self.linear.shape[1] < 2:
            return np.zeros(self.dim)
        return -self.linear[:, 1]

    def beta(self, lam: float) -> np.ndarray:
        """Linear coefficients beta_k(lambda) of every mode."""
        return P.polyval(lam, self.linear.T)

    def beta_prime(self, lam: float) -> np.ndarray:
        return P.polyval(lam, P.polyder(self.linear.T, axis=0)) if self.linear.shape[1] > 1 else np.zeros(self.dim)

    def nonlinearity(self, a: np.ndarray) -> np.ndarray:
        return (self.Q @ a) @ a + ((self.C @ a) @ a) @ a

    def field(self, lam: float, a: np.ndarray) -> np.ndarray:
        """Unchecked vector field used inside the numerical loops."""
        return -self.beta(lam) * a + self.nonlinearity(a)


def is_odd(model: SpectralModel) -> bool:
    """True when the field has no quadratic part, so a -> -a maps equilibria to equilibria."""
    return not np.any(model.Q)


def is_symmetric(tensor: np.ndarray, lower: bool = False, tol: float = SYMMETRY_TOLERANCE) -> bool:
    """Check invariance of a tensor under permutations of all (or only the lower) indices."""
    axes = list(range(tensor.ndim))
    scale = tol * max(1.0, float(np.max(np.abs(tensor), initial=0.0)))
    if lower:
        head, rest = axes[:1], axes[1:]
        swaps = [head + rest[i:] + rest[:i] for i in range(1, len(rest))]
        swaps.append(head + rest[:-2] + rest[-2:][::-1])
    else:
        swaps = [axes[1:] + axes[:1], axes[:-2] + axes[-2:][::-1]]
    return all(np.allclose(tensor, np.transpose(tensor, swap), rtol=0.0, atol=scale) for swap in swaps)


class Trajectory(Base):
    """Sampled trajectory of the Galerkin flow at fixed lambda."""

    times: np.ndarray
    states: np.ndarray
    lam: float
    status: TrajectoryStatus = TrajectoryStatus.completed
    message: str = ''

    @validator('times', pre=True)
    def validate_times(cls, times):
        times = as_frozen_array(times, ndim=1)
        if np.any(np.diff(times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        return times

    @validator('states', pre=True)
    def validate_states(cls, states):
        return as_frozen_array(states, ndim=2)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def make_model(**kwargs) -> SpectralModel:
    try:
        return SpectralModel(**kwargs)
    except ValidationError as exc:
        raise InvalidModel(f"Invalid model {kwargs.get('label', '')!r}: {exc}") from exc


def as_state(model: SpectralModel, a) -> np.ndarray:
    array = np.asarray(a, dtype=float)
    if array.shape != (model.dim,):
        raise InvalidState(f"State has shape {array.shape} but model {model.label!r} has {model.dim} modes")
    return array


def cosine_product_counts(order: int, dim: int) -> np.ndarray:
    """
    Count the vanishing signed sums k +- i +- j (+- l) for every index tuple.

    The integral over [0, L] of a product of `order` cosines cos(k pi x / L) equals
    L / 2**(order - 1) times this count.
    """
    index = np.arange(1, dim + 1)
    grids = np.meshgrid(*([index] * order), indexing='ij')
    counts = np.zeros(grids[0].shape, dtype=int)
    for signs in product((1, -1), repeat=order - 1):
        total = grids[0] + sum(sign * grid for sign, grid in zip(signs, grids[1:]))
        counts += total == 0
    return counts


def build_cahn_hilliard_1d(L: float, b2: float, b3: float, N: int) -> SpectralModel:
    """
    Galerkin model of u_t + u_xxxx + lambda u_xx = (b2 u^2 + b3 u^3)_xx on [0, L] with Neumann
    boundary conditions and zero mean.

    Modes are the unnormalized cosines e_k = cos(k pi x / L), k = 1..N.
    """
    if L <= 0:
        raise InvalidModel(f"Domain length must be positive, got {L}")
    if b3 <= 0:
        raise InvalidModel(f"Cahn-Hilliard needs b3 > 0, got {b3}")
    if N < 3:
        raise InvalidModel(f"Cahn-Hilliard needs at least 3 modes for cubic slaving, got {N}")
    ratio = math.pi / L
    mu = (np.arange(1, N + 1) * ratio) ** 2
    # (2/L) * integral of products, i.e. projection onto e_k with ||e_k||^2 = L/2
    triple = cosine_product_counts(3, N) / 2.0
    quadruple = cosine_product_counts(4, N) / 4.0
    Q = -mu[:, None, None] * b2 * triple
    C = -mu[:, None, None, None] * b3 * quadruple
    norms = np.full(N, L / 2.0)
    info = GradientInfo(
        kind='cahn_hilliard_1d', weights=norms / mu, norms=norms, b2=b2, b3=b3, length=L
    )
    model = make_model(
        label=f"cahn_hilliard_1d(L={L:g}, b2={b2:g}, b3={b3:g}, N={N})",
        mu=mu,
        linear=np.stack([mu**2, -mu], axis=1),
        Q=Q,
        C=C,
        gradient_info=info,
    )
    logger.debug(f"Built {model.label}")
    return model


def check_cube_integral(model: SpectralModel, k: int) -> float:
    """Integral of e_k^3 over the domain; nonzero values select the two-sided local theory."""
    if not 1 <= k <= model.dim:
        raise InvalidArgument(f"Mode {k} outside 1..{model.dim}")
    info = model.gradient_info
    if info is None:
        raise Unsupported(f"Model {model.label!r} has no gradient_info")
    if info.kind == 'cahn_hilliard_1d':
        counts = cosine_product_counts(3, k)
        return float(info.length) / 4.0 * float(counts[k - 1, k - 1, k - 1])
    if info.cube_integrals is not None:
        return float(info.cube_integrals[k - 1])
    raise Unsupported(f"Model {model.label!r} declares no cube integrals")


def vector_field(model: SpectralModel, lam: float, a) -> np.ndarray:
    return model.field(lam, as_state(model, a))


def jacobian(model: SpectralModel, lam: float, a) -> np.ndarray:
    a = as_state(model, a)
    return -np.diag(model.beta(lam)) + 2.0 * (model.Q @ a) + 3.0 * ((model.C @ a) @ a)


def parameter_derivative(model: SpectralModel, lam: float, a) -> np.ndarray:
    """Derivative of the vector field with respect to lambda."""
    a = as_state(model, a)
    return -model.beta_prime(lam) * a


def v_norm(model: SpectralModel, a) -> float:
    """Weighted norm (sum mu_k a_k^2)^(1/2) used when reporting amplitudes."""
    a = as_state(model, a)
    return float(np.sqrt(np.sum(model.mu * a**2)))


def _require_gradient(model: SpectralModel) -> GradientInfo:
    if model.gradient_info is None:
        raise Unsupported(f"Model {model.label!r} has no gradient_info, the Lyapunov functional is unknown")
    return model.gradient_info


def lyapunov_gradient(model: SpectralModel, lam: float, a) -> np.ndarray:
    info = _require_gradient(model)
    return -info.weights * vector_field(model, lam, a)


def lyapunov_value(model: SpectralModel, lam: float, a) -> float:
    info = _require_gradient(model)
    a = as_state(model, a)
    if info.kind == 'cahn_hilliard_1d':
        quadratic = 0.5 * float(np.sum((model.mu - lam) * info.norms * a**2))
        length = float(info.length)
        wavenumbers = np.arange(1, model.dim + 1) * math.pi / length

        def density(x: float) -> float:
            u = float(np.dot(a, np.cos(wavenumbers * x)))
            return info.b2 / 3.0 * u**3 + info.b3 / 4.0 * u**4

        nonlinear, _ = quad(density, 0.0, length, limit=400, epsabs=1e-14, epsrel=1e-13)
        return quadratic + nonlinear
    w = info.weights
    quadratic = 0.5 * float(np.sum(w * model.beta(lam) * a**2))
    cubic = float(np.dot(w * a, (model.Q @ a) @ a)) / 3.0
    quartic = float(np.dot(w * a, ((model.C @ a) @ a) @ a)) / 4.0
    return quadratic - cubic - quartic


def integrate(
    model: SpectralModel,
    lam: float,
    a0,
    t_end: float,
    tolerance: float = 1e-9,
    samples: int = 200,
    method: Optional[str] = None,
    blowup_bound: Optional[float] = None,
    stop_at_steady: bool = False,
    steady_tolerance: float = 1e-9,
    reverse: bool = False,
) -> Trajectory:
    """
    Integrate the Galerkin ODE with an explicit embedded Runge-Kutta pair.

    The run is split into `samples` checkpoints. Leaving the ball of radius `blowup_bound`
    ends the run with status diverged; with `stop_at_steady` the run ends once the field
    norm stays below `steady_tolerance` for 3 consecutive checkpoints.
    """
    a0 = as_state(model, a0)
    if t_end <= 0 or tolerance <= 0:
        raise InvalidArgument(f"t_end and tolerance must be positive, got {t_end} and {tolerance}")
    method = method or config.integrator_method.value
    bound = blowup_bound or config.blowup_bound
    sign = -1.0 if reverse else 1.0
    rhs: Callable = lambda _t, y: sign * model.field(lam, y)

    def blowup(_t, y):
        return bound - np.linalg.norm(y)

    blowup.terminal = True  # type: ignore
    blowup.direction = -1  # type: ignore

    times, states = [0.0], [a0]
    if np.linalg.norm(a0) >= bound:
        return Trajectory(
            times=times, states=states, lam=lam, status=TrajectoryStatus.diverged, message="initial state"
        )
    status, message, quiet = TrajectoryStatus.completed, '', 0
    checkpoints = np.linspace(0.0, t_end, samples + 1)
    y = a0
    for t0, t1 in zip(checkpoints[:-1], checkpoints[1:]):
        solution = solve_ivp(
            rhs, (t0, t1), y, method=method, rtol=tolerance, atol=max(tolerance * 1e-2, 1e-14), events=blowup
        )
        if solution.t[-1] > times[-1]:
            y = solution.y[:, -1]
            times.append(float(solution.t[-1]))
            states.append(y)
        if solution.status == 1:
            status, message = TrajectoryStatus.diverged, f"norm exceeded {bound:g} at t={times[-1]:.6g}"
            logger.warning(f"Trajectory of {model.label} at lambda={lam:g} diverged: {message}")
            break
        if solution.status == -1:
            status, message = TrajectoryStatus.diverged, solution.message
            logger.warning(f"Integrator failed for {model.label} at lambda={lam:g}: {message}")
            break
        if stop_at_steady:
            quiet = quiet + 1 if np.linalg.norm(model.field(lam, y)) <= steady_tolerance else 0
            if quiet >= 3:
                status = TrajectoryStatus.steady
                break
    return Trajectory(times=times, states=states, lam=lam, status=status, message=message)


def steady_state(
    model: SpectralModel,
    lam: float,
    a0,
    t_max: float = 200.0,
    tol: float = 1e-9,
    tolerance: float = 1e-11,
    reverse: bool = False,
    samples: int = 400,
) -> Trajectory:
    """Integrate until the field norm stays below `tol` over 3 checkpoints (or t_max)."""
    return integrate(
        model,
        lam,
        a0,
        t_max,
        tolerance=tolerance,
        samples=samples,
        stop_at_steady=True,
        steady_tolerance=tol,
        reverse=reverse,
    )
