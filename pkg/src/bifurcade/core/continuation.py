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

"""
Global branches of equilibria by pseudo-arclength continuation.

Unknowns are x = (a, lambda). The predictor follows the unit tangent of the solution curve of
G(a, lambda) = 0 and the corrector solves G = 0 in the hyperplane orthogonal to that tangent,
both through the bordered Jacobian [[G_a, G_lambda], [t^T]].
"""
import math
from logging import getLogger
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import root_validator, validator

from bifurcade._enum import Alternative, ProbeSide, ProbeVerdict, Termination, TrajectoryStatus
from bifurcade.core.base import Base
from bifurcade.core.center_manifold import ReducedField, lift, reduce
from bifurcade.core.model import (
    SpectralModel,
    is_odd,
    jacobian,
    lyapunov_value,
    parameter_derivative,
    steady_state,
    v_norm,
)
from bifurcade.core.spectrum import CrossingData, detect_bifurcation_values, usable_crossings
from bifurcade.exceptions import (
    BifurcadeException,
    BifurcadeNumericalError,
    InvalidArgument,
    SingularContinuation,
    SwitchFailed,
    Unsupported,
    WrongArity,
)

logger = getLogger(__name__)

STABILITY_THRESHOLD = 1e-8
ZERO_AMPLITUDE = 1e-6


class Window(Base):
    """Product window Omega = [lam_lo, lam_hi] x {v_norm <= norm_bound}."""

    lam_lo: float
    lam_hi: float
    norm_bound: float = 50.0

    @root_validator(skip_on_failure=True)
    def validate_window(cls, values):
        if not values['lam_lo'] < values['lam_hi']:
            raise ValueError(f"empty parameter window [{values['lam_lo']}, {values['lam_hi']}]")
        if values['norm_bound'] <= 0:
            raise ValueError("norm_bound must be positive")
        return values

    def contains(self, lam: float) -> bool:
        return self.lam_lo <= lam <= self.lam_hi


class StepConfig(Base):
    ds_min: float = 1e-4
    ds_max: float = 1e-1
    ds_init: float = 1e-2
    max_steps: int = 5000
    newton_tol: float = 1e-10
    max_newton: int = 12

    @root_validator(skip_on_failure=True)
    def validate_steps(cls, values):
        if not 0 < values['ds_min'] <= values['ds_init'] <= values['ds_max']:
            raise ValueError("step sizes must satisfy 0 < ds_min <= ds_init <= ds_max")
        return values


class BranchPoint(Base):
    lam: float
    a: List[float]
    v_norm: float
    n_unstable: int
    arclength: float


class Branch(Base):
    """One continued branch of equilibria and how it ended."""

    lambda0: Optional[float] = None
    origin: Optional[CrossingData] = None
    direction: int = 1
    points: List[BranchPoint] = []
    termination: Termination
    # lambda_end, norm, lambda_1 or lambda_* depending on the termination
    termination_value: Optional[float] = None
    secondary: List[float] = []
    note: str = ''

    @validator('direction')
    def validate_direction(cls, direction: int) -> int:
        if direction not in (-1, 1):
            raise ValueError("direction must be -1 or +1")
        return direction

    @property
    def alternative(self) -> Alternative:
        return {
            Termination.param_boundary: Alternative.meets_boundary,
            Termination.norm_boundary: Alternative.meets_boundary,
            Termination.reconnect: Alternative.reconnects_trivial,
            Termination.accumulate: Alternative.accumulates_at_origin,
        }.get(self.termination, Alternative.undetermined)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points])

    @property
    def states(self) -> np.ndarray:
        return np.array([p.a for p in self.points])

    def to_document(self):
        document = super().to_document()
        document['alternative'] = self.alternative.value
        return document


class TrivialSegment(Base):
    lam_lo: float
    lam_hi: float
    n_unstable: int


class TrivialBranch(Base):
    segments: List[TrivialSegment]
    breakpoints: List[CrossingData]


def unstable_count(model: SpectralModel, lam: float, a) -> int:
    eigenvalues = np.linalg.eigvals(jacobian(model, lam, a)).real
    return int(np.sum(eigenvalues > STABILITY_THRESHOLD))


def trace_trivial_branch(model: SpectralModel, lam_lo: float, lam_hi: float) -> TrivialBranch:
    """The trivial branch a = 0 split at the crossings, with the unstable count of each segment."""
    crossings = detect_bifurcation_values(model, lam_lo, lam_hi)
    cuts = [lam_lo] + [c.lambda0 for c in crossings if lam_lo < c.lambda0 < lam_hi] + [lam_hi]
    segments = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        middle = 0.5 * (lo + hi)
        segments.append(TrivialSegment(lam_lo=lo, lam_hi=hi, n_unstable=int(np.sum(model.beta(middle) < 0))))
    return TrivialBranch(segments=segments, breakpoints=crossings)


def _bordered(model: SpectralModel, lam: float, a: np.ndarray, tangent: np.ndarray) -> np.ndarray:
    top = np.hstack([jacobian(model, lam, a), parameter_derivative(model, lam, a)[:, None]])
    return np.vstack([top, tangent[None, :]])


def polish(model: SpectralModel, lam: float, a, tol: float = 1e-13, max_iterations: int = 30) -> np.ndarray:
    """Newton correction of an equilibrium at fixed lambda."""
    a = np.array(a, dtype=float)
    for _ in range(max_iterations):
        residual = model.field(lam, a)
        if np.linalg.norm(residual) <= tol:
            break
        step = np.linalg.lstsq(jacobian(model, lam, a), residual, rcond=None)[0]
        a = a - step
        if np.linalg.norm(step) <= 1e-15 * max(1.0, np.linalg.norm(a)):
            break
    return a


def _correct(
    model: SpectralModel, x: np.ndarray, tangent: np.ndarray, anchor_value: float, step: StepConfig
) -> Tuple[Optional[np.ndarray], int]:
    """Newton on [G(x); tangent . x - anchor_value] = 0; returns (solution or None, iterations)."""
    dim = x.size - 1
    for iteration in range(1, step.max_newton + 1):
        a, lam = x[:dim], x[dim]
        residual = np.append(model.field(lam, a), tangent @ x - anchor_value)
        try:
            delta = np.linalg.solve(_bordered(model, lam, a, tangent), residual)
        except np.linalg.LinAlgError:
            return None, iteration
        x = x - delta
        if not np.all(np.isfinite(x)):
            return None, iteration
        if np.linalg.norm(delta) <= 1e-13 * max(1.0, np.linalg.norm(x)):
            break
    final = np.linalg.norm(model.field(x[dim], x[:dim]))
    if final > step.newton_tol:
        return None, step.max_newton
    return x, iteration


def _tangent(model: SpectralModel, x: np.ndarray, previous: np.ndarray) -> np.ndarray:
    dim = x.size - 1
    rhs = np.zeros(dim + 1)
    rhs[-1] = 1.0
    try:
        tangent = np.linalg.solve(_bordered(model, x[dim], x[:dim], previous), rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularContinuation(
            f"Bordered Jacobian is singular at lambda={x[dim]:.10g}", {'lambda': float(x[dim]), 'reason': str(exc)}
        ) from exc
    tangent /= np.linalg.norm(tangent)
    return tangent if tangent @ previous > 0 else -tangent


def _kernel_tangent(model: SpectralModel, x: np.ndarray, direction: int) -> np.ndarray:
    dim = x.size - 1
    top = np.hstack([jacobian(model, x[dim], x[:dim]), parameter_derivative(model, x[dim], x[:dim])[:, None]])
    tangent = np.linalg.svd(top)[2][-1]
    pivot = tangent[dim] if abs(tangent[dim]) > 1e-12 else tangent[np.argmax(np.abs(tangent))]
    return tangent * direction * np.sign(pivot)


def switch_branch(
    model: SpectralModel, crossing: CrossingData, h: float, order: int = 3, reduced: Optional[ReducedField] = None
) -> Tuple[float, np.ndarray]:
    """
    First nontrivial equilibrium of the branch through a simple crossing, with center amplitude h.

    The predictor solves the reduced equation for nu at w = h and lifts w to the full space;
    the corrector is Newton on [G(a, lambda); a_c - h] = 0.
    """
    if crossing.n != 1:
        raise WrongArity(f"Branch switching needs crossing number 1, got {crossing.n}")
    if h == 0:
        raise InvalidArgument("Branch switching needs a nonzero amplitude")
    reduced = reduced or reduce(model, crossing, order)
    nonlinear = sum(c * h ** (degree - 1) for (degree,), c in reduced.coeffs[0].items())
    nu = -nonlinear / reduced.unfolding[0]
    center = crossing.center_indices[0]
    x = np.append(lift(model, reduced, [h]), crossing.lambda0 + nu)
    dim = model.dim
    selector = np.zeros(dim + 1)
    selector[center] = 1.0
    for iteration in range(20):
        a, lam = x[:dim], x[dim]
        residual = np.append(model.field(lam, a), a[center] - h)
        if np.linalg.norm(residual) <= 1e-13:
            logger.debug(f"Branch switch at lambda0={crossing.lambda0:g} converged in {iteration} iterations")
            return float(x[dim]), x[:dim]
        try:
            x = x - np.linalg.solve(_bordered(model, lam, a, selector), residual)
        except np.linalg.LinAlgError:
            break
    residual_norm = float(np.linalg.norm(model.field(x[dim], x[:dim])))
    if residual_norm <= 1e-10 and np.all(np.isfinite(x)):
        return float(x[dim]), x[:dim]
    raise SwitchFailed(
        f"Branch switching at lambda0={crossing.lambda0:g} with h={h:g} did not converge",
        {'lambda0': crossing.lambda0, 'h': h, 'predictor_nu': nu, 'residual': residual_norm},
    )


def _point(model: SpectralModel, lam: float, a: np.ndarray, arclength: float) -> BranchPoint:
    return BranchPoint(
        lam=float(lam),
        a=[float(v) for v in a],
        v_norm=v_norm(model, a),
        n_unstable=unstable_count(model, lam, a),
        arclength=arclength,
    )


def _nearest_crossing(values: Sequence[float], lo: float, hi: float, reach: float) -> Optional[float]:
    lo, hi = min(lo, hi), max(lo, hi)
    best, distance = None, math.inf
    for value in values:
        gap = max(lo - value, 0.0, value - hi)
        if gap < distance:
            best, distance = value, gap
    return best if distance <= reach else None


def continue_branch(
    model: SpectralModel,
    start: Tuple[float, Sequence[float]],
    window: Window,
    step: Optional[StepConfig] = None,
    crossing: Optional[CrossingData] = None,
    direction: int = 1,
    crossings: Optional[List[CrossingData]] = None,
) -> Branch:
    """
    Continue the branch of equilibria through `start` until it leaves the window, returns to the
    trivial branch, or runs out of steps.

    With a crossing the branch starts at (lambda0, 0) and leaves it through `start`; otherwise
    the initial direction is the kernel of [G_a, G_lambda] oriented by `direction`.
    """
    step = step or StepConfig()
    lam, a = float(start[0]), np.array(start[1], dtype=float)
    if not window.contains(lam):
        raise InvalidArgument(f"Start lambda={lam:g} lies outside [{window.lam_lo:g}, {window.lam_hi:g}]")
    residual = np.linalg.norm(model.field(lam, a))
    if residual > 1e-8:
        raise InvalidArgument(f"Start point is not an equilibrium, residual {residual:.3g}")
    if crossings is None:
        crossings = detect_bifurcation_values(model, window.lam_lo, window.lam_hi)
    values = [c.lambda0 for c in crossings]
    x = np.append(a, lam)
    points: List[BranchPoint] = []
    arclength = 0.0
    if crossing is not None:
        origin = np.append(np.zeros(model.dim), crossing.lambda0)
        points.append(_point(model, crossing.lambda0, np.zeros(model.dim), 0.0))
        secant = x - origin
        arclength = float(np.linalg.norm(secant))
        tangent = _tangent(model, x, secant / arclength)
    else:
        tangent = _kernel_tangent(model, x, direction)
    points.append(_point(model, lam, a, arclength))
    ds = step.ds_init
    termination, value, note = Termination.max_steps, None, ''
    dim = model.dim
    for _ in range(step.max_steps):
        predictor = x + ds * tangent
        corrected, iterations = _correct(model, predictor, tangent, tangent @ predictor, step)
        if corrected is None:
            ds /= 2.0
            logger.debug(f"Corrector failed at lambda={x[dim]:.6g}, halving step to {ds:.3g}")
            if ds < step.ds_min:
                note = f"step size fell below {step.ds_min:g} at lambda={x[dim]:.6g}"
                logger.warning(f"Continuation of {model.label} stalled: {note}")
                break
            continue
        previous, x = x, corrected
        arclength += float(np.linalg.norm(x - previous))
        a_prev, a_new, lam_new = previous[:dim], x[:dim], x[dim]
        if not window.contains(lam_new):
            bound = window.lam_hi if lam_new > window.lam_hi else window.lam_lo
            theta = (bound - previous[dim]) / (lam_new - previous[dim])
            a_bound = polish(model, bound, a_prev + theta * (a_new - a_prev))
            arclength -= (1.0 - theta) * float(np.linalg.norm(x - previous))
            points.append(_point(model, bound, a_bound, arclength))
            termination, value = Termination.param_boundary, bound
            break
        norm = v_norm(model, a_new)
        if np.linalg.norm(a_new) < ZERO_AMPLITUDE or a_new @ a_prev < 0:
            target = _nearest_crossing(values, previous[dim], lam_new, step.ds_max)
            if target is None:
                termination, value = Termination.accumulate, float(lam_new)
                note = "branch reached the trivial branch away from every detected crossing"
            else:
                same = crossing is not None and abs(target - crossing.lambda0) <= 1e-6
                termination = Termination.accumulate if same else Termination.reconnect
                value = target
            points.append(_point(model, value, np.zeros(dim), arclength))
            break
        points.append(_point(model, lam_new, a_new, arclength))
        if norm > window.norm_bound:
            termination, value = Termination.norm_boundary, norm
            break
        tangent = _tangent(model, x, tangent)
        if iterations <= 3:
            ds = min(1.5 * ds, step.ds_max)
    else:
        note = f"stopped after {step.max_steps} steps"
    if termination == Termination.max_steps:
        logger.warning(f"Branch of {model.label} ended without a verdict: {note}")
    nontrivial = [p for p in points if any(p.a)]
    secondary = [
        later.lam for earlier, later in zip(nontrivial[:-1], nontrivial[1:]) if later.n_unstable != earlier.n_unstable
    ]
    branch = Branch(
        lambda0=None if crossing is None else crossing.lambda0,
        origin=crossing,
        direction=direction,
        points=points,
        termination=termination,
        termination_value=value,
        secondary=secondary,
        note=note,
    )
    logger.info(
        f"Branch from lambda0={branch.lambda0} ended with {termination.value}"
        + ("" if value is None else f"({value:.10g})")
        + f" after {len(points)} points"
    )
    return branch


class BranchFailure(Base):
    lambda0: float
    direction: int
    error: str
    message: str
    details: Dict[str, Any] = {}


class GlobalReport(Base):
    """All branches from the crossings in a window with their global alternatives."""

    model: str
    window: Window
    crossings: List[CrossingData] = []
    branches: List[Branch] = []
    failures: List[BranchFailure] = []
    lambda_min: Optional[float] = None
    lambda_max: Optional[float] = None
    notes: List[str] = []

    def to_document(self):
        document = super().to_document()
        document['branches'] = [branch.to_document() for branch in self.branches]
        return document


def global_report(
    model: SpectralModel,
    window: Window,
    step: Optional[StepConfig] = None,
    order: int = 3,
    h: float = 0.05,
    directions: Sequence[int] = (1, -1),
    force: bool = False,
) -> GlobalReport:
    """
    Switch onto and continue the branch of every simple crossing in the window.

    Each crossing is left along w = +h and w = -h, the sign of h picking which half comes first.
    A crossing that an earlier branch already reconnected to is not traced again. Failures are
    collected per branch instead of aborting the report.
    """
    if h == 0:
        raise InvalidArgument("branch switching amplitude h must be nonzero")
    crossings = detect_bifurcation_values(model, window.lam_lo, window.lam_hi)
    branches: List[Branch] = []
    failures: List[BranchFailure] = []
    notes: List[str] = []
    reached: List[float] = []
    for crossing in usable_crossings(crossings, force):
        if any(abs(crossing.lambda0 - value) <= 1e-6 for value in reached):
            notes.append(f"crossing {crossing.lambda0:.10g} already reached by an earlier branch")
            continue
        if crossing.n != 1:
            notes.append(f"crossing {crossing.lambda0:.10g} has n={crossing.n}; switch manually from reduced equilibria")
            continue
        for sign in directions:
            direction = sign if h > 0 else -sign
            try:
                reduced = reduce(model, crossing, order)
                start = switch_branch(model, crossing, direction * abs(h), reduced=reduced)
                branch = continue_branch(model, start, window, step, crossing, direction, crossings)
            except BifurcadeException as exc:
                details = exc.details if isinstance(exc, BifurcadeNumericalError) else {}
                logger.warning(f"Branch from {crossing.lambda0:g} failed: {exc.msg}")
                failures.append(
                    BranchFailure(
                        lambda0=crossing.lambda0,
                        direction=direction,
                        error=type(exc).__name__,
                        message=exc.msg,
                        details=details,
                    )
                )
                continue
            branches.append(branch)
            if branch.termination == Termination.reconnect and branch.termination_value is not None:
                reached.append(branch.termination_value)
    if is_odd(model) and len(set(directions)) == 2 and branches:
        notes.append("field is odd in a: the -h branches are the reflections a -> -a of the +h ones")
    lambdas = [p.lam for branch in branches for p in branch.points]
    return GlobalReport(
        model=model.label,
        window=window,
        crossings=crossings,
        branches=branches,
        failures=failures,
        lambda_min=min(lambdas) if lambdas else None,
        lambda_max=max(lambdas) if lambdas else None,
        notes=notes,
    )


class ProbeRecord(Base):
    """One probe orbit; alpha is its start in forward time and omega its end."""

    side: ProbeSide
    mode: int
    sign: int
    status: TrajectoryStatus
    limit: Optional[List[float]] = None
    limit_residual: Optional[float] = None
    J_at_alpha: Optional[float] = None
    J_at_omega: Optional[float] = None
    monotone: bool = True


class HeteroclinicProbe(Base):
    lam: float
    found: List[ProbeRecord] = []
    verdict: ProbeVerdict
    note: str = ''


def _monotone(model: SpectralModel, lam: float, states: np.ndarray, increasing: bool) -> bool:
    values = [lyapunov_value(model, lam, state) for state in states]
    if increasing:
        values = values[::-1]
    return all(b <= a + 1e-9 * max(1.0, abs(a)) for a, b in zip(values[:-1], values[1:]))


def heteroclinic_probe(
    model: SpectralModel,
    lam: float,
    n_directions: Optional[int] = None,
    t_max: float = 200.0,
    eps: float = 1e-4,
    include_stable: bool = True,
) -> HeteroclinicProbe:
    """
    Launch orbits from eps * (+-e_k) and follow them to their limits, comparing the Lyapunov
    functional at both ends.

    Unstable modes give orbits leaving the origin (forward time); stable modes give orbits
    arriving at it (reversed time).
    """
    if model.gradient_info is None:
        raise Unsupported(f"Model {model.label!r} has no Lyapunov functional to probe with")
    beta = model.beta(lam)
    unstable = [int(k) for k in np.argsort(beta) if beta[k] < -STABILITY_THRESHOLD]
    stable = [int(k) for k in np.argsort(beta) if beta[k] > STABILITY_THRESHOLD]
    if not unstable:
        logger.info(f"The origin is stable at lambda={lam:g}, nothing to probe")
        return HeteroclinicProbe(lam=lam, verdict=ProbeVerdict.origin_stable, note="0 has no unstable direction")
    if n_directions is not None:
        unstable, stable = unstable[:n_directions], stable[:n_directions]
    zero_level = lyapunov_value(model, lam, np.zeros(model.dim))
    launches = [(ProbeSide.unstable, k) for k in unstable]
    if include_stable:
        launches += [(ProbeSide.stable, k) for k in stable]
    records = []
    for side, k in launches:
        for sign in (1, -1):
            a0 = np.zeros(model.dim)
            a0[k] = sign * eps
            reverse = side == ProbeSide.stable
            trajectory = steady_state(model, lam, a0, t_max=t_max, reverse=reverse)
            record: Dict[str, Any] = dict(side=side, mode=k + 1, sign=sign, status=trajectory.status)
            if trajectory.status == TrajectoryStatus.steady:
                limit = trajectory.final
                level = lyapunov_value(model, lam, limit)
                record.update(
                    limit=limit.tolist(),
                    limit_residual=float(np.linalg.norm(model.field(lam, limit))),
                    J_at_alpha=level if reverse else zero_level,
                    J_at_omega=zero_level if reverse else level,
                    monotone=_monotone(model, lam, trajectory.states, increasing=reverse),
                )
            elif trajectory.status == TrajectoryStatus.completed:
                record['status'] = TrajectoryStatus.diverged
                logger.debug(f"Probe from {sign * eps:g} e_{k + 1} did not settle within t_max={t_max:g}")
            records.append(ProbeRecord(**record))
    settled = [r for r in records if r.side == ProbeSide.unstable and r.status == TrajectoryStatus.steady]
    descending = bool(settled) and all(
        r.monotone and r.J_at_omega is not None and r.J_at_alpha is not None and r.J_at_omega < r.J_at_alpha
        for r in settled
    )
    verdict = ProbeVerdict.descending if descending else ProbeVerdict.inconclusive
    logger.info(f"Heteroclinic probe at lambda={lam:g}: {len(records)} orbit(s), {verdict.value}")
    return HeteroclinicProbe(lam=lam, found=records, verdict=verdict)
