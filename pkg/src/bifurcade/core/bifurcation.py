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

"""Local bifurcation at a crossing, read off the reduced field on the center manifold."""
import math
from logging import getLogger
from typing import Any, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import solve_ivp
from scipy.spatial.distance import cdist

from bifurcade._enum import SetKind, Stability, StaticAlternative, Verdict
from bifurcade.configuration import config
from bifurcade.core.base import Base
from bifurcade.core.center_manifold import (
    ReducedField,
    evaluate_reduced,
    lift,
    reduced_jacobian,
    sphere_points,
)
from bifurcade.core.conley import ConleyIndex, block_index, reduced_field_at, suspend, wedge
from bifurcade.core.model import SpectralModel
from bifurcade.core.spectrum import CrossingData
from bifurcade.exceptions import InvalidArgument, NoInvariantSetFound, WrongArity
from bifurcade.utils.polynomials import PolynomialMap

logger = getLogger(__name__)

COEFFICIENT_TOLERANCE = 1e-10
STABILITY_THRESHOLD = 1e-8
DEDUPLICATION_RADIUS = 1e-6
EQUILIBRIUM_TOLERANCE = 1e-9
RADIAL_DIRECTIONS = 360
NEWTON_SEEDS = 32
SPHERE_RAYS = 64
BISECTION_STEPS = 20


class TrivialClassification(Base):
    """Whether the origin attracts or repels on the center manifold at the bifurcation value."""

    verdict: Verdict
    witness: Dict[str, Any] = {}
    order_used: int


class EquilibriumPoint(Base):
    w: List[float]
    stability: Stability
    eigenvalues: List[float]


class InvariantSetReport(Base):
    """The bifurcating invariant set K_lambda in reduced coordinates."""

    lam: float
    nu: float
    kind: SetKind
    points: List[EquilibriumPoint] = []
    sphere_samples: List[List[float]] = []
    lifted_points: List[List[float]] = []
    d_H_to_zero: float = 0.0
    note: str = ''

    @property
    def empty(self) -> bool:
        return self.kind == SetKind.empty

    def samples(self) -> np.ndarray:
        """All computed points of K_lambda (equilibria and sphere samples)."""
        rows = [p.w for p in self.points] + self.sphere_samples
        if not rows:
            return np.zeros((0, 1))
        return np.array(rows, dtype=float)


def hausdorff_semidistance(set_a: Sequence[Sequence[float]], set_b: Sequence[Sequence[float]]) -> float:
    """sup over A of the distance to B, with d(empty, B) = 0."""
    a = np.asarray(set_a, dtype=float)
    if a.size == 0:
        return 0.0
    b = np.asarray(set_b, dtype=float)
    if b.size == 0:
        return math.inf
    a = a.reshape(a.shape[0], -1)
    b = b.reshape(b.shape[0], -1)
    return float(cdist(a, b).min(axis=1).max())


def _radial(reduced: ReducedField, part, directions: np.ndarray) -> np.ndarray:
    return np.sum(directions * PolynomialMap(part, reduced.n)(directions), axis=1)


def _ring_check(reduced: ReducedField, verdict: Verdict, radius: float = 0.05, t_end: float = 200.0) -> bool:
    """Integrate the reduced flow at nu = 0 from a ring and check it moves the expected way."""
    ring = sphere_points(reduced.n, radius, 16)
    sign = 1.0 if verdict == Verdict.attractor else -1.0

    def rhs(_t, y):
        return sign * evaluate_reduced(reduced, 0.0, y.reshape(ring.shape)).ravel()

    solution = solve_ivp(rhs, (0.0, t_end), ring.ravel(), method=config.integrator_method.value, rtol=1e-9)
    final = solution.y[:, -1].reshape(ring.shape)
    return bool(np.all(np.linalg.norm(final, axis=1) < radius))


def classify_trivial(reduced: ReducedField, tol: float = COEFFICIENT_TOLERANCE) -> TrivialClassification:
    """
    Attractor, repeller or neither for the origin of the reduced field at nu = 0.

    One center mode uses the lowest nonvanishing coefficient. Two center modes use the radial
    component of the leading homogeneous part over a circle of directions; directions where it
    vanishes are settled by the next degrees up to the reduction order.
    """
    if reduced.n > 2:
        raise InvalidArgument(f"Classification supports crossing numbers 1 and 2, got {reduced.n}")
    degree, parts = reduced.lowest_degree_terms(tol)
    if degree is None:
        logger.warning(f"Reduced field at lambda0={reduced.lambda0:g} vanishes through order {reduced.order}")
        return TrivialClassification(
            verdict=Verdict.unresolved, witness={'vanishes_through': reduced.order}, order_used=reduced.order
        )
    if reduced.n == 1:
        coefficient = parts[0].get((degree,), 0.0)
        if degree % 2 == 0:
            verdict = Verdict.neither
        else:
            verdict = Verdict.attractor if coefficient < 0 else Verdict.repeller
        witness: Dict[str, Any] = {'degree': degree, 'coefficient': coefficient}
    else:
        angles = np.linspace(0.0, 2.0 * np.pi, RADIAL_DIRECTIONS, endpoint=False)
        directions = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        radial = _radial(reduced, parts, directions)
        unresolved = np.abs(radial) <= tol
        higher = degree + 1
        while unresolved.any() and higher <= reduced.order:
            part = [{m: c for m, c in comp.items() if sum(m) == higher} for comp in reduced.coeffs]
            extra = _radial(reduced, part, directions)
            fill = unresolved & (np.abs(extra) > tol)
            radial = np.where(fill, extra, radial)
            unresolved &= ~fill
            higher += 1
        witness = {
            'degree': degree,
            'radial_min': float(radial.min()),
            'radial_max': float(radial.max()),
            'directions': RADIAL_DIRECTIONS,
        }
        if np.any(radial > tol) and np.any(radial < -tol):
            verdict = Verdict.neither
        elif unresolved.any():
            verdict = Verdict.unresolved
        else:
            verdict = Verdict.attractor if radial.max() < 0 else Verdict.repeller
    if verdict in (Verdict.attractor, Verdict.repeller):
        witness['ring_confirmed'] = _ring_check(reduced, verdict)
        if not witness['ring_confirmed']:
            logger.warning(f"Ring integration does not confirm {verdict.value} at lambda0={reduced.lambda0:g}")
    logger.info(f"Origin at lambda0={reduced.lambda0:g} classified as {verdict.value}")
    return TrivialClassification(verdict=verdict, witness=witness, order_used=reduced.order)


def _stability(eigenvalues: np.ndarray) -> Stability:
    if np.all(eigenvalues < -STABILITY_THRESHOLD):
        return Stability.stable
    if np.any(eigenvalues > STABILITY_THRESHOLD):
        return Stability.unstable
    return Stability.degenerate


def _equilibrium(reduced: ReducedField, nu: float, w: np.ndarray) -> EquilibriumPoint:
    eigenvalues = np.linalg.eigvals(reduced_jacobian(reduced, nu, w)).real
    return EquilibriumPoint(w=list(map(float, w)), stability=_stability(eigenvalues), eigenvalues=sorted(eigenvalues))


def _deduplicate(points: np.ndarray) -> np.ndarray:
    kept: List[np.ndarray] = []
    for point in points:
        if all(np.linalg.norm(point - other) > DEDUPLICATION_RADIUS for other in kept):
            kept.append(point)
    return np.array(kept).reshape(len(kept), points.shape[1])


def _scalar_equilibria(reduced: ReducedField, nu: float, half_width: float) -> Optional[np.ndarray]:
    """Nonzero real roots of F(w)/w in [-h, h]; None when F vanishes identically."""
    q = np.zeros(reduced.order)
    q[0] = reduced.unfolding[0] * nu
    for (degree,), coefficient in reduced.coeffs[0].items():
        q[degree - 1] += coefficient
    q = np.trim_zeros(q, 'b')
    if q.size == 0 or np.all(np.abs(q) <= COEFFICIENT_TOLERANCE):
        return None
    if q.size == 1:
        return np.zeros((0, 1))
    roots = P.polyroots(q)
    real = roots[np.abs(roots.imag) <= 1e-7 * np.maximum(1.0, np.abs(roots))].real
    polished = []
    for root in real:
        for _ in range(5):
            slope = float(reduced_jacobian(reduced, nu, [root])[0, 0])
            if abs(slope) <= STABILITY_THRESHOLD:
                break
            root = root - float(evaluate_reduced(reduced, nu, [root])[0]) / slope
        if DEDUPLICATION_RADIUS < abs(root) <= half_width:
            polished.append(root)
    return _deduplicate(np.sort(np.array(polished)).reshape(-1, 1))


def _planar_equilibria(reduced: ReducedField, nu: float, half_width: float) -> np.ndarray:
    """Newton from a uniform grid of seeds, keeping converged nonzero points inside the box."""
    axis = np.linspace(-half_width, half_width, NEWTON_SEEDS)
    points = np.stack([grid.ravel() for grid in np.meshgrid(axis, axis, indexing='ij')], axis=1)
    with np.errstate(all='ignore'):
        for _ in range(60):
            values = evaluate_reduced(reduced, nu, points)
            step = np.einsum('mij,mj->mi', np.linalg.pinv(reduced_jacobian(reduced, nu, points)), values)
            points = points - step
            points[~np.all(np.isfinite(points), axis=1)] = 10.0 * half_width
        residual = np.linalg.norm(evaluate_reduced(reduced, nu, points), axis=1)
    keep = (
        (residual <= 1e-12)
        & np.all(np.abs(points) <= half_width, axis=1)
        & (np.linalg.norm(points, axis=1) > DEDUPLICATION_RADIUS)
    )
    return _deduplicate(points[keep])


def basin_boundary(
    reduced: ReducedField,
    nu: float,
    half_width: float,
    reverse: bool,
    rays: int = SPHERE_RAYS,
    iterations: int = BISECTION_STEPS,
) -> Optional[np.ndarray]:
    """
    Boundary of the basin of the origin along `rays` directions by radial bisection.

    The field is divided by 1 + |w|^(order-1), which keeps the orbits and prevents blow-up.
    A start point counts as inside when its radius has decreased at the end of the run.
    Returns None when the outer radius is itself inside the basin on some ray.
    """
    directions = sphere_points(2, 1.0, rays)
    rate = abs(nu) * max(abs(u) for u in reduced.unfolding)
    t_end = 4.0 / rate
    sign = -1.0 if reverse else 1.0
    power = reduced.order - 1

    def rhs(_t, y):
        points = y.reshape(rays, 2)
        scale = 1.0 + np.sum(points**2, axis=1) ** (power / 2.0)
        return (sign * evaluate_reduced(reduced, nu, points) / scale[:, None]).ravel()

    def inside(radii: np.ndarray) -> np.ndarray:
        start = radii[:, None] * directions
        solution = solve_ivp(
            rhs, (0.0, t_end), start.ravel(), method=config.integrator_method.value, rtol=1e-10, atol=1e-13
        )
        final = solution.y[:, -1].reshape(rays, 2)
        return np.linalg.norm(final, axis=1) < radii

    lo, hi = np.zeros(rays), np.full(rays, half_width)
    if inside(hi).any():
        return None
    for _ in range(iterations):
        middle = 0.5 * (lo + hi)
        flags = inside(middle)
        lo = np.where(flags, middle, lo)
        hi = np.where(flags, hi, middle)
    return 0.5 * (lo + hi)[:, None] * directions


def _check_nu(crossing: CrossingData, nu: float) -> None:
    if crossing.half_width is not None and abs(nu) > crossing.half_width:
        raise InvalidArgument(
            f"|lambda - lambda0| = {abs(nu):g} exceeds the trusted half width {crossing.half_width:g} "
            f"around lambda0={crossing.lambda0:g}"
        )


def predicted_nonempty(classification: TrivialClassification, reduced: ReducedField, nu: float) -> bool:
    """Whether the local theory guarantees a nonempty bifurcating set at this nu."""
    if nu == 0.0:
        return False
    growth = float(np.mean(reduced.unfolding)) * nu
    if classification.verdict == Verdict.attractor:
        return growth > 0
    if classification.verdict == Verdict.repeller:
        return growth < 0
    return classification.verdict == Verdict.neither


def bifurcating_set(
    model: SpectralModel,
    crossing: CrossingData,
    reduced: ReducedField,
    lam: float,
    box_half_width: float = 1.0,
    classification: Optional[TrivialClassification] = None,
) -> InvariantSetReport:
    """Equilibria and, in the attractor/repeller case, the invariant sphere of the reduced field at lam."""
    if reduced.n > 2:
        raise InvalidArgument(f"Bifurcating sets are computed for crossing numbers 1 and 2, got {reduced.n}")
    nu = lam - crossing.lambda0
    _check_nu(crossing, nu)
    classification = classification or classify_trivial(reduced)
    sphere_side = predicted_nonempty(classification, reduced, nu) and classification.verdict in (
        Verdict.attractor,
        Verdict.repeller,
    )
    note = ''
    sphere: Optional[np.ndarray] = None
    if reduced.n == 1:
        found = _scalar_equilibria(reduced, nu, box_half_width)
        if found is None:
            logger.warning(f"Reduced field vanishes identically at lambda={lam:g}")
            return InvariantSetReport(lam=lam, nu=nu, kind=SetKind.unresolved, note="reduced field vanishes")
        points = [_equilibrium(reduced, nu, w) for w in found]
        if sphere_side and len(found):
            negative, positive = found[found[:, 0] < 0], found[found[:, 0] > 0]
            ends = ([negative[-1]] if len(negative) else []) + ([positive[0]] if len(positive) else [])
            sphere = np.array(ends)
    else:
        found = _planar_equilibria(reduced, nu, box_half_width)
        points = [_equilibrium(reduced, nu, w) for w in found]
        if sphere_side:
            reverse = classification.verdict == Verdict.attractor
            sphere = basin_boundary(reduced, nu, box_half_width, reverse=reverse)
            if sphere is None:
                note = "basin boundary not bracketed inside the box"
            else:
                isolated = [p for p in points if p.stability != Stability.degenerate]
                if len(isolated) < len(points):
                    note = "non-isolated equilibria on the sphere omitted"
                points = isolated
    if classification.verdict == Verdict.unresolved:
        kind = SetKind.unresolved
    elif reduced.n == 2 and sphere is not None:
        kind = SetKind.sphere
    elif points:
        kind = SetKind.points
    else:
        kind = SetKind.empty
    if kind == SetKind.empty and predicted_nonempty(classification, reduced, nu):
        raise NoInvariantSetFound(
            f"Expected a nonempty bifurcating set at lambda={lam:g} ({classification.verdict.value})",
            {'lambda': lam, 'nu': nu, 'verdict': classification.verdict.value},
        )
    report = InvariantSetReport(
        lam=lam,
        nu=nu,
        kind=kind,
        points=points,
        sphere_samples=[] if sphere is None else sphere.tolist(),
        lifted_points=[lift(model, reduced, p.w).tolist() for p in points],
        note=note,
    )
    distance = hausdorff_semidistance(report.samples(), np.zeros((1, reduced.n)))
    report = report.copy(update={'d_H_to_zero': distance})
    logger.info(f"Bifurcating set at lambda={lam:g}: {kind.value} with {len(points)} equilibria")
    return report


def _clusters(points: np.ndarray) -> List[List[int]]:
    graph = nx.Graph()
    graph.add_nodes_from(range(len(points)))
    norms = np.linalg.norm(points, axis=1)
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if np.linalg.norm(points[i] - points[j]) < 0.25 * min(norms[i], norms[j]):
                graph.add_edge(i, j)
    return [sorted(component) for component in nx.connected_components(graph)]


def index_of_bifurcating_set(
    model: SpectralModel,
    crossing: CrossingData,
    reduced: ReducedField,
    lam: float,
    box_half_width: float = 1.0,
    report: Optional[InvariantSetReport] = None,
    grid: int = 8,
) -> Tuple[ConleyIndex, bool]:
    """
    Conley index of K_lambda in the full system, via blocks in reduced coordinates.

    Separated equilibria get one block each and the indices are wedged; an invariant sphere gets
    one annular block that leaves out a neighbourhood of the origin. The reduced index is then
    suspended by the unstable dimension m.
    """
    report = report or bifurcating_set(model, crossing, reduced, lam, box_half_width)
    if report.kind in (SetKind.empty, SetKind.unresolved):
        raise InvalidArgument(f"No bifurcating set to index at lambda={lam:g} ({report.kind.value})")
    field = reduced_field_at(reduced, report.nu)
    if reduced.n == 1:
        coordinates = np.sort(np.array([p.w[0] for p in report.points]))
        others = np.concatenate([coordinates, [0.0]])
        indices = []
        for x in coordinates:
            gap = np.abs(others - x)
            delta = 0.5 * float(gap[gap > 0].min())
            indices.append(block_index(field, [(x - delta, x + delta)], grid)[0])
        reduced_index = wedge(*indices)
    elif report.kind == SetKind.sphere:
        radii = np.linalg.norm(np.array(report.sphere_samples), axis=1)
        inner = 0.5 * float(radii.min()) / math.sqrt(2.0)
        outer = 1.5 * float(radii.max())
        reduced_index, _ = block_index(field, [(-outer, outer)] * 2, grid, hole=[(-inner, inner)] * 2)
    else:
        points = np.array([p.w for p in report.points])
        indices = []
        for members in _clusters(points):
            cluster = points[members]
            rest = np.concatenate([np.delete(points, members, axis=0), np.zeros((1, 2))])
            delta = 0.25 * float(cdist(cluster, rest).min())
            lo, hi = cluster.min(axis=0) - delta, cluster.max(axis=0) + delta
            indices.append(block_index(field, list(zip(lo, hi)), grid)[0])
        reduced_index = wedge(*indices)
    index = suspend(reduced_index, crossing.m)
    logger.info(f"Index of the bifurcating set at lambda={lam:g}: {index.label}")
    return index, not index.trivial


def classify_static_n1(
    model: SpectralModel,
    crossing: CrossingData,
    reduced: ReducedField,
    classification: Optional[TrivialClassification] = None,
) -> StaticAlternative:
    """Which of the three one-dimensional alternatives the reduced field realizes."""
    if crossing.n != 1:
        raise WrongArity(f"Static alternatives need crossing number 1, got {crossing.n}")
    classification = classification or classify_trivial(reduced)
    if classification.verdict == Verdict.unresolved:
        logger.warning(
            f"Reduced field of {model.label} vanishes through order {reduced.order}; "
            "accumulating equilibria are suggested, not proven"
        )
        return StaticAlternative.accumulating
    if classification.verdict == Verdict.neither:
        return StaticAlternative.two_sided
    return StaticAlternative.one_sided
