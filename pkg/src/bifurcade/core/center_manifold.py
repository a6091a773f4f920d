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
Polynomial center manifold reduction at a crossing.

The slave map xi (graph of the local center manifold over the center modes) and the reduced
field F are solved order by order from the invariance equation

    beta_s(lambda0) xi_s = [g(w + xi(w))]_s - [D xi(w) F(w)]_s

evaluated at lambda0. The lambda dependence enters the reduced field only through the
unfolding term -dbeta_c/dlambda(lambda0) * nu * w_c, with nu = lambda - lambda0.
"""
from itertools import permutations
from logging import getLogger
from typing import Dict, List, Optional, Tuple

import numpy as np
import sympy
from sympy import Poly

from bifurcade.configuration import config
from bifurcade.core.base import Base
from bifurcade.core.model import SpectralModel, as_state
from bifurcade.core.spectrum import CrossingData
from bifurcade.exceptions import InconsistentCrossing, InvalidArgument
from bifurcade.utils.polynomials import (
    CoefficientMap,
    Monomial,
    PolynomialMap,
    coefficient_map,
    exact_map,
    grlex_sorted,
    homogeneous_part,
    scalar,
    truncate,
    zero_poly,
)

logger = getLogger(__name__)

ORDERS = (2, 3, 4, 5)


class ReducedField(Base):
    """Reduced vector field on the center modes plus the slave map of the other modes."""

    lambda0: float
    center_modes: List[int]
    n: int
    m: int
    dim: int
    order: int
    unfolding: List[float]
    # nu-independent part of degree 2..order, one map per center component
    coeffs: List[Dict[Monomial, float]]
    # slave polynomials keyed by 1-based mode label
    slave: Dict[int, Dict[Monomial, float]]
    exact: bool = True
    coeffs_exact: Optional[List[Dict[Monomial, str]]] = None
    slave_exact: Optional[Dict[int, Dict[Monomial, str]]] = None

    @property
    def slave_modes(self) -> List[int]:
        return sorted(self.slave)

    def field_map(self) -> PolynomialMap:
        return PolynomialMap(self.coeffs, self.n)

    def slave_map(self) -> PolynomialMap:
        return PolynomialMap([self.slave[k] for k in self.slave_modes], self.n)

    def coefficient(self, component: int, monomial: Monomial) -> float:
        return self.coeffs[component].get(tuple(monomial), 0.0)

    def lowest_degree_terms(self, tol: float) -> Tuple[Optional[int], List[CoefficientMap]]:
        """Smallest degree with a coefficient above tol, with the homogeneous part at that degree."""
        for degree in range(2, self.order + 1):
            parts = [
                {mono: c for mono, c in component.items() if sum(mono) == degree} for component in self.coeffs
            ]
            if any(abs(c) > tol for part in parts for c in part.values()):
                return degree, parts
        return None, [{} for _ in self.coeffs]

    def to_document(self):
        def terms(coefficients: CoefficientMap, exact: Optional[Dict[Monomial, str]]):
            return [
                {
                    'monomial': list(monomial),
                    'coefficient': coefficients[monomial],
                    **({'exact': exact[monomial]} if exact and monomial in exact else {}),
                }
                for monomial in grlex_sorted(coefficients)
            ]

        return {
            'lambda0': self.lambda0,
            'center_modes': self.center_modes,
            'n': self.n,
            'm': self.m,
            'order': self.order,
            'exact': self.exact,
            'unfolding': self.unfolding,
            'field': [
                terms(component, self.coeffs_exact[i] if self.coeffs_exact else None)
                for i, component in enumerate(self.coeffs)
            ],
            'slave': {
                str(mode): terms(self.slave[mode], self.slave_exact.get(mode) if self.slave_exact else None)
                for mode in self.slave_modes
            },
        }


def _sorted_entries(tensor: np.ndarray, active: np.ndarray) -> List[Tuple[int, Tuple[int, ...], float]]:
    """Nonzero entries with sorted lower indices, weighted by their number of orderings."""
    index = np.argwhere(tensor != 0)
    if index.size == 0:
        return []
    lower = index[:, 1:]
    keep = np.all(np.diff(lower, axis=1) >= 0, axis=1) & np.all(active[lower], axis=1)
    entries = []
    for row in index[keep]:
        mode, low = int(row[0]), tuple(int(i) for i in row[1:])
        entries.append((mode, low, float(tensor[tuple(row)]) * len(set(permutations(low)))))
    return entries


def _nonlinearity(
    model: SpectralModel, coordinates: Dict[int, Poly], degree: int, exact: bool, zero: Poly
) -> List[Poly]:
    """g(a) truncated at `degree`, with the modes given as polynomials in the center variables."""
    active = np.zeros(model.dim, dtype=bool)
    active[list(coordinates)] = True
    products: Dict[Tuple[int, ...], Poly] = {}

    def product(low: Tuple[int, ...]) -> Poly:
        if low not in products:
            result = coordinates[low[0]]
            for i in low[1:]:
                result = truncate(result * coordinates[i], degree)
            products[low] = result
        return products[low]

    output = [zero] * model.dim
    for tensor in (model.Q, model.C):
        for mode, low, value in _sorted_entries(tensor, active):
            output[mode] = output[mode] + product(low).mul_ground(scalar(value, exact))
    return output


def reduce(model: SpectralModel, crossing: CrossingData, order: int = 3, exact: bool = True) -> ReducedField:
    """Solve the invariance equation through `order` for the slave map and the reduced field."""
    if order not in ORDERS:
        raise InvalidArgument(f"Reduction order must be one of {ORDERS}, got {order}")
    if crossing.degenerate:
        raise InvalidArgument(f"Cannot reduce at the degenerate crossing lambda0={crossing.lambda0:g}")
    center = crossing.center_indices
    slaves = [k for k in range(model.dim) if k not in center]
    beta0 = model.beta(crossing.lambda0)
    scale = max(1.0, float(np.max(np.abs(model.linear))))
    for s in slaves:
        if abs(beta0[s]) <= config.root_tolerance * scale:
            raise InconsistentCrossing(
                f"Mode {s + 1} is critical at lambda0={crossing.lambda0:g} but is not a center mode",
                {'mode': s + 1, 'beta': float(beta0[s])},
            )
    gens = sympy.symbols(f"w1:{crossing.n + 1}")
    zero = zero_poly(gens, exact)
    center_coordinates = {
        k: Poly.from_dict({tuple(int(i == j) for i in range(crossing.n)): 1}, *gens, domain=zero.domain)
        for j, k in enumerate(center)
    }
    xi: Dict[int, Poly] = {s: zero for s in slaves}
    field: List[Poly] = [zero] * crossing.n
    for degree in range(2, order + 1):
        coordinates = {**center_coordinates, **{s: p for s, p in xi.items() if not p.is_zero}}
        g = _nonlinearity(model, coordinates, degree, exact, zero)
        new_field = [homogeneous_part(g[k], degree) for k in center]
        for s in slaves:
            transport = zero
            for j, gen in enumerate(gens):
                transport = transport + xi[s].diff(gen) * field[j]
            forcing = homogeneous_part(g[s], degree) - homogeneous_part(transport, degree)
            if not forcing.is_zero:
                xi[s] = xi[s] + forcing.quo_ground(scalar(beta0[s], exact))
        field = [field[j] + new_field[j] for j in range(crossing.n)]
        logger.debug(f"Solved degree {degree} of the reduction at lambda0={crossing.lambda0:g}")
    slopes = model.beta_prime(crossing.lambda0)
    reduced = ReducedField(
        lambda0=crossing.lambda0,
        center_modes=crossing.center_modes,
        n=crossing.n,
        m=crossing.m,
        dim=model.dim,
        order=order,
        unfolding=[float(-slopes[k]) for k in center],
        coeffs=[coefficient_map(p) for p in field],
        slave={s + 1: coefficient_map(xi[s]) for s in slaves},
        exact=exact,
        coeffs_exact=[exact_map(p) for p in field] if exact else None,
        slave_exact={s + 1: exact_map(xi[s]) for s in slaves} if exact else None,
    )
    logger.info(f"Reduced {model.label} at lambda0={crossing.lambda0:g} to order {order} on modes {crossing.center_modes}")
    return reduced


def _points(reduced: ReducedField, w) -> Tuple[np.ndarray, bool]:
    array = np.asarray(w, dtype=float)
    single = array.ndim <= 1
    points = array.reshape(1, reduced.n) if single else array.reshape(-1, reduced.n)
    return points, single


def evaluate_reduced(reduced: ReducedField, nu: float, w) -> np.ndarray:
    """dw/dt of the reduced field; accepts one point or an array of points."""
    points, single = _points(reduced, w)
    values = reduced.field_map()(points) + nu * np.asarray(reduced.unfolding)[None, :] * points
    return values[0] if single else values


def reduced_jacobian(reduced: ReducedField, nu: float, w) -> np.ndarray:
    points, single = _points(reduced, w)
    values = reduced.field_map().jacobian(points) + nu * np.diag(reduced.unfolding)[None, :, :]
    return values[0] if single else values


def lift(model: SpectralModel, reduced: ReducedField, w) -> np.ndarray:
    """Full-space state w + xi(w) (rows for an array of points)."""
    points, single = _points(reduced, w)
    states = np.zeros((points.shape[0], model.dim))
    states[:, [k - 1 for k in reduced.center_modes]] = points
    if reduced.slave:
        states[:, [k - 1 for k in reduced.slave_modes]] = reduced.slave_map()(points)
    return states[0] if single else states


def sphere_points(n: int, radius: float, samples: int) -> np.ndarray:
    if n == 1:
        return np.array([[radius], [-radius]])
    angles = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    return radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def invariance_residual(model: SpectralModel, reduced: ReducedField, h: float, samples: int = 64) -> float:
    """Max over |w| = h of || D xi(w) F(w) - (full field at w + xi(w)) on the slave modes ||."""
    if h <= 0:
        raise InvalidArgument(f"Residual radius must be positive, got {h}")
    if reduced.n > 2:
        raise InvalidArgument("Residual sampling supports one or two center modes")
    if not reduced.slave:
        return 0.0
    points = sphere_points(reduced.n, h, samples)
    states = lift(model, reduced, points)
    slaves = [k - 1 for k in reduced.slave_modes]
    full = np.array([model.field(reduced.lambda0, as_state(model, a)) for a in states])[:, slaves]
    transport = np.einsum('msc,mc->ms', reduced.slave_map().jacobian(points), reduced.field_map()(points))
    return float(np.max(np.linalg.norm(transport - full, axis=1)))
