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

"""Helpers around sympy polynomials and their vectorised numpy evaluation."""
from typing import Dict, List, Sequence, Tuple

import numpy as np
import sympy
from sympy import Poly
from sympy.polys.domains import QQ, RR
from sympy.polys.orderings import monomial_key

Monomial = Tuple[int, ...]
CoefficientMap = Dict[Monomial, float]


def domain_for(exact: bool):
    return QQ if exact else RR


def scalar(value: float, exact: bool):
    """Exact rationals use the shortest decimal form of the float (0.1 -> 1/10)."""
    return sympy.Rational(repr(float(value))) if exact else sympy.Float(float(value))


def zero_poly(gens: Sequence[sympy.Symbol], exact: bool) -> Poly:
    return Poly.from_dict({(0,) * len(gens): 0}, *gens, domain=domain_for(exact))


def select_terms(poly: Poly, keep) -> Poly:
    terms = {monomial: coeff for monomial, coeff in poly.terms() if keep(sum(monomial)) and coeff != 0}
    return Poly.from_dict(terms or {(0,) * len(poly.gens): 0}, *poly.gens, domain=poly.domain)


def truncate(poly: Poly, degree: int) -> Poly:
    return select_terms(poly, lambda d: d <= degree)


def homogeneous_part(poly: Poly, degree: int) -> Poly:
    return select_terms(poly, lambda d: d == degree)


def coefficient_map(poly: Poly) -> CoefficientMap:
    return {tuple(monomial): float(coeff) for monomial, coeff in poly.terms() if coeff != 0}


def exact_map(poly: Poly) -> Dict[Monomial, str]:
    return {tuple(monomial): str(coeff) for monomial, coeff in poly.terms() if coeff != 0}


def grlex_sorted(monomials) -> List[Monomial]:
    """Graded lexicographic order: total degree first, then lexicographic."""
    return sorted(monomials, key=monomial_key('grlex'))


class PolynomialMap:
    """Vectorised evaluation of a list of polynomials given as monomial -> coefficient maps."""

    def __init__(self, components: Sequence[CoefficientMap], nvars: int):
        monomials = grlex_sorted({monomial for component in components for monomial in component})
        self.nvars = nvars
        self.exponents = np.array(monomials, dtype=float).reshape(len(monomials), nvars)
        self.coefficients = np.array(
            [[component.get(monomial, 0.0) for monomial in monomials] for component in components]
        ).reshape(len(components), len(monomials))

    def monomials(self, points: np.ndarray) -> np.ndarray:
        return np.prod(points[:, None, :] ** self.exponents[None, :, :], axis=2)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        return self.monomials(points) @ self.coefficients.T

    def jacobian(self, points: np.ndarray) -> np.ndarray:
        """Array of shape (samples, components, nvars)."""
        points = np.atleast_2d(points)
        columns = []
        for j in range(self.nvars):
            powers = self.exponents[:, j]
            lowered = self.exponents.copy()
            lowered[:, j] = np.maximum(powers - 1.0, 0.0)
            derivative = np.prod(points[:, None, :] ** lowered[None, :, :], axis=2) * powers[None, :]
            columns.append(derivative @ self.coefficients.T)
        return np.stack(columns, axis=2)
