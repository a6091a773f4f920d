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

"""Eigenvalue crossings of the lambda-dependent linear part."""
import math
from logging import getLogger
from typing import Iterable, List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as P
from pydantic import root_validator

from bifurcade.configuration import config
from bifurcade.core.base import Base
from bifurcade.core.model import SpectralModel
from bifurcade.exceptions import Degenerate, IntervalTooTight, InvalidArgument

logger = getLogger(__name__)

DEFAULT_HALF_WIDTH = 1.0
MIN_INTERVAL = 1e-6
GAP_SAMPLES = 201


class CrossingData(Base):
    """Spectral bookkeeping of one bifurcation value."""

    lambda0: float
    # 1-based mode labels
    center_modes: List[int]
    n: int
    m: int
    n_stable: int
    gaps: Optional[Tuple[float, float, float, float]] = None
    interval: Optional[Tuple[float, float]] = None
    transversality: List[float]
    h4_orientation: int = 0
    degenerate: bool = False
    note: str = ''

    @root_validator(skip_on_failure=True)
    def validate_counts(cls, values):
        if values['n'] != len(values['center_modes']) or values['n'] < 1:
            raise ValueError("n must equal the (nonzero) number of center modes")
        if len(values['transversality']) != values['n']:
            raise ValueError("one transversality entry per center mode is required")
        return values

    @property
    def center_indices(self) -> List[int]:
        """0-based array positions of the center modes."""
        return [k - 1 for k in self.center_modes]

    @property
    def half_width(self) -> Optional[float]:
        if self.interval is None:
            return None
        return 0.5 * (self.interval[1] - self.interval[0])


def linear_spectrum(model: SpectralModel, lam: float) -> List[Tuple[int, float]]:
    """Per-mode linear coefficients; the models are diagonal so these are the eigenvalues of L_lambda."""
    if not math.isfinite(lam):
        raise InvalidArgument(f"lambda must be finite, got {lam}")
    return [(k + 1, float(beta)) for k, beta in enumerate(model.beta(lam))]


def mode_roots(model: SpectralModel, k: int, imag_tol: float = 1e-7) -> np.ndarray:
    """Real roots of beta_k (0-based k), with multiple roots collapsed."""
    coefficients = np.trim_zeros(model.linear[k], 'b')
    if coefficients.size == 0:
        raise Degenerate(
            f"beta_{k + 1} vanishes identically for model {model.label!r}", {'mode': k + 1}
        )
    if coefficients.size == 1:
        return np.array([])
    roots = P.polyroots(coefficients)
    real = np.sort(roots[np.abs(roots.imag) <= imag_tol * np.maximum(1.0, np.abs(roots))].real)
    derivative = P.polyder(coefficients)
    polished = []
    for root in real:
        for _ in range(3):
            slope = P.polyval(root, derivative)
            if abs(slope) <= config.transversality_threshold:
                break
            root = root - P.polyval(root, coefficients) / slope
        if not polished or abs(root - polished[-1]) > 1e-6 * max(1.0, abs(root)):
            polished.append(float(root))
    return np.array(polished)


def _all_roots(model: SpectralModel) -> List[Tuple[float, int]]:
    return sorted((float(root), k) for k in range(model.dim) for root in mode_roots(model, k))


def detect_bifurcation_values(
    model: SpectralModel, lam_lo: float, lam_hi: float, tol: Optional[float] = None
) -> List[CrossingData]:
    """
    All zeros of all beta_k inside [lam_lo, lam_hi], merged within tol.

    Non-transversal crossings are returned with degenerate=True; use usable_crossings to drop them.
    """
    if not lam_lo < lam_hi:
        raise InvalidArgument(f"Empty parameter window [{lam_lo}, {lam_hi}]")
    tol = config.root_tolerance if tol is None else tol
    roots = [(root, k) for root, k in _all_roots(model) if lam_lo - tol <= root <= lam_hi + tol]
    clusters: List[List[float]] = []
    for root, _ in roots:
        if clusters and root - clusters[-1][0] <= tol:
            clusters[-1].append(root)
        else:
            clusters.append([root])
    crossings = [crossing_data(model, float(np.mean(cluster)), tol) for cluster in clusters]
    logger.info(
        f"Found {len(crossings)} crossing(s) of {model.label} in [{lam_lo:g}, {lam_hi:g}]: "
        + ", ".join(f"{c.lambda0:.10g}" for c in crossings)
    )
    return crossings


def usable_crossings(crossings: Iterable[CrossingData], force: bool = False) -> List[CrossingData]:
    usable = []
    for crossing in crossings:
        if crossing.degenerate and not force:
            logger.warning(f"Skipping degenerate crossing at lambda={crossing.lambda0:g}: {crossing.note}")
            continue
        usable.append(crossing)
    return usable


def _gaps(
    model: SpectralModel, lam0: float, eta: float, center: List[int], unstable: List[int], stable: List[int]
) -> Optional[Tuple[float, float, float, float]]:
    grid = np.linspace(lam0 - eta, lam0 + eta, GAP_SAMPLES)
    values = P.polyval(grid, model.linear.T)
    center_values = values[center]
    c_lo, c_hi = float(center_values.min()), float(center_values.max())
    d1 = float(np.abs(values[unstable]).min()) if unstable else None
    d3 = float(np.abs(values[stable]).min()) if stable else None
    if d1 is None and d3 is None:
        d1 = d3 = 8.0 * max(abs(c_lo), abs(c_hi), 1e-12)
    d1 = d3 if d1 is None else d1
    d3 = d1 if d3 is None else d3
    alpha1, alpha4 = d1 / 2.0, d3 / 2.0  # type: ignore
    alpha2, alpha3 = alpha1 / 2.0, alpha4 / 2.0
    if alpha2 > 0 and alpha3 > 0 and -alpha2 <= c_lo and c_hi < alpha3:
        return (alpha1, alpha2, alpha3, alpha4)
    return None


def crossing_data(model: SpectralModel, lam0: float, tol: Optional[float] = None) -> CrossingData:
    """Fill the crossing record at a root lam0 of some beta_k, including the spectral gaps on J0."""
    tol = config.root_tolerance if tol is None else tol
    roots = _all_roots(model)
    center = sorted({k for root, k in roots if abs(root - lam0) <= tol})
    if not center:
        raise InvalidArgument(f"lambda0={lam0} is not a root of any beta_k within {tol}")
    beta0 = model.beta(lam0)
    slopes = model.beta_prime(lam0)
    transversality = [float(slopes[k]) for k in center]
    others = [k for k in range(model.dim) if k not in center]
    unstable = [k for k in others if beta0[k] < 0]
    stable = [k for k in others if beta0[k] > 0]
    record = dict(
        lambda0=lam0,
        center_modes=[k + 1 for k in center],
        n=len(center),
        m=len(unstable),
        n_stable=len(stable),
        transversality=transversality,
    )
    signs = {int(np.sign(slope)) for slope in transversality}
    if min(abs(slope) for slope in transversality) < config.transversality_threshold or len(signs) > 1:
        note = f"non-transversal crossing, dbeta/dlambda = {transversality}"
        logger.warning(f"Degenerate crossing of {model.label} at lambda={lam0:g}: {note}")
        return CrossingData(**record, degenerate=True, note=note)
    distances = [abs(root - lam0) for root, _ in roots if abs(root - lam0) > tol]
    separation = min(distances) if distances else math.inf
    eta = separation / 2.0 if math.isfinite(separation) else DEFAULT_HALF_WIDTH
    while eta >= MIN_INTERVAL:
        gaps = _gaps(model, lam0, eta, center, unstable, stable)
        if gaps is not None:
            return CrossingData(
                **record, gaps=gaps, interval=(lam0 - eta, lam0 + eta), h4_orientation=signs.pop()
            )
        eta /= 2.0
    raise IntervalTooTight(
        f"No interval around lambda0={lam0:g} separates it from the other crossings",
        {'lambda0': lam0, 'minimal_eta': separation / 2.0, 'last_eta': eta},
    )
