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
Homology Conley indices of isolated invariant sets in one or two dimensions.

Blocks are axis-aligned boxes, optionally with a rectangular hole removed. Their boundary is
split into faces on a grid and every face must be crossed strictly by the field: outwards
(exit) or inwards (ingress). The index is the relative homology H_*(B, B^-) with B^- the
closed union of the exit faces.
"""
from itertools import groupby
from logging import getLogger
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from pydantic import root_validator, validator

from bifurcade._enum import FaceLabel
from bifurcade.core.base import Base
from bifurcade.core.center_manifold import ReducedField, evaluate_reduced
from bifurcade.core.cubical import Cube, closure, outward_normals, relative_betti_numbers, top_cubes
from bifurcade.core.spectrum import CrossingData
from bifurcade.exceptions import InvalidArgument, IsolationLost, PersistentTangency

logger = getLogger(__name__)

Interval = Tuple[float, float]
Box = List[Interval]
PlanarField = Callable[[np.ndarray], np.ndarray]

FACE_TOLERANCE = 1e-12
POSITION_TOLERANCE = 1e-12


class ConleyIndex(Base):
    """Betti numbers of a homology Conley index; no ranks at all is the trivial index."""

    betti: Dict[int, int] = {}
    trivial: bool = True

    @validator('betti')
    def validate_betti(cls, betti: Dict[int, int]) -> Dict[int, int]:
        if any(degree < 0 or rank < 0 for degree, rank in betti.items()):
            raise ValueError("Betti degrees and ranks must be non-negative")
        return {degree: betti[degree] for degree in sorted(betti) if betti[degree]}

    @root_validator(skip_on_failure=True)
    def validate_trivial(cls, values):
        values['trivial'] = not values['betti']
        return values

    @classmethod
    def sigma(cls, m: int) -> 'ConleyIndex':
        """Index of a hyperbolic equilibrium with m unstable directions."""
        return cls(betti={m: 1})

    @classmethod
    def null(cls) -> 'ConleyIndex':
        return cls(betti={})

    @property
    def label(self) -> str:
        if self.trivial:
            return "0"
        return " v ".join(f"Sigma^{degree}" for degree, rank in self.betti.items() for _ in range(rank))

    def to_document(self):
        return {'betti': {str(k): v for k, v in self.betti.items()}, 'trivial': self.trivial, 'label': self.label}


class Face(Base):
    """Codimension-one piece of the block boundary with its outward normal along `axis`."""

    axis: int
    normal: int
    position: float
    # extent along the remaining axes, in axis order
    span: List[Interval] = []
    hole: bool = False
    label: FaceLabel = FaceLabel.tangent

    def sample_points(self, samples_per_edge: int) -> np.ndarray:
        dim = len(self.span) + 1
        if dim == 1:
            return np.array([[self.position]])
        lo, hi = self.span[0]
        along = np.linspace(lo, hi, samples_per_edge + 2)
        points = np.empty((along.size, 2))
        points[:, self.axis] = self.position
        points[:, 1 - self.axis] = along
        return points

    def contains(self, axis: int, normal: int, position: float, midpoint: Sequence[float]) -> bool:
        if axis != self.axis or normal != self.normal or abs(position - self.position) > POSITION_TOLERANCE:
            return False
        return all(lo <= x <= hi for x, (lo, hi) in zip(midpoint, self.span))


class IsolatingBlock(Base):
    dim: int
    box: Box
    hole: Optional[Box] = None
    grid: List[int]
    faces_exit: List[Face] = []
    faces_ingress: List[Face] = []
    tangency_report: List[Face] = []
    refinements: int = 0

    @property
    def accepted(self) -> bool:
        return not self.tangency_report

    @property
    def faces(self) -> List[Face]:
        return self.faces_exit + self.faces_ingress + self.tangency_report

    def lines(self) -> List[np.ndarray]:
        return grid_lines(self.box, self.grid, self.hole)

    def cells(self) -> List[Cube]:
        """Grid cells forming B."""
        return top_cubes(self.lines(), lambda center: not in_hole(center, self.hole))


def in_hole(point: np.ndarray, hole: Optional[Box]) -> bool:
    if hole is None:
        return False
    return all(lo < x < hi for x, (lo, hi) in zip(point, hole))


def grid_lines(box: Box, grid: Sequence[int], hole: Optional[Box] = None) -> List[np.ndarray]:
    lines = []
    for axis, (lo, hi) in enumerate(box):
        values = np.linspace(lo, hi, grid[axis] + 1)
        if hole is not None:
            values = np.concatenate([values, hole[axis]])
        lines.append(np.unique(values))
    return lines


def _check_geometry(box: Box, hole: Optional[Box]) -> None:
    if len(box) not in (1, 2):
        raise InvalidArgument(f"Blocks are supported in dimension 1 and 2, got {len(box)}")
    if any(not lo < hi for lo, hi in box):
        raise InvalidArgument(f"Degenerate box {box}")
    if hole is not None:
        if len(hole) != len(box):
            raise InvalidArgument("The hole must have the dimension of the box")
        if any(not b_lo < h_lo < h_hi < b_hi for (b_lo, b_hi), (h_lo, h_hi) in zip(box, hole)):
            raise InvalidArgument(f"The hole {hole} must lie strictly inside the box {box}")


def boundary_faces(box: Box, grid: Sequence[int], hole: Optional[Box] = None) -> List[Face]:
    """Unlabelled boundary faces of the block at grid resolution."""
    lines = grid_lines(box, grid, hole)
    walls = [(axis, box[axis][0], -1, False) for axis in range(len(box))]
    walls += [(axis, box[axis][1], 1, False) for axis in range(len(box))]
    if hole is not None:
        walls += [(axis, hole[axis][0], 1, True) for axis in range(len(box))]
        walls += [(axis, hole[axis][1], -1, True) for axis in range(len(box))]
    faces = []
    for axis, position, normal, on_hole in walls:
        if len(box) == 1:
            faces.append(Face(axis=axis, normal=normal, position=position, hole=on_hole))
            continue
        other = 1 - axis
        lo, hi = (hole if on_hole else box)[other]  # type: ignore
        along = lines[other][(lines[other] >= lo) & (lines[other] <= hi)]
        for start, stop in zip(along[:-1], along[1:]):
            faces.append(
                Face(axis=axis, normal=normal, position=position, span=[(start, stop)], hole=on_hole)
            )
    return faces


def classify_faces(
    field: PlanarField, faces: List[Face], samples_per_edge: int = 5, tol: float = FACE_TOLERANCE
) -> List[Face]:
    """Label faces by the sign of the outward normal component of the field at the face samples."""
    samples = [face.sample_points(samples_per_edge) for face in faces]
    values = np.asarray(field(np.concatenate(samples)), dtype=float).reshape(-1, samples[0].shape[1])
    labelled, start = [], 0
    for face, points in zip(faces, samples):
        normal = face.normal * values[start : start + len(points), face.axis]
        start += len(points)
        if np.all(normal > tol):
            label = FaceLabel.exit
        elif np.all(normal < -tol):
            label = FaceLabel.ingress
        else:
            label = FaceLabel.tangent
        labelled.append(face.copy(update={'label': label}))
    return labelled


def build_isolating_block(
    field: PlanarField,
    box: Sequence[Interval],
    grid: int = 8,
    hole: Optional[Sequence[Interval]] = None,
    samples_per_edge: int = 5,
    max_refinements: int = 6,
) -> IsolatingBlock:
    """
    Turn the box (minus the hole) into an isolating block for `field`.

    `field` maps an array of points of shape (M, n) to the field values of the same shape.
    Faces where the normal component does not keep a strict sign trigger a grid doubling;
    after `max_refinements` doublings PersistentTangency is raised.
    """
    box = [(float(lo), float(hi)) for lo, hi in box]
    hole = None if hole is None else [(float(lo), float(hi)) for lo, hi in hole]
    _check_geometry(box, hole)
    cells = [grid] * len(box)
    for refinement in range(max_refinements + 1):
        faces = classify_faces(field, boundary_faces(box, cells, hole), samples_per_edge)
        tangent = [face for face in faces if face.label == FaceLabel.tangent]
        if not tangent:
            block = IsolatingBlock(
                dim=len(box),
                box=box,
                hole=hole,
                grid=cells,
                faces_exit=[face for face in faces if face.label == FaceLabel.exit],
                faces_ingress=[face for face in faces if face.label == FaceLabel.ingress],
                refinements=refinement,
            )
            logger.debug(
                f"Accepted block {box} with {len(block.faces_exit)} exit and {len(block.faces_ingress)} "
                f"ingress faces after {refinement} refinement(s)"
            )
            return block
        logger.debug(f"{len(tangent)} tangent face(s) on {box} at grid {cells}, refining")
        cells = [2 * c for c in cells]
    raise PersistentTangency(
        f"Block {box} keeps {len(tangent)} tangent face(s) after {max_refinements} refinements",
        {
            'box': box,
            'hole': hole,
            'grid': [c // 2 for c in cells],
            'tangent_faces': [face.to_document() for face in tangent[:20]],
        },
    )


def _coarse_lines(block: IsolatingBlock) -> List[np.ndarray]:
    """Box and hole bounds plus every point where the face labels change along a wall."""
    lines: List[List[float]] = [list(bounds) for bounds in block.box]
    if block.hole is not None:
        for axis, bounds in enumerate(block.hole):
            lines[axis].extend(bounds)
    if block.dim == 2:
        wall = lambda face: (face.axis, face.position, face.normal, face.hole)  # noqa: E731
        for _, faces in groupby(sorted(block.faces, key=lambda f: (wall(f), f.span[0][0])), key=wall):
            ordered = list(faces)
            for before, after in zip(ordered[:-1], ordered[1:]):
                if before.label != after.label:
                    lines[1 - before.axis].append(before.span[0][1])
    return [np.unique(np.array(values)) for values in lines]


def _face_label(block: IsolatingBlock, axis: int, normal: int, position: float, midpoint: List[float]) -> FaceLabel:
    for face in block.faces:
        if face.contains(axis, normal, position, midpoint):
            return face.label
    raise ValueError(f"No block face covers the wall point {position} along axis {axis}")


def exit_set(block: IsolatingBlock, lines: List[np.ndarray], cells: List[Cube]) -> Set[Cube]:
    """Closed cubical set B^- on the given grid."""
    exits = []
    for face, signs in outward_normals(cells).items():
        if len(signs) != 1:
            continue
        axis = next(a for a, (lo, hi) in enumerate(face) if lo == hi)
        position = float(lines[axis][face[axis][0]])
        midpoint = [0.5 * (lines[a][lo] + lines[a][hi]) for a, (lo, hi) in enumerate(face) if a != axis]
        if _face_label(block, axis, signs[0], position, midpoint) == FaceLabel.exit:
            exits.append(face)
    return closure(exits)


def relative_betti(block: IsolatingBlock) -> ConleyIndex:
    """Homology Conley index H_*(B, B^-) of an accepted block."""
    if not block.accepted:
        raise InvalidArgument("The block still has tangent faces")
    lines = _coarse_lines(block)
    cells = top_cubes(lines, lambda center: not in_hole(center, block.hole))
    index = ConleyIndex(betti=relative_betti_numbers(closure(cells), exit_set(block, lines, cells)))
    logger.debug(f"Block {block.box} has index {index.label}")
    return index


def suspend(index: ConleyIndex, m: int) -> ConleyIndex:
    """Shift every homology degree up by m."""
    if m < 0:
        raise InvalidArgument(f"Suspension order must be non-negative, got {m}")
    return ConleyIndex(betti={degree + m: rank for degree, rank in index.betti.items()})


def wedge(first: ConleyIndex, *others: ConleyIndex) -> ConleyIndex:
    betti = dict(first.betti)
    for other in others:
        for degree, rank in other.betti.items():
            betti[degree] = betti.get(degree, 0) + rank
    return ConleyIndex(betti=betti)


def block_index(
    field: PlanarField,
    box: Sequence[Interval],
    grid: int = 8,
    hole: Optional[Sequence[Interval]] = None,
    samples_per_edge: int = 5,
    max_refinements: int = 6,
) -> Tuple[ConleyIndex, IsolatingBlock]:
    block = build_isolating_block(field, box, grid, hole, samples_per_edge, max_refinements)
    return relative_betti(block), block


class IndexSweep(Base):
    """Indices of the invariant set in a fixed block along a parameter interval."""

    samples: List[Tuple[float, ConleyIndex]] = []
    isolation_lost: List[float] = []
    changes: List[float] = []

    @property
    def constant(self) -> bool:
        return not self.changes and not self.isolation_lost

    def to_document(self):
        return {
            'samples': [{'lambda': lam, 'index': index.to_document()} for lam, index in self.samples],
            'isolation_lost': self.isolation_lost,
            'changes': self.changes,
            'constant': self.constant,
        }


def index_constancy_sweep(
    family: Callable[[float], PlanarField],
    lam_lo: float,
    lam_hi: float,
    box: Sequence[Interval],
    grid: int = 8,
    steps: int = 20,
    hole: Optional[Sequence[Interval]] = None,
    strict: bool = True,
    samples_per_edge: int = 5,
    max_refinements: int = 6,
) -> IndexSweep:
    """
    Index of the maximal invariant set in the block for `steps` parameters from lam_lo to lam_hi.

    A parameter where the box is no longer an isolating block raises IsolationLost, or with
    strict=False is recorded and skipped.
    """
    if steps < 2 or not lam_lo < lam_hi:
        raise InvalidArgument(f"Sweep needs lam_lo < lam_hi and at least 2 steps, got {lam_lo}, {lam_hi}, {steps}")
    samples: List[Tuple[float, ConleyIndex]] = []
    lost: List[float] = []
    changes: List[float] = []
    for lam in np.linspace(lam_lo, lam_hi, steps):
        lam = float(lam)
        try:
            index, _ = block_index(family(lam), box, grid, hole, samples_per_edge, max_refinements)
        except PersistentTangency as exc:
            if strict:
                raise IsolationLost(lam, exc.details) from exc
            logger.info(f"Isolation lost at lambda={lam:g}")
            lost.append(lam)
            continue
        if samples and samples[-1][1] != index:
            changes.append(lam)
        samples.append((lam, index))
    return IndexSweep(samples=samples, isolation_lost=lost, changes=changes)


def reduced_field_at(reduced: ReducedField, nu: float) -> PlanarField:
    return lambda points: evaluate_reduced(reduced, nu, points)


def index_at_crossing(
    reduced: ReducedField, crossing: CrossingData, radius: float = 0.1, grid: int = 8
) -> ConleyIndex:
    """Index of the origin at the bifurcation value, suspended by the unstable dimension m."""
    if reduced.n > 2:
        raise InvalidArgument(f"Crossing number {reduced.n} is above the supported 2")
    index, _ = block_index(reduced_field_at(reduced, 0.0), [(-radius, radius)] * reduced.n, grid)
    return suspend(index, crossing.m)


def trivial_index(crossing: CrossingData, side: int) -> ConleyIndex:
    """
    Index of the hyperbolic origin just below (side=-1) or above (side=+1) the bifurcation value.

    The center modes are unstable on the side where beta_c < 0, i.e. side * h4_orientation < 0.
    """
    if side not in (-1, 1):
        raise InvalidArgument(f"side must be -1 or +1, got {side}")
    if crossing.degenerate:
        raise InvalidArgument(f"Crossing at lambda0={crossing.lambda0:g} is degenerate")
    unstable = crossing.m + (crossing.n if side * crossing.h4_orientation < 0 else 0)
    return ConleyIndex.sigma(unstable)
