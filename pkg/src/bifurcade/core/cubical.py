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

"""Elementary cubical complexes on rectilinear grids and their relative Betti numbers."""
from itertools import product
from typing import Callable, Dict, Iterable, List, Sequence, Set, Tuple

import numpy as np
from scipy.sparse import coo_array

# One (lo, hi) pair of line indices per axis, hi == lo for a degenerate axis
Cube = Tuple[Tuple[int, int], ...]


def cube_dim(cube: Cube) -> int:
    return sum(hi != lo for lo, hi in cube)


def boundary(cube: Cube) -> List[Tuple[int, Cube]]:
    """Signed faces of an elementary cube."""
    faces = []
    sign = 1
    for axis, (lo, hi) in enumerate(cube):
        if lo == hi:
            continue
        upper = cube[:axis] + ((hi, hi),) + cube[axis + 1 :]
        lower = cube[:axis] + ((lo, lo),) + cube[axis + 1 :]
        faces.append((sign, upper))
        faces.append((-sign, lower))
        sign = -sign
    return faces


def closure(cubes: Iterable[Cube]) -> Set[Cube]:
    """All faces of all dimensions of the given cubes, the cubes included."""
    closed: Set[Cube] = set()
    stack = list(cubes)
    while stack:
        cube = stack.pop()
        if cube in closed:
            continue
        closed.add(cube)
        stack.extend(face for _, face in boundary(cube))
    return closed


def top_cubes(lines: Sequence[Sequence[float]], keep: Callable[[np.ndarray], bool]) -> List[Cube]:
    """Full-dimensional cells of the grid whose center passes `keep`."""
    cells = []
    for index in product(*(range(len(axis) - 1) for axis in lines)):
        center = np.array([0.5 * (lines[a][i] + lines[a][i + 1]) for a, i in enumerate(index)])
        if keep(center):
            cells.append(tuple((i, i + 1) for i in index))
    return cells


def outward_normals(cubes: Sequence[Cube]) -> Dict[Cube, List[int]]:
    """Codimension-one faces of the given top cubes with the normal (+1 upper, -1 lower) seen from each cube."""
    normals: Dict[Cube, List[int]] = {}
    for cube in cubes:
        for axis, (lo, hi) in enumerate(cube):
            if lo == hi:
                continue
            normals.setdefault(cube[:axis] + ((hi, hi),) + cube[axis + 1 :], []).append(1)
            normals.setdefault(cube[:axis] + ((lo, lo),) + cube[axis + 1 :], []).append(-1)
    return normals


def boundary_matrix(cubes: Sequence[Cube], faces: Sequence[Cube]) -> np.ndarray:
    """Matrix of the boundary map from the span of `cubes` to the span of `faces`; other faces are dropped."""
    position = {face: row for row, face in enumerate(faces)}
    data, rows, cols = [], [], []
    for col, cube in enumerate(cubes):
        for sign, face in boundary(cube):
            if face in position:
                data.append(sign)
                rows.append(position[face])
                cols.append(col)
    return coo_array((data, (rows, cols)), shape=(len(faces), len(cubes)), dtype=float).toarray()


def relative_betti_numbers(space: Set[Cube], subspace: Set[Cube]) -> Dict[int, int]:
    """
    Betti numbers of H_*(X, A) over the rationals for cubical sets A inside X.

    Both sets must be closed under taking faces.
    """
    if not subspace <= space:
        raise ValueError("the subspace is not contained in the space")
    chains: Dict[int, List[Cube]] = {}
    for cube in sorted(space - subspace):
        chains.setdefault(cube_dim(cube), []).append(cube)
    if not chains:
        return {}
    top = max(chains)
    ranks = {}
    for k in range(1, top + 1):
        if chains.get(k) and chains.get(k - 1):
            ranks[k] = int(np.linalg.matrix_rank(boundary_matrix(chains[k], chains[k - 1])))
        else:
            ranks[k] = 0
    betti = {}
    for k in range(top + 1):
        value = len(chains.get(k, [])) - ranks.get(k, 0) - ranks.get(k + 1, 0)
        if value:
            betti[k] = value
    return betti
