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

"""Reading and writing custom model descriptions (JSON or YAML documents)."""
from itertools import combinations_with_replacement, permutations
from logging import getLogger
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ValidationError, root_validator, validator

from bifurcade.core.model import GradientInfo, SpectralModel, is_symmetric, make_model
from bifurcade.exceptions import InvalidModel

logger = getLogger(__name__)


class LinearDescription(BaseModel):
    """Either the affine form beta = c0 - lambda c1 or per-mode polynomial coefficients."""

    c0: Optional[List[float]] = None
    c1: Optional[List[float]] = None
    polynomial: Optional[List[List[float]]] = None

    class Config:
        extra = 'forbid'

    @root_validator(skip_on_failure=True)
    def validate_form(cls, values):
        affine = values.get('c0') is not None or values.get('c1') is not None
        if affine == (values.get('polynomial') is not None):
            raise ValueError("linear needs exactly one of (c0, c1) or polynomial")
        if affine and (values.get('c0') is None or values.get('c1') is None):
            raise ValueError("affine linear part needs both c0 and c1")
        return values

    def coefficients(self, dim: int) -> np.ndarray:
        if self.polynomial is not None:
            width = max(len(row) for row in self.polynomial)
            if len(self.polynomial) != dim or width == 0:
                raise ValueError(f"linear.polynomial needs {dim} non-empty rows")
            return np.array([list(row) + [0.0] * (width - len(row)) for row in self.polynomial])
        if len(self.c0) != dim or len(self.c1) != dim:  # type: ignore
            raise ValueError(f"linear.c0 and linear.c1 need {dim} entries")
        return np.stack([np.array(self.c0), -np.array(self.c1)], axis=1)


class GradientDescription(BaseModel):
    weights: Optional[List[float]] = None
    norms: Optional[List[float]] = None
    cube_integrals: Optional[List[float]] = None

    class Config:
        extra = 'forbid'


def _check_entries(entries: List[List[float]], width: int, name: str) -> List[List[float]]:
    for entry in entries:
        if len(entry) != width:
            raise ValueError(f"{name} entries need {width} values, got {entry}")
        if any(float(index) != int(index) for index in entry[:-1]):
            raise ValueError(f"{name} indices must be integers, got {entry}")
    return entries


class ModelDescription(BaseModel):
    """
    Custom model document.

    Sparse Q entries are [k, i, j, value] and sparse C entries are [k, i, j, l, value] with
    1-based mode labels. Each entry is listed once per symmetry class and `value` is the
    coefficient of the monomial a_i a_j (a_i a_j a_l) in the equation of mode k; the loader
    spreads it evenly over the distinct index permutations. Dense tensors may be given as
    Q_dense / C_dense instead and must already be symmetric.
    """

    label: str = 'custom'
    dim: int
    mu: List[float]
    linear: LinearDescription
    Q: List[List[float]] = []
    C: List[List[float]] = []
    Q_dense: Optional[List[Any]] = None
    C_dense: Optional[List[Any]] = None
    gradient_info: Optional[GradientDescription] = None

    class Config:
        extra = 'forbid'

    @validator('mu')
    def validate_mu_length(cls, mu, values):
        if 'dim' in values and len(mu) != values['dim']:
            raise ValueError(f"mu has {len(mu)} entries but dim is {values['dim']}")
        return mu

    @validator('Q')
    def validate_quadratic_entries(cls, entries):
        return _check_entries(entries, 4, 'Q')

    @validator('C')
    def validate_cubic_entries(cls, entries):
        return _check_entries(entries, 5, 'C')


def _spread(entries: List[List[float]], dim: int, order: int, name: str) -> np.ndarray:
    tensor = np.zeros((dim,) * (order + 1))
    seen = set()
    for entry in entries:
        mode, *lower = (int(index) for index in entry[:-1])
        value = float(entry[-1])
        if not all(1 <= index <= dim for index in (mode, *lower)):
            raise InvalidModel(f"{name} entry {entry} references a mode outside 1..{dim}")
        key = (mode, tuple(sorted(lower)))
        if key in seen:
            raise InvalidModel(f"{name} entry {entry} repeats the symmetry class of an earlier entry")
        seen.add(key)
        orderings = set(permutations(index - 1 for index in lower))
        for ordering in orderings:
            tensor[(mode - 1, *ordering)] = value / len(orderings)
    return tensor


def _dense(values: List[Any], dim: int, order: int, name: str) -> np.ndarray:
    try:
        tensor = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidModel(f"{name} is not a rectangular array of numbers: {exc}") from exc
    if tensor.shape != (dim,) * (order + 1):
        raise InvalidModel(f"{name} must have shape {(dim,) * (order + 1)}, got {tensor.shape}")
    if not is_symmetric(tensor, lower=True):
        raise InvalidModel(f"{name} is not symmetric in its lower indices")
    return tensor


def build_custom(document: Union[ModelDescription, Mapping[str, Any]]) -> SpectralModel:
    """Construct a model from an explicit description."""
    try:
        description = document if isinstance(document, ModelDescription) else ModelDescription.parse_obj(document)
        dim = description.dim
        linear = description.linear.coefficients(dim)
    except (ValidationError, ValueError) as exc:
        raise InvalidModel(f"Invalid model description: {exc}") from exc
    if description.Q and description.Q_dense is not None:
        raise InvalidModel("Give either sparse Q entries or Q_dense, not both")
    if description.C and description.C_dense is not None:
        raise InvalidModel("Give either sparse C entries or C_dense, not both")
    Q = (
        _dense(description.Q_dense, dim, 2, 'Q_dense')
        if description.Q_dense is not None
        else _spread(description.Q, dim, 2, 'Q')
    )
    C = (
        _dense(description.C_dense, dim, 3, 'C_dense')
        if description.C_dense is not None
        else _spread(description.C, dim, 3, 'C')
    )
    info = None
    if description.gradient_info is not None:
        gradient = description.gradient_info
        try:
            info = GradientInfo(
                kind='custom',
                weights=gradient.weights or [1.0] * dim,
                norms=gradient.norms or [1.0] * dim,
                cube_integrals=gradient.cube_integrals,
            )
        except ValidationError as exc:
            raise InvalidModel(f"Invalid gradient_info: {exc}") from exc
    model = make_model(label=description.label, mu=description.mu, linear=linear, Q=Q, C=C, gradient_info=info)
    logger.debug(f"Built custom model {model.label!r} with {model.dim} modes")
    return model


def load_model_file(path: Path) -> SpectralModel:
    """Load a JSON or YAML model description."""
    path = Path(path)
    try:
        document = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise InvalidModel(f"Cannot read model file {str(path)!r}: {exc}") from exc
    if not isinstance(document, dict):
        raise InvalidModel(f"Model file {str(path)!r} does not contain a mapping")
    return build_custom(document)


def _classes(tensor: np.ndarray, tol: float = 0.0) -> List[List[float]]:
    dim, order = tensor.shape[0], tensor.ndim - 1
    entries = []
    for mode in range(dim):
        for lower in combinations_with_replacement(range(dim), order):
            value = tensor[(mode, *lower)] * len(set(permutations(lower)))
            if abs(value) > tol:
                entries.append([mode + 1, *(index + 1 for index in lower), float(value)])
    return entries


def dump_model_file(model: SpectralModel) -> Dict[str, Any]:
    """Sparse description of a model that build_custom turns back into the same model."""
    linear = model.linear
    document: Dict[str, Any] = {'label': model.label, 'dim': model.dim, 'mu': model.mu.tolist()}
    if model.is_affine:
        document['linear'] = {'c0': model.linear_c0.tolist(), 'c1': model.linear_c1.tolist()}
    else:
        document['linear'] = {'polynomial': linear.tolist()}
    document['Q'] = _classes(model.Q)
    document['C'] = _classes(model.C)
    info = model.gradient_info
    if info is not None:
        gradient: Dict[str, Any] = {'weights': info.weights.tolist(), 'norms': info.norms.tolist()}
        if info.cube_integrals is not None:
            gradient['cube_integrals'] = info.cube_integrals.tolist()
        document['gradient_info'] = gradient
    return document
