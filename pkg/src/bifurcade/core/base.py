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
from pathlib import Path, PosixPath
from typing import Any, Dict

import numpy as np
from pydantic import BaseModel

encoders = {
    np.ndarray: lambda x: x.tolist(),
    np.floating: float,
    np.integer: int,
    np.bool_: bool,
    Path: lambda x: str(x),
    PosixPath: lambda x: str(x),
}


def as_frozen_array(value, ndim: int = None) -> np.ndarray:
    """Convert to a read-only float array, optionally checking its rank."""
    array = np.array(value, dtype=float)
    if ndim is not None and array.ndim != ndim:
        raise ValueError(f"expected an array of rank {ndim}, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("array entries must be finite")
    array.setflags(write=False)
    return array


def to_builtin(value: Any) -> Any:
    """Recursively convert numpy containers to plain python for serialization."""
    if isinstance(value, BaseModel):
        return to_builtin(value.dict())
    if isinstance(value, dict):
        return {str(key): to_builtin(val) for key, val in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(val) for val in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    if hasattr(value, 'value') and hasattr(type(value), '__members__'):
        return value.value
    return value


class Base(BaseModel):
    """Common methods shared by many bifurcade objects."""

    class Config:
        """Pydantic Config"""

        json_encoders = encoders
        copy_on_model_validation = False
        arbitrary_types_allowed = True
        allow_mutation = False

    @classmethod
    def canonical_name(cls) -> str:
        return cls.__module__ + "." + cls.__qualname__

    def to_document(self) -> Dict[str, Any]:
        """Plain python representation used by the JSON reports."""
        return to_builtin(self)

    def __repr__(self) -> str:
        return f'{self.canonical_name()}()'
