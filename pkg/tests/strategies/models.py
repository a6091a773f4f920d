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

"""Hypothesis strategies for states and small custom models."""
from typing import Callable

import numpy as np
from hypothesis import strategies as st

coefficient = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)


def small_states(dim: int, bound: float = 0.3):
    return st.lists(
        st.floats(min_value=-bound, max_value=bound, allow_nan=False, allow_infinity=False),
        min_size=dim,
        max_size=dim,
    ).map(np.array)


@st.composite
def model_descriptions(draw: Callable, max_dim: int = 3):
    """Sparse model documents with one entry per symmetry class."""
    dim = draw(st.integers(min_value=1, max_value=max_dim))
    mu = sorted(draw(st.lists(st.floats(min_value=0.5, max_value=10.0), min_size=dim, max_size=dim)))
    c0 = draw(st.lists(coefficient, min_size=dim, max_size=dim))
    c1 = draw(st.lists(coefficient, min_size=dim, max_size=dim))
    modes = st.integers(min_value=1, max_value=dim)
    quadratic = draw(
        st.lists(
            st.tuples(modes, modes, modes, coefficient).filter(lambda e: e[1] <= e[2]),
            max_size=4,
            unique_by=lambda e: e[:3],
        )
    )
    cubic = draw(
        st.lists(
            st.tuples(modes, modes, modes, modes, coefficient).filter(lambda e: e[1] <= e[2] <= e[3]),
            max_size=4,
            unique_by=lambda e: e[:4],
        )
    )
    return {
        'label': 'drawn',
        'dim': dim,
        'mu': mu,
        'linear': {'c0': c0, 'c1': c1},
        'Q': [list(entry) for entry in quadratic],
        'C': [list(entry) for entry in cubic],
    }
