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

"""Dynamic bifurcation analysis of spectral Galerkin evolution equations."""

__author__ = "Michael Statt"
__email__ = "michael.statt@modelyst.io"
__maintainer__ = "Michael Statt"
__maintainer_email__ = "michael.statt@modelyst.io"
__version__ = "0.1.0"


from bifurcade.core.bifurcation import (
    bifurcating_set,
    classify_static_n1,
    classify_trivial,
    hausdorff_semidistance,
    index_of_bifurcating_set,
)
from bifurcade.core.center_manifold import evaluate_reduced, invariance_residual, lift, reduce
from bifurcade.core.conley import (
    ConleyIndex,
    IsolatingBlock,
    build_isolating_block,
    index_constancy_sweep,
    relative_betti,
    suspend,
    wedge,
)
from bifurcade.core.continuation import (
    continue_branch,
    global_report,
    heteroclinic_probe,
    switch_branch,
    trace_trivial_branch,
)
from bifurcade.core.model import (
    SpectralModel,
    build_cahn_hilliard_1d,
    integrate,
    jacobian,
    lyapunov_value,
    vector_field,
)
from bifurcade.core.model_file import build_custom, load_model_file
from bifurcade.core.spectrum import CrossingData, crossing_data, detect_bifurcation_values, linear_spectrum
