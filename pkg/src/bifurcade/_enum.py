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

from enum import Enum


class Verdict(str, Enum):
    attractor = "AttractorOnCenter"
    repeller = "RepellerOnCenter"
    neither = "NeitherIsolated"
    unresolved = "Unresolved"


class SetKind(str, Enum):
    empty = "Empty"
    points = "EquilibriumPoints"
    sphere = "SphereBoundary"
    unresolved = "Unresolved"


class StaticAlternative(str, Enum):
    accumulating = "AccumulatingNontrivialEquilibria"
    one_sided = "OneSidedTwoSolutions"
    two_sided = "TwoSidedOneSolution"


class Stability(str, Enum):
    stable = "stable"
    unstable = "unstable"
    degenerate = "degenerate"


class Termination(str, Enum):
    param_boundary = "HitParamBoundary"
    norm_boundary = "HitNormBoundary"
    reconnect = "ReconnectTrivial"
    accumulate = "AccumulateAtZero"
    max_steps = "MaxSteps"


class Alternative(str, Enum):
    """Which global alternative a traced branch realizes."""

    meets_boundary = "meets_boundary"
    accumulates_at_origin = "accumulates_at_origin"
    reconnects_trivial = "reconnects_trivial"
    undetermined = "undetermined"


class TrajectoryStatus(str, Enum):
    completed = "completed"
    steady = "steady"
    diverged = "diverged"


class ProbeSide(str, Enum):
    unstable = "sigma_minus"
    stable = "sigma_plus"


class ProbeVerdict(str, Enum):
    descending = "connections_descend"
    inconclusive = "inconclusive"
    origin_stable = "origin_stable"


class FaceLabel(str, Enum):
    exit = "exit"
    ingress = "ingress"
    tangent = "tangent"


class OutputFormat(str, Enum):
    json = "json"
    csv = "csv"


class Command(str, Enum):
    spectrum = "spectrum"
    detect = "detect"
    reduce = "reduce"
    classify = "classify"
    localbif = "localbif"
    index = "index"
    branch = "branch"
    global_ = "global"
    probe = "probe"
    simulate = "simulate"
