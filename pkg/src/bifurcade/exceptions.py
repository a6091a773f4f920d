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

"""Exceptions used by bifurcade"""
from typing import Any, Dict, Optional


class BifurcadeException(Exception):
    """
    Base class for all bifurcade errors.
    Each custom exception should be derived from this class
    """

    def __init__(self, msg="<No Message>"):
        super().__init__(msg)
        self.msg = msg


class BifurcadeValidationError(BifurcadeException):
    """Raise when inputs fail validation (CLI exit code 2)"""

    exit_code = 2


class InvalidModel(BifurcadeValidationError):
    """Raise when a model description or builder input is malformed"""


class InvalidState(BifurcadeValidationError):
    """Raise when a state vector does not match the model dimension"""


class InvalidArgument(BifurcadeValidationError):
    """Raise when an operation precondition is violated"""


class Unsupported(BifurcadeValidationError):
    """Raise when a model lacks the structure an operation needs"""


class WrongArity(BifurcadeValidationError):
    """Raise when a crossing has the wrong crossing number for an operation"""


class BifurcadeNumericalError(BifurcadeException):
    """
    Raise when a numerical procedure fails (CLI exit code 3).
    The details are written to the run report as diagnostics.
    """

    exit_code = 3

    def __init__(self, msg="<No Message>", details: Optional[Dict[str, Any]] = None):
        super().__init__(msg)
        self.details = details or {}

    def diagnostics(self) -> Dict[str, Any]:
        return {'error': type(self).__name__, 'message': self.msg, 'details': self.details}


class Degenerate(BifurcadeNumericalError):
    """Raise when a crossing is not transversal"""


class IntervalTooTight(BifurcadeNumericalError):
    """Raise when no parameter interval around a crossing excludes the others"""


class InconsistentCrossing(BifurcadeNumericalError):
    """Raise when a non-center mode is critical at the crossing"""


class PersistentTangency(BifurcadeNumericalError):
    """Raise when block faces remain tangent to the field after refinement"""


class IsolationLost(BifurcadeNumericalError):
    """Raise when a box stops being an isolating block at some parameter"""

    def __init__(self, lam: float, details: Optional[Dict[str, Any]] = None):
        super().__init__(f"Isolation lost at lambda={lam!r}", {'lambda': lam, **(details or {})})
        self.lam = lam


class NoInvariantSetFound(BifurcadeNumericalError):
    """Raise when a nonempty bifurcating set is predicted but none is found"""


class SwitchFailed(BifurcadeNumericalError):
    """Raise when the branch switching corrector does not converge"""


class SingularContinuation(BifurcadeNumericalError):
    """Raise when the bordered Jacobian of the continuation is singular"""
