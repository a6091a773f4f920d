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

from pathlib import Path

import pytest

from bifurcade.configuration import config, root_logger, stdout_handler
from bifurcade.core.model import build_cahn_hilliard_1d
from bifurcade.core.model_file import load_model_file
from bifurcade.core.spectrum import detect_bifurcation_values

EXAMPLES = Path(__file__).parent / "example"


@pytest.fixture(scope="session")
def example_dir() -> Path:
    return EXAMPLES


@pytest.fixture(scope="session")
def pitchfork_model():
    """Symmetric Cahn-Hilliard on [0, pi] with a cubic nonlinearity only."""
    return build_cahn_hilliard_1d(3.141592653589793, 0.0, 1.0, 8)


@pytest.fixture(scope="session")
def pitchfork_crossing(pitchfork_model):
    return detect_bifurcation_values(pitchfork_model, 0.5, 1.5)[0]


@pytest.fixture(scope="session")
def transcritical_model():
    return load_model_file(EXAMPLES / "transcritical.yaml")


@pytest.fixture(scope="session")
def circle_model():
    return load_model_file(EXAMPLES / "circle.yaml")


@pytest.fixture(scope="session")
def reconnect_model():
    return load_model_file(EXAMPLES / "reconnect.yaml")


@pytest.fixture(scope="function")
def reset_config():
    old = config.copy()
    levels = root_logger.level, stdout_handler.level
    yield
    config.update(old, set_defaults=True)
    root_logger.setLevel(levels[0])
    stdout_handler.setLevel(levels[1])
