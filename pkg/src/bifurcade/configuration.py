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

"""Package wide settings read from the environment or an env file."""
import os
from enum import Enum
from pathlib import Path
from textwrap import dedent

from pydantic import BaseSettings, validator

from bifurcade.utils.log import LogLevel, setup_logger


class IntegratorMethod(str, Enum):
    RK45 = 'RK45'
    DOP853 = 'DOP853'


class BifurcadeConfiguration(BaseSettings):
    """Settings for numerical defaults and logging."""

    log: LogLevel = LogLevel.INFO
    galerkin_modes: int = 16
    blowup_bound: float = 1e6
    root_tolerance: float = 1e-9
    transversality_threshold: float = 1e-8
    integrator_method: IntegratorMethod = IntegratorMethod.RK45

    class Config:
        """Pydantic configuration"""

        env_file = os.environ.get("BIFURCADE_CONFIG", ".env")
        env_prefix = "BIFURCADE_"
        extra = "forbid"

    @validator('log', pre=True)
    def validate_log(cls, value):
        if isinstance(value, LogLevel):
            return value
        try:
            return LogLevel.parse(value)
        except ValueError as exc:
            raise ValueError(f"log must be one of error|warn|info|debug, got {value!r}") from exc

    @validator('galerkin_modes')
    def validate_galerkin_modes(cls, galerkin_modes: int) -> int:
        if galerkin_modes >= 3:
            return galerkin_modes
        raise ValueError(f'galerkin_modes must be at least 3: {galerkin_modes}')

    @validator('blowup_bound', 'root_tolerance', 'transversality_threshold')
    def validate_positive(cls, value: float) -> float:
        if value > 0:
            return value
        raise ValueError(f'value must be positive: {value}')

    def display(self, show_defaults: bool = False):
        params = []
        for key, val in self.dict().items():
            if val is not None:
                str_val = val.value if isinstance(val, Enum) else val
                if show_defaults or key in self.__fields_set__:
                    params.append(f"bifurcade_{key} = {str_val}")
                else:
                    params.append(f"# bifurcade_{key} = {str_val}")

        params_str = "\n".join(params)
        output = f"""# bifurcade Settings\n{params_str}"""
        return dedent(output)

    def update(self, new_config: 'BifurcadeConfiguration', set_defaults: bool = False):
        for field in self.__fields__:
            if field in new_config.__fields_set__ or set_defaults:
                setattr(self, field, getattr(new_config, field))

    def __str__(self):
        return self.display()

    def __repr__(self):
        return self.display()


config = BifurcadeConfiguration()
root_logger, stdout_handler = setup_logger(config.log, config.log)


def update_config(config_file: 'Path') -> BifurcadeConfiguration:
    global config
    input_config = BifurcadeConfiguration(_env_file=config_file)
    config.update(input_config)
    root_logger.setLevel(config.log.get_log_level())
    stdout_handler.setLevel(config.log.get_log_level())
    return config
