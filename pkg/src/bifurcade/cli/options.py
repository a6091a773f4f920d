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

from typer import Option

from bifurcade.cli.utils import env_file_callback, existing_file, version_callback

version_option = Option(None, "--version", callback=version_callback, is_eager=True)
env_file_option = Option(
    '.env',
    "--env-file",
    callback=env_file_callback,
    help="Settings file with BIFURCADE_* variables.",
    envvar='BIFURCADE_CONFIG',
)
config_option = Option(
    None, "--config", "-c", callback=existing_file, help="Run configuration (YAML or JSON)."
)
model_option = Option(None, "--model", "-m", callback=existing_file, help="Model description file.")
out_option = Option(None, "--out", "-o", help="Output directory for report.json and the CSV tables.")
format_option = Option(None, "--format", "-f", help="Output formats to write (repeatable).")
lambda_lo_option = Option(None, "--lambda-lo", help="Lower end of the parameter window.")
lambda_hi_option = Option(None, "--lambda-hi", help="Upper end of the parameter window.")
lambda_option = Option(None, "--lambda", help="Parameter value for single-lambda commands.")
crossing_option = Option(None, "--crossing", help="Bifurcation value to work at (default: first in window).")
order_option = Option(None, "--order", help="Center manifold reduction order (2-5).")
seed_option = Option(None, "--seed", help="Seed for sampled initial conditions.")
log_file_option = Option(None, "--log-file", help="File to write logs to")
level_option = Option(None, "--level", "-l", help="Log level printed to the console.")
