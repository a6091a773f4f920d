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

"""Run configuration and the pipeline behind every CLI subcommand."""
import math
from logging import getLogger
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import yaml
from pydantic import Field, ValidationError, root_validator, validator
from typing_extensions import Literal

from bifurcade._enum import Command, OutputFormat, Verdict
from bifurcade.configuration import config
from bifurcade.core.base import Base
from bifurcade.core.bifurcation import (
    bifurcating_set,
    classify_static_n1,
    classify_trivial,
    index_of_bifurcating_set,
)
from bifurcade.core.center_manifold import invariance_residual, reduce
from bifurcade.core.conley import block_index, index_at_crossing, reduced_field_at, trivial_index
from bifurcade.core.continuation import (
    StepConfig,
    Window,
    continue_branch,
    global_report,
    heteroclinic_probe,
    switch_branch,
)
from bifurcade.core.model import SpectralModel, build_cahn_hilliard_1d, integrate, lyapunov_value
from bifurcade.core.model_file import load_model_file
from bifurcade.core.report import Table, build_report, diagram_tables, write_csv, write_json
from bifurcade.core.spectrum import (
    CrossingData,
    detect_bifurcation_values,
    linear_spectrum,
    usable_crossings,
)
from bifurcade.exceptions import BifurcadeNumericalError, BifurcadeValidationError, InvalidArgument
from bifurcade.utils.polynomials import grlex_sorted

logger = getLogger(__name__)

REPORT_NAME = 'report.json'


class ModelSource(Base):
    """Either the builtin Cahn-Hilliard model or a model file."""

    builtin: Optional[Literal['cahn_hilliard_1d']] = None
    path: Optional[Path] = None
    L: float = math.pi
    b2: float = 0.0
    b3: float = 1.0
    N: Optional[int] = None

    @root_validator(skip_on_failure=True)
    def validate_source(cls, values):
        if values['builtin'] is not None and values['path'] is not None:
            raise ValueError("give either a builtin model or a model file, not both")
        if values['path'] is None:
            values['builtin'] = 'cahn_hilliard_1d'
        elif not values['path'].exists():
            raise ValueError(f"model file {values['path']} does not exist")
        return values

    def load(self) -> SpectralModel:
        if self.path is not None:
            return load_model_file(self.path)
        return build_cahn_hilliard_1d(self.L, self.b2, self.b3, self.N or config.galerkin_modes)


class RunConfig(Base):
    """Everything a subcommand needs; identical configs produce identical reports."""

    model: ModelSource = Field(default_factory=ModelSource)
    lambda_lo: float = 0.0
    lambda_hi: float = 10.0
    norm_bound: float = 50.0
    order: int = 3
    box_half_width: float = 1.0
    grid: int = 8
    samples_per_edge: int = 5
    max_refinements: int = 6
    lambda_value: Optional[float] = None
    # bifurcation value to work at; defaults to the first usable one in the window
    crossing: Optional[float] = None
    h: float = 0.05
    n_directions: Optional[int] = None
    t_max: float = 200.0
    initial: Optional[List[float]] = None
    step: StepConfig = Field(default_factory=StepConfig)
    out: Path = Path('bifurcade_out')
    formats: List[OutputFormat] = [OutputFormat.json, OutputFormat.csv]
    seed: int = 0
    force: bool = False

    class Config:
        """Pydantic configuration"""

        extra = 'forbid'

    @validator('order')
    def validate_order(cls, order: int) -> int:
        if 2 <= order <= 5:
            return order
        raise ValueError(f"order must be between 2 and 5, got {order}")

    @validator('grid', 'samples_per_edge', 't_max', 'box_half_width', 'norm_bound')
    def validate_positive(cls, value):
        if value > 0:
            return value
        raise ValueError(f"value must be positive, got {value}")

    @validator('h')
    def validate_amplitude(cls, h: float) -> float:
        if h == 0:
            raise ValueError("branch switching amplitude h must be nonzero")
        return h

    @root_validator(skip_on_failure=True)
    def validate_window(cls, values):
        if not values['lambda_lo'] < values['lambda_hi']:
            raise ValueError(f"lambda_lo={values['lambda_lo']} must be below lambda_hi={values['lambda_hi']}")
        return values

    @property
    def window(self) -> Window:
        return Window(lam_lo=self.lambda_lo, lam_hi=self.lambda_hi, norm_bound=self.norm_bound)


def load_run_config(path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Read a YAML/JSON run configuration; non-None overrides replace file values."""
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = yaml.safe_load(Path(path).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise InvalidArgument(f"Cannot read run configuration {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidArgument(f"Run configuration {path} must be a mapping")
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == 'model':
            merged = {**data.get('model', {}), **value}
            if 'path' in value:
                merged.pop('builtin', None)
            data['model'] = merged
        else:
            data[key] = value
    try:
        return RunConfig.parse_obj(data)
    except ValidationError as exc:
        raise InvalidArgument(f"Invalid run configuration: {exc}") from exc


class Outcome(Base):
    result: Dict[str, Any]
    tables: Dict[str, Table] = {}


def select_crossing(model: SpectralModel, run_config: RunConfig) -> CrossingData:
    crossings = usable_crossings(
        detect_bifurcation_values(model, run_config.lambda_lo, run_config.lambda_hi), run_config.force
    )
    if not crossings:
        raise InvalidArgument(
            f"No usable crossing of {model.label} in [{run_config.lambda_lo:g}, {run_config.lambda_hi:g}]"
        )
    if run_config.crossing is None:
        return crossings[0]
    nearest = min(crossings, key=lambda c: abs(c.lambda0 - run_config.crossing))  # type: ignore
    if abs(nearest.lambda0 - run_config.crossing) > 1e-6 * max(1.0, abs(run_config.crossing)):
        raise InvalidArgument(f"No crossing at lambda={run_config.crossing:g}; nearest is {nearest.lambda0:g}")
    return nearest


def _local_lambda(crossing: CrossingData, run_config: RunConfig) -> float:
    if run_config.lambda_value is not None:
        return run_config.lambda_value
    return crossing.lambda0 + 0.1 * (crossing.half_width or 1.0)


def _required_lambda(run_config: RunConfig, command: str) -> float:
    if run_config.lambda_value is None:
        raise InvalidArgument(f"`{command}` needs lambda_value (--lambda)")
    return run_config.lambda_value


def crossing_rows(crossings: List[CrossingData]) -> Table:
    header = [
        'lambda0',
        'n',
        'm',
        'center_modes',
        'alpha1',
        'alpha2',
        'alpha3',
        'alpha4',
        'h4_orientation',
        'degenerate',
    ]
    rows = [
        [
            c.lambda0,
            c.n,
            c.m,
            ';'.join(map(str, c.center_modes)),
            *(c.gaps or ('',) * 4),
            c.h4_orientation,
            c.degenerate,
        ]
        for c in crossings
    ]
    return header, rows


def run_spectrum(model: SpectralModel, run_config: RunConfig) -> Outcome:
    lam = run_config.lambda_lo if run_config.lambda_value is None else run_config.lambda_value
    spectrum = linear_spectrum(model, lam)
    return Outcome(
        result={'model': model.label, 'lambda': lam, 'spectrum': [{'mode': k, 'beta': b} for k, b in spectrum]},
        tables={'spectrum.csv': (['mode', 'beta'], [list(row) for row in spectrum])},
    )


def run_detect(model: SpectralModel, run_config: RunConfig) -> Outcome:
    crossings = detect_bifurcation_values(model, run_config.lambda_lo, run_config.lambda_hi)
    return Outcome(
        result={'model': model.label, 'crossings': [c.to_document() for c in crossings]},
        tables={'crossings.csv': crossing_rows(crossings)},
    )


def run_reduce(model: SpectralModel, run_config: RunConfig) -> Outcome:
    crossing = select_crossing(model, run_config)
    reduced = reduce(model, crossing, run_config.order)
    residuals = {}
    if reduced.n <= 2:
        residuals = {str(h): invariance_residual(model, reduced, h) for h in (0.1, 0.05)}
    rows = []
    for label, component in [(f'F{i + 1}', c) for i, c in enumerate(reduced.coeffs)] + [
        (f'xi{k}', reduced.slave[k]) for k in reduced.slave_modes
    ]:
        for monomial in grlex_sorted(component):
            rows.append([label, ' '.join(map(str, monomial)), component[monomial]])
    return Outcome(
        result={'model': model.label, 'reduced': reduced.to_document(), 'invariance_residual': residuals},
        tables={'reduced.csv': (['polynomial', 'monomial', 'coefficient'], rows)},
    )


def run_classify(model: SpectralModel, run_config: RunConfig) -> Outcome:
    crossing = select_crossing(model, run_config)
    reduced = reduce(model, crossing, run_config.order)
    classification = classify_trivial(reduced)
    result: Dict[str, Any] = {
        'model': model.label,
        'crossing': crossing.to_document(),
        'classification': classification.to_document(),
    }
    if crossing.n == 1:
        result['static_alternative'] = classify_static_n1(model, crossing, reduced, classification).value
        if classification.verdict == Verdict.unresolved:
            result['caveat'] = "vanishing through the reduction order is evidence, not proof"
    if classification.verdict != Verdict.unresolved:
        origin = index_at_crossing(reduced, crossing, grid=run_config.grid)
        below, above = trivial_index(crossing, -1), trivial_index(crossing, 1)
        result.update(
            origin_index=origin.to_document(),
            trivial_index_below=below.to_document(),
            trivial_index_above=above.to_document(),
            nontrivial_sides=[side for side, index in (('below', below), ('above', above)) if index != origin],
        )
    return Outcome(result=result)


def run_localbif(model: SpectralModel, run_config: RunConfig) -> Outcome:
    crossing = select_crossing(model, run_config)
    reduced = reduce(model, crossing, run_config.order)
    lam = _local_lambda(crossing, run_config)
    report = bifurcating_set(model, crossing, reduced, lam, run_config.box_half_width)
    points = [[*p.w, p.stability.value] for p in report.points]
    dim = reduced.n
    samples = [list(s) + [0.0] * (2 - dim) for s in report.sphere_samples]
    return Outcome(
        result={'model': model.label, 'crossing': crossing.to_document(), 'invariant_set': report.to_document()},
        tables={
            'points.csv': ([*[f'w_{i}' for i in range(1, dim + 1)], 'stability'], points),
            'sphere.csv': (
                ['angle', 'radius'],
                [[math.atan2(y, x), math.hypot(x, y)] for x, y in samples],
            ),
        },
    )


def run_index(model: SpectralModel, run_config: RunConfig) -> Outcome:
    crossing = select_crossing(model, run_config)
    reduced = reduce(model, crossing, run_config.order)
    lam = _local_lambda(crossing, run_config)
    report = bifurcating_set(model, crossing, reduced, lam, run_config.box_half_width)
    index, nontrivial = index_of_bifurcating_set(
        model, crossing, reduced, lam, run_config.box_half_width, report, run_config.grid
    )
    origin_index, origin_block = block_index(
        reduced_field_at(reduced, 0.0),
        [(-0.1, 0.1)] * reduced.n,
        run_config.grid,
        samples_per_edge=run_config.samples_per_edge,
        max_refinements=run_config.max_refinements,
    )
    return Outcome(
        result={
            'model': model.label,
            'lambda': lam,
            'kind': report.kind.value,
            'index': index.to_document(),
            'nontrivial': nontrivial,
            'origin_index_at_crossing': origin_index.to_document(),
            'origin_block': origin_block.to_document(),
        }
    )


def run_branch(model: SpectralModel, run_config: RunConfig) -> Outcome:
    crossing = select_crossing(model, run_config)
    start = switch_branch(model, crossing, run_config.h, run_config.order)
    branch = continue_branch(
        model, start, run_config.window, run_config.step, crossing, 1 if run_config.h > 0 else -1
    )
    return Outcome(
        result={'model': model.label, 'branch': branch.to_document()}, tables=diagram_tables([branch])
    )


def run_global(model: SpectralModel, run_config: RunConfig) -> Outcome:
    report = global_report(
        model, run_config.window, run_config.step, run_config.order, run_config.h, force=run_config.force
    )
    tables = diagram_tables(report.branches) if report.branches else {}
    return Outcome(result={'global': report.to_document()}, tables=tables)


def run_probe(model: SpectralModel, run_config: RunConfig) -> Outcome:
    lam = _required_lambda(run_config, 'probe')
    probe = heteroclinic_probe(model, lam, run_config.n_directions, run_config.t_max)
    rows = [[r.side.value, r.mode, r.sign, r.status.value, r.J_at_alpha, r.J_at_omega] for r in probe.found]
    return Outcome(
        result={'model': model.label, 'probe': probe.to_document()},
        tables={'probe.csv': (['side', 'mode', 'sign', 'status', 'J_alpha', 'J_omega'], rows)},
    )


def run_simulate(model: SpectralModel, run_config: RunConfig) -> Outcome:
    lam = _required_lambda(run_config, 'simulate')
    if run_config.initial is not None:
        a0 = np.array(run_config.initial, dtype=float)
    else:
        a0 = 1e-2 * np.random.default_rng(run_config.seed).standard_normal(model.dim)
    trajectory = integrate(model, lam, a0, run_config.t_max)
    with_energy = model.gradient_info is not None
    header = ['t', *[f'a_{k}' for k in range(1, model.dim + 1)]] + (['J'] if with_energy else [])
    rows = []
    for t, state in zip(trajectory.times, trajectory.states):
        rows.append([float(t), *map(float, state)] + ([lyapunov_value(model, lam, state)] if with_energy else []))
    final = trajectory.final
    return Outcome(
        result={
            'model': model.label,
            'lambda': lam,
            'initial': a0.tolist(),
            'status': trajectory.status.value,
            'message': trajectory.message,
            'final': final.tolist(),
            'final_residual': float(np.linalg.norm(model.field(lam, final))),
        },
        tables={'trajectory.csv': (header, rows)},
    )


COMMANDS: Dict[Command, Callable[[SpectralModel, RunConfig], Outcome]] = {
    Command.spectrum: run_spectrum,
    Command.detect: run_detect,
    Command.reduce: run_reduce,
    Command.classify: run_classify,
    Command.localbif: run_localbif,
    Command.index: run_index,
    Command.branch: run_branch,
    Command.global_: run_global,
    Command.probe: run_probe,
    Command.simulate: run_simulate,
}


def write_outcome(command: Command, run_config: RunConfig, outcome: Optional[Outcome], diagnostics=None) -> List[Path]:
    """Single writer for all artifacts of a run."""
    written = []
    if OutputFormat.json in run_config.formats or diagnostics is not None:
        document = build_report(
            command.value, run_config.to_document(), None if outcome is None else outcome.result, diagnostics
        )
        written.append(write_json(document, run_config.out / REPORT_NAME))
    if outcome is not None and OutputFormat.csv in run_config.formats:
        for name, (header, rows) in outcome.tables.items():
            written.append(write_csv(header, rows, run_config.out / name))
    return written


def run(command: Command, run_config: RunConfig) -> int:
    """
    Execute one subcommand and write its artifacts.

    Returns the exit code: 0 on success, 2 on invalid input (nothing written) and 3 on a numerical
    failure (report.json carries the diagnostics).
    """
    try:
        model = run_config.model.load()
        outcome = COMMANDS[command](model, run_config)
    except BifurcadeValidationError as exc:
        logger.error(exc.msg)
        return exc.exit_code
    except BifurcadeNumericalError as exc:
        logger.error(f"{type(exc).__name__}: {exc.msg}")
        write_outcome(command, run_config, None, exc.diagnostics())
        return exc.exit_code
    written = write_outcome(command, run_config, outcome)
    logger.info(f"{command.value} finished, wrote {len(written)} file(s) to {run_config.out}")
    return 0
