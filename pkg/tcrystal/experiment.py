#!/usr/bin/env python3
"""
Experiment configuration for tcrystal
=====================================
YAML experiment files are parsed into an ExperimentConfig and validated
before any computation starts. Unknown keys are rejected at every level.
"""

import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import yaml

from . import config
from .features.errors import ConfigError, DimensionError, TCrystalError
from .features.models import GAMMA_TAU_WARN, BathConfig, ModelKind, SpinModel, resolve_observables

logger = logging.getLogger(__name__)

EXPERIMENTS = ('spectrum', 'collision_run', 'lindblad_run', 'symmetry_check',
               'field_sweep', 'temperature_sweep', 'compare_engines')
SWEEP_PARAMETERS = {'field_sweep': 'B', 'temperature_sweep': 'beta', 'spectrum': 'B'}
SYMMETRY_OPERATORS = ('lmg_n3', 'xxz_a1', 'xxz_a2')


@dataclass
class GkslSection:
    Gamma: float = config.DEFAULT_GAMMA_DAMPING
    n_bar: float = 0.0
    method: str = 'auto'


@dataclass
class SweepSection:
    parameter: str
    values: list
    n_qubits: Optional[list] = None


@dataclass
class AnalysisSection:
    observable: Optional[str] = None
    transient_fraction: float = 0.5
    grid_points: int = 512
    freq_max: Optional[float] = None
    probe_times: list = field(default_factory=list)
    window: Optional[float] = None
    onset_threshold: float = 0.5


@dataclass
class SymmetrySection:
    operators: list = field(default_factory=list)
    n_bar_values: list = field(default_factory=lambda: [0.0])
    search: bool = False
    tol: float = 1e-7


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    model: SpinModel
    bath: Optional[BathConfig] = None
    gksl: Optional[GkslSection] = None
    initial_state: str = ''
    n_collisions: int = 400
    t_final: float = 500.0
    dt: float = 0.25
    record_substeps: int = config.DEFAULT_RECORD_SUBSTEPS
    sampler: str = 'exponential'
    observables: list = field(default_factory=list)
    sweep: Optional[SweepSection] = None
    analysis: AnalysisSection = field(default_factory=AnalysisSection)
    symmetry: Optional[SymmetrySection] = None
    name: str = ''
    out: Optional[str] = None
    workers: Optional[int] = None
    raw: dict = field(default_factory=dict, repr=False)


@dataclass
class ValidationReport:
    path: str
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def _float(value, name: str) -> float:
    if isinstance(value, str) and value.strip().lower() in ('inf', '+inf', '.inf', 'infinity'):
        return math.inf
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"'{name}' must be a number, got {value!r}")


def _int(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"'{name}' must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"'{name}' must be >= {minimum}, got {value}")
    return value


def _optional_float(value, name: str) -> Optional[float]:
    return None if value is None else _float(value, name)


def _float_list(values, name: str) -> list:
    if not isinstance(values, (list, tuple)):
        raise ConfigError(f"'{name}' must be a list, got {values!r}")
    return [_float(v, name) for v in values]


def _build(cls, data: dict, name: str):
    try:
        return cls(**data)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid '{name}' section: {e}")


def _section(cls, data, name: str, required=()):
    if not isinstance(data, dict):
        raise ConfigError(f"Section '{name}' must be a mapping")
    allowed = {f.name for f in fields(cls)} - {'raw'}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"Unknown key(s) in '{name}': {', '.join(unknown)}")
    missing = [key for key in required if key not in data]
    if missing:
        raise ConfigError(f"Missing required field(s) in '{name}': {', '.join(missing)}")
    return dict(data)


def _parse_model(data) -> SpinModel:
    data = _section(SpinModel, data, 'model', required=('kind', 'n_qubits'))
    data['n_qubits'] = _int(data['n_qubits'], 'model.n_qubits', 2)
    for key in ('J', 'B', 'delta'):
        if key in data:
            data[key] = _float(data[key], f'model.{key}')
    return _build(SpinModel, data, 'model')


def _parse_bath(data) -> BathConfig:
    data = _section(BathConfig, data, 'bath', required=('beta', 'field', 'tau', 'gamma'))
    for key in ('beta', 'field', 'tau', 'gamma'):
        data[key] = _float(data[key], f'bath.{key}')
    return _build(BathConfig, data, 'bath')


def _parse_gksl(data) -> GkslSection:
    data = _section(GkslSection, data, 'gksl')
    for key in ('Gamma', 'n_bar'):
        if key in data:
            data[key] = _float(data[key], f'gksl.{key}')
    return GkslSection(**data)


def _parse_sweep(data) -> SweepSection:
    data = _section(SweepSection, data, 'sweep', required=('parameter', 'values'))
    if not isinstance(data['values'], (list, tuple)):
        raise ConfigError(f"'sweep.values' must be a list, got {data['values']!r}")
    if data.get('n_qubits') is not None:
        if not isinstance(data['n_qubits'], (list, tuple)):
            raise ConfigError(f"'sweep.n_qubits' must be a list, got {data['n_qubits']!r}")
        data['n_qubits'] = [_int(n, 'sweep.n_qubits', 2) for n in data['n_qubits']]
    return SweepSection(**data)


def _parse_analysis(data) -> AnalysisSection:
    data = _section(AnalysisSection, data, 'analysis')
    for key in ('transient_fraction', 'onset_threshold'):
        if key in data:
            data[key] = _float(data[key], f'analysis.{key}')
    for key in ('freq_max', 'window'):
        if key in data:
            data[key] = _optional_float(data[key], f'analysis.{key}')
    if 'grid_points' in data:
        data['grid_points'] = _int(data['grid_points'], 'analysis.grid_points', 2)
    if 'probe_times' in data:
        data['probe_times'] = _float_list(data['probe_times'], 'analysis.probe_times')
    if data.get('observable') is not None and not isinstance(data['observable'], str):
        raise ConfigError(f"'analysis.observable' must be a name, got {data['observable']!r}")
    return AnalysisSection(**data)


def _parse_symmetry(data) -> SymmetrySection:
    data = _section(SymmetrySection, data, 'symmetry')
    if 'n_bar_values' in data:
        data['n_bar_values'] = _float_list(data['n_bar_values'], 'symmetry.n_bar_values')
    if 'tol' in data:
        data['tol'] = _float(data['tol'], 'symmetry.tol')
    operators = data.get('operators', [])
    if not isinstance(operators, list) or not all(isinstance(op, str) for op in operators):
        raise ConfigError(f"'symmetry.operators' must be a list, got {data['operators']!r}")
    return SymmetrySection(**data)


def parse_config(data: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a parsed YAML mapping"""
    data = _section(ExperimentConfig, data, 'config', required=('experiment', 'seed', 'model'))
    if data['experiment'] not in EXPERIMENTS:
        raise ConfigError(f"Unknown experiment '{data['experiment']}' (expected one of {', '.join(EXPERIMENTS)})")
    if isinstance(data['seed'], bool) or not isinstance(data['seed'], int) or data['seed'] < 0:
        raise ConfigError(f"'seed' must be a non-negative integer, got {data['seed']!r}")

    cfg = dict(data)
    cfg['raw'] = data
    cfg['model'] = _parse_model(data['model'])
    if data.get('bath') is not None:
        cfg['bath'] = _parse_bath(data['bath'])
    if data.get('gksl') is not None:
        cfg['gksl'] = _parse_gksl(data['gksl'])
    if data.get('sweep') is not None:
        cfg['sweep'] = _parse_sweep(data['sweep'])
    if data.get('analysis') is not None:
        cfg['analysis'] = _parse_analysis(data['analysis'])
    if data.get('symmetry') is not None:
        cfg['symmetry'] = _parse_symmetry(data['symmetry'])
    if isinstance(cfg.get('initial_state'), list):
        cfg['initial_state'] = ''.join(str(label) for label in cfg['initial_state'])
    if not isinstance(cfg.get('initial_state', ''), str):
        raise ConfigError(f"'initial_state' must be a list of labels, got {cfg['initial_state']!r}")
    for key, minimum in (('n_collisions', 1), ('record_substeps', 0)):
        if key in data:
            cfg[key] = _int(data[key], key, minimum)
    if data.get('workers') is not None:
        cfg['workers'] = _int(data['workers'], 'workers', 1)
    for key in ('t_final', 'dt'):
        if key in data:
            cfg[key] = _float(data[key], key)
    observables = cfg.get('observables', [])
    if not isinstance(observables, list) or not all(isinstance(name, str) for name in observables):
        raise ConfigError(f"'observables' must be a list of names, got {observables!r}")
    experiment = ExperimentConfig(**cfg)
    check_config(experiment)
    return experiment


def check_config(cfg: ExperimentConfig) -> None:
    """Cross-field checks; raises ConfigError on the first violation"""
    kind = cfg.experiment
    n = cfg.model.n_qubits
    needs_state = kind in ('collision_run', 'lindblad_run', 'field_sweep', 'temperature_sweep', 'compare_engines')
    if needs_state and len(cfg.initial_state) != n:
        raise ConfigError(f"'initial_state' must give one label per qubit ({n}), got '{cfg.initial_state}'")
    bad_labels = sorted(set(cfg.initial_state) - set('01+-'))
    if bad_labels:
        raise ConfigError(f"Invalid initial_state label(s): {', '.join(bad_labels)} (expected 0, 1, + or -)")
    if kind in ('collision_run', 'field_sweep', 'temperature_sweep', 'compare_engines') and cfg.bath is None:
        raise ConfigError(f"Experiment '{kind}' needs a 'bath' section")
    if kind in ('lindblad_run', 'compare_engines') and cfg.gksl is None:
        raise ConfigError(f"Experiment '{kind}' needs a 'gksl' section")
    if cfg.gksl is not None:
        if not cfg.gksl.Gamma > 0 or cfg.gksl.n_bar < 0:
            raise ConfigError("gksl.Gamma must be positive and gksl.n_bar non-negative")
        if cfg.gksl.method not in ('auto', 'exact', 'rk4'):
            raise ConfigError(f"Unknown gksl.method '{cfg.gksl.method}'")
    if kind in SWEEP_PARAMETERS:
        if cfg.sweep is None:
            raise ConfigError(f"Experiment '{kind}' needs a 'sweep' section")
        if cfg.sweep.parameter != SWEEP_PARAMETERS[kind]:
            raise ConfigError(f"Experiment '{kind}' sweeps '{SWEEP_PARAMETERS[kind]}', "
                              f"got '{cfg.sweep.parameter}'")
        if not cfg.sweep.values:
            raise ConfigError("sweep.values must be nonempty")
        cfg.sweep.values = [_float(v, 'sweep.values') for v in cfg.sweep.values]
    if kind == 'lindblad_run' and cfg.sweep is not None:
        if cfg.sweep.parameter != 'n_bar' or not cfg.sweep.values:
            raise ConfigError("lindblad_run sweeps only 'n_bar' over a nonempty value list")
        cfg.sweep.values = [_float(v, 'sweep.values') for v in cfg.sweep.values]
        if any(v < 0 for v in cfg.sweep.values):
            raise ConfigError("sweep n_bar values must be non-negative")
    if kind == 'field_sweep' and cfg.model.kind is not ModelKind.LMG:
        raise ConfigError("field_sweep compares against the LMG frequency law and needs an lmg model")
    if kind in ('field_sweep', 'temperature_sweep', 'compare_engines') and not cfg.analysis.observable:
        raise ConfigError(f"Experiment '{kind}' needs analysis.observable")
    if kind == 'temperature_sweep' and not cfg.analysis.probe_times:
        raise ConfigError("temperature_sweep needs analysis.probe_times")
    if kind == 'symmetry_check':
        if cfg.symmetry is None or not (cfg.symmetry.operators or cfg.symmetry.search):
            raise ConfigError("symmetry_check needs symmetry.operators or symmetry.search")
        unknown = sorted(set(cfg.symmetry.operators) - set(SYMMETRY_OPERATORS))
        if unknown:
            raise ConfigError(f"Unknown symmetry operator(s): {', '.join(unknown)}")
    if cfg.n_collisions < 1 or cfg.t_final <= 0 or cfg.dt <= 0:
        raise ConfigError("n_collisions, t_final and dt must be positive")
    if cfg.sampler not in ('exponential', 'fixed'):
        raise ConfigError(f"Unknown sampler '{cfg.sampler}' (expected exponential or fixed)")
    if not 0 <= cfg.analysis.transient_fraction < 1:
        raise ConfigError("analysis.transient_fraction must lie in [0, 1)")
    sizes = [n] + list(cfg.sweep.n_qubits or []) if cfg.sweep else [n]
    for size in sizes:
        names = cfg.observables + ([cfg.analysis.observable] if cfg.analysis.observable else [])
        try:
            resolve_observables(names, size)
        except DimensionError as e:
            raise ConfigError(f"Observable outside a {size}-qubit register: {e}")


def load_config(path) -> ExperimentConfig:
    """Read and validate a YAML experiment file"""
    path = Path(path)
    try:
        with open(path) as handle:
            data = yaml.safe_load(handle)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}")
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse config {path}: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must contain a mapping")
    cfg = parse_config(data)
    if not cfg.name:
        cfg.name = path.stem
    logger.info(f"✅ Loaded experiment '{cfg.name}' ({cfg.experiment})")
    return cfg


def validate(path) -> ValidationReport:
    """Schema check plus physical-range warnings, without running anything"""
    report = ValidationReport(path=str(path))
    try:
        cfg = load_config(path)
    except TCrystalError as e:
        report.errors.append(str(e))
        return report

    if cfg.bath is not None and cfg.bath.gamma * cfg.bath.tau > GAMMA_TAU_WARN:
        report.warnings.append(
            f"gamma*tau = {cfg.bath.gamma * cfg.bath.tau:.3g} violates gamma*tau << 1 "
            f"(the reference figures use gamma = 1, tau = 0.5 as well)")
    sizes = [cfg.model.n_qubits] + list((cfg.sweep.n_qubits or []) if cfg.sweep else [])
    dim = 2 ** max(sizes)
    uses_superop = cfg.experiment in ('lindblad_run', 'compare_engines', 'symmetry_check')
    if uses_superop and dim > config.SUPEROP_MAX_DIM:
        report.warnings.append(f"Dimension {dim} exceeds {config.SUPEROP_MAX_DIM}: GKSL propagation "
                               f"falls back to RK4 and channel spectra are unavailable")
    if cfg.symmetry is not None and cfg.symmetry.search and dim > config.SEARCH_MAX_DIM:
        report.errors.append(f"Symmetry search is limited to dimension {config.SEARCH_MAX_DIM}, got {dim}")
    return report
