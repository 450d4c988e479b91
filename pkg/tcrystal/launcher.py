#!/usr/bin/env python3
"""
tcrystal Experiment Launcher
============================
Runs one validated ExperimentConfig: dispatches to the engines, fans sweeps out
over a worker pool, collects every result in a single writer and finishes with
a JSON manifest.
"""

import hashlib
import json
import logging
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np
import scipy

from . import __version__, config
from .experiment import ExperimentConfig
from .features.analysis import (
    amplitude_envelope,
    decay_onset,
    dominant_frequency,
    frequency_law,
    frequency_vs_field,
    melting_curve,
    periodogram,
)
from .features.collision import (
    SAMPLERS,
    channel_for,
    channel_spectrum,
    channel_superoperator,
    make_rng,
    oscillation_check,
    run_trajectory,
)
from .features.errors import ConfigError, NumericalError
from .features.lindblad import (
    build_liouvillian,
    evolve,
    gksl_spec,
    liouvillian_gap,
    liouvillian_spectrum,
    model_config,
    steady_space,
)
from .features.models import ModelKind, SpinModel, initial_state, lmg_prediction, resolve_observables, spectrum_sweep
from .features.storage import ResultStore
from .features.symmetry import (
    certify,
    check_condition_i,
    kraus_condition_check,
    lmg_symmetry_n3,
    search_symmetries,
    thermal_jumps,
    xxz_symmetry_a1,
    xxz_symmetry_a2,
)
from .features.tensor import outer

logger = logging.getLogger(__name__)

SYMMETRY_BUILDERS = {
    'lmg_n3': (lmg_symmetry_n3, ModelKind.LMG, 3),
    'xxz_a1': (xxz_symmetry_a1, ModelKind.XXZ, 4),
    'xxz_a2': (xxz_symmetry_a2, ModelKind.XXZ, 4),
}
# Analytic frequency-law lines exported next to the measured points
LAW_SIZES = (3, 4, 10, 100)


def derive_seed(master: int, params) -> int:
    """Stable child seed from the master seed and a parameter tuple"""
    payload = json.dumps([int(master), list(params)], default=repr).encode()
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], 'big') >> 1


def resolve_out_dir(cli_out=None, cfg: ExperimentConfig = None) -> str:
    """--out, then TCRYSTAL_OUT_DIR, then the config's `out`, then the default"""
    if cli_out:
        return cli_out
    if os.getenv('TCRYSTAL_OUT_DIR'):
        return os.getenv('TCRYSTAL_OUT_DIR')
    if cfg is not None and cfg.out:
        return cfg.out
    return config.OUT_DIR


class ExperimentLauncher:
    def __init__(self, cfg: ExperimentConfig, out_dir=None, seed=None, workers=None):
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else int(seed)
        self.workers = max(1, int(workers or cfg.workers or config.WORKERS))
        self.store = ResultStore(os.path.join(resolve_out_dir(out_dir, cfg), cfg.name or cfg.experiment))
        self.summary = {}

    # Shared helpers
    def labels_for(self, n_qubits: int) -> str:
        """Initial-state labels for n qubits; extra qubits repeat the last configured label"""
        labels = self.cfg.initial_state
        if len(labels) >= n_qubits:
            return labels[:n_qubits]
        return labels + labels[-1] * (n_qubits - len(labels))

    def freq_grid(self):
        a = self.cfg.analysis
        if a.freq_max is None:
            return None
        return np.linspace(a.freq_max / a.grid_points, a.freq_max, a.grid_points)

    def collision_record(self, model: SpinModel, bath, seed: int, observables):
        psi0 = initial_state(self.labels_for(model.n_qubits))
        return run_trajectory(model, psi0, bath, self.cfg.n_collisions,
                              resolve_observables(observables, model.n_qubits), seed,
                              record_substeps=self.cfg.record_substeps,
                              sampler=SAMPLERS[self.cfg.sampler])

    def lindblad_record(self, model: SpinModel, n_bar: float, observables, t_final=None):
        spec = gksl_spec(model, self.cfg.gksl.Gamma, n_bar)
        psi0 = initial_state(self.labels_for(model.n_qubits))
        t_final = self.cfg.t_final if t_final is None else t_final
        grid = np.arange(0.0, t_final + 0.5 * self.cfg.dt, self.cfg.dt)
        return evolve(spec, outer(psi0, psi0), grid, resolve_observables(observables, model.n_qubits),
                      method=self.cfg.gksl.method, run_config=model_config(model, self.cfg.gksl.Gamma, n_bar))

    def dominant(self, record, observable):
        try:
            p = periodogram(record, observable, self.cfg.analysis.transient_fraction, self.freq_grid())
            return dominant_frequency(p)[0], p
        except NumericalError as e:
            logger.warning(f"⚠️ No dominant frequency for {observable}: {e}")
            return None, None

    def late_amplitude(self, record, observable) -> float:
        t = record.times
        mask = t >= t[0] + self.cfg.analysis.transient_fraction * (t[-1] - t[0])
        return float(np.ptp(record.series(observable)[mask]))

    def pool_map(self, fn, tasks):
        if self.workers == 1:
            return [fn(task) for task in tasks]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(fn, tasks))

    # Experiments
    def run_spectrum(self):
        sizes = self.cfg.sweep.n_qubits or [self.cfg.model.n_qubits]
        for n in sizes:
            model = replace(self.cfg.model, n_qubits=int(n))
            rows = spectrum_sweep(model, self.cfg.sweep.values)
            header = ['B'] + [f'e_{k}' for k in range(model.dim)]
            self.store.write_table(f'spectrum_N{n}', header, [[B] + list(values) for B, values in rows])
            if model.kind is ModelKind.LMG and n >= 3:
                predictions = [(B, *vars(lmg_prediction(int(n), B)).values()) for B, _ in rows]
                self.store.write_table(f'prediction_N{n}', ['B', 'e_nu', 'e_mu', 'degeneracy_mu', 'lam'],
                                       predictions)
        self.summary['sizes'] = [int(n) for n in sizes]

    def run_collision(self):
        cfg = self.cfg
        record = self.collision_record(cfg.model, cfg.bath, self.seed, cfg.observables)
        self.store.write_trajectory('trajectory', record)
        self.summary['final_time'] = float(record.times[-1])
        if cfg.analysis.observable:
            freq, p = self.dominant(record, cfg.analysis.observable)
            if p is not None:
                self.store.write_table('periodogram', ['freq', 'power'], p.rows())
            self.summary['dominant_frequency'] = freq
            envelope = self.amplitude_series(record, cfg.analysis.observable)
            if envelope is not None:
                self.store.write_table('envelope', ['t', 'peak_to_peak'], envelope)
            if cfg.model.kind is ModelKind.LMG and cfg.model.n_qubits >= 3:
                self.summary['predicted_frequency'] = lmg_prediction(cfg.model.n_qubits, cfg.model.B).lam

    def run_lindblad(self):
        cfg = self.cfg
        n_bars = cfg.sweep.values if cfg.sweep else [cfg.gksl.n_bar]
        records = self.pool_map(lambda nb: self.lindblad_record(cfg.model, nb, cfg.observables), n_bars)
        results = []
        for n_bar, record in zip(n_bars, records):
            self.store.write_trajectory(f'trajectory_nbar{n_bar:g}', record)
            entry = {'n_bar': n_bar}
            for name in cfg.observables:
                entry[f'{name}_frequency'] = self.dominant(record, name)[0]
                entry[f'{name}_amplitude'] = self.late_amplitude(record, name)
            if cfg.model.dim <= config.SUPEROP_MAX_DIM:
                L = build_liouvillian(gksl_spec(cfg.model, cfg.gksl.Gamma, n_bar))
                values = liouvillian_spectrum(L)
                self.store.write_table(f'liouvillian_spectrum_nbar{n_bar:g}', ['re', 'im'],
                                       [(v.real, v.imag) for v in values])
                entry['liouvillian_gap'] = liouvillian_gap(L)
            results.append(entry)
        self.summary['runs'] = results

    def _channel_checks(self, model, A, bath):
        rng = make_rng(derive_seed(self.seed, ('channel', model.n_qubits)))
        checks = []
        for _ in range(3):
            theta = float(rng.exponential(1.0 / bath.gamma))
            channel = channel_for(model, bath, theta)
            rho_inf = channel_spectrum(channel_superoperator(channel)).fixed_point
            lam, _ = check_condition_i(model.hamiltonian(), A, rho_inf)
            osc = oscillation_check(channel, A, rho_inf, lam)
            checks.append({'theta': theta, 'kraus_residual': kraus_condition_check(channel, A, rho_inf),
                           'phase_sign': osc.sign, 'phase_residual': osc.residual})
        return checks

    def run_symmetry(self):
        cfg, sym = self.cfg, self.cfg.symmetry
        Gamma = cfg.gksl.Gamma if cfg.gksl else config.DEFAULT_GAMMA_DAMPING
        reports, rows, channel_rows = [], [], []
        for name in sym.operators:
            builder, kind, n = SYMMETRY_BUILDERS[name]
            model = SpinModel(kind=kind, n_qubits=n, J=cfg.model.J, B=cfg.model.B,
                              periodic=kind is ModelKind.XXZ)
            A = builder()
            for n_bar in sym.n_bar_values:
                space = steady_space(build_liouvillian(gksl_spec(model, Gamma, n_bar)))
                report = certify(model.hamiltonian(), thermal_jumps(n, n_bar), A,
                                 [space.rho_inf] + space.basis, sym.tol, label=f'{name}_nbar{n_bar:g}')
                reports.append(report.to_dict())
                rows.append((name, n_bar, report.lambda_abs, report.sign, report.residual_i,
                             report.residual_ii_minus, report.residual_ii_plus, report.supported))
            if name == 'lmg_n3' and cfg.bath is not None:
                channel_rows.extend(self._channel_checks(model, A.operator, cfg.bath))
        self.store.write_table('symmetry_table', ['operator', 'n_bar', 'lambda_abs', 'sign', 'residual_i',
                                                  'residual_ii_minus', 'residual_ii_plus', 'supported'], rows)
        self.store.write_json('symmetry_report', {'reports': reports, 'channel_checks': channel_rows})
        if sym.search:
            found = []
            for n_bar in sym.n_bar_values:
                space = steady_space(build_liouvillian(gksl_spec(cfg.model, Gamma, n_bar)))
                for candidate in search_symmetries(cfg.model.hamiltonian(), thermal_jumps(cfg.model.n_qubits, n_bar),
                                                   space.rho_inf, sym.tol):
                    found.append((n_bar, candidate.label, candidate.lam, candidate.support_note))
            self.store.write_table('symmetry_search', ['n_bar', 'label', 'lam', 'support'], found)
            self.summary['candidates'] = len(found)
        self.summary['supported'] = {row[0] + f'_nbar{row[1]:g}': row[7] for row in rows}

    def run_field_sweep(self):
        cfg = self.cfg
        sizes = cfg.sweep.n_qubits or [cfg.model.n_qubits]
        tasks = [(int(n), B) for n in sizes for B in cfg.sweep.values]
        observables = list(dict.fromkeys(cfg.observables + [cfg.analysis.observable]))

        def work(task):
            n, B = task
            model = replace(cfg.model, n_qubits=n, B=B)
            bath = replace(cfg.bath, field=B)
            return self.collision_record(model, bath, derive_seed(self.seed, ('field_sweep', n, B)), observables)

        records = self.pool_map(work, tasks)
        rows = []
        for n in sizes:
            by_field = {B: rec for (m, B), rec in zip(tasks, records) if m == n}
            for B, rec in by_field.items():
                self.store.write_trajectory(f'trajectory_N{n}_B{B:g}', rec)
            rows.extend((n, *row) for row in frequency_vs_field(by_field, cfg.analysis.observable, int(n),
                                                               cfg.analysis.transient_fraction, self.freq_grid()))
        self.store.write_table('frequency_vs_field', ['N', 'B', 'freq_measured', 'freq_predicted'], rows)
        self.store.write_table('frequency_law', ['N', 'B', 'freq'], frequency_law(LAW_SIZES, cfg.sweep.values))
        errors = [abs(m - p) / p for _, _, m, p in rows]
        self.summary['max_relative_error'] = max(errors)

    def run_temperature_sweep(self):
        cfg = self.cfg
        sizes = cfg.sweep.n_qubits or [cfg.model.n_qubits]
        betas = [float('inf')] + [b for b in cfg.sweep.values if b != float('inf')]
        tasks = [(int(n), beta) for n in sizes for beta in betas]
        observables = list(dict.fromkeys(cfg.observables + [cfg.analysis.observable]))

        def work(task):
            n, beta = task
            # Common arrival times for every temperature of one system size
            seed = derive_seed(self.seed, ('temperature_sweep', n))
            return self.collision_record(replace(cfg.model, n_qubits=n), replace(cfg.bath, beta=beta),
                                         seed, observables)

        records = self.pool_map(work, tasks)
        onsets = {}
        for n in sizes:
            by_beta = {beta: rec for (m, beta), rec in zip(tasks, records) if m == n}
            reference = by_beta.pop(float('inf'))
            self.store.write_trajectory(f'trajectory_N{n}_reference', reference)
            for beta, rec in by_beta.items():
                self.store.write_trajectory(f'trajectory_N{n}_beta{beta:g}', rec)
            curve = melting_curve(by_beta, reference, cfg.analysis.observable, cfg.analysis.probe_times,
                                  cfg.analysis.window)
            self.store.write_table(f'melting_N{n}', ['beta', 't', 'ratio'], curve)
            onsets[int(n)] = decay_onset(curve, cfg.analysis.onset_threshold)
        self.summary['decay_onset'] = onsets

    def run_compare_engines(self):
        cfg = self.cfg
        observables = list(dict.fromkeys(cfg.observables + [cfg.analysis.observable, 'sz1']))
        collision = self.collision_record(cfg.model, cfg.bath, self.seed, observables)
        lindblad = self.lindblad_record(cfg.model, cfg.gksl.n_bar, observables)
        self.store.write_trajectory('trajectory_collision', collision)
        self.store.write_trajectory('trajectory_lindblad', lindblad)
        result = {}
        for engine, record in (('collision', collision), ('lindblad', lindblad)):
            freq, p = self.dominant(record, cfg.analysis.observable)
            late = record.series('sz1')[record.times >= 0.75 * record.times[-1]]
            result[engine] = {'dominant_frequency': freq,
                              'grid_step': p.resolution if p is not None else None,
                              'q1_fidelity': float(np.mean((1.0 + late) / 2.0))}
        self.store.write_json('engine_comparison', result)
        self.summary.update(result)

    def amplitude_series(self, record, observable):
        """Windowed amplitudes over the whole run, exported for envelope plots"""
        window = self.cfg.analysis.window
        if window is None:
            return None
        series = amplitude_envelope(record, observable, window)
        return list(zip(series.window_centers, series.peak_to_peak))

    RUNNERS = {
        'spectrum': run_spectrum,
        'collision_run': run_collision,
        'lindblad_run': run_lindblad,
        'symmetry_check': run_symmetry,
        'field_sweep': run_field_sweep,
        'temperature_sweep': run_temperature_sweep,
        'compare_engines': run_compare_engines,
    }

    def run(self) -> dict:
        """Run the configured experiment and write its manifest"""
        started = time.perf_counter()
        logger.info(f"🔬 Running '{self.cfg.name}' ({self.cfg.experiment}) with seed {self.seed}, "
                    f"{self.workers} worker(s)")
        runner = self.RUNNERS.get(self.cfg.experiment)
        if runner is None:
            raise ConfigError(f"Unknown experiment '{self.cfg.experiment}'")
        runner(self)
        manifest = {
            'name': self.cfg.name,
            'experiment': self.cfg.experiment,
            'config': self.cfg.raw,
            'seed': self.seed,
            'workers': self.workers,
            'versions': {'tcrystal': __version__, 'numpy': np.__version__, 'scipy': scipy.__version__,
                         'python': platform.python_version()},
            'wall_time_s': time.perf_counter() - started,
            'files': list(self.store.written),
            'results': self.summary,
        }
        self.store.write_json('manifest', manifest)
        logger.info(f"✅ Finished '{self.cfg.name}' in {manifest['wall_time_s']:.1f}s")
        return manifest
