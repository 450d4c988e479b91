import math

import numpy as np
import pytest

from tcrystal.features import collision
from tcrystal.features.analysis import dominant_frequency, periodogram
from tcrystal.features.collision import TrajectoryRecord
from tcrystal.features.errors import DimensionError, InvalidStateError
from tcrystal.features.models import BathConfig, SpinModel, initial_state, resolve_observables
from tcrystal.features.symmetry import lmg_symmetry_n3
from tcrystal.features.tensor import expm_unitary, validate_density_matrix
from tcrystal.launcher import derive_seed
from conftest import rand_density_matrix


def test_kraus_completeness(rng, lmg3):
    H = lmg3.hamiltonian()
    for beta in [math.inf, 2.5, 1.0, 0.0]:
        rho_A = BathConfig(beta=beta, field=0.5, tau=0.5, gamma=1.0).ancilla_state()
        for _ in range(3):
            channel = collision.kraus_set(H, rng.uniform(0.05, 1.0), rng.exponential(1.0), rho_A)
            assert channel.completeness_error() < 1e-10
            assert len(channel.kraus_ops) == 4


def test_kraus_matches_joint_unitary(rng, lmg3):
    H = lmg3.hamiltonian()
    tau, theta = 0.5, 0.83
    rho_A = BathConfig(beta=1.0, field=0.5, tau=tau, gamma=1.0).ancilla_state()
    channel = collision.kraus_set(H, tau, theta, rho_A)
    U_free = expm_unitary(H, theta)
    U_coll = collision.collision_unitary(H, tau)
    for _ in range(20):
        rho = rand_density_matrix(8, rng)
        ret_ = collision.apply_collision(U_free @ rho @ U_free.conj().T, rho_A, U_coll)
        assert np.abs(channel.apply(rho) - ret_).max() < 1e-10


def test_interaction_swaps_single_excitation():
    h_int = collision.interaction_hamiltonian()
    ret_ = np.zeros((4, 4))
    ret_[1, 2] = ret_[2, 1] = 1
    assert np.abs(h_int - ret_).max() < 1e-12


def test_channel_spectrum_fixed_point(rng, lmg3):
    bath = BathConfig(beta=1.0, field=0.5, tau=0.5, gamma=1.0)
    channel = collision.channel_for(lmg3, bath, 0.71)
    spectrum = collision.channel_spectrum(collision.channel_superoperator(channel))
    assert np.all(np.abs(spectrum.eigenvalues) < 1 + 1e-8)
    assert abs(spectrum.eigenvalues[0]) > 1 - 1e-8
    validate_density_matrix(spectrum.fixed_point, herm_tol=1e-10, trace_tol=1e-10, eig_tol=1e-8)
    assert np.abs(channel.apply(spectrum.fixed_point) - spectrum.fixed_point).max() < 1e-8


def test_superoperator_dimension_guard():
    model = SpinModel(kind='lmg', n_qubits=6)
    bath = BathConfig(beta=math.inf, field=0.5, tau=0.5, gamma=1.0)
    channel = collision.channel_for(model, bath, 0.1)
    with pytest.raises(DimensionError):
        collision.channel_superoperator(channel)


def test_dark_coherence_picks_up_forward_phase(lmg3, cold_bath):
    # zero temperature: Lambda[A rho_inf] = exp(+i lam (tau + theta)) A rho_inf
    A = lmg_symmetry_n3().operator
    rng = np.random.default_rng(7)
    for _ in range(10):
        channel = collision.channel_for(lmg3, cold_bath, float(rng.exponential(1.0)))
        rho_inf = collision.channel_spectrum(collision.channel_superoperator(channel)).fixed_point
        check = collision.oscillation_check(channel, A, rho_inf, 5 / 3)
        assert check.residual_plus < 1e-7
        assert check.sign == 1
        assert abs(abs(check.mu) - 1) < 1e-7


def test_waiting_time_samplers():
    rng = collision.make_rng(5)
    samples = np.array([collision.sample_waiting_time(rng, 2.0) for _ in range(20000)])
    assert np.all(samples >= 0)
    assert abs(samples.mean() - 0.5) < 0.02
    assert collision.fixed_waiting_time(rng, 4.0) == 0.25
    with pytest.raises(InvalidStateError):
        collision.sample_waiting_time(rng, 0.0)


def _run(model, bath, labels, n_collisions, seed, names=('sx2', 'sx3'), **kwargs):
    return collision.run_trajectory(model, initial_state(labels), bath, n_collisions,
                                    resolve_observables(list(names), model.n_qubits), seed, **kwargs)


def test_trajectory_is_reproducible(lmg3, cold_bath):
    a = _run(lmg3, cold_bath, '0+0', 60, seed=11)
    b = _run(lmg3, cold_bath, '0+0', 60, seed=11)
    c = _run(lmg3, cold_bath, '0+0', 60, seed=12)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.series('sx2'), b.series('sx2'))
    assert not np.array_equal(a.times, c.times)
    assert a.collision_count == 60
    assert a.times.size == 1 + 60 * (1 + 4)
    assert a.config['bath']['tau'] == 0.5


def test_state_stays_physical(lmg3):
    bath = BathConfig(beta=1.0, field=0.5, tau=0.5, gamma=1.0)
    worst = {'trace': 0.0, 'herm': 0.0, 'eig': 0.0}

    def hf0(j, t, rho):
        worst['trace'] = max(worst['trace'], abs(np.trace(rho) - 1))
        worst['herm'] = max(worst['herm'], np.abs(rho - rho.conj().T).max())
        worst['eig'] = min(worst['eig'], np.linalg.eigvalsh((rho + rho.conj().T) / 2).min())

    _run(lmg3, bath, '0+0', 400, seed=3, on_collision=hf0)
    assert worst['trace'] < 1e-10
    assert worst['herm'] < 1e-10
    assert worst['eig'] > -1e-10


def test_fixed_sampler_spacing(lmg3, cold_bath):
    record = _run(lmg3, cold_bath, '0+0', 10, seed=1, record_substeps=0, sampler=collision.fixed_waiting_time)
    assert np.abs(np.diff(record.times) - 1.5).max() < 1e-12
    assert record.config['sampler'] == 'fixed'


def test_run_rejects_bad_input(lmg3, cold_bath):
    with pytest.raises(DimensionError):
        collision.run_trajectory(lmg3, initial_state('00'), cold_bath, 5, {}, seed=0)
    with pytest.raises(InvalidStateError):
        collision.run_trajectory(lmg3, initial_state('000'), cold_bath, 0, {}, seed=0)
    with pytest.raises(InvalidStateError):
        TrajectoryRecord(times=np.array([0.0, 1.0, 1.0]), observables={}, seed=0, collision_count=0)


def test_zero_temperature_anti_phase(lmg3, cold_bath):
    record = _run(lmg3, cold_bath, '0+0', 400, seed=2024)
    late = record.times >= record.times[-1] / 2
    sx2, sx3 = record.series('sx2')[late], record.series('sx3')[late]
    assert np.ptp(sx2) > 0.1
    assert np.abs(sx2 + sx3).max() < 0.02


def test_n4_symmetric_sites_coincide(cold_bath):
    model = SpinModel(kind='lmg', n_qubits=4, B=0.5)
    record = _run(model, cold_bath, '0+00', 400, seed=9, names=('sx3', 'sx4'))
    assert np.abs(record.series('sx3') - record.series('sx4')).max() < 1e-10


@pytest.mark.slow
@pytest.mark.parametrize('n', [3, 4])
@pytest.mark.parametrize('B', [0.1, 0.3, 0.5, 0.7, 1.0])
def test_frequency_law(n, B):
    model = SpinModel(kind='lmg', n_qubits=n, B=B)
    bath = BathConfig(beta=math.inf, field=B, tau=0.5, gamma=1.0)
    seed = derive_seed(2024, ('field_sweep', n, B))
    record = _run(model, bath, '0+' + '0' * (n - 2), 400, seed=seed, names=('sx2',))
    grid = np.linspace(4.0 / 4096, 4.0, 4096)
    measured, _ = dominant_frequency(periodogram(record, 'sx2', 0.5, grid))
    ret_ = 2 / n + 2 * B
    assert abs(measured - ret_) / ret_ < 0.02
