import math

import numpy as np
import pytest

from tcrystal.features import lindblad
from tcrystal.features.analysis import amplitude_envelope, dominant_frequency, periodogram
from tcrystal.features.errors import InvalidStateError, NumericalError
from tcrystal.features.lindblad import LindbladSpec
from tcrystal.features.models import SpinModel, initial_state, lowering, pauli, resolve_observables
from tcrystal.features.tensor import outer, vec, validate_density_matrix


def _qubit_decay(Gamma=0.3, B=0.7):
    return LindbladSpec(hamiltonian=-B * pauli('z'), jumps=((lowering(), Gamma),))


def test_single_qubit_decay_is_analytic():
    Gamma, B = 0.3, 0.7
    spec = _qubit_decay(Gamma, B)
    grid = np.linspace(0, 10, 41)
    excited = np.diag([0, 1]).astype(np.complex128)
    record = lindblad.evolve(spec, excited, grid, {'p1': excited})
    assert np.abs(record.series('p1') - np.exp(-Gamma * grid)).max() < 1e-8

    plus = outer(initial_state('+'), initial_state('+'))
    record = lindblad.evolve(spec, plus, grid, {'sx': pauli('x')}, method='exact')
    ret_ = np.exp(-Gamma * grid / 2) * np.cos(2 * B * grid)
    assert np.abs(record.series('sx') - ret_).max() < 1e-8
    assert record.engine == 'lindblad'


def test_rk4_agrees_with_exact():
    spec = lindblad.gksl_spec(SpinModel(kind='lmg', n_qubits=2, B=0.5), 1.0, 0.2)
    psi = initial_state('+0')
    grid = np.arange(0, 5.01, 0.5)
    obs = resolve_observables(['sx1', 'sx2', 'sz1'], 2)
    exact = lindblad.evolve(spec, outer(psi, psi), grid, obs, method='exact')
    rk4 = lindblad.evolve(spec, outer(psi, psi), grid, obs, method='rk4')
    for name in obs:
        assert np.abs(exact.series(name) - rk4.series(name)).max() < 1e-7


def test_evolution_preserves_density_matrix(lmg3):
    spec = lindblad.gksl_spec(lmg3, 1.0, 0.5)
    psi = initial_state('0+0')

    def hf0(t, rho):
        validate_density_matrix(rho, herm_tol=1e-10, trace_tol=1e-10, eig_tol=1e-10)

    lindblad.evolve(spec, outer(psi, psi), np.arange(0, 20.01, 0.5), {}, on_step=hf0)


def test_liouvillian_annihilates_trace(lmg3):
    L = lindblad.build_liouvillian(lindblad.gksl_spec(lmg3, 1.0, 0.5))
    # trace preservation: vec(I)^dagger L = 0
    assert np.abs(vec(np.eye(8)).conj() @ L.matrix).max() < 1e-12


def test_steady_space_zero_temperature(lmg3):
    L = lindblad.build_liouvillian(lindblad.gksl_spec(lmg3, 1.0, 0.0))
    space = lindblad.steady_space(L)
    assert space.dimension == 2
    validate_density_matrix(space.rho_inf, herm_tol=1e-10, trace_tol=1e-10, eig_tol=1e-8)
    assert np.abs(L.matrix @ vec(space.rho_inf)).max() < 1e-10
    gram = np.array([[np.vdot(a, b) for b in space.basis] for a in space.basis])
    assert np.abs(gram - np.eye(2)).max() < 1e-10
    for x in space.basis:
        assert np.abs(x - x.conj().T).max() < 1e-12
        assert np.abs(L.matrix @ vec(x)).max() < 1e-8


@pytest.mark.parametrize('n_bar', [0.1, 0.5])
def test_steady_space_at_finite_temperature(lmg3, n_bar):
    # the odd q2/q3 sector is conserved, so the kernel stays two-dimensional
    L = lindblad.build_liouvillian(lindblad.gksl_spec(lmg3, 1.0, n_bar))
    space = lindblad.steady_space(L)
    assert space.dimension == 2
    validate_density_matrix(space.rho_inf, herm_tol=1e-10, trace_tol=1e-10, eig_tol=1e-8)
    assert np.abs(L.matrix @ vec(space.rho_inf)).max() < 1e-10


def test_steady_state_depends_on_initial_state(lmg3):
    L = lindblad.build_liouvillian(lindblad.gksl_spec(lmg3, 1.0, 0.0))
    ground = outer(initial_state('000'), initial_state('000'))
    assert np.abs(lindblad.steady_state_from(L, ground) - ground).max() < 1e-8


def test_gap_and_spectrum(lmg3):
    L = lindblad.build_liouvillian(lindblad.gksl_spec(lmg3, 1.0, 0.5))
    values = lindblad.liouvillian_spectrum(L)
    assert np.all(values.real < 1e-8)
    assert np.all(np.diff(values.real) <= 1e-12)
    assert lindblad.liouvillian_gap(L) > 0
    with pytest.raises(NumericalError):
        lindblad.liouvillian_gap(lindblad.build_liouvillian(LindbladSpec(pauli('z'), ())))


def test_occupation_and_validation():
    assert lindblad.occupation_number(math.inf, 1.0) == 0
    assert abs(lindblad.occupation_number(1.0, 1.0) - 1 / (math.e - 1)) < 1e-12
    with pytest.raises(InvalidStateError):
        lindblad.gksl_spec(SpinModel(kind='lmg', n_qubits=3), 0.0, 0.0)
    with pytest.raises(InvalidStateError):
        lindblad.evolve(_qubit_decay(), np.eye(2) / 2, [0.5, 1.0], {})
    with pytest.raises(InvalidStateError):
        lindblad.evolve(_qubit_decay(), np.eye(2) / 2, [0.0, 1.0], {}, method='euler')


def test_thermal_jumps_have_detailed_balance_rates(lmg3):
    spec = lindblad.gksl_spec(lmg3, 2.0, 0.25)
    assert [rate for _, rate in spec.jumps] == [2.5, 0.5]
    assert len(lindblad.gksl_spec(lmg3, 2.0, 0.0).jumps) == 1


@pytest.mark.slow
def test_xxz_ring_protected_oscillation():
    model = SpinModel(kind='xxz', n_qubits=4, B=0.5, periodic=True)
    psi = initial_state('0+-0')
    grid = np.arange(0, 500.01, 0.25)
    obs = resolve_observables(['sx2', 'sx3'], 4)
    freq_grid = np.linspace(4.0 / 2048, 4.0, 2048)
    q2_amplitude = {}
    for n_bar in [0.0, 0.1, 0.5]:
        record = lindblad.evolve(lindblad.gksl_spec(model, 1.0, n_bar), outer(psi, psi), grid, obs)
        measured, _ = dominant_frequency(periodogram(record, 'sx3', 0.5, freq_grid))
        assert abs(measured - 1.0) < 0.02
        late = record.times >= 250
        q2_amplitude[n_bar] = np.ptp(record.series('sx2')[late])
    assert q2_amplitude[0.0] > 0.05
    assert q2_amplitude[0.5] < 0.5 * q2_amplitude[0.0]


def test_thermal_envelope_decays_at_the_gap(lmg3):
    spec = lindblad.gksl_spec(lmg3, 1.0, 0.1)
    psi = initial_state('0+0')
    grid = np.arange(0, 300.01, 0.25)
    record = lindblad.evolve(spec, outer(psi, psi), grid, resolve_observables(['sx2'], 3))
    envelope = amplitude_envelope(record, 'sx2', 50.0)
    assert envelope.peak_to_peak.size == 6
    assert np.all(np.diff(envelope.peak_to_peak) < 0)

    slope = np.polyfit(envelope.window_centers[2:], np.log(envelope.peak_to_peak[2:]), 1)[0]
    gap = lindblad.liouvillian_gap(lindblad.build_liouvillian(spec))
    assert abs(-slope - gap) / gap < 0.2
