from unittest.mock import patch

import numpy as np
import pytest
import scipy.linalg

from oto_clock.dynamics import (
    BACKWARD,
    FORWARD,
    clear_cache,
    conditional_propagate,
    evolution_operator,
    propagate,
    propagate_signed,
    spectral_decompose,
)
from oto_clock.errors import DimensionCapError, HermiticityError, OtoClockError
from oto_clock.hilbert import Operator, SiteKind, StateVector, local_operator, make_space, random_state
from oto_clock.models import build_disordered_heisenberg, realization_rng
from oto_clock.protocol import BranchedState


@pytest.fixture
def chain():
    return build_disordered_heisenberg(3, [0.3, -0.1, 0.2])


def test_decomposition_reconstructs_hamiltonian(chain):
    eig = spectral_decompose(chain)
    assert np.allclose(eig.reconstruct(), chain.dense(), atol=1e-12)
    assert np.all(np.diff(eig.eigenvalues) >= 0)


def test_decomposition_is_cached_per_operator(chain):
    assert spectral_decompose(chain) is spectral_decompose(chain)
    clear_cache()
    assert spectral_decompose(chain) is not None


def test_non_hermitian_rejected():
    space = make_space([SiteKind.qubit()])
    with pytest.raises(HermiticityError):
        spectral_decompose(local_operator(space, 0, 'sigma_plus'))


def test_dimension_cap(chain):
    with pytest.raises(DimensionCapError):
        spectral_decompose(chain, cap=4)


def test_propagate_matches_matrix_exponential(chain):
    eig = spectral_decompose(chain)
    psi = random_state(chain.space, realization_rng(1, 0))
    expected = scipy.linalg.expm(-1j * chain.dense() * 0.7) @ psi.amplitudes
    assert np.allclose(propagate(eig, psi, 0.7, FORWARD).amplitudes, expected, atol=1e-12)


def test_forward_then_backward_is_identity(chain):
    eig = spectral_decompose(chain)
    psi = random_state(chain.space, realization_rng(2, 0))
    back = propagate(eig, propagate(eig, psi, 3.0, FORWARD), 3.0, BACKWARD)
    assert np.allclose(back.amplitudes, psi.amplitudes, atol=1e-12)


def test_zero_time_returns_input(chain):
    psi = random_state(chain.space, realization_rng(3, 0))
    assert propagate(spectral_decompose(chain), psi, 0.0) is psi


def test_negative_time_and_bad_direction_rejected(chain):
    eig = spectral_decompose(chain)
    psi = random_state(chain.space, realization_rng(4, 0))
    with pytest.raises(OtoClockError):
        propagate(eig, psi, -1.0)
    with pytest.raises(OtoClockError):
        propagate(eig, psi, 1.0, 'sideways')


def test_signed_propagation(chain):
    eig = spectral_decompose(chain)
    psi = random_state(chain.space, realization_rng(5, 0))
    assert np.allclose(propagate_signed(eig, psi, -1.5).amplitudes,
                       propagate(eig, psi, 1.5, BACKWARD).amplitudes)


def test_evolution_operator_is_unitary(chain):
    U = evolution_operator(spectral_decompose(chain), 2.0)
    assert np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-12)


def test_energy_eigenstate_only_picks_up_phase():
    space = make_space([SiteKind.qubit()])
    H = Operator(space, np.diag([1.0, -1.0]), hermitian=True)
    up = StateVector.basis(space, [0])
    evolved = propagate(spectral_decompose(H), up, 0.5)
    assert evolved.amplitudes[0] == pytest.approx(np.exp(-0.5j))


def test_conditional_propagate_runs_branches_in_opposite_directions(chain):
    eig = spectral_decompose(chain)
    psi = random_state(chain.space, realization_rng(8, 0))
    evolved = conditional_propagate(eig, BranchedState(psi, 0.5 * psi), 1.3)
    assert np.allclose(evolved.fwd.amplitudes, propagate(eig, psi, 1.3, FORWARD).amplitudes)
    assert np.allclose(evolved.bwd.amplitudes, 0.5 * propagate(eig, psi, 1.3, BACKWARD).amplitudes)


def test_propagation_composes_in_time(chain):
    eig = spectral_decompose(chain)
    psi = random_state(chain.space, realization_rng(9, 0))
    stepped = propagate(eig, propagate(eig, psi, 0.7, FORWARD), 1.8, FORWARD)
    direct = propagate(eig, psi, 2.5, FORWARD)
    assert np.allclose(stepped.amplitudes, direct.amplitudes, atol=1e-12)
    U = evolution_operator(eig, 0.7) @ evolution_operator(eig, 1.8)
    assert np.allclose(U, evolution_operator(eig, 2.5), atol=1e-12)


def test_eigensolver_failure_is_a_numerical_error(chain):
    with patch('scipy.linalg.eigh', side_effect=np.linalg.LinAlgError('no convergence')):
        with pytest.raises(OtoClockError) as excinfo:
            spectral_decompose(chain)
    assert 'no convergence' in str(excinfo.value)
