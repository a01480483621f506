import cmath

import numpy as np
import pytest
from scipy.stats import unitary_group

from oto_clock.errors import OtoClockError, SpaceMismatchError
from oto_clock.hilbert import (
    Operator,
    SiteKind,
    StateVector,
    identity,
    local_operator,
    make_space,
    random_state,
    zero,
)
from oto_clock.models import build_disordered_heisenberg, realization_rng
from oto_clock.oracle import (
    loschmidt_echo,
    otoc_literal,
    otoc_matrix_element,
    otoc_pure,
    otoc_switch_error,
    otoc_switch_error_dense,
    otoc_thermal,
    relative_switch_error,
    thermal_weights,
)


@pytest.fixture
def chain():
    H = build_disordered_heisenberg(4, [0.25, -0.4, 0.1, 0.3])
    psi = StateVector.basis(H.space, [0, 1, 0, 1])
    O1 = local_operator(H.space, 1, 'sigma_z')
    O2 = local_operator(H.space, 2, 'sigma_z')
    return H, psi, O1, O2


def test_commuting_operators_at_t0(chain):
    H, psi, O1, O2 = chain
    # sigma^z operators commute, so the correlator is <(O2 O1)^2> = 1 on a product state
    assert otoc_pure(H, psi, O1, O2, 0.0) == pytest.approx(1.0)


def test_branch_form_matches_dense_product(chain):
    H, psi, O1, O2 = chain
    for t in (0.5, 2.0, 7.0):
        assert otoc_pure(H, psi, O1, O2, t) == pytest.approx(otoc_matrix_element(H, psi, O1, O2, t), abs=1e-10)


def test_non_hermitian_operators_use_dagger_form():
    rng = realization_rng(3, 0)
    space = make_space([SiteKind.qubit()] * 2)
    H = build_disordered_heisenberg(2, [0.3, -0.2])
    psi = random_state(space, rng)
    O1 = local_operator(space, 0, 'sigma_plus') + local_operator(space, 1, 'sigma_x')
    O2 = local_operator(space, 1, 'sigma_minus')
    assert otoc_pure(H, psi, O1, O2, 1.1) == pytest.approx(otoc_matrix_element(H, psi, O1, O2, 1.1), abs=1e-10)


def test_literal_product_matches_branch_form_for_hermitian_operators(chain):
    H, psi, O1, O2 = chain
    for t in (0.0, 1.3, 6.0):
        assert otoc_literal(H, psi, O1, O2, t) == pytest.approx(otoc_pure(H, psi, O1, O2, t), abs=1e-10)


def test_literal_product_needs_daggers_for_general_unitaries():
    rng = realization_rng(8, 0)
    space = make_space([SiteKind.qubit()] * 2)
    H = build_disordered_heisenberg(2, [0.3, -0.2])
    psi = random_state(space, rng)
    O1 = Operator(space, unitary_group.rvs(4, random_state=rng))
    O2 = Operator(space, unitary_group.rvs(4, random_state=rng))
    branch = otoc_pure(H, psi, O1, O2, 1.7)
    daggered = otoc_literal(H, psi, O1, O2, 1.7, O1_left=O1.dag(), O2_left=O2.dag())
    assert daggered == pytest.approx(branch, abs=1e-10)
    assert abs(otoc_literal(H, psi, O1, O2, 1.7) - branch) > 1e-6


def test_identity_operator_gives_norm(chain):
    H, psi, _, _ = chain
    one = identity(H.space)
    assert otoc_pure(H, psi, one, one, 3.0) == pytest.approx(1.0)


def test_space_mismatch_rejected(chain):
    H, psi, O1, _ = chain
    other = local_operator(make_space([SiteKind.qubit()]), 0, 'sigma_z')
    with pytest.raises(SpaceMismatchError):
        otoc_pure(H, psi, O1, other, 1.0)


def test_thermal_weights():
    energies = np.array([-1.0, -1.0, 0.5, 2.0])
    assert np.allclose(thermal_weights(energies, 0.0), 0.25)
    assert np.allclose(thermal_weights(energies, np.inf), [0.5, 0.5, 0.0, 0.0])
    with pytest.raises(OtoClockError):
        thermal_weights(energies, -1.0)


def test_infinite_temperature_is_trace_average(chain):
    H, _, O1, O2 = chain
    dim = H.space.total_dim
    total = 0.0
    for k in range(dim):
        basis = StateVector(H.space, np.eye(dim)[k])
        total += otoc_pure(H, basis, O1, O2, 1.5)
    assert otoc_thermal(H, 0.0, O1, O2, 1.5) == pytest.approx(total / dim, abs=1e-10)


def test_switch_error_zero_epsilon_is_ideal(chain):
    H, psi, O1, O2 = chain
    for t in (0.0, 1.0, 10.0):
        assert abs(otoc_switch_error(H, psi, O1, O2, t, 0.0) - otoc_pure(H, psi, O1, O2, t)) < 1e-10


def test_switch_error_matches_dense_exponentials(chain):
    H, psi, O1, O2 = chain
    fast = otoc_switch_error(H, psi, O1, O2, 2.0, 0.03)
    slow = otoc_switch_error_dense(H, psi, O1, O2, 2.0, 0.03)
    assert fast == pytest.approx(slow, abs=1e-10)


def test_relative_switch_error_without_noise(chain):
    H, psi, O1, O2 = chain
    result = relative_switch_error(H, psi, O1, O2, 4.0, 0.0, 5, seed=1)
    assert result.relative_error < 1e-10
    assert not result.undefined


def test_switch_error_grows_with_time():
    # H = sigma_z / 2 with O1 = O2 = sigma_x: each draw multiplies F by exp(i t eps),
    # so the ensemble error is 1 - exp(-(t delta)^2 / 2)
    space = make_space([SiteKind.qubit()])
    H = 0.5 * local_operator(space, 0, 'sigma_z')
    psi = StateVector.basis(space, [0])
    sx = local_operator(space, 0, 'sigma_x')
    delta = 0.05
    errors = []
    for t in (1.0, 2.0, 4.0, 8.0):
        result = relative_switch_error(H, psi, sx, sx, t, delta, 400, seed=21, threads=1)
        errors.append(result.relative_error)
        assert result.relative_error == pytest.approx(1.0 - np.exp(-(t * delta) ** 2 / 2), abs=0.04)
    assert errors == sorted(errors)
    assert errors[-1] > 4 * errors[0]


def test_relative_switch_error_independent_of_threads(chain):
    H, psi, O1, O2 = chain
    serial = relative_switch_error(H, psi, O1, O2, 3.0, 0.05, 12, seed=99, threads=1)
    parallel = relative_switch_error(H, psi, O1, O2, 3.0, 0.05, 12, seed=99, threads=4)
    assert serial.mean == parallel.mean
    assert serial.relative_error == parallel.relative_error


def test_relative_switch_error_undefined_when_reference_vanishes():
    H = build_disordered_heisenberg(2, [0.0, 0.0])
    psi = StateVector.basis(H.space, [0, 0])
    vanishing = zero(H.space)
    result = relative_switch_error(H, psi, vanishing, vanishing, 1.0, 0.02, 3, seed=1)
    assert result.undefined
    assert result.relative_error is None


def test_relative_switch_error_validates_inputs(chain):
    H, psi, O1, O2 = chain
    with pytest.raises(OtoClockError):
        relative_switch_error(H, psi, O1, O2, 1.0, 0.02, 0, seed=1)
    with pytest.raises(OtoClockError):
        relative_switch_error(H, psi, O1, O2, 1.0, -0.02, 5, seed=1)


def test_loschmidt_echo(chain):
    H, psi, _, _ = chain
    assert loschmidt_echo(H, zero(H.space), psi, 2.0) == pytest.approx(1.0, abs=1e-12)
    shift = 0.3 * identity(H.space)
    assert loschmidt_echo(H, shift, psi, 2.0) == pytest.approx(cmath.exp(-0.6j), abs=1e-10)
