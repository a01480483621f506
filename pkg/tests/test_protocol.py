import math

import numpy as np
import pytest

from oto_clock.acceptance import random_instance
from oto_clock.errors import NormalizationError, OtoClockError, SiteKindError, SpaceMismatchError
from oto_clock.hilbert import SiteKind, StateVector, identity, local_operator, make_space, random_state
from oto_clock.models import build_disordered_heisenberg, realization_rng
from oto_clock.oracle import otoc_pure
from oto_clock.protocol import (
    BranchedState,
    ProtocolSpec,
    PulseErrors,
    calibration_echo,
    clock_coherence,
    cnot_operator,
    conditional_apply,
    flip_clock,
    hadamard_clock,
    init_branched,
    measure_clock,
    noise_bound,
    reassemble_paths,
    run_oto_protocol,
    signal_prefactor,
    snr,
    trace_paths,
)


@pytest.fixture
def instance():
    return random_instance(realization_rng(42, 0), 2)


def test_ideal_protocol_reproduces_oracle(instance):
    spec = ProtocolSpec(instance.hamiltonian, instance.psi0, instance.O1, instance.O2, instance.t)
    result = run_oto_protocol(spec)
    expected = otoc_pure(instance.hamiltonian, instance.psi0, instance.O1, instance.O2, instance.t)
    assert abs(result.otoc - expected) < 1e-9
    assert result.norm_checked


@pytest.mark.parametrize("k", range(5))
def test_ideal_protocol_on_three_qubits(k):
    inst = random_instance(realization_rng(7, k), 3)
    result = run_oto_protocol(ProtocolSpec(inst.hamiltonian, inst.psi0, inst.O1, inst.O2, inst.t))
    assert abs(result.otoc - otoc_pure(inst.hamiltonian, inst.psi0, inst.O1, inst.O2, inst.t)) < 1e-9


def test_final_state_holds_branches(instance):
    spec = ProtocolSpec(instance.hamiltonian, instance.psi0, instance.O1, instance.O2, instance.t)
    result = run_oto_protocol(spec)
    # |R> sits on |1_a>, |L> on |0_a>, each with weight 1/sqrt(2)
    assert result.final_state.on_clock(1).norm() == pytest.approx(1 / math.sqrt(2))
    assert result.final_state.on_clock(0).norm() == pytest.approx(1 / math.sqrt(2))
    assert result.final_state.norm_squared() == pytest.approx(1.0)


def test_hermitian_operators_measure_real_part_on_x():
    H = build_disordered_heisenberg(3, [0.2, -0.3, 0.1])
    psi = random_state(H.space, realization_rng(9, 0))
    O1 = local_operator(H.space, 0, 'sigma_z')
    O2 = local_operator(H.space, 2, 'sigma_z')
    result = run_oto_protocol(ProtocolSpec(H, psi, O1, O2, 1.3, measure_axis='x'))
    assert result.tau_y is None
    assert result.otoc is None
    assert result.tau_x == pytest.approx(otoc_pure(H, psi, O1, O2, 1.3).real, abs=1e-9)


def test_calibration_echo_is_one():
    H = build_disordered_heisenberg(2, [0.1, 0.4])
    psi = random_state(H.space, realization_rng(11, 0))
    result = calibration_echo(H, psi, 2.5)
    assert result.otoc == pytest.approx(1.0, abs=1e-10)


def test_hadamard_weights():
    space = make_space([SiteKind.qubit()])
    bs = hadamard_clock(init_branched(StateVector.basis(space, [0])), 0.2)
    assert bs.on_clock(1).norm() ** 2 == pytest.approx((1 + math.sin(0.2)) / 2)
    assert bs.on_clock(0).norm() ** 2 == pytest.approx((1 - math.sin(0.2)) / 2)
    assert clock_coherence(bs).real == pytest.approx(math.cos(0.2))
    with pytest.raises(OtoClockError):
        hadamard_clock(bs)


def test_perfect_flip_swaps_branches():
    space = make_space([SiteKind.qubit()])
    up = StateVector.basis(space, [0])
    down = StateVector.basis(space, [1])
    flipped = flip_clock(BranchedState(up, down))
    assert np.allclose(flipped.fwd.amplitudes, down.amplitudes)
    assert np.allclose(flipped.bwd.amplitudes, up.amplitudes)


def test_flip_error_keeps_norm():
    space = make_space([SiteKind.qubit()])
    state = BranchedState(StateVector(space, [0.6, 0.0]), StateVector(space, [0.0, 0.8]))
    assert flip_clock(state, 0.3).norm_squared() == pytest.approx(1.0)


def test_measure_clock_axes():
    space = make_space([SiteKind.qubit()])
    psi = StateVector.basis(space, [0])
    bs = BranchedState((1 / math.sqrt(2)) * psi, (1j / math.sqrt(2)) * psi)
    # fwd on |1_a>: 2 <c0|c1> = 2 * conj(i/sqrt2) * (1/sqrt2) = -i
    assert measure_clock(bs, 'x') == pytest.approx(0.0)
    assert measure_clock(bs, 'y') == pytest.approx(-1.0)
    with pytest.raises(OtoClockError):
        measure_clock(bs, 'z')


def test_unnormalized_initial_state_rejected():
    space = make_space([SiteKind.qubit()])
    with pytest.raises(NormalizationError):
        init_branched(StateVector(space, [1.0, 1.0]))


def test_spec_validation(instance):
    other = make_space([SiteKind.qubit()])
    with pytest.raises(SpaceMismatchError):
        ProtocolSpec(instance.hamiltonian, instance.psi0, identity(other), instance.O2, 1.0)
    with pytest.raises(OtoClockError):
        ProtocolSpec(instance.hamiltonian, instance.psi0, instance.O1, instance.O2, -1.0)
    with pytest.raises(OtoClockError):
        PulseErrors(float('inf'))


def test_only_hadamard_error_scales_signal(instance):
    errors = PulseErrors(d_theta_prime=0.25)
    spec = ProtocolSpec(instance.hamiltonian, instance.psi0, instance.O1, instance.O2, instance.t, errors)
    result = run_oto_protocol(spec)
    assert abs(result.otoc - math.cos(0.25) * result.branch_overlap) < 1e-10


def test_flip_errors_stay_within_noise_bound(instance):
    d1, d2 = 0.2, -0.15
    spec = ProtocolSpec(instance.hamiltonian, instance.psi0, instance.O1, instance.O2, instance.t,
                        PulseErrors(0.1, d1, d2))
    result = run_oto_protocol(spec)
    predicted = math.cos(0.1) * signal_prefactor(d1, d2) * result.branch_overlap.real
    assert abs(result.tau_x - predicted) <= noise_bound(d1, d2) + 1e-9


def test_paths_reassemble_final_state(instance):
    spec = ProtocolSpec(instance.hamiltonian, instance.psi0, instance.O1, instance.O2, instance.t,
                        PulseErrors(0.1, 0.2, -0.3))
    records = trace_paths(spec)
    assert len(records) == 8
    rebuilt = reassemble_paths(records, instance.hamiltonian.space)
    engine = run_oto_protocol(spec).final_state
    assert np.allclose(rebuilt.joint_vector(), engine.joint_vector(), atol=1e-9)


def test_noise_and_snr_limits():
    assert noise_bound(0.0, 0.0) == 0.0
    assert snr(0.0, 0.0, 0.5) == math.inf
    assert snr(0.0, 0.0, 0.0) == 0.0
    assert snr(0.2, 0.1, 0.0) == 0.0
    assert snr(0.1, 0.1, 1.0) > snr(0.2, 0.2, 1.0)
    assert signal_prefactor(0.0, 0.0) == 1.0


def test_cnot_target_must_be_two_level():
    space = make_space([SiteKind.qubit(), SiteKind.boson(1), SiteKind.boson(3)])
    assert np.allclose(cnot_operator(space, 0).dense(), local_operator(space, 0, 'sigma_x').dense())
    assert cnot_operator(space, 1).is_hermitian()
    with pytest.raises(SiteKindError):
        cnot_operator(space, 2)


def test_conditional_apply_touches_one_branch():
    space = make_space([SiteKind.qubit()] * 2)
    up = StateVector.basis(space, [0, 0])
    bs = BranchedState(up, up)
    flipped = conditional_apply(bs, local_operator(space, 1, 'sigma_x'), 'bwd')
    assert np.allclose(flipped.fwd.amplitudes, up.amplitudes)
    assert flipped.bwd.amplitudes[space.index_of([0, 1])] == 1.0
    with pytest.raises(OtoClockError):
        conditional_apply(bs, identity(space), 'both')
