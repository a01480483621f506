"""
Quantum-clock interferometer for out-of-time-ordered correlators.

The clock (one ancilla photon, |0_a> or |1_a>) decides the arrow of time, so
the joint state is kept as two system vectors:

    |Psi> = fwd (x) |1_a> + bwd (x) |0_a>      (forward_label = 1)

The fwd vector evolves under exp(-iHt) and the bwd vector under exp(+iHt). A
clock flip exchanges which vector runs forward; the labels stay attached to the
clock basis states and only the vectors move.

Sequence (evolution segments t, 2t, t with flips between):

    init -> Hadamard -> O1 on fwd -> evolve t -> O2 on fwd -> flip
         -> evolve 2t -> flip -> O2 on bwd -> evolve t -> O1 on bwd -> measure

leaving |R> / sqrt(2) on |1_a> and |L> / sqrt(2) on |0_a>, with
|R> = e^{iHt} O2 e^{-iHt} O1 |psi> and |L> = O1 e^{iHt} O2 e^{-iHt} |psi>, so
<tau^x> + i <tau^y> = <L|R>.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from .dynamics import BACKWARD, FORWARD, conditional_propagate, propagate, spectral_decompose
from .errors import NormalizationError, OtoClockError, SiteKindError, SpaceMismatchError
from .hilbert import (
    BOSON,
    QUBIT,
    HilbertSpace,
    Operator,
    StateVector,
    apply,
    identity,
    inner,
    local_operator,
)

NORM_TOL = 1e-10
AXES = ('x', 'y', 'both')


@dataclass(frozen=True)
class BranchedState:
    fwd: StateVector
    bwd: StateVector
    forward_label: int = 1

    def __post_init__(self):
        if self.fwd.space != self.bwd.space:
            raise SpaceMismatchError("Both branches must live on the same system space")
        if self.forward_label not in (0, 1):
            raise OtoClockError(f"forward_label must be 0 or 1, got {self.forward_label}")

    @property
    def space(self) -> HilbertSpace:
        return self.fwd.space

    def norm_squared(self) -> float:
        return self.fwd.norm() ** 2 + self.bwd.norm() ** 2

    def on_clock(self, label: int) -> StateVector:
        """System vector attached to clock basis state |label_a>."""
        return self.fwd if label == self.forward_label else self.bwd

    def joint_vector(self) -> np.ndarray:
        """Amplitudes on system (x) clock with the clock as the last, fastest index."""
        joint = np.empty((self.space.total_dim, 2), dtype=complex)
        joint[:, 0] = self.on_clock(0).amplitudes
        joint[:, 1] = self.on_clock(1).amplitudes
        return joint.reshape(-1)


@dataclass(frozen=True)
class PulseErrors:
    d_theta_prime: float = 0.0
    d_theta_1: float = 0.0
    d_theta_2: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(a) for a in (self.d_theta_prime, self.d_theta_1, self.d_theta_2)):
            raise OtoClockError("Pulse error angles must be finite")

    @property
    def ideal(self) -> bool:
        return self.d_theta_prime == 0.0 and self.d_theta_1 == 0.0 and self.d_theta_2 == 0.0


@dataclass
class ProtocolSpec:
    hamiltonian: Operator
    psi0: StateVector
    O1: Operator
    O2: Operator
    t: float
    errors: PulseErrors = field(default_factory=PulseErrors)
    measure_axis: str = 'both'

    def __post_init__(self):
        space = self.hamiltonian.space
        if space.clock_index is not None:
            raise SpaceMismatchError("The protocol Hamiltonian must act on the system only (no clock site)")
        for name, op in (('O1', self.O1), ('O2', self.O2)):
            if op.space != space:
                raise SpaceMismatchError(f"{name} acts on {op.space}, Hamiltonian on {space}")
        if self.psi0.space != space:
            raise SpaceMismatchError(f"Initial state lives in {self.psi0.space}, Hamiltonian on {space}")
        if self.measure_axis not in AXES:
            raise OtoClockError(f"measure_axis must be one of {AXES}, got '{self.measure_axis}'")
        if not math.isfinite(self.t) or self.t < 0:
            raise OtoClockError(f"Protocol time must be finite and non-negative, got {self.t}")


@dataclass
class ProtocolResult:
    tau_x: Optional[float]
    tau_y: Optional[float]
    otoc: Optional[complex]
    branch_overlap: complex
    norms: Tuple[float, float]
    final_state: BranchedState
    norm_checked: bool = True


def init_branched(psi0: StateVector) -> BranchedState:
    if not psi0.is_normalized(NORM_TOL):
        raise NormalizationError(f"Initial state must be normalized, got norm {psi0.norm():.12g}")
    return BranchedState(psi0, StateVector.zeros(psi0.space))


def hadamard_clock(bs: BranchedState, d_theta_prime: float = 0.0) -> BranchedState:
    """
    Prepare the clock superposition from a state with an empty bwd branch.
    Weights: sqrt((1 + sin d) / 2) on |1_a>, sqrt((1 - sin d) / 2) on |0_a>.
    """
    if bs.bwd.norm() != 0.0:
        raise OtoClockError("hadamard_clock expects the clock in |1_a> (empty bwd branch)")
    s = math.sin(d_theta_prime)
    w1 = math.sqrt((1.0 + s) / 2.0)
    w0 = math.sqrt(max(0.0, (1.0 - s) / 2.0))
    psi = bs.on_clock(bs.forward_label)
    on_one, on_zero = w1 * psi, w0 * psi
    if bs.forward_label == 1:
        return BranchedState(on_one, on_zero, 1)
    return BranchedState(on_zero, on_one, 0)


def flip_clock(bs: BranchedState, d_theta: float = 0.0) -> BranchedState:
    """
    tau^x pulse with angle pi + d_theta (up to a global phase i):
        fwd' = cos(d/2) bwd - i sin(d/2) fwd
        bwd' = cos(d/2) fwd - i sin(d/2) bwd
    """
    c = math.cos(d_theta / 2.0)
    s = -1j * math.sin(d_theta / 2.0)
    return BranchedState(c * bs.bwd + s * bs.fwd, c * bs.fwd + s * bs.bwd, bs.forward_label)


def conditional_apply(bs: BranchedState, O: Operator, branch='fwd') -> BranchedState:
    if O.space != bs.space:
        raise SpaceMismatchError(f"Operator on {O.space} cannot act on branches in {bs.space}")
    if branch == 'fwd':
        return BranchedState(apply(O, bs.fwd), bs.bwd, bs.forward_label)
    if branch == 'bwd':
        return BranchedState(bs.fwd, apply(O, bs.bwd), bs.forward_label)
    raise OtoClockError(f"branch must be 'fwd' or 'bwd', got '{branch}'")


def clock_coherence(bs: BranchedState) -> complex:
    """2 <c0|c1> with c_k the system vector on |k_a>; equals <tau^x> + i <tau^y>."""
    return 2.0 * inner(bs.on_clock(0), bs.on_clock(1))


def measure_clock(bs: BranchedState, axis='x') -> float:
    coherence = clock_coherence(bs)
    if axis == 'x':
        return float(coherence.real)
    if axis == 'y':
        return float(coherence.imag)
    raise OtoClockError(f"Clock can be measured along 'x' or 'y', got '{axis}'")


def _is_unitary(op: Operator) -> bool:
    product = (op.dag() @ op) - identity(op.space)
    return product.max_abs() < NORM_TOL


def _check_norm(bs, step):
    norm_sq = bs.norm_squared()
    if abs(norm_sq - 1.0) > NORM_TOL:
        raise NormalizationError(f"Norm drifted to {norm_sq:.12g} after {step}")


def run_oto_protocol(spec: ProtocolSpec) -> ProtocolResult:
    eig = spectral_decompose(spec.hamiltonian)
    errors = spec.errors
    t = spec.t
    norm_checked = _is_unitary(spec.O1) and _is_unitary(spec.O2)
    if not norm_checked:
        logging.debug("O1/O2 are not unitary; skipping norm checks")

    steps = [
        ('hadamard', lambda bs: hadamard_clock(bs, errors.d_theta_prime)),
        ('O1 on fwd', lambda bs: conditional_apply(bs, spec.O1, 'fwd')),
        ('evolve t', lambda bs: conditional_propagate(eig, bs, t)),
        ('O2 on fwd', lambda bs: conditional_apply(bs, spec.O2, 'fwd')),
        ('flip 1', lambda bs: flip_clock(bs, errors.d_theta_1)),
        ('evolve 2t', lambda bs: conditional_propagate(eig, bs, 2 * t)),
        ('flip 2', lambda bs: flip_clock(bs, errors.d_theta_2)),
        ('O2 on bwd', lambda bs: conditional_apply(bs, spec.O2, 'bwd')),
        ('evolve t (final)', lambda bs: conditional_propagate(eig, bs, t)),
        ('O1 on bwd', lambda bs: conditional_apply(bs, spec.O1, 'bwd')),
    ]

    bs = init_branched(spec.psi0)
    for name, step in steps:
        bs = step(bs)
        logging.debug(f"Protocol step '{name}': |fwd|={bs.fwd.norm():.6f}, |bwd|={bs.bwd.norm():.6f}")
        if norm_checked:
            _check_norm(bs, name)

    coherence = clock_coherence(bs)
    tau_x = float(coherence.real) if spec.measure_axis in ('x', 'both') else None
    tau_y = float(coherence.imag) if spec.measure_axis in ('y', 'both') else None
    otoc = complex(tau_x, tau_y) if spec.measure_axis == 'both' else None

    return ProtocolResult(
        tau_x=tau_x,
        tau_y=tau_y,
        otoc=otoc,
        branch_overlap=ideal_branch_overlap(spec),
        norms=(bs.fwd.norm(), bs.bwd.norm()),
        final_state=bs,
        norm_checked=norm_checked,
    )


def ideal_branches(spec: ProtocolSpec) -> Tuple[StateVector, StateVector]:
    """Error-free |L>, |R>."""
    eig = spectral_decompose(spec.hamiltonian)
    R = propagate(eig, apply(spec.O2, propagate(eig, apply(spec.O1, spec.psi0), spec.t, FORWARD)),
                  spec.t, BACKWARD)
    L = apply(spec.O1, propagate(eig, apply(spec.O2, propagate(eig, spec.psi0, spec.t, FORWARD)),
                                 spec.t, BACKWARD))
    return L, R


def ideal_branch_overlap(spec: ProtocolSpec) -> complex:
    L, R = ideal_branches(spec)
    return inner(L, R)


def calibration_echo(hamiltonian: Operator, psi0: StateVector, t: float,
                     errors: Optional[PulseErrors] = None) -> ProtocolResult:
    """Interferometer with O1 = O2 = identity; the ideal result is 1."""
    one = identity(hamiltonian.space)
    spec = ProtocolSpec(hamiltonian, psi0, one, one, t, errors or PulseErrors())
    return run_oto_protocol(spec)


def noise_bound(d_theta_1: float, d_theta_2: float) -> float:
    s1, s2 = abs(math.sin(d_theta_1)), abs(math.sin(d_theta_2))
    h1, h2 = math.sin(d_theta_1 / 2.0) ** 2, math.sin(d_theta_2 / 2.0) ** 2
    return s1 + s2 + s1 * s2 + h1 * (1.0 + s2) + h2 * (1.0 + s1) + h1 * h2


def snr(d_theta_1: float, d_theta_2: float, overlap_magnitude: float) -> float:
    """Signal-to-noise of the overlap; 0 without signal, math.inf for noiseless pulses."""
    signal = signal_prefactor(d_theta_1, d_theta_2) * abs(overlap_magnitude)
    if signal == 0.0:
        return 0.0
    noise = abs(math.sin(d_theta_1)) + abs(math.sin(d_theta_2))
    if noise == 0.0:
        return math.inf
    return signal / noise


def signal_prefactor(d_theta_1: float, d_theta_2: float) -> float:
    return math.cos(d_theta_1 / 2.0) ** 2 * math.cos(d_theta_2 / 2.0) ** 2


@dataclass(frozen=True)
class PathRecord:
    origin: int
    flips: Tuple[bool, bool]
    final_label: int
    amplitude: complex
    vector: np.ndarray


def trace_paths(spec: ProtocolSpec) -> List[PathRecord]:
    """
    Decompose the final state into the eight clock histories
    (starting label x swap-or-stay at each flip), built with dense exponentials.
    Label 1 runs forward; O1/O2 act on label 1 before the flips and on label 0 after.
    """
    H = spec.hamiltonian.dense()
    t = spec.t
    forward = {1: scipy.linalg.expm(-1j * H * t), 0: scipy.linalg.expm(1j * H * t)}
    forward2 = {1: scipy.linalg.expm(-2j * H * t), 0: scipy.linalg.expm(2j * H * t)}
    O1 = spec.O1.dense()
    O2 = spec.O2.dense()
    psi = spec.psi0.amplitudes

    s = math.sin(spec.errors.d_theta_prime)
    origin_weight = {1: math.sqrt((1.0 + s) / 2.0), 0: math.sqrt(max(0.0, (1.0 - s) / 2.0))}
    swap = [math.cos(spec.errors.d_theta_1 / 2.0), math.cos(spec.errors.d_theta_2 / 2.0)]
    stay = [-1j * math.sin(spec.errors.d_theta_1 / 2.0), -1j * math.sin(spec.errors.d_theta_2 / 2.0)]

    records = []
    for origin in (1, 0):
        for flip1 in (True, False):
            for flip2 in (True, False):
                label = origin
                vec = psi.copy()
                amplitude = complex(origin_weight[origin])
                if label == 1:
                    vec = O1 @ vec
                vec = forward[label] @ vec
                if label == 1:
                    vec = O2 @ vec
                amplitude *= swap[0] if flip1 else stay[0]
                label = 1 - label if flip1 else label
                vec = forward2[label] @ vec
                amplitude *= swap[1] if flip2 else stay[1]
                label = 1 - label if flip2 else label
                if label == 0:
                    vec = O2 @ vec
                vec = forward[label] @ vec
                if label == 0:
                    vec = O1 @ vec
                records.append(PathRecord(origin, (flip1, flip2), label, amplitude, vec))
    return records


def reassemble_paths(records: List[PathRecord], space: HilbertSpace) -> BranchedState:
    on_label = {0: np.zeros(space.total_dim, dtype=complex), 1: np.zeros(space.total_dim, dtype=complex)}
    for record in records:
        on_label[record.final_label] += record.amplitude * record.vector
    return BranchedState(StateVector(space, on_label[1]), StateVector(space, on_label[0]), 1)


def cnot_operator(space: HilbertSpace, site: int) -> Operator:
    """Hard-core X_j = b_j^dag + b_j (sigma^x on a qubit site): the clock-conditioned flip."""
    kind = space.sites[site]
    if kind.kind == QUBIT:
        return local_operator(space, site, 'sigma_x')
    if kind.kind == BOSON and kind.n_max == 1:
        return local_operator(space, site, 'x')
    raise SiteKindError(f"CNOT target must be a qubit or hard-core boson, got {kind!r} on site {site}")
