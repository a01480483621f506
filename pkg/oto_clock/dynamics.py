"""
Exact time evolution by spectral decomposition.

Each Hamiltonian is diagonalized once (dense scipy eigh) and the result is
cached per Operator object, so the t / 2t / t segments of the interferometer
reuse one decomposition. Forward evolution is exp(-iHt), backward is exp(+iHt);
durations are non-negative and the direction is explicit.
"""

import logging
import threading
import weakref
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .config import Config
from .errors import DimensionCapError, HermiticityError, OtoClockError, SpaceMismatchError
from .hilbert import HilbertSpace, Operator, StateVector

FORWARD = 'forward'
BACKWARD = 'backward'

_cache = weakref.WeakKeyDictionary()
_cache_lock = threading.Lock()


@dataclass(frozen=True)
class EigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    space: HilbertSpace

    @property
    def dim(self):
        return self.space.total_dim

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T


def _canonical_phases(vectors):
    """Make the largest-magnitude component of every eigenvector real and positive."""
    columns = np.arange(vectors.shape[1])
    pivots = np.argmax(np.abs(vectors), axis=0)
    phases = vectors[pivots, columns]
    return vectors * (np.abs(phases) / phases)


def spectral_decompose(H: Operator, cap=None) -> EigenSystem:
    cap = Config.DENSE_CAP if cap is None else cap
    if H.dim > cap:
        raise DimensionCapError(f"Dimension {H.dim} exceeds the dense eigensolver cap of {cap}")

    with _cache_lock:
        cached = _cache.get(H)
    if cached is not None:
        return cached

    if not H.is_hermitian():
        raise HermiticityError(f"spectral_decompose needs a Hermitian operator, got {H!r}")

    logging.debug(f"Diagonalizing {H!r}")
    try:
        values, vectors = scipy.linalg.eigh(H.dense())
    except np.linalg.LinAlgError as e:
        raise OtoClockError(f"Eigendecomposition of {H!r} failed: {e}") from e
    vectors = _canonical_phases(vectors)
    values.setflags(write=False)
    vectors.setflags(write=False)
    eig = EigenSystem(values, vectors, H.space)

    with _cache_lock:
        _cache[H] = eig
    return eig


def clear_cache():
    with _cache_lock:
        _cache.clear()


def _phase_sign(direction):
    if direction == FORWARD:
        return -1.0
    if direction == BACKWARD:
        return 1.0
    raise OtoClockError(f"Unknown direction '{direction}', expected '{FORWARD}' or '{BACKWARD}'")


def _check_duration(t):
    if not np.isfinite(t) or t < 0:
        raise OtoClockError(f"Evolution time must be finite and non-negative, got {t}")


def _check_space(eig, state):
    if state.space != eig.space:
        raise SpaceMismatchError(f"State in {state.space} cannot evolve under H on {eig.space}")


def _evolve(eig, amplitudes, signed_phase_time):
    V = eig.eigenvectors
    phases = np.exp(1j * signed_phase_time * eig.eigenvalues)
    return V @ (phases * (V.conj().T @ amplitudes))


def propagate(eig: EigenSystem, psi: StateVector, t: float, direction=FORWARD) -> StateVector:
    """exp(-iHt) psi (forward) or exp(+iHt) psi (backward)."""
    _check_duration(t)
    _check_space(eig, psi)
    sign = _phase_sign(direction)
    if t == 0:
        return psi
    return StateVector(psi.space, _evolve(eig, psi.amplitudes, sign * t))


def propagate_signed(eig: EigenSystem, psi: StateVector, s: float) -> StateVector:
    """exp(-iHs) psi for a signed duration s."""
    if s >= 0:
        return propagate(eig, psi, s, FORWARD)
    return propagate(eig, psi, -s, BACKWARD)


def evolution_operator(eig: EigenSystem, t: float, direction=FORWARD) -> np.ndarray:
    _check_duration(t)
    sign = _phase_sign(direction)
    V = eig.eigenvectors
    return (V * np.exp(1j * sign * t * eig.eigenvalues)) @ V.conj().T


def conditional_propagate(eig: EigenSystem, bs, t: float):
    """Forward branch gets exp(-iHt), backward branch exp(+iHt)."""
    return replace(bs,
                   fwd=propagate(eig, bs.fwd, t, FORWARD),
                   bwd=propagate(eig, bs.bwd, t, BACKWARD))
