"""
Brute-force reference values the interferometer is checked against.

All correlators use the branch form F(t) = <L|R> with
    |R> = W O1 |psi>,  |L> = O1 W |psi>,  W = e^{iHt} O2 e^{-iHt},
i.e. <psi| W^dag O1^dag W O1 |psi>. This is what the interferometer measures.
It equals the written-out product
<psi| e^{iHt} O2 e^{-iHt} O1 e^{iHt} O2 e^{-iHt} O1 |psi>
only for Hermitian O1, O2; otoc_literal evaluates that product as written.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
from tqdm.contrib.concurrent import thread_map

from .config import Config
from .dynamics import BACKWARD, FORWARD, evolution_operator, propagate, propagate_signed, spectral_decompose
from .errors import OtoClockError, SpaceMismatchError
from .hilbert import Operator, StateVector, apply, inner
from .models import realization_rng


def _check_spaces(H, psi, *ops):
    for op in ops:
        if op.space != H.space:
            raise SpaceMismatchError(f"Operator on {op.space} does not match H on {H.space}")
    if psi is not None and psi.space != H.space:
        raise SpaceMismatchError(f"State in {psi.space} does not match H on {H.space}")


def otoc_branches(H: Operator, psi: StateVector, O1: Operator, O2: Optional[Operator], t: float):
    """(|L>, |R>) for the ideal correlator."""
    eig = spectral_decompose(H)
    R = propagate(eig, apply(O2, propagate(eig, apply(O1, psi), t, FORWARD)), t, BACKWARD)
    L = apply(O1, propagate(eig, apply(O2, propagate(eig, psi, t, FORWARD)), t, BACKWARD))
    return L, R


def otoc_pure(H: Operator, psi: StateVector, O1: Operator, O2: Operator, t: float) -> complex:
    _check_spaces(H, psi, O1, O2)
    L, R = otoc_branches(H, psi, O1, O2, t)
    return inner(L, R)


def _heisenberg_matrix(eig, O2_dense, t):
    U = evolution_operator(eig, t, FORWARD)
    return U.conj().T @ O2_dense @ U


def otoc_matrix_element(H: Operator, psi: StateVector, O1: Operator, O2: Operator, t: float) -> complex:
    """Same correlator from the dense Heisenberg-picture product W^dag O1^dag W O1."""
    _check_spaces(H, psi, O1, O2)
    eig = spectral_decompose(H)
    W = _heisenberg_matrix(eig, O2.dense(), t)
    O1d = O1.dense()
    M = W.conj().T @ O1d.conj().T @ W @ O1d
    v = psi.amplitudes
    return complex(np.vdot(v, M @ v))


def otoc_literal(H: Operator, psi: StateVector, O1: Operator, O2: Operator, t: float,
                 O1_left: Optional[Operator] = None, O2_left: Optional[Operator] = None) -> complex:
    """
    <psi| e^{iHt} O2' e^{-iHt} O1' e^{iHt} O2 e^{-iHt} O1 |psi> from a dense matrix
    exponential, with O1' = O1_left and O2' = O2_left (defaults O1 and O2).

    otoc_pure is this product with O1' = O1^dag and O2' = O2^dag, so the two agree
    with the defaults whenever O1 and O2 are Hermitian.
    """
    _check_spaces(H, psi, O1, O2, *(op for op in (O1_left, O2_left) if op is not None))
    U = scipy.linalg.expm(-1j * H.dense() * t)
    Ud = U.conj().T
    O1d = O1.dense()
    W = Ud @ O2.dense() @ U
    W_left = W if O2_left is None else Ud @ O2_left.dense() @ U
    O1_left_d = O1d if O1_left is None else O1_left.dense()
    v = psi.amplitudes
    return complex(np.vdot(v, W_left @ O1_left_d @ W @ O1d @ v))


def thermal_weights(eigenvalues: np.ndarray, beta: float) -> np.ndarray:
    """Boltzmann weights; beta = inf spreads weight evenly over the ground manifold."""
    if beta < 0 or math.isnan(beta):
        raise OtoClockError(f"beta must be >= 0, got {beta}")
    shifted = eigenvalues - eigenvalues[0]
    if math.isinf(beta):
        tol = max(1e-12, 1e-12 * float(np.max(np.abs(eigenvalues))))
        weights = (shifted <= tol).astype(float)
    else:
        weights = np.exp(-beta * shifted)
    return weights / weights.sum()


def otoc_thermal(H: Operator, beta: float, O1: Operator, O2: Operator, t: float) -> complex:
    """Tr[rho W^dag O1^dag W O1] with rho = e^{-beta H} / Z, evaluated in the eigenbasis."""
    _check_spaces(H, None, O1, O2)
    eig = spectral_decompose(H)
    weights = thermal_weights(eig.eigenvalues, beta)
    W = _heisenberg_matrix(eig, O2.dense(), t)
    O1d = O1.dense()
    M = W.conj().T @ O1d.conj().T @ W @ O1d
    V = eig.eigenvectors
    diagonal = np.einsum('in,ij,jn->n', V.conj(), M, V)
    return complex(np.dot(weights, diagonal))


def otoc_switch_error(H: Operator, psi: StateVector, O1: Operator, O2: Operator,
                      t: float, epsilon: float) -> complex:
    """
    Correlator when the flipped Hamiltonian is -(1 + epsilon) H:
        |R> = e^{iHt(1+e)} O2 e^{-iHt} O1 |psi>,  |L> = O1 e^{iHt(1+e)} O2 e^{-iHt} |psi>.
    """
    _check_spaces(H, psi, O1, O2)
    eig = spectral_decompose(H)
    back = -t * (1.0 + epsilon)
    R = propagate_signed(eig, apply(O2, propagate(eig, apply(O1, psi), t, FORWARD)), back)
    L = apply(O1, propagate_signed(eig, apply(O2, propagate(eig, psi, t, FORWARD)), back))
    return inner(L, R)


def otoc_switch_error_dense(H: Operator, psi: StateVector, O1: Operator, O2: Operator,
                            t: float, epsilon: float) -> complex:
    """otoc_switch_error from four dense matrix exponentials."""
    _check_spaces(H, psi, O1, O2)
    Hd = H.dense()
    U = scipy.linalg.expm(-1j * Hd * t)
    U_back = scipy.linalg.expm(1j * Hd * t * (1.0 + epsilon))
    O1d, O2d = O1.dense(), O2.dense()
    v = psi.amplitudes
    R = U_back @ O2d @ U @ O1d @ v
    L = O1d @ U_back @ O2d @ U @ v
    return complex(np.vdot(L, R))


@dataclass
class SwitchErrorResult:
    mean: complex
    reference: complex
    relative_error: Optional[float]
    relative_error_real: Optional[float]
    relative_error_imag: Optional[float]
    n_samples: int
    undefined: bool = False


def _relative(value, reference):
    if reference == 0:
        return None
    return value / reference - 1.0


def relative_switch_error(H: Operator, psi: StateVector, O1: Operator, O2: Operator, t: float,
                          delta: float, n_samples: int, seed: int, threads=None,
                          progress=False) -> SwitchErrorResult:
    """
    Average the switch-error correlator over epsilon ~ N(0, delta) (delta is the
    standard deviation). Sample k draws from realization_rng(seed, k), so the
    result does not depend on the worker count.
    """
    if n_samples < 1:
        raise OtoClockError(f"n_samples must be >= 1, got {n_samples}")
    if delta < 0:
        raise OtoClockError(f"delta must be >= 0, got {delta}")
    threads = Config.threads() if threads is None else max(1, int(threads))
    spectral_decompose(H)

    def sample(k):
        epsilon = float(realization_rng(seed, k).normal(0.0, delta))
        return otoc_switch_error(H, psi, O1, O2, t, epsilon)

    values = thread_map(sample, range(n_samples), max_workers=threads,
                        disable=not progress, desc=f"switch t={t:g}")
    mean = complex(np.mean(np.asarray(values, dtype=complex)))
    reference = otoc_pure(H, psi, O1, O2, t)

    if abs(reference) == 0.0:
        logging.warning(f"Ideal correlator vanishes at t={t}; relative error undefined")
        return SwitchErrorResult(mean, reference, None, None, None, n_samples, undefined=True)

    ratio = _relative(mean, reference)
    real = _relative(mean.real, reference.real)
    imag = _relative(mean.imag, reference.imag)
    return SwitchErrorResult(
        mean=mean,
        reference=reference,
        relative_error=float(abs(ratio)),
        relative_error_real=None if real is None else float(real),
        relative_error_imag=None if imag is None else float(imag),
        n_samples=n_samples,
    )


def loschmidt_echo(H: Operator, deltaH: Operator, psi: StateVector, t: float) -> complex:
    """<psi| e^{iHt} e^{-i(H + dH)t} |psi>."""
    _check_spaces(H, psi, deltaH)
    perturbed = Operator(H.space, (H + deltaH).matrix, hermitian=True, label='H+dH')
    forward = propagate(spectral_decompose(perturbed), psi, t, FORWARD)
    reference = propagate(spectral_decompose(H), psi, t, FORWARD)
    return inner(reference, forward)
