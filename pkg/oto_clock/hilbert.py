"""
Composite Hilbert spaces, local operators and states.

A space is an ordered list of sites (qubits, truncated bosons, and at most one
clock). Site 0 is the slowest-varying index of the tensor-product basis, so
basis index <-> occupation tuple is numpy's C-order ravel/unravel.

Conventions:
    qubit |0> is sigma^z = +1 ("up"), |1> is sigma^z = -1 ("down");
    sigma^+ maps |1> -> |0>;
    clock |n_a> counts control photons, tau^z = 1 - 2 a^dag a.

Operators are stored as scipy CSR matrices and densified on demand.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from .config import Config
from .errors import (
    ClockStructureError,
    HermiticityError,
    NormalizationError,
    OtoClockError,
    SiteKindError,
    SpaceMismatchError,
)

QUBIT = 'qubit'
BOSON = 'boson'
CLOCK = 'clock'

NORM_TOL = 1e-12


@dataclass(frozen=True)
class SiteKind:
    """One tensor factor: a qubit, a boson truncated at n_max photons, or the clock."""
    kind: str
    n_max: int = 1

    def __post_init__(self):
        if self.kind not in (QUBIT, BOSON, CLOCK):
            raise SiteKindError(f"Unknown site kind '{self.kind}'")
        if self.kind == BOSON and self.n_max < 1:
            raise SiteKindError(f"Boson cutoff n_max must be >= 1, got {self.n_max}")
        if self.kind != BOSON and self.n_max != 1:
            raise SiteKindError(f"{self.kind} sites are two-level, n_max must be 1")

    @classmethod
    def qubit(cls):
        return cls(QUBIT)

    @classmethod
    def boson(cls, n_max=3):
        return cls(BOSON, int(n_max))

    @classmethod
    def clock(cls):
        return cls(CLOCK)

    @property
    def dim(self):
        return self.n_max + 1

    def __repr__(self):
        if self.kind == BOSON:
            return f"Boson({self.n_max})"
        return self.kind.capitalize()


class HilbertSpace:
    """Tensor product of sites with a fixed basis ordering."""

    def __init__(self, sites: Iterable[SiteKind]):
        sites = tuple(sites)
        if not sites:
            raise SiteKindError("A Hilbert space needs at least one site")
        clocks = [i for i, s in enumerate(sites) if s.kind == CLOCK]
        if len(clocks) > 1:
            raise SiteKindError(f"At most one clock site is allowed, got {len(clocks)}")
        self._sites = sites
        self._dims = tuple(s.dim for s in sites)
        self._total_dim = int(np.prod(self._dims))
        self._clock_index = clocks[0] if clocks else None
        self._table = None

    @property
    def sites(self) -> Tuple[SiteKind, ...]:
        return self._sites

    @property
    def dims(self) -> Tuple[int, ...]:
        return self._dims

    @property
    def total_dim(self) -> int:
        return self._total_dim

    @property
    def n_sites(self) -> int:
        return len(self._sites)

    @property
    def clock_index(self) -> Optional[int]:
        return self._clock_index

    def sites_of_kind(self, kind):
        return [i for i, s in enumerate(self._sites) if s.kind == kind]

    def index_of(self, occupations: Sequence[int]) -> int:
        occupations = tuple(int(o) for o in occupations)
        if len(occupations) != self.n_sites:
            raise SpaceMismatchError(
                f"Expected {self.n_sites} occupations, got {len(occupations)}")
        for site, (occ, dim) in enumerate(zip(occupations, self._dims)):
            if not 0 <= occ < dim:
                raise SpaceMismatchError(f"Occupation {occ} out of range on site {site} (dim {dim})")
        return int(np.ravel_multi_index(occupations, self._dims))

    def occupations_of(self, index: int) -> Tuple[int, ...]:
        if not 0 <= index < self._total_dim:
            raise SpaceMismatchError(f"Basis index {index} out of range [0, {self._total_dim})")
        return tuple(int(x) for x in np.unravel_index(index, self._dims))

    def occupation_table(self) -> np.ndarray:
        """Occupations of every basis state, shape (total_dim, n_sites)."""
        if self._table is None:
            table = np.stack(np.unravel_index(np.arange(self._total_dim), self._dims), axis=1)
            table.setflags(write=False)
            self._table = table
        return self._table

    def without_clock(self) -> 'HilbertSpace':
        if self._clock_index is None:
            return self
        return HilbertSpace(s for i, s in enumerate(self._sites) if i != self._clock_index)

    def __eq__(self, other):
        return isinstance(other, HilbertSpace) and self._sites == other._sites

    def __hash__(self):
        return hash(self._sites)

    def __repr__(self):
        return f"HilbertSpace({list(self._sites)}, dim={self._total_dim})"


def _max_abs(matrix) -> float:
    if matrix.nnz == 0:
        return 0.0
    return float(np.max(np.abs(matrix.data)))


class Operator:
    """
    Complex matrix on a HilbertSpace. Treat instances as read-only.

    With hermitian=True the matrix is checked on construction:
    ||A - A^dag||_max must stay below Config.HERMITIAN_TOL (scaled by
    ||A||_max when that exceeds 1).
    """

    def __init__(self, space: HilbertSpace, matrix, hermitian=False, label=None):
        mat = sp.csr_matrix(matrix, dtype=complex, copy=True)
        if mat.shape != (space.total_dim, space.total_dim):
            raise SpaceMismatchError(
                f"Matrix shape {mat.shape} does not match space dimension {space.total_dim}")
        mat.sum_duplicates()
        mat.eliminate_zeros()
        self._space = space
        self._matrix = mat
        self.label = label
        self.hermitian = bool(hermitian)
        if self.hermitian:
            deviation = _max_abs(mat - mat.conj().transpose())
            tol = Config.HERMITIAN_TOL * max(1.0, _max_abs(mat))
            if deviation >= tol:
                raise HermiticityError(
                    f"Operator {label or ''} is not Hermitian: ||A - A^dag||_max = {deviation:.3e}")

    @classmethod
    def _wrap(cls, space, matrix, hermitian=False, label=None):
        """Build without copying or re-validating (matrix already owned and checked)."""
        op = cls.__new__(cls)
        mat = sp.csr_matrix(matrix, dtype=complex)
        mat.eliminate_zeros()
        op._space = space
        op._matrix = mat
        op.label = label
        op.hermitian = bool(hermitian)
        return op

    @property
    def space(self) -> HilbertSpace:
        return self._space

    @property
    def matrix(self) -> sp.csr_matrix:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._space.total_dim

    def dense(self) -> np.ndarray:
        return self._matrix.toarray()

    def dag(self) -> 'Operator':
        return Operator._wrap(self._space, self._matrix.conj().transpose(), self.hermitian)

    def max_abs(self) -> float:
        return _max_abs(self._matrix)

    def is_hermitian(self, tol=None) -> bool:
        tol = Config.HERMITIAN_TOL if tol is None else tol
        return _max_abs(self._matrix - self._matrix.conj().transpose()) < tol * max(1.0, self.max_abs())

    def commutator(self, other: 'Operator') -> 'Operator':
        return self @ other - other @ self

    def _check_space(self, other):
        if other.space != self._space:
            raise SpaceMismatchError(f"Operator spaces differ: {self._space} vs {other.space}")

    def __add__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check_space(other)
        return Operator._wrap(self._space, self._matrix + other._matrix,
                              self.hermitian and other.hermitian)

    def __sub__(self, other):
        if not isinstance(other, Operator):
            return NotImplemented
        self._check_space(other)
        return Operator._wrap(self._space, self._matrix - other._matrix,
                              self.hermitian and other.hermitian)

    def __neg__(self):
        return Operator._wrap(self._space, -self._matrix, self.hermitian)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        real = complex(scalar).imag == 0.0
        return Operator._wrap(self._space, self._matrix * scalar, self.hermitian and real)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check_space(other)
            return Operator._wrap(self._space, self._matrix @ other._matrix)
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented

    def __repr__(self):
        name = f" '{self.label}'" if self.label else ""
        return f"Operator{name}(dim={self.dim}, nnz={self._matrix.nnz}, hermitian={self.hermitian})"


class StateVector:
    """Amplitude vector on a HilbertSpace. The array is read-only."""

    def __init__(self, space: HilbertSpace, amplitudes):
        arr = np.array(amplitudes, dtype=complex).reshape(-1)
        if arr.shape[0] != space.total_dim:
            raise SpaceMismatchError(
                f"State has {arr.shape[0]} amplitudes, space dimension is {space.total_dim}")
        if not np.all(np.isfinite(arr)):
            raise NormalizationError("State amplitudes must be finite")
        arr.setflags(write=False)
        self._space = space
        self._amplitudes = arr

    @classmethod
    def zeros(cls, space):
        return cls(space, np.zeros(space.total_dim, dtype=complex))

    @classmethod
    def basis(cls, space, occupations):
        amplitudes = np.zeros(space.total_dim, dtype=complex)
        amplitudes[space.index_of(occupations)] = 1.0
        return cls(space, amplitudes)

    @property
    def space(self) -> HilbertSpace:
        return self._space

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    def norm(self) -> float:
        return float(np.linalg.norm(self._amplitudes))

    def is_normalized(self, tol=NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) < tol

    def normalized(self) -> 'StateVector':
        norm = self.norm()
        if norm == 0.0:
            raise NormalizationError("Cannot normalize the zero vector")
        return StateVector(self._space, self._amplitudes / norm)

    def _check_space(self, other):
        if other.space != self._space:
            raise SpaceMismatchError(f"State spaces differ: {self._space} vs {other.space}")

    def __add__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        self._check_space(other)
        return StateVector(self._space, self._amplitudes + other._amplitudes)

    def __sub__(self, other):
        if not isinstance(other, StateVector):
            return NotImplemented
        self._check_space(other)
        return StateVector(self._space, self._amplitudes - other._amplitudes)

    def __neg__(self):
        return StateVector(self._space, -self._amplitudes)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return StateVector(self._space, self._amplitudes * scalar)

    __rmul__ = __mul__

    def __repr__(self):
        return f"StateVector(dim={self._space.total_dim}, norm={self.norm():.6g})"


def make_space(sites: Iterable[SiteKind]) -> HilbertSpace:
    space = HilbertSpace(sites)
    logging.debug(f"Built space {space}")
    return space


_PAULI = {
    'sigma_x': np.array([[0, 1], [1, 0]], dtype=complex),
    'sigma_y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'sigma_z': np.array([[1, 0], [0, -1]], dtype=complex),
    'sigma_plus': np.array([[0, 1], [0, 0]], dtype=complex),
    'sigma_minus': np.array([[0, 0], [1, 0]], dtype=complex),
}

_HERMITIAN_KINDS = {
    'identity', 'sigma_x', 'sigma_y', 'sigma_z', 'tau_x', 'tau_y', 'tau_z', 'n', 'x',
}


def _projector(dim, level):
    mat = np.zeros((dim, dim), dtype=complex)
    mat[level, level] = 1.0
    return mat


def _boson_matrix(n_max, kind):
    a = np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)
    if kind == 'a':
        return a
    if kind == 'adag':
        return a.T.copy()
    if kind == 'n':
        return np.diag(np.arange(n_max + 1)).astype(complex)
    if kind == 'x':
        return a + a.T
    return None


def local_matrix(site: SiteKind, kind: str) -> np.ndarray:
    """Single-site matrix of the named operator, before embedding."""
    if kind == 'identity':
        return np.eye(site.dim, dtype=complex)
    if kind.startswith('proj_'):
        try:
            level = int(kind[len('proj_'):])
        except ValueError:
            raise SiteKindError(f"Malformed projector kind '{kind}'")
        if not 0 <= level < site.dim:
            raise SiteKindError(f"Projector level {level} out of range for {site!r}")
        return _projector(site.dim, level)

    if site.kind == QUBIT:
        if kind in _PAULI:
            return _PAULI[kind].copy()
    elif site.kind == CLOCK:
        clock_kinds = {
            'tau_x': 'sigma_x', 'tau_y': 'sigma_y', 'tau_z': 'sigma_z',
            'a': 'sigma_plus', 'adag': 'sigma_minus',
        }
        if kind in clock_kinds:
            return _PAULI[clock_kinds[kind]].copy()
        if kind == 'n':
            return np.diag([0.0, 1.0]).astype(complex)
    elif site.kind == BOSON:
        mat = _boson_matrix(site.n_max, kind)
        if mat is not None:
            return mat

    raise SiteKindError(f"Operator kind '{kind}' is not defined on a {site!r} site")


def embed(space: HilbertSpace, site_index: int, local) -> sp.csr_matrix:
    """Kron a single-site matrix into the full space (identity elsewhere)."""
    if not 0 <= site_index < space.n_sites:
        raise SiteKindError(f"Site index {site_index} out of range for {space}")
    dims = space.dims
    left = int(np.prod(dims[:site_index])) if site_index > 0 else 1
    right = int(np.prod(dims[site_index + 1:])) if site_index < len(dims) - 1 else 1
    local = sp.csr_matrix(local, dtype=complex)
    return sp.kron(sp.kron(sp.identity(left, dtype=complex, format='csr'), local, format='csr'),
                   sp.identity(right, dtype=complex, format='csr'), format='csr')


def local_operator(space: HilbertSpace, site_index: int, kind: str) -> Operator:
    if not 0 <= site_index < space.n_sites:
        raise SiteKindError(f"Site index {site_index} out of range for {space}")
    site = space.sites[site_index]
    matrix = embed(space, site_index, local_matrix(site, kind))
    hermitian = kind in _HERMITIAN_KINDS or kind.startswith('proj_')
    return Operator._wrap(space, matrix, hermitian, label=f"{kind}@{site_index}")


def identity(space: HilbertSpace) -> Operator:
    return Operator._wrap(space, sp.identity(space.total_dim, dtype=complex, format='csr'),
                          True, label='identity')


def zero(space: HilbertSpace) -> Operator:
    return Operator._wrap(space, sp.csr_matrix((space.total_dim, space.total_dim), dtype=complex),
                          True, label='zero')


def diagonal_operator(space: HilbertSpace, values, hermitian=None, label=None) -> Operator:
    values = np.asarray(values, dtype=complex).reshape(-1)
    if values.shape[0] != space.total_dim:
        raise SpaceMismatchError(f"Expected {space.total_dim} diagonal entries, got {values.shape[0]}")
    if hermitian is None:
        hermitian = bool(np.all(values.imag == 0.0))
    return Operator._wrap(space, sp.diags(values, format='csr'), hermitian, label=label)


def compose(terms) -> Operator:
    """
    Sum of coefficient-weighted operator products.

    terms: iterable of (coefficient, factors) where factors is an Operator or a
    sequence of Operators multiplied left to right.
    """
    total = None
    for coefficient, factors in terms:
        if isinstance(factors, Operator):
            factors = [factors]
        if not factors:
            raise OtoClockError("compose() needs at least one factor per term")
        product = factors[0]
        for factor in factors[1:]:
            product = product @ factor
        term = coefficient * product
        total = term if total is None else total + term
    if total is None:
        raise OtoClockError("compose() needs at least one term")
    return total


def apply(op: Operator, state: StateVector) -> StateVector:
    if op.space != state.space:
        raise SpaceMismatchError(f"Operator on {op.space} cannot act on state in {state.space}")
    return StateVector(state.space, op.matrix @ state.amplitudes)


def inner(lhs: StateVector, rhs: StateVector) -> complex:
    """<lhs|rhs>, conjugate-linear in lhs."""
    if lhs.space != rhs.space:
        raise SpaceMismatchError(f"Cannot take inner product across {lhs.space} and {rhs.space}")
    return complex(np.vdot(lhs.amplitudes, rhs.amplitudes))


def expectation(op: Operator, state: StateVector) -> complex:
    return inner(state, apply(op, state))


def qubit_sz_values(space: HilbertSpace, qubit_sites=None) -> np.ndarray:
    """Summed sigma^z over the given qubit sites, for every basis state."""
    if qubit_sites is None:
        qubit_sites = space.sites_of_kind(QUBIT)
    for site in qubit_sites:
        if space.sites[site].kind != QUBIT:
            raise SiteKindError(f"Site {site} is {space.sites[site]!r}, not a qubit")
    table = space.occupation_table()
    if not qubit_sites:
        return np.zeros(space.total_dim, dtype=int)
    return np.sum(1 - 2 * table[:, list(qubit_sites)], axis=1)


def projector_total_sz(space: HilbertSpace, qubit_sites: Sequence[int], value: int) -> Operator:
    """Projector on basis states whose summed sigma^z over qubit_sites equals value."""
    qubit_sites = list(qubit_sites)
    sz = qubit_sz_values(space, qubit_sites)
    n = len(qubit_sites)
    if abs(value) > n or (value + n) % 2 != 0:
        raise OtoClockError(f"Total S_z = {value} is not attainable with {n} qubits")
    return diagonal_operator(space, (sz == value).astype(float), True, label=f"P_Sz={value}")


def excitation_values(space: HilbertSpace, sites=None) -> np.ndarray:
    """Boson numbers plus qubit excitations (1 + sigma^z)/2, per basis state. Clock excluded."""
    if sites is None:
        sites = [i for i, s in enumerate(space.sites) if s.kind != CLOCK]
    table = space.occupation_table()
    total = np.zeros(space.total_dim, dtype=int)
    for site in sites:
        kind = space.sites[site].kind
        if kind == BOSON:
            total += table[:, site]
        elif kind == QUBIT:
            total += 1 - table[:, site]
        else:
            raise SiteKindError(f"Site {site} ({space.sites[site]!r}) carries no excitations")
    return total


def excitation_number(space: HilbertSpace, sites=None) -> Operator:
    return diagonal_operator(space, excitation_values(space, sites).astype(float), True,
                             label='N_exc')


def _require_clock(space):
    if space.clock_index is None:
        raise ClockStructureError(f"{space} has no clock site")
    return space.clock_index


def clock_sector_indices(space: HilbertSpace, n_a: int) -> np.ndarray:
    clock = _require_clock(space)
    if n_a not in (0, 1):
        raise ClockStructureError(f"Clock sector must be 0 or 1, got {n_a}")
    return np.flatnonzero(space.occupation_table()[:, clock] == n_a)


def clock_leakage(op: Operator) -> float:
    """Largest matrix element connecting different clock sectors, i.e. ||[H, a^dag a]||_max."""
    clock = _require_clock(op.space)
    occ = op.space.occupation_table()[:, clock]
    coo = op.matrix.tocoo()
    crossing = occ[coo.row] != occ[coo.col]
    if not np.any(crossing):
        return 0.0
    return float(np.max(np.abs(coo.data[crossing])))


def clock_block(op: Operator, n_a: int, tol=1e-12) -> Operator:
    """Restrict a clock-block-diagonal operator to clock sector n_a."""
    leakage = clock_leakage(op)
    if leakage >= tol:
        raise ClockStructureError(
            f"Operator couples clock sectors (||[H, a^dag a]||_max = {leakage:.3e})")
    idx = clock_sector_indices(op.space, n_a)
    block = op.matrix[idx][:, idx]
    return Operator._wrap(op.space.without_clock(), block, op.hermitian,
                          label=f"{op.label or 'H'}[n_a={n_a}]")


def state_from_occupations(space: HilbertSpace, occupations) -> StateVector:
    return StateVector.basis(space, occupations)


def random_state(space: HilbertSpace, rng: np.random.Generator) -> StateVector:
    """Haar-random normalized state."""
    amplitudes = rng.normal(size=space.total_dim) + 1j * rng.normal(size=space.total_dim)
    return StateVector(space, amplitudes / np.linalg.norm(amplitudes))


def as_state(space: HilbertSpace, value: Union[StateVector, Sequence[complex]]) -> StateVector:
    if isinstance(value, StateVector):
        if value.space != space:
            raise SpaceMismatchError(f"State lives in {value.space}, expected {space}")
        return value
    return StateVector(space, value)
