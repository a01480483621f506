"""
Hamiltonian builders for the clock-controlled cavity-QED models.

Two architectures share the same clock (a single control photon, n_a in {0, 1}):

* nonlocal: N qubits talk through one coupling bus b whose frequency is
  pushed by a cross-Kerr term eta * n_a * n_b. Sites [Boson(b), N x Qubit, Clock].
* local: a chain or ring of cavities b_j joined by coupler qubits; the clock
  shifts every qubit dispersively by chi * n_a * sigma^z.
  Sites [N x Boson, N_q x Qubit, Clock] (effective: [N x Boson, Clock]).

Sign conventions: Delta_a = eps - omega_a and Delta_b = eps - omega_b for both
models. The sector detuning is Delta_b - eta * n_a (nonlocal) and
Delta_b + 2 * chi * n_a (local). Frequencies are in MHz, times in us.

Every clock-coupled builder assembles H = sum_{n_a} h_{n_a} (x) |n_a><n_a| from
per-sector blocks, with the clock as the last site.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import (
    ClockStructureError,
    ConfigError,
    NoRealSolutionError,
    OtoClockError,
    SingularDetuningError,
)
from .hilbert import (
    HilbertSpace,
    Operator,
    SiteKind,
    clock_block,
    identity,
    local_operator,
    make_space,
    zero,
)

FRAMES = ('rotating', 'lab')
SIGN_MODELS = ('nonlocal', 'local', 'local_jc')
FOURTH_ORDER_FORMS = ('tabulated', 'lattice')


@dataclass
class ModelParams:
    omega_a: float = 0.0
    omega_b: float = 0.0
    epsilon: float = 0.0
    eta: float = 0.0
    chi: float = 0.0
    g_a: float = 0.0
    g_site: List[float] = field(default_factory=list)
    N: int = 1
    n_max: int = 1
    hardcore: bool = False
    periodic: bool = False

    def __post_init__(self):
        self.g_site = [float(g) for g in self.g_site]
        for name in ('omega_a', 'omega_b', 'epsilon', 'eta', 'chi', 'g_a'):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"Model parameter {name} must be finite", key=name)
        if not all(math.isfinite(g) for g in self.g_site):
            raise ConfigError("Model parameter g_site must be finite", key='g_site')
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"N must be a positive integer, got {self.N}", key='N')
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ConfigError(f"n_max must be an integer >= 1, got {self.n_max}", key='n_max')
        self.N = int(self.N)
        self.n_max = int(self.n_max)

    @property
    def delta_a(self) -> float:
        return self.epsilon - self.omega_a

    @property
    def delta_b(self) -> float:
        return self.epsilon - self.omega_b

    @property
    def coupler_count(self) -> int:
        """Qubits of the local model: N - 1 on an open chain, N on a ring."""
        return self.N if self.periodic else self.N - 1

    @property
    def cavity_n_max(self) -> int:
        return 1 if self.hardcore else self.n_max

    def nonlocal_detuning(self, n_a: int) -> float:
        detuning = self.delta_b - self.eta * n_a
        if detuning == 0.0:
            raise SingularDetuningError(f"Bus detuning vanishes in clock sector n_a={n_a}")
        return detuning

    def local_detuning(self, n_a: int) -> float:
        detuning = self.delta_b + 2 * self.chi * n_a
        if detuning == 0.0:
            raise SingularDetuningError(f"Qubit-cavity detuning vanishes in clock sector n_a={n_a}")
        return detuning

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> 'ModelParams':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown model parameter(s): {', '.join(unknown)}", key=unknown[0])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> 'ModelParams':
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class Lattice:
    """Cavities 0..N-1 with coupler q bridging cavities q and q+1 (mod N on a ring)."""
    n_cavities: int
    periodic: bool = False

    def __post_init__(self):
        if self.periodic and self.n_cavities < 3:
            raise ConfigError(f"A periodic ring needs at least 3 cavities, got {self.n_cavities}")

    @property
    def n_couplers(self) -> int:
        return self.n_cavities if self.periodic else self.n_cavities - 1

    def coupler_cavities(self, q: int):
        return (q, (q + 1) % self.n_cavities)

    def shared_cavities(self, q: int, q2: int) -> int:
        return len(set(self.coupler_cavities(q)) & set(self.coupler_cavities(q2)))

    def adjacent_couplers(self, j: int) -> int:
        return sum(1 for q in range(self.n_couplers) if j in self.coupler_cavities(q))

    def bonds(self):
        return [self.coupler_cavities(q) for q in range(self.n_couplers)]

    def next_nearest(self):
        n = self.n_cavities
        if self.periodic:
            return [(j, (j + 2) % n) for j in range(n)]
        return [(j, j + 2) for j in range(n - 2)]


@dataclass
class DisorderSpec:
    distribution: str = 'uniform'
    lo: float = -0.5
    hi: float = 0.5
    mean: float = 0.0
    std: float = 0.0
    target: str = 'g_site'
    seed: int = 1234

    def __post_init__(self):
        if self.distribution not in ('uniform', 'gaussian'):
            raise ConfigError(f"Unknown disorder distribution '{self.distribution}'")
        if self.target not in ('g_site', 'field_h'):
            raise ConfigError(f"Unknown disorder target '{self.target}'")
        if self.distribution == 'uniform' and not self.lo < self.hi:
            raise ConfigError(f"Uniform disorder needs lo < hi, got [{self.lo}, {self.hi}]")
        if self.distribution == 'gaussian' and self.std < 0:
            raise ConfigError(f"Gaussian disorder needs std >= 0, got {self.std}")

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> 'DisorderSpec':
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown disorder field(s): {', '.join(unknown)}", key=unknown[0])
        return cls(**data)


def realization_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based stream for realization `index`; identical in serial and parallel runs."""
    seed = int(seed) & (2 ** 64 - 1)
    return np.random.Generator(np.random.Philox(key=seed + (int(index) << 64)))


def sample_disorder(spec: DisorderSpec, count: int, realization: int = 0) -> List[float]:
    rng = realization_rng(spec.seed, realization)
    if spec.distribution == 'uniform':
        values = rng.uniform(spec.lo, spec.hi, size=count)
    else:
        values = rng.normal(spec.mean, spec.std, size=count)
    return [float(v) for v in values]


def disorder_couplings(params: ModelParams, spec: DisorderSpec, realization: int = 0) -> ModelParams:
    """Replace g_site by one disordered draw of the same length."""
    if spec.target != 'g_site':
        raise ConfigError(f"Disorder targets '{spec.target}', not g_site")
    return replace(params, g_site=sample_disorder(spec, len(params.g_site), realization))


def random_fields(L: int, spec: DisorderSpec, realization: int = 0) -> List[float]:
    if spec.target != 'field_h':
        raise ConfigError(f"Disorder targets '{spec.target}', not field_h")
    return sample_disorder(spec, L, realization)


def _check_frame(frame):
    if frame not in FRAMES:
        raise ConfigError(f"Unknown frame '{frame}', expected one of {FRAMES}")


def _clock_projectors():
    p0 = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex))
    p1 = sp.csr_matrix(np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex))
    return p0, p1


def assemble_sectors(space: HilbertSpace, blocks: Sequence[Operator], label=None) -> Operator:
    """H = h_0 (x) |0_a><0_a| + h_1 (x) |1_a><1_a| on a space whose last site is the clock."""
    if space.clock_index != space.n_sites - 1:
        raise ClockStructureError(f"Sector assembly needs the clock as the last site of {space}")
    system = space.without_clock()
    for block in blocks:
        if block.space != system:
            raise ClockStructureError(f"Sector block lives in {block.space}, expected {system}")
    p0, p1 = _clock_projectors()
    matrix = sp.kron(blocks[0].matrix, p0, format='csr') + sp.kron(blocks[1].matrix, p1, format='csr')
    return Operator(space, matrix, hermitian=True, label=label)


def _check_couplings(params, expected, model):
    if len(params.g_site) != expected:
        raise ConfigError(
            f"{model} model with N={params.N} needs {expected} couplings in g_site, "
            f"got {len(params.g_site)}")


def nonlocal_space(params: ModelParams) -> HilbertSpace:
    return make_space([SiteKind.boson(params.n_max)] + [SiteKind.qubit()] * params.N + [SiteKind.clock()])


def build_nonlocal_microscopic(params: ModelParams, frame='rotating') -> Operator:
    """
    Bus + qubits + clock:
        lab:      w_a n_a + w_b n_b + sum_j eps/2 s^z_j + eta n_a n_b + V
        rotating: -Delta_b n_b + eta n_a n_b + V      (frame rotating at eps)
    with V = sum_j g_j (s^+_j b + s^-_j b^dag).
    """
    _check_frame(frame)
    _check_couplings(params, params.N, 'nonlocal')
    space = nonlocal_space(params)
    clock = space.clock_index
    n_b = local_operator(space, 0, 'n')
    n_a = local_operator(space, clock, 'n')

    H = params.eta * (n_a @ n_b)
    if frame == 'lab':
        H = H + params.omega_a * n_a + params.omega_b * n_b
        for j in range(params.N):
            H = H + (0.5 * params.epsilon) * local_operator(space, 1 + j, 'sigma_z')
    else:
        H = H - params.delta_b * n_b

    b = local_operator(space, 0, 'a')
    bdag = local_operator(space, 0, 'adag')
    for j, g in enumerate(params.g_site):
        if g == 0.0:
            continue
        site = 1 + j
        H = H + g * (local_operator(space, site, 'sigma_plus') @ b
                     + local_operator(space, site, 'sigma_minus') @ bdag)

    logging.debug(f"Nonlocal microscopic H ({frame}): dim={space.total_dim}, Delta_b={params.delta_b}")
    return Operator(space, H.matrix, hermitian=True, label='H_nonlocal')


def nonlocal_effective_space(params: ModelParams) -> HilbertSpace:
    return make_space([SiteKind.qubit()] * params.N + [SiteKind.clock()])


def build_nonlocal_effective(params: ModelParams, include_zz=False, frame='rotating') -> Operator:
    """
    Quantum-bus model after eliminating the bus, per clock sector:
        sum_{j<j'} g_j g_j' / D (s^+_j s^-_j' + h.c.) + sum_j g_j^2 / (2 D) s^z_j
    with D = Delta_b - eta * n_a. include_zz adds sum_{j<j'} 2 g_j^2 g_j'^2 / D^3 s^z_j s^z_j'.
    The lab frame adds eps/2 sum_j s^z_j and w_a n_a.
    """
    _check_frame(frame)
    _check_couplings(params, params.N, 'nonlocal')
    space = nonlocal_effective_space(params)
    system = space.without_clock()
    g = params.g_site
    splus = [local_operator(system, j, 'sigma_plus') for j in range(params.N)]
    sminus = [local_operator(system, j, 'sigma_minus') for j in range(params.N)]
    sz = [local_operator(system, j, 'sigma_z') for j in range(params.N)]

    blocks = []
    for n_a in (0, 1):
        detuning = params.nonlocal_detuning(n_a)
        cubed = detuning * detuning * detuning
        block = zero(system)
        for j in range(params.N):
            block = block + (g[j] ** 2 / (2 * detuning)) * sz[j]
            for k in range(j + 1, params.N):
                hop = splus[j] @ sminus[k]
                block = block + (g[j] * g[k] / detuning) * (hop + hop.dag())
                if include_zz:
                    block = block + (2 * g[j] ** 2 * g[k] ** 2 / cubed) * (sz[j] @ sz[k])
        if frame == 'lab':
            for j in range(params.N):
                block = block + (0.5 * params.epsilon) * sz[j]
            block = block + (params.omega_a * n_a) * identity(system)
        blocks.append(block)

    logging.debug(f"Nonlocal effective H ({frame}, zz={include_zz}): dim={space.total_dim}")
    return assemble_sectors(space, blocks, label='H_nonlocal_eff')


def local_space(params: ModelParams) -> HilbertSpace:
    cavity = SiteKind.boson(params.cavity_n_max)
    return make_space([cavity] * params.N + [SiteKind.qubit()] * params.coupler_count + [SiteKind.clock()])


def local_effective_space(params: ModelParams) -> HilbertSpace:
    return make_space([SiteKind.boson(params.cavity_n_max)] * params.N + [SiteKind.clock()])


def local_lattice(params):
    lattice = Lattice(params.N, params.periodic)
    _check_couplings(params, lattice.n_couplers, 'local')
    return lattice


def coupler_modes(space, lattice):
    """B_q = sum of the cavity annihilators adjacent to coupler q (cavities are sites 0..N-1)."""
    modes = []
    for q in range(lattice.n_couplers):
        left, right = lattice.coupler_cavities(q)
        modes.append(local_operator(space, left, 'a') + local_operator(space, right, 'a'))
    return modes


def build_local_microscopic(params: ModelParams, frame='rotating') -> Operator:
    """
    Cavity lattice + coupler qubits + clock:
        lab:      w_a n_a + w_b sum_j n_j + eps/2 sum_q s^z_q + chi n_a sum_q s^z_q + V
        rotating: Delta_b/2 sum_q s^z_q + chi n_a sum_q s^z_q + V   (frame rotating at w_b)
    with V = sum_q g_q (B_q^dag s^-_q + B_q s^+_q).
    """
    _check_frame(frame)
    lattice = local_lattice(params)
    space = local_space(params)
    n_a = local_operator(space, space.clock_index, 'n')
    qubit0 = params.N

    qubit_field = params.epsilon if frame == 'lab' else params.delta_b
    H = zero(space)
    for q in range(lattice.n_couplers):
        sz = local_operator(space, qubit0 + q, 'sigma_z')
        H = H + (0.5 * qubit_field) * sz + params.chi * (n_a @ sz)
    if frame == 'lab':
        H = H + params.omega_a * n_a
        for j in range(params.N):
            H = H + params.omega_b * local_operator(space, j, 'n')

    modes = coupler_modes(space, lattice)
    for q, (g, B) in enumerate(zip(params.g_site, modes)):
        if g == 0.0:
            continue
        site = qubit0 + q
        H = H + g * (B.dag() @ local_operator(space, site, 'sigma_minus')
                     + B @ local_operator(space, site, 'sigma_plus'))

    logging.debug(f"Local microscopic H ({frame}): dim={space.total_dim}, "
                  f"Delta_b={params.delta_b}, chi={params.chi}")
    return Operator(space, H.matrix, hermitian=True, label='H_local')


def _second_order_block(system, lattice, g_site, detuning):
    modes = coupler_modes(system, lattice)
    block = zero(system)
    for g, B in zip(g_site, modes):
        block = block - (g ** 2 / detuning) * (B.dag() @ B)
    return block


def _fourth_order_lattice_block(system, lattice, g_site, detuning):
    modes = coupler_modes(system, lattice)
    cubed = detuning * detuning * detuning
    block = zero(system)
    for q, (g, B) in enumerate(zip(g_site, modes)):
        Bdag = B.dag()
        block = block + (g ** 4 / cubed) * (Bdag @ Bdag @ B @ B)
        for q2, (g2, B2) in enumerate(zip(g_site, modes)):
            shared = lattice.shared_cavities(q, q2)
            if shared:
                block = block + (g ** 2 * g2 ** 2 * shared / cubed) * (Bdag @ B2)
    return block


def _fourth_order_tabulated_block(system, lattice, g, detuning):
    n = lattice.n_cavities
    cubed = detuning * detuning * detuning
    b = [local_operator(system, j, 'a') for j in range(n)]
    bd = [local_operator(system, j, 'adag') for j in range(n)]
    num = [local_operator(system, j, 'n') for j in range(n)]

    terms = zero(system)
    for j in range(n):
        terms = terms + 2.0 * (bd[j] @ bd[j] @ b[j] @ b[j]) + 8.0 * num[j]
    for j, k in lattice.bonds():
        hop = bd[j] @ b[k]
        pair = bd[k] @ bd[k] @ b[j] @ b[j]
        terms = terms + 6.0 * (num[j] @ num[k]) + 2.0 * (hop + hop.dag()) + (pair + pair.dag())
    for j, k in lattice.next_nearest():
        hop = bd[j] @ b[k]
        terms = terms + (hop + hop.dag())
    return (g ** 4 / cubed) * terms


def build_local_effective(params: ModelParams, order=2, fourth_order='tabulated', frame='rotating') -> Operator:
    """
    Cavity-only model after eliminating the coupler qubits, per clock sector D = Delta_b + 2 chi n_a:

        order 2:  -sum_q g_q^2 / D  B_q^dag B_q

    which is nearest-neighbour hopping -g^2/D plus an on-site shift of g^2/D per
    adjacent coupler (2 g^2/D in the bulk and on rings).

    order 4 adds either the published bulk coefficients ("tabulated", uniform g
    only) or the lattice form ("lattice")
        D^-3 [sum_q g_q^4 B_q^dag^2 B_q^2 + sum_{q,q'} g_q^2 g_q'^2 c_qq' B_q^dag B_q']
    with c_qq' the number of cavities couplers q and q' share.
    """
    _check_frame(frame)
    if order not in (2, 4):
        raise ConfigError(f"Effective order must be 2 or 4, got {order}", key='effective_order')
    if fourth_order not in FOURTH_ORDER_FORMS:
        raise ConfigError(f"Unknown fourth-order form '{fourth_order}', expected one of {FOURTH_ORDER_FORMS}",
                          key='fourth_order')
    lattice = local_lattice(params)
    if order == 4 and fourth_order == 'tabulated' and len(set(params.g_site)) > 1:
        raise OtoClockError("Tabulated fourth-order coefficients need uniform couplings; "
                            "use fourth_order='lattice' for disordered g_site")

    space = local_effective_space(params)
    system = space.without_clock()
    blocks = []
    for n_a in (0, 1):
        detuning = params.local_detuning(n_a)
        block = _second_order_block(system, lattice, params.g_site, detuning)
        if order == 4 and lattice.n_couplers:
            if fourth_order == 'lattice':
                block = block + _fourth_order_lattice_block(system, lattice, params.g_site, detuning)
            else:
                block = block + _fourth_order_tabulated_block(system, lattice, params.g_site[0], detuning)
        if frame == 'lab':
            block = block + (params.omega_a * n_a) * identity(system)
            for j in range(params.N):
                block = block + params.omega_b * local_operator(system, j, 'n')
        blocks.append(block)

    logging.debug(f"Local effective H (order {order}, {frame}): dim={space.total_dim}")
    return assemble_sectors(space, blocks, label=f'H_local_eff{order}')


def build_complete_second_order(params: ModelParams, frame='rotating') -> Operator:
    """
    Second-order dispersive Hamiltonian on the full cavity + qubit + clock space,
    without projecting out the qubits. Per sector D:

        H_0 + sum_q g_q^2 / D (B_q^dag B_q s^z_q + c_q s^+_q s^-_q)
            + sum_{q<q'} g_q g_q' c_qq' / D (s^+_q s^-_q' + h.c.)

    H_0 is the microscopic model at g = 0 and c_q counts the cavities next to
    coupler q. On the all-qubits-down subspace this reduces to H_0 plus the
    order-2 effective model.
    """
    lattice = local_lattice(params)
    bare = build_local_microscopic(replace(params, g_site=[0.0] * lattice.n_couplers), frame=frame)
    space = bare.space
    system = space.without_clock()
    qubit0 = params.N
    modes = coupler_modes(system, lattice)
    g = params.g_site
    splus = [local_operator(system, qubit0 + q, 'sigma_plus') for q in range(lattice.n_couplers)]
    sminus = [local_operator(system, qubit0 + q, 'sigma_minus') for q in range(lattice.n_couplers)]

    blocks = []
    for n_a in (0, 1):
        detuning = params.local_detuning(n_a)
        block = zero(system)
        for q, B in enumerate(modes):
            sz = local_operator(system, qubit0 + q, 'sigma_z')
            coeff = g[q] ** 2 / detuning
            block = block + coeff * (B.dag() @ B @ sz) + (coeff * lattice.shared_cavities(q, q)) * (splus[q] @ sminus[q])
            for q2 in range(q + 1, lattice.n_couplers):
                shared = lattice.shared_cavities(q, q2)
                if shared:
                    flip = splus[q] @ sminus[q2]
                    block = block + (g[q] * g[q2] * shared / detuning) * (flip + flip.dag())
        blocks.append(block)

    correction = assemble_sectors(space, blocks, label='H_local_2nd')
    return Operator(space, (bare + correction).matrix, hermitian=True, label='H_local_2nd')


def build_disordered_heisenberg(L: int, fields: Sequence[float]) -> Operator:
    """Open chain sum_i sigma_i . sigma_{i+1} + sum_i h_i sigma^z_i."""
    if L < 2:
        raise ConfigError(f"Heisenberg chain needs L >= 2, got {L}", key='L')
    fields = [float(h) for h in fields]
    if len(fields) != L:
        raise ConfigError(f"Heisenberg chain of length {L} needs {L} fields, got {len(fields)}")
    space = make_space([SiteKind.qubit()] * L)
    sp_ = [local_operator(space, i, 'sigma_plus') for i in range(L)]
    sm_ = [local_operator(space, i, 'sigma_minus') for i in range(L)]
    sz = [local_operator(space, i, 'sigma_z') for i in range(L)]

    H = zero(space)
    for i in range(L - 1):
        H = H + 2.0 * (sp_[i] @ sm_[i + 1] + sm_[i] @ sp_[i + 1]) + sz[i] @ sz[i + 1]
    for i, h in enumerate(fields):
        if h != 0.0:
            H = H + h * sz[i]
    logging.debug(f"Heisenberg chain: L={L}, dim={space.total_dim}")
    return Operator(space, H.matrix, hermitian=True, label='H_heisenberg')


def solve_sign_condition(params: ModelParams, model='local') -> ModelParams:
    """
    Overwrite the parameter that makes the clock flip the sign of the effective model:
        nonlocal: eta = 2 Delta_b
        local:    chi = -Delta_b
        local_jc: g_a = sqrt(-Delta_a Delta_b), chi = -Delta_b (chi = g_a^2 / Delta_a)
    """
    if model not in SIGN_MODELS:
        raise ConfigError(f"Unknown sign-condition model '{model}', expected one of {SIGN_MODELS}",
                          key='sign_condition')
    delta_b = params.delta_b
    if delta_b == 0.0:
        raise SingularDetuningError("Delta_b = 0: the sign condition has no dispersive solution")
    if model == 'nonlocal':
        solved = replace(params, eta=2 * delta_b)
    elif model == 'local':
        solved = replace(params, chi=-delta_b)
    else:
        product = params.delta_a * delta_b
        if product >= 0.0:
            raise NoRealSolutionError(
                f"g_a = sqrt(-Delta_a Delta_b) needs opposite-sign detunings, "
                f"got Delta_a={params.delta_a}, Delta_b={delta_b}")
        solved = replace(params, g_a=math.sqrt(-product), chi=-delta_b)
    logging.debug(f"Sign condition ({model}): eta={solved.eta}, chi={solved.chi}, g_a={solved.g_a}")
    return solved


def sign_flip_defect(H: Operator) -> float:
    """||h_1 + h_0||_max; zero when the clock exactly reverses the model."""
    return (clock_block(H, 1) + clock_block(H, 0)).max_abs()


@dataclass(frozen=True)
class HeisenbergPreset:
    L: int = 8
    field_lo: float = -0.5
    field_hi: float = 0.5
    seed: int = 1234

    def operator_sites(self, L: Optional[int] = None):
        """sigma^z on the second site and the second-to-last site."""
        L = self.L if L is None else L
        return 1, L - 2

    def disorder(self) -> DisorderSpec:
        return DisorderSpec('uniform', lo=self.field_lo, hi=self.field_hi, target='field_h', seed=self.seed)


PRESETS = {
    'fig6_dimer': ModelParams(
        omega_a=6850.0, omega_b=6000.0, epsilon=6050.0, eta=0.0, chi=-50.0, g_a=200.0,
        g_site=[5.0], N=2, n_max=3, hardcore=False, periodic=False),
    'fig7_ring': ModelParams(
        omega_a=6850.0, omega_b=6000.0, epsilon=6050.0, eta=0.0, chi=-50.0, g_a=200.0,
        g_site=[5.0, 5.0, 5.0], N=3, n_max=3, hardcore=False, periodic=True),
}

HEISENBERG_PRESETS = {
    'fig4_chain': HeisenbergPreset(),
}


def get_preset(name: str):
    if name in PRESETS:
        return replace(PRESETS[name], g_site=list(PRESETS[name].g_site))
    if name in HEISENBERG_PRESETS:
        return HEISENBERG_PRESETS[name]
    known = sorted(PRESETS) + sorted(HEISENBERG_PRESETS)
    raise ConfigError(f"Unknown preset '{name}', expected one of {', '.join(known)}", key='preset')
