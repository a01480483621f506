"""
Desk-scale acceptance suite run by `verify`.

Each check returns a CheckResult; a check that raises an OtoClockError is
reported as failed with the error text rather than aborting the suite.
"""

import cmath
import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Callable, List, Optional

import numpy as np
from scipy.stats import unitary_group

from .config import Config
from .errors import OtoClockError
from .experiments import build_initial_state, parse_operator
from .hilbert import Operator, SiteKind, identity, make_space, random_state, zero
from .models import (
    DisorderSpec,
    build_disordered_heisenberg,
    build_local_effective,
    build_local_microscopic,
    build_nonlocal_effective,
    disorder_couplings,
    get_preset,
    random_fields,
    realization_rng,
    sign_flip_defect,
    solve_sign_condition,
)
from .oracle import loschmidt_echo, otoc_literal, otoc_pure, otoc_switch_error, relative_switch_error
from .protocol import (
    ProtocolSpec,
    PulseErrors,
    noise_bound,
    reassemble_paths,
    run_oto_protocol,
    trace_paths,
)
from .spectra import (
    compare_spectra,
    manifold_splitting,
    ring_degeneracy_signature,
    sector_spectrum,
    sw_consistency_check,
)

PROTOCOL_TOL = 1e-9
SIGN_TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


@dataclass
class Instance:
    hamiltonian: Operator
    psi0: object
    O1: Operator
    O2: Operator
    t: float


def _random_reflection(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-rotated diagonal of random signs: Hermitian and unitary."""
    U = unitary_group.rvs(dim, random_state=rng)
    signs = rng.choice([-1.0, 1.0], size=dim)
    return (U * signs) @ U.conj().T


def random_instance(rng: np.random.Generator, n_qubits: int, t_max: float = 10.0,
                    hermitian_operators: bool = False) -> Instance:
    """Random Hermitian H, random unitaries O1/O2 and state, t in [0, t_max]."""
    space = make_space([SiteKind.qubit()] * n_qubits)
    dim = space.total_dim
    A = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    H = Operator(space, (A + A.conj().T) / 2.0, hermitian=True, label='H_random')
    if hermitian_operators:
        O1 = Operator(space, _random_reflection(rng, dim), hermitian=True, label='O1')
        O2 = Operator(space, _random_reflection(rng, dim), hermitian=True, label='O2')
    else:
        O1 = Operator(space, unitary_group.rvs(dim, random_state=rng), label='O1')
        O2 = Operator(space, unitary_group.rvs(dim, random_state=rng), label='O2')
    psi = random_state(space, rng)
    return Instance(H, psi, O1, O2, float(rng.uniform(0.0, t_max)))


def check_protocol_oracle(seed: int, n_instances: int = 50) -> CheckResult:
    """
    General unitaries are compared with the measured branch overlap; Hermitian
    unitaries also with the correlator multiplied out in its written order.
    """
    worst = 0.0
    worst_literal = 0.0
    for k in range(n_instances):
        rng = realization_rng(seed, k)
        inst = random_instance(rng, 2 + k % 2)
        result = run_oto_protocol(ProtocolSpec(inst.hamiltonian, inst.psi0, inst.O1, inst.O2, inst.t))
        worst = max(worst, abs(result.otoc - otoc_pure(inst.hamiltonian, inst.psi0, inst.O1, inst.O2, inst.t)))

        inst = random_instance(rng, 2 + k % 2, hermitian_operators=True)
        result = run_oto_protocol(ProtocolSpec(inst.hamiltonian, inst.psi0, inst.O1, inst.O2, inst.t))
        literal = otoc_literal(inst.hamiltonian, inst.psi0, inst.O1, inst.O2, inst.t)
        worst_literal = max(worst_literal, abs(result.otoc - literal))
    passed = worst < PROTOCOL_TOL and worst_literal < PROTOCOL_TOL
    return CheckResult('protocol-oracle equivalence', passed,
                       f"{n_instances} instances, max |protocol - oracle| = {worst:.2e}, "
                       f"Hermitian O vs written-order product {worst_literal:.2e}")


def check_dimer() -> CheckResult:
    params = get_preset('fig6_dimer')
    exact = build_local_microscopic(params)
    effective = build_local_effective(params)
    target = 2 * params.g_site[0] ** 2 / abs(params.delta_b)

    errors, splittings = [], []
    for n_a in (0, 1):
        comparison = compare_spectra(sector_spectrum(exact, n_a), sector_spectrum(effective, n_a))
        errors.append(comparison.max_relative_error)
        splittings.append(manifold_splitting(exact, n_a))

    spectra_ok = max(errors) < 1e-3
    splitting_ok = all(abs(s - target) <= 0.05 * target for s in splittings)
    sectors_ok = abs(splittings[0] - splittings[1]) <= 0.01 * max(splittings)
    detail = (f"max rel err {max(errors):.2e}; splittings {splittings[0]:.4f}, {splittings[1]:.4f} "
              f"(expected {target:.4f})")
    return CheckResult('dimer spectra', spectra_ok and splitting_ok and sectors_ok, detail)


def check_ring() -> CheckResult:
    params = get_preset('fig7_ring')
    exact = build_local_microscopic(params)
    hop = params.g_site[0] ** 2 / abs(params.delta_b)
    expected = {0: (1, [-2 * hop, hop, hop]), 1: (2, [-hop, -hop, 2 * hop])}
    target = 3 * hop

    passed = True
    notes = []
    for n_a in (0, 1):
        signature = ring_degeneracy_signature(exact, n_a)
        degeneracy, pattern = expected[n_a]
        splitting = manifold_splitting(exact, n_a)
        pattern_ok = np.allclose(signature.pattern, pattern, atol=0.05 * target)
        ok = (signature.ground_degeneracy == degeneracy and pattern_ok and signature.chirality_check
              and abs(splitting - target) <= 0.05 * target)
        passed = passed and ok
        notes.append(f"n_a={n_a}: degeneracy {signature.ground_degeneracy}, splitting {splitting:.4f}, "
                     f"chiral {signature.chirality_check}")
    return CheckResult('ring degeneracy', passed, '; '.join(notes))


def sign_flip_cases(seed: int):
    """(name, Hamiltonian) pairs whose clock sectors must be exact negatives."""
    dimer = get_preset('fig6_dimer')
    ring = get_preset('fig7_ring')
    bus = solve_sign_condition(replace(dimer, N=3, g_site=[5.0, 5.0, 5.0]), 'nonlocal')
    spread = DisorderSpec('uniform', lo=4.0, hi=6.0, target='g_site', seed=seed)
    return [
        ('local dimer', build_local_effective(solve_sign_condition(dimer, 'local'))),
        ('local ring', build_local_effective(solve_sign_condition(ring, 'local'))),
        ('local ring, fourth order', build_local_effective(ring, order=4)),
        ('local ring, disordered g', build_local_effective(disorder_couplings(ring, spread), order=4,
                                                           fourth_order='lattice')),
        ('bus', build_nonlocal_effective(bus, include_zz=True)),
        ('bus, disordered g', build_nonlocal_effective(disorder_couplings(bus, spread))),
    ]


def check_sign_flip(seed: int) -> CheckResult:
    defects = [(name, sign_flip_defect(H)) for name, H in sign_flip_cases(seed)]
    failing = [f"{name} ({defect:.1e})" for name, defect in defects if defect > SIGN_TOL]
    worst = max(defect for _, defect in defects)
    detail = f"{len(defects)} models, worst defect {worst:.1e}"
    if failing:
        detail += "; failing: " + ', '.join(failing)
    return CheckResult('sign-flip exactness', not failing, detail)


def _fmt(value):
    return 'undefined' if value is None else f"{value:.3e}"


def check_switch_error(seed: int, n_samples: int = 100, threads: Optional[int] = None) -> CheckResult:
    chain = get_preset('fig4_chain')
    H = build_disordered_heisenberg(chain.L, random_fields(chain.L, chain.disorder()))
    first, second = chain.operator_sites()
    O1 = parse_operator(H.space, f"sigma_z@{first}")
    O2 = parse_operator(H.space, f"sigma_z@{second}")
    psi = build_initial_state(H.space, 'neel', seed)

    exact = relative_switch_error(H, psi, O1, O2, 5.0, 0.0, 4, seed, threads)
    zero_ok = exact.relative_error is not None and exact.relative_error < 1e-10
    identity_gap = max(abs(otoc_switch_error(H, psi, O1, O2, t, 0.0) - otoc_pure(H, psi, O1, O2, t))
                       for t in (0.0, 1.0, 10.0))

    growth = []
    for delta in (0.02, 0.05):
        early = relative_switch_error(H, psi, O1, O2, 1.0, delta, n_samples, seed, threads)
        late = relative_switch_error(H, psi, O1, O2, 10.0, delta, n_samples, seed, threads)
        growth.append((delta, early.relative_error, late.relative_error))
    growth_ok = all(e is not None and l is not None and l > e for _, e, l in growth)

    detail = (f"delta=0 error {_fmt(exact.relative_error)}, eps=0 gap {identity_gap:.1e}; "
              + ', '.join(f"delta={d}: t=1 {_fmt(e)} -> t=10 {_fmt(l)}" for d, e, l in growth))
    return CheckResult('classical switch error', zero_ok and identity_gap < 1e-10 and growth_ok, detail)


def check_pulse_errors(seed: int, n_draws: int = 200, max_angle: float = 0.3) -> CheckResult:
    bound_failures = 0
    prefactor_gap = 0.0
    phase_gap = 0.0
    path_gap = 0.0
    for k in range(n_draws):
        rng = realization_rng(seed, k)
        inst = random_instance(rng, 2)
        d_prime, d1, d2 = (float(a) for a in rng.uniform(-max_angle, max_angle, size=3))

        spec = ProtocolSpec(inst.hamiltonian, inst.psi0, inst.O1, inst.O2, inst.t, PulseErrors(d_prime, d1, d2))
        result = run_oto_protocol(spec)
        predicted = (math.cos(d_prime) * math.cos(d1 / 2) ** 2 * math.cos(d2 / 2) ** 2
                     * result.branch_overlap.real)
        if abs(result.tau_x - predicted) > noise_bound(d1, d2) + 1e-9:
            bound_failures += 1

        rebuilt = reassemble_paths(trace_paths(spec), spec.hamiltonian.space)
        path_gap = max(path_gap, float(np.max(np.abs(rebuilt.joint_vector() - result.final_state.joint_vector()))))

        only_prime = run_oto_protocol(replace(spec, errors=PulseErrors(d_prime, 0.0, 0.0)))
        overlap = only_prime.branch_overlap
        prefactor_gap = max(prefactor_gap, abs(only_prime.otoc - math.cos(d_prime) * overlap))
        if abs(only_prime.otoc.real) > 1e-6:
            drift = cmath.phase(only_prime.otoc / overlap)
            phase_gap = max(phase_gap, abs(drift))

    passed = bound_failures == 0 and prefactor_gap < 1e-10 and phase_gap < 1e-9 and path_gap < 1e-9
    detail = (f"{n_draws} draws: {bound_failures} outside noise bound, prefactor gap {prefactor_gap:.1e}, "
              f"phase drift {phase_gap:.1e}, path reassembly gap {path_gap:.1e}")
    return CheckResult('pulse-error laws', passed, detail)


def check_loschmidt(seed: int, shift: float = 0.3) -> CheckResult:
    chain = get_preset('fig4_chain')
    L = 4
    H = build_disordered_heisenberg(L, random_fields(L, chain.disorder()))
    psi = random_state(H.space, realization_rng(seed, 0))
    one = identity(H.space)

    unperturbed = max(abs(loschmidt_echo(H, zero(H.space), psi, t) - 1.0) for t in (0.0, 1.0, 5.0))
    commuting = max(abs(loschmidt_echo(H, shift * one, psi, t) - cmath.exp(-1j * shift * t))
                    for t in (0.0, 1.0, 5.0))
    return CheckResult('loschmidt echo', unperturbed < 1e-12 and commuting < 1e-10,
                       f"dH=0 gap {unperturbed:.1e}, constant shift gap {commuting:.1e}")


def sw_scaling_exponent(n_a: int, couplings=(1.25, 2.5, 5.0)) -> float:
    params = get_preset('fig6_dimer')
    residuals = [sw_consistency_check(replace(params, g_site=[g]), n_a).residual for g in couplings]
    slope, _ = np.polyfit(np.log(couplings), np.log(residuals), 1)
    return float(slope)


def check_sw_scaling() -> CheckResult:
    exponents = [sw_scaling_exponent(n_a) for n_a in (0, 1)]
    passed = all(abs(e - 3.0) <= 0.3 for e in exponents)
    return CheckResult('Schrieffer-Wolff scaling', passed,
                       f"residual exponents {exponents[0]:.3f} (n_a=0), {exponents[1]:.3f} (n_a=1)")


def _timed(name: str, check: Callable[[], CheckResult]) -> CheckResult:
    started = time.perf_counter()
    try:
        result = check()
    except OtoClockError as e:
        logging.error(f"Check '{name}' raised: {e}")
        result = CheckResult(name, False, f"error: {e}")
    result.seconds = time.perf_counter() - started
    logging.info(f"{'PASS' if result.passed else 'FAIL'} {result.name} ({result.seconds:.1f}s): {result.detail}")
    return result


def run_acceptance(quick: bool = False, seed: Optional[int] = None,
                   threads: Optional[int] = None) -> List[CheckResult]:
    """Run every criterion; quick mode trims sample counts, not the checks themselves."""
    seed = Config.DEFAULT_SEED if seed is None else seed
    checks = [
        ('protocol-oracle equivalence', lambda: check_protocol_oracle(seed, 20 if quick else 50)),
        ('dimer spectra', check_dimer),
        ('ring degeneracy', check_ring),
        ('sign-flip exactness', lambda: check_sign_flip(seed)),
        ('classical switch error', lambda: check_switch_error(seed, 30 if quick else 100, threads)),
        ('pulse-error laws', lambda: check_pulse_errors(seed, 50 if quick else 200)),
        ('loschmidt echo', lambda: check_loschmidt(seed)),
        ('Schrieffer-Wolff scaling', check_sw_scaling),
    ]
    return [_timed(name, check) for name, check in checks]
