"""
Sector-resolved spectra of the clock-controlled models and the checks that
compare the microscopic and effective descriptions.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .dynamics import spectral_decompose
from .errors import OtoClockError
from .hilbert import (
    BOSON,
    QUBIT,
    HilbertSpace,
    Operator,
    clock_block,
    excitation_values,
    local_operator,
    zero,
)
from .models import (
    ModelParams,
    build_complete_second_order,
    build_local_microscopic,
    local_space,
    coupler_modes,
    local_lattice,
)

DEFAULT_MANIFOLDS = ((0, 0), (1, 0))
LABEL_WARN = 0.4
CHIRALITY_TOL = 1e-3


@dataclass(frozen=True)
class Level:
    energy: float
    boson_number: int
    qubit_excitation: int
    raw_boson: float
    raw_qubit: float

    @property
    def labels(self) -> Tuple[int, int]:
        return (self.boson_number, self.qubit_excitation)

    def label_deviation(self) -> float:
        return max(abs(self.raw_boson - self.boson_number), abs(self.raw_qubit - self.qubit_excitation))


@dataclass
class SectorSpectrum:
    n_a: int
    levels: List[Level]
    vectors: np.ndarray = field(repr=False)
    space: HilbertSpace = field(repr=False)

    @property
    def energies(self) -> np.ndarray:
        return np.array([level.energy for level in self.levels])

    @property
    def span(self) -> float:
        energies = self.energies
        return float(energies[-1] - energies[0]) if len(energies) else 0.0


def _site_counts(space: HilbertSpace, kind: str) -> np.ndarray:
    sites = space.sites_of_kind(kind)
    if not sites:
        return np.zeros(space.total_dim)
    return excitation_values(space, sites).astype(float)


def sector_spectrum(H: Operator, n_a: int) -> SectorSpectrum:
    """Eigenpairs of the n_a clock block, labelled by bare-basis boson and qubit excitations."""
    block = clock_block(H, n_a)
    eig = spectral_decompose(block)
    system = block.space
    bosons = _site_counts(system, BOSON)
    qubits = _site_counts(system, QUBIT)
    weights = np.abs(eig.eigenvectors) ** 2
    raw_boson = bosons @ weights
    raw_qubit = qubits @ weights

    levels = [
        Level(float(energy), int(round(b)), int(round(q)), float(b), float(q))
        for energy, b, q in zip(eig.eigenvalues, raw_boson, raw_qubit)
    ]
    logging.debug(f"Sector n_a={n_a}: {len(levels)} levels, span {levels[-1].energy - levels[0].energy:.6g}")
    return SectorSpectrum(n_a, levels, eig.eigenvectors, system)


def classify_manifold(spectrum: SectorSpectrum, target: Tuple[int, int]) -> List[Level]:
    worst = max((level.label_deviation() for level in spectrum.levels), default=0.0)
    if worst > LABEL_WARN:
        logging.warning(f"Sector n_a={spectrum.n_a}: excitation labels deviate by up to {worst:.3f} "
                        f"from integers; manifold classification is unreliable")
    return [level for level in spectrum.levels if level.labels == tuple(target)]


def manifold_indices(spectrum: SectorSpectrum, target: Tuple[int, int]) -> List[int]:
    return [i for i, level in enumerate(spectrum.levels) if level.labels == tuple(target)]


def excitation_manifolds(spectrum: SectorSpectrum) -> Dict[Tuple[int, int], List[Level]]:
    """Group levels by their rounded (boson, qubit) labels, in order of first appearance."""
    groups: Dict[Tuple[int, int], List[Level]] = {}
    for level in spectrum.levels:
        groups.setdefault(level.labels, []).append(level)
    return groups


@dataclass(frozen=True)
class ComparedLevel:
    manifold: Tuple[int, int]
    index: int
    e_exact: float
    e_eff: float
    rel_err: Optional[float]


@dataclass
class SpectrumComparison:
    n_a: int
    offset_policy: str
    pairs: List[ComparedLevel]
    excluded: int = 0

    @property
    def max_relative_error(self) -> float:
        errors = [abs(p.rel_err) for p in self.pairs if p.rel_err is not None]
        return max(errors) if errors else 0.0


def compare_spectra(exact: SectorSpectrum, effective: SectorSpectrum, offset_policy='centroid',
                    manifolds: Iterable[Tuple[int, int]] = DEFAULT_MANIFOLDS) -> SpectrumComparison:
    """
    Pair exact and effective levels in sorted order within each manifold.
    'centroid' shifts every effective manifold onto the exact manifold's mean
    energy, removing frame and H_0 offsets; 'none' compares raw energies.
    Levels with |E_exact| < 1e-6 * span get no relative error and are counted in `excluded`.
    """
    if exact.n_a != effective.n_a:
        raise OtoClockError(f"Cannot compare sector {exact.n_a} with sector {effective.n_a}")
    if offset_policy not in ('centroid', 'none'):
        raise OtoClockError(f"Unknown offset policy '{offset_policy}'")

    floor = 1e-6 * exact.span
    pairs = []
    excluded = 0
    for manifold in manifolds:
        manifold = tuple(manifold)
        e_exact = np.array([lv.energy for lv in classify_manifold(exact, manifold)])
        e_eff = np.array([lv.energy for lv in classify_manifold(effective, manifold)])
        if len(e_exact) != len(e_eff):
            raise OtoClockError(
                f"Manifold {manifold} in sector {exact.n_a} has {len(e_exact)} exact "
                f"but {len(e_eff)} effective levels")
        if len(e_exact) == 0:
            continue
        if offset_policy == 'centroid':
            e_eff = e_eff + (e_exact.mean() - e_eff.mean())
        for index, (a, b) in enumerate(zip(e_exact, e_eff)):
            if abs(a) < floor:
                excluded += 1
                rel = None
            else:
                rel = float((b - a) / a)
            pairs.append(ComparedLevel(manifold, index, float(a), float(b), rel))
    return SpectrumComparison(exact.n_a, offset_policy, pairs, excluded)


def _splitting(energies: Sequence[float]) -> float:
    e = np.sort(np.asarray(energies))
    if len(e) == 3:
        if e[1] - e[0] < e[2] - e[1]:
            return float(e[2] - 0.5 * (e[0] + e[1]))
        return float(0.5 * (e[1] + e[2]) - e[0])
    return float(e[-1] - e[0])


def manifold_splitting(H: Operator, n_a: int, manifold: Tuple[int, int] = (1, 0)) -> float:
    """Spread of a manifold; for three levels, the gap between the lone level and the pair."""
    levels = classify_manifold(sector_spectrum(H, n_a), manifold)
    if len(levels) < 2:
        raise OtoClockError(f"Manifold {manifold} in sector {n_a} has {len(levels)} level(s); need at least 2")
    return _splitting([level.energy for level in levels])


def degeneracy_tolerance(span: float) -> float:
    return max(1e-9, 1e-6 * span)


@dataclass
class RingSignature:
    n_a: int
    ground_degeneracy: int
    chirality_check: bool
    pattern: List[float]
    chirality_overlaps: Tuple[float, float]
    ambiguous: bool = False


def _degenerate_pair(indices, energies, tol):
    for a in range(len(indices)):
        for b in range(a + 1, len(indices)):
            if abs(energies[a] - energies[b]) < tol:
                return indices[a], indices[b]
    return None


def ring_degeneracy_signature(H_exact: Operator, n_a: int) -> RingSignature:
    """
    Ground degeneracy of the one-photon manifold of a ring, and whether its
    degenerate pair spans the two chiral (momentum +-2pi/N) states. The pair is
    projected onto the bare one-photon, all-qubits-down states and the span is
    renormalized before taking overlaps with the Bloch vectors.
    """
    spectrum = sector_spectrum(H_exact, n_a)
    indices = manifold_indices(spectrum, (1, 0))
    if len(indices) < 2:
        raise OtoClockError(f"One-photon manifold in sector {n_a} has {len(indices)} level(s)")
    energies = [spectrum.levels[i].energy for i in indices]
    tol = degeneracy_tolerance(spectrum.span)

    ground = energies[0]
    ground_degeneracy = sum(1 for e in energies if abs(e - ground) < tol)
    gaps = np.diff(energies)
    ambiguous = bool(np.any((gaps >= tol) & (gaps < 10 * tol)))
    if ambiguous:
        logging.warning(f"Ring sector n_a={n_a}: level gaps close to the degeneracy tolerance {tol:.3g}")

    space = spectrum.space
    cavities = space.sites_of_kind(BOSON)
    qubits = space.sites_of_kind(QUBIT)
    n = len(cavities)
    rows = []
    for j in range(n):
        occupations = [0] * space.n_sites
        occupations[cavities[j]] = 1
        for q in qubits:
            occupations[q] = 1
        rows.append(space.index_of(occupations))

    overlaps = (0.0, 0.0)
    chiral = False
    pair = _degenerate_pair(indices, energies, tol)
    if pair is not None:
        projected = spectrum.vectors[rows][:, list(pair)]
        basis, _ = np.linalg.qr(projected)
        phases = np.exp(2j * np.pi * np.arange(n) / n)
        values = []
        for sign in (1, -1):
            bloch = phases ** sign / math.sqrt(n)
            values.append(float(np.linalg.norm(basis.conj().T @ bloch) ** 2))
        overlaps = (values[0], values[1])
        chiral = all(v > 1.0 - CHIRALITY_TOL for v in values)

    pattern = [float(e - np.mean(energies)) for e in energies]
    return RingSignature(n_a, ground_degeneracy, chiral, pattern, overlaps, ambiguous)


def sw_generator_first_order(params: ModelParams, n_a: int) -> Operator:
    """S = sum_q g_q / D (B_q s^+_q - B_q^dag s^-_q) on the cavity + qubit space (no clock)."""
    lattice = local_lattice(params)
    detuning = params.local_detuning(n_a)
    space = local_space(params).without_clock()
    modes = coupler_modes(space, lattice)
    S = zero(space)
    for q, (g, B) in enumerate(zip(params.g_site, modes)):
        site = params.N + q
        S = S + (g / detuning) * (B @ local_operator(space, site, 'sigma_plus')
                                  - B.dag() @ local_operator(space, site, 'sigma_minus'))
    return S


@dataclass
class SWConsistency:
    n_a: int
    residual: float
    scale: float
    projected_residual: float
    projected_scale: float

    @property
    def ratio(self) -> float:
        return self.residual / self.scale if self.scale else 0.0

    @property
    def projected_ratio(self) -> float:
        return self.projected_residual / self.projected_scale if self.projected_scale else 0.0


def sw_consistency_check(params: ModelParams, n_a: int) -> SWConsistency:
    """
    Rotate the microscopic sector block with exp(S) and compare it with the
    complete second-order model (residual ~ g^3/D^2) and, on the all-qubits-down
    states, with the projected second-order model (residual ~ g^4/D^3).
    Only excitation sectors below the boson cutoff enter.
    """
    H = clock_block(build_local_microscopic(params), n_a).dense()
    H2 = clock_block(build_complete_second_order(params), n_a).dense()
    S = sw_generator_first_order(params, n_a).dense()
    rotated = scipy.linalg.expm(S) @ H @ scipy.linalg.expm(-S)
    diff = rotated - H2

    space = local_space(params).without_clock()
    below_cutoff = excitation_values(space) <= params.cavity_n_max
    qubits = space.sites_of_kind(QUBIT)
    all_down = np.all(space.occupation_table()[:, qubits] == 1, axis=1) if qubits else np.ones(space.total_dim, bool)

    keep = np.flatnonzero(below_cutoff)
    keep_down = np.flatnonzero(below_cutoff & all_down)
    residual = float(np.max(np.abs(diff[np.ix_(keep, keep)]))) if len(keep) else 0.0
    projected = float(np.max(np.abs(diff[np.ix_(keep_down, keep_down)]))) if len(keep_down) else 0.0

    g = max((abs(x) for x in params.g_site), default=0.0)
    detuning = abs(params.local_detuning(n_a))
    return SWConsistency(n_a, residual, g ** 3 / detuning ** 2, projected, g ** 4 / detuning ** 3)


def write_comparison_csv(comparisons: Sequence[SpectrumComparison], path) -> None:
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(['sector', 'manifold_bosons', 'manifold_qubits', 'level',
                         'E_exact', 'E_eff', 'rel_err'])
        for comparison in comparisons:
            for pair in comparison.pairs:
                writer.writerow([
                    comparison.n_a, pair.manifold[0], pair.manifold[1], pair.index,
                    f"{pair.e_exact:.17g}", f"{pair.e_eff:.17g}",
                    '' if pair.rel_err is None else f"{pair.rel_err:.17g}",
                ])
    logging.info(f"Wrote spectrum comparison to {path}")
