"""
Configuration-driven experiment runner.

An experiment file is a single JSON document:

    {
      "experiment": "switch_sweep",
      "model": {"preset": "fig4_chain", "params": {"L": 8}},
      "operators": {"O1": "sigma_z@1", "O2": "sigma_z@6"},
      "initial_state": "neel",
      "time": {"start": 0.0, "stop": 10.0, "points": 11},
      "errors": {"d_theta_prime": 0.0, "d_theta_1": 0.0, "d_theta_2": 0.0, "max_angle": 0.3},
      "ensemble": {"n_samples": 100, "seed": 1234, "deltas": [0.02, 0.05]},
      "output": {"path": "results/fig4.csv", "format": "csv"},
      "options": {}
    }

Every section is optional. Results are rows of plain values written as CSV
(with '#' metadata lines) or as a JSON mirror that also carries the runtime.
"""

import csv
import hashlib
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional

import numpy as np
from tqdm.contrib.concurrent import thread_map

from . import __version__
from .config import Config
from .errors import ConfigError, OtoClockError
from .hilbert import (
    BOSON,
    QUBIT,
    HilbertSpace,
    Operator,
    StateVector,
    clock_block,
    local_operator,
    random_state,
)
from .models import (
    HEISENBERG_PRESETS,
    PRESETS,
    HeisenbergPreset,
    ModelParams,
    build_disordered_heisenberg,
    build_local_effective,
    build_local_microscopic,
    build_nonlocal_effective,
    build_nonlocal_microscopic,
    get_preset,
    random_fields,
    realization_rng,
    sign_flip_defect,
    solve_sign_condition,
)
from .oracle import (
    loschmidt_echo,
    otoc_literal,
    otoc_matrix_element,
    otoc_pure,
    otoc_thermal,
    relative_switch_error,
)
from .protocol import ProtocolSpec, PulseErrors, noise_bound, run_oto_protocol
from .spectra import (
    compare_spectra,
    manifold_splitting,
    ring_degeneracy_signature,
    sector_spectrum,
)

EXPERIMENTS = ('oracle', 'protocol', 'switch_sweep', 'pulse_sweep', 'spectra', 'ring_check', 'loschmidt')
MODEL_KINDS = ('local', 'nonlocal', 'heisenberg')
FORMATS = ('csv', 'json')
SIGN_TOL = 1e-12

PRESET_EXPERIMENTS = {
    'fig6_dimer': 'spectra',
    'fig7_ring': 'ring_check',
    'fig4_chain': 'switch_sweep',
}

OPTION_KEYS = {
    'hamiltonian', 'effective_order', 'fourth_order', 'include_zz', 'beta',
    'perturbation', 'perturbation_strength', 'offset_policy',
}
ERROR_KEYS = {'d_theta_prime', 'd_theta_1', 'd_theta_2', 'max_angle'}
MODEL_KEYS = {'preset', 'kind', 'params', 'sign_condition'}
SECTIONS = {'experiment', 'model', 'operators', 'initial_state', 'time', 'errors', 'ensemble', 'output',
            'options'}


def _check_keys(section: str, data: Dict, allowed) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"Section '{section}' must be a JSON object", key=section)
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"Unknown key(s) in '{section}': {', '.join(unknown)}", key=unknown[0])


def _from_section(cls, section: str, data: Dict):
    _check_keys(section, data, {f.name for f in fields(cls)})
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigError(f"Invalid '{section}' section: {e}", key=section)


@dataclass
class TimeGrid:
    start: float = 0.0
    stop: float = 10.0
    points: int = 11

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 1:
            raise ConfigError(f"time.points must be a positive integer, got {self.points}", key='points')
        if self.start < 0 or self.stop < self.start:
            raise ConfigError(f"Time grid must satisfy 0 <= start <= stop, got [{self.start}, {self.stop}]",
                              key='time')
        self.points = int(self.points)

    def values(self) -> List[float]:
        return [float(t) for t in np.linspace(self.start, self.stop, self.points)]


@dataclass
class EnsembleSpec:
    n_samples: int = 100
    seed: Optional[int] = None
    deltas: List[float] = field(default_factory=lambda: [0.02, 0.05])

    def __post_init__(self):
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ConfigError(f"ensemble.n_samples must be >= 1, got {self.n_samples}", key='n_samples')
        if any(d < 0 for d in self.deltas):
            raise ConfigError("ensemble.deltas must be non-negative", key='deltas')
        self.n_samples = int(self.n_samples)
        self.deltas = [float(d) for d in self.deltas]


@dataclass
class OutputSpec:
    path: Optional[str] = None
    format: str = 'csv'

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ConfigError(f"output.format must be one of {FORMATS}, got '{self.format}'", key='format')


@dataclass
class ExperimentConfig:
    experiment: str = 'protocol'
    model: Dict[str, Any] = field(default_factory=lambda: {'preset': 'fig6_dimer'})
    operators: Dict[str, str] = field(default_factory=dict)
    initial_state: Any = 'neel'
    time: TimeGrid = field(default_factory=TimeGrid)
    errors: Dict[str, float] = field(default_factory=dict)
    ensemble: EnsembleSpec = field(default_factory=EnsembleSpec)
    output: OutputSpec = field(default_factory=OutputSpec)
    options: Dict[str, Any] = field(default_factory=dict)
    source_path: Optional[str] = field(default=None, repr=False, compare=False)
    source_text: Optional[str] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"Unknown experiment '{self.experiment}', expected one of {EXPERIMENTS}",
                              key='experiment')
        _check_keys('model', self.model, MODEL_KEYS)
        _check_keys('operators', self.operators, {'O1', 'O2'})
        _check_keys('errors', self.errors, ERROR_KEYS)
        _check_keys('options', self.options, OPTION_KEYS)

    @classmethod
    def from_dict(cls, data: Dict) -> 'ExperimentConfig':
        _check_keys('config', data, SECTIONS)
        data = dict(data)
        if 'time' in data:
            data['time'] = _from_section(TimeGrid, 'time', data['time'])
        if 'ensemble' in data:
            data['ensemble'] = _from_section(EnsembleSpec, 'ensemble', data['ensemble'])
        if 'output' in data:
            data['output'] = _from_section(OutputSpec, 'output', data['output'])
        return cls(**data)

    def to_dict(self) -> Dict:
        return {
            'experiment': self.experiment,
            'model': json.loads(json.dumps(self.model)),
            'operators': dict(self.operators),
            'initial_state': self.initial_state,
            'time': {'start': self.time.start, 'stop': self.time.stop, 'points': self.time.points},
            'errors': dict(self.errors),
            'ensemble': {'n_samples': self.ensemble.n_samples, 'seed': self.ensemble.seed,
                         'deltas': list(self.ensemble.deltas)},
            'output': {'path': self.output.path, 'format': self.output.format},
            'options': dict(self.options),
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def anchor(self, error: ConfigError) -> ConfigError:
        """error pointed at its key in the file this config was read from."""
        if self.source_text is None or error.path is not None:
            return error
        return anchor_error(error, self.source_text, self.source_path)


def locate_key(text: str, key: str):
    """1-based (line, column) of the first '"key"' token in text, or (None, None)."""
    offset = text.find(f'"{key}"')
    if offset < 0:
        return None, None
    line = text.count('\n', 0, offset) + 1
    column = offset - (text.rfind('\n', 0, offset) + 1) + 1
    return line, column


def anchor_error(error: ConfigError, text: str, path: Optional[str]) -> ConfigError:
    line, column = locate_key(text, error.key) if error.key else (None, None)
    return ConfigError(error.message, path, line, column, error.key)


def parse_config(text: str, path: Optional[str] = None) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON: {e.msg}", path, e.lineno, e.colno)
    if not isinstance(data, dict):
        raise ConfigError("Experiment config must be a JSON object", path, 1, 1)
    try:
        config = ExperimentConfig.from_dict(data)
        resolve_model(config.model)
    except ConfigError as e:
        raise anchor_error(e, text, path) from e
    config.source_path, config.source_text = path, text
    return config


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"Cannot read config: {e.strerror}", path)
    config = parse_config(text, path)
    logging.info(f"Loaded experiment config from {path}")
    return config


def apply_overrides(config: ExperimentConfig, preset=None, experiment=None, seed=None,
                    out=None, fmt=None, L=None) -> ExperimentConfig:
    """Command-line flags win over the config file."""
    model = json.loads(json.dumps(config.model))
    if preset is not None:
        model = {'preset': preset}
    if L is not None:
        model.setdefault('params', {})['L'] = int(L)
    ensemble = replace(config.ensemble, seed=seed) if seed is not None else config.ensemble
    output = OutputSpec(out if out is not None else config.output.path,
                        fmt if fmt is not None else config.output.format)
    return replace(config, experiment=experiment or config.experiment, model=model,
                   ensemble=ensemble, output=output)


def config_for_preset(name: str, experiment: Optional[str] = None) -> ExperimentConfig:
    get_preset(name)
    return ExperimentConfig(experiment=experiment or PRESET_EXPERIMENTS.get(name, 'protocol'),
                            model={'preset': name})


@dataclass
class ResolvedModel:
    kind: str
    params: Optional[ModelParams] = None
    chain: Optional[HeisenbergPreset] = None


def resolve_model(section: Dict) -> ResolvedModel:
    overrides = dict(section.get('params', {}))
    preset = section.get('preset')
    if preset is not None:
        base = get_preset(preset)
        if isinstance(base, HeisenbergPreset):
            chain = _from_section(HeisenbergPreset, 'params', {**base.__dict__, **overrides})
            return ResolvedModel('heisenberg', chain=chain)
        params = ModelParams.from_dict({**base.to_dict(), **overrides})
        kind = section.get('kind', 'local')
    else:
        kind = section.get('kind')
        if kind not in MODEL_KINDS:
            raise ConfigError(f"model.kind must be one of {MODEL_KINDS} when no preset is given", key='kind')
        if kind == 'heisenberg':
            return ResolvedModel('heisenberg', chain=_from_section(HeisenbergPreset, 'params', overrides))
        params = ModelParams.from_dict(overrides)

    if kind not in ('local', 'nonlocal'):
        raise ConfigError(f"model.kind '{kind}' does not take cavity parameters", key='kind')
    if 'L' in overrides:
        raise ConfigError("L applies to the Heisenberg chain only", key='L')
    condition = section.get('sign_condition')
    if condition is not None:
        params = solve_sign_condition(params, condition)
    return ResolvedModel(kind, params=params)


def clock_model(model: ResolvedModel, options: Dict) -> Operator:
    """Full clock-coupled Hamiltonian of a cavity model."""
    params = model.params
    microscopic = options.get('hamiltonian', 'effective') == 'microscopic'
    if model.kind == 'local':
        if microscopic:
            return build_local_microscopic(params)
        return build_local_effective(params, order=options.get('effective_order', 2),
                                     fourth_order=options.get('fourth_order', 'tabulated'))
    if microscopic:
        return build_nonlocal_microscopic(params)
    return build_nonlocal_effective(params, include_zz=options.get('include_zz', False))


def system_hamiltonian(model: ResolvedModel, options: Dict, realization: int = 0) -> Operator:
    """System-only H run forward by the clock (the n_a = 1 block for cavity models)."""
    if model.kind == 'heisenberg':
        chain = model.chain
        return build_disordered_heisenberg(chain.L, random_fields(chain.L, chain.disorder(), realization))
    H = clock_model(model, options)
    defect = sign_flip_defect(H)
    if defect > SIGN_TOL:
        logging.warning(f"Clock does not exactly reverse this model (||h1 + h0||_max = {defect:.3e}); "
                        f"the backward branch is not a time reversal")
    return clock_block(H, 1)


def parse_operator(space: HilbertSpace, text: str) -> Operator:
    """'identity' or 'kind@site', e.g. 'sigma_z@2' or 'x@0'."""
    text = text.strip()
    if text == 'identity':
        return local_operator(space, 0, 'identity')
    kind, sep, site = text.partition('@')
    if not sep:
        raise ConfigError(f"Operator '{text}' must look like 'kind@site'", key='operators')
    try:
        index = int(site)
    except ValueError:
        raise ConfigError(f"Operator '{text}' has a non-integer site", key='operators')
    if not 0 <= index < space.n_sites:
        raise ConfigError(f"Operator '{text}' refers to site {index}, space has {space.n_sites} sites",
                          key='operators')
    try:
        return local_operator(space, index, kind)
    except OtoClockError as e:
        raise ConfigError(f"Operator '{text}': {e}", key='operators')


def _active_sites(model: ResolvedModel, space: HilbertSpace):
    if model.kind == 'local':
        return space.sites_of_kind(BOSON), 'x'
    return space.sites_of_kind(QUBIT), 'sigma_z'


def default_operators(model: ResolvedModel, space: HilbertSpace):
    if model.kind == 'heisenberg':
        first, second = model.chain.operator_sites()
        return f"sigma_z@{first}", f"sigma_z@{second}"
    sites, kind = _active_sites(model, space)
    return f"{kind}@{sites[0]}", f"{kind}@{sites[-1]}"


def build_initial_state(space: HilbertSpace, spec, seed: int) -> StateVector:
    """
    'neel' / 'all_up' / 'all_down' product states, 'random' (seeded Haar state) or
    an explicit occupation list. A qubit is up in |0>; a cavity is up with one photon.
    """
    if isinstance(spec, list):
        try:
            return StateVector.basis(space, spec)
        except OtoClockError as e:
            raise ConfigError(f"initial_state: {e}", key='initial_state')
    if spec == 'random':
        return random_state(space, realization_rng(seed, 0))
    if spec not in ('neel', 'all_up', 'all_down'):
        raise ConfigError(f"Unknown initial_state '{spec}'", key='initial_state')
    occupations = []
    for i, site in enumerate(space.sites):
        up = spec == 'all_up' or (spec == 'neel' and i % 2 == 0)
        if site.kind == QUBIT:
            occupations.append(0 if up else 1)
        else:
            occupations.append(1 if up else 0)
    return StateVector.basis(space, occupations)


@dataclass
class ResultRecord:
    experiment: str
    config_hash: str
    seed: int
    columns: List[str]
    rows: List[Dict[str, Any]]
    metadata: Dict[str, Any] = field(default_factory=dict)
    runtime_seconds: float = 0.0
    version: str = __version__


@dataclass
class RunContext:
    config: ExperimentConfig
    model: ResolvedModel
    seed: int
    threads: int

    @property
    def options(self):
        return self.config.options

    def operators(self, space):
        default_O1, default_O2 = default_operators(self.model, space)
        O1 = parse_operator(space, self.config.operators.get('O1', default_O1))
        O2 = parse_operator(space, self.config.operators.get('O2', default_O2))
        return O1, O2

    def pulse_errors(self) -> PulseErrors:
        errors = self.config.errors
        return PulseErrors(errors.get('d_theta_prime', 0.0), errors.get('d_theta_1', 0.0),
                           errors.get('d_theta_2', 0.0))

    def setup(self):
        H = system_hamiltonian(self.model, self.options)
        O1, O2 = self.operators(H.space)
        psi = build_initial_state(H.space, self.config.initial_state, self.seed)
        return H, psi, O1, O2


def _run_oracle(ctx: RunContext):
    H, psi, O1, O2 = ctx.setup()
    beta = ctx.options.get('beta')
    columns = ['t', 're', 'im', 'abs', 're_matrix', 'im_matrix', 're_literal', 'im_literal']
    if beta is not None:
        columns += ['re_thermal', 'im_thermal']
    rows = []
    for t in ctx.config.time.values():
        value = otoc_pure(H, psi, O1, O2, t)
        check = otoc_matrix_element(H, psi, O1, O2, t)
        literal = otoc_literal(H, psi, O1, O2, t)
        row = {'t': t, 're': value.real, 'im': value.imag, 'abs': abs(value),
               're_matrix': check.real, 'im_matrix': check.imag,
               're_literal': literal.real, 'im_literal': literal.imag}
        if beta is not None:
            thermal = otoc_thermal(H, float(beta), O1, O2, t)
            row.update(re_thermal=thermal.real, im_thermal=thermal.imag)
        rows.append(row)
    return columns, rows, ('t',), {}


def _run_protocol(ctx: RunContext):
    H, psi, O1, O2 = ctx.setup()
    errors = ctx.pulse_errors()
    prefactor = (math.cos(errors.d_theta_prime) * math.cos(errors.d_theta_1 / 2) ** 2
                 * math.cos(errors.d_theta_2 / 2) ** 2)
    bound = noise_bound(errors.d_theta_1, errors.d_theta_2)
    columns = ['t', 'tau_x', 'tau_y', 're_oracle', 'im_oracle', 'deviation', 'signal_prefactor', 'noise_bound']
    rows = []
    for t in ctx.config.time.values():
        result = run_oto_protocol(ProtocolSpec(H, psi, O1, O2, t, errors))
        reference = otoc_pure(H, psi, O1, O2, t)
        rows.append({
            't': t, 'tau_x': result.tau_x, 'tau_y': result.tau_y,
            're_oracle': reference.real, 'im_oracle': reference.imag,
            'deviation': abs(result.otoc - reference),
            'signal_prefactor': prefactor, 'noise_bound': bound,
        })
    return columns, rows, ('t',), {}


def _run_switch_sweep(ctx: RunContext):
    H, psi, O1, O2 = ctx.setup()
    n_samples = ctx.config.ensemble.n_samples
    columns = ['delta', 't', 're_mean', 'im_mean', 'abs_mean', 're_ref', 'im_ref',
               'rel_err', 'rel_err_real', 'rel_err_imag', 'undefined']
    rows = []
    for delta in ctx.config.ensemble.deltas:
        logging.info(f"Switch sweep: delta={delta}, {n_samples} samples per time point")
        for t in ctx.config.time.values():
            result = relative_switch_error(H, psi, O1, O2, t, delta, n_samples, ctx.seed, ctx.threads)
            rows.append({
                'delta': delta, 't': t,
                're_mean': result.mean.real, 'im_mean': result.mean.imag, 'abs_mean': abs(result.mean),
                're_ref': result.reference.real, 'im_ref': result.reference.imag,
                'rel_err': result.relative_error, 'rel_err_real': result.relative_error_real,
                'rel_err_imag': result.relative_error_imag, 'undefined': result.undefined,
            })
    initial = otoc_pure(H, psi, O1, O2, 0.0)
    metadata = {'n_samples': n_samples, 'delta_is': 'standard deviation',
                'reference_t0_re': initial.real, 'reference_t0_im': initial.imag}
    return columns, rows, ('delta', 't'), metadata


def _run_pulse_sweep(ctx: RunContext):
    H, psi, O1, O2 = ctx.setup()
    max_angle = float(ctx.config.errors.get('max_angle', 0.3))
    n_samples = ctx.config.ensemble.n_samples

    def draw(k):
        return realization_rng(ctx.seed, k).uniform(-max_angle, max_angle, size=3)

    columns = ['t', 'sample', 'd_theta_prime', 'd_theta_1', 'd_theta_2', 'tau_x', 'tau_y',
               'predicted_tau_x', 'deviation', 'noise_bound', 'within_bound']
    rows = []
    for t in ctx.config.time.values():
        def shot(k, t=t):
            angles = draw(k)
            errors = PulseErrors(*(float(a) for a in angles))
            result = run_oto_protocol(ProtocolSpec(H, psi, O1, O2, t, errors))
            predicted = (math.cos(errors.d_theta_prime) * math.cos(errors.d_theta_1 / 2) ** 2
                         * math.cos(errors.d_theta_2 / 2) ** 2 * result.branch_overlap.real)
            deviation = abs(result.tau_x - predicted)
            bound = noise_bound(errors.d_theta_1, errors.d_theta_2)
            return {
                't': t, 'sample': k, 'd_theta_prime': errors.d_theta_prime,
                'd_theta_1': errors.d_theta_1, 'd_theta_2': errors.d_theta_2,
                'tau_x': result.tau_x, 'tau_y': result.tau_y, 'predicted_tau_x': predicted,
                'deviation': deviation, 'noise_bound': bound, 'within_bound': deviation <= bound + 1e-9,
            }

        rows.extend(thread_map(shot, range(n_samples), max_workers=ctx.threads, disable=True))
    return columns, rows, ('t', 'sample'), {'n_samples': n_samples, 'max_angle': max_angle}


def _cavity_pair(ctx: RunContext):
    model = ctx.model
    if model.kind == 'heisenberg':
        raise ConfigError("Spectral experiments need a cavity model (local or nonlocal)", key='model')
    options = ctx.options
    if model.kind == 'local':
        exact = build_local_microscopic(model.params)
        effective = build_local_effective(model.params, order=options.get('effective_order', 2),
                                          fourth_order=options.get('fourth_order', 'tabulated'))
        return exact, effective, ((0, 0), (1, 0)), (1, 0)
    exact = build_nonlocal_microscopic(model.params)
    effective = build_nonlocal_effective(model.params, include_zz=options.get('include_zz', False))
    return exact, effective, ((0, 0), (0, 1)), (0, 1)


def _manifold_label(manifold):
    return f"{manifold[0]}/{manifold[1]}"


def _run_spectra(ctx: RunContext):
    exact, effective, manifolds, split_manifold = _cavity_pair(ctx)
    policy = ctx.options.get('offset_policy', 'centroid')
    columns = ['record', 'sector', 'manifold', 'index', 'energy', 'e_exact', 'e_eff', 'rel_err',
               'boson', 'qubit', 'raw_boson', 'raw_qubit', 'value', 'prediction']
    rows = []
    for n_a in (0, 1):
        exact_spectrum = sector_spectrum(exact, n_a)
        effective_spectrum = sector_spectrum(effective, n_a)
        for index, level in enumerate(exact_spectrum.levels):
            rows.append({'record': 'level', 'sector': n_a, 'manifold': _manifold_label(level.labels),
                         'index': index, 'energy': level.energy, 'boson': level.boson_number,
                         'qubit': level.qubit_excitation, 'raw_boson': level.raw_boson,
                         'raw_qubit': level.raw_qubit})
        comparison = compare_spectra(exact_spectrum, effective_spectrum, policy, manifolds)
        for pair in comparison.pairs:
            rows.append({'record': 'pair', 'sector': n_a, 'manifold': _manifold_label(pair.manifold),
                         'index': pair.index, 'e_exact': pair.e_exact, 'e_eff': pair.e_eff,
                         'rel_err': pair.rel_err})
        rows.append({'record': 'splitting', 'sector': n_a, 'manifold': _manifold_label(split_manifold),
                     'index': 0, 'value': manifold_splitting(exact, n_a, split_manifold),
                     'prediction': manifold_splitting(effective, n_a, split_manifold)})
        logging.info(f"Sector n_a={n_a}: max relative error {comparison.max_relative_error:.3e}")
    return columns, rows, ('record', 'sector', 'manifold', 'index'), {'offset_policy': policy}


def _run_ring_check(ctx: RunContext):
    model = ctx.model
    if model.kind != 'local' or not model.params.periodic:
        raise ConfigError("ring_check needs a periodic local model", key='model')
    exact = build_local_microscopic(model.params)
    effective = build_local_effective(model.params)
    columns = ['sector', 'ground_degeneracy', 'chirality_check', 'overlap_plus', 'overlap_minus',
               'pattern', 'splitting', 'prediction', 'ambiguous']
    rows = []
    for n_a in (0, 1):
        signature = ring_degeneracy_signature(exact, n_a)
        rows.append({
            'sector': n_a,
            'ground_degeneracy': signature.ground_degeneracy,
            'chirality_check': signature.chirality_check,
            'overlap_plus': signature.chirality_overlaps[0],
            'overlap_minus': signature.chirality_overlaps[1],
            'pattern': ';'.join(f"{e:.17g}" for e in signature.pattern),
            'splitting': manifold_splitting(exact, n_a),
            'prediction': manifold_splitting(effective, n_a),
            'ambiguous': signature.ambiguous,
        })
    return columns, rows, ('sector',), {}


def _run_loschmidt(ctx: RunContext):
    H, psi, _, _ = ctx.setup()
    default_site = _active_sites(ctx.model, H.space)[0][0] if ctx.model.kind != 'heisenberg' else 0
    default_kind = 'n' if ctx.model.kind == 'local' else 'sigma_z'
    perturbation = parse_operator(H.space, ctx.options.get('perturbation', f"{default_kind}@{default_site}"))
    strength = float(ctx.options.get('perturbation_strength', 0.05))
    deltaH = strength * perturbation
    columns = ['t', 're', 'im', 'abs']
    rows = []
    for t in ctx.config.time.values():
        value = loschmidt_echo(H, deltaH, psi, t)
        rows.append({'t': t, 're': value.real, 'im': value.imag, 'abs': abs(value)})
    return columns, rows, ('t',), {'perturbation_strength': strength}


RUNNERS = {
    'oracle': _run_oracle,
    'protocol': _run_protocol,
    'switch_sweep': _run_switch_sweep,
    'pulse_sweep': _run_pulse_sweep,
    'spectra': _run_spectra,
    'ring_check': _run_ring_check,
    'loschmidt': _run_loschmidt,
}


def resolve_seed(config: ExperimentConfig) -> int:
    return Config.DEFAULT_SEED if config.ensemble.seed is None else int(config.ensemble.seed)


def _sort_key(keys):
    def key(row):
        return tuple('' if row.get(k) is None else row.get(k) for k in keys)
    return key


def run_experiment(config: ExperimentConfig, threads=None) -> ResultRecord:
    threads = Config.threads() if threads is None else max(1, int(threads))
    seed = resolve_seed(config)
    started = time.perf_counter()
    try:
        model = resolve_model(config.model)
        logging.info(f"Running '{config.experiment}' ({model.kind} model, seed {seed}, {threads} thread(s))")
        columns, rows, sort_keys, metadata = RUNNERS[config.experiment](RunContext(config, model, seed, threads))
    except ConfigError as e:
        raise config.anchor(e) from e
    rows = sorted(rows, key=_sort_key(sort_keys))
    runtime = time.perf_counter() - started
    logging.info(f"Finished '{config.experiment}': {len(rows)} rows in {runtime:.2f}s")

    return ResultRecord(config.experiment, config.config_hash(), seed, columns, rows,
                        metadata, runtime)


def format_value(value) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(record: ResultRecord, path: str) -> None:
    """CSV with '#' metadata lines; nothing time-dependent, so reruns are byte-identical."""
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        handle.write(f"# oto-clock {record.version}\n")
        handle.write(f"# experiment: {record.experiment}\n")
        handle.write(f"# config_hash: {record.config_hash}\n")
        handle.write(f"# seed: {record.seed}\n")
        for key in sorted(record.metadata):
            handle.write(f"# {key}: {format_value(record.metadata[key])}\n")
        handle.write(f"# columns: {', '.join(record.columns)}\n")
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(record.columns)
        for row in record.rows:
            writer.writerow([format_value(row.get(column)) for column in record.columns])


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def write_json(record: ResultRecord, path: str) -> None:
    document = {
        'metadata': {
            'version': record.version,
            'experiment': record.experiment,
            'config_hash': record.config_hash,
            'seed': record.seed,
            'runtime_seconds': record.runtime_seconds,
            **{k: _json_value(v) for k, v in record.metadata.items()},
        },
        'columns': record.columns,
        'rows': [{c: _json_value(row.get(c)) for c in record.columns} for row in record.rows],
    }
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(document, handle, indent=2, sort_keys=True)


def default_output_path(config: ExperimentConfig) -> str:
    return os.path.join(Config.OUTPUT_DIR, f"{config.experiment}.{config.output.format}")


def write_result(record: ResultRecord, config: ExperimentConfig) -> str:
    path = config.output.path or default_output_path(config)
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    if config.output.format == 'json':
        write_json(record, path)
    else:
        write_csv(record, path)
    logging.info(f"Wrote {len(record.rows)} rows to {path}")
    return path


def list_presets() -> List[Dict[str, Any]]:
    entries = []
    for name, params in sorted(PRESETS.items()):
        entries.append({'name': name, 'kind': 'local', 'experiment': PRESET_EXPERIMENTS[name],
                        'params': params.to_dict()})
    for name, chain in sorted(HEISENBERG_PRESETS.items()):
        entries.append({'name': name, 'kind': 'heisenberg', 'experiment': PRESET_EXPERIMENTS[name],
                        'params': dict(chain.__dict__)})
    return entries
