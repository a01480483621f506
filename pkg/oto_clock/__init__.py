"""
oto-clock

Simulates measuring out-of-time-order correlators with a quantum clock: a
two-level control that runs a system forward or backward in time. Includes
the cavity/qubit lattice models whose effective Hamiltonian changes sign with
the clock state, the interferometric protocol with pulse errors, brute-force
reference correlators, and spectral checks of the effective models.

Example:
    from oto_clock import get_preset, build_local_effective, clock_block

    params = get_preset('fig6_dimer')
    H = build_local_effective(params)
    h_forward = clock_block(H, 1)
"""

__version__ = "0.1.0"

from .errors import ConfigError, OtoClockError
from .hilbert import (
    HilbertSpace,
    Operator,
    SiteKind,
    StateVector,
    clock_block,
    local_operator,
    make_space,
)
from .models import (
    ModelParams,
    build_disordered_heisenberg,
    build_local_effective,
    build_local_microscopic,
    build_nonlocal_effective,
    build_nonlocal_microscopic,
    get_preset,
    solve_sign_condition,
)
from .dynamics import propagate, spectral_decompose
from .protocol import ProtocolSpec, PulseErrors, run_oto_protocol
from .oracle import otoc_literal, otoc_pure, otoc_switch_error, relative_switch_error
from .spectra import compare_spectra, ring_degeneracy_signature, sector_spectrum
from .experiments import ExperimentConfig, load_config, run_experiment
from .acceptance import run_acceptance

__all__ = [
    'ConfigError', 'OtoClockError',
    'HilbertSpace', 'Operator', 'SiteKind', 'StateVector', 'clock_block', 'local_operator', 'make_space',
    'ModelParams', 'build_disordered_heisenberg', 'build_local_effective', 'build_local_microscopic',
    'build_nonlocal_effective', 'build_nonlocal_microscopic', 'get_preset', 'solve_sign_condition',
    'propagate', 'spectral_decompose',
    'ProtocolSpec', 'PulseErrors', 'run_oto_protocol',
    'otoc_literal', 'otoc_pure', 'otoc_switch_error', 'relative_switch_error',
    'compare_spectra', 'ring_degeneracy_signature', 'sector_spectrum',
    'ExperimentConfig', 'load_config', 'run_experiment',
    'run_acceptance',
]
