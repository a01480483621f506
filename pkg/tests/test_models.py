from dataclasses import replace

import numpy as np
import pytest

from oto_clock.errors import ConfigError, NoRealSolutionError, OtoClockError, SingularDetuningError
from oto_clock.hilbert import clock_block, clock_leakage, local_operator
from oto_clock.models import (
    PRESETS,
    DisorderSpec,
    Lattice,
    ModelParams,
    build_complete_second_order,
    build_disordered_heisenberg,
    build_local_effective,
    build_local_microscopic,
    build_nonlocal_effective,
    build_nonlocal_microscopic,
    disorder_couplings,
    get_preset,
    realization_rng,
    sample_disorder,
    sign_flip_defect,
    solve_sign_condition,
)


def one_photon_block(H, n_a):
    """2x2 block of a dimer effective model on |1,0> and |0,1>."""
    block = clock_block(H, n_a)
    space = block.space
    idx = [space.index_of([1, 0]), space.index_of([0, 1])]
    return block.dense()[np.ix_(idx, idx)].real


def test_params_validation():
    with pytest.raises(ConfigError):
        ModelParams(N=0)
    with pytest.raises(ConfigError):
        ModelParams(n_max=0)
    with pytest.raises(ConfigError):
        ModelParams(chi=float('nan'))


def test_params_unknown_key_reports_key():
    with pytest.raises(ConfigError) as excinfo:
        ModelParams.from_dict({'N': 2, 'g_b': 5.0})
    assert excinfo.value.key == 'g_b'


def test_params_json_round_trip():
    params = get_preset('fig7_ring')
    assert ModelParams.from_json(params.to_json()) == params


def test_detunings_for_dimer_preset():
    params = get_preset('fig6_dimer')
    assert params.delta_b == 50.0
    assert params.delta_a == -800.0
    assert params.local_detuning(0) == 50.0
    assert params.local_detuning(1) == -50.0


def test_singular_detuning():
    params = replace(get_preset('fig6_dimer'), chi=-25.0)
    with pytest.raises(SingularDetuningError):
        params.local_detuning(1)
    with pytest.raises(SingularDetuningError):
        build_local_effective(params)


def test_lattice_geometry():
    chain = Lattice(3)
    assert chain.n_couplers == 2
    assert chain.coupler_cavities(1) == (1, 2)
    ring = Lattice(3, periodic=True)
    assert ring.n_couplers == 3
    assert ring.coupler_cavities(2) == (2, 0)
    assert ring.shared_cavities(0, 1) == 1
    assert ring.shared_cavities(0, 0) == 2
    with pytest.raises(ConfigError):
        Lattice(2, periodic=True)


def test_coupling_count_checked():
    params = replace(get_preset('fig6_dimer'), g_site=[5.0, 5.0])
    with pytest.raises(ConfigError):
        build_local_effective(params)


def test_dimer_effective_hopping_and_shift():
    H = build_local_effective(get_preset('fig6_dimer'))
    forward = one_photon_block(H, 1)
    backward = one_photon_block(H, 0)
    # g^2 / |Delta| = 0.5 for g = 5, Delta = +-50
    assert np.allclose(backward, [[-0.5, -0.5], [-0.5, -0.5]])
    assert np.allclose(forward, -backward)
    assert np.allclose(np.linalg.eigvalsh(backward), [-1.0, 0.0])


def test_effective_models_flip_sign_exactly():
    dimer = get_preset('fig6_dimer')
    assert sign_flip_defect(build_local_effective(dimer)) <= 1e-12
    assert sign_flip_defect(build_local_effective(get_preset('fig7_ring'), order=4)) <= 1e-12

    bus = solve_sign_condition(replace(dimer, g_site=[5.0, 5.0]), 'nonlocal')
    assert sign_flip_defect(build_nonlocal_effective(bus, include_zz=True)) <= 1e-12


def test_disordered_couplings_still_flip_sign():
    ring = get_preset('fig7_ring')
    spread = DisorderSpec('uniform', lo=4.0, hi=6.0, target='g_site', seed=7)
    disordered = disorder_couplings(ring, spread)
    assert len(set(disordered.g_site)) == 3
    H = build_local_effective(disordered, order=4, fourth_order='lattice')
    assert sign_flip_defect(H) <= 1e-12


def test_tabulated_fourth_order_needs_uniform_couplings():
    params = replace(get_preset('fig7_ring'), g_site=[4.0, 5.0, 6.0])
    with pytest.raises(OtoClockError):
        build_local_effective(params, order=4, fourth_order='tabulated')


def test_microscopic_model_is_not_an_exact_flip():
    H = build_local_microscopic(get_preset('fig6_dimer'))
    assert H.is_hermitian()
    assert sign_flip_defect(H) > 1.0


def test_nonlocal_effective_exchange_coefficient():
    params = replace(get_preset('fig6_dimer'), g_site=[5.0, 5.0])
    block = clock_block(build_nonlocal_effective(params), 0)
    space = block.space
    # |up, down> <-> |down, up> with g1 g2 / Delta_b
    assert block.dense()[space.index_of([0, 1]), space.index_of([1, 0])] == pytest.approx(0.5)


def test_sign_condition_solutions():
    params = get_preset('fig6_dimer')
    assert solve_sign_condition(params, 'nonlocal').eta == pytest.approx(100.0)
    assert solve_sign_condition(replace(params, chi=0.0), 'local').chi == pytest.approx(-50.0)
    jc = solve_sign_condition(replace(params, g_a=0.0), 'local_jc')
    assert jc.g_a == pytest.approx(200.0)
    assert jc.chi == pytest.approx(-50.0)


def test_sign_condition_failures():
    params = get_preset('fig6_dimer')
    with pytest.raises(NoRealSolutionError):
        solve_sign_condition(replace(params, omega_a=5000.0), 'local_jc')
    with pytest.raises(SingularDetuningError):
        solve_sign_condition(replace(params, epsilon=params.omega_b), 'local')
    with pytest.raises(ConfigError):
        solve_sign_condition(params, 'bus')


def test_heisenberg_chain_conserves_total_sz():
    L = 4
    H = build_disordered_heisenberg(L, [0.1, -0.2, 0.3, 0.0])
    total_sz = sum((local_operator(H.space, i, 'sigma_z') for i in range(1, L)),
                   local_operator(H.space, 0, 'sigma_z'))
    assert H.is_hermitian()
    assert H.commutator(total_sz).max_abs() < 1e-12
    with pytest.raises(ConfigError):
        build_disordered_heisenberg(1, [0.0])
    with pytest.raises(ConfigError):
        build_disordered_heisenberg(3, [0.0, 0.0])


def test_realization_streams_are_reproducible():
    a = realization_rng(1234, 5).normal(size=4)
    b = realization_rng(1234, 5).normal(size=4)
    c = realization_rng(1234, 6).normal(size=4)
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)


def test_sample_disorder_ranges():
    spec = DisorderSpec('uniform', lo=-0.5, hi=0.5, target='field_h', seed=3)
    values = sample_disorder(spec, 100)
    assert all(-0.5 <= v < 0.5 for v in values)
    with pytest.raises(ConfigError):
        DisorderSpec('uniform', lo=1.0, hi=0.0)


def test_presets():
    dimer = get_preset('fig6_dimer')
    dimer.g_site.append(1.0)
    assert PRESETS['fig6_dimer'].g_site == [5.0]
    assert get_preset('fig4_chain').operator_sites() == (1, 6)
    with pytest.raises(ConfigError):
        get_preset('fig9_lattice')


def test_nonlocal_microscopic_is_clock_block_diagonal():
    params = replace(get_preset('fig6_dimer'), g_site=[5.0, 5.0], eta=100.0)
    for frame in ('rotating', 'lab'):
        H = build_nonlocal_microscopic(params, frame=frame)
        assert H.dim == 4 * 2 * 2 * 2
        assert H.is_hermitian()
        assert clock_leakage(H) == 0.0


def test_complete_second_order_reduces_to_effective_model():
    params = get_preset('fig6_dimer')
    for n_a in (0, 1):
        full = clock_block(build_complete_second_order(params), n_a)
        table = full.space.occupation_table()
        down = np.flatnonzero(table[:, params.N] == 1)
        restricted = full.dense()[np.ix_(down, down)]
        effective = clock_block(build_local_effective(params), n_a).dense()
        # bare coupler energy with the qubit down
        offset = -(0.5 * params.delta_b + params.chi * n_a)
        assert np.allclose(restricted - effective, offset * np.eye(len(down)), atol=1e-12)


def test_effective_sector_spectra_are_mirror_images():
    bus = solve_sign_condition(replace(get_preset('fig6_dimer'), g_site=[5.0, 5.0]), 'nonlocal')
    models = [
        build_local_effective(get_preset('fig6_dimer')),
        build_local_effective(get_preset('fig7_ring'), order=4),
        build_nonlocal_effective(bus, include_zz=True),
    ]
    for H in models:
        backward = np.linalg.eigvalsh(clock_block(H, 0).dense())
        forward = np.linalg.eigvalsh(clock_block(H, 1).dense())
        assert np.allclose(forward, -backward[::-1], atol=1e-10)


def fourth_order_correction(params, n_a, fourth_order='tabulated'):
    full = build_local_effective(params, order=4, fourth_order=fourth_order)
    return (clock_block(full, n_a) - clock_block(build_local_effective(params), n_a)).dense()


def test_tabulated_fourth_order_coefficients():
    params = replace(get_preset('fig6_dimer'), N=4, n_max=2, g_site=[5.0] * 3)
    correction = fourth_order_correction(params, 0)
    system = clock_block(build_local_effective(params), 0).space
    u = 5.0 ** 4 / 50.0 ** 3

    def element(bra, ket):
        return correction[system.index_of(bra), system.index_of(ket)].real

    # on-site 2 b^dag b^dag b b + 8 n
    assert element([1, 0, 0, 0], [1, 0, 0, 0]) == pytest.approx(8 * u)
    assert element([2, 0, 0, 0], [2, 0, 0, 0]) == pytest.approx(20 * u)
    # bond density-density 6 n n
    assert element([1, 1, 0, 0], [1, 1, 0, 0]) == pytest.approx(22 * u)
    assert element([1, 0, 1, 0], [1, 0, 1, 0]) == pytest.approx(16 * u)
    # nearest-neighbour hopping 2, pair hopping 1 (matrix element 2), next-nearest hopping 1
    assert element([0, 1, 0, 0], [1, 0, 0, 0]) == pytest.approx(2 * u)
    assert element([0, 2, 0, 0], [2, 0, 0, 0]) == pytest.approx(2 * u)
    assert element([0, 0, 1, 0], [1, 0, 0, 0]) == pytest.approx(u)
    assert element([0, 0, 0, 1], [1, 0, 0, 0]) == pytest.approx(0.0)

    assert np.allclose(fourth_order_correction(params, 1), -correction)


@pytest.mark.parametrize('fourth_order', ['tabulated', 'lattice'])
def test_fourth_order_correction_scales_as_g4_over_detuning_cubed(fourth_order):
    ring = get_preset('fig7_ring')
    scaled = []
    for g in (1.25, 2.5, 5.0):
        correction = fourth_order_correction(replace(ring, g_site=[g] * 3), 0, fourth_order)
        scaled.append(np.abs(correction).max() / (g ** 4 / abs(ring.delta_b) ** 3))
    assert scaled[0] > 0
    assert np.allclose(scaled, scaled[0], rtol=1e-9)
