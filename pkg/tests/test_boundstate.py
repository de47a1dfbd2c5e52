import numpy as np
import pytest

from fractalbound.boundstate import (NoInGapStateError, boundary_profile,
                                     compute_bound_state, kernel_identity_check,
                                     resolvent_profile,
                                     sub_gaussian_envelope_check)
from fractalbound.graphs import (Family, FamilySpec, boundary_path, build_graph,
                                 chemical_distances, table_dimensions)
from fractalbound.operators import EmitterConfig, bath_operator, coupled_hamiltonian
from fractalbound.solvers import dense_spectrum


def _chain(n):
    return bath_operator(build_graph(FamilySpec(Family.CHAIN, side=n)))


def test_ground_energy_matches_dense():
    h = _chain(120)
    em = EmitterConfig(site=0, omega_e=-0.05, coupling_g=1e-3)
    state = compute_bound_state(h, em)
    w, _ = dense_spectrum(coupled_hamiltonian(h, em))
    assert state.energy == pytest.approx(w[0], abs=1e-12)
    assert state.delta == pytest.approx(-w[0], abs=1e-12)


def test_state_is_normalized_and_sign_fixed():
    h = _chain(80)
    em = EmitterConfig(site=10, omega_e=-0.02, coupling_g=1e-3)
    for refine in (False, True):
        state = compute_bound_state(h, em, refine_amplitudes=refine)
        assert state.norm == pytest.approx(1.0, abs=1e-10)
        assert state.c_e > 0


def test_refined_amplitudes_match_eigenvector_bulk():
    h = _chain(150)
    em = EmitterConfig(site=0, omega_e=-0.05, coupling_g=1e-3)
    raw = compute_bound_state(h, em, refine_amplitudes=False)
    fine = compute_bound_state(h, em, refine_amplitudes=True)
    # agreement where the eigenvector amplitudes are well above the ARPACK floor
    big = np.abs(fine.psi) > 1e-8
    assert np.abs(raw.psi[big] - fine.psi[big]).max() < 1e-8


def test_chain_tail_is_exact_exponential():
    # 1D closed form: |psi(r)| ~ exp(-r/xi), xi = 1/arccosh(1 + delta/2)
    h = _chain(400)
    em = EmitterConfig(site=0, omega_e=-0.5, coupling_g=1e-3)
    state = compute_bound_state(h, em)
    xi = 1.0 / np.arccosh(1.0 + state.delta / 2.0)
    r = np.arange(280)
    logratio = np.log(np.abs(state.psi[r]) / np.abs(state.psi[0]))
    assert np.abs(state.psi[279] / state.psi[0]) < 1e-80
    assert np.abs(logratio + r / xi).max() < 1e-6


def test_no_in_gap_state_raises():
    h = _chain(40)
    with pytest.raises(NoInGapStateError):
        compute_bound_state(h, EmitterConfig(site=0, omega_e=0.5, coupling_g=1e-3))


def test_boundary_profile_requires_anchor():
    g = build_graph(FamilySpec(Family.GASKET_B2, generation=3))
    h = bath_operator(g)
    path = boundary_path(g, int(g.boundary[0][0]))
    em = EmitterConfig(site=int(path[1]), omega_e=-0.05, coupling_g=1e-3)
    state = compute_bound_state(h, em)
    with pytest.raises(ValueError):
        boundary_profile(state, path)


def test_diagonalization_and_resolvent_routes_agree():
    g = build_graph(FamilySpec(Family.GASKET_B2, generation=4))
    h = bath_operator(g)
    anchor = int(g.boundary[0][0])
    path = boundary_path(g, anchor)
    delta, g_c = 0.02, 1e-3
    em = EmitterConfig(site=anchor, omega_e=-delta, coupling_g=g_c)
    state = compute_bound_state(h, em)
    p_diag = boundary_profile(state, path)
    p_res = resolvent_profile(h, delta, anchor, path)
    dev = np.abs(p_diag.amp / p_diag.amp[0] / p_res.amp - 1.0).max()
    assert dev <= 1e3 * (g_c / delta) ** 2


def test_perturbative_detuning_shift():
    # weak coupling: |delta_measured - delta_target| <= 10 g^2 / delta_target
    h = _chain(300)
    for delta_t in (1e-3, 1e-2, 1e-1):
        g_c = min(0.1 * delta_t, 1e-3)
        em = EmitterConfig(site=0, omega_e=-delta_t, coupling_g=g_c)
        state = compute_bound_state(h, em)
        assert abs(state.delta - delta_t) <= 10 * g_c ** 2 / delta_t


def test_kernel_identity_small_graphs():
    for spec in (FamilySpec(Family.GASKET_B2, generation=3),
                 FamilySpec(Family.CHAIN, side=200)):
        g = build_graph(spec)
        h = bath_operator(g)
        d = chemical_distances(g, 0).dist
        sample = [int(np.argmax(d == k)) for k in (0, 1, 2, 4, 6)]
        for delta in (0.05, 0.5):
            assert kernel_identity_check(h, delta, 0, sample) <= 1e-6


def test_sub_gaussian_envelope_holds():
    spec = FamilySpec(Family.GASKET_B2, generation=5)
    g = build_graph(spec)
    h = bath_operator(g)
    dd = chemical_distances(g, 0).dist
    targets = [2, 3, 4, 6, 8, 10, 13, 16, 20]
    sites = np.array([int(np.argmax(dd == k)) for k in targets])
    fit = sub_gaussian_envelope_check(h, np.array(targets), sites,
                                      np.geomspace(3, 120, 12),
                                      table_dimensions(spec))
    assert fit.violations == 0
    assert fit.big_c_lower > 0 and fit.big_c_upper > 0
    assert fit.c_upper >= fit.c_lower
