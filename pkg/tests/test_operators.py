import numpy as np
import pytest
import scipy.sparse as sp

from fractalbound.graphs import Family, FamilySpec, build_graph
from fractalbound.operators import (EmitterConfig, bath_operator,
                                    coupled_hamiltonian, default_coupling,
                                    export_matrix)
from fractalbound.solvers import dense_spectrum

SPECS = [
    FamilySpec(Family.CHAIN, side=30),
    FamilySpec(Family.GASKET_B2, generation=3),
    FamilySpec(Family.VICSEK, generation=2),
    FamilySpec(Family.PYRAMID_B2, generation=2),
    FamilySpec(Family.CARPET, generation=2, m_side=3, n_removed=1),
]


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.label())
def test_laplacian_rows_sum_to_zero(spec):
    h = bath_operator(build_graph(spec))
    assert np.abs(h.sum(axis=1)).max() < 1e-14
    assert (h != h.T).nnz == 0


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.label())
def test_laplacian_edge_at_zero(spec):
    w, v = dense_spectrum(bath_operator(build_graph(spec)))
    assert abs(w[0]) < 1e-10
    kernel = v[:, 0] * np.sign(v[:, 0][0])
    assert np.ptp(kernel) < 1e-8  # constant vector spans the kernel


def test_bare_operator_is_shifted_by_degrees():
    g = build_graph(FamilySpec(Family.GASKET_B2, generation=3))
    bare = bath_operator(g, laplacianize=False)
    lap = bath_operator(g)
    diff = (lap - bare) - sp.diags(g.degree.astype(float))
    assert abs(diff).max() < 1e-14


def test_hopping_scale():
    g = build_graph(FamilySpec(Family.CHAIN, side=10))
    h1, h3 = bath_operator(g, 1.0), bath_operator(g, 3.0)
    assert abs(h3 - 3.0 * h1).max() < 1e-14
    with pytest.raises(ValueError):
        bath_operator(g, 0.0)


def test_default_coupling_rule():
    assert default_coupling(1e-4) == pytest.approx(1e-5)
    assert default_coupling(0.5) == pytest.approx(1e-3)
    assert default_coupling(0.5, j_hop=2.0) == pytest.approx(2e-3)


def test_coupled_hamiltonian_layout():
    g = build_graph(FamilySpec(Family.CHAIN, side=8))
    h = bath_operator(g)
    em = EmitterConfig(site=3, omega_e=-0.1, coupling_g=1e-3)
    hc = coupled_hamiltonian(h, em)
    assert hc.shape == (9, 9)
    assert hc[8, 8] == em.omega_e
    assert hc[3, 8] == hc[8, 3] == em.coupling_g
    assert (hc != hc.T).nnz == 0
    assert abs(hc[:8, :8] - h).max() == 0


def test_emitter_validation():
    with pytest.raises(ValueError):
        EmitterConfig(site=0, omega_e=-0.1, coupling_g=0.0)
    g = build_graph(FamilySpec(Family.CHAIN, side=4))
    with pytest.raises(ValueError):
        coupled_hamiltonian(bath_operator(g),
                            EmitterConfig(site=9, omega_e=-0.1, coupling_g=1e-3))


def test_export_matrix_roundtrip(tmp_path):
    g = build_graph(FamilySpec(Family.GASKET_B2, generation=2))
    h = bath_operator(g)
    path = tmp_path / "h.txt"
    export_matrix(h, path)
    lines = path.read_text().splitlines()
    n = int(lines[0])
    assert n == g.n_sites
    rebuilt = np.zeros((n, n))
    for line in lines[1:]:
        i, j, v = line.split()
        rebuilt[int(i), int(j)] = rebuilt[int(j), int(i)] = float(v)
    assert np.abs(rebuilt - h.toarray()).max() == 0
