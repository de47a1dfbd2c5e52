"""Bath and coupled single-excitation Hamiltonians as sparse symmetric matrices.

The bath is either the bare hopping matrix -J*A or its Laplacian-compensated
form J*(D - A), which adds the degree-proportional on-site energies that make
the lower spectral edge sit exactly at zero.  The coupled Hamiltonian appends
one emitter row/column to the bath block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graphs import Graph


@dataclass(frozen=True)
class EmitterConfig:
    """Two-level emitter attached to bath site ``site``.

    ``omega_e`` is the bare emitter frequency in units of J, written as
    omega_e = E_min - delta_target for a bound state a distance delta_target
    below the lower spectral edge.  ``coupling_g`` must stay well below the
    detuning for the weak-coupling contract to hold.
    """

    site: int
    omega_e: float
    coupling_g: float

    def __post_init__(self):
        if self.coupling_g <= 0:
            raise ValueError("coupling_g must be positive")


def default_coupling(delta_target: float, j_hop: float = 1.0) -> float:
    """Weak-coupling default: g = min(0.1*delta, 1e-3*J)."""
    return min(0.1 * delta_target, 1e-3 * j_hop)


def bath_operator(graph: Graph, j_hop: float = 1.0, laplacianize: bool = True) -> sp.csr_matrix:
    """Assemble -J*A, or J*(D - A) when ``laplacianize`` is set."""
    if j_hop <= 0:
        raise ValueError("hopping rate must be positive")
    n = graph.n_sites
    rows, cols = [], []
    for i, nbrs in enumerate(graph.adjacency):
        rows.extend([i] * len(nbrs))
        cols.extend(nbrs)
    a = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    h = -j_hop * a
    if laplacianize:
        h = h + sp.diags(j_hop * graph.degree.astype(float), format="csr")
    # make sure every diagonal entry is stored, even when zero
    h = (h + sp.diags(np.zeros(n))).tocsr()
    return h


def coupled_hamiltonian(bath: sp.spmatrix, emitter: EmitterConfig) -> sp.csr_matrix:
    """(N+1)x(N+1) single-excitation Hamiltonian; emitter is the last index."""
    n = bath.shape[0]
    if not 0 <= emitter.site < n:
        raise ValueError(f"emitter site {emitter.site} out of range for dim {n}")
    coupling = sp.csr_matrix(
        ([emitter.coupling_g], ([emitter.site], [0])), shape=(n, 1))
    return sp.bmat(
        [[bath, coupling], [coupling.T, sp.csr_matrix([[emitter.omega_e]])]],
        format="csr")


def export_matrix(op: sp.spmatrix, path):
    """Coordinate-format text dump: dim header, then upper-triangle triplets."""
    coo = sp.triu(op).tocoo()
    with open(path, "w") as f:
        f.write(f"{op.shape[0]}\n")
        for i, j, v in zip(coo.row, coo.col, coo.data):
            f.write(f"{i} {j} {float(v)!r}\n")
