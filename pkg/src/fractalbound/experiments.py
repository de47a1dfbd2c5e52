"""Experiment orchestration: detuning sweeps, emitter averaging, verification.

Independent (delta, emitter) tasks are distributed over a process pool when
``workers > 1``; results are merged in deterministic key order, so reports
are byte-identical regardless of worker count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import boundstate as bst
from . import graphs, operators, scaling
from .config import ExperimentConfig
from .graphs import Family, FamilySpec
from .solvers import SolverError, dense_spectrum, heat_kernel_column, lowest_eigenpair

log = logging.getLogger(__name__)


def _chunks(items, n):
    n = max(1, min(n, len(items)))
    size = (len(items) + n - 1) // n
    return [items[i:i + size] for i in range(0, len(items), size)]


# -- far field --------------------------------------------------------------

@dataclass
class FarfieldRow:
    delta_target: float
    delta_measured: float
    coupling_g: float
    xi: float
    plateau: tuple[float, float]
    truncated: bool
    profile: bst.Profile


@dataclass
class FarfieldReport:
    config: ExperimentConfig
    rows: list[FarfieldRow]
    failures: list[tuple[float, str]]
    d_w_fit: float | None
    d_w_stderr: float | None
    d_w_theory: float | None


def _farfield_chunk(args):
    cfg, deltas = args
    graph = graphs.build_graph(cfg.lattice)
    bath = operators.bath_operator(graph, cfg.physics.j_hop)
    anchor = int(graph.boundary[cfg.farfield.anchor][0])
    path = graphs.boundary_path(graph, anchor)
    rows, failures = [], []
    for delta in deltas:
        try:
            g_c = cfg.physics.coupling(delta)
            em = operators.EmitterConfig(site=anchor, omega_e=-delta * cfg.physics.j_hop,
                                         coupling_g=g_c)
            state = bst.compute_bound_state(bath, em, tol=cfg.solver.tol_eig)
            prof = bst.boundary_profile(state, path)
            sweep = scaling.window_sweep(prof, r_min=cfg.farfield.r_min,
                                         step=cfg.farfield.step,
                                         variance_width=cfg.farfield.variance_width)
            rows.append(FarfieldRow(delta_target=float(delta),
                                    delta_measured=state.delta, coupling_g=g_c,
                                    xi=sweep.xi_mean, plateau=sweep.plateau,
                                    truncated=sweep.truncated, profile=prof))
        except (SolverError, scaling.FitError, bst.NoInGapStateError) as exc:
            log.warning("far-field point delta=%g failed: %s", delta, exc)
            failures.append((float(delta), str(exc)))
    return rows, failures


def run_farfield(cfg: ExperimentConfig, workers: int = 1) -> FarfieldReport:
    deltas = cfg.physics.delta_grid()
    tasks = [(cfg, chunk) for chunk in _chunks(list(deltas), workers)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_farfield_chunk, tasks))
    else:
        parts = [_farfield_chunk(t) for t in tasks]
    rows = [r for part, _ in parts for r in part]
    failures = [f for _, part in parts for f in part]
    rows.sort(key=lambda r: r.delta_target)
    d_w = stderr = None
    if len(rows) >= 4:
        try:
            fit = scaling.fit_walk_dimension([(r.delta_measured, r.xi) for r in rows])
            d_w, stderr = fit.exponent, fit.stderr
        except scaling.FitError as exc:
            log.warning("walk-dimension fit failed: %s", exc)
    try:
        theory = graphs.table_dimensions(cfg.lattice).d_w
    except ValueError:
        theory = None
    return FarfieldReport(config=cfg, rows=rows, failures=failures,
                          d_w_fit=d_w, d_w_stderr=stderr, d_w_theory=theory)


# -- near field -------------------------------------------------------------

@dataclass
class NearfieldReport:
    config: ExperimentConfig
    curve: bst.Profile
    beta_fit: float
    beta_stderr: float
    beta_theory: float | None
    deviates: bool | None       # |fit - theory| > 2 sigma, where theory exists
    n_emitters: int
    delta_mismatch_max: float   # max |delta_measured - delta_target| over emitters


def select_emitters(bulk: np.ndarray, cap: int) -> np.ndarray:
    """Deterministic stratified subsample: evenly spaced ranks of the sorted
    bulk site ids."""
    if len(bulk) <= cap:
        return bulk
    idx = np.unique(np.linspace(0, len(bulk) - 1, cap).astype(int))
    return bulk[idx]


def _nearfield_chunk(args):
    cfg, sites = args
    graph = graphs.build_graph(cfg.lattice)
    bath = operators.bath_operator(graph, cfg.physics.j_hop)
    delta = cfg.nearfield.delta
    g_c = cfg.physics.coupling(delta)
    states = []
    for x0 in sites:
        em = operators.EmitterConfig(site=int(x0), omega_e=-delta * cfg.physics.j_hop,
                                     coupling_g=g_c)
        states.append(bst.compute_bound_state(bath, em, tol=cfg.solver.tol_eig,
                                              refine_amplitudes=False))
    return states


def run_nearfield(cfg: ExperimentConfig, workers: int = 1) -> NearfieldReport:
    graph = graphs.build_graph(cfg.lattice)
    nf = cfg.nearfield
    bulk = graphs.bulk_sites(graph, nf.r_bulk)
    if len(bulk) == 0:
        raise scaling.FitError(f"empty bulk at r_bulk={nf.r_bulk}")
    emitters = select_emitters(bulk, nf.emitter_cap)
    tasks = [(cfg, chunk) for chunk in _chunks(list(emitters), workers)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_nearfield_chunk, tasks))
    else:
        parts = [_nearfield_chunk(t) for t in tasks]
    states = [s for part in parts for s in part]
    try:
        dims = graphs.table_dimensions(cfg.lattice)
        d_w, beta_theory = dims.d_w, dims.beta
    except ValueError:
        d_w = beta_theory = None
    curve = scaling.near_field_curve(states, graph, nf.r_bulk,
                                     int(nf.r_window_max), d_w=d_w)
    fit = scaling.fit_beta(curve, window=(nf.r_window_min, nf.r_window_max))
    deviates = None
    if beta_theory is not None:
        deviates = abs(fit.exponent - beta_theory) > 2.0 * fit.stderr
    mismatch = max(abs(s.delta - nf.delta) for s in states)
    return NearfieldReport(config=cfg, curve=curve, beta_fit=fit.exponent,
                           beta_stderr=fit.stderr, beta_theory=beta_theory,
                           deviates=deviates, n_emitters=len(states),
                           delta_mismatch_max=mismatch)


# -- verification suite -----------------------------------------------------

@dataclass
class VerifyResult:
    name: str
    passed: bool
    detail: str


def run_verify(corrupt: bool = False) -> list[VerifyResult]:
    """Small-graph oracle suite; ``corrupt`` injects a broken operator entry
    (negative control for the reporting path)."""
    results = []

    def check(name, passed, detail):
        results.append(VerifyResult(name=name, passed=bool(passed), detail=detail))

    def maybe_corrupt(h):
        if corrupt:
            h = h.tolil()
            h[0, 0] += 0.37  # breaks the Laplacian kernel
            h = h.tocsr()
        return h

    # Laplacian edge: E_min = 0 with constant kernel vector
    for spec in (FamilySpec(Family.CHAIN, side=32),
                 FamilySpec(Family.GASKET_B2, generation=3),
                 FamilySpec(Family.GASKET_B3, generation=2),
                 FamilySpec(Family.VICSEK, generation=3),
                 FamilySpec(Family.PYRAMID_B2, generation=3),
                 FamilySpec(Family.CARPET, generation=2, m_side=3, n_removed=1)):
        g = graphs.build_graph(spec)
        h = maybe_corrupt(operators.bath_operator(g))
        pair = lowest_eigenpair(h, tol=1e-13)
        const_dev = float(np.ptp(pair.vector * np.sign(pair.vector[0])))
        ok = abs(pair.value) <= 1e-10 and const_dev <= 1e-6
        check(f"laplacian_edge[{spec.label()}]", ok,
              f"E_min={pair.value:.3e} kernel ptp={const_dev:.3e}")

    # two-site closed forms
    g2 = graphs.build_graph(FamilySpec(Family.CHAIN, side=2))
    h2 = maybe_corrupt(operators.bath_operator(g2))
    w2, _ = dense_spectrum(h2)
    ok = np.allclose(w2, [0.0, 2.0], atol=1e-12)
    check("two_site_spectrum", ok, f"eigenvalues {w2}")
    col = heat_kernel_column(h2, 0.7, 0).column
    exact = 0.5 * np.array([1 + np.exp(-1.4), 1 - np.exp(-1.4)])
    err = float(np.abs(col - exact).max())
    check("two_site_heat_kernel", err <= 1e-12, f"err={err:.3e}")

    # resolvent / heat-kernel Laplace identity
    for spec, n_label in ((FamilySpec(Family.GASKET_B2, generation=3), "gasket_b2 g=3"),
                          (FamilySpec(Family.CHAIN, side=200), "chain N=200")):
        g = graphs.build_graph(spec)
        h = maybe_corrupt(operators.bath_operator(g))
        d = graphs.chemical_distances(g, 0).dist
        sample = [int(np.argmax(d == k)) for k in (0, 1, 2, 4, 6) if (d == k).any()]
        worst = 0.0
        for delta in (0.05, 0.5):
            worst = max(worst, bst.kernel_identity_check(h, delta, 0, sample))
        check(f"kernel_identity[{n_label}]", worst <= 1e-6, f"max rel err={worst:.3e}")

    # diagonalization vs resolvent route
    spec = FamilySpec(Family.GASKET_B2, generation=4)
    g = graphs.build_graph(spec)
    h = maybe_corrupt(operators.bath_operator(g))
    delta, g_c = 0.02, operators.default_coupling(0.02)
    anchor = int(g.boundary[0][0])
    path = graphs.boundary_path(g, anchor)
    em = operators.EmitterConfig(site=anchor, omega_e=-delta, coupling_g=g_c)
    state = bst.compute_bound_state(h, em)
    p_diag = bst.boundary_profile(state, path)
    p_res = bst.resolvent_profile(h, delta, anchor, path)
    ratio_dev = float(np.abs(p_diag.amp / p_diag.amp[0] / p_res.amp - 1.0).max())
    bound = 1e3 * (g_c / delta) ** 2
    check("route_crosscheck[gasket_b2 g=4]", ratio_dev <= bound,
          f"ratio dev={ratio_dev:.3e} bound={bound:.3e}")

    # sub-Gaussian envelope
    spec = FamilySpec(Family.GASKET_B2, generation=5)
    g = graphs.build_graph(spec)
    h = maybe_corrupt(operators.bath_operator(g))
    dd = graphs.chemical_distances(g, 0).dist
    targets = [2, 3, 4, 6, 8, 10, 13, 16, 20]
    sites = np.array([int(np.argmax(dd == k)) for k in targets])
    fit = bst.sub_gaussian_envelope_check(h, np.array(targets), sites,
                                          np.geomspace(3, 120, 12),
                                          graphs.table_dimensions(spec))
    check("sub_gaussian_envelope[gasket_b2 g=5]", fit.violations == 0,
          f"violations={fit.violations}/{fit.n_samples}")
    return results
