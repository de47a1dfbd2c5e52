"""Exponent-extraction pipelines.

Far field: log|psi(r)|^2 is regressed on {1, log r, r}; the window is chosen
by sweeping the upper edge and locking onto the plateau where the algebraic
exponent has minimum rolling variance.  The localization lengths from a
detuning sweep then give the walk dimension via log xi ~ -(1/d_w) log delta.

Near field: shell-averaged amplitude differences |psi(x0) - psi(x)| over
bulk emitter/site pairs, fitted as a power law r^beta on a fixed window.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .boundstate import BoundState, Profile, ProfileKind
from .graphs import Graph, _bfs, bulk_sites

log = logging.getLogger(__name__)

AMP_UNDERFLOW_GUARD = 1e-300


class FitError(ValueError):
    pass


@dataclass
class FitWindowResult:
    window: tuple[float, float]
    log_c: float
    d_exp: float        # algebraic exponent of the r^-(d-1) prefactor
    xi: float
    rss: float


@dataclass
class ScalingFit:
    exponent: float
    stderr: float
    points: np.ndarray  # (x, y) pairs entering the regression
    window: tuple[float, float]


def _ols(x_cols: np.ndarray, y: np.ndarray):
    """Least squares with parameter covariance: returns (coeffs, cov, rss)."""
    coeffs, _, _, _ = np.linalg.lstsq(x_cols, y, rcond=None)
    resid = y - x_cols @ coeffs
    rss = float(resid @ resid)
    dof = max(len(y) - x_cols.shape[1], 1)
    cov = rss / dof * np.linalg.pinv(x_cols.T @ x_cols)
    return coeffs, cov, rss


def fit_far_field_window(profile: Profile, window) -> FitWindowResult:
    """OLS of log amp^2 on {1, log r, r} over the given [r_lo, r_hi] window."""
    r_lo, r_hi = window
    r = np.asarray(profile.r, dtype=float)
    amp = np.asarray(profile.amp, dtype=float)
    mask = (r >= r_lo) & (r <= r_hi) & (r > 0)
    # underflow guard: truncate the window before the flooring tail
    under = mask & (amp < AMP_UNDERFLOW_GUARD)
    if under.any():
        mask &= r < r[under].min()
    r, amp = r[mask], amp[mask]
    if len(r) < 4:
        raise FitError(f"window {window} has {len(r)} usable points, need >= 4")
    if (amp <= 0).any():
        raise FitError("non-positive amplitudes in fit window")
    y = 2.0 * np.log(amp)
    x_cols = np.column_stack([np.ones_like(r), np.log(r), r])
    coeffs, _cov, rss = _ols(x_cols, y)
    log_c, slope_logr, slope_r = coeffs
    if slope_r >= 0:
        raise FitError(f"profile does not decay on window {window}")
    return FitWindowResult(window=(float(r[0]), float(r[-1])), log_c=float(log_c),
                           d_exp=float(1.0 - slope_logr), xi=float(2.0 / -slope_r),
                           rss=rss)


@dataclass
class WindowSweep:
    xi_mean: float
    plateau: tuple[float, float]          # [r_lo, r_max] span of the plateau
    fits: list[FitWindowResult]
    variances: np.ndarray
    plateau_index: int
    truncated: bool


def window_sweep(profile: Profile, r_min: float = 5.0, step: float = 5.0,
                 variance_width: int = 5) -> WindowSweep:
    """Sweep the upper window edge and lock onto the minimum-variance plateau.

    The plateau is the block of ``variance_width`` consecutive windows whose
    fitted algebraic exponents have minimal variance (ties resolved toward
    the smallest r_max); xi is the mean over that block.  ``truncated`` flags
    profiles whose tail (amplitude floor, finite size) was excluded.
    """
    r_end = float(np.max(profile.r))
    fits = []
    r_max = r_min + step
    while r_max <= r_end + 1e-9:
        try:
            fits.append(fit_far_field_window(profile, (r_min, r_max)))
        except FitError:
            pass
        r_max += step
    w = variance_width
    if len(fits) < w:
        raise FitError(
            f"profile too short for a convergence sweep ({len(fits)} usable windows)")
    d_exps = np.array([f.d_exp for f in fits])
    variances = np.array([d_exps[j:j + w].var() for j in range(len(fits) - w + 1)])
    j_min = int(np.argmin(variances))  # argmin takes the first = smallest r_max
    block = fits[j_min:j_min + w]
    xi_mean = float(np.mean([f.xi for f in block]))
    v_star = variances[j_min]
    truncated = (j_min + w - 1 < len(fits) - 1
                 and variances[-1] > 100.0 * v_star + 1e-18)
    return WindowSweep(xi_mean=xi_mean,
                       plateau=(block[0].window[0], block[-1].window[1]),
                       fits=fits, variances=variances, plateau_index=j_min,
                       truncated=truncated)


def fit_walk_dimension(points) -> ScalingFit:
    """d_w from a (delta, xi) sweep: OLS of log xi on log delta, d_w = -1/slope."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 4:
        raise FitError("need at least 4 detunings")
    deltas, xis = pts[:, 0], pts[:, 1]
    if deltas.max() / deltas.min() < 10.0 - 1e-9:
        raise FitError("detunings must span at least one decade")
    x, y = np.log(deltas), np.log(xis)
    coeffs, cov, _ = _ols(np.column_stack([np.ones_like(x), x]), y)
    slope, sigma_slope = coeffs[1], np.sqrt(cov[1, 1])
    if slope >= 0:
        raise FitError("xi does not grow with decreasing delta")
    d_w = -1.0 / slope
    return ScalingFit(exponent=float(d_w), stderr=float(sigma_slope * d_w ** 2),
                      points=np.column_stack([x, y]),
                      window=(float(deltas.min()), float(deltas.max())))


def near_field_curve(states: list[BoundState], graph: Graph, r_bulk: int,
                     r_max: int, d_w: float | None = None) -> Profile:
    """Averaged amplitude difference <|psi(x0) - psi(x)|> at chemical distance
    r, over all bulk emitter/site pairs, normalized to its first shell.

    Emitters and evaluation sites are both restricted to the bulk set;
    distances r with no admissible pairs are dropped (recorded in meta).
    """
    bulk = bulk_sites(graph, r_bulk)
    if len(bulk) == 0:
        raise FitError(f"empty bulk at r_bulk={r_bulk}")
    bulk_mask = np.zeros(graph.n_sites, dtype=bool)
    bulk_mask[bulk] = True
    sums = np.zeros(r_max + 1)
    counts = np.zeros(r_max + 1, dtype=np.int64)
    for state in sorted(states, key=lambda s: s.emitter.site):
        x0 = state.emitter.site
        if not bulk_mask[x0]:
            raise FitError(f"emitter site {x0} is not in the bulk")
        if d_w is not None and r_max ** d_w * state.delta > 1.0:
            log.warning("near-field condition r^d_w * delta = %.3g > 1 at r=%d",
                        r_max ** d_w * state.delta, r_max)
        dist = _bfs(graph.adjacency, [x0])
        sel = bulk_mask & (dist >= 1) & (dist <= r_max)
        diffs = np.abs(state.psi[x0] - state.psi[sel])
        np.add.at(sums, dist[sel], diffs)
        np.add.at(counts, dist[sel], 1)
    present = np.flatnonzero(counts[1:]) + 1
    dropped = sorted(set(range(1, r_max + 1)) - set(present.tolist()))
    if dropped:
        log.info("near-field shells without pairs dropped: %s", dropped)
    curve = sums[present] / counts[present]
    return Profile(r=present.astype(float), amp=curve / curve[0],
                   kind=ProfileKind.BULK_SHELL_AVERAGE,
                   meta={"dropped": dropped, "n_emitters": len(states),
                         "r_bulk": r_bulk, "raw_first": float(curve[0]),
                         "pair_counts": counts[present].tolist()})


def fit_beta(curve: Profile, window=(1.0, 10.0)) -> ScalingFit:
    """Near-field exponent: OLS of log(delta psi) on log r over the window."""
    r = np.asarray(curve.r, dtype=float)
    amp = np.asarray(curve.amp, dtype=float)
    mask = (r >= window[0]) & (r <= window[1])
    r, amp = r[mask], amp[mask]
    if len(r) < 3:
        raise FitError("need at least 3 shells in the beta window")
    if (amp <= 0).any():
        raise FitError("non-positive averaged differences in the beta window")
    x, y = np.log(r), np.log(amp)
    coeffs, cov, _ = _ols(np.column_stack([np.ones_like(x), x]), y)
    return ScalingFit(exponent=float(coeffs[1]), stderr=float(np.sqrt(cov[1, 1])),
                      points=np.column_stack([x, y]), window=tuple(window))


# -- saddle-point analytics -------------------------------------------------

def saddle_point(delta: float, d: float, c: float, d_w: float):
    """Saddle point of S(tau) = delta*tau + c*(d^d_w / tau)^(1/(d_w-1)).

    Returns (tau_star, s_star, xi_c) with xi_c normalized so that
    s_star = d / xi_c exactly (the decay rate read off exp(-S*)).
    """
    if delta <= 0 or d <= 0 or c <= 0 or d_w <= 1:
        raise ValueError("need delta > 0, d > 0, c > 0, d_w > 1")
    base = (c / (d_w - 1.0)) ** ((d_w - 1.0) / d_w)
    tau_star = base * d * delta ** (-(d_w - 1.0) / d_w)
    s_star = d_w * base * d * delta ** (1.0 / d_w)
    xi_c = delta ** (-1.0 / d_w) / (d_w * base)
    return tau_star, s_star, xi_c


def saddle_action(tau, delta: float, d: float, c: float, d_w: float):
    """The action S(tau) itself, for stationarity checks."""
    tau = np.asarray(tau, dtype=float)
    return delta * tau + c * (d ** d_w / tau) ** (1.0 / (d_w - 1.0))
