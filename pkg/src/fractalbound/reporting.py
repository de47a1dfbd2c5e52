"""Report emitters: delimited data files, JSON summaries, and figures.

All writers are deterministic: no timestamps, sorted JSON keys, full-precision
``repr`` floats, and fixed figure metadata, so identical configurations
produce byte-identical output files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .experiments import FarfieldReport, NearfieldReport, VerifyResult  # noqa: E402

_PNG_META = {"Software": "fractalbound"}


def _f(x) -> str:
    return repr(float(x))


def _write_rows(path: Path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


# -- far field --------------------------------------------------------------

def write_farfield_csv(report: FarfieldReport, path) -> None:
    lat = report.config.lattice
    rows = [(lat.family.value, lat.generation, _f(r.delta_target),
             _f(r.delta_measured), _f(r.coupling_g), _f(r.xi),
             _f(r.plateau[0]), _f(r.plateau[1]), int(r.truncated))
            for r in report.rows]
    _write_rows(Path(path), ["family", "generation", "delta_target",
                             "delta_measured", "coupling_g", "xi",
                             "plateau_lo", "plateau_hi", "truncated"], rows)


def write_profiles_csv(report: FarfieldReport, path) -> None:
    lat = report.config.lattice
    rows = []
    for row in report.rows:
        p = row.profile
        rows.extend((lat.family.value, lat.generation, _f(row.delta_measured),
                     _f(row.coupling_g), p.meta.get("route", ""), _f(r), _f(a))
                    for r, a in zip(p.r, p.amp))
    _write_rows(Path(path), ["family", "generation", "delta_measured",
                             "coupling_g", "route", "r", "amp"], rows)


def farfield_summary(report: FarfieldReport) -> dict:
    lat = report.config.lattice
    return {
        "family": lat.family.value,
        "generation": lat.generation,
        "deltas": [r.delta_measured for r in report.rows],
        "xi": [r.xi for r in report.rows],
        "plateau_windows": [list(r.plateau) for r in report.rows],
        "truncated": [bool(r.truncated) for r in report.rows],
        "d_w_fit": report.d_w_fit,
        "d_w_stderr": report.d_w_stderr,
        "d_w_theory": report.d_w_theory,
        "failures": [{"delta": d, "error": msg} for d, msg in report.failures],
    }


def write_farfield_json(report: FarfieldReport, path) -> None:
    with open(path, "w") as f:
        json.dump(farfield_summary(report), f, indent=2, sort_keys=True)
        f.write("\n")


def farfield_figure(reports: list[FarfieldReport], path) -> None:
    """Collapse plot: xi * delta^(1/d_w) against delta, flat when the
    localization length follows the predicted scaling."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for rep in reports:
        d_w = rep.d_w_theory or rep.d_w_fit
        deltas = np.array([r.delta_measured for r in rep.rows])
        xis = np.array([r.xi for r in rep.rows])
        label = rep.config.lattice.label()
        if d_w:
            label += f"  $d_w$={d_w:.2f}"
        ax.loglog(deltas, xis * deltas ** (1.0 / d_w) if d_w else xis,
                  marker="o", ms=4, label=label)
    ax.set_xlabel(r"$\Delta / J$")
    ax.set_ylabel(r"$\xi\,\Delta^{1/d_w}$")
    ax.legend(fontsize=7, frameon=False)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=160, metadata=_PNG_META)
    plt.close(fig)


# -- near field -------------------------------------------------------------

def write_nearfield_csv(report: NearfieldReport, path) -> None:
    lat = report.config.lattice
    counts = report.curve.meta.get("pair_counts", [0] * len(report.curve.r))
    rows = [(lat.family.value, lat.generation, _f(r), _f(a), int(c))
            for r, a, c in zip(report.curve.r, report.curve.amp, counts)]
    _write_rows(Path(path), ["family", "generation", "r", "dpsi", "pairs"], rows)


def nearfield_summary(report: NearfieldReport) -> dict:
    lat = report.config.lattice
    return {
        "family": lat.family.value,
        "generation": lat.generation,
        "delta": report.config.nearfield.delta,
        "r_bulk": report.config.nearfield.r_bulk,
        "n_emitters": report.n_emitters,
        "curve": [[float(r), float(a)]
                  for r, a in zip(report.curve.r, report.curve.amp)],
        "beta_fit": report.beta_fit,
        "beta_stderr": report.beta_stderr,
        "beta_theory": report.beta_theory,
        "deviates": None if report.deviates is None else bool(report.deviates),
        "delta_mismatch_max": report.delta_mismatch_max,
    }


def write_nearfield_json(report: NearfieldReport, path) -> None:
    with open(path, "w") as f:
        json.dump(nearfield_summary(report), f, indent=2, sort_keys=True)
        f.write("\n")


def nearfield_figure(reports: list[NearfieldReport], path) -> None:
    """Shell-averaged |psi(x0) - psi(x)| curves with their power-law fits."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    for rep in reports:
        r, a = np.asarray(rep.curve.r), np.asarray(rep.curve.amp)
        line, = ax.loglog(r, a, marker="o", ms=4, ls="none",
                          label=(f"{rep.config.lattice.label()}  "
                                 f"$\\beta$={rep.beta_fit:.2f}"))
        rr = np.geomspace(r.min(), r.max(), 50)
        ax.loglog(rr, (rr / r[0]) ** rep.beta_fit * a[0],
                  color=line.get_color(), lw=1, alpha=0.6)
    ax.set_xlabel(r"$r$")
    ax.set_ylabel(r"$\langle|\delta\psi|\rangle$ (normalized)")
    ax.legend(fontsize=7, frameon=False)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=160, metadata=_PNG_META)
    plt.close(fig)


# -- verify -----------------------------------------------------------------

def format_verify(results: list[VerifyResult]) -> str:
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}"
             for r in results]
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    return "\n".join(lines)
