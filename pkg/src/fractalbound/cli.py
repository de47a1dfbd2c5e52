"""Command-line interface.

Subcommands: ``generate`` (lattice export), ``farfield`` / ``nearfield``
(exponent sweeps from a config file), ``verify`` (self-check oracle suite),
and ``reproduce-fig2`` / ``reproduce-fig4`` (multi-family benchmark runs at
a chosen scale).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import experiments, graphs, reporting
from .config import (ConfigError, ExperimentConfig, NearfieldConfig,
                     PhysicsConfig, load_config)
from .graphs import Family, FamilySpec

log = logging.getLogger(__name__)

# Benchmark suites for the reproduce commands.  "desk" finishes in minutes on
# a laptop; "paper" uses the deeper generations behind the quoted exponents.
_FIG2_SUITES = {
    "desk": [
        (FamilySpec(Family.CHAIN, side=1500), {}),
        (FamilySpec(Family.SQUARE, side=61), {}),
        (FamilySpec(Family.GASKET_B2, generation=6), {}),
        (FamilySpec(Family.VICSEK, generation=4), {}),
    ],
    "paper": [
        (FamilySpec(Family.CHAIN, side=4000), {}),
        (FamilySpec(Family.SQUARE, side=101), {}),
        (FamilySpec(Family.GASKET_B2, generation=6), {}),
        (FamilySpec(Family.GASKET_B3, generation=4), {}),
        (FamilySpec(Family.VICSEK, generation=5), {}),
        (FamilySpec(Family.PYRAMID_B2, generation=6), {}),
        (FamilySpec(Family.CARPET, generation=4, m_side=3, n_removed=1), {}),
        (FamilySpec(Family.CARPET, generation=4, m_side=4, n_removed=4), {}),
    ],
}

_FIG4_SUITES = {
    "desk": [
        (FamilySpec(Family.GASKET_B2, generation=6), {"r_bulk": 8}),
        (FamilySpec(Family.VICSEK, generation=4), {"r_bulk": 8}),
    ],
    "paper": [
        (FamilySpec(Family.GASKET_B2, generation=6), {"r_bulk": 8}),
        (FamilySpec(Family.GASKET_B3, generation=4), {"r_bulk": 8}),
        (FamilySpec(Family.VICSEK, generation=5), {"r_bulk": 8}),
        (FamilySpec(Family.PYRAMID_B2, generation=5), {"r_bulk": 4}),
        (FamilySpec(Family.CARPET, generation=4, m_side=3, n_removed=1),
         {"r_bulk": 8}),
        (FamilySpec(Family.CARPET, generation=4, m_side=4, n_removed=4),
         {"r_bulk": 8}),
    ],
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fractalbound",
        description="Atom-photon bound states on self-similar photonic lattices")
    parser.add_argument("--config", type=Path, help="INI experiment config")
    parser.add_argument("--workers", type=int, default=1,
                        help="process-pool size for independent sweep points")
    parser.add_argument("--out", type=Path,
                        help="output directory (overrides the config)")
    parser.add_argument("--scale", choices=("desk", "paper"), default="desk",
                        help="benchmark size for the reproduce commands")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", help="build a lattice and export edges/coordinates")
    sub.add_parser("farfield", help="detuning sweep: localization length and d_w")
    sub.add_parser("nearfield", help="bulk-averaged near-field exponent beta")
    p_verify = sub.add_parser("verify", help="run the small-graph oracle suite")
    p_verify.add_argument("--inject-corruption", action="store_true",
                          help="negative control: corrupt an operator entry "
                               "and require the suite to fail")
    sub.add_parser("reproduce-fig2",
                   help="far-field scaling collapse across lattice families")
    sub.add_parser("reproduce-fig4",
                   help="near-field exponent curves across lattice families")
    return parser


def _require_config(args) -> ExperimentConfig:
    if args.config is None:
        raise ConfigError(f"'{args.command}' needs --config <path>")
    return load_config(args.config)


def _out_dir(args, cfg: ExperimentConfig | None = None) -> Path:
    out = args.out or Path(cfg.output.directory if cfg else "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_generate(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    graph = graphs.build_graph(cfg.lattice)
    stem = cfg.lattice.label()
    graphs.export_edge_list(graph, out / f"{stem}_edges.txt",
                            out / f"{stem}_coords.txt")
    summary = {"family": cfg.lattice.family.value,
               "generation": cfg.lattice.generation,
               "n_sites": graph.n_sites,
               "n_edges": int(graph.degree.sum()) // 2,
               "expected_sites": graphs.expected_sites(cfg.lattice),
               "boundary_paths": [len(p) for p in graph.boundary]}
    try:
        summary["dimensions"] = dataclasses.asdict(
            graphs.table_dimensions(cfg.lattice))
    except ValueError:
        pass
    with open(out / f"{stem}_summary.json", "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"{stem}: {graph.n_sites} sites -> {out}")
    return 0


def _cmd_farfield(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    report = experiments.run_farfield(cfg, workers=args.workers)
    if not report.rows:
        print("farfield: every detuning failed", file=sys.stderr)
        return 1
    stem = cfg.lattice.label()
    _emit_farfield(report, out, stem, cfg.output)
    if report.d_w_fit is not None:
        print(f"{stem}: d_w = {report.d_w_fit:.3f} +/- {report.d_w_stderr:.3f}"
              + (f" (benchmark {report.d_w_theory})" if report.d_w_theory else ""))
    return 0


def _emit_farfield(report, out: Path, stem: str, output_cfg) -> None:
    if "csv" in output_cfg.formats:
        reporting.write_farfield_csv(report, out / f"{stem}_farfield.csv")
        reporting.write_profiles_csv(report, out / f"{stem}_profiles.csv")
    if "json" in output_cfg.formats:
        reporting.write_farfield_json(report, out / f"{stem}_farfield.json")
    if output_cfg.figures:
        reporting.farfield_figure([report], out / f"{stem}_farfield.png")


def _cmd_nearfield(args) -> int:
    cfg = _require_config(args)
    out = _out_dir(args, cfg)
    report = experiments.run_nearfield(cfg, workers=args.workers)
    stem = cfg.lattice.label()
    _emit_nearfield(report, out, stem, cfg.output)
    line = f"{stem}: beta = {report.beta_fit:.3f} +/- {report.beta_stderr:.3f}"
    if report.beta_theory is not None:
        line += f" (benchmark {report.beta_theory})"
    print(line)
    return 0


def _emit_nearfield(report, out: Path, stem: str, output_cfg) -> None:
    if "csv" in output_cfg.formats:
        reporting.write_nearfield_csv(report, out / f"{stem}_nearfield.csv")
    if "json" in output_cfg.formats:
        reporting.write_nearfield_json(report, out / f"{stem}_nearfield.json")
    if output_cfg.figures:
        reporting.nearfield_figure([report], out / f"{stem}_nearfield.png")


def _cmd_verify(args) -> int:
    results = experiments.run_verify(corrupt=args.inject_corruption)
    print(reporting.format_verify(results))
    all_passed = all(r.passed for r in results)
    if args.inject_corruption:
        # negative control: the suite must notice the corruption
        print("corruption " + ("DETECTED" if not all_passed else "MISSED"))
        return 0 if not all_passed else 1
    return 0 if all_passed else 1


def _suite_config(spec: FamilySpec, overrides: dict) -> ExperimentConfig:
    cfg = ExperimentConfig(lattice=spec)
    for key, value in overrides.items():
        setattr(cfg.nearfield, key, value)
    return cfg


def _cmd_reproduce_fig2(args) -> int:
    out = _out_dir(args)
    reports = []
    for spec, overrides in _FIG2_SUITES[args.scale]:
        cfg = _suite_config(spec, overrides)
        if spec.family is Family.CHAIN:
            # include the decade endpoints exactly
            cfg.physics = dataclasses.replace(cfg.physics, delta_count=9)
        report = experiments.run_farfield(cfg, workers=args.workers)
        if not report.rows:
            print(f"{spec.label()}: every detuning failed", file=sys.stderr)
            continue
        _emit_farfield(report, out, spec.label(), cfg.output)
        reports.append(report)
        d_w = report.d_w_fit
        print(f"{spec.label()}: d_w = {d_w:.3f} +/- {report.d_w_stderr:.3f}"
              + (f" (benchmark {report.d_w_theory})" if report.d_w_theory else ""))
    if not reports:
        return 1
    reporting.farfield_figure(reports, out / "fig2_farfield_collapse.png")
    print(f"wrote {out / 'fig2_farfield_collapse.png'}")
    return 0


def _cmd_reproduce_fig4(args) -> int:
    out = _out_dir(args)
    reports = []
    for spec, overrides in _FIG4_SUITES[args.scale]:
        cfg = _suite_config(spec, overrides)
        report = experiments.run_nearfield(cfg, workers=args.workers)
        _emit_nearfield(report, out, spec.label(), cfg.output)
        reports.append(report)
        line = (f"{spec.label()}: beta = {report.beta_fit:.3f} "
                f"+/- {report.beta_stderr:.3f}")
        if report.beta_theory is not None:
            line += f" (benchmark {report.beta_theory})"
        print(line)
    reporting.nearfield_figure(reports, out / "fig4_nearfield_curves.png")
    print(f"wrote {out / 'fig4_nearfield_curves.png'}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "farfield": _cmd_farfield,
    "nearfield": _cmd_nearfield,
    "verify": _cmd_verify,
    "reproduce-fig2": _cmd_reproduce_fig2,
    "reproduce-fig4": _cmd_reproduce_fig4,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    if args.workers < 1:
        print("--workers must be >= 1", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, graphs.GraphBuildError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
