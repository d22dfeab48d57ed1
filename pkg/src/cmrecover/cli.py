"""Command-line entry point.

    cmrecover dissipate --example 1 --out out/ex1
    cmrecover recover --example 2 --seed 7 --out out/ex2
    cmrecover table1 --example 2 --out out/table
    cmrecover recover --config run.yaml

Exit codes: 0 success, 2 invalid configuration, 3 optimizer failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, example_config, load_config
from .dissipation import dissipate
from .fock import DensityMatrix, embed
from .metrics import q_grid
from .recovery import OptimizationError, RecoveryReport, matrix_to_json, run_sequence, table_compare

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OPTIMIZER = 3

log = logging.getLogger("cmrecover")


def _density_json(rho: DensityMatrix, **extra) -> str:
    payload = {**extra, "dim": rho.dim, "entries": matrix_to_json(rho.data)}
    return json.dumps(payload, indent=2) + "\n"


def cmd_dissipate(cfg: RunConfig) -> list[Path]:
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    rho0 = cfg.target
    damped = dissipate(rho0, cfg.gamma_t)
    files = {
        "rho_initial.json": _density_json(rho0, gamma_t=0.0),
        "rho_damped.json": _density_json(damped, gamma_t=cfg.gamma_t),
        "q_initial.csv": q_grid(rho0, cfg.qgrid.extent, cfg.qgrid.step).to_csv(),
        "q_error.csv": q_grid(damped.data - rho0.data, cfg.qgrid.extent, cfg.qgrid.step).to_csv(),
    }
    return _write_all(out, files)


def _recover_files(cfg: RunConfig, report: RecoveryReport) -> dict[str, str]:
    error = report.final.data - _pad(report.target, report.final.dim)
    return {
        "report.json": report.to_json(),
        "fig3_trace.csv": report.trace_csv(),
        "q_error_final.csv": q_grid(error, cfg.qgrid.extent, cfg.qgrid.step).to_csv(),
    }


def _pad(rho: DensityMatrix, dim: int):
    return embed(rho, max(dim, rho.dim)).data


def cmd_recover(cfg: RunConfig) -> list[Path]:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    try:
        report = run_sequence(cfg.target, cfg.gamma_t, cfg.k_max, cfg.optimizer_config)
    except OptimizationError as exc:
        if exc.partial_report is not None:
            _write_all(cfg.output_dir, _recover_files(cfg, exc.partial_report))
        raise
    return _write_all(cfg.output_dir, _recover_files(cfg, report))


def cmd_table1(cfg: RunConfig) -> list[Path]:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    rows = table_compare(cfg.target, cfg.gamma_ts, cfg.k_max, cfg.optimizer_config)
    lines = [f"gamma_t,p_seq_{cfg.k_max},filtering,recovered_fidelity"]
    for row in rows:
        lines.append(
            f"{row.gamma_t:.9g},{row.p_seq:.9g},{row.filtering_probability:.9g},{row.recovered_fidelity:.9g}"
        )
    return _write_all(cfg.output_dir, {"table1.csv": "\n".join(lines) + "\n"})


def read_table1(path: str | Path) -> list[dict[str, float]]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def _write_all(out: Path, files: dict[str, str]) -> list[Path]:
    paths = []
    for name, text in files.items():
        path = out / name
        path.write_text(text)
        paths.append(path)
    return paths


COMMANDS = {"dissipate": cmd_dissipate, "recover": cmd_recover, "table1": cmd_table1}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmrecover",
        description="Recover damped cavity-field states with optimized conditional measurements.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="YAML run configuration")
    src.add_argument("--example", type=int, choices=(1, 2), help="built-in scenario")
    parser.add_argument("--r", type=float, help="cost exponent (overrides config)")
    parser.add_argument("--kmax", type=int, help="maximum number of measurements")
    parser.add_argument("--seed", type=int, help="optimizer RNG seed")
    parser.add_argument("--gamma-t", type=float, dest="gamma_t", help="damping gamma*t")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if args.config else example_config(args.example)
    changes = {}
    if args.r is not None:
        changes["r"] = args.r
    if args.kmax is not None:
        changes["k_max"] = args.kmax
    if args.gamma_t is not None:
        changes["gamma_t"] = args.gamma_t
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.seed is not None:
        changes["optimizer"] = replace(cfg.optimizer, rng_seed=args.seed)
    try:
        return replace(cfg, **changes)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths = COMMANDS[args.command](cfg)
    except OptimizationError as exc:
        print(f"optimizer failure: {exc}", file=sys.stderr)
        return EXIT_OPTIMIZER
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
