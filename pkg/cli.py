#!/usr/bin/env python3
"""
Command-line frontend for the four-body operator toolkit.
Run: python cli.py <command> [options]

Commands: verify, catalog, spectrum, potentials, trajectory, nbody-derive, geometry.
Exit codes: 0 success, 1 an identity or computation failed, 2 bad configuration.
"""

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from colorama import Fore, Style, init
from pydantic import BaseModel

from app.catalog import operators as ops
from app.catalog.identities import catalog_detail, catalog_summary, golden_text, verified_entry
from app.config import configure_logging, get_settings
from app.dynamics.integrators import integrate
from app.errors import ConfigError, Quad4Error
from app.geometry.io import load_points
from app.geometry.tetra import geometry_report
from app.nbody.volume import nbody_table
from app.schemas.configs import MassWeights, RhoPoint, RunConfig, TrajectoryConfig
from app.schemas.reports import SpectrumReport, SuiteReport, plain_witness
from app.spectral import qes
from app.verify.runner import SuiteContext
from app.verify.suites import run_suite, suite_names

init(autoreset=True)
logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

SPECTRUM_COLUMNS = ["level", "eigenvalue_exact", "eigenvalue", "multiplicity"]


# -- output helpers -------------------------------------------------------------


def _out_dir(config: RunConfig) -> Path:
    out = config.out or get_settings().out_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(model: BaseModel, path: Path) -> Path:
    path.write_text(model.model_dump_json(indent=2) + "\n")
    print(f"{Fore.CYAN}[wrote {path}]{Style.RESET_ALL}")
    return path


def _write_levels(report: SpectrumReport, path: Path) -> Path:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SPECTRUM_COLUMNS)
        for level in report.levels:
            writer.writerow([level.level, level.eigenvalue_exact or "", repr(level.eigenvalue), level.multiplicity])
    print(f"{Fore.CYAN}[wrote {path}]{Style.RESET_ALL}")
    return path


def format_suite(report: SuiteReport) -> str:
    """Colored terminal summary of a suite run."""
    lines = []
    for r in report.results:
        tag = f"{Fore.GREEN}PASS" if r.passed else f"{Fore.RED}FAIL"
        line = f"{tag}{Style.RESET_ALL} {r.name}"
        if r.elapsed_ms is not None:
            line += f" {Style.DIM}({r.elapsed_ms:.0f} ms){Style.RESET_ALL}"
        if not r.passed and r.detail:
            line += f"\n     {r.detail}"
        if not r.passed and r.witness is not None:
            line += f"\n     witness: {json.dumps(r.witness, default=str)}"
        lines.append(line)
    for f in report.findings:
        mark = "agrees" if f.agrees else "differs"
        lines.append(f"{Fore.YELLOW}FINDING{Style.RESET_ALL} {f.name}: measured {f.measured}, printed {f.printed} ({mark})")
    passed = sum(r.passed for r in report.results)
    color = Fore.GREEN if report.passed else Fore.RED
    lines.append(f"{color}{passed}/{len(report.results)} identities hold{Style.RESET_ALL} [seed {report.seed}]")
    return "\n".join(lines)


def format_spectrum(report: SpectrumReport) -> str:
    lines = [f"{Fore.YELLOW}E0 = {report.ground_energy}, dimension {report.dimension}{Style.RESET_ALL}"]
    for level in report.levels:
        value = level.eigenvalue_exact or f"{level.eigenvalue:.12g}"
        lines.append(f"  level {level.level}: E = {value}  x{level.multiplicity}")
    if report.measured_spacing is not None:
        lines.append(
            f"{Fore.YELLOW}spacing: measured {report.measured_spacing}, printed {report.printed_spacing}{Style.RESET_ALL}"
        )
    return "\n".join(lines)


# -- commands --------------------------------------------------------------------


def cmd_verify(config: RunConfig, args) -> int:
    ctx = SuiteContext.from_settings(fast=args.fast, seed=config.seed, precision_bits=config.precision_bits)
    report = run_suite(args.suite, ctx)
    print(format_suite(report))
    _write_json(report, _out_dir(config) / f"verify-{args.suite}.json")
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_catalog(config: RunConfig, args) -> int:
    if args.action == "list":
        for identifier in ops.identifiers():
            entry = catalog_summary(identifier)
            print(f"{Fore.GREEN}{identifier}{Style.RESET_ALL}  {entry.citation}  [{', '.join(entry.variables)}]")
        return EXIT_OK
    if not args.identifier:
        raise ConfigError("catalog show needs an identifier", witness=ops.identifiers())
    if args.format == "golden":
        verified_entry(args.identifier)
        sys.stdout.write(golden_text(args.identifier))
    else:
        print(catalog_detail(args.identifier, config.masses).model_dump_json(indent=2))
    return EXIT_OK


def cmd_spectrum(config: RunConfig, args) -> int:
    report = qes.qes_spectrum(qes.qes_matrix(config.qes()), bits=config.precision_bits)
    print(format_spectrum(report))
    out = _out_dir(config)
    stem = f"spectrum-N{config.N}"
    _write_json(report, out / f"{stem}.json")
    _write_levels(report, out / f"{stem}.csv")
    return EXIT_OK


def _point(text: Optional[str]) -> Optional[RhoPoint]:
    if not text:
        return None
    values = [v.strip() for v in text.split(",")]
    if len(values) != 6:
        raise ConfigError("--point needs six comma-separated squared distances", witness=text)
    return RhoPoint.from_values(values)


def cmd_potentials(config: RunConfig, args) -> int:
    report = qes.potentials_report(config.qes(), _point(args.point))
    print(report.model_dump_json(indent=2))
    return EXIT_OK


def cmd_trajectory(config: RunConfig, args) -> int:
    if config.config_file is None:
        raise ConfigError("trajectory needs --config with a JSON run file")
    traj_config = TrajectoryConfig.model_validate_json(config.config_file.read_text())
    traj = integrate(traj_config)
    out = _out_dir(config)
    csv_path = traj.write_csv(out / f"{config.config_file.stem}.csv")
    summary = traj.summary(csv_path)
    color = Fore.YELLOW if summary.terminated_at_boundary else Fore.GREEN
    print(
        f"{color}{summary.steps_taken} steps, max relative drift {summary.max_relative_drift:.3e}"
        f"{', stopped at the boundary' if summary.terminated_at_boundary else ''}{Style.RESET_ALL}"
    )
    _write_json(summary, out / f"{config.config_file.stem}.json")
    return EXIT_OK


def cmd_nbody(config: RunConfig, args) -> int:
    table = nbody_table(args.n)
    for label, value in table.slots.items():
        print(f"  {label} = {value}")
    for label, ok in table.known_slots_match.items():
        tag = f"{Fore.GREEN}PASS" if ok else f"{Fore.RED}FAIL"
        print(f"{tag}{Style.RESET_ALL} closed-form slot {label}")
    if table.undetermined:
        print(f"{Fore.YELLOW}not fixed by the induced operator: {', '.join(table.undetermined)}{Style.RESET_ALL}")
    _write_json(table, _out_dir(config) / f"nbody-n{args.n}.json")
    ok = table.residual_zero and all(table.known_slots_match.values())
    tag = f"{Fore.GREEN}certified" if table.residual_zero else f"{Fore.RED}residual nonzero"
    print(f"{tag}{Style.RESET_ALL} through degree {table.residual_degree}")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_geometry(config: RunConfig, args) -> int:
    if args.file:
        points = load_points(Path(args.file))
    elif args.point:
        points = [_point(args.point)]
    else:
        raise ConfigError("geometry needs --point or --file")
    reports = [geometry_report(p, config.masses) for p in points]
    for k, report in enumerate(reports):
        print(f"{Fore.GREEN}point {k}{Style.RESET_ALL}: {report.classification}, V = {report.volume_sq}")
    if len(reports) == 1:
        print(reports[0].model_dump_json(indent=2))
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "catalog": cmd_catalog,
    "spectrum": cmd_spectrum,
    "potentials": cmd_potentials,
    "trajectory": cmd_trajectory,
    "nbody-derive": cmd_nbody,
    "geometry": cmd_geometry,
}


# -- argument parsing ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--d", type=int, help="space dimension (formal if omitted)")
    common.add_argument("--gamma", default="0")
    common.add_argument("--omega", default="1")
    common.add_argument("--A", dest="A", default="0")
    common.add_argument("--N", dest="N", type=int, default=0)
    common.add_argument("--masses", help="m1,m2,m3,m4")
    common.add_argument("--precision-bits", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--log-level")

    parser = argparse.ArgumentParser(prog="cli.py", description="Four-body radial operators toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run identity suites")
    p.add_argument("--suite", default="all", choices=suite_names())
    p.add_argument("--fast", action="store_true", help="reduced sizes, same code paths")

    p = sub.add_parser("catalog", parents=[common], help="list or show catalog entries")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("identifier", nargs="?")
    p.add_argument("--format", choices=["golden", "json"], default="golden")

    sub.add_parser("spectrum", parents=[common], help="QES spectrum on polynomials of degree <= N")

    p = sub.add_parser("potentials", parents=[common], help="closed-form potentials")
    p.add_argument("--point", help="rho12,rho13,rho14,rho23,rho24,rho34")

    p = sub.add_parser("trajectory", parents=[common], help="integrate a classical trajectory")
    p.add_argument("--config", dest="config_file", required=True)

    p = sub.add_parser("nbody-derive", parents=[common], help="derive n-body volume coefficients")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("geometry", parents=[common], help="tetrahedron invariants of a point")
    p.add_argument("--point", help="rho12,rho13,rho14,rho23,rho24,rho34")
    p.add_argument("--file", help="CSV or JSON with points")
    return parser


def run_config(args) -> RunConfig:
    settings = get_settings()
    return RunConfig(
        command=args.command,
        d=args.d,
        gamma=args.gamma,
        omega=args.omega,
        A=args.A,
        N=args.N,
        masses=MassWeights.parse(args.masses) if args.masses else None,
        precision_bits=args.precision_bits or settings.precision_bits,
        seed=args.seed if args.seed is not None else settings.seed,
        out=Path(args.out) if args.out else None,
        config_file=Path(args.config_file) if getattr(args, "config_file", None) else None,
    )


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        config = run_config(args)
        return COMMANDS[args.command](config, args)
    except (ConfigError, ValueError) as e:
        print(f"{Fore.RED}Configuration error: {e}{Style.RESET_ALL}", file=sys.stderr)
        return EXIT_CONFIG
    except Quad4Error as e:
        print(f"{Fore.RED}{type(e).__name__}: {e}{Style.RESET_ALL}", file=sys.stderr)
        if e.witness is not None:
            print(json.dumps({"witness": plain_witness(e.witness)}), file=sys.stderr)
        return EXIT_FAILED


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
