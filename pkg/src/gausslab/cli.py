"""Command-line interface: verification suites, sampling campaigns,
Page-slope tables, and black hole radiation presets.

Exit codes: 0 success, 1 identity-check failure, 2 usage or configuration
error.  Every command writes a run manifest (command, config hash, seed,
outputs, timestamps) next to its outputs; data outputs themselves are
byte-for-byte reproducible for identical inputs and seeds.  The default
output directory can be set with the GAUSSLAB_OUTDIR environment variable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .constants import SOLAR_MASS_IN_PLANCK_UNITS
from .constraints import (
    HawkingModel,
    hawking_constraints,
    hawking_mode_count,
    load_spec,
    save_spec,
)
from .entropy import page_slope, write_page_slope_csv

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

DEFAULT_MODE_CAP = 100_000


@dataclass
class RunManifest:
    command: str
    seed: int | None = None
    config_path: str | None = None
    config_sha256: str | None = None
    tool_version: str = __version__
    started: float = 0.0
    finished: float = 0.0
    outputs: list[str] = field(default_factory=list)

    def write(self, outdir: Path) -> Path:
        self.finished = time.time()
        path = outdir / "manifest.json"
        payload = {
            "command": self.command,
            "seed": self.seed,
            "config_path": self.config_path,
            "config_sha256": self.config_sha256,
            "tool_version": self.tool_version,
            "started": self.started,
            "finished": self.finished,
            "outputs": sorted(self.outputs),
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")
        return path


def _outdir(args) -> Path:
    out = args.out or os.environ.get("GAUSSLAB_OUTDIR") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _parse_overrides(pairs):
    overrides = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"tolerance override must look like name=value, got {pair!r}")
        name, value = pair.split("=", 1)
        overrides[name.strip()] = float(value)
    return overrides


def cmd_verify(args) -> int:
    from .verify import run_suites

    try:
        overrides = _parse_overrides(args.override)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    outdir = _outdir(args)
    manifest = RunManifest(command="verify", seed=args.seed, started=time.time())
    try:
        report = run_suites(args.suite, overrides, seed=args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report_path = outdir / "verify_report.json"
    report_path.write_text(json.dumps(report, indent=2) + "\n")
    manifest.outputs.append(str(report_path))
    manifest.write(outdir)
    for suite, checks in report["suites"].items():
        for check in checks:
            status = "pass" if check["passed"] else "FAIL"
            print(
                f"[{status}] {suite}/{check['name']}: residual {check['residual']:.3e} "
                f"(tolerance {check['tolerance']:.3e})"
            )
    print(f"report: {report_path}")
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def cmd_sample(args) -> int:
    from .sampling import (
        SamplerConfig,
        ambient_observables,
        estimate_observables,
        sample_ambient,
        sample_manifold,
        save_batch,
        write_stats_csv,
    )

    config_path = Path(args.config)
    if not config_path.exists():
        print(f"error: config file {config_path} not found", file=sys.stderr)
        return EXIT_USAGE
    outdir = _outdir(args)
    manifest = RunManifest(
        command="sample",
        seed=args.seed,
        config_path=str(config_path),
        config_sha256=_sha256(config_path),
        started=time.time(),
    )
    try:
        spec = load_spec(config_path)
        subsystem = [int(tok) for tok in args.subsystem.split(",")]
        x_list = [int(tok) for tok in args.x_list.split(",")]
        config = SamplerConfig(
            spec=spec,
            method=args.method,
            n_samples=args.n_samples,
            seed=args.seed,
            n_chains=args.n_chains,
            burn_in=args.burn_in,
            thinning=args.thinning,
            step_size=args.step_size,
            epsilon_schedule=tuple(float(t) for t in args.epsilon_schedule.split(",")),
        )
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if config.method == "manifold-walk":
        batch = sample_manifold(config)
        manifest.outputs += [str(p) for p in save_batch(batch, outdir, "batch")]
        stats = estimate_observables(batch, subsystem, x_list)
    else:
        batches = sample_ambient(config)
        for k, b in enumerate(batches):
            manifest.outputs += [
                str(p) for p in save_batch(b, outdir, f"batch_eps{k}")
            ]
        stats, table = ambient_observables(batches, subsystem, x_list)
        detail_path = outdir / "per_epsilon.json"
        detail_path.write_text(json.dumps(table, indent=2) + "\n")
        manifest.outputs.append(str(detail_path))
    stats_path = outdir / "statistics.csv"
    write_stats_csv(stats, stats_path)
    manifest.outputs.append(str(stats_path))
    manifest.write(outdir)
    for s in stats:
        label = s.observable if s.x is None else f"{s.observable}(x={s.x})"
        print(f"{label}: {s.mean:.6g} +/- {s.stderr:.2g} (ess {s.ess:.0f})")
    print(f"outputs in {outdir}")
    return EXIT_OK


def cmd_page_slope(args) -> int:
    spec_path = Path(args.spec)
    if not spec_path.exists():
        print(f"error: spec file {spec_path} not found", file=sys.stderr)
        return EXIT_USAGE
    outdir = _outdir(args)
    manifest = RunManifest(
        command="page-slope",
        config_path=str(spec_path),
        config_sha256=_sha256(spec_path),
        started=time.time(),
    )
    try:
        spec = load_spec(spec_path)
        rows = page_slope(spec)
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: invalid spec: {exc}", file=sys.stderr)
        return EXIT_USAGE
    csv_path = outdir / (args.csv_name or "page_slope.csv")
    write_page_slope_csv(rows, csv_path)
    manifest.outputs.append(str(csv_path))
    manifest.write(outdir)
    print(f"wrote {csv_path} ({len(rows)} rows, total entropy {rows[-1][1]:.6g} nats)")
    return EXIT_OK


def cmd_hawking(args) -> int:
    outdir = _outdir(args)
    manifest = RunManifest(command="hawking", started=time.time())
    if (args.mass_solar is None) == (args.mass_planck is None):
        print("error: give exactly one of --mass-solar / --mass-planck", file=sys.stderr)
        return EXIT_USAGE
    mass_planck = (
        args.mass_solar * SOLAR_MASS_IN_PLANCK_UNITS
        if args.mass_solar is not None
        else args.mass_planck
    )
    try:
        model = HawkingModel(initial_mass=mass_planck, k=args.k)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    count = hawking_mode_count(model)
    print(f"initial mass: {mass_planck:.6g} Planck masses")
    print(f"emission constant k: {args.k}")
    print(f"total excited modes over the lifetime: {count:.6g}")
    if args.count_only:
        manifest.write(outdir)
        return EXIT_OK
    if count > args.mode_cap:
        print(
            f"error: {count:.3g} modes exceeds the cap {args.mode_cap}; "
            "rerun with --count-only or raise --mode-cap",
            file=sys.stderr,
        )
        manifest.write(outdir)
        return EXIT_USAGE
    window_range = (0, min(args.windows, model.n_windows)) if args.windows else None
    try:
        spec = hawking_constraints(model, window_range, form=args.form)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    spec_path = outdir / (args.spec_name or "hawking_spec.json")
    save_spec(
        spec,
        spec_path,
        hawking={
            "mass_planck_units": mass_planck,
            "k": args.k,
            "window_range": list(window_range) if window_range else [0, model.n_windows],
            "form": args.form,
        },
    )
    manifest.outputs.append(str(spec_path))
    manifest.write(outdir)
    print(
        f"wrote {spec_path}: {len(spec.windows)} windows, {spec.n_modes} modes "
        f"(scenario {spec.scenario})"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gausslab",
        description="constrained pure Gaussian state ensembles: verify, sample, predict",
    )
    parser.add_argument("--version", action="version", version=f"gausslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the numerical identity suites")
    p.add_argument("--suite", default="all", help="all, replica, saddle, fock, analytic")
    p.add_argument("--override", action="append", metavar="NAME=TOL",
                   help="override a check tolerance (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sample", help="run a sampling campaign from a spec file")
    p.add_argument("config", help="constraint spec JSON file")
    p.add_argument("--out", default=None)
    p.add_argument("--method", default="manifold-walk",
                   choices=["manifold-walk", "ambient-soft"])
    p.add_argument("--n-samples", type=int, default=400)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-chains", type=int, default=2)
    p.add_argument("--burn-in", type=int, default=300)
    p.add_argument("--thinning", type=int, default=5)
    p.add_argument("--step-size", type=float, default=0.12)
    p.add_argument("--epsilon-schedule", default="0.2,0.1,0.05")
    p.add_argument("--subsystem", default="0", help="comma-separated mode indices")
    p.add_argument("--x-list", default="2,3", help="Renyi orders to estimate")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("page-slope", help="cumulative-entropy table for a spec")
    p.add_argument("spec", help="constraint spec JSON file")
    p.add_argument("--out", default=None)
    p.add_argument("--csv-name", default=None)
    p.set_defaults(func=cmd_page_slope)

    p = sub.add_parser("hawking", help="black hole radiation presets and mode counts")
    p.add_argument("--mass-solar", type=float, default=None)
    p.add_argument("--mass-planck", type=float, default=None)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--windows", type=int, default=None,
                   help="materialize only the first W time windows")
    p.add_argument("--count-only", action="store_true")
    p.add_argument("--mode-cap", type=int, default=DEFAULT_MODE_CAP)
    p.add_argument("--form", default="exp", choices=["exp", "coth"])
    p.add_argument("--spec-name", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_hawking)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
