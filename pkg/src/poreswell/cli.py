"""Command-line entry point: ``poreswell {run,verify,converge,sweep}``.

Exit codes: 0 success, 2 invalid input or usage, 3 solver guard tripped,
4 audit failure (or orders outside their windows), 5 malformed artifacts.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import config as cfgmod
from .errors import SolverError, ValidationError
from .front import fixed_point_solve
from .pde import Run, solve_monolithic
from .verify import RunReport, build_report, refinement_study

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3
EXIT_AUDIT = 4
EXIT_ARTIFACTS = 5

SPATIAL_WINDOW = (1.8, 2.2)
TEMPORAL_WINDOW = (0.8, 1.2)

FLOAT_FMT = "%.17g"


def load_config(source, seed: int = 0) -> dict:
    """A config mapping from a YAML path, a preset name, or ``"random"`` (seeded)."""
    if str(source) == "random":
        return cfgmod.random_config(np.random.default_rng(seed))
    return cfgmod.load(source)


def execute(cfg: dict, mode: str | None = None) -> tuple[cfgmod.RunConfig, Run]:
    """Validate and solve one configuration (raises on invalid input or guards)."""
    rc = cfgmod.build_run_config(cfg, mode)
    if rc.mode == "monolithic":
        run = solve_monolithic(rc.model, rc.grid, rc.stepper, rc.steps)
    else:
        res = fixed_point_solve(rc.model, rc.grid, rc.stepper, rc.steps, rc.fp_tolerance,
                                rc.fp_max, rc.K)
        run = res.to_run(rc.model, rc.grid)
    return rc, run


def _write_csv(path: Path, header: list[str], data: np.ndarray) -> None:
    np.savetxt(path, data, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments="")


def write_artifacts(out: Path, cfg: dict, run: Run, report: RunReport) -> None:
    out.mkdir(parents=True, exist_ok=True)
    cfgmod.dump(cfg, out / "config.yaml")
    _write_csv(out / "timeseries.csv", list(RunReport.TIMESERIES_COLUMNS), report.timeseries())
    fields_header = ["t", "s"] + [f"u_{i}" for i in range(run.grid.N + 1)]
    _write_csv(out / "fields.csv", fields_header, np.column_stack([run.t, run.s, run.u]))
    (out / "report.json").write_text(json.dumps(report.summary(), indent=2, sort_keys=True) + "\n")


def _report_line(report: RunReport) -> str:
    b, r = report.bounds, report.rates
    return (f"s(T)={report.s[-1]:.10g}  bounds {'ok' if b.passed else 'FAIL'} "
            f"(worst {b.worst:.3g})  front rate {'ok' if r.passed else 'FAIL'} "
            f"[{r.rate_min:.4g}, {r.rate_max:.4g}]  mass error {np.max(report.mass_error):.3g}")


def run_to_dir(cfg: dict, out: Path | None, mode: str | None, verify: bool) -> tuple[int, dict]:
    """Shared body of ``run`` and each ``sweep`` member: ``(exit code, summary)``."""
    try:
        rc, run = execute(cfg, mode)
    except ValidationError as exc:
        return EXIT_INVALID, {"error": "validation", "violations": [str(v) for v in exc.violations]}
    except (KeyError, TypeError, ValueError) as exc:
        return EXIT_INVALID, {"error": "config", "message": f"{type(exc).__name__}: {exc}"}
    except SolverError as exc:
        return EXIT_SOLVER, {"error": type(exc).__name__, "message": str(exc)}
    report = build_report(run)
    if out is not None:
        write_artifacts(out, cfg, run, report)
    summary = report.summary()
    summary["line"] = _report_line(report)
    if verify and not report.passed:
        return EXIT_AUDIT, summary
    return EXIT_OK, summary


def _print_failure(code: int, summary: dict) -> None:
    if summary.get("error") == "validation":
        print("invalid configuration:", file=sys.stderr)
        for v in summary["violations"]:
            print(f"  {v}", file=sys.stderr)
    elif "error" in summary:
        print(f"{summary['error']}: {summary['message']}", file=sys.stderr)
    elif code == EXIT_AUDIT:
        print(f"audit failed: {summary['line']}", file=sys.stderr)


def cmd_run(config, out, mode: str | None = None, verify: bool = True, seed: int = 0) -> int:
    try:
        cfg = load_config(config, seed)
    except (OSError, yaml.YAMLError, ValueError) as exc:
        print(f"cannot read config {config}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    code, summary = run_to_dir(cfg, None if out is None else Path(out), mode, verify)
    if "line" in summary:
        print(summary["line"])
    _print_failure(code, summary)
    return code


class MalformedArtifacts(Exception):
    pass


def _read_csv(path: Path, columns: list[str] | None = None) -> tuple[list[str], np.ndarray]:
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise MalformedArtifacts(f"{path.name}: {exc}") from exc
    if columns is not None and header != columns:
        raise MalformedArtifacts(f"{path.name}: unexpected header {header}")
    if data.shape[1] != len(header):
        raise MalformedArtifacts(f"{path.name}: {data.shape[1]} columns for {len(header)} names")
    return header, data


def load_artifacts(run_dir) -> tuple[Run, dict]:
    """Rebuild the run record stored by ``run``; raises :class:`MalformedArtifacts`."""
    run_dir = Path(run_dir)
    try:
        cfg = cfgmod.load(run_dir / "config.yaml")
        stored = json.loads((run_dir / "report.json").read_text())
        rc = cfgmod.build_run_config(cfg, stored.get("mode"))
    except (OSError, ValueError, KeyError, TypeError, yaml.YAMLError) as exc:
        raise MalformedArtifacts(f"cannot rebuild the model: {exc}") from exc
    _, ts = _read_csv(run_dir / "timeseries.csv", list(RunReport.TIMESERIES_COLUMNS))
    header, fields = _read_csv(run_dir / "fields.csv")
    n_nodes = rc.grid.N + 1
    if header != ["t", "s"] + [f"u_{i}" for i in range(n_nodes)]:
        raise MalformedArtifacts("fields.csv: header does not match the grid")
    steps = stored.get("steps")
    if fields.shape[0] != ts.shape[0] or fields.shape[0] != (steps or 0) + 1:
        raise MalformedArtifacts(
            f"row counts disagree: fields {fields.shape[0]}, timeseries {ts.shape[0]}, "
            f"report {steps} steps")
    if not np.array_equal(fields[:, 0], ts[:, 0]) or not np.array_equal(fields[:, 1], ts[:, 1]):
        raise MalformedArtifacts("time or front columns differ between the two CSV files")
    distances = tuple(stored.get("fixed_point_distances", ()))
    run = Run(rc.model, rc.grid, fields[:, 0], fields[:, 1], ts[:, 2], fields[:, 2:],
              stored.get("mode", rc.mode), None, distances)
    return run, stored


def cmd_verify(run_dir) -> int:
    try:
        run, _ = load_artifacts(run_dir)
    except MalformedArtifacts as exc:
        print(f"malformed artifacts in {run_dir}: {exc}", file=sys.stderr)
        return EXIT_ARTIFACTS
    report = build_report(run, with_psi=False)
    print(_report_line(report))
    if not report.passed:
        print("audit failed", file=sys.stderr)
        return EXIT_AUDIT
    return EXIT_OK


def _in_window(orders, window) -> bool:
    return bool(orders) and all(window[0] <= o <= window[1] for o in orders)


def cmd_converge(config, levels: int, out=None, seed: int = 0) -> int:
    if levels < 3:
        print("converge needs --levels >= 3", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = load_config(config, seed)
        rc = cfgmod.build_run_config(cfg, "monolithic")
    except ValidationError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID
    except (OSError, KeyError, TypeError, ValueError, yaml.YAMLError) as exc:
        print(f"cannot use config {config}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        study = refinement_study(rc.model, rc.grid.N, rc.steps, rc.horizon, levels,
                                 rc.stepper.picard_tol, rc.stepper.picard_max,
                                 rc.stepper.delta_min)
    except SolverError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    rows = study.rows()
    print(f"{'kind':<9}{'N':>7}{'steps':>8}{'diff':>14}  order")
    for r in rows:
        diff = "" if r["diff"] is None else f"{r['diff']:.6e}"
        order = r["order"] if isinstance(r["order"], str) or r["order"] is None else f"{r['order']:.4f}"
        print(f"{r['kind']:<9}{r['N']:>7}{r['steps']:>8}{diff:>14}  {order or ''}")
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "convergence.csv", "w") as fh:
            fh.write("kind,N,steps,diff,order\n")
            for r in rows:
                diff = "" if r["diff"] is None else FLOAT_FMT % r["diff"]
                order = (r["order"] if isinstance(r["order"], str)
                         else "" if r["order"] is None else FLOAT_FMT % r["order"])
                fh.write(f"{r['kind']},{r['N']},{r['steps']},{diff},{order}\n")
    if study.exact:
        return EXIT_OK
    ok = (_in_window(study.orders("spatial"), SPATIAL_WINDOW)
          and _in_window(study.orders("temporal"), TEMPORAL_WINDOW))
    return EXIT_OK if ok else EXIT_AUDIT


def parse_values(text: str) -> list:
    """Comma-separated scalars, each parsed as a YAML literal."""
    if not text.strip():
        return []
    return [yaml.safe_load(item) for item in text.split(",")]


def _sweep_member(job):
    cfg, param, value, out, mode, verify = job
    try:
        member = cfgmod.set_param(cfg, param, value)
    except KeyError as exc:
        return EXIT_INVALID, {"error": "config", "message": str(exc)}
    return run_to_dir(member, out, mode, verify)


def _workers(n_jobs: int) -> int:
    cap = os.environ.get("PW_THREADS")
    limit = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(limit, n_jobs))


def cmd_sweep(config, param: str, values: list, out=None, mode: str | None = None,
              verify: bool = True, seed: int = 0) -> int:
    if not values:
        print("sweep needs a non-empty --values list", file=sys.stderr)
        return EXIT_INVALID
    try:
        cfg = load_config(config, seed)
    except (OSError, yaml.YAMLError, ValueError) as exc:
        print(f"cannot read config {config}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    out = None if out is None else Path(out)
    jobs = [(cfg, param, v, None if out is None else out / f"{i:03d}", mode, verify)
            for i, v in enumerate(values)]
    workers = _workers(len(jobs))
    if workers == 1:
        results = [_sweep_member(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            # map keeps input order whatever the completion order
            results = list(pool.map(_sweep_member, jobs))
    merged = []
    for value, (code, summary) in zip(values, results):
        merged.append({"param": param, "value": value, "exit_code": code, **summary})
        status = summary.get("line") or summary.get("message") or "; ".join(summary.get("violations", []))
        print(f"{param}={value}: exit {code}  {status}")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.json").write_text(json.dumps(merged, indent=2, sort_keys=True) + "\n")
    codes = [code for code, _ in results if code != EXIT_OK]
    return max(codes) if codes else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poreswell", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_out=False):
        p.add_argument("--config", required=True,
                       help="YAML file or preset name (default, equilibrium, random)")
        p.add_argument("--out", required=need_out, help="output directory")
        p.add_argument("--seed", type=int, default=0, help="seed for the random preset")

    p = sub.add_parser("run", help="solve one configuration and write artifacts")
    common(p)
    p.add_argument("--mode", choices=cfgmod.RUN_MODES)
    p.add_argument("--no-verify", action="store_true", help="do not fail on audit violations")

    p = sub.add_parser("verify", help="replay the audits on stored artifacts")
    p.add_argument("--out", "--run-dir", dest="out", required=True, help="run directory")

    p = sub.add_parser("converge", help="self-convergence study")
    common(p)
    p.add_argument("--levels", type=int, default=4)

    p = sub.add_parser("sweep", help="independent runs over one parameter")
    common(p)
    p.add_argument("--param", required=True, help="dotted (physical.a0) or bare (a0) key")
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--mode", choices=cfgmod.RUN_MODES)
    p.add_argument("--no-verify", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "run":
        return cmd_run(args.config, args.out, args.mode, not args.no_verify, args.seed)
    if args.command == "verify":
        return cmd_verify(args.out)
    if args.command == "converge":
        if args.levels < 3:
            parser.error("--levels must be >= 3")
        return cmd_converge(args.config, args.levels, args.out, args.seed)
    values = parse_values(args.values)
    if not values:
        parser.error("--values must list at least one value")
    return cmd_sweep(args.config, args.param, values, args.out, args.mode,
                     not args.no_verify, args.seed)


if __name__ == "__main__":
    sys.exit(main())
