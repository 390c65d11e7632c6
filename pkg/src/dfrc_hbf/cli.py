"""Command-line experiment harness.

Subcommands::

    design       solve one instance, write beamformer.json and report.json
    sweep        CSV of result rows along --axis {phi, snr, nrf}
    beampattern  CSV of (theta_deg, power_db) for a beamformer file
    convergence  per-iteration traces of either solver

Exit codes: 0 success, 2 configuration error, 3 solver failure or failed
``--check``, 4 I/O error. Failures print one JSON object to stderr.
"""

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace

import numpy as np

from .beamformer import HybridBeamformer, validate
from .errors import ConfigError, HybridBFError
from .experiments import (
    AXES,
    ROW_COLUMNS,
    SCHEMA_VERSION,
    STRUCTURE_NAMES,
    ExperimentConfig,
    build_problem,
    design,
    evaluate,
    run_sweep,
)
from .scene import beampattern

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4


class CheckFailed(HybridBFError):
    pass


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _clean(obj):
    """JSON-safe copy: non-finite floats become null, arrays become lists."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_clean(obj), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _write_csv(path, header, rows, comment=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def load_config(args):
    """Config file (if any) with command-line overrides applied."""
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    explicit = set(cfg.explicit)
    if getattr(args, "phi", None) is not None:
        cfg = replace(cfg, phi=args.phi)
        explicit.add("phi")
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seeds=(args.seed,))
    if getattr(args, "structure", None) is not None:
        cfg = replace(cfg, structures=(args.structure,))
    return replace(cfg, explicit=frozenset(explicit))


def _solve(cfg, structure, seed):
    problem = build_problem(cfg, seed)
    bf, report = design(cfg, problem, cfg.phi, structure)
    return problem, bf, report


def _report_doc(cfg, structure, seed, report, timing):
    return {
        "schema_version": SCHEMA_VERSION,
        "structure": STRUCTURE_NAMES[structure],
        "phi": cfg.phi,
        "seed": seed,
        "report": report.to_dict(include_timing=timing),
    }


def _check(bf):
    problems = validate(bf)
    if problems:
        worst = max(problems, key=lambda v: v.magnitude)
        raise CheckFailed(f"infeasible beamformer: {worst.constraint}: {worst.detail}")
    return []


def cmd_design(args):
    cfg = load_config(args)
    structure = cfg.structures[0]
    seed = cfg.seeds[0]
    problem, bf, report = _solve(cfg, structure, seed)
    f = bf.f_rf @ bf.f_bb
    rate, ism, obj = evaluate(f, problem, cfg.phi, cfg.snr_db)
    doc = _report_doc(cfg, structure, seed, report, args.timing)
    doc["evaluation"] = {
        "snr_db": cfg.snr_db,
        "rate_bits_s_hz": rate,
        "ismr_linear": ism,
        "ismr_db": 10.0 * math.log10(ism),
        "objective": obj,
    }
    doc["violations"] = [v.__dict__ for v in validate(bf)]
    os.makedirs(args.out, exist_ok=True)
    paths = [os.path.join(args.out, "beamformer.json"), os.path.join(args.out, "report.json")]
    _write_json(paths[0], bf.to_dict())
    _write_json(paths[1], doc)
    if args.check:
        _check(bf)
    return paths


def cmd_sweep(args):
    cfg = load_config(args)
    rows = run_sweep(cfg, args.axis, jobs=args.jobs, timing=args.timing)
    if args.check:
        bad = [r for r in rows if r.status.startswith("failed")]
        if bad:
            raise CheckFailed(f"{len(bad)} sweep row(s) failed; first: {bad[0].status}")
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"sweep_{args.axis}.csv")
    _write_csv(path, ROW_COLUMNS, [r.as_list() for r in rows],
               comment=f"schema_version={SCHEMA_VERSION} axis={args.axis}")
    return [path]


def beampattern_grid(resolution_deg):
    """Uniform grid over [-90, 90] degrees including both endpoints."""
    if not resolution_deg > 0:
        raise ConfigError("resolution must be positive")
    n = round(180.0 / resolution_deg)
    if n < 1 or abs(n * resolution_deg - 180.0) > 1e-9:
        raise ConfigError("resolution must divide 180 degrees")
    return np.round(np.linspace(-90.0, 90.0, n + 1), 12)


def beampattern_table(f, resolution_deg=0.1):
    """``(theta_deg, power_db)`` columns with ``power_db = 10 log10 P(theta)``."""
    theta = beampattern_grid(resolution_deg)
    p = beampattern(f, np.radians(theta))
    return theta, 10.0 * np.log10(np.maximum(p, np.finfo(float).tiny))


def read_beamformer(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return HybridBeamformer.from_json(fh.read())
    except (ValueError, TypeError) as exc:
        raise OSError(f"{path}: malformed beamformer file ({exc})") from exc


def cmd_beampattern(args):
    if args.beamformer:
        bf = read_beamformer(args.beamformer)
    else:
        cfg = load_config(args)
        _, bf, _ = _solve(cfg, cfg.structures[0], cfg.seeds[0])
    if args.check:
        _check(bf)
    theta, power_db = beampattern_table(bf.f_rf @ bf.f_bb, args.resolution)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "beampattern.csv")
    _write_csv(path, ("theta_deg", "power_db"), zip(theta, power_db),
               comment=f"schema_version={SCHEMA_VERSION}")
    return [path]


CONVERGENCE_COLUMNS = ("iteration", "objective", "primal_residual", "grad_norm")


def convergence_rows(report):
    n = report.iterations
    prim = report.primal_residual_trace or [""] * n
    return [(k + 1, report.objective_trace[k], prim[k], report.grad_norm_trace[k]) for k in range(n)]


def cmd_convergence(args):
    cfg = load_config(args)
    seed = cfg.seeds[0]
    os.makedirs(args.out, exist_ok=True)
    paths = []
    for structure in cfg.structures:
        _, bf, report = _solve(cfg, structure, seed)
        if args.check:
            _check(bf)
        path = os.path.join(args.out, f"convergence_{structure}.csv")
        _write_csv(path, CONVERGENCE_COLUMNS, convergence_rows(report),
                   comment=f"schema_version={SCHEMA_VERSION} structure={STRUCTURE_NAMES[structure]}")
        rpath = os.path.join(args.out, f"convergence_{structure}.json")
        _write_json(rpath, _report_doc(cfg, structure, seed, report, args.timing))
        paths += [path, rpath]
    return paths


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config (every key optional)")
    common.add_argument("--phi", type=float, help="trade-off weight in [0, 1]")
    common.add_argument("--structure", choices=sorted(STRUCTURE_NAMES))
    common.add_argument("--seed", type=int, help="restrict to this channel seed")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--check", action="store_true",
                        help="fail (exit 3) on infeasible designs or failed rows")
    common.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    common.add_argument("--timing", action="store_true",
                        help="record wall-clock times (outputs stop being reproducible)")

    parser = argparse.ArgumentParser(prog="dfrc-hbf", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("design", parents=[common], help="solve one instance")
    sw = sub.add_parser("sweep", parents=[common], help="parameter sweep to CSV")
    sw.add_argument("--axis", choices=AXES, default="phi")
    bp = sub.add_parser("beampattern", parents=[common], help="beampattern CSV")
    bp.add_argument("beamformer", nargs="?", help="beamformer JSON (designs one if omitted)")
    bp.add_argument("--resolution", type=float, default=0.1, help="grid step in degrees")
    sub.add_parser("convergence", parents=[common], help="solver traces to CSV")
    return parser


COMMANDS = {
    "design": cmd_design,
    "sweep": cmd_sweep,
    "beampattern": cmd_beampattern,
    "convergence": cmd_convergence,
}


def _fail(kind, exc, code):
    json.dump({"error": kind, "message": str(exc), "exit_code": code}, sys.stderr, sort_keys=True)
    sys.stderr.write("\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        paths = COMMANDS[args.command](args)
    except ConfigError as exc:
        return _fail("config", exc, EXIT_CONFIG)
    except CheckFailed as exc:
        return _fail("check", exc, EXIT_SOLVER)
    except HybridBFError as exc:
        return _fail("solver", exc, EXIT_SOLVER)
    except OSError as exc:
        return _fail("io", exc, EXIT_IO)
    print(json.dumps({"written": paths}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
