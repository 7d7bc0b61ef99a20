"""Command-line front end.

    purify run scenario.json [--output PATH] [--format csv|json] [--seed N]
    purify sweep scenario.json [...]
    purify verify [--points N]

Exit codes: 0 success, 1 verification failure, 2 bad scenario/arguments,
3 degenerate leading eigenvalues, 4 yield underflow, 5 grid too large.
The environment variable ``PURIFY_OUTPUT_DIR`` redirects relative output
paths into that directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import duality
from .engine import iterate, predict_asymptotics
from .errors import DegenerateLeading, GridTooLarge, NoConvergence, ScenarioError
from .linalg import eig_biorthogonal
from .models import projected_operator
from .optimizer import SweepResult, evaluate, refine, score_objective, sweep
from .scenario import ScenarioFile, load_scenario

OUTPUT_DIR_ENV = "PURIFY_OUTPUT_DIR"

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_UNDERFLOW = 4
EXIT_GRID = 5


class CliFailure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def fmt(x) -> str:
    """17 significant digits: lossless for doubles."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    return format(float(x), ".17g")


def resolve_output(scenario: ScenarioFile, args, default_name: str) -> tuple[Path, str]:
    fmt_name = args.format or scenario.output.format
    path = Path(args.output or scenario.output.path or f"{default_name}.{fmt_name}")
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir and not path.is_absolute():
        path = Path(env_dir) / path
    return path, fmt_name


def _write(path: Path, fmt_name: str, header: list[str], rows: list[list], meta: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    # exclusive per run: write to a sibling file and move into place
    tmp = path.with_name(path.name + ".tmp")
    if fmt_name == "csv":
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(x) for x in row])
    else:
        records = [dict(zip(header, row)) for row in rows]
        with open(tmp, "w") as fh:
            json.dump({**meta, "rows": records}, fh, indent=1, default=_json_default)
            fh.write("\n")
    os.replace(tmp, path)


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _amps(vec) -> list:
    return [[float(z.real), float(z.imag)] for z in vec]


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    rng = np.random.default_rng(0 if args.seed is None else args.seed)
    cfg = scenario.model_config(rng)
    v = projected_operator(cfg)
    try:
        spec = eig_biorthogonal(v)
        pred = predict_asymptotics(spec, cfg.initial_state)
    except DegenerateLeading as exc:
        raise CliFailure(EXIT_DEGENERATE, str(exc)) from None
    except NoConvergence as exc:
        raise CliFailure(EXIT_DEGENERATE, f"leading eigenvalue vanishes: {exc}") from None
    target = scenario.target_vector()
    traj = iterate(v, cfg.initial_state, scenario.run.n_max, target=target, record_states=scenario.run.record_states)

    summary = {
        "model": scenario.model,
        "lambda0_abs": abs(pred.lambda0),
        "lambda0": [pred.lambda0.real, pred.lambda0.imag],
        "gap_ratio": pred.gap_ratio,
        "yield_prefactor": pred.prefactor,
        "predicted_target": _amps(pred.target),
        "eigenvalue_magnitudes": [float(m) for m in spec.magnitudes],
        "truncated": traj.truncated,
    }
    print(f"|lambda0|        = {fmt(abs(pred.lambda0))}")
    print(f"gap ratio        = {fmt(pred.gap_ratio)}")
    print(f"yield prefactor  = {fmt(pred.prefactor)}")
    print("target amplitudes = " + ", ".join(f"{z.real:+.12f}{z.imag:+.12f}j" for z in pred.target))
    final = traj.final
    print(f"final step {final.n}: yield {fmt(final.yield_p)}, fidelity {fmt(final.fidelity)}")

    dim = v.shape[0]
    header = ["n", "yield", "fidelity", "purity"]
    if scenario.run.record_states:
        header += [f"rho_{i}{j}_{part}" for i in range(dim) for j in range(dim) for part in ("re", "im")]
    rows = []
    for s in traj.steps:
        row = [s.n, s.yield_p, s.fidelity, s.purity]
        if scenario.run.record_states:
            for z in s.rho.reshape(-1):
                row += [z.real, z.imag]
        rows.append(row)
    path, fmt_name = resolve_output(scenario, args, "trajectory")
    _write(path, fmt_name, header, rows, {"summary": summary})
    if traj.truncated:
        raise CliFailure(EXIT_UNDERFLOW, f"yield underflow after step {final.n}; trajectory truncated")
    return EXIT_OK


def _refine_rows(scenario: ScenarioFile, cfg, results: list[SweepResult]) -> list[SweepResult]:
    n = scenario.sweep.refine
    if n == 0:
        return []
    axes = scenario.sweep.axes
    bounds = {a.param: (min(a.min, a.max), max(a.min, a.max)) for a in axes}
    steps = {a.param: (a.max - a.min) / max(a.n_points - 1, 1) or 0.1 for a in axes}
    objective = score_objective(cfg, scenario.sweep.objective, scenario.sweep.weight)
    starts = [r for r in results if not r.degenerate][:n]
    out = []
    for r in starts:
        point = refine(r.point, objective, step=steps, bounds=bounds)
        score, pred, degen, note = evaluate(cfg.with_params(**point), scenario.sweep.weight)
        out.append(SweepResult(point, score, pred, degen, refined=True, note=note))
    return out


def cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    if scenario.sweep is None:
        raise ScenarioError("scenario has no sweep block")
    rng = np.random.default_rng(0 if args.seed is None else args.seed)
    grid = scenario.sweep_grid(rng)
    try:
        results = sweep(grid, workers=args.workers)
    except GridTooLarge as exc:
        raise CliFailure(EXIT_GRID, str(exc)) from None
    refined = _refine_rows(scenario, grid.model, results)
    names = [a.param for a in scenario.sweep.axes]
    header = names + ["lambda0_abs", "gap_ratio", "loss", "combined", "prefactor", "degenerate", "refined"]
    rows = []
    for r in results + refined:
        pref = r.prediction.prefactor if r.prediction is not None else math.nan
        rows.append(
            [r.point[n] for n in names]
            + [r.score.lambda0_abs, r.score.gap_ratio, r.score.loss_unimodularity, r.score.combined, pref, r.degenerate, r.refined]
        )
    best = (refined or results)[0]
    print(f"{len(results)} grid points, {len(refined)} refined")
    print("best: " + ", ".join(f"{k}={fmt(v)}" for k, v in best.point.items())
          + f"  |lambda0|={fmt(best.score.lambda0_abs)} gap={fmt(best.score.gap_ratio)}")
    path, fmt_name = resolve_output(scenario, args, "sweep")
    _write(path, fmt_name, header, rows, {"model": scenario.model, "axes": names})
    return EXIT_OK


def cmd_verify(args) -> int:
    rows = duality.run_duality_suite(n_points=args.points)
    if args.format == "json":
        print(json.dumps([
            {"family": r.family, "max_residual": r.max_residual, "points": r.n_points, "passed": r.passed}
            for r in rows
        ], indent=1))
    else:
        print(f"{'family':<18}{'points':>8}{'max residual':>16}  status")
        for r in rows:
            print(f"{r.family:<18}{r.n_points:>8}{r.max_residual:>16.3e}  {'ok' if r.passed else 'FAIL'}")
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", default=argparse.SUPPRESS, help="output file path")
    common.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for random initial states")

    parser = argparse.ArgumentParser(prog="purify", description=__doc__.split("\n\n")[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", parents=[common], help="iterate the measurement-conditioned dynamics")
    p_run.add_argument("scenario")
    p_run.set_defaults(func=cmd_run)
    p_sweep = sub.add_parser("sweep", parents=[common], help="grid search for optimal parameters")
    p_sweep.add_argument("scenario")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)
    p_verify = sub.add_parser("verify", parents=[common], help="closed form vs brute force table")
    p_verify.add_argument("--points", type=int, default=200)
    p_verify.set_defaults(func=cmd_verify)
    return parser


def _report_error(args, code: int, message: str):
    if getattr(args, "format", None) == "json":
        print(json.dumps({"error": message, "exit_code": code}), file=sys.stderr)
    else:
        print(f"error: {message}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    for name, default in (("output", None), ("format", None), ("seed", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        return args.func(args)
    except CliFailure as exc:
        _report_error(args, exc.code, str(exc))
        return exc.code
    except ScenarioError as exc:
        _report_error(args, EXIT_CONFIG, str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
