"""Search for optimal purification settings.

A point is good when the leading eigenvalue is unimodular (no loss of
yield) and the others are small compared to it (fast convergence). The
combined score is ``(1 - |lambda0|)^2 + weight * gap_ratio^2``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .engine import AsymptoticPrediction, predict_asymptotics
from .errors import GridTooLarge, InvalidParams, NonFiniteObjective, NoSolutionInRange
from .linalg import eig_biorthogonal
from .models import (
    ModelConfig,
    OptimalityReport,
    SuccessiveParams,
    optimal_residual,
    projected_operator,
    successive_symmetric_check,
)

MAX_GRID_POINTS = 10**7


@dataclass(frozen=True)
class Axis:
    param: str
    min: float
    max: float
    n_points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.scale not in ("linear", "log"):
            raise InvalidParams(f"axis scale must be 'linear' or 'log', got {self.scale!r}")
        if self.n_points < 1:
            raise InvalidParams("an axis needs at least one point")
        if self.n_points == 1:
            if self.min != self.max:
                raise InvalidParams("a single-point axis needs min == max")
        elif not self.min < self.max:
            raise InvalidParams(f"axis {self.param}: min must be below max")
        if self.scale == "log" and self.min <= 0:
            raise InvalidParams("log-scaled axes need positive bounds")

    def values(self) -> np.ndarray:
        if self.n_points == 1:
            return np.array([self.min])
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.n_points)
        return np.linspace(self.min, self.max, self.n_points)


@dataclass(frozen=True)
class SweepGrid:
    axes: tuple[Axis, ...]
    model: ModelConfig
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not 1 <= len(self.axes) <= 3:
            raise InvalidParams("a sweep takes one to three axes")
        names = [a.param for a in self.axes]
        if len(set(names)) != len(names):
            raise InvalidParams("duplicate sweep axis")
        known = set(type(self.model.params).__dataclass_fields__)
        for n in names:
            if n not in known:
                raise InvalidParams(f"{self.model.kind} has no parameter {n!r}")

    @property
    def size(self) -> int:
        return math.prod(a.n_points for a in self.axes)

    def points(self):
        names = [a.param for a in self.axes]
        for combo in itertools.product(*(a.values() for a in self.axes)):
            yield dict(zip(names, (float(x) for x in combo)))


@dataclass(frozen=True)
class OptimalityScore:
    loss_unimodularity: float
    gap_ratio: float
    combined: float
    lambda0_abs: float

    @classmethod
    def from_magnitudes(cls, mags: Sequence[float], weight: float = 1.0) -> "OptimalityScore":
        l0 = float(mags[0])
        gap = float(mags[1] / l0) if len(mags) > 1 and l0 > 0 else (0.0 if l0 > 0 else 1.0)
        loss = (1.0 - l0) ** 2
        return cls(loss, gap, loss + weight * gap**2, l0)


@dataclass(frozen=True)
class SweepResult:
    point: dict
    score: OptimalityScore
    prediction: AsymptoticPrediction | None
    degenerate: bool = False
    refined: bool = False
    note: str = field(default="", compare=False)


def evaluate(cfg: ModelConfig, weight: float = 1.0) -> tuple[OptimalityScore, AsymptoticPrediction | None, bool, str]:
    """Score one configuration; degenerate or defective spectra are flagged, not raised."""
    v = projected_operator(cfg)
    try:
        spec = eig_biorthogonal(v)
        mags = spec.magnitudes
    except ArithmeticError as exc:
        mags = np.sort(np.abs(np.linalg.eigvals(v)))[::-1]
        return OptimalityScore.from_magnitudes(mags, weight), None, True, type(exc).__name__
    score = OptimalityScore.from_magnitudes(mags, weight)
    try:
        pred = predict_asymptotics(spec, cfg.initial_state)
    except ArithmeticError as exc:
        return score, None, True, type(exc).__name__
    return score, pred, False, ""


def _evaluate_point(args):
    cfg, point, weight = args
    score, pred, degen, note = evaluate(cfg.with_params(**point), weight)
    return SweepResult(point, score, pred, degen, note=note)


def _sort_key(r: SweepResult):
    return (r.score.combined, tuple(sorted(r.point.items())))


def sweep(grid: SweepGrid, workers: int = 1) -> list[SweepResult]:
    """Evaluate every grid point; results sorted by combined score, then by point."""
    if grid.size > MAX_GRID_POINTS:
        raise GridTooLarge(f"{grid.size} grid points exceed the limit of {MAX_GRID_POINTS}")
    jobs = ((grid.model, pt, grid.weight) for pt in grid.points())
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_point, jobs, chunksize=64))
    else:
        results = [_evaluate_point(j) for j in jobs]
    return sorted(results, key=_sort_key)


def score_objective(cfg: ModelConfig, selector: str = "combined", weight: float = 1.0) -> Callable[[dict], float]:
    """Objective over parameter points built from one field of OptimalityScore."""

    def f(point: dict) -> float:
        score, _, _, _ = evaluate(cfg.with_params(**point), weight)
        return float(getattr(score, selector))

    return f


def refine(
    start: dict,
    objective: Callable[[dict], float],
    step: float | dict = 0.1,
    bounds: dict | None = None,
    min_step: float = 1e-10,
    max_iter: int = 500,
) -> dict:
    """Coordinate descent with bounded Brent line searches.

    Every free coordinate in ``start`` is searched inside ``[x - step, x + step]``
    (``step`` may be a per-coordinate dict); a move is accepted only if it
    lowers the objective, and the steps halve after a sweep without
    improvement. Stops once every step is below
    ``min_step`` or after ``max_iter`` sweeps. The returned point never
    scores worse than ``start``.
    """
    point = {k: float(v) for k, v in start.items()}
    best = objective(point)
    if not math.isfinite(best):
        raise NonFiniteObjective(f"objective is not finite at the start point ({best!r})")
    bounds = bounds or {}
    steps = {k: float(step[k] if isinstance(step, dict) else step) for k in point}
    for _ in range(max_iter):
        if max(steps.values()) < min_step:
            break
        improved = False
        for name in point:
            x0 = point[name]
            lo, hi = x0 - steps[name], x0 + steps[name]
            if name in bounds:
                lo, hi = max(lo, bounds[name][0]), min(hi, bounds[name][1])
            if not lo < hi:
                continue

            def line(x, name=name):
                val = objective({**point, name: x})
                return val if math.isfinite(val) else math.inf

            res = minimize_scalar(line, bounds=(lo, hi), method="bounded", options={"xatol": min_step * 0.1})
            if res.fun < best:
                best = float(res.fun)
                point[name] = float(res.x)
                improved = True
        if not improved:
            steps = {k: s * 0.5 for k, s in steps.items()}
    return point


# ---------------------------------------------------------------------------
# symmetric successive-interaction optimum

SYMMETRIC_NAMES = ("omega", "g", "t", "tau")


@dataclass(frozen=True)
class OptimalSolution:
    point: dict
    residual: float
    params: SuccessiveParams
    report: OptimalityReport


def _symmetric_values(template: SuccessiveParams) -> dict:
    return {"omega": template.omega, "g": template.g_a, "t": template.t_a, "tau": template.tau_a}


def _residual_vec(values: dict) -> np.ndarray:
    r = optimal_residual(values["omega"], values["g"], values["t"], values["tau"])
    return np.array([r.real, r.imag])


def _newton(values: dict, free: tuple[str, str], max_iter: int = 60, rel_step: float = 1e-6) -> dict | None:
    """Damped 2-D Newton on (Re r, Im r) with a forward-difference Jacobian."""
    x = np.array([values[n] for n in free], dtype=float)

    def fun(xv):
        return _residual_vec({**values, free[0]: xv[0], free[1]: xv[1]})

    f = fun(x)
    for _ in range(max_iter):
        norm = np.linalg.norm(f)
        if norm < 1e-14:
            break
        jac = np.empty((2, 2))
        for k in range(2):
            h = rel_step * max(abs(x[k]), 1.0)
            dx = np.zeros(2)
            dx[k] = h
            jac[:, k] = (fun(x + dx) - f) / h
        try:
            delta = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-4:
            trial = x + lam * delta
            ft = fun(trial)
            if np.linalg.norm(ft) < norm:
                x, f = trial, ft
                break
            lam *= 0.5
        else:
            return None
    return {**values, free[0]: float(x[0]), free[1]: float(x[1])}


def solve_optimal_condition(
    template: SuccessiveParams,
    free: tuple[str, str] = ("t", "tau"),
    box: dict | None = None,
    n_grid: int = 60,
    n_seeds: int = 20,
    residual_tol: float = 1e-8,
    dedup_tol: float = 1e-6,
    constraint_tol: float = 1e-6,
) -> list[OptimalSolution]:
    """Roots of the symmetric optimality condition in two free parameters.

    The other two of (omega, g, t, tau) are taken from ``template`` (which must
    be symmetric). Seeds are the ``n_seeds`` best points of an
    ``n_grid x n_grid`` grid over ``box``; each is polished by Newton. A root is
    kept only if it lies in the box, satisfies the constraints, and its
    spectrum is verified: the target eigen-residual and ``| |lambda_psi| - 1 |``
    are below 1e-8 and all other magnitudes stay below ``1 - 1e-6``.

    Raises
    ------
    NoSolutionInRange
        If no admissible root is found.
    """
    if not template.is_symmetric:
        raise InvalidParams("template must have symmetric A/B parameters")
    free = tuple(free)
    if len(free) != 2 or len(set(free)) != 2 or any(n not in SYMMETRIC_NAMES for n in free):
        raise InvalidParams(f"choose two distinct free parameters from {SYMMETRIC_NAMES}")
    base = _symmetric_values(template)
    box = box or {n: (0.05, 2 * math.pi) for n in free}
    (lo0, hi0), (lo1, hi1) = box[free[0]], box[free[1]]
    g0 = np.linspace(lo0, hi0, n_grid)
    g1 = np.linspace(lo1, hi1, n_grid)
    scored = []
    for a in g0:
        for b in g1:
            vals = {**base, free[0]: float(a), free[1]: float(b)}
            scored.append((float(np.linalg.norm(_residual_vec(vals))), float(a), float(b)))
    scored.sort()

    found: list[OptimalSolution] = []
    eps = 1e-12
    for _, a, b in scored[:n_seeds]:
        sol = _newton({**base, free[0]: a, free[1]: b}, free)
        if sol is None:
            continue
        if not (lo0 - eps <= sol[free[0]] <= hi0 + eps and lo1 - eps <= sol[free[1]] <= hi1 + eps):
            continue
        res = float(np.linalg.norm(_residual_vec(sol)))
        if res >= residual_tol:
            continue
        if any(
            max(abs(sol[n] - other.point[n]) for n in SYMMETRIC_NAMES) < dedup_tol for other in found
        ):
            continue
        if any(sol[n] < 0 for n in ("t", "tau")):
            continue
        params = replace(
            template,
            omega=sol["omega"], g_a=sol["g"], g_b=sol["g"],
            t_a=sol["t"], t_b=sol["t"], tau_a=sol["tau"], tau_b=sol["tau"],
        )
        report = successive_symmetric_check(params, constraint_tol)
        if not report.constraints_ok:
            continue
        if report.eigen_residual >= 1e-8 or abs(abs(report.lambda_psi) - 1) >= 1e-8:
            continue
        if report.max_other_magnitude >= 1 - 1e-6:
            continue
        found.append(OptimalSolution(sol, res, params, report))
    if not found:
        raise NoSolutionInRange(f"no admissible root of the optimality condition for free={free} in {box}")
    return sorted(found, key=lambda s: tuple(s.point[n] for n in SYMMETRIC_NAMES))
