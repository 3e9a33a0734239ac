"""Design-space search over harvester parameters, plus calibration.

Objectives are built from engine metrics; constraints enter as linear
penalties so the simplex stays informative near the feasible boundary.
Search evaluations run a shortened scenario (two warmup gait periods plus
five evaluation periods) for speed; reports re-run the best point at the
full duration.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import engine, model
from .model import SimConfig

log = logging.getLogger(__name__)

OBJECTIVES = ("avg_load_power", "energy_per_step", "dc_steady")
CONSTRAINT_METRICS = ("max_stroke_excursion", "peak_cap_voltage", "settle_time")
COMPARATORS = ("<=", ">=")

EVAL_PERIODS = 7.0       # 2 warmup + 5 evaluation gait periods
GRID_CAP = 10_000        # max total grid points
CALIBRATION_TOL = 0.01   # V
CALIBRATION_MAX_ITERS = 60
INFEASIBLE = float("-inf")


class CalibrationError(RuntimeError):
    """The calibration target is not bracketed by the endpoint responses."""


@dataclass(frozen=True)
class OptimizationProblem:
    """Bounded parameter subset + objective + penalty constraints."""

    base: SimConfig
    variables: tuple  # of (dotted parameter path, lower, upper)
    objective: str = "avg_load_power"
    constraints: tuple = ()  # of (metric, comparator, limit)
    penalty_weight: float = 1.0

    def __post_init__(self):
        if len(self.variables) < 1:
            raise ValueError("at least one variable is required")
        for path, lo, hi in self.variables:
            if path not in model.KEY_PATHS:
                raise ValueError(f"unknown parameter path: {path}")
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"{path}: bounds must be finite with lower < upper")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        for metric, cmp_, _limit in self.constraints:
            if metric not in CONSTRAINT_METRICS:
                raise ValueError(f"constraint metric must be one of {CONSTRAINT_METRICS}")
            if cmp_ not in COMPARATORS:
                raise ValueError(f"comparator must be one of {COMPARATORS}")
        if not self.penalty_weight > 0:
            raise ValueError("penalty_weight must be strictly positive")

    @property
    def bounds(self) -> np.ndarray:
        return np.array([[lo, hi] for _p, lo, hi in self.variables])


@dataclass
class OptimizationReport:
    best_point: np.ndarray
    best_value: float
    evaluations: int
    trace: list = field(default_factory=list)  # (point tuple, value) history
    constraint_status: dict = field(default_factory=dict)  # metric -> slack
    best_value_full: float = float("nan")  # best re-run at full duration


def patch_config(problem: OptimizationProblem, point, full_duration=False) -> SimConfig:
    cfg = problem.base
    for (path, _lo, _hi), value in zip(problem.variables, point):
        cfg = model.set_path(cfg, path, float(value))
    if not full_duration:
        short = EVAL_PERIODS / cfg.gait.cadence
        if short < cfg.duration:
            cfg = model.set_path(cfg, "sim.duration", short)
    return cfg


def _metrics(result: engine.SimResult) -> dict:
    cfg = result.config
    duration = cfg.duration
    return {
        "avg_load_power": result.ledger.load_delivered / duration,
        "energy_per_step": result.ledger.load_delivered / (duration * cfg.gait.cadence),
        "dc_steady": result.dc_steady,
        "max_stroke_excursion": result.max_stroke,
        "peak_cap_voltage": result.peak_cap_voltage,
        "settle_time": math.inf if result.settle_time is None else result.settle_time,
    }


def _violation(metrics: dict, metric: str, cmp_: str, limit: float) -> float:
    value = metrics[metric]
    if cmp_ == "<=":
        return max(0.0, value - limit)
    return max(0.0, limit - value)


def evaluate(problem: OptimizationProblem, point) -> float:
    """Objective minus penalty at one in-bounds point; deterministic.

    Simulation failures yield -inf (infeasible) with a logged cause instead
    of raising.
    """
    point = np.asarray(point, dtype=float)
    bounds = problem.bounds
    if np.any(point < bounds[:, 0]) or np.any(point > bounds[:, 1]):
        raise ValueError("point lies outside the problem bounds")
    try:
        result = engine.run(patch_config(problem, point))
    except (engine.SolverError, model.ConfigError) as exc:
        log.warning("evaluation failed at %s: %s", point.tolist(), exc)
        return INFEASIBLE
    metrics = _metrics(result)
    value = metrics[problem.objective]
    for metric, cmp_, limit in problem.constraints:
        value -= problem.penalty_weight * _violation(metrics, metric, cmp_, limit)
    return value


def constraint_slacks(problem: OptimizationProblem, point) -> dict:
    """Signed slack per constraint at the full-duration rerun (positive =
    satisfied with margin)."""
    result = engine.run(patch_config(problem, point, full_duration=True))
    metrics = _metrics(result)
    slacks = {}
    for metric, cmp_, limit in problem.constraints:
        value = metrics[metric]
        slacks[f"{metric}{cmp_}{limit}"] = (limit - value) if cmp_ == "<=" \
            else (value - limit)
    return slacks


def full_duration_value(problem: OptimizationProblem, point) -> float:
    try:
        result = engine.run(patch_config(problem, point, full_duration=True))
    except (engine.SolverError, model.ConfigError):
        return INFEASIBLE
    metrics = _metrics(result)
    value = metrics[problem.objective]
    for metric, cmp_, limit in problem.constraints:
        value -= problem.penalty_weight * _violation(metrics, metric, cmp_, limit)
    return value


# -- search cores ------------------------------------------------------------

def grid_maximize(fn, bounds, points_per_axis: int):
    """Full Cartesian grid (bounds inclusive); ties keep the lowest
    lexicographic grid index. Returns (best_point, best_value, trace)."""
    bounds = np.asarray(bounds, dtype=float)
    dims = bounds.shape[0]
    if points_per_axis < 2:
        raise ValueError("points_per_axis must be >= 2")
    total = points_per_axis ** dims
    if total > GRID_CAP:
        raise ValueError(f"grid of {total} points exceeds the cap of {GRID_CAP}")
    axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in bounds]
    best_point = None
    best_value = -math.inf
    trace = []
    for combo in itertools.product(*axes):
        value = fn(np.array(combo))
        trace.append((tuple(combo), value))
        if best_point is None or value > best_value:
            best_point = np.array(combo)
            best_value = value
    return best_point, best_value, trace


def simplex_minimize(fn, bounds, start, max_evals: int, tol: float):
    """Nelder-Mead with standard coefficients (1, 2, 0.5, 0.5), box bounds
    enforced by clamping, initial edge 5% of each variable's range.

    Returns (best_point, best_value, evaluations, trace)."""
    bounds = np.asarray(bounds, dtype=float)
    dims = bounds.shape[0]
    start = np.clip(np.asarray(start, dtype=float), bounds[:, 0], bounds[:, 1])
    if max_evals < dims + 1:
        raise ValueError("max_evals must be at least dimension + 1")

    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5
    evals = 0
    trace = []

    def clamp(p):
        return np.clip(p, bounds[:, 0], bounds[:, 1])

    def call(p):
        nonlocal evals
        evals += 1
        value = fn(p)
        trace.append((tuple(p), value))
        return value

    verts = [start]
    for i in range(dims):
        p = start.copy()
        edge = 0.05 * (bounds[i, 1] - bounds[i, 0])
        p[i] = p[i] + edge if p[i] + edge <= bounds[i, 1] else p[i] - edge
        verts.append(clamp(p))
    values = [call(p) for p in verts]

    while evals < max_evals:
        order = np.argsort(values, kind="stable")
        verts = [verts[j] for j in order]
        values = [values[j] for j in order]
        if values[-1] - values[0] < tol:
            break
        centroid = np.mean(verts[:-1], axis=0)

        reflected = clamp(centroid + alpha * (centroid - verts[-1]))
        r_val = call(reflected)
        if values[0] <= r_val < values[-2]:
            verts[-1], values[-1] = reflected, r_val
            continue
        if r_val < values[0]:
            if evals >= max_evals:
                verts[-1], values[-1] = reflected, r_val
                break
            expanded = clamp(centroid + gamma * (centroid - verts[-1]))
            e_val = call(expanded)
            if e_val < r_val:
                verts[-1], values[-1] = expanded, e_val
            else:
                verts[-1], values[-1] = reflected, r_val
            continue
        if evals >= max_evals:
            break
        contracted = clamp(centroid + rho * (verts[-1] - centroid))
        c_val = call(contracted)
        if c_val < values[-1]:
            verts[-1], values[-1] = contracted, c_val
            continue
        for j in range(1, len(verts)):  # shrink toward the best vertex
            if evals >= max_evals:
                break
            verts[j] = clamp(verts[0] + sigma * (verts[j] - verts[0]))
            values[j] = call(verts[j])

    best = int(np.argmin(values))
    return verts[best], values[best], evals, trace


# -- spec operations ---------------------------------------------------------

def grid_search(problem: OptimizationProblem, points_per_axis: int) -> OptimizationReport:
    """Exhaustive baseline over the problem box."""
    point, value, trace = grid_maximize(
        lambda p: evaluate(problem, p), problem.bounds, points_per_axis)
    return OptimizationReport(
        best_point=point, best_value=value, evaluations=len(trace), trace=trace,
        constraint_status=constraint_slacks(problem, point),
        best_value_full=full_duration_value(problem, point))


def nelder_mead(problem: OptimizationProblem, start, max_evals: int = 200,
                tol: float = 1e-12) -> OptimizationReport:
    """Simplex search maximizing the penalized objective from `start`."""
    point, neg_value, evals, neg_trace = simplex_minimize(
        lambda p: -evaluate(problem, p), problem.bounds, start, max_evals, tol)
    trace = [(p, -v) for p, v in neg_trace]
    best_value = evaluate(problem, point)  # re-evaluation integrity
    return OptimizationReport(
        best_point=np.asarray(point), best_value=best_value,
        evaluations=evals, trace=trace,
        constraint_status=constraint_slacks(problem, point),
        best_value_full=full_duration_value(problem, point))


def _measured_peak_emf(cfg: SimConfig, path: str, value: float) -> float:
    """Open-loop peak EMF at one parameter value (reaction force disabled,
    as in a generator-only measurement)."""
    probe = model.set_path(cfg, path, value)
    probe = model.set_path(probe, "sim.em_coupling", False)
    return engine.run(probe).peak_emf


def calibrate(target_peak_emf: float, variable: str = "design.magnet_moment",
              bounds: tuple = (0.01, 10.0),
              base: SimConfig | None = None) -> SimConfig:
    """Bisect the chosen scalar until the open-loop peak EMF matches the
    target within 0.01 V; returns the patched measurement config
    (em_coupling stays disabled, mirroring a generator-only simulation).

    Requires the peak EMF to be monotone over the bounds; raises
    CalibrationError when the endpoints do not bracket the target.
    """
    cfg = base if base is not None else model.reference_design()
    lo, hi = float(bounds[0]), float(bounds[1])
    if not lo < hi:
        raise ValueError("bounds must satisfy lo < hi")
    peak_lo = _measured_peak_emf(cfg, variable, lo)
    peak_hi = _measured_peak_emf(cfg, variable, hi)
    if not (min(peak_lo, peak_hi) <= target_peak_emf <= max(peak_lo, peak_hi)):
        raise CalibrationError(
            f"target {target_peak_emf} V not bracketed: endpoints give "
            f"{peak_lo:.4f} V and {peak_hi:.4f} V over [{lo}, {hi}]")
    increasing = peak_hi >= peak_lo
    value = 0.5 * (lo + hi)
    peak = _measured_peak_emf(cfg, variable, value)
    for _ in range(CALIBRATION_MAX_ITERS):
        if abs(peak - target_peak_emf) < CALIBRATION_TOL:
            break
        if (peak < target_peak_emf) == increasing:
            lo = value
        else:
            hi = value
        value = 0.5 * (lo + hi)
        peak = _measured_peak_emf(cfg, variable, value)
    calibrated = model.set_path(cfg, variable, value)
    return model.set_path(calibrated, "sim.em_coupling", False)


def reference_problem(base: SimConfig | None = None) -> OptimizationProblem:
    """The documented 3-variable harvesting problem used by tests and docs."""
    return OptimizationProblem(
        base=base if base is not None else model.reference_design(),
        variables=(
            ("design.spring_k", 1200.0, 3500.0),
            ("design.magnet_moment", 1.0, 8.0),
            ("circuit.load.resistance", 1e3, 2e5),
        ),
        objective="avg_load_power",
        constraints=(("peak_cap_voltage", "<=", 15.0),),
        penalty_weight=1.0,
    )


def problem_from_spec(cfg: SimConfig, spec: dict) -> OptimizationProblem:
    """Build a problem from the optimize.* key group of a config file.

    Variables are "path,lo,hi" strings; constraints "metric,cmp,limit".
    """
    if "optimize.variables" not in spec:
        raise model.ConfigError("optimize.variables: required for optimization")
    variables = []
    for entry in spec["optimize.variables"]:
        parts = [s.strip() for s in str(entry).split(",")]
        if len(parts) != 3:
            raise model.ConfigError(
                f"optimize.variables: expected 'path,lo,hi', got {entry!r}")
        variables.append((parts[0], float(parts[1]), float(parts[2])))
    constraints = []
    for entry in spec.get("optimize.constraints", []):
        parts = [s.strip() for s in str(entry).split(",")]
        if len(parts) != 3:
            raise model.ConfigError(
                f"optimize.constraints: expected 'metric,cmp,limit', got {entry!r}")
        constraints.append((parts[0], parts[1], float(parts[2])))
    try:
        return OptimizationProblem(
            base=cfg,
            variables=tuple(variables),
            objective=spec.get("optimize.objective", "avg_load_power"),
            constraints=tuple(constraints),
            penalty_weight=spec.get("optimize.penalty_weight", 1.0),
        )
    except ValueError as exc:
        raise model.ConfigError(f"optimize: {exc}") from None
