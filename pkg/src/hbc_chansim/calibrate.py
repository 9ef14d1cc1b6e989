"""Fit channel parameters to measured gain curves.

Free parameters are searched in log10 space with a bounded Nelder-Mead
simplex. The objective is the RMS dB error between model and measured gains
over every measured (scenario, frequency) point.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, Scenario, channel_gain_curve
from .errors import AllEvaluationsFailed, HBCError, InvalidParams

REFLECT = 1.0
EXPAND = 2.0
CONTRACT = 0.5
SHRINK = 0.5

DEFAULT_BUDGET = 2000
DIAMETER_TOL = 1e-6
INITIAL_STEP = 0.1  # decades
DEFAULT_SPAN = 2.0  # decades either side of the initial value when no bounds given
RETURN_PATH_PARAMS = ("k_int", "c_gt", "c_gr_wireless", "c_gr_classical")


def objective_rmse_db(params: ChannelParams, measured) -> float:
    """RMS of (model - measured) gain over all points of ``measured`` curves.

    Returns ``inf`` if the model cannot be evaluated for ``params``.
    """
    measured = list(measured)
    if not measured:
        raise InvalidParams("no measured curves")
    sq = []
    try:
        for curve in measured:
            model = channel_gain_curve(Scenario(curve.daq_mode, curve.distance_cm), params, curve.freqs)
            diff = model - np.asarray(curve.gains)
            sq.extend((diff * diff).tolist())
    except HBCError:
        return math.inf
    total = math.fsum(sq)
    if not math.isfinite(total):
        return math.inf
    return math.sqrt(total / len(sq))


@dataclass(frozen=True)
class FitSpec:
    measured: tuple
    free: tuple = ("k_int",)
    log10_bounds: dict = field(default_factory=dict)
    initial: ChannelParams = field(default_factory=ChannelParams)
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    restarts: int = 1

    def __post_init__(self):
        object.__setattr__(self, "measured", tuple(self.measured))
        object.__setattr__(self, "free", tuple(self.free))
        names = ChannelParams.field_names()
        for n in self.free:
            if n not in names:
                raise InvalidParams(f"{n!r} is not a channel parameter")
        if len(set(self.free)) != len(self.free):
            raise InvalidParams("duplicate free parameter names")
        unknown = set(self.log10_bounds) - set(self.free)
        if unknown:
            raise InvalidParams(f"bounds given for non-free parameter(s): {sorted(unknown)}")
        bounds = {}
        for n in self.free:
            x0 = math.log10(getattr(self.initial, n))
            lo, hi = self.log10_bounds.get(n, (x0 - DEFAULT_SPAN, x0 + DEFAULT_SPAN))
            lo, hi = float(lo), float(hi)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise InvalidParams(f"bounds for {n} must be finite with lower < upper")
            if not lo <= x0 <= hi:
                raise InvalidParams(f"initial {n} = {10 ** x0:g} outside its bounds")
            bounds[n] = (lo, hi)
        object.__setattr__(self, "log10_bounds", bounds)
        if isinstance(self.budget, bool) or int(self.budget) != self.budget or self.budget < 0:
            raise InvalidParams("budget must be a non-negative integer")
        object.__setattr__(self, "budget", int(self.budget))


@dataclass(frozen=True)
class FitResult:
    params: ChannelParams
    rmse_db: float
    evaluations: int
    converged: bool
    initial_rmse_db: float
    failed_evaluations: int = 0


class _BudgetExhausted(Exception):
    pass


def _fold(x, lo, hi):
    """Reflect ``x`` back into ``[lo, hi]`` (repeatedly, for large excursions)."""
    w = hi - lo
    y = np.mod(x - lo, 2 * w)
    y = np.where(y > w, 2 * w - y, y)
    return lo + y


def nelder_mead(func, x0, lo, hi, budget, rng, restarts=1, step=INITIAL_STEP, tol=DIAMETER_TOL):
    """Minimise ``func`` inside the box ``[lo, hi]``.

    ``func`` is called at most ``budget`` times. Returns
    ``(x_best, f_best, n_evals, converged)``; the best point seen is returned
    even when the budget runs out mid-iteration.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(x0)
    state = {"n": 0, "best_x": np.asarray(x0, dtype=float), "best_f": math.inf}

    def f(x):
        if state["n"] >= budget:
            raise _BudgetExhausted
        state["n"] += 1
        v = func(x)
        if v < state["best_f"]:
            state["best_f"], state["best_x"] = v, x.copy()
        return v

    def simplex_around(x, steps):
        pts = [x.copy()]
        for i in range(n):
            y = x.copy()
            s = steps[i]
            y[i] = y[i] + s if y[i] + s <= hi[i] else y[i] - s
            pts.append(_fold(y, lo, hi))
        return pts

    converged = False
    x_start = _fold(np.asarray(x0, dtype=float), lo, hi)
    steps = np.full(n, step)
    try:
        for attempt in range(restarts + 1):
            pts = simplex_around(x_start, steps)
            vals = [f(p) for p in pts]
            converged = False
            while True:
                order = np.argsort(vals, kind="stable")
                pts = [pts[i] for i in order]
                vals = [vals[i] for i in order]
                diameter = max(float(np.max(np.abs(p - pts[0]))) for p in pts[1:])
                if diameter < tol:
                    converged = True
                    break
                centroid = np.mean(pts[:-1], axis=0)
                worst = pts[-1]
                xr = _fold(centroid + REFLECT * (centroid - worst), lo, hi)
                fr = f(xr)
                if fr < vals[0]:
                    xe = _fold(centroid + EXPAND * (xr - centroid), lo, hi)
                    fe = f(xe)
                    pts[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
                    continue
                if fr < vals[-2]:
                    pts[-1], vals[-1] = xr, fr
                    continue
                if fr < vals[-1]:
                    xc = _fold(centroid + CONTRACT * (xr - centroid), lo, hi)
                    fc = f(xc)
                    if fc <= fr:
                        pts[-1], vals[-1] = xc, fc
                        continue
                else:
                    xc = _fold(centroid + CONTRACT * (worst - centroid), lo, hi)
                    fc = f(xc)
                    if fc < vals[-1]:
                        pts[-1], vals[-1] = xc, fc
                        continue
                best = pts[0]
                for i in range(1, n + 1):
                    pts[i] = _fold(best + SHRINK * (pts[i] - best), lo, hi)
                    vals[i] = f(pts[i])
            if attempt == restarts:
                break
            # jittered restart around the best point to escape a collapsed simplex
            x_start = state["best_x"].copy()
            steps = step * rng.uniform(0.5, 1.5, size=n)
    except _BudgetExhausted:
        converged = False
    return state["best_x"], state["best_f"], state["n"], converged


def fit(spec: FitSpec) -> FitResult:
    """Calibrate ``spec.free`` parameters against ``spec.measured``.

    The initial point is evaluated once outside the budget, so ``budget=0``
    returns the initial guess and its RMSE. Never returns a point worse than
    the initial guess.
    """
    if not spec.measured:
        raise InvalidParams("no measured curves to fit")
    failures = 0

    def params_at(x):
        return spec.initial.replace(**{n: float(10.0 ** v) for n, v in zip(spec.free, x)})

    def func(x):
        nonlocal failures
        try:
            p = params_at(x)
        except InvalidParams:
            failures += 1
            return math.inf
        v = objective_rmse_db(p, spec.measured)
        if not math.isfinite(v):
            failures += 1
        return v

    initial_rmse = objective_rmse_db(spec.initial, spec.measured)
    if not spec.free:
        return FitResult(spec.initial, initial_rmse, 0, True, initial_rmse, 0)
    if spec.budget == 0:
        if not math.isfinite(initial_rmse):
            raise AllEvaluationsFailed("initial guess cannot be evaluated and budget is 0")
        return FitResult(spec.initial, initial_rmse, 0, False, initial_rmse, 0)

    x0 = np.array([math.log10(getattr(spec.initial, n)) for n in spec.free])
    lo = [spec.log10_bounds[n][0] for n in spec.free]
    hi = [spec.log10_bounds[n][1] for n in spec.free]
    rng = np.random.default_rng(spec.seed)
    x_best, f_best, n_evals, converged = nelder_mead(func, x0, lo, hi, spec.budget, rng, restarts=spec.restarts)

    if not math.isfinite(f_best) and not math.isfinite(initial_rmse):
        raise AllEvaluationsFailed(f"all {n_evals} objective evaluations failed")
    if not f_best < initial_rmse:
        return FitResult(spec.initial, initial_rmse, n_evals, converged, initial_rmse, failures)
    return FitResult(params_at(x_best), f_best, n_evals, converged, initial_rmse, failures)


def params_block_json(params: ChannelParams) -> str:
    """Fitted parameters as a config-file ``params`` block."""
    return json.dumps({"params": params.as_dict()}, indent=2, sort_keys=True) + "\n"
