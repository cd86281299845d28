"""Growth exponents, convexity, critical entropic index and saturation times."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from .entropy import EntropySeries, Functional, GIBBS, entropy_series, mean_series
from .theory import theta


class AnalysisError(RuntimeError):
    """Base class for fit and bracketing failures."""


class FitError(AnalysisError):
    pass


class BracketError(AnalysisError):
    pass


class ModelViolationError(AnalysisError):
    def __init__(self, message, table):
        super().__init__(message)
        self.table = table


class NotSaturatedError(AnalysisError):
    pass


MIN_FIT_POINTS = 8
LINEAR_ATOL = 1e-9


@dataclass
class PowerLawFit:
    exponent: float
    prefactor: float
    stderr: float
    window: tuple[int, int]
    n_points: int

    def report(self, inputs=None) -> dict:
        return fit_report(self.exponent, self.stderr, self.window, inputs)


@dataclass
class CriticalQResult:
    q_c: float
    bracket: tuple[float, float]
    alpha_table: dict[float, float]
    tol: float
    window: tuple[int, int]
    direction: str
    rate: float | None = None
    scan: dict[float, float] = field(default_factory=dict)

    def report(self, inputs=None) -> dict:
        out = fit_report(self.q_c, 0.5 * (self.bracket[1] - self.bracket[0]), self.window, inputs)
        out.update(
            bracket=list(self.bracket),
            direction=self.direction,
            rate=self.rate,
            alpha_table={f"{q:.6g}": a for q, a in sorted(self.alpha_table.items())},
        )
        return out


def fit_report(estimate, stderr, window, inputs=None) -> dict:
    """JSON-ready fit summary with a hash of the inputs it was computed from."""
    blob = json.dumps(inputs, sort_keys=True, default=_jsonable).encode()
    return {
        "estimate": float(estimate),
        "stderr": float(stderr),
        "window": [int(w) for w in window] if window is not None else None,
        "inputs_hash": hashlib.sha256(blob).hexdigest()[:16],
    }


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, np.generic):
        return x.item()
    if hasattr(x, "__dataclass_fields__"):
        return asdict(x)
    return str(x)


def _select(series: EntropySeries, window):
    t = np.asarray(series.kicks, dtype=float)
    y = np.asarray(series.values, dtype=float)
    if window is None:
        mask = t > 0
    else:
        lo, hi = window
        mask = (t >= lo) & (t <= hi)
    return t[mask], y[mask]


def fit_power_law(series: EntropySeries, window=None, min_points: int = MIN_FIT_POINTS) -> PowerLawFit:
    """Least-squares line through ``(ln t, ln S)`` over ``window = (lo, hi)`` (inclusive)."""
    t, y = _select(series, window)
    if len(t) < min_points:
        raise FitError(f"need at least {min_points} points in the window, got {len(t)}")
    if np.any(y <= 0) or np.any(t <= 0):
        raise FitError("power-law fit needs strictly positive times and values")
    if np.ptp(np.log(t)) == 0:
        raise FitError("degenerate window")
    res = stats.linregress(np.log(t), np.log(y))
    stderr = float(res.stderr) if np.isfinite(res.stderr) else 0.0
    return PowerLawFit(float(res.slope), float(np.exp(res.intercept)), stderr,
                       (int(t[0]), int(t[-1])), len(t))


def classify_convexity(series: EntropySeries, window=None, band: float = 2.0) -> str:
    """``'convex'``, ``'linear'`` or ``'concave'`` from the log-log growth exponent."""
    fit = fit_power_law(series, window)
    if fit.exponent - band * fit.stderr > 1 + LINEAR_ATOL:
        return "convex"
    if fit.exponent + band * fit.stderr < 1 - LINEAR_ATOL:
        return "concave"
    return "linear"


def saturation_time(series: EntropySeries, fraction: float = 0.5, initial: float | None = None) -> float:
    """First time the series reaches ``fraction`` of its plateau.

    The plateau is the mean of the last 10% of samples.  The crossing is
    interpolated linearly between the bracketing samples.  When ``initial``
    is given it is used as the value at ``t = 0``, which lets crossings
    before the first recorded kick be located.
    """
    t = np.asarray(series.kicks, dtype=float)
    y = np.asarray(series.values, dtype=float)
    n_tail = max(1, int(np.ceil(0.1 * len(y))))
    plateau = y[-n_tail:].mean()
    level = fraction * plateau
    if initial is not None:
        t = np.concatenate([[0.0], t])
        y = np.concatenate([[initial], y])
    above = np.nonzero(y >= level)[0]
    if plateau <= 0 or len(above) == 0:
        raise NotSaturatedError("series never reaches the requested fraction of its plateau")
    i = above[0]
    if i == 0:
        return float(t[0])
    t0, t1, y0, y1 = t[i - 1], t[i], y[i - 1], y[i]
    return float(t0 + (level - y0) * (t1 - t0) / (y1 - y0))


def default_window(series: EntropySeries, start: int = 1, min_points: int = MIN_FIT_POINTS,
                   initial: float | None = 0.0) -> tuple[int, int]:
    """Growth window ``[start, t_S]`` widened to at least ``min_points`` samples."""
    t_s = saturation_time(series, 0.5, initial)
    kicks = np.asarray(series.kicks)
    inside = kicks[kicks >= start]
    if len(inside) < min_points:
        raise FitError("series too short for the default window")
    hi = max(int(np.floor(t_s)), int(inside[min_points - 1]))
    return int(start), hi


def _as_list(trajs):
    return list(trajs) if isinstance(trajs, (list, tuple)) else [trajs]


def averaged_series(trajs, functional=GIBBS) -> EntropySeries:
    """Entropy series averaged over noise realizations."""
    series = [entropy_series(tr, functional) for tr in _as_list(trajs)]
    return mean_series(series)[0] if len(series) > 1 else series[0]


def find_critical_q(trajs, q_range=(0.05, 0.95), window=None, tol: float = 0.005,
                    scan_points: int = 19) -> CriticalQResult:
    """Entropic index at which the Tsallis entropy grows linearly.

    Works on stored spectra only: ``trajs`` is one trajectory or a list of
    noise realizations sharing a time grid, whose entropy series are averaged
    before fitting.  The growth exponent ``alpha(q)`` is first scanned on a
    grid to confirm it is monotone; bisection on ``alpha(q) - 1`` follows.
    """
    trajs = _as_list(trajs)
    if window is None:
        window = default_window(averaged_series(trajs, GIBBS))
    cache: dict[float, float] = {}

    def alpha(q):
        q = float(q)
        if q not in cache:
            s = averaged_series(trajs, Functional("tsallis", q))
            cache[q] = fit_power_law(s, window).exponent
        return cache[q]

    lo, hi = map(float, q_range)
    grid = np.linspace(lo, hi, scan_points)
    values = np.array([alpha(q) for q in grid])
    scan = dict(zip(grid.tolist(), values.tolist()))
    steps = np.diff(values)
    slack = 1e-6 * max(1.0, np.abs(values).max())
    if np.all(steps <= slack):
        direction = "decreasing"
    elif np.all(steps >= -slack):
        direction = "increasing"
    else:
        raise ModelViolationError("alpha(q) is not monotone over the q range", dict(cache))
    g_lo, g_hi = values[0] - 1, values[-1] - 1
    if g_lo * g_hi > 0:
        raise BracketError(
            f"alpha(q) - 1 does not change sign on [{lo}, {hi}] "
            f"(alpha = {values[0]:.3f} .. {values[-1]:.3f})"
        )
    # start bisection from the tightest grid bracket
    j = int(np.nonzero(np.sign(values[:-1] - 1) != np.sign(values[1:] - 1))[0][0])
    a, b = grid[j], grid[j + 1]
    ga = alpha(a) - 1
    while b - a > tol:
        mid = 0.5 * (a + b)
        gm = alpha(mid) - 1
        if gm == 0:
            a = b = mid
            break
        if np.sign(gm) == np.sign(ga):
            a, ga = mid, gm
        else:
            b = mid
    q_c = 0.5 * (a + b)
    rate = None
    try:
        lin = averaged_series(trajs, Functional("tsallis", q_c))
        t, y = _select(lin, window)
        rate = float(np.polyfit(t, y, 1)[0])
    except (FitError, ValueError, np.linalg.LinAlgError):
        pass
    return CriticalQResult(q_c, (float(a), float(b)), dict(cache), tol, tuple(window), direction, rate, scan)


def fit_theta(points) -> tuple[float, float]:
    """Scaling exponent from ``(D, t_S)`` pairs: minus the slope of ``ln t_S`` vs ``ln D``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 4:
        raise FitError("need at least 4 (D, t_S) points")
    if np.any(pts <= 0):
        raise FitError("D and t_S must be positive")
    if np.ptp(np.log(pts[:, 0])) == 0:
        raise FitError("all D values coincide")
    res = stats.linregress(np.log(pts[:, 0]), np.log(pts[:, 1]))
    return float(-res.slope), float(res.stderr)


def log_slope(points) -> float:
    """Plain log-log slope of ``t_S`` against ``D`` for two or more points."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise FitError("need at least 2 points")
    return float(np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)[0])


def theta_from_alpha(alpha: float) -> float:
    return 1.0 / alpha


__all__ = [
    "AnalysisError", "FitError", "BracketError", "ModelViolationError", "NotSaturatedError",
    "PowerLawFit", "CriticalQResult", "fit_power_law", "classify_convexity", "saturation_time",
    "default_window", "averaged_series", "find_critical_q", "fit_theta", "log_slope",
    "theta_from_alpha", "fit_report", "theta",
]
