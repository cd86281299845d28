"""Experiment pipelines behind the command-line runner.

Each ``run_*`` function simulates (or reloads) the ensemble trajectories it
needs, writes plain CSV/JSON files into one directory per experiment and
returns a dictionary summarizing what it found.  Dynamics are run once per
``(params, D, seed)``; every entropy functional and every ``q`` is computed
from the stored spectra.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    AnalysisError,
    averaged_series,
    classify_convexity,
    default_window,
    find_critical_q,
    fit_power_law,
    fit_report,
    fit_theta,
    log_slope,
    saturation_time,
)
from .entropy import GIBBS, Functional, entropy_series, mean_series
from .persist import write_json, write_series_csv, write_table_csv
from .rotor import NoiseModel, RotorParams, default_basis_size
from .spectrum import SpectrumTrajectory, evolve_ensemble, sampling_times
from .theory import theta

log = logging.getLogger(__name__)

FIG3_Q = [0.155, 0.205, 0.255, 0.280, 0.305, 0.330, 0.335, 0.405, 0.530, 0.555, 0.805]
LONG_RUN_BASIS = 2**20
# seconds per (member, kick) per M*log2(M), measured on one core
COST_PER_MLOGM = 6e-9

EXPERIMENTS = ("fig1", "fig2", "fig3", "fig4", "q-of-hbar", "custom")

DEFAULTS = {
    "fig1": dict(hbar=[0.01, 0.05, 0.1], sqrt_D=[0.002]),
    "fig2": dict(hbar=[0.01], sqrt_D=[0.002, 0.006, 0.01, 0.02, 0.05]),
    "fig3": dict(hbar=[0.01], sqrt_D=[0.002]),
    "fig4": dict(hbar=[0.01], sqrt_D=[0.002, 0.003, 0.004, 0.006, 0.008, 0.01, 0.02, 0.05]),
    "q-of-hbar": dict(hbar=[0.1, 0.05, 0.01], sqrt_D=[0.002]),
    "custom": dict(hbar=[0.1], sqrt_D=[0.002]),
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``basis_size = 0`` picks the default grid for each ``hbar``; ``k``, when
    set, overrides the kick strength derived from ``K``.
    """

    experiment: str = "custom"
    hbar: list = field(default_factory=lambda: [0.1])
    K: float = 7.1
    k: float | None = None
    basis_size: int = 0
    tail_tolerance: float = 1e-6
    sqrt_D: list = field(default_factory=lambda: [0.002])
    q: list = field(default_factory=lambda: list(FIG3_Q))
    q_min: float = 0.05
    q_max: float = 0.95
    q_tol: float = 0.005
    q_c: float | None = None
    N: int = 10
    n_kicks: int = 40
    cadence: int = 0
    seeds: int = 8
    master_seed: int = 0
    renyi_order: float = 2.0
    window_start: int = 1
    band: float = 2.0
    out: str = "runs"

    @classmethod
    def for_experiment(cls, name: str, **overrides) -> "ExperimentConfig":
        if name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {name!r}")
        values = dict(DEFAULTS[name], experiment=name)
        values.update(overrides)
        cfg = cls(**values)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        for name in ("hbar", "sqrt_D", "q"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        if any(h <= 0 for h in self.hbar) or any(s < 0 for s in self.sqrt_D):
            raise ConfigError("hbar must be positive and sqrt_D non-negative")
        if self.N < 1 or self.n_kicks < 1 or self.seeds < 1:
            raise ConfigError("N, n_kicks and seeds must be positive")
        if self.cadence < 0:
            raise ConfigError("cadence must be >= 0")
        if self.basis_size and (self.basis_size < 2 or self.basis_size % 2):
            raise ConfigError("basis_size must be even")
        if not 0 < self.q_min < self.q_max:
            raise ConfigError("need 0 < q_min < q_max")

    def rotor(self, hbar: float) -> RotorParams:
        M = self.basis_size or default_basis_size(hbar)
        if self.k is not None:
            return RotorParams.from_k(hbar, self.k, M, self.tail_tolerance)
        return RotorParams(hbar, self.K, M, self.tail_tolerance)

    def seed_list(self) -> list[int]:
        """Master seeds of the noise realizations, derived from ``master_seed``."""
        ss = np.random.SeedSequence(self.master_seed)
        return [int(s) for s in ss.generate_state(self.seeds, np.uint32)]

    def digest(self) -> str:
        d = asdict(self)
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


_LIST_KEYS = {"hbar", "sqrt_D", "q"}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; lists are comma separated, ``#`` starts a comment."""
    types = {f.name: f for f in fields(ExperimentConfig)}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "D":
            out["sqrt_D"] = [math.sqrt(float(v)) for v in value.split(",")]
            continue
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            if key in _LIST_KEYS:
                out[key] = [float(v) for v in value.split(",") if v.strip()]
            elif key in ("experiment", "out"):
                out[key] = value
            elif key in ("basis_size", "N", "n_kicks", "cadence", "seeds", "master_seed", "window_start"):
                out[key] = int(value)
            elif value.lower() == "none":
                out[key] = None
            else:
                out[key] = float(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return out


def load_config(path, experiment: str | None = None, **overrides) -> ExperimentConfig:
    values = parse_config_text(Path(path).read_text()) if path else {}
    name = experiment or values.pop("experiment", "custom")
    values.pop("experiment", None)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.for_experiment(name, **values)


def estimated_cost(cfg: ExperimentConfig, hbars) -> float:
    """Rough single-core wall time in seconds for simulating ``hbars``."""
    total = 0.0
    for h in hbars:
        M = cfg.rotor(h).basis_size
        total += COST_PER_MLOGM * M * math.log2(M) * cfg.N * cfg.n_kicks * cfg.seeds * len(cfg.sqrt_D)
    return total


# --- trajectories -----------------------------------------------------------------


def _simulate(task):
    params, D, seed, N, n_kicks, cadence = task
    return evolve_ensemble(params, NoiseModel(D, seed), N, n_kicks, times=recording_times(n_kicks, cadence))


def recording_times(n_kicks: int, cadence: int = 0) -> np.ndarray:
    """Every ``cadence``-th kick plus the last one; ``cadence = 0`` picks the default schedule."""
    if cadence <= 0:
        return sampling_times(n_kicks)
    return np.unique(np.append(np.arange(cadence, n_kicks + 1, cadence), n_kicks))


class TrajectoryStore:
    """Runs each ``(params, D, seed)`` ensemble at most once.

    Trajectories are kept in memory and mirrored to CSV under ``root`` so a
    later run with the same configuration reloads them instead of
    re-simulating.  ``simulations`` counts actual dynamics runs.
    """

    def __init__(self, root=None, workers: int = 1):
        self.root = Path(root) if root is not None else None
        self.workers = max(1, int(workers or 1))
        self._mem: dict = {}
        self.simulations = 0

    @staticmethod
    def key(params: RotorParams, D: float, seed: int, N: int, n_kicks: int, cadence: int = 0) -> tuple:
        return (params.hbar, params.K, params.basis_size, params.tail_tolerance, D, seed, N, n_kicks,
                cadence)

    def _path(self, key) -> Path | None:
        if self.root is None:
            return None
        h = hashlib.sha256(repr(key).encode()).hexdigest()[:20]
        return self.root / f"traj_{h}.csv"

    def get_many(self, tasks) -> list[SpectrumTrajectory]:
        keys = [self.key(*t) for t in tasks]
        missing = []
        for key, task in zip(keys, tasks):
            if key in self._mem:
                continue
            path = self._path(key)
            if path is not None and path.exists():
                self._mem[key] = SpectrumTrajectory.from_csv(path)
            elif key not in [self.key(*m) for m in missing]:
                missing.append(task)
        if missing:
            if self.workers > 1 and len(missing) > 1:
                with ProcessPoolExecutor(self.workers) as pool:
                    results = list(pool.map(_simulate, missing))
            else:
                results = [_simulate(t) for t in missing]
            self.simulations += len(missing)
            for task, traj in zip(missing, results):
                key = self.key(*task)
                self._mem[key] = traj
                path = self._path(key)
                if path is not None:
                    path.parent.mkdir(parents=True, exist_ok=True)
                    traj.to_csv(path)
        return [self._mem[k] for k in keys]


# --- helpers ----------------------------------------------------------------------


class Run:
    """Output directory, manifest and trajectory access for one experiment."""

    def __init__(self, cfg: ExperimentConfig, store: TrajectoryStore | None = None,
                 long_runs: bool = False, workers: int = 1):
        cfg.validate()
        self.cfg = cfg
        self.dir = Path(cfg.out) / cfg.experiment
        self.dir.mkdir(parents=True, exist_ok=True)
        self.store = store or TrajectoryStore(Path(cfg.out) / "trajectories", workers)
        self.files: list[str] = []
        self.failures: list[str] = []
        self.skipped: list[float] = []
        self.hbars = self._admit(long_runs)

    def _admit(self, long_runs: bool) -> list[float]:
        long = [h for h in self.cfg.hbar if self.cfg.rotor(h).basis_size >= LONG_RUN_BASIS]
        cost = estimated_cost(self.cfg, long)
        if long and not long_runs:
            log.warning("skipping hbar=%s: long runs need --long-runs (estimated %.0f CPU-minutes)",
                        long, cost / 60)
            self.skipped = long
        elif long:
            log.warning("long runs enabled for hbar=%s: estimated %.0f CPU-minutes", long, cost / 60)
        admitted = [h for h in self.cfg.hbar if long_runs or h not in long]
        if not admitted:
            raise ConfigError(
                f"every requested hbar needs a long run (estimated {cost / 60:.0f} CPU-minutes); "
                "pass --long-runs to proceed"
            )
        return admitted

    def trajectories(self, hbar: float, sqrt_D: float) -> list[SpectrumTrajectory]:
        params = self.cfg.rotor(hbar)
        D = float(sqrt_D) ** 2
        tasks = [(params, D, s, self.cfg.N, self.cfg.n_kicks, self.cfg.cadence) for s in self.cfg.seed_list()]
        return self.store.get_many(tasks)

    def prefetch(self, pairs) -> None:
        """Simulate all ``(hbar, sqrt_D)`` combinations in one batch (parallel when enabled)."""
        tasks = []
        for hbar, sqrt_D in pairs:
            params = self.cfg.rotor(hbar)
            tasks += [(params, float(sqrt_D) ** 2, s, self.cfg.N, self.cfg.n_kicks, self.cfg.cadence)
                      for s in self.cfg.seed_list()]
        self.store.get_many(tasks)

    def series(self, trajs, functional, name: str, extra=None):
        per = [entropy_series(t, functional) for t in trajs]
        mean, err = mean_series(per) if len(per) > 1 else (per[0], np.zeros(len(per[0])))
        self.write_series(name, mean, err, extra)
        return mean

    def write_series(self, name, series, err=None, extra=None):
        write_series_csv(self.dir / f"{name}.csv", series, err, extra)
        self.files += [f"{name}.csv", f"{name}.json"]

    def table(self, name, header, rows):
        write_table_csv(self.dir / f"{name}.csv", header, rows)
        self.files.append(f"{name}.csv")

    def finish(self, summary: dict) -> dict:
        summary = dict(summary, failures=self.failures, skipped_hbar=self.skipped)
        write_json(self.dir / "summary.json", summary)
        manifest = {
            "experiment": self.cfg.experiment,
            "config": asdict(self.cfg),
            "config_hash": self.cfg.digest(),
            "seeds": self.cfg.seed_list(),
            "code_version": __version__,
            "files": sorted(set(self.files)) + ["summary.json"],
        }
        write_json(self.dir / "manifest.json", manifest)
        return summary


def _tag(hbar, sqrt_D=None) -> str:
    tag = f"h{hbar:g}"
    return tag if sqrt_D is None else f"{tag}_sqrtD{sqrt_D:g}"


def _mean_gibbs(trajs):
    return averaged_series(trajs, GIBBS)


def _window(run: Run, series):
    return default_window(series, start=run.cfg.window_start)


# --- experiments ------------------------------------------------------------------


def run_fig1(cfg: ExperimentConfig, **kw) -> dict:
    """Renyi entropy growth for each ``hbar`` with a power-law fit per curve."""
    run = Run(cfg, **kw)
    sqrt_D = cfg.sqrt_D[0]
    order = cfg.renyi_order
    run.prefetch((h, sqrt_D) for h in run.hbars)
    curves = {}
    for hbar in run.hbars:
        trajs = run.trajectories(hbar, sqrt_D)
        series = run.series(trajs, Functional("renyi", order), f"renyi_{_tag(hbar)}")
        entry = {"hbar": hbar, "sqrt_D": sqrt_D}
        try:
            window = _window(run, series)
            fit = fit_power_law(series, window)
            entry.update(alpha=fit.exponent, alpha_stderr=fit.stderr, window=list(window),
                         report=fit.report({"hbar": hbar, "sqrt_D": sqrt_D, "order": order}))
        except AnalysisError as exc:
            entry["error"] = str(exc)
            run.failures.append(f"fig1 hbar={hbar}: {exc}")
        curves[_tag(hbar)] = entry
    run.table("alpha", ["hbar", "sqrt_D", "alpha", "alpha_stderr"],
              [(c["hbar"], c["sqrt_D"], c.get("alpha"), c.get("alpha_stderr")) for c in curves.values()])
    return run.finish({"curves": curves, "renyi_order": order})


def run_fig2(cfg: ExperimentConfig, **kw) -> dict:
    """Gibbs entropy for each noise level, its convexity class and where it flips."""
    run = Run(cfg, **kw)
    hbar = run.hbars[0]
    levels = sorted(cfg.sqrt_D)
    run.prefetch((hbar, s) for s in levels)
    classes = {}
    rows = []
    for s in levels:
        series = run.series(run.trajectories(hbar, s), GIBBS, f"gibbs_{_tag(hbar, s)}")
        try:
            window = _window(run, series)
            fit = fit_power_law(series, window)
            cls = classify_convexity(series, window, cfg.band)
            rows.append((s, fit.exponent, fit.stderr, cls))
            classes[s] = cls
        except AnalysisError as exc:
            run.failures.append(f"fig2 sqrt_D={s}: {exc}")
            rows.append((s, None, None, "error"))
    run.table("convexity", ["sqrt_D", "alpha", "alpha_stderr", "class"], rows)
    flip = convexity_flip(classes)
    return run.finish({
        "hbar": hbar,
        "classes": {f"{s:g}": c for s, c in classes.items()},
        "flip_sqrt_D": flip,
        "flip_over_hbar": None if flip is None else flip / hbar,
    })


def convexity_flip(classes: dict) -> float | None:
    """Geometric midpoint between the last convex and the first following concave noise level."""
    levels = sorted(classes)
    last_convex = None
    for s in levels:
        if classes[s] == "convex":
            last_convex = s
        elif classes[s] == "concave" and last_convex is not None:
            return float(math.sqrt(last_convex * s)) if last_convex > 0 else float(s)
    return None


def run_fig3(cfg: ExperimentConfig, **kw) -> dict:
    """Tsallis entropy for the listed ``q`` values and the critical index by bisection."""
    run = Run(cfg, **kw)
    hbar, sqrt_D = run.hbars[0], cfg.sqrt_D[0]
    trajs = run.trajectories(hbar, sqrt_D)
    gibbs_mean = run.series(trajs, GIBBS, f"gibbs_{_tag(hbar, sqrt_D)}")
    summary = {"hbar": hbar, "sqrt_D": sqrt_D, "classes": {}}
    try:
        window = _window(run, gibbs_mean)
    except AnalysisError as exc:
        run.failures.append(f"fig3 window: {exc}")
        return run.finish(summary)
    summary["window"] = list(window)
    rows = []
    for q in cfg.q:
        series = run.series(trajs, Functional("tsallis", q), f"tsallis_q{q:g}")
        try:
            fit = fit_power_law(series, window)
            cls = classify_convexity(series, window, cfg.band)
            rows.append((q, fit.exponent, fit.stderr, cls))
            summary["classes"][f"{q:g}"] = cls
        except AnalysisError as exc:
            run.failures.append(f"fig3 q={q}: {exc}")
    run.table("tsallis_fits", ["q", "alpha", "alpha_stderr", "class"], rows)
    try:
        res = find_critical_q(trajs, (cfg.q_min, cfg.q_max), window, cfg.q_tol)
        summary["critical_q"] = res.report({"hbar": hbar, "sqrt_D": sqrt_D, "seeds": cfg.seed_list()})
        summary["q_c"] = res.q_c
        summary["theta_of_q_c"] = theta(res.q_c)
    except AnalysisError as exc:
        run.failures.append(f"fig3 critical q: {exc}")
        summary["q_c"] = None
        if hasattr(exc, "table"):
            summary["alpha_table"] = {f"{q:.6g}": a for q, a in sorted(exc.table.items())}
    summary["simulations"] = run.store.simulations
    return run.finish(summary)


def run_fig4(cfg: ExperimentConfig, **kw) -> dict:
    """Saturation time against noise strength and the fitted scaling exponent."""
    run = Run(cfg, **kw)
    hbar = run.hbars[0]
    levels = sorted(cfg.sqrt_D)
    run.prefetch((hbar, s) for s in levels)
    points = []
    for s in levels:
        series = run.series(run.trajectories(hbar, s), GIBBS, f"gibbs_{_tag(hbar, s)}")
        try:
            points.append((s, saturation_time(series, 0.5, initial=0.0)))
        except AnalysisError as exc:
            run.failures.append(f"fig4 sqrt_D={s}: {exc}")
    quantum = [(s * s, t) for s, t in points if s <= hbar]
    classical = [(s * s, t) for s, t in points if s > hbar]
    summary = {"hbar": hbar, "t_S": {f"{s:g}": t for s, t in points}}

    q_c = cfg.q_c
    if q_c is None:
        try:
            q_c = find_critical_q(run.trajectories(hbar, levels[0]), (cfg.q_min, cfg.q_max),
                                  None, cfg.q_tol).q_c
        except AnalysisError as exc:
            run.failures.append(f"fig4 critical q: {exc}")
    summary["q_c"] = q_c
    summary["theta_predicted"] = None if q_c is None else theta(q_c)

    try:
        th, err = fit_theta(quantum)
        summary.update(theta_hat=th, theta_stderr=err,
                       report=fit_report(th, err, None, {"points": quantum}))
    except AnalysisError as exc:
        run.failures.append(f"fig4 theta fit: {exc}")
        th = None
    if th is not None and len(classical) >= 1:
        tail = quantum[-1:] + classical
        slope = log_slope(tail) if len(tail) >= 2 else None
        summary["classical_slope"] = slope
        summary["faster_classical_decrease"] = slope is not None and abs(slope) > th

    rows = []
    for s, t in points:
        pred = None
        if summary["theta_predicted"] is not None and points:
            s0, t0 = points[0]
            pred = t0 * (s * s / (s0 * s0)) ** (-summary["theta_predicted"])
        rows.append((s, s * s, t, pred, "quantum" if s <= hbar else "classical"))
    run.table("saturation", ["sqrt_D", "D", "t_S", "t_S_predicted", "side"], rows)
    return run.finish(summary)


def run_q_of_hbar(cfg: ExperimentConfig, **kw) -> dict:
    """Critical entropic index for each ``hbar`` and whether it grows as ``hbar`` shrinks."""
    run = Run(cfg, **kw)
    sqrt_D = cfg.sqrt_D[0]
    run.prefetch((h, sqrt_D) for h in run.hbars)
    table = {}
    rows = []
    for hbar in run.hbars:
        trajs = run.trajectories(hbar, sqrt_D)
        run.series(trajs, GIBBS, f"gibbs_{_tag(hbar, sqrt_D)}")
        try:
            res = find_critical_q(trajs, (cfg.q_min, cfg.q_max), None, cfg.q_tol)
            table[hbar] = res.q_c
            rows.append((hbar, res.q_c, res.bracket[0], res.bracket[1], res.direction, ""))
        except AnalysisError as exc:
            table[hbar] = None
            run.failures.append(f"q-of-hbar hbar={hbar}: {exc}")
            rows.append((hbar, None, None, None, None, type(exc).__name__))
    run.table("q_of_hbar", ["hbar", "q_c", "bracket_lo", "bracket_hi", "direction", "error"], rows)
    found = sorted((h, q) for h, q in table.items() if q is not None)
    monotone = len(found) == len(table) and all(
        found[i][1] > found[i + 1][1] for i in range(len(found) - 1)
    )
    if not monotone:
        run.failures.append("q_c does not increase monotonically as hbar decreases")
    return run.finish({"sqrt_D": sqrt_D, "q_c": {f"{h:g}": q for h, q in table.items()},
                       "monotone": monotone})


def run_custom(cfg: ExperimentConfig, **kw) -> dict:
    """Every (hbar, sqrt_D) combination: spectra, Gibbs/Renyi/Tsallis series and q_c."""
    run = Run(cfg, **kw)
    pairs = [(h, s) for h in run.hbars for s in cfg.sqrt_D]
    run.prefetch(pairs)
    results = {}
    for hbar, s in pairs:
        trajs = run.trajectories(hbar, s)
        tag = _tag(hbar, s)
        g = run.series(trajs, GIBBS, f"gibbs_{tag}")
        run.series(trajs, Functional("renyi", cfg.renyi_order), f"renyi_{tag}")
        for q in cfg.q:
            run.series(trajs, Functional("tsallis", q), f"tsallis_{tag}_q{q:g}")
        entry = {}
        try:
            entry["t_S"] = saturation_time(g, 0.5, initial=0.0)
            entry["q_c"] = find_critical_q(trajs, (cfg.q_min, cfg.q_max), None, cfg.q_tol).q_c
        except AnalysisError as exc:
            entry["error"] = str(exc)
            run.failures.append(f"custom {tag}: {exc}")
        results[tag] = entry
    return run.finish({"results": results})


RUNNERS = {
    "fig1": run_fig1,
    "fig2": run_fig2,
    "fig3": run_fig3,
    "fig4": run_fig4,
    "q-of-hbar": run_q_of_hbar,
    "custom": run_custom,
}
