"""Monte-Carlo experiment harness.

Runs recovery-rate cells over a (d, T) grid, estimates the empirical
threshold time T*(d) at which the exact-recovery rate crosses a target
level, and fits T* against log d.  Every trial derives its seed from
(base_seed, d, T, trial) so results are a pure function of the spec,
regardless of worker count.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict
from typing import Callable, Optional, Sequence

import numpy as np

from .estimator import EstimatorConfig, evaluate, recover
from .model import sample_random_instance, support_of
from .seeding import mix64, trial_seed
from .simulate import bin_and_clip, simulate_cluster, simulate_thinning

__all__ = [
    "SpecError",
    "SweepSpec",
    "CellResult",
    "ThresholdEstimate",
    "LogFit",
    "SweepResult",
    "wilson_interval",
    "run_trial",
    "run_cell",
    "estimate_threshold_time",
    "fit_log_scaling",
    "run_sweep",
    "write_results_csv",
    "read_results_csv",
    "write_thresholds_csv",
    "write_fit_json",
]


class SpecError(ValueError):
    """Invalid sweep specification."""


@dataclass(frozen=True)
class SweepSpec:
    d_values: tuple[int, ...]
    trials: int
    k: int
    alpha: float
    w_minus: float
    w_plus: float
    mu_minus: float
    mu_plus: float
    beta: float
    base_seed: int
    T_values: tuple[float, ...] = ()
    estimator: Optional[EstimatorConfig] = None  # None = auto schedule
    success_level: float = 0.9
    jobs: int = 1
    method: str = "cluster"
    burn_in: Optional[float] = None
    # initial bisection bracket for threshold mode (auto-expanded)
    T_bracket: tuple[float, float] = (25.0, 400.0)

    def __post_init__(self):
        if self.trials < 1:
            raise SpecError("trials must be >= 1")
        if not 0.0 < self.success_level < 1.0:
            raise SpecError("success_level must be in (0, 1)")
        if any(t <= 0 for t in self.T_values):
            raise SpecError("T values must be positive")
        if list(self.T_values) != sorted(self.T_values):
            raise SpecError("T values must be ascending")
        if self.method not in ("cluster", "thinning"):
            raise SpecError(f"unknown method {self.method!r}")
        if self.jobs < 1:
            raise SpecError("jobs must be >= 1")
        if self.k * self.alpha * self.w_plus / self.beta >= 1.0:
            raise SpecError("spec violates subcriticality")

    def estimator_config(self) -> EstimatorConfig:
        if self.estimator is not None:
            return self.estimator
        return EstimatorConfig.auto(self.alpha, self.w_minus, self.k)

    @staticmethod
    def from_json(text: str) -> "SweepSpec":
        doc = json.loads(text)
        est = doc.pop("estimator", None)
        if est is not None:
            est = EstimatorConfig(**est)
        try:
            return SweepSpec(
                d_values=tuple(doc.pop("d_values")),
                T_values=tuple(doc.pop("T_values", ())),
                T_bracket=tuple(doc.pop("T_bracket", (25.0, 400.0))),
                estimator=est,
                **doc,
            )
        except TypeError as exc:
            raise SpecError(str(exc)) from exc

    def to_json(self) -> str:
        doc = asdict(self)
        if self.estimator is None:
            doc.pop("estimator")
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class CellResult:
    d: int
    T: float
    trials: int
    successes: int

    @property
    def rate(self) -> float:
        return self.successes / self.trials

    def wilson(self) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials)


@dataclass(frozen=True)
class ThresholdEstimate:
    d: int
    t_star: float
    t_lo: float
    t_hi: float
    cells: tuple[CellResult, ...]
    monotonicity_violated: bool = False


@dataclass(frozen=True)
class LogFit:
    slope: float
    intercept: float
    r2: float


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    cells: tuple[CellResult, ...]
    thresholds: tuple[ThresholdEstimate, ...] = ()
    fit: Optional[LogFit] = None


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial rate."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    p = successes / trials
    denom = 1.0 + z**2 / trials
    center = (p + z**2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z**2 / (4 * trials**2)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def run_trial(d: int, T: float, spec: SweepSpec, trial: int) -> bool:
    """One sample-simulate-recover-evaluate round; True on exact recovery."""
    seed = trial_seed(spec.base_seed, d, T, trial)
    params = sample_random_instance(
        d=d, k=spec.k, alpha=spec.alpha,
        w_minus=spec.w_minus, w_plus=spec.w_plus,
        mu_minus=spec.mu_minus, mu_plus=spec.mu_plus,
        beta=spec.beta, seed=mix64(seed, 1),
    )
    simulate = simulate_cluster if spec.method == "cluster" else simulate_thinning
    log = simulate(params, T, burn_in=spec.burn_in, seed=mix64(seed, 2))
    config = spec.estimator_config()
    sample = bin_and_clip(log, params.beta, config.h, config.R)
    net = recover(sample, config)
    return evaluate(net, support_of(params)).exact


def _trial_worker(args: tuple) -> bool:
    d, T, spec, trial = args
    return run_trial(d, T, spec, trial)


def run_cell(d: int, T: float, spec: SweepSpec) -> CellResult:
    """Run spec.trials independent trials of the (d, T) cell."""
    jobs = min(spec.jobs, spec.trials)
    args = [(d, T, spec, t) for t in range(spec.trials)]
    if jobs == 1:
        outcomes = [run_trial(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_trial_worker, args, chunksize=4))
    return CellResult(d=d, T=T, trials=spec.trials, successes=sum(outcomes))


def estimate_threshold_time(
    d: int,
    spec: SweepSpec,
    rate_fn: Optional[Callable[[float], CellResult]] = None,
    max_expansions: int = 12,
) -> ThresholdEstimate:
    """Bisect on T for the Monte-Carlo rate crossing spec.success_level.

    The initial bracket spec.T_bracket is auto-expanded (halving the low
    end, doubling the high end) until rate(T_lo) < level <= rate(T_hi).
    Bisection stops at 10% relative width.  If the evaluated rates are
    non-monotone beyond Wilson noise, the bracket is re-scanned on an
    even grid instead.
    """
    if rate_fn is None:
        rate_fn = lambda T: run_cell(d, T, spec)
    level = spec.success_level
    cells: dict[float, CellResult] = {}

    def rate(T: float) -> float:
        if T not in cells:
            cells[T] = rate_fn(T)
        return cells[T].rate

    t_lo, t_hi = spec.T_bracket
    for _ in range(max_expansions):
        if rate(t_hi) >= level:
            break
        t_hi *= 2.0
    else:
        raise RuntimeError(
            f"rate never reached {level} up to T={t_hi} for d={d}"
        )
    for _ in range(max_expansions):
        if rate(t_lo) < level:
            break
        t_lo /= 2.0
    else:
        raise RuntimeError(f"rate already >= {level} down to T={t_lo} for d={d}")

    while (t_hi - t_lo) > 0.1 * 0.5 * (t_hi + t_lo):
        t_mid = 0.5 * (t_lo + t_hi)
        if rate(t_mid) >= level:
            t_hi = t_mid
        else:
            t_lo = t_mid

    violated = _monotonicity_violated(cells, level)
    if violated:
        t_lo, t_hi = _grid_rescan(cells, rate, level)

    ordered = tuple(cells[T] for T in sorted(cells))
    return ThresholdEstimate(
        d=d, t_star=0.5 * (t_lo + t_hi), t_lo=t_lo, t_hi=t_hi,
        cells=ordered, monotonicity_violated=violated,
    )


def _monotonicity_violated(cells: dict[float, CellResult], level: float) -> bool:
    pts = sorted(cells.items())
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            (_, ca), (_, cb) = pts[a], pts[b]
            lo_a, _ = ca.wilson()
            _, hi_b = cb.wilson()
            # earlier T confidently above the level, later T confidently below
            if lo_a > level and hi_b < level:
                return True
    return False


def _grid_rescan(cells, rate, level, points: int = 9) -> tuple[float, float]:
    ts = sorted(cells)
    grid = np.linspace(ts[0], ts[-1], points)
    t_lo, t_hi = ts[0], ts[-1]
    for T in grid:
        T = float(T)
        if rate(T) >= level:
            t_hi = T
            break
        t_lo = T
    return t_lo, t_hi


def fit_log_scaling(points: Sequence[tuple[int, float]]) -> LogFit:
    """OLS of T* on ln d; returns slope, intercept, R^2."""
    if len(points) < 3:
        raise ValueError("need at least 3 (d, T*) points")
    x = np.log([d for d, _ in points])
    y = np.array([t for _, t in points])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return LogFit(slope=float(slope), intercept=float(intercept), r2=r2)


def run_sweep(spec: SweepSpec, threshold_mode: bool = False) -> SweepResult:
    """Grid cells, plus per-d threshold estimates and log fit when requested."""
    if threshold_mode:
        thresholds = tuple(estimate_threshold_time(d, spec) for d in spec.d_values)
        cells = tuple(c for th in thresholds for c in th.cells)
        fit = None
        if len(thresholds) >= 3:
            fit = fit_log_scaling([(th.d, th.t_star) for th in thresholds])
        return SweepResult(spec=spec, cells=cells, thresholds=thresholds, fit=fit)
    if not spec.T_values:
        raise SpecError("grid mode requires T_values")
    cells = tuple(
        run_cell(d, T, spec) for d in spec.d_values for T in spec.T_values
    )
    return SweepResult(spec=spec, cells=cells)


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_results_csv(cells: Sequence[CellResult], path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["d", "T", "trials", "successes", "rate", "ci_lo", "ci_hi"])
        for c in cells:
            lo, hi = c.wilson()
            writer.writerow(
                [c.d, _fmt(c.T), c.trials, c.successes, _fmt(c.rate), _fmt(lo), _fmt(hi)]
            )


def read_results_csv(path: str) -> list[CellResult]:
    out = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for row in reader:
            out.append(
                CellResult(
                    d=int(row["d"]), T=float(row["T"]),
                    trials=int(row["trials"]), successes=int(row["successes"]),
                )
            )
    return out


def write_thresholds_csv(thresholds: Sequence[ThresholdEstimate], path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["d", "t_star", "t_lo", "t_hi"])
        for th in thresholds:
            writer.writerow([th.d, _fmt(th.t_star), _fmt(th.t_lo), _fmt(th.t_hi)])


def write_fit_json(fit: LogFit, path: str) -> None:
    with open(path, "w") as f:
        json.dump(
            {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2},
            f, sort_keys=True, separators=(",", ":"),
        )
        f.write("\n")
