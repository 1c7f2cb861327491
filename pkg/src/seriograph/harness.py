"""Experiment orchestration: (n, seed) sweeps, per-task metrics and rate fits.

Each grid cell samples its own graph from (family, n, seed), runs one task and
records an error metric with full parameter provenance, so cells are
independent, reproducible and safe to run in parallel.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Callable, Optional, Sequence

import numpy as np

from .error_rooting import build_schedule, epsilon_for_delta, refine_all
from .errors import AllCellsFailedError, ConfigError, SeriographError
from .estimation import estimate_graphon, oracle_estimation_loss
from .graphon import graphon_from_config, oracle_true_ranking, sample_graph
from .ordering import ordering_error
from .robinson import lambda_statistic

_TASKS = ("order", "estimate", "test")
_METRIC = {"order": "normalized_ordering_error", "estimate": "mse", "test": "lambda_hat"}

CSV_COLUMNS = ("task", "n", "seed", "metric", "value", "wall_ms", "warnings", "params_json")


@dataclass
class ExperimentConfig:
    task: str
    graphon: dict
    n_grid: Sequence[int]
    seeds: Sequence[int]
    delta: float = 0.1
    gamma: float = 0.3
    log_factor_scale: float = 1.0
    m1: float = 1.0
    auto_rounds: bool = True
    m_rule: Optional[dict] = None
    mu_exponent: Optional[float] = None
    stride: Optional[int] = None
    output_path: Optional[str] = None
    workers: int = 1

    def validate(self) -> None:
        if self.task not in _TASKS:
            raise ConfigError(f"task must be one of {_TASKS}, got {self.task!r}")
        if not self.n_grid or list(self.n_grid) != sorted(set(self.n_grid)):
            raise ConfigError("n_grid must be nonempty and strictly ascending")
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if not isinstance(self.graphon, dict) or "family" not in self.graphon:
            raise ConfigError("graphon must be a family spec dict")
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError("gamma must lie in (0, 1]")
        if self.log_factor_scale <= 0 or self.m1 <= 0:
            raise ConfigError("log_factor_scale and m1 must be positive")
        if self.task == "estimate":
            rule = self.m_rule or {"type": "power", "delta": 0.05}
            if rule.get("type") not in ("power", "fixed"):
                raise ConfigError("m_rule.type must be 'power' or 'fixed'")
        if self.task == "test" and self.mu_exponent is None:
            raise ConfigError("test task needs mu_exponent")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_grid"] = list(self.n_grid)
        d["seeds"] = list(self.seeds)
        return d


@dataclass(frozen=True)
class CellResult:
    task: str
    n: int
    seed: int
    metric: str
    value: Optional[float]
    wall_ms: float
    warnings: tuple
    params: dict

    def row(self) -> list:
        return [
            self.task,
            self.n,
            self.seed,
            self.metric,
            "" if self.value is None else repr(self.value),
            f"{self.wall_ms:.3f}",
            "; ".join(self.warnings),
            json.dumps(self.params, sort_keys=True),
        ]


def _m_from_rule(rule: Optional[dict], n: int, alpha: float) -> int:
    rule = rule or {"type": "power", "delta": 0.05}
    if rule.get("type") == "fixed":
        return int(rule["m"])
    d3 = float(rule.get("delta", 0.05))
    return math.ceil(n ** (1.0 / (alpha + 1.0) - 3.0 * d3))


def run_cell(config: ExperimentConfig, n: int, seed: int) -> CellResult:
    """Run one (n, seed) cell; failures become rows, not exceptions."""
    t0 = time.perf_counter()
    warnings: list = []
    params: dict = {
        "graphon": config.graphon,
        "delta": config.delta,
        "gamma": config.gamma,
        "log_factor_scale": config.log_factor_scale,
        "m1": config.m1,
        "auto_rounds": config.auto_rounds,
    }
    try:
        w = graphon_from_config(config.graphon)
        alpha = w.alpha
        G = sample_graph(w, n, seed)
        if config.task == "order":
            epsilon, _ = epsilon_for_delta(config.delta, alpha)
            schedule = build_schedule(
                n,
                alpha,
                config.gamma,
                epsilon,
                m1=config.m1,
                log_factor_scale=config.log_factor_scale,
                auto_rounds=config.auto_rounds,
            )
            params["schedule"] = schedule.to_dict()
            sigma = refine_all(G, schedule, seed=seed, warnings_out=warnings)
            value = ordering_error(sigma, oracle_true_ranking(G)) / n
        elif config.task == "estimate":
            m = _m_from_rule(config.m_rule, n, alpha)
            params["m"] = m
            est = estimate_graphon(
                G,
                m,
                alpha,
                config.delta,
                config.gamma,
                seed,
                m1=config.m1,
                log_factor_scale=config.log_factor_scale,
                auto_rounds=config.auto_rounds,
            )
            warnings.extend(est.clamp_warnings)
            value = oracle_estimation_loss(est, G, w).mse
        else:
            mu = n ** -float(config.mu_exponent)
            params["mu"] = mu
            params["stride"] = config.stride
            report = lambda_statistic(
                G,
                mu,
                alpha,
                config.delta,
                config.gamma,
                stride=config.stride,
                seed=seed,
                m1=config.m1,
                log_factor_scale=config.log_factor_scale,
                auto_rounds=config.auto_rounds,
                warnings_out=warnings,
            )
            params["stride"] = report.stride
            value = report.lambda_hat
    except SeriographError as exc:
        warnings.append(f"error: {exc}")
        value = None
    wall_ms = (time.perf_counter() - t0) * 1000.0
    return CellResult(
        task=config.task,
        n=n,
        seed=seed,
        metric=_METRIC[config.task],
        value=value,
        wall_ms=wall_ms,
        warnings=tuple(warnings),
        params=params,
    )


def _cell_star(args):
    return run_cell(*args)


def run_experiment(config: ExperimentConfig) -> list:
    """Run every (n, seed) cell, write the CSV if configured, return the results.

    Cells run in deterministic (n_grid, seeds) order; with ``workers > 1``
    they execute in parallel and are reassembled in that order.
    """
    config.validate()
    cells = [(config, n, seed) for n in config.n_grid for seed in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_cell_star, cells))
    else:
        results = [run_cell(*c) for c in cells]
    if all(r.value is None for r in results):
        raise AllCellsFailedError("every grid cell failed; see warnings in the results")
    if config.output_path:
        write_results_csv(results, config.output_path)
    return results


def write_results_csv(results: Sequence[CellResult], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in results:
            writer.writerow(r.row())


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope of log(error) against log(n)."""

    slope: float
    intercept: float
    r_squared: float
    points: tuple
    n_floored: int = 0
    n_excluded: int = 0


def fit_rate(points: Sequence, zero_floor: Optional[Callable] = None) -> RateFit:
    """Fit a log-log convergence rate to (n, error) points.

    Nonpositive errors are replaced by ``zero_floor(n)`` (default 1/n, the
    resolution of a normalized rank-displacement metric) and counted in
    ``n_floored``.
    """
    if zero_floor is None:
        zero_floor = lambda n: 1.0 / n
    xs, ys = [], []
    floored = excluded = 0
    for n, err in points:
        if err is None:
            excluded += 1
            continue
        if err <= 0:
            err = zero_floor(n)
            floored += 1
        xs.append(math.log(n))
        ys.append(math.log(err))
    if len(xs) < 2:
        raise ConfigError("rate fit needs at least 2 usable points")
    x = np.asarray(xs)
    y = np.asarray(ys)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot <= 1e-300 else max(0.0, 1.0 - float((resid**2).sum()) / ss_tot)
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        r_squared=min(1.0, r2),
        points=tuple(zip(x.tolist(), y.tolist())),
        n_floored=floored,
        n_excluded=excluded,
    )


def median_errors(results: Sequence[CellResult]) -> list:
    """Median metric value per n over seeds, skipping failed cells."""
    by_n: dict = {}
    for r in results:
        if r.value is not None:
            by_n.setdefault(r.n, []).append(r.value)
    return [(n, float(np.median(v))) for n, v in sorted(by_n.items())]
