"""Drop pipeline, Monte Carlo ensembles, sweeps and CSV output.

A drop's randomness depends only on ``drop_seed(master_seed, drop_index)``.
Both strategies of a drop share its deployment, fading and coin flips
(common random numbers), and so do the points of a sweep.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import seeding
from .channel import ChannelRealization
from .config import SimConfig, Strategy, SweepSpec, check, expand_sweep
from .deployment import Deployment, place_nodes
from .secrecy import activate_jammers, tagged_link_secrecy
from .spectrum import (DegenerateDrop, SpectrumPlan, detect_idle, draft_plan,
                       select_modes, tag_links)

log = logging.getLogger(__name__)

LINKS = ("overlay", "cellular")
CSV_HEADER = ["sweep_param", "sweep_value", "scenario", "strategy", "link", "n_drops",
              "n_effective", "skip_count", "mean_bps", "std_bps", "ci95_lo_bps", "ci95_hi_bps"]
Z95 = 1.959963984540054


class AllDegenerate(RuntimeError):
    def __init__(self, message, skip_count):
        super().__init__(message)
        self.skip_count = skip_count


@dataclass(frozen=True)
class DropResult:
    drop_index: int
    strategy: Strategy
    sr_overlay_bps: float | None
    sr_cellular_bps: float | None
    n_jammers_active: int = 0
    n_idle: int = 0
    n_cellular: int = 0
    n_overlay: int = 0
    n_underlay: int = 0
    n_fallback: int = 0
    degenerate: bool = False
    reason: str = ""

    def rate(self, link):
        return self.sr_overlay_bps if link == "overlay" else self.sr_cellular_bps


@dataclass(frozen=True)
class DropState:
    """Everything one drop produced; handy for inspection and dumps."""
    deployment: Deployment
    channels: ChannelRealization
    plans: dict
    results: dict


def _degenerate(drop_index, strategies, reason):
    return {s: DropResult(drop_index, s, None, None, degenerate=True, reason=reason)
            for s in strategies}


def simulate_drop(cfg: SimConfig, strategies: Sequence[Strategy], drop_index: int) -> DropState:
    """Steps of one drop, shared geometry and mode selection, one plan per strategy."""
    seed = seeding.drop_seed(cfg.master_seed, drop_index)
    dep = place_nodes(cfg, seed)
    channels = ChannelRealization(seed, cfg)
    strategies = [Strategy(s) for s in strategies]
    try:
        sel = select_modes(dep, cfg)
    except DegenerateDrop as exc:
        return DropState(dep, channels, {}, _degenerate(drop_index, strategies, str(exc)))
    plans, results = {}, {}
    for strategy in strategies:
        rng = seeding.stream(seed, seeding.STREAM_PATTERNS)
        plan = draft_plan(dep, sel, strategy, cfg, rng)
        plan = detect_idle(plan, dep, channels, cfg)
        plan = tag_links(plan, dep, cfg)
        plan = activate_jammers(plan, dep, channels, cfg)
        overlay, cellular = tagged_link_secrecy(plan, dep, channels, cfg)
        n_jam = len(set().union(*[set(map(int, j)) for j in plan.jammers.values()])) if plan.jammers else 0
        plans[strategy] = plan
        missing = overlay is None and cellular is None
        results[strategy] = DropResult(
            drop_index, strategy,
            None if overlay is None else overlay.rate_bps,
            None if cellular is None else cellular.rate_bps,
            n_jammers_active=n_jam, n_idle=plan.n_idle, n_cellular=plan.n_cellular,
            n_overlay=plan.n_overlay, n_underlay=plan.n_underlay,
            n_fallback=plan.fallback_count,
            degenerate=missing, reason="no taggable link" if missing else "",
        )
    return DropState(dep, channels, plans, results)


def run_drop(cfg: SimConfig, strategy, drop_index: int) -> DropResult:
    strategy = Strategy(strategy)
    return simulate_drop(cfg, [strategy], drop_index).results[strategy]


def _drop_task(args):
    cfg, strategies, drop_index = args
    return simulate_drop(cfg, strategies, drop_index).results


def _map(tasks, workers):
    tasks = list(tasks)
    if workers is None or workers <= 1 or len(tasks) <= 1:
        return [_drop_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, which restores drop order
        return list(pool.map(_drop_task, tasks, chunksize=chunk))


def run_ensemble(cfg: SimConfig, strategies, n_drops=None, workers=1):
    """Per-strategy list of DropResults ordered by drop index."""
    check(cfg)
    n = cfg.n_drops if n_drops is None else int(n_drops)
    if n < 1:
        raise ValueError("n_drops must be >= 1")
    strategies = [Strategy(s) for s in strategies]
    out = _map(((cfg, strategies, i) for i in range(n)), workers)
    return {s: [r[s] for r in out] for s in strategies}


@dataclass(frozen=True)
class SecrecyStats:
    link: str
    strategy: Strategy
    scenario: str
    sweep_param: str | None
    sweep_value: float | None
    n_drops: int
    n_effective: int
    skip_count: int
    mean_bps: float
    std_bps: float
    ci95_lo_bps: float
    ci95_hi_bps: float
    values: tuple = field(default=(), repr=False, compare=False)

    @property
    def ci_half_width(self):
        return (self.ci95_hi_bps - self.ci95_lo_bps) / 2.0

    def row(self):
        def num(x):
            return "" if x is None else repr(float(x))
        return [self.sweep_param or "", num(self.sweep_value), self.scenario,
                self.strategy.value, self.link, self.n_drops, self.n_effective,
                self.skip_count, num(self.mean_bps), num(self.std_bps),
                num(self.ci95_lo_bps), num(self.ci95_hi_bps)]


def summarize(values):
    """(n, mean, std, lo, hi) over the finite entries; normal-approx 95% CI."""
    x = np.asarray([v for v in values if v is not None and math.isfinite(v)], dtype=float)
    n = len(x)
    if n == 0:
        return 0, math.nan, math.nan, math.nan, math.nan
    mean = float(np.mean(x))
    std = float(np.std(x, ddof=1)) if n > 1 else 0.0
    half = Z95 * std / math.sqrt(n)
    return n, mean, std, mean - half, mean + half


def aggregate(results: Sequence[DropResult], link, cfg: SimConfig, sweep_param=None,
              sweep_value=None) -> SecrecyStats:
    values = tuple(math.nan if r.rate(link) is None else float(r.rate(link)) for r in results)
    n, mean, std, lo, hi = summarize(values)
    return SecrecyStats(link, results[0].strategy, cfg.scenario.value, sweep_param, sweep_value,
                        len(results), n, len(results) - n, mean, std, lo, hi, values)


def run_monte_carlo(cfg: SimConfig, strategy=None, n_drops=None, workers=1):
    """(overlay, cellular) SecrecyStats for one strategy.

    Raises AllDegenerate when no drop produced any tagged link; a single
    link missing everywhere is reported as n_effective == 0 instead.
    """
    strategy = Strategy(cfg.strategy if strategy is None else strategy)
    results = run_ensemble(cfg, [strategy], n_drops, workers)[strategy]
    skipped = sum(r.degenerate for r in results)
    if skipped == len(results):
        reasons = sorted({r.reason for r in results})
        raise AllDegenerate(f"all {skipped} drops degenerate ({'; '.join(reasons)})", skipped)
    return tuple(aggregate(results, link, cfg) for link in LINKS)


def _ordered(strategies):
    chosen = {Strategy(s) for s in strategies}
    return [s for s in (Strategy.TRADITIONAL, Strategy.NEW) if s in chosen]


def run_sweep(cfg: SimConfig, sweep: SweepSpec | None, strategies: Iterable, n_drops=None,
              workers=1) -> list[SecrecyStats]:
    """Stats rows for sweep value x strategy x link, sweep value major.

    Drops of every sweep point are scheduled together over the workers.
    """
    strategies = _ordered(strategies)
    if not strategies:
        return []
    check(cfg)
    points = [cfg] if sweep is None else expand_sweep(cfg, sweep)
    n = cfg.n_drops if n_drops is None else int(n_drops)
    tasks = [(p, strategies, i) for p in points for i in range(n)]
    out = _map(tasks, workers)
    rows = []
    for k, point in enumerate(points):
        chunk = out[k * n:(k + 1) * n]
        value = None if sweep is None else float(sweep.values[k])
        name = None if sweep is None else sweep.parameter_name
        for s in strategies:
            results = [r[s] for r in chunk]
            if all(r.degenerate for r in results):
                log.warning("all drops degenerate at %s=%s (%s)", name, value, s.value)
            for link in LINKS:
                rows.append(aggregate(results, link, point, name, value))
    return rows


def emit_csv(table: Sequence[SecrecyStats], destination):
    """Write rows in the fixed schema; ``destination`` is a path or text stream."""
    if isinstance(destination, io.TextIOBase) or hasattr(destination, "write"):
        _write(table, destination)
        return
    with open(destination, "w", newline="") as fh:
        _write(table, fh)


def _write(table, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in table:
        w.writerow(row.row())
