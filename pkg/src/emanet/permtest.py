"""Permutation engine: resampled connectivity differences and the paired t-test.

Each iteration draws a fixed-size day sample per category (without replacement
within the draw, fresh draws across iterations), builds one Pearson network per
sample, and records the connectivity difference. The baseline run draws two
disjoint samples from the unfiltered pool instead. Context and baseline
difference distributions are compared with a paired-sample t-test, paired by
permutation index.

Caveat, also printed in report footers: the iterations resample heavily
overlapping day sets, so the t-test's independence assumptions are only
approximate; the procedure is reproduced as published.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from . import stats
from .contexts import CategoryPools
from .ingest import ParticipantDataset
from .netcore import ItemSubset, correlation_matrix, upper_triangle_sum
from .stats import LengthMismatch

BASELINE_STREAM = "baseline"


class InsufficientPool(ValueError):
    def __init__(self, category: str, have: int, need: int):
        self.category = category
        self.have = have
        self.need = need
        super().__init__(f"{category} pool has {have} days, need {need}")


class ConfigMismatch(ValueError):
    """Two runs were produced under incompatible configurations."""


@dataclass(frozen=True)
class PermutationConfig:
    subset: ItemSubset
    n_permutations: int = 2000
    sample_size: int = 25
    seed: int = 0

    def __post_init__(self):
        if self.n_permutations < 1:
            raise ValueError("n_permutations must be >= 1")
        if self.sample_size < 2:
            raise ValueError("sample_size must be >= 2")


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    std: float
    t_score: float | None = None
    p_value: float | None = None
    df: int | None = None


@dataclass(frozen=True)
class PermutationRun:
    feature: str
    config: PermutationConfig
    differences: tuple
    stats: SummaryStats
    sampled_indices: tuple | None = None


@dataclass(frozen=True)
class ComparisonResult:
    baseline: SummaryStats
    context: SummaryStats
    test: SummaryStats


def child_rng(master_seed: int, stream_id: str) -> np.random.Generator:
    """Seeded generator for one named stream.

    Streams are derived from the master seed plus a hash of the stream id, so
    per-context runs are reproducible independently of the order (or
    parallelism) in which contexts are analyzed.
    """
    digest = hashlib.sha256(stream_id.encode("utf-8")).digest()
    salt = int.from_bytes(digest[:8], "big")
    return np.random.default_rng(np.random.SeedSequence([master_seed, salt]))


def ema_matrix(ds: ParticipantDataset, days, subset: ItemSubset) -> np.ndarray:
    """(len(days) x |subset|) int array of EMA scores for the given dates."""
    by_date = ds.by_date()
    rows = []
    for d in days:
        r = by_date[d]
        if not r.has_ema:
            raise ValueError(f"day {d} has no EMA")
        rows.append([r.ema.scores[i] for i in subset.indices])
    return np.asarray(rows, dtype=np.int64).reshape(len(rows), subset.size)


def _summary(differences) -> SummaryStats:
    m = stats.mean(differences)
    s = stats.sample_std(differences) if len(differences) >= 2 else 0.0
    return SummaryStats(mean=m, std=s)


def run_context_permutation(
    ds: ParticipantDataset,
    pools: CategoryPools,
    cfg: PermutationConfig,
    rng: np.random.Generator | None = None,
    log_indices: bool = False,
) -> PermutationRun:
    """Resample both category pools and record connectivity differences.

    Difference sign convention: isolation minus sociability. With log_indices
    the per-iteration sample positions (into each pool's day list) are kept so
    every difference can be recomputed after the fact.
    """
    iso = ema_matrix(ds, pools.isolation_days, cfg.subset)
    soc = ema_matrix(ds, pools.sociability_days, cfg.subset)
    if iso.shape[0] < cfg.sample_size:
        raise InsufficientPool("isolation", iso.shape[0], cfg.sample_size)
    if soc.shape[0] < cfg.sample_size:
        raise InsufficientPool("sociability", soc.shape[0], cfg.sample_size)
    if rng is None:
        rng = child_rng(cfg.seed, pools.feature)
    differences = []
    indices_log = [] if log_indices else None
    for _ in range(cfg.n_permutations):
        # Sorted samples make the float result depend only on the day set, so
        # a sample covering the whole pool is bit-identical every iteration.
        idx_iso = np.sort(rng.choice(iso.shape[0], size=cfg.sample_size, replace=False))
        idx_soc = np.sort(rng.choice(soc.shape[0], size=cfg.sample_size, replace=False))
        diff = upper_triangle_sum(correlation_matrix(iso[idx_iso])) - upper_triangle_sum(
            correlation_matrix(soc[idx_soc])
        )
        differences.append(diff)
        if indices_log is not None:
            indices_log.append((tuple(int(i) for i in idx_iso), tuple(int(i) for i in idx_soc)))
    return PermutationRun(
        feature=pools.feature,
        config=cfg,
        differences=tuple(differences),
        stats=_summary(differences),
        sampled_indices=tuple(indices_log) if indices_log is not None else None,
    )


def run_baseline_permutation(
    ds: ParticipantDataset,
    pool,
    cfg: PermutationConfig,
    rng: np.random.Generator | None = None,
    log_indices: bool = False,
) -> PermutationRun:
    """Same procedure on the unfiltered pool: two disjoint samples per iteration.

    One combined draw of 2*sample_size days is split in half; the difference is
    sample1 minus sample2, which makes the distribution symmetric around 0 by
    construction.
    """
    data = ema_matrix(ds, pool, cfg.subset)
    need = 2 * cfg.sample_size
    if data.shape[0] < need:
        raise InsufficientPool("baseline", data.shape[0], need)
    if rng is None:
        rng = child_rng(cfg.seed, BASELINE_STREAM)
    differences = []
    indices_log = [] if log_indices else None
    for _ in range(cfg.n_permutations):
        idx = rng.choice(data.shape[0], size=need, replace=False)
        first = np.sort(idx[: cfg.sample_size])
        second = np.sort(idx[cfg.sample_size :])
        diff = upper_triangle_sum(correlation_matrix(data[first])) - upper_triangle_sum(
            correlation_matrix(data[second])
        )
        differences.append(diff)
        if indices_log is not None:
            indices_log.append((tuple(int(i) for i in first), tuple(int(i) for i in second)))
    return PermutationRun(
        feature=BASELINE_STREAM,
        config=cfg,
        differences=tuple(differences),
        stats=_summary(differences),
        sampled_indices=tuple(indices_log) if indices_log is not None else None,
    )


def paired_t_test(xs, ys) -> SummaryStats:
    """Paired-sample t-test on index-matched sequences.

    Returns the mean and sample std of the pairwise differences d = x - y,
    t = mean(d) / (std(d)/sqrt(n)), df = n - 1, and the two-sided p-value.
    Degenerate variance is handled, not raised: all-zero differences give
    t = 0, p = 1; a constant nonzero difference gives signed infinity, p = 0.
    """
    if len(xs) != len(ys):
        raise LengthMismatch(f"paired lengths differ: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise ValueError("paired t-test needs at least 2 pairs")
    d = [float(a) - float(b) for a, b in zip(xs, ys)]
    d_mean = stats.mean(d)
    d_std = stats.sample_std(d)
    df = n - 1
    if d_std == 0.0:
        if d_mean == 0.0:
            return SummaryStats(mean=0.0, std=0.0, t_score=0.0, p_value=1.0, df=df)
        t = float("inf") if d_mean > 0 else float("-inf")
        return SummaryStats(mean=d_mean, std=0.0, t_score=t, p_value=0.0, df=df)
    t = d_mean / (d_std / n**0.5)
    return SummaryStats(mean=d_mean, std=d_std, t_score=t, p_value=stats.t_sf(t, df), df=df)


def compare_to_baseline(context_run: PermutationRun, baseline_run: PermutationRun) -> ComparisonResult:
    """Paired t-test of baseline differences against context differences.

    Argument order (baseline first) makes t negative when the context mean
    exceeds the baseline mean.
    """
    ca, cb = context_run.config, baseline_run.config
    if (ca.n_permutations, ca.sample_size, ca.subset) != (cb.n_permutations, cb.sample_size, cb.subset):
        raise ConfigMismatch("runs differ in n_permutations, sample_size or subset")
    test = paired_t_test(baseline_run.differences, context_run.differences)
    return ComparisonResult(baseline=baseline_run.stats, context=context_run.stats, test=test)
