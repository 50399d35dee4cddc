"""Synthetic participant generator with planted, known correlation structure.

Days are assigned a category (isolation or sociability) per sensor feature.
EMA scores come from a latent multivariate normal whose correlation matrix
depends on the planted feature's category on the report day, discretized onto
the 0-3 scale at standard-normal quartile boundaries (equiprobable levels).
The discretization attenuates latent correlations; ground_truth() measures the
attenuated targets with a large-sample oracle rather than an analytic
correction.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .ingest import (
    EMA_ITEMS,
    POSITIVE_INDICES,
    DailyRecord,
    EmaVector,
    ParticipantDataset,
    SensorDay,
    SENSOR_FEATURES,
)
from .netcore import ALL10, ItemSubset, correlation_matrix, upper_triangle_sum

# Standard normal quartiles: equiprobable mapping onto {0, 1, 2, 3}.
DISCRETIZE_THRESHOLDS = (-0.6744897501960817, 0.0, 0.6744897501960817)

START_DATE = dt.date(2023, 1, 1)

_N_ITEMS = len(EMA_ITEMS)


class InvalidConfig(ValueError):
    """Synthetic configuration violates its invariants."""


def _identity10() -> tuple:
    return tuple(tuple(1.0 if i == j else 0.0 for j in range(_N_ITEMS)) for i in range(_N_ITEMS))


def correlated_block(r: float, indices=POSITIVE_INDICES) -> tuple:
    """Identity 10x10 target with correlation r among the given item indices."""
    m = [[1.0 if i == j else 0.0 for j in range(_N_ITEMS)] for i in range(_N_ITEMS)]
    for i in indices:
        for j in indices:
            if i != j:
                m[i][j] = r
    return tuple(tuple(row) for row in m)


@dataclass(frozen=True)
class SynthConfig:
    n_days: int
    seed: int = 0
    report_cadence: int = 3
    planted_feature: str = "locations_visited"
    context_mix: float = 0.5
    isolation_corr: tuple = field(default_factory=_identity10)
    sociability_corr: tuple = field(default_factory=_identity10)
    isolation_mean: tuple = (0.0,) * _N_ITEMS
    sociability_mean: tuple = (0.0,) * _N_ITEMS
    missing_sensor_rate: float = 0.0

    def __post_init__(self):
        if self.n_days < 0:
            raise InvalidConfig("n_days must be >= 0")
        if self.report_cadence < 1:
            raise InvalidConfig("report_cadence must be >= 1")
        if self.planted_feature not in SENSOR_FEATURES:
            raise InvalidConfig(f"unknown planted feature {self.planted_feature!r}")
        if not 0.0 <= self.context_mix <= 1.0:
            raise InvalidConfig("context_mix must be in [0, 1]")
        if not 0.0 <= self.missing_sensor_rate <= 1.0:
            raise InvalidConfig("missing_sensor_rate must be in [0, 1]")
        for name in ("isolation_corr", "sociability_corr"):
            _validate_corr(np.asarray(getattr(self, name), dtype=float), name)
        for name in ("isolation_mean", "sociability_mean"):
            if len(getattr(self, name)) != _N_ITEMS:
                raise InvalidConfig(f"{name} must have {_N_ITEMS} entries")


def _validate_corr(m: np.ndarray, name: str) -> None:
    if m.shape != (_N_ITEMS, _N_ITEMS):
        raise InvalidConfig(f"{name} must be {_N_ITEMS}x{_N_ITEMS}")
    if not np.allclose(m, m.T, atol=1e-12):
        raise InvalidConfig(f"{name} must be symmetric")
    if not np.allclose(np.diag(m), 1.0, atol=1e-12):
        raise InvalidConfig(f"{name} must have unit diagonal")
    if np.linalg.eigvalsh(m).min() < -1e-8:
        raise InvalidConfig(f"{name} must be positive semidefinite")


def _factor(corr: np.ndarray) -> np.ndarray:
    """L with L @ L.T = corr; eigendecomposition tolerates semidefinite targets."""
    w, v = np.linalg.eigh(corr)
    return v * np.sqrt(np.clip(w, 0.0, None))


def discretize(z: np.ndarray) -> np.ndarray:
    """Map latent normal values onto 0-3 at the fixed quartile thresholds."""
    return np.searchsorted(DISCRETIZE_THRESHOLDS, z, side="left").astype(np.int64)


def generate(cfg: SynthConfig) -> ParticipantDataset:
    """Produce a CSV-writable dataset with the planted context structure.

    Reports land on every report_cadence-th day (the last day of each cadence
    block), so the 2-day backfill covers every day when the cadence is <= 3.
    Sensor counts satisfy the category predicates exactly: isolation days have
    count 0, sociability days a positive geometric count.
    """
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    l_iso = _factor(np.asarray(cfg.isolation_corr, dtype=float))
    l_soc = _factor(np.asarray(cfg.sociability_corr, dtype=float))
    mu_iso = np.asarray(cfg.isolation_mean, dtype=float)
    mu_soc = np.asarray(cfg.sociability_mean, dtype=float)
    records = []
    planted_sociable = False
    for i in range(cfg.n_days):
        date = START_DATE + dt.timedelta(days=i)
        # The planted feature's category persists over each reporting block,
        # so the days covered by one report share the context it was made in.
        if i % cfg.report_cadence == 0:
            planted_sociable = bool(rng.random() < cfg.context_mix)
        sociable = {
            f: planted_sociable if f == cfg.planted_feature else bool(rng.random() < cfg.context_mix)
            for f in SENSOR_FEATURES
        }
        counts = {}
        for f in SENSOR_FEATURES:
            if cfg.missing_sensor_rate and rng.random() < cfg.missing_sensor_rate:
                counts[f] = None
            elif sociable[f]:
                counts[f] = int(rng.geometric(0.5))
            else:
                counts[f] = 0
        ema = None
        if i % cfg.report_cadence == cfg.report_cadence - 1:
            if sociable[cfg.planted_feature]:
                z = mu_soc + l_soc @ rng.standard_normal(_N_ITEMS)
            else:
                z = mu_iso + l_iso @ rng.standard_normal(_N_ITEMS)
            ema = EmaVector(tuple(int(s) for s in discretize(z)))
        records.append(
            DailyRecord(
                date=date,
                sensors=SensorDay(**counts),
                ema=ema,
                ema_source="reported" if ema is not None else "none",
            )
        )
    return ParticipantDataset(participant_id=f"synth-{cfg.seed}", records=tuple(records))


def discretized_correlation(corr: tuple, n_draws: int = 4_000_000, seed: int = 0) -> np.ndarray:
    """Large-sample correlation matrix of the discretized latent model.

    Accumulates integer cross-moments in chunks: scores are 0-3 so the sums
    stay exact in int64 and memory stays flat regardless of n_draws.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6F7261636C65]))
    l = _factor(np.asarray(corr, dtype=float))
    cross = np.zeros((_N_ITEMS, _N_ITEMS), dtype=np.int64)
    sums = np.zeros(_N_ITEMS, dtype=np.int64)
    remaining = n_draws
    chunk = 250_000
    while remaining > 0:
        m = min(chunk, remaining)
        x = discretize(rng.standard_normal((m, _N_ITEMS)) @ l.T)
        cross += x.T @ x
        sums += x.sum(axis=0)
        remaining -= m
    cov = cross.astype(float) - np.outer(sums, sums).astype(float) / n_draws
    var = np.diag(cov).copy()
    zero = var <= 0
    with np.errstate(invalid="ignore", divide="ignore"):
        out = cov / np.sqrt(np.outer(var, var))
    out[zero, :] = 0.0
    out[:, zero] = 0.0
    np.clip(out, -1.0, 1.0, out=out)
    np.fill_diagonal(out, 1.0)
    return out


def ground_truth(
    cfg: SynthConfig,
    subset: ItemSubset = ALL10,
    n_draws: int = 4_000_000,
    oracle_seed: int = 0,
) -> float:
    """Expected connectivity difference (isolation minus sociability).

    Brute-force oracle: simulates the discretization pipeline at large sample
    size, so Likert coarsening attenuation is priced into the planted effect.
    """
    if cfg.isolation_corr == cfg.sociability_corr:
        return 0.0
    idx = list(subset.indices)
    r_iso = discretized_correlation(cfg.isolation_corr, n_draws, oracle_seed)[np.ix_(idx, idx)]
    r_soc = discretized_correlation(cfg.sociability_corr, n_draws, oracle_seed + 1)[np.ix_(idx, idx)]
    return upper_triangle_sum(r_iso) - upper_triangle_sum(r_soc)
