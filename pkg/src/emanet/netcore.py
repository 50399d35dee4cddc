"""Pearson correlation networks over EMA item subsets, and their connectivity.

Connectivity is the sum of the strictly-upper-triangle entries: every unordered
item pair counted once, diagonal excluded. Networks can be exported as JSON
(verbatim matrix) or Graphviz DOT (display-thresholded, signed edge colors).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .ingest import EMA_ITEMS

# 3-letter node codes used in exported networks.
ITEM_CODES = {
    "calm": "CAL",
    "social": "SOC",
    "sleeping": "SLE",
    "think": "THI",
    "hopeful": "HOP",
    "depressed": "DEP",
    "stressed": "STR",
    "voices": "VOI",
    "seeing": "SEE",
    "harm": "HAR",
}

DOT_EDGE_THRESHOLD = 0.1


class InsufficientData(ValueError):
    """Too few days to estimate a correlation network."""


class SubsetMismatch(ValueError):
    """Two networks cover different item sets."""


@dataclass(frozen=True)
class ItemSubset:
    """A named slice of the 10 EMA items: all, positive (0-4) or negative (5-9)."""

    selector: str
    indices: tuple

    @classmethod
    def from_flag(cls, flag: str) -> "ItemSubset":
        try:
            return {"all": ALL10, "positive": POSITIVE_ONLY, "negative": NEGATIVE_ONLY}[flag]
        except KeyError:
            raise ValueError(f"unknown subset flag {flag!r}") from None

    @property
    def labels(self) -> tuple:
        return tuple(ITEM_CODES[EMA_ITEMS[i]] for i in self.indices)

    @property
    def size(self) -> int:
        return len(self.indices)


ALL10 = ItemSubset("all", tuple(range(10)))
POSITIVE_ONLY = ItemSubset("positive", (0, 1, 2, 3, 4))
NEGATIVE_ONLY = ItemSubset("negative", (5, 6, 7, 8, 9))


@dataclass(frozen=True, eq=False)
class CorrelationNetwork:
    items: tuple
    matrix: np.ndarray = field(repr=False)
    n_samples: int

    def __post_init__(self):
        m = self.matrix
        if m.shape != (len(self.items), len(self.items)):
            raise ValueError("matrix dimension must match item count")
        m.flags.writeable = False


def correlation_matrix(data: np.ndarray) -> np.ndarray:
    """Pearson correlation matrix of columns of an (n_days x k) array.

    Zero-variance columns get correlation 0 against everything; the diagonal
    is forced to 1. Entries are clipped to [-1, 1] against rounding.
    """
    data = np.asarray(data, dtype=float)
    if data.ndim != 2:
        raise ValueError("expected a 2-D array of days x items")
    if data.shape[0] < 2:
        raise InsufficientData(f"need at least 2 days, got {data.shape[0]}")
    centered = data - data.mean(axis=0)
    ss = np.einsum("ij,ij->j", centered, centered)
    zero = np.ptp(data, axis=0) == 0
    denom = np.sqrt(np.outer(ss, ss))
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = (centered.T @ centered) / denom
    corr[zero, :] = 0.0
    corr[:, zero] = 0.0
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    return corr


def pearson_network(days, subset: ItemSubset) -> CorrelationNetwork:
    """Estimate the correlation network of an EMA item subset across days.

    `days` is a sequence of EmaVector (or rows of 10 scores).
    """
    rows = [d.scores if hasattr(d, "scores") else tuple(d) for d in days]
    if len(rows) < 2:
        raise InsufficientData(f"need at least 2 days, got {len(rows)}")
    data = np.asarray(rows, dtype=float)[:, list(subset.indices)]
    return CorrelationNetwork(items=subset.labels, matrix=correlation_matrix(data), n_samples=len(rows))


def upper_triangle_sum(matrix: np.ndarray) -> float:
    """Sum of strictly-upper-triangle entries (each pair once, no diagonal)."""
    return float(np.triu(matrix, k=1).sum())


def connectivity(net: CorrelationNetwork) -> float:
    return upper_triangle_sum(net.matrix)


def connectivity_difference(net_a: CorrelationNetwork, net_b: CorrelationNetwork) -> float:
    """connectivity(net_a) - connectivity(net_b).

    Convention: a is the isolation category, b sociability; for baseline runs
    a is the first random sample and b the second.
    """
    if net_a.items != net_b.items:
        raise SubsetMismatch(f"item sets differ: {net_a.items} vs {net_b.items}")
    return connectivity(net_a) - connectivity(net_b)


def network_to_json(net: CorrelationNetwork) -> str:
    payload = {
        "items": list(net.items),
        "n_samples": net.n_samples,
        "matrix": [[float(v) for v in row] for row in net.matrix],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def network_from_json(text: str) -> CorrelationNetwork:
    payload = json.loads(text)
    return CorrelationNetwork(
        items=tuple(payload["items"]),
        matrix=np.asarray(payload["matrix"], dtype=float),
        n_samples=int(payload["n_samples"]),
    )


def network_to_dot(net: CorrelationNetwork, threshold: float = DOT_EDGE_THRESHOLD) -> str:
    """Render an undirected weighted graph; display-only edge threshold.

    Edge width scales as 1 + 4|r|; blue for positive correlations, red for
    negative. The underlying matrix is never thresholded, only this view.
    """
    lines = ["graph ema_network {", "  node [shape=circle];"]
    for label in net.items:
        lines.append(f"  {label};")
    k = len(net.items)
    for i in range(k):
        for j in range(i + 1, k):
            r = float(net.matrix[i, j])
            if abs(r) < threshold:
                continue
            color = "blue" if r > 0 else "red"
            width = 1.0 + 4.0 * abs(r)
            lines.append(
                f"  {net.items[i]} -- {net.items[j]} "
                f"[penwidth={format(width, '.6g')}, color={color}];"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_network(net: CorrelationNetwork, fmt: str) -> str:
    if fmt == "json":
        return network_to_json(net)
    if fmt == "dot":
        return network_to_dot(net)
    raise ValueError(f"unknown export format {fmt!r}")
