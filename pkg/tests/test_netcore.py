import itertools
import math
import random

import numpy as np
import pytest

from emanet.ingest import EmaVector
from emanet.netcore import (
    ALL10,
    NEGATIVE_ONLY,
    POSITIVE_ONLY,
    CorrelationNetwork,
    InsufficientData,
    ItemSubset,
    SubsetMismatch,
    connectivity,
    connectivity_difference,
    export_network,
    network_from_json,
    network_to_dot,
    network_to_json,
    pearson_network,
)


def naive_pearson(x, y):
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    if sxx == 0 or syy == 0:
        return 0.0
    return sum((a - mx) * (b - my) for a, b in zip(x, y)) / math.sqrt(sxx * syy)


def vectors(columns):
    """Build EmaVectors from per-item columns, padding unused items with zeros."""
    n = len(columns[0])
    rows = []
    for i in range(n):
        scores = [columns[j][i] if j < len(columns) else 0 for j in range(10)]
        rows.append(EmaVector(tuple(scores)))
    return rows


def two_item_subset():
    return ItemSubset("pair", (0, 1))


class TestPearsonNetwork:
    def test_identical_sequences_correlate_one(self):
        days = vectors([[0, 1, 2, 3], [0, 1, 2, 3]])
        net = pearson_network(days, two_item_subset())
        assert net.matrix[0, 1] == pytest.approx(1.0)
        assert net.n_samples == 4

    def test_constant_item_zero_by_convention(self):
        days = vectors([[2, 2, 2, 2], [0, 1, 2, 3]])
        net = pearson_network(days, two_item_subset())
        assert net.matrix[0, 1] == 0.0
        assert net.matrix[0, 0] == 1.0

    def test_derived_pairs_against_formula(self):
        for a, b in [([0, 1, 2, 3], [3, 2, 1, 0]), ([0, 3, 0, 3], [0, 0, 3, 3])]:
            net = pearson_network(vectors([a, b]), two_item_subset())
            assert net.matrix[0, 1] == pytest.approx(naive_pearson(a, b), abs=1e-12)
        assert pearson_network(vectors([[0, 1, 2, 3], [3, 2, 1, 0]]), two_item_subset()).matrix[0, 1] == pytest.approx(-1.0)

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            pearson_network(vectors([[1], [2]]), two_item_subset())

    def test_subsets_resolve_indices(self):
        assert ALL10.indices == tuple(range(10))
        assert POSITIVE_ONLY.indices == (0, 1, 2, 3, 4)
        assert NEGATIVE_ONLY.indices == (5, 6, 7, 8, 9)
        assert POSITIVE_ONLY.labels == ("CAL", "SOC", "SLE", "THI", "HOP")
        assert NEGATIVE_ONLY.labels == ("DEP", "STR", "VOI", "SEE", "HAR")

    def test_order_invariance(self):
        rng = random.Random(5)
        days = [EmaVector(tuple(rng.randrange(4) for _ in range(10))) for _ in range(12)]
        shuffled = days[:]
        rng.shuffle(shuffled)
        a = pearson_network(days, ALL10)
        b = pearson_network(shuffled, ALL10)
        assert np.allclose(a.matrix, b.matrix, atol=1e-12)

    def test_affine_invariance_on_raw_rows(self):
        # Raw integer rows (not EmaVector) allow out-of-range values.
        rng = random.Random(9)
        rows = [[rng.randrange(4) for _ in range(3)] for _ in range(10)]
        subset = ItemSubset("t3", (0, 1, 2))
        base = pearson_network(rows, subset)
        shifted = pearson_network([[r[0] + 7, r[1], r[2]] for r in rows], subset)
        scaled = pearson_network([[r[0] * 3, r[1], r[2]] for r in rows], subset)
        negated = pearson_network([[-r[0], r[1], r[2]] for r in rows], subset)
        assert np.allclose(base.matrix, shifted.matrix, atol=1e-12)
        assert np.allclose(base.matrix, scaled.matrix, atol=1e-12)
        expected = base.matrix.copy()
        expected[0, 1:] *= -1
        expected[1:, 0] *= -1
        assert np.allclose(negated.matrix, expected, atol=1e-12)

    def test_random_samples_match_two_pass_formula(self):
        rng = random.Random(31)
        for _ in range(50):
            n = rng.randrange(3, 12)
            days = [EmaVector(tuple(rng.randrange(4) for _ in range(10))) for _ in range(n)]
            net = pearson_network(days, ALL10)
            cols = [[d.scores[i] for d in days] for i in range(10)]
            for i, j in itertools.combinations(range(10), 2):
                assert net.matrix[i, j] == pytest.approx(naive_pearson(cols[i], cols[j]), abs=1e-12)

    def test_matrix_invariants(self):
        rng = random.Random(77)
        days = [EmaVector(tuple(rng.randrange(4) for _ in range(10))) for _ in range(25)]
        net = pearson_network(days, ALL10)
        assert np.allclose(net.matrix, net.matrix.T)
        assert np.all(np.diag(net.matrix) == 1.0)
        assert np.all(np.abs(net.matrix) <= 1.0)


def network_with(offdiag, k=10):
    m = np.full((k, k), float(offdiag))
    np.fill_diagonal(m, 1.0)
    labels = ALL10.labels[:k]
    return CorrelationNetwork(items=tuple(labels), matrix=m, n_samples=25)


class TestConnectivity:
    def test_all_zero_offdiagonal(self):
        assert connectivity(network_with(0.0)) == 0.0

    def test_all_ones(self):
        assert connectivity(network_with(1.0)) == pytest.approx(45.0)

    def test_two_summation_orders_agree(self):
        rng = np.random.default_rng(3)
        m = rng.uniform(-1, 1, size=(5, 5))
        m = (m + m.T) / 2
        np.fill_diagonal(m, 1.0)
        net = CorrelationNetwork(items=POSITIVE_ONLY.labels, matrix=m, n_samples=10)
        direct = sum(m[i, j] for i in range(5) for j in range(i + 1, 5))
        halved = (m.sum() - np.trace(m)) / 2.0
        assert connectivity(net) == pytest.approx(direct, abs=1e-12)
        assert connectivity(net) == pytest.approx(halved, abs=1e-12)

    def test_difference_antisymmetry(self):
        a = network_with(0.4)
        b = network_with(-0.2)
        assert connectivity_difference(a, b) == pytest.approx(-connectivity_difference(b, a))
        assert connectivity_difference(a, a) == 0.0

    def test_all_ones_minus_zeros(self):
        assert connectivity_difference(network_with(1.0), network_with(0.0)) == pytest.approx(45.0)

    def test_subset_mismatch(self):
        with pytest.raises(SubsetMismatch):
            connectivity_difference(network_with(0.1), network_with(0.1, k=5))


class TestExport:
    def test_single_edge_dot(self):
        m = np.eye(10)
        i, j = 0, 4  # CAL, HOP
        m[i, j] = m[j, i] = 0.8
        net = CorrelationNetwork(items=ALL10.labels, matrix=m, n_samples=30)
        dot = network_to_dot(net)
        assert "CAL -- HOP [penwidth=4.2, color=blue];" in dot
        assert dot.count(" -- ") == 1

    def test_negative_edge_is_red(self):
        m = np.eye(10)
        m[5, 6] = m[6, 5] = -0.5
        net = CorrelationNetwork(items=ALL10.labels, matrix=m, n_samples=30)
        assert "DEP -- STR [penwidth=3, color=red];" in network_to_dot(net)

    def test_all_zero_network_has_isolated_nodes(self):
        net = network_with(0.0)
        dot = network_to_dot(net)
        assert " -- " not in dot
        for label in ALL10.labels:
            assert f"  {label};" in dot

    def test_threshold_hides_weak_edges(self):
        m = np.eye(10)
        m[0, 1] = m[1, 0] = 0.05
        net = CorrelationNetwork(items=ALL10.labels, matrix=m, n_samples=30)
        assert " -- " not in network_to_dot(net)

    def test_json_round_trip_exact(self):
        rng = np.random.default_rng(11)
        m = rng.uniform(-1, 1, size=(10, 10))
        m = (m + m.T) / 2
        np.fill_diagonal(m, 1.0)
        net = CorrelationNetwork(items=ALL10.labels, matrix=m, n_samples=42)
        back = network_from_json(network_to_json(net))
        assert back.items == net.items
        assert back.n_samples == 42
        assert np.array_equal(back.matrix, net.matrix)

    def test_export_dispatch(self):
        net = network_with(0.0)
        assert export_network(net, "json").startswith("{")
        assert export_network(net, "dot").startswith("graph")
        with pytest.raises(ValueError):
            export_network(net, "svg")
