"""Partition similarity: normalized mutual information and adjusted Rand.

Both scores are computed over nodes assigned in *both* partitions; the node
universes must match. NMI uses arithmetic normalization.
"""

from __future__ import annotations

from math import log
from typing import NamedTuple

from .partition import UNASSIGNED, Partition


class PartitionMismatchError(ValueError):
    """Partitions do not share a node universe."""


class PartitionSimilarity(NamedTuple):
    nmi: float
    ari: float


def _contingency(a: Partition, b: Partition) -> tuple[dict[tuple[int, int], int], dict[int, int], dict[int, int], int]:
    if len(a) != len(b):
        raise PartitionMismatchError(
            f"partitions cover {len(a)} and {len(b)} nodes; universes must match"
        )
    joint: dict[tuple[int, int], int] = {}
    rows: dict[int, int] = {}
    cols: dict[int, int] = {}
    n = 0
    for la, lb in zip(a, b):
        if la == UNASSIGNED or lb == UNASSIGNED:
            continue
        n += 1
        joint[(la, lb)] = joint.get((la, lb), 0) + 1
        rows[la] = rows.get(la, 0) + 1
        cols[lb] = cols.get(lb, 0) + 1
    return joint, rows, cols, n


def nmi(a: Partition, b: Partition) -> float:
    """Arithmetically normalized mutual information in [0, 1].

    0 when either labeling is constant (no information) unless both are,
    in which case the partitions are identical and the score is 1.
    """
    joint, rows, cols, n = _contingency(a, b)
    if n < 2:
        return 0.0
    h_a = -sum((c / n) * log(c / n) for c in rows.values())
    h_b = -sum((c / n) * log(c / n) for c in cols.values())
    if h_a == 0.0 and h_b == 0.0:
        return 1.0
    mi = 0.0
    for (la, lb), c in joint.items():
        mi += (c / n) * log(c * n / (rows[la] * cols[lb]))
    if mi <= 0.0:
        return 0.0
    return min(1.0, 2.0 * mi / (h_a + h_b))


def ari(a: Partition, b: Partition) -> float:
    """Adjusted Rand index in [-1, 1]; 1 for degenerate perfect agreement."""
    joint, rows, cols, n = _contingency(a, b)
    if n < 2:
        return 0.0

    def comb2(x: int) -> float:
        return x * (x - 1) / 2.0

    sum_joint = sum(comb2(c) for c in joint.values())
    sum_rows = sum(comb2(c) for c in rows.values())
    sum_cols = sum(comb2(c) for c in cols.values())
    expected = sum_rows * sum_cols / comb2(n)
    maximum = 0.5 * (sum_rows + sum_cols)
    if maximum == expected:
        return 1.0
    return (sum_joint - expected) / (maximum - expected)


def compare_partitions(a: Partition, b: Partition) -> PartitionSimilarity:
    """(NMI, ARI) over the nodes assigned in both partitions."""
    return PartitionSimilarity(nmi=nmi(a, b), ari=ari(a, b))
