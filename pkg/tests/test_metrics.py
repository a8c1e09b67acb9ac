import random

import pytest
from sklearn.metrics import adjusted_rand_score, normalized_mutual_info_score

from bikeflow import Partition, compare_partitions
from bikeflow.metrics import PartitionMismatchError, ari, nmi


def test_identical_partitions_score_one():
    part = Partition([0, 0, 1, 1, 2])
    sim = compare_partitions(part, part.copy())
    assert sim.nmi == 1.0
    assert sim.ari == 1.0


def test_constant_partition_has_zero_nmi():
    allinone = Partition([0, 0, 0, 0])
    other = Partition([0, 0, 1, 1])
    assert nmi(allinone, other) == 0.0
    assert nmi(other, allinone) == 0.0


def test_both_constant_counts_as_identical():
    assert nmi(Partition([0, 0, 0]), Partition([2, 2, 2])) == 1.0


def test_hand_computed_ari():
    # contingency table of {{1,2},{3,4}} vs {{1,3},{2,4}} is all ones
    sim = compare_partitions(Partition([0, 0, 1, 1]), Partition([0, 1, 0, 1]))
    assert sim.ari == pytest.approx(-0.5, abs=1e-12)
    assert sim.nmi == 0.0


def test_unassigned_nodes_are_excluded():
    a = Partition([0, 0, 1, 1, -1])
    b = Partition([1, 1, 0, 0, 0])
    sim = compare_partitions(a, b)
    assert sim.nmi == 1.0 and sim.ari == 1.0
    # too little overlap degenerates to zero
    sparse = Partition([0, -1, -1, -1, -1])
    assert compare_partitions(sparse, b) == (0.0, 0.0)


def test_mismatched_universes_raise():
    with pytest.raises(PartitionMismatchError):
        compare_partitions(Partition([0, 1]), Partition([0, 1, 2]))


def test_matches_sklearn_on_random_labelings():
    rng = random.Random(202)
    for _ in range(200):
        n = rng.randint(2, 40)
        a = [rng.randrange(rng.randint(1, 6)) for _ in range(n)]
        b = [rng.randrange(rng.randint(1, 6)) for _ in range(n)]
        sim = compare_partitions(Partition(a), Partition(b))
        assert sim.nmi == pytest.approx(
            normalized_mutual_info_score(a, b, average_method="arithmetic"), abs=1e-9
        )
        assert sim.ari == pytest.approx(adjusted_rand_score(a, b), abs=1e-9)


def test_ari_degenerate_agreement():
    # all singletons on both sides: denominator collapses, perfect agreement
    assert ari(Partition([0, 1, 2]), Partition([2, 0, 1])) == 1.0
