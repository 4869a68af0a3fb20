"""Shared builders: table games, reference Shapley values, blob instances."""

from __future__ import annotations

from itertools import combinations, permutations

import numpy as np

from shapreuse import (Coalition, Dataset, SupportMap, TableOracle, TestPoint,
                       TrainingPoint, UtilityCache, generate_synthetic,
                       make_family)


def dummy_dataset(n: int, num_classes: int = 1) -> Dataset:
    """Training points with placeholder features, for table games."""
    return Dataset([TrainingPoint(i, np.zeros(1), 0) for i in range(n)],
                   num_classes)


def dummy_tests(test_ids) -> list[TestPoint]:
    return [TestPoint(int(t), np.zeros(1), 0) for t in sorted(test_ids)]


def full_table(members, fill) -> dict[Coalition, float]:
    """Utility table over every subset of members, filled by a callable."""
    members = tuple(sorted(members))
    table = {}
    for r in range(len(members) + 1):
        for combo in combinations(members, r):
            c = Coalition(combo)
            table[c] = float(fill(c))
    return table


def random_local_game(rng, num_training, support_sizes):
    """One random utility table per test over a random support set."""
    supports = {}
    tables = {}
    for t, size in enumerate(support_sizes):
        zs = rng.choice(num_training, size=size, replace=False)
        supports[t] = frozenset(int(z) for z in zs)
        tables[t] = full_table(supports[t], lambda c: rng.uniform(0, 1))
    ds = dummy_dataset(num_training)
    tests = dummy_tests(range(len(support_sizes)))
    return ds, tests, SupportMap(supports), tables


def table_oracle(tables, supports=None, cached=False, bound=1.0):
    cache = UtilityCache(bound) if cached else None
    return TableOracle(tables, supports=supports, cache=cache)


def shapley_by_permutations(table, players) -> dict[int, float]:
    """Reference values: marginals averaged over every ordering.

    Deliberately shares nothing with the library's weight computation.
    """
    players = tuple(sorted(players))
    totals = {z: 0.0 for z in players}
    count = 0
    for perm in permutations(players):
        current = Coalition(())
        prev = table[current]
        for z in perm:
            current = current.plus(z)
            totals[z] += table[current] - prev
            prev = table[current]
        count += 1
    return {z: totals[z] / count for z in players}


def glove_game():
    """Three players: 0 and 1 hold left gloves, 2 holds the only right one.

    A coalition is worth the number of complete pairs it can form, so the
    exact values are 1/6, 1/6, and 2/3.
    """

    def pairs(c):
        left = sum(1 for z in c if z in (0, 1))
        right = sum(1 for z in c if z == 2)
        return float(min(left, right))

    table = full_table((0, 1, 2), pairs)
    supports = SupportMap({0: frozenset({0, 1, 2})})
    return dummy_dataset(3), dummy_tests([0]), supports, {0: table}


def blob_instance(seed=0, family_kind="wknn", num_classes=2, per_class=5,
                  test_per_class=2, dim=2, noise=1.0, shift=0.0, **hp):
    """Synthetic blobs plus a fitted-family support map."""
    ds, tests = generate_synthetic(num_classes=num_classes,
                                   per_class=per_class,
                                   test_per_class=test_per_class, dim=dim,
                                   noise=noise, shift=shift, seed=seed)
    family = make_family(family_kind, **hp)
    supports = family.support_map(ds, tests)
    return ds, tests, supports, family
