"""Synthetic relations: small hand-checked tables, random FD-bearing tables, a wide benchmark table."""

from __future__ import annotations

import random

import numpy as np

from .relation import Relation


def constant_table() -> Relation:
    """Four records over {A, B, C}: A and B constant, C with one repeat."""
    return Relation("ABC", [("a1", "b1", "c1"), ("a1", "b1", "c2"),
                            ("a1", "b1", "c3"), ("a1", "b1", "c1")])


def five_class_table() -> Relation:
    """Sixteen records over {A, B} with classes of sizes 5, 4, 3, 2, 2."""
    classes = {
        ("a1", "b1"): [1, 4, 5, 7, 12],
        ("a1", "b2"): [2, 6, 8, 14],
        ("a2", "b2"): [3, 9, 16],
        ("a2", "b1"): [10, 11],
        ("a3", "b3"): [13, 15],
    }
    rows = [None] * 16
    for value, ids in classes.items():
        for i in ids:
            rows[i - 1] = value
    return Relation("AB", rows)


def overlap_table() -> Relation:
    """Six records whose maximal attribute sets {A, B} and {B, C} share B."""
    return Relation("ABC", [("a3", "b2", "c1"), ("a1", "b2", "c1"), ("a2", "b2", "c1"),
                            ("a2", "b2", "c2"), ("a3", "b2", "c2"), ("a1", "b1", "c3")])


def false_positive_table() -> Relation:
    """Fourteen records where B -> A holds but A -> B does not."""
    return Relation("AB", [("a1", "b1")] * 5 + [("a2", "b3")] * 2
                    + [("a1", "b2")] * 4 + [("a2", "b4")] * 3)


def _draw(rng: np.random.Generator, size: int, n: int, skew: bool) -> np.ndarray:
    if skew:
        w = 1.0 / np.arange(1, size + 1) ** 1.2
        return rng.choice(size, n, p=w / w.sum())
    return rng.integers(0, size, n)


def random_relation(seed: int, m: int, n: int, skew: bool = False) -> Relation:
    """Base columns plus columns derived from one or two earlier columns.

    Derived columns follow their sources through a random map, except for a
    small share of rows that get noise, so some dependencies hold exactly
    and others are broken by a handful of records.
    """
    rng = np.random.default_rng(seed)
    cols: list[np.ndarray] = []
    n_base = int(rng.integers(1, max(2, m // 2) + 1))
    for j in range(m):
        if j < n_base or rng.random() < 0.25:
            size = int(rng.integers(2, 40))
            cols.append(_draw(rng, size, n, skew))
            continue
        src = rng.choice(j, size=min(j, int(rng.integers(1, 3))), replace=False)
        key = np.zeros(n, dtype=np.int64)
        for s in src:
            key = key * (int(cols[s].max()) + 1) + cols[s]
        size = int(rng.integers(2, 30))
        table = rng.integers(0, size, int(key.max()) + 1)
        col = table[key]
        if rng.random() < 0.5:
            noisy = rng.random(n) < rng.choice([0.002, 0.01, 0.05])
            col = np.where(noisy, rng.integers(0, size, n), col)
        cols.append(col)
    names = [chr(ord("A") + j) for j in range(m)]
    rows = [tuple(f"{names[j].lower()}{int(cols[j][i])}" for j in range(m)) for i in range(n)]
    return Relation(names, rows)


def orders_table(n: int = 100_000, seed: int = 0) -> Relation:
    """A 9-column order-line table in the style of a TPC-H extract.

    ``okey`` and ``comment`` are unique; ``cust -> nation -> region`` form a
    dependency chain; quantity, discount, ship mode and date are independent
    and fairly high-cardinality.
    """
    rng = np.random.default_rng(seed)
    cust = rng.integers(0, n // 4, n)
    nation_of = rng.integers(0, 25, n // 4)
    region_of = rng.integers(0, 5, 25)
    nation = nation_of[cust]
    region = region_of[nation]
    qty = rng.integers(1, 51, n)
    disc = rng.integers(0, 11, n)
    mode = rng.integers(0, 7, n)
    day = rng.integers(0, 2400, n)
    pyrng = random.Random(seed)
    names = ["okey", "cust", "nation", "region", "qty", "disc", "mode", "shipdate", "comment"]
    rows = []
    for i in range(n):
        rows.append((
            f"o{i:07d}", f"c{cust[i]}", f"n{nation[i]}", f"r{region[i]}", str(qty[i]),
            f"0.{disc[i]:02d}", f"m{mode[i]}", f"d{day[i]}", f"{pyrng.getrandbits(48):012x}",
        ))
    return Relation(names, rows)


def multi_mas_relation(seed: int, m: int, n: int) -> Relation:
    """Wide-domain columns so that full tuples are unique and several
    overlapping attribute sets still repeat."""
    rng = np.random.default_rng(seed)
    cols = []
    for j in range(m):
        size = int(rng.integers(max(3, n // 6), max(4, n // 2)))
        if j and rng.random() < 0.3:
            src = int(rng.integers(0, j))
            table = rng.integers(0, size, int(cols[src].max()) + 1)
            col = table[cols[src]]
        else:
            col = _draw(rng, size, n, skew=bool(rng.random() < 0.5))
        cols.append(col)
    names = [chr(ord("A") + j) for j in range(m)]
    rows = [tuple(f"{names[j].lower()}{int(cols[j][i])}" for j in range(m)) for i in range(n)]
    return Relation(names, rows)
