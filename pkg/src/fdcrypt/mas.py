"""Maximal attribute sets: maximal column combinations that are not unique."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .partition import Partition, _from_labels, combine_labels, n_groups
from .relation import Relation


@dataclass(frozen=True, eq=False)
class MAS:
    attrs: tuple[str, ...]
    partition: Partition

    @property
    def attr_set(self) -> frozenset[str]:
        return frozenset(self.attrs)


@dataclass
class MASReport:
    mas_list: list[MAS]
    overlap_pairs: list[tuple[int, int]] = field(default_factory=list)

    @property
    def q(self) -> int:
        return len(self.mas_list)

    @property
    def h(self) -> int:
        return len(self.overlap_pairs)

    def attr_sets(self) -> list[frozenset[str]]:
        return [m.attr_set for m in self.mas_list]

    def covered(self) -> set[str]:
        return set().union(*self.attr_sets()) if self.mas_list else set()


def _overlaps(sets: list[frozenset[str]]) -> list[tuple[int, int]]:
    return [(i, j) for i, j in itertools.combinations(range(len(sets)), 2) if sets[i] & sets[j]]


def find_mas(rel: Relation) -> MASReport:
    """Bottom-up apriori walk over non-unique attribute sets.

    Non-uniqueness is closed under taking subsets, so a candidate of size l+1
    is only evaluated when all of its l-subsets are candidates.
    """
    n = rel.n
    if n < 2:
        return MASReport([])
    level: dict[tuple[int, ...], np.ndarray] = {}
    for j in range(rel.m):
        lab = np.asarray(rel.codes(j), dtype=np.int64)
        if n_groups(lab) < n:
            level[(j,)] = lab
    maximal: list[tuple[tuple[int, ...], np.ndarray]] = []
    while level:
        keys = sorted(level)
        nxt: dict[tuple[int, ...], np.ndarray] = {}
        extended: set[tuple[int, ...]] = set()
        for a, b in itertools.combinations(keys, 2):
            if a[:-1] != b[:-1]:
                continue
            cand = a + (b[-1],)
            if any(cand[:i] + cand[i + 1:] not in level for i in range(len(cand))):
                continue
            lab = combine_labels(level[a], np.asarray(rel.codes(b[-1]), dtype=np.int64))
            if n_groups(lab) < n:
                nxt[cand] = lab
                extended.update(cand[:i] + cand[i + 1:] for i in range(len(cand)))
        maximal.extend((k, level[k]) for k in keys if k not in extended)
        level = nxt
    maximal.sort()
    out = []
    for cols, lab in maximal:
        attrs = tuple(rel.attributes[j] for j in cols)
        out.append(MAS(attrs, _from_labels(rel, attrs, lab)))
    return MASReport(out, _overlaps([m.attr_set for m in out]))


def brute_force_mas(rel: Relation) -> set[frozenset[str]]:
    """Exhaustive 2^m enumeration of maximal non-unique sets."""
    if rel.m > 12:
        raise ValueError(f"exhaustive MAS check refuses m={rel.m} > 12")
    nonunique = []
    for size in range(1, rel.m + 1):
        for cols in itertools.combinations(range(rel.m), size):
            proj = [tuple(r[j] for j in cols) for r in rel.rows]
            if len(set(proj)) < len(proj):
                nonunique.append(frozenset(rel.attributes[j] for j in cols))
    return {s for s in nonunique if not any(s < t for t in nonunique)}


def verify_mas(rel: Relation, report: MASReport) -> bool:
    got = report.attr_sets()
    return len(got) == len(set(got)) and set(got) == brute_force_mas(rel)
