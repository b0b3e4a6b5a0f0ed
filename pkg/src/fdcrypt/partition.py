"""Partitions of a relation into equivalence classes under an attribute set."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .relation import Relation, RelationError


@dataclass(frozen=True)
class EquivalenceClass:
    representative: tuple
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def min_id(self) -> int:
        return self.members[0]


@dataclass(frozen=True, eq=False)
class Partition:
    """pi_X: classes sorted by their smallest record id, members sorted."""

    rel: Relation
    attrs: tuple[str, ...]
    classes: tuple[EquivalenceClass, ...]

    def __len__(self) -> int:
        return len(self.classes)

    def sizes(self) -> list[int]:
        return [c.size for c in self.classes]

    def is_unique(self) -> bool:
        return all(c.size == 1 for c in self.classes)

    def same_as(self, other: "Partition") -> bool:
        """Set-equality of the member groupings (ignores order and attrs)."""
        return {c.members for c in self.classes} == {c.members for c in other.classes}

    def class_of(self) -> dict[int, int]:
        return {rid: i for i, c in enumerate(self.classes) for rid in c.members}


def group_labels(rel: Relation, cols: Sequence[int]) -> np.ndarray:
    """Dense labels (0..t-1) over row positions for the projection on ``cols``."""
    if not cols:
        return np.zeros(rel.n, dtype=np.int64)
    lab = np.asarray(rel.codes(cols[0]), dtype=np.int64)
    for j in cols[1:]:
        lab = combine_labels(lab, np.asarray(rel.codes(j), dtype=np.int64))
    return lab


def combine_labels(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.size == 0:
        return a
    key = a * (int(b.max()) + 1) + b
    _, inv = np.unique(key, return_inverse=True)
    return inv.astype(np.int64).reshape(-1)


def n_groups(lab: np.ndarray) -> int:
    return int(lab.max()) + 1 if lab.size else 0


def _from_labels(rel: Relation, attrs: tuple[str, ...], lab: np.ndarray) -> Partition:
    idx = rel.indices(attrs)
    groups: dict[int, list[int]] = {}
    for pos, g in enumerate(lab.tolist()):
        groups.setdefault(g, []).append(pos)
    classes = []
    for positions in groups.values():
        row = rel.rows[positions[0]]
        members = tuple(sorted(rel.ids[p] for p in positions))
        classes.append(EquivalenceClass(tuple(row[j] for j in idx), members))
    classes.sort(key=lambda c: c.min_id)
    return Partition(rel, attrs, tuple(classes))


def compute_partition(rel: Relation, attrs: Iterable[str]) -> Partition:
    attrs = rel.sorted_attrs(attrs)
    if not attrs:
        raise RelationError("partition needs a nonempty attribute set")
    return _from_labels(rel, attrs, group_labels(rel, rel.indices(attrs)))


def partition_product(p1: Partition, p2: Partition) -> Partition:
    if p1.rel is not p2.rel:
        raise RelationError("partitions come from different relations")
    rel = p1.rel
    pos = {rid: i for i, rid in enumerate(rel.ids)}
    a = np.empty(rel.n, dtype=np.int64)
    b = np.empty(rel.n, dtype=np.int64)
    for lab, p in ((a, p1), (b, p2)):
        for ci, c in enumerate(p.classes):
            for rid in c.members:
                lab[pos[rid]] = ci
    attrs = rel.sorted_attrs(p1.attrs + p2.attrs)
    return _from_labels(rel, attrs, combine_labels(a, b))


def refines(p1: Partition, p2: Partition) -> bool:
    """True iff every class of p1 lies inside one class of p2."""
    if p1.rel is not p2.rel:
        raise RelationError("partitions come from different relations")
    owner = p2.class_of()
    for c in p1.classes:
        first = owner[c.members[0]]
        if any(owner[r] != first for r in c.members[1:]):
            return False
    return True
