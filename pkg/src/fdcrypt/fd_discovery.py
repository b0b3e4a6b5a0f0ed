"""Level-wise discovery of minimal functional dependencies.

Only dependencies with a nonempty left-hand side are reported. A candidate
X -> A is tested with stripped partitions: it holds iff refining pi_X by A
creates no new class. Sets whose every possible right-hand side is already
implied by a smaller left-hand side (keys included) are not extended.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .partition import compute_partition, refines
from .relation import Relation

log = logging.getLogger(__name__)

DEFAULT_MAX_ATTRS = 20


@dataclass(frozen=True, order=True)
class FD:
    lhs: tuple[str, ...]
    rhs: str

    def __post_init__(self):
        object.__setattr__(self, "lhs", tuple(sorted(set(self.lhs))))

    @property
    def trivial(self) -> bool:
        return self.rhs in self.lhs

    def __str__(self) -> str:
        return f"{','.join(self.lhs)} -> {self.rhs}"

    @classmethod
    def parse(cls, text: str) -> "FD":
        left, _, right = text.partition("->")
        return cls(tuple(a.strip() for a in left.split(",") if a.strip()), right.strip())


FDSet = frozenset


@dataclass
class FDDiff:
    only_a: list[FD]
    only_b: list[FD]

    @property
    def empty(self) -> bool:
        return not self.only_a and not self.only_b


class _Stripped:
    """Rows lying in non-singleton classes, with their class labels."""

    __slots__ = ("rows", "labels", "groups")

    def __init__(self, rows: np.ndarray, labels: np.ndarray, groups: int):
        self.rows, self.labels, self.groups = rows, labels, groups

    @classmethod
    def from_codes(cls, codes: np.ndarray) -> "_Stripped":
        return cls._build(np.arange(codes.size), codes)

    @classmethod
    def _build(cls, rows: np.ndarray, key: np.ndarray) -> "_Stripped":
        if rows.size == 0:
            return cls(rows, key, 0)
        _, inv, counts = np.unique(key, return_inverse=True, return_counts=True)
        inv = inv.reshape(-1)
        keep = counts[inv] > 1
        kept_inv = inv[keep]
        if kept_inv.size == 0:
            return cls(rows[keep], kept_inv, 0)
        _, lab = np.unique(kept_inv, return_inverse=True)
        lab = lab.reshape(-1)
        return cls(rows[keep], lab, int(lab.max()) + 1)

    def refine(self, codes: np.ndarray) -> "_Stripped":
        if self.rows.size == 0:
            return self
        sub = codes[self.rows]
        return _Stripped._build(self.rows, self.labels * (int(sub.max()) + 1) + sub)

    def distinct_with(self, codes: np.ndarray) -> int:
        if self.rows.size == 0:
            return 0
        sub = codes[self.rows]
        return int(np.unique(self.labels * (int(sub.max()) + 1) + sub).size)


def discover_fds(rel: Relation, max_attrs: int = DEFAULT_MAX_ATTRS) -> frozenset[FD]:
    """All minimal non-trivial FDs X -> A with nonempty X."""
    m = rel.m
    if m > max_attrs:
        raise ValueError(f"FD discovery is capped at {max_attrs} attributes, got {m}")
    if m < 2:
        return frozenset()
    codes = [np.asarray(rel.codes(j), dtype=np.int64) for j in range(m)]
    found: list[list[int]] = [[] for _ in range(m)]   # bitmask lhs per rhs
    out: list[FD] = []
    level = {(j,): _Stripped.from_codes(codes[j]) for j in range(m)}
    while level:
        kept: dict[tuple[int, ...], _Stripped] = {}
        for x in sorted(level):
            sp = level[x]
            mask = sum(1 << j for j in x)
            open_rhs = False
            for a in range(m):
                if mask >> a & 1 or any(f & mask == f for f in found[a]):
                    continue
                if sp.distinct_with(codes[a]) == sp.groups:
                    found[a].append(mask)
                    out.append(FD(tuple(rel.attributes[j] for j in x), rel.attributes[a]))
                else:
                    open_rhs = True
            if open_rhs:
                kept[x] = sp
        nxt: dict[tuple[int, ...], _Stripped] = {}
        keys = sorted(kept)
        for i, a in enumerate(keys):
            for b in keys[i + 1:]:
                if a[:-1] != b[:-1]:
                    break
                cand = a + (b[-1],)
                if all(cand[:t] + cand[t + 1:] in kept for t in range(len(cand))):
                    nxt[cand] = kept[a].refine(codes[b[-1]])
        level = nxt
    log.debug("discovered %d minimal FDs over %d attributes", len(out), m)
    return frozenset(out)


def fd_holds(rel: Relation, fd: FD) -> bool:
    if fd.trivial:
        return True
    if not fd.lhs:
        return len(set(rel.column(fd.rhs))) <= 1
    return refines(compute_partition(rel, fd.lhs), compute_partition(rel, [fd.rhs]))


def compare_fd_sets(a: Iterable[FD], b: Iterable[FD]) -> FDDiff:
    a, b = set(a), set(b)
    return FDDiff(sorted(a - b), sorted(b - a))


def format_fds(fds: Iterable[FD]) -> list[str]:
    return [str(f) for f in sorted(fds, key=lambda f: (f.rhs, len(f.lhs), f.lhs))]
