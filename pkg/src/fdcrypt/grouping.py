"""Grouping equivalence classes of one MAS into collision-free ECGs."""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

from .mas import MAS
from .partition import EquivalenceClass

FRESH_PREFIX = "~fresh~"


@dataclass(frozen=True)
class SecurityConfig:
    alpha: float = 0.2
    split_factor: int = 2
    key_bits: int = 128
    seed: int | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.split_factor < 2:
            raise ValueError(f"split factor must be >= 2, got {self.split_factor}")
        if self.key_bits not in (128, 256):
            raise ValueError(f"unsupported key size {self.key_bits}")

    @property
    def k(self) -> int:
        # guard against 1/0.2 = 5.000000000000001 style rounding
        return max(2, math.ceil(1.0 / self.alpha - 1e-9))


class FreshTokens:
    """Tokens that never occur in a given domain (reserved prefix + 128 random bits)."""

    def __init__(self, rng: random.Random, domain: Iterable = ()):
        self.rng = rng
        self.taken: set = set(domain)

    def __call__(self) -> str:
        while True:
            tok = f"{FRESH_PREFIX}{self.rng.getrandbits(128):032x}"
            if tok not in self.taken:
                self.taken.add(tok)
                return tok

    def tuple(self, arity: int) -> tuple[str, ...]:
        return tuple(self() for _ in range(arity))


@dataclass(frozen=True)
class FakeClass:
    """A padding member: fresh representative, no real records."""

    representative: tuple
    size: int

    @property
    def members(self) -> tuple[int, ...]:
        return ()


Member = Union[EquivalenceClass, FakeClass]


def is_fake(c: Member) -> bool:
    return isinstance(c, FakeClass)


@dataclass
class ECG:
    id: str
    members: list[Member]
    k: int
    fake_count: int = 0
    singletons: bool = False   # size-1 classes, each encrypted under its own tag

    def real(self) -> list[EquivalenceClass]:
        return [c for c in self.members if not is_fake(c)]

    def sizes(self) -> list[int]:
        return [c.size for c in self.members]


def collides(c1: Member, c2: Member) -> bool:
    """True iff the two representatives agree on at least one attribute."""
    return any(a == b for a, b in zip(c1.representative, c2.representative))


@dataclass
class _Pool:
    """Ungrouped classes in size order, with per-attribute value counts."""

    order: list[EquivalenceClass]
    nxt: list[int] = field(init=False)
    alive: list[bool] = field(init=False)
    counts: list[Counter] = field(init=False)
    remaining: int = field(init=False)
    head: int = 0

    def __post_init__(self):
        t = len(self.order)
        self.nxt = list(range(1, t + 1))
        self.alive = [True] * t
        arity = len(self.order[0].representative) if self.order else 0
        self.counts = [Counter(c.representative[a] for c in self.order) for a in range(arity)]
        self.remaining = t

    def take(self, i: int) -> EquivalenceClass:
        self.alive[i] = False
        self.remaining -= 1
        c = self.order[i]
        for a, v in enumerate(c.representative):
            self.counts[a][v] -= 1
        return c

    def first(self) -> int:
        while self.head < len(self.order) and not self.alive[self.head]:
            self.head += 1
        return self.head

    def scan(self, start: int):
        """Alive indices after ``start`` in order, compressing dead links."""
        prev, i = start, self.nxt[start]
        t = len(self.order)
        while i < t:
            if self.alive[i]:
                yield i
                prev = i
            else:
                # skip runs of dead entries for later scans
                j = i
                while j < t and not self.alive[j]:
                    j = self.nxt[j]
                self.nxt[prev] = j
                i = j
                continue
            i = self.nxt[i]

    def feasible(self, used: list[set]) -> bool:
        """Necessary condition for some ungrouped class avoiding ``used``."""
        for a, vals in enumerate(used):
            if self.remaining - sum(self.counts[a][v] for v in vals) <= 0:
                return False
        return True


Packing = Callable[[Sequence[EquivalenceClass], int], list[list[EquivalenceClass]]]


def greedy_pack(order: Sequence[EquivalenceClass], k: int) -> list[list[EquivalenceClass]]:
    """Closest-size greedy: seed with the smallest ungrouped class, then scan
    upward for classes that collide with no member so far, up to k members."""
    arity = len(order[0].representative) if order else 0
    pool = _Pool(list(order))
    groups: list[list[EquivalenceClass]] = []
    while pool.remaining:
        s = pool.first()
        seed = pool.take(s)
        members = [seed]
        used = [{v} for v in seed.representative]
        if pool.remaining and pool.feasible(used):
            for i in pool.scan(s):
                c = order[i]
                if any(c.representative[a] in used[a] for a in range(arity)):
                    continue
                members.append(pool.take(i))
                for a in range(arity):
                    used[a].add(c.representative[a])
                if len(members) == k or not pool.feasible(used):
                    break
        groups.append(members)
    return groups


def build_ecgs(mas: MAS, config: SecurityConfig, fresh: FreshTokens,
               mas_index: int = 0, pack: Packing = greedy_pack) -> list[ECG]:
    """Pack the classes of pi_M into ECGs of k collision-free members.

    Classes with two or more records are handed to ``pack`` in ascending
    (size, smallest record id) order. Groups it returns short of k members
    are padded with fake classes of the smallest real member size.

    Size-1 classes skip the packing: every one of their cells is unique in
    the output anyway, so they share one group ``m{i}.s`` whose members get
    distinct tags, padded with fake singletons up to k when short.
    """
    k = config.k
    arity = len(mas.attrs)
    order = sorted((c for c in mas.partition.classes if c.size > 1),
                   key=lambda c: (c.size, c.min_id))
    single = sorted((c for c in mas.partition.classes if c.size == 1), key=lambda c: c.min_id)
    packed = pack(order, k)
    if sorted(c.members for g in packed for c in g) != sorted(c.members for c in order):
        raise ValueError("packing must place every class exactly once")
    groups: list[ECG] = []
    for real in packed:
        if not real or len(real) > k or any(
                collides(a, b) for i, a in enumerate(real) for b in real[i + 1:]):
            raise ValueError("packing returned an empty, oversized or colliding group")
        members: list[Member] = list(real)
        fakes = k - len(members)
        if fakes > 0:
            size = min(c.size for c in real)
            members.extend(FakeClass(fresh.tuple(arity), size) for _ in range(fakes))
        groups.append(ECG(f"m{mas_index}.g{len(groups)}", members, k, max(fakes, 0)))
    if single:
        fakes = max(0, k - len(single))
        members = list(single) + [FakeClass(fresh.tuple(arity), 1) for _ in range(fakes)]
        groups.append(ECG(f"m{mas_index}.s", members, k, fakes, singletons=True))
    return groups
