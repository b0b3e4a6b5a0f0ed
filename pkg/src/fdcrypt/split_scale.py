"""Splitting large classes into distinct-ciphertext copies and scaling to one frequency."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from collections.abc import Sequence

from .cipher import CellEncryptor, CipherTag
from .grouping import ECG, Member, is_fake


def piece_sizes(f: int, w: int) -> list[int]:
    """Balanced split of f into at most w nonempty pieces, larger pieces first."""
    q, r = divmod(f, w)
    return [q + 1] * r + [q] * (w - r) if q else [1] * r


def _pieces(sizes: Sequence[int], j: int, w: int) -> list[int]:
    out: list[int] = []
    for i, f in enumerate(sizes, start=1):
        out.extend(piece_sizes(f, w) if i >= j else [f])
    return out


def pad_cost(sizes: Sequence[int], j: int, w: int) -> int:
    """Exact scale-copy count when members j..k (1-based) are split into w pieces."""
    if w < 2:
        raise ValueError("split factor must be >= 2")
    if not 1 <= j <= len(sizes) + 1:
        raise ValueError(f"split point {j} outside [1, {len(sizes) + 1}]")
    pieces = _pieces(sizes, j, w)
    target = max(pieces)
    return sum(target - p for p in pieces)


def split_target(sizes: Sequence[int], j: int, w: int) -> int:
    return max(_pieces(sizes, j, w))


def find_split_point(sizes: Sequence[int], w: int, min_target: int = 1) -> tuple[int, int]:
    """Argmin of pad_cost over j in [1, k+1]; ties go to the larger j.

    ``min_target`` excludes split points whose homogenized frequency would
    drop below it (j = k+1 is always allowed). Runs in O(k) from prefix
    maxima and suffix piece counts instead of calling pad_cost per j.
    """
    if w < 2:
        raise ValueError("split factor must be >= 2")
    k = len(sizes)
    total = sum(sizes)
    pre = [0] * (k + 1)           # max of the first i sizes
    for i, f in enumerate(sizes):
        pre[i + 1] = max(pre[i], f)
    suf_n = [0] * (k + 1)         # pieces and max piece of sizes[i:] when split
    suf_m = [0] * (k + 1)
    for i in range(k - 1, -1, -1):
        f = sizes[i]
        suf_n[i] = suf_n[i + 1] + min(f, w)
        suf_m[i] = max(suf_m[i + 1], -(-f // w))
    best_j, best = k + 1, k * pre[k] - total
    for j in range(k, 0, -1):
        target = max(pre[j - 1], suf_m[j - 1])
        if target < min_target:
            continue
        c = ((j - 1) + suf_n[j - 1]) * target - total
        if c < best:
            best_j, best = j, c
    return best_j, best


@dataclass
class SplitPlan:
    ecg_id: str
    order: list[int]          # ECG member indices, ascending by size
    sizes: list[int]
    split_point: int
    target: int
    pieces: list[list[int]]   # per ordered member
    added: int


def _sort_key(c: Member):
    return (c.size, is_fake(c), c.members[0] if c.members else 0)


def plan_split(ecg: ECG, w: int, min_target: int = 1) -> SplitPlan:
    order = sorted(range(len(ecg.members)), key=lambda i: _sort_key(ecg.members[i]))
    sizes = [ecg.members[i].size for i in order]
    j, cost = find_split_point(sizes, w, min_target)
    pieces = [piece_sizes(f, w) if i >= j else [f] for i, f in enumerate(sizes, start=1)]
    target = max(p for ps in pieces for p in ps)
    return SplitPlan(ecg.id, order, sizes, j, target, pieces, cost)


class LazyCells(Sequence):
    """Per-attribute ciphertexts encrypted on first access.

    Singleton groups are large and most of their cells lose to another
    MAS's view when rows are assembled, so they are not encrypted up front.
    """

    def __init__(self, enc: CellEncryptor, attrs: Sequence[str], values: Sequence[str],
                 copy_index: int, scope: str):
        self._enc, self._attrs, self._values = enc, attrs, values
        self._copy, self._scope = copy_index, scope

    def __len__(self) -> int:
        return len(self._values)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return tuple(self[j] for j in range(len(self))[i])
        a, p = self._attrs[i], self._values[i]
        return self._enc(p, CipherTag(a, p, self._copy, self._scope))

    def __eq__(self, other) -> bool:
        return tuple(self) == tuple(other)

    def __hash__(self) -> int:
        return hash(tuple(self))


@dataclass
class Piece:
    """One ciphertext representative of an ECG member on its MAS."""

    mas: int
    scope: str
    member: int
    copy_index: int
    cells: Sequence           # Cipher per MAS attribute
    records: tuple[int, ...]  # real record ids carried (empty for fakes)
    size: int                 # occurrences before scaling
    target: int
    fake: bool

    @property
    def scale_copies(self) -> int:
        return self.target - self.size

    @property
    def trivial(self) -> bool:
        return self.target < 2


def apply_split_scale(ecg: ECG, plan: SplitPlan, enc: CellEncryptor,
                      mas_attrs: Sequence[str], mas_index: int = 0) -> list[Piece]:
    """Encrypt every piece of every member under its own copy index and scope."""
    out: list[Piece] = []
    for member_idx, sizes in zip(plan.order, plan.pieces):
        c = ecg.members[member_idx]
        ids = list(c.members)
        pos = 0
        for copy_index, size in enumerate(sizes, start=1):
            if ecg.singletons:
                copy_index = member_idx + 1
                cells = LazyCells(enc, mas_attrs, c.representative, copy_index, ecg.id)
            else:
                cells = tuple(
                    enc(p, CipherTag(a, p, copy_index, ecg.id))
                    for a, p in zip(mas_attrs, c.representative)
                )
            recs = tuple(ids[pos:pos + size]) if ids else ()
            pos += size
            out.append(Piece(mas_index, ecg.id, member_idx, copy_index, cells, recs,
                             size, plan.target, is_fake(c)))
    return out


def emitted_frequencies(pieces: Sequence[Piece]) -> Counter:
    """Frequency of each representative once scale copies are added."""
    return Counter({p.cells: p.size + p.scale_copies for p in pieces})


@dataclass
class MASStage:
    """Per-MAS output of grouping plus splitting and scaling."""

    index: int
    attrs: tuple[str, ...]
    ecgs: list[ECG]
    plans: list[SplitPlan]
    pieces: list[Piece]
    piece_of: dict[int, Piece]

    @property
    def fake_rows(self) -> int:
        return sum(p.size for p in self.pieces if p.fake)

    @property
    def scale_rows(self) -> int:
        return sum(p.scale_copies for p in self.pieces)


def build_stage(index: int, attrs: Sequence[str], ecgs: list[ECG], enc: CellEncryptor,
                w: int, min_target: int | None = None) -> MASStage:
    """Plan and encrypt every ECG of one MAS.

    By default an ECG whose largest member has two or more records keeps a
    homogenized frequency of at least two, so the MAS still shows up as a
    repeated ciphertext tuple after splitting.
    """
    plans: list[SplitPlan] = []
    pieces: list[Piece] = []
    for g in ecgs:
        floor = min_target if min_target is not None else (2 if max(g.sizes()) >= 2 else 1)
        plan = plan_split(g, w, floor)
        plans.append(plan)
        pieces.extend(apply_split_scale(g, plan, enc, attrs, index))
    piece_of = {rid: p for p in pieces for rid in p.records}
    return MASStage(index, tuple(attrs), ecgs, plans, pieces, piece_of)
