"""Synchronizing the per-MAS encryptions into one table of rows.

Every record carries one *view* per MAS: the ciphertext piece its class was
assigned to. A view is trivial when its piece has frequency one. Two
non-trivial views of the same record whose MASs overlap cannot sit in one
row (type-2 conflict); such a record is spread over several rows, each
carrying a set of pairwise disjoint views, with fresh tokens elsewhere.
Scale copies carry exactly one view and fresh tokens everywhere else
(type-1 resolution), so no copy agrees with another row outside its MAS.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence, Union

from .cipher import CellEncryptor, CipherTag
from .grouping import FreshTokens
from .mas import MASReport
from .relation import (Cipher, ConflictSplit, FakeEC, Original, Provenance, Relation,
                       ScaleCopy)
from .split_scale import MASStage, Piece


class ConflictError(RuntimeError):
    """Staged encryptions are inconsistent with the MAS structure."""


@dataclass(frozen=True)
class Type1:
    scaling_mas: int
    copies: int


@dataclass(frozen=True)
class Type2:
    mas_x: int
    mas_y: int
    shared: tuple[str, ...]
    cipher_x: tuple
    cipher_y: tuple


@dataclass(frozen=True)
class ConflictRecord:
    record: int
    kind: Union[Type1, Type2]


@dataclass
class ConflictReport:
    type1_count: int = 0
    type2_count: int = 0
    records_added: int = 0
    order: list[tuple[int, int]] = field(default_factory=list)


@dataclass
class RowSpec:
    """A row to be materialized: which views it carries and where it came from."""

    provenance: Provenance
    source: int | None
    views: list[Piece]
    primary: bool = False


def _views(stages: Sequence[MASStage], rid: int) -> list[Piece]:
    return [s.piece_of[rid] for s in stages]


def detect_conflicts(stages: Sequence[MASStage], report: MASReport) -> list[ConflictRecord]:
    out: list[ConflictRecord] = []
    # type 2: overlapping MASs, both views non-trivial and divergent on Z
    for x, y in report.overlap_pairs:
        out.extend(_pair_conflicts(stages[x], stages[y]))
    out.extend(_type1_conflicts(stages))
    return out


def _type1_conflicts(stages: Sequence[MASStage]) -> list[ConflictRecord]:
    # a record scaled by one MAS with a different demand elsewhere
    out: list[ConflictRecord] = []
    if len(stages) > 1:
        demand = [Counter() for _ in stages]
        for s in stages:
            for p in s.pieces:
                if p.records and p.scale_copies:
                    demand[s.index][p.records[0]] = p.scale_copies
        for s in stages:
            for rid, ell in sorted(demand[s.index].items()):
                if any(demand[t.index][rid] != ell for t in stages if t is not s):
                    out.append(ConflictRecord(rid, Type1(s.index, ell)))
    return out


def _pair_conflicts(sx: MASStage, sy: MASStage) -> list[ConflictRecord]:
    shared = tuple(a for a in sx.attrs if a in sy.attrs)
    ix = [sx.attrs.index(a) for a in shared]
    iy = [sy.attrs.index(a) for a in shared]
    ec_pairs = Counter()
    out = []
    for rid in sorted(sx.piece_of):
        px, py = sx.piece_of[rid], sy.piece_of[rid]
        ec_pairs[(px.scope, px.member, py.scope, py.member)] += 1
        if px.trivial or py.trivial:
            continue
        cx = tuple(px.cells[i] for i in ix)
        cy = tuple(py.cells[i] for i in iy)
        if cx != cy:
            out.append(ConflictRecord(rid, Type2(sx.index, sy.index, shared, cx, cy)))
    worst = max(ec_pairs.values(), default=0)
    if worst > 1:
        raise ConflictError(
            f"classes of MAS {sx.index} and MAS {sy.index} share {worst} records; "
            "the MAS set is not maximal")
    return out


def resolve_type1(piece: Piece) -> list[RowSpec]:
    """Scale copies of a piece: its view only, fresh tokens on everything else."""
    if piece.fake:
        prov: Provenance = FakeEC(piece.mas, piece.scope)
    else:
        prov = ScaleCopy(piece.records[0])
    return [RowSpec(prov, None, [piece]) for _ in range(piece.scale_copies)]


def _overlap(a: Piece, b: Piece, attrs_of) -> bool:
    return bool(attrs_of[a.mas] & attrs_of[b.mas])


def _min_colouring(views: Sequence[Piece], attrs_of) -> list[int]:
    """Fewest colours such that overlapping views differ; backtracking.

    A record has at most q views, so exact search is cheap, and the colour
    count (the chromatic number) does not depend on the visiting order.
    """
    n = len(views)
    adj = [[i != j and _overlap(views[i], views[j], attrs_of) for j in range(n)]
           for i in range(n)]
    colour = [-1] * n

    def place(i: int, limit: int, used: int) -> bool:
        if i == n:
            return True
        for c in range(min(used + 1, limit)):
            if all(not adj[i][j] or colour[j] != c for j in range(i)):
                colour[i] = c
                if place(i + 1, limit, max(used, c + 1)):
                    return True
        colour[i] = -1
        return False

    for limit in range(1, n + 1):
        if place(0, limit, 0):
            return colour
    return colour


def split_record(rid: int, views: Sequence[Piece], attrs_of) -> list[RowSpec]:
    """Spread a record's non-trivial views over rows of pairwise disjoint views.

    Uses a minimum colouring, searched in MAS order; the row holding the
    lowest MAS is the primary one and also takes the record's unique-column
    and trivial-view cells.
    """
    nontrivial = sorted((v for v in views if not v.trivial), key=lambda v: v.mas)
    colour = _min_colouring(nontrivial, attrs_of)
    rows: list[list[Piece]] = [[] for _ in range(max(colour, default=-1) + 1)]
    for v, c in zip(nontrivial, colour):
        rows[c].append(v)
    if len(rows) <= 1:
        return [RowSpec(Original(rid), rid, rows[0] if rows else [], True)]
    return [RowSpec(ConflictSplit(rid, side), rid, row, side == 1)
            for side, row in enumerate(rows, start=1)]


def resolve_type2(rid: int, view_x: Piece, view_y: Piece, attrs_of) -> list[RowSpec]:
    """Replace a record by one row per conflicting view."""
    return split_record(rid, [view_x, view_y], attrs_of)


def resolve_all(stages: Sequence[MASStage], report: MASReport, record_ids: Sequence[int],
                rng: random.Random) -> tuple[list[RowSpec], ConflictReport]:
    """Resolve every conflict and lay out all rows of the stage output.

    Overlapping pairs are visited in a random (seeded) order and their
    conflicts recorded; the final row layout is derived from the complete
    set of conflicting views per record, which is why its size does not
    depend on that order.
    """
    attrs_of = {s.index: frozenset(s.attrs) for s in stages}
    order = list(report.overlap_pairs)
    rng.shuffle(order)
    conflicts = []
    for x, y in order:
        conflicts.extend(_pair_conflicts(stages[x], stages[y]))
    conflicts.extend(_type1_conflicts(stages))
    creport = ConflictReport(
        type1_count=sum(isinstance(c.kind, Type1) for c in conflicts),
        type2_count=sum(isinstance(c.kind, Type2) for c in conflicts),
        order=order,
    )
    conflicting = {c.record for c in conflicts if isinstance(c.kind, Type2)}
    specs: list[RowSpec] = []
    for rid in record_ids:
        views = _views(stages, rid)
        if rid in conflicting:
            rows = split_record(rid, views, attrs_of)
            creport.records_added += len(rows) - 1
        else:
            rows = [RowSpec(Original(rid), rid, [v for v in views if not v.trivial], True)]
        specs.extend(rows)
    for s in stages:
        for p in s.pieces:
            if p.fake:
                specs.extend(RowSpec(FakeEC(p.mas, p.scope), None, [p]) for _ in range(p.size))
            specs.extend(resolve_type1(p))
    return specs, creport


@dataclass
class EncodedRow:
    cells: tuple
    provenance: Provenance
    real: tuple[bool, ...]          # cell decrypts to the source record's value
    views: tuple[tuple[str, int], ...]  # (scope, copy index) carried


def materialize(specs: Sequence[RowSpec], rel: Relation, stages: Sequence[MASStage],
                enc: CellEncryptor, fresh: FreshTokens) -> list[EncodedRow]:
    """Turn row specs into ciphertext rows over the schema of ``rel``."""
    attrs = rel.attributes
    pos = {a: i for i, a in enumerate(attrs)}
    covered = set().union(*(s.attrs for s in stages)) if stages else set()
    row_of = {rid: row for rid, row in zip(rel.ids, rel.rows)}
    out: list[EncodedRow] = []
    for rs in specs:
        cells: list[Cipher | None] = [None] * len(attrs)
        real = [False] * len(attrs)
        for v in rs.views:
            for a, c in zip(stages[v.mas].attrs, v.cells):
                cells[pos[a]] = c
                real[pos[a]] = not v.fake
        carried = list(rs.views)
        if rs.primary:
            src = row_of[rs.source]
            for s in stages:
                v = s.piece_of[rs.source]
                if not v.trivial:
                    continue
                whole = True
                for i, a in enumerate(s.attrs):
                    if cells[pos[a]] is None:
                        cells[pos[a]] = v.cells[i]
                        real[pos[a]] = True
                    else:
                        whole = False
                if whole:
                    carried.append(v)
            for j, a in enumerate(attrs):
                if a not in covered:
                    cells[j] = enc(src[j], CipherTag(a, src[j], 1, f"row.{rs.source}"))
                    real[j] = True
        for j, a in enumerate(attrs):
            if cells[j] is None:
                tok = fresh()
                cells[j] = enc(tok, CipherTag(a, tok, 1, "fresh"))
        views = tuple((v.scope, v.copy_index) for v in carried)
        out.append(EncodedRow(tuple(cells), rs.provenance, tuple(real), views))
    return out

