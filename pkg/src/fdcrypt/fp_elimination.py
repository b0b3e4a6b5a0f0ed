"""Eliminating false-positive FDs with artificial record pairs.

After steps 1-3 the ciphertext table only has agreement on whole MASs, so
every X -> Y with X, Y inside one MAS holds on it. For each such rule that
fails on the plaintext, k pairs of artificial records agreeing exactly on X
are inserted. Only maximal failing rules get pairs: a pair agreeing on X
also violates every X' -> Y with X' a subset of X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .cipher import CellEncryptor, CipherTag
from .conflict import EncodedRow
from .grouping import FreshTokens, SecurityConfig
from .mas import MASReport
from .partition import Partition, combine_labels, group_labels, n_groups
from .relation import FPArtificial


@dataclass
class FDLatticeNode:
    lhs: frozenset[str]
    rhs: str | None          # None on the level-1 node M:{}
    mas: int
    status: str = "unchecked"


@dataclass
class FDLattice:
    roots: list[FDLatticeNode]
    nodes: dict[tuple[frozenset[str], str], FDLatticeNode] = field(default_factory=dict)

    def children(self, node: FDLatticeNode) -> list[FDLatticeNode]:
        if node.rhs is None:
            return [self.nodes[(node.lhs - {y}, y)] for y in sorted(node.lhs)
                    if (node.lhs - {y}, y) in self.nodes]
        if len(node.lhs) == 1:
            return []
        return [self.nodes[(node.lhs - {a}, node.rhs)] for a in sorted(node.lhs)]

    def descendants(self, node: FDLatticeNode):
        stack, seen = [node], set()
        while stack:
            for c in self.children(stack.pop()):
                key = (c.lhs, c.rhs)
                if key not in seen:
                    seen.add(key)
                    stack.append(c)
                    yield c

    def bfs_order(self) -> list[FDLatticeNode]:
        return sorted(self.nodes.values(),
                      key=lambda v: (-len(v.lhs), tuple(sorted(v.lhs)), v.rhs))


def build_fd_lattice(report: MASReport) -> FDLattice:
    roots = [FDLatticeNode(m.attr_set, None, i) for i, m in enumerate(report.mas_list)]
    lat = FDLattice(roots)
    for i, m in enumerate(report.mas_list):
        frontier = [(m.attr_set - {y}, y) for y in m.attr_set if len(m.attr_set) > 1]
        while frontier:
            nxt = []
            for lhs, rhs in frontier:
                if (lhs, rhs) in lat.nodes:
                    continue
                lat.nodes[(lhs, rhs)] = FDLatticeNode(lhs, rhs, i)
                if len(lhs) > 1:
                    nxt.extend((lhs - {a}, rhs) for a in lhs)
            frontier = nxt
    return lat


def has_violation_witness(lhs: Sequence[str], rhs: str, partition: Partition) -> bool:
    """Two classes of pi_M equal on lhs but different on rhs?

    With lhs and rhs inside M, two records that agree on lhs and differ on
    rhs always fall in different classes, so this is just "lhs -> rhs fails
    on the plaintext", decided by comparing group counts.
    """
    rel = partition.rel
    lx = group_labels(rel, rel.indices(lhs))
    lxy = combine_labels(lx, group_labels(rel, [rel.index_of(rhs)]))
    return n_groups(lxy) > n_groups(lx)


def fp_bounds(report: MASReport, m: int, k: int) -> tuple[int, int]:
    a = 2 * k * m * math.comb(m - 1, (m - 1) // 2) if m else 0
    b = 2 * k * sum(len(M.attrs) * math.comb(len(M.attrs) - 1, (len(M.attrs) - 1) // 2)
                    for M in report.mas_list)
    return 2 * k, min(a, b)


@dataclass
class FPResult:
    rows: list[EncodedRow]
    added: int
    false_positive_nodes: list[FDLatticeNode]
    checked_nodes: int


def eliminate_false_positives(attributes: Sequence[str], report: MASReport,
                              config: SecurityConfig, enc: CellEncryptor,
                              fresh: FreshTokens, first_pair: int = 0) -> FPResult:
    """Top-down walk of the FD lattice inserting k violating pairs per maximal false positive."""
    lat = build_fd_lattice(report)
    k = config.k
    rows: list[EncodedRow] = []
    found: list[FDLatticeNode] = []
    checked = 0
    pair = first_pair
    for node in lat.bfs_order():
        if node.status == "checked":
            continue
        node.status = "checked"
        checked += 1
        part = report.mas_list[node.mas].partition
        if not has_violation_witness(sorted(node.lhs), node.rhs, part):
            continue
        found.append(node)
        for d in lat.descendants(node):
            d.status = "checked"
        scope = f"fp.{len(found) - 1}"
        for i in range(1, k + 1):
            shared = {a: fresh() for a in node.lhs}
            for side in (1, 2):
                cells = []
                for a in attributes:
                    tok = shared[a] if a in shared else fresh()
                    cells.append(enc(tok, CipherTag(a, tok, 1, scope)))
                rows.append(EncodedRow(tuple(cells), FPArtificial(pair, side),
                                       (False,) * len(attributes), ((scope, i),)))
            pair += 1
    return FPResult(rows, len(rows), found, checked)
