"""Independent reference implementations used to freeze expected values.

These are deliberately naive and share no code with the package: plain
Python sets and dicts, pairwise record comparison and exhaustive search.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict


def rows_of(rel):
    return [tuple(r) for r in rel.rows]


def agree_sets(rows, attrs):
    """Set of attribute sets on which some pair of rows agrees (non-empty only)."""
    out = set()
    for r1, r2 in itertools.combinations(rows, 2):
        s = frozenset(a for a, x, y in zip(attrs, r1, r2) if x == y)
        if s:
            out.add(s)
    return out


def mas_oracle(rel):
    """Maximal non-unique sets are exactly the maximal pairwise agree sets."""
    sets = agree_sets(rows_of(rel), rel.attributes)
    return {s for s in sets if not any(s < t for t in sets)}


def _holds(rows, lhs_idx, rhs_idx):
    seen = {}
    for r in rows:
        key = tuple(r[j] for j in lhs_idx)
        if seen.setdefault(key, r[rhs_idx]) != r[rhs_idx]:
            return False
    return True


def minimal_fds(rel):
    """All minimal non-trivial X -> A with X non-empty, by subset enumeration."""
    attrs = list(rel.attributes)
    rows = rows_of(rel)
    m = len(attrs)
    out = set()
    for a in range(m):
        holding = []
        others = [j for j in range(m) if j != a]
        for size in range(1, m):
            for lhs in itertools.combinations(others, size):
                if any(set(h) <= set(lhs) for h in holding):
                    continue
                if _holds(rows, lhs, a):
                    holding.append(lhs)
                    out.add((tuple(sorted(attrs[j] for j in lhs)), attrs[a]))
    return out


def minimal_fds_pairwise(rel):
    """Same answer from agree sets: X -> A holds iff no pair agrees on X but not A."""
    attrs = list(rel.attributes)
    rows = rows_of(rel)
    pair_sets = set()
    for r1, r2 in itertools.combinations(rows, 2):
        pair_sets.add(frozenset(a for a, x, y in zip(attrs, r1, r2) if x == y))
    out = set()
    for a in attrs:
        others = [b for b in attrs if b != a]
        holding = []
        for size in range(1, len(attrs)):
            for lhs in itertools.combinations(others, size):
                x = frozenset(lhs)
                if any(h <= x for h in holding):
                    continue
                if not any(x <= s and a not in s for s in pair_sets):
                    holding.append(x)
                    out.add((tuple(sorted(lhs)), a))
    return out


def fd_pairs(fds):
    return {(tuple(f.lhs), f.rhs) for f in fds}


def partition_oracle(rel, attrs):
    """Classes of record ids grouped by their projection."""
    idx = [rel.attributes.index(a) for a in attrs]
    groups = defaultdict(list)
    for rid, row in zip(rel.ids, rel.rows):
        groups[tuple(row[j] for j in idx)].append(rid)
    return {tuple(v) for v in groups.values()}


def split_cost_exhaustive(sizes, w):
    """Try every split point j in 1..k+1 on sorted sizes; return {j: (target, cost)}.

    Members j..k are cut into min(f, w) near-equal pieces; every piece is
    then padded up to the largest piece.
    """
    sizes = sorted(sizes)
    k = len(sizes)
    out = {}
    for j in range(1, k + 2):
        pieces = []
        for i, f in enumerate(sizes, start=1):
            if i < j:
                pieces.append(f)
            else:
                parts = min(f, w)
                base, extra = divmod(f, parts)
                pieces.extend([base + 1] * extra + [base] * (parts - extra))
        target = max(pieces)
        out[j] = (target, sum(target - p for p in pieces))
    return out


def split_argmin(sizes, w):
    table = split_cost_exhaustive(sizes, w)
    best = min(c for _, c in table.values())
    return best, [j for j, (_, c) in table.items() if c == best]


def r1_closed_form(sizes, j, w):
    """Cost when w divides each split size and ceil(f_k / w) >= f_{j-1}."""
    f = sorted(sizes)
    top = math.ceil(f[-1] / w)
    return sum(top - x for x in f[: j - 1]) + sum(f[-1] - x for x in f[j - 1:])


def fp_bounds_oracle(m, mas_sizes, k):
    hi_a = 2 * k * m * math.comb(m - 1, (m - 1) // 2)
    hi_b = 2 * k * sum(s * math.comb(s - 1, (s - 1) // 2) for s in mas_sizes)
    return 2 * k, min(hi_a, hi_b)


def mas_by_enumeration(rel):
    """Walk all 2^m - 1 attribute sets, keep the maximal non-unique ones."""
    attrs = list(rel.attributes)
    rows = rows_of(rel)
    nonunique = []
    for mask in range(1, 1 << len(attrs)):
        cols = [j for j in range(len(attrs)) if mask >> j & 1]
        seen = set()
        for r in rows:
            key = tuple(r[j] for j in cols)
            if key in seen:
                nonunique.append(mask)
                break
            seen.add(key)
    maximal = [s for s in nonunique if not any(s != t and s & t == s for t in nonunique)]
    return {frozenset(attrs[j] for j in range(len(attrs)) if s >> j & 1) for s in maximal}
