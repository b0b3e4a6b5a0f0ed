import random

import pytest

from fdcrypt.cipher import CellEncryptor
from fdcrypt.conflict import (ConflictError, Type1, Type2, detect_conflicts, materialize,
                              resolve_all, split_record)
from fdcrypt.datasets import overlap_table
from fdcrypt.grouping import FreshTokens
from fdcrypt.mas import MASReport
from fdcrypt.relation import ConflictSplit, Original
from fdcrypt.split_scale import MASStage, Piece


def piece(mas, member, records, cells, size=None, target=None, scope=None):
    size = len(records) if size is None else size
    return Piece(mas, scope or f"m{mas}.g0", member, 1, cells, tuple(records), size,
                 size if target is None else target, False)


def overlap_stages():
    """Hand-built encodings of the worked three-column table.

    Record ids 0..5 stand for r1..r6. On {A, B} the classes of r1/r5 and
    r3/r4 repeat; on {B, C} the classes r1/r2/r3 and r4/r5 repeat, with the
    B ciphertexts of the two MASs chosen to differ for r1, r3, r4 and r5.
    """
    x = [piece(0, 0, [0, 4], ("a3^1", "b2^1")), piece(0, 1, [1], ("a1^1", "b2^3")),
         piece(0, 2, [2, 3], ("a2^1", "b2^2")), piece(0, 3, [5], ("a1^2", "b1^1"))]
    y = [piece(1, 0, [0, 1, 2], ("b2^3", "c1^1")), piece(1, 1, [3, 4], ("b2^4", "c2^1")),
         piece(1, 2, [5], ("b1^1", "c3^1"))]
    stages = []
    for i, (attrs, ps) in enumerate([(("A", "B"), x), (("B", "C"), y)]):
        stages.append(MASStage(i, attrs, [], [], ps, {r: p for p in ps for r in p.records}))
    return stages, MASReport([None, None], [(0, 1)])


def test_overlap_type2_conflicts():
    stages, rep = overlap_stages()
    found = detect_conflicts(stages, rep)
    assert sorted(c.record for c in found) == [0, 2, 3, 4]
    assert all(isinstance(c.kind, Type2) and c.kind.shared == ("B",) for c in found)
    r1 = next(c for c in found if c.record == 0)
    assert (r1.kind.cipher_x, r1.kind.cipher_y) == (("b2^1",), ("b2^3",))


def test_overlap_resolution_rows(key):
    stages, rep = overlap_stages()
    rel = overlap_table()
    specs, creport = resolve_all(stages, rep, rel.ids, random.Random(0))
    assert len(specs) == 10 and creport.records_added == 4 and creport.type2_count == 4
    rows = materialize(specs, rel, stages, CellEncryptor(key), FreshTokens(random.Random(1)))
    by_prov = {r.provenance: r for r in rows}
    assert set(by_prov) == {Original(1), Original(5)} | {
        ConflictSplit(rid, side) for rid in (0, 2, 3, 4) for side in (1, 2)}
    side1, side2 = by_prov[ConflictSplit(0, 1)], by_prov[ConflictSplit(0, 2)]
    assert side1.cells[:2] == ("a3^1", "b2^1") and side1.real == (True, True, False)
    assert side2.cells[1:] == ("b2^3", "c1^1") and side2.real == (False, True, True)
    # the fresh cells are real ciphertexts of tokens outside the domain
    assert not isinstance(side1.cells[2], str) and not isinstance(side2.cells[0], str)
    # r2: {B, C} view whole, A from its trivial {A, B} view
    assert by_prov[Original(1)].cells == ("a1^1", "b2^3", "c1^1")


def test_overlap_order_invariance(key):
    stages, rep = overlap_stages()
    rel = overlap_table()
    counts = set()
    for seed in range(20):
        specs, _ = resolve_all(stages, rep, rel.ids, random.Random(seed))
        counts.add(len(materialize(specs, rel, stages, CellEncryptor(key),
                                   FreshTokens(random.Random(seed)))))
    assert counts == {10}


def test_agreeing_views_are_not_conflicts():
    stages, rep = overlap_stages()
    stages[1].pieces[0] = piece(1, 0, [0, 1, 2], ("b2^1", "c1^1"))
    stages[1].piece_of.update({r: stages[1].pieces[0] for r in (0, 1, 2)})
    found = {c.record for c in detect_conflicts(stages, rep)}
    assert 0 not in found and {2, 3, 4} <= found


def test_non_maximal_mas_rejected():
    x = [piece(0, 0, [0, 1], ("a", "b"))]
    y = [piece(1, 0, [0, 1], ("b", "c"))]
    stages = [MASStage(i, attrs, [], [], ps, {r: p for p in ps for r in p.records})
              for i, (attrs, ps) in enumerate([(("A", "B"), x), (("B", "C"), y)])]
    with pytest.raises(ConflictError):
        detect_conflicts(stages, MASReport([None, None], [(0, 1)]))


def views(*attr_sets):
    attrs_of = {i: frozenset(s) for i, s in enumerate(attr_sets)}
    return [piece(i, 0, [0, 9], tuple(s)) for i, s in enumerate(attr_sets)], attrs_of


def test_three_pairwise_overlapping_views_need_three_rows():
    vs, attrs_of = views("AB", "BC", "AC")
    rows = split_record(0, vs, attrs_of)
    assert len(rows) == 3 and sum(r.primary for r in rows) == 1


def test_colouring_is_minimum_whatever_the_order():
    # path AB - BC - CD - DE: two rows suffice, greedy in a bad order needs three
    vs, attrs_of = views("AB", "DE", "BC", "CD")
    for seed in range(10):
        r = random.Random(seed)
        order = vs[:]
        r.shuffle(order)
        rows = split_record(0, order, attrs_of)
        assert len(rows) == 2
        for row in rows:
            sets = [attrs_of[v.mas] for v in row.views]
            assert all(not (a & b) for i, a in enumerate(sets) for b in sets[i + 1:])


def test_disjoint_views_stay_in_one_row():
    vs, attrs_of = views("AB", "CD")
    assert split_record(0, vs, attrs_of)[0].provenance == Original(0)


def test_type1_when_demands_differ():
    x = [piece(0, 0, [0, 1], ("a", "b"), target=4)]
    y = [piece(1, 0, [0, 1], ("c", "d"), target=2)]
    stages = [MASStage(i, attrs, [], [], ps, {r: p for p in ps for r in p.records})
              for i, (attrs, ps) in enumerate([(("A", "B"), x), (("C", "D"), y)])]
    found = detect_conflicts(stages, MASReport([None, None], []))
    assert [c.kind for c in found] == [Type1(0, 2)]
    specs, creport = resolve_all(stages, MASReport([None, None], []), [0, 1], random.Random(0))
    assert creport.type1_count == 1 and creport.records_added == 0
    assert len(specs) == 2 + 2
