import random

import pytest

from fdcrypt.datasets import five_class_table, overlap_table
from fdcrypt.grouping import (FRESH_PREFIX, FakeClass, FreshTokens, SecurityConfig,
                              build_ecgs, collides, is_fake)
from fdcrypt.mas import MAS, find_mas
from fdcrypt.partition import compute_partition
from fdcrypt.relation import Relation


def mas_of(rel, attrs):
    return MAS(tuple(attrs), compute_partition(rel, attrs))


def fresh(rel=None):
    return FreshTokens(random.Random(0), rel.domain() if rel else ())


def names(ecg, part):
    """Member labels C1..C5 by class order (smallest record id)."""
    label = {c.members: f"C{i + 1}" for i, c in enumerate(part.classes)}
    return {label[c.members] if not is_fake(c) else "fake" for c in ecg.members}


@pytest.mark.parametrize("alpha,k", [(0.5, 2), (1 / 3, 3), (0.2, 5), (0.1, 10), (0.3, 4)])
def test_k_from_alpha(alpha, k):
    assert SecurityConfig(alpha=alpha).k == k


@pytest.mark.parametrize("kw", [{"alpha": 0}, {"alpha": 1}, {"split_factor": 1}, {"key_bits": 64}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SecurityConfig(**kw)


def test_five_class_groups():
    rel = five_class_table()
    mas = mas_of(rel, ["A", "B"])
    ecgs = build_ecgs(mas, SecurityConfig(alpha=1 / 3), fresh(rel))
    assert [names(g, mas.partition) for g in ecgs] == [{"C2", "C4", "C5"}, {"C1", "C3", "fake"}]
    assert [g.fake_count for g in ecgs] == [0, 1]
    fake = next(c for c in ecgs[1].members if is_fake(c))
    assert fake.size == 3 and all(v.startswith(FRESH_PREFIX) for v in fake.representative)


def test_collides():
    part = compute_partition(five_class_table(), ["A", "B"])
    c1, c2, c3 = part.classes[:3]
    assert collides(c1, c2)
    assert not collides(c1, c3)


def test_single_class_gets_one_fake():
    rel = Relation("AB", [("a", "b"), ("a", "b"), ("x", "y")])
    ecgs = build_ecgs(mas_of(rel, ["A", "B"]), SecurityConfig(alpha=0.5), fresh(rel))
    big = [g for g in ecgs if not g.singletons]
    assert len(big) == 1 and len(big[0].real()) == 1 and big[0].fake_count == 1


def test_collision_free_classes_need_no_fakes():
    rel = Relation("AB", [(f"a{i}", f"b{i}") for i in range(50) for _ in range(2)])
    ecgs = build_ecgs(mas_of(rel, ["A", "B"]), SecurityConfig(alpha=0.2), fresh(rel))
    assert len(ecgs) == 10
    assert all(len(g.members) == 5 and g.fake_count == 0 for g in ecgs)


@pytest.mark.parametrize("seed", range(6))
def test_groups_are_collision_free_and_full(seed):
    r = random.Random(seed)
    rows = [(f"a{r.randrange(6)}", f"b{r.randrange(8)}", f"c{r.randrange(400)}")
            for _ in range(300)]
    rel = Relation("ABC", rows)
    mas = mas_of(rel, ["A", "B"])
    cfg = SecurityConfig(alpha=0.25)
    ecgs = build_ecgs(mas, cfg, fresh(rel), 3)
    seen = []
    for g in ecgs:
        assert len(g.members) == cfg.k and g.id.startswith("m3.")
        if g.singletons:
            continue
        for i, c in enumerate(g.members):
            assert not any(collides(c, d) for d in g.members[i + 1:])
        real = g.real()
        if g.fake_count:
            assert all(c.size == min(x.size for x in real) for c in g.members if is_fake(c))
        seen.extend(c.members for c in real)
    seen.extend(c.members for g in ecgs if g.singletons for c in g.real())
    assert sorted(seen) == sorted(c.members for c in mas.partition.classes)


def test_singletons_share_one_scope():
    rel = overlap_table()
    mas = find_mas(rel).mas_list[0]        # {A, B}: classes of sizes 2, 1, 2, 1
    ecgs = build_ecgs(mas, SecurityConfig(alpha=1 / 3), fresh(rel))
    single = [g for g in ecgs if g.singletons]
    assert len(single) == 1 and single[0].id == "m0.s"
    assert len(single[0].real()) == 2 and single[0].fake_count == 1
    assert all(c.size == 1 for c in single[0].members)


def test_fresh_tokens_avoid_domain():
    f = FreshTokens(random.Random(1), {"x"})
    toks = {f() for _ in range(1000)}
    assert len(toks) == 1000 and "x" not in toks
    assert len(f.tuple(3)) == 3
    assert isinstance(FakeClass(("u",), 2).members, tuple)


def one_per_group(order, k):
    return [[c] for c in order]


def test_custom_packing_is_padded():
    rel = five_class_table()
    ecgs = build_ecgs(mas_of(rel, ["A", "B"]), SecurityConfig(alpha=1 / 3), fresh(rel),
                      pack=one_per_group)
    assert len(ecgs) == 5 and all(g.fake_count == 2 for g in ecgs)


@pytest.mark.parametrize("bad", [
    lambda order, k: [list(order)],                 # five members, k = 3, collisions
    lambda order, k: [[c] for c in order[1:]],      # drops a class
    lambda order, k: [[c] for c in order] + [[]],   # empty group
])
def test_invalid_packing_rejected(bad):
    rel = five_class_table()
    with pytest.raises(ValueError):
        build_ecgs(mas_of(rel, ["A", "B"]), SecurityConfig(alpha=1 / 3), fresh(rel), pack=bad)
