import pytest

from fdcrypt.datasets import (constant_table, overlap_table, false_positive_table,
                              multi_mas_relation, random_relation)
from fdcrypt.fd_discovery import FD, compare_fd_sets, discover_fds, fd_holds, format_fds
from fdcrypt.relation import Relation
from oracles import fd_pairs, minimal_fds, minimal_fds_pairwise


def test_overlap_fds():
    assert format_fds(discover_fds(overlap_table())) == ["C -> B"]
    assert format_fds(discover_fds(false_positive_table())) == ["B -> A"]
    # constant columns: only singleton left-hand sides, empty ones are not reported
    assert format_fds(discover_fds(constant_table())) == ["B -> A", "C -> A", "A -> B", "C -> B"]


@pytest.mark.parametrize("rel", [constant_table(), overlap_table(), false_positive_table()],
                         ids=["constant", "overlap", "false_positive"])
def test_worked_tables_match_both_oracles(rel):
    got = fd_pairs(discover_fds(rel))
    assert got == minimal_fds(rel) == minimal_fds_pairwise(rel)


@pytest.mark.parametrize("seed", range(12))
def test_random_relations_match_oracle(seed):
    rel = random_relation(seed, 3 + seed % 4, 150, skew=seed % 2 == 1)
    assert fd_pairs(discover_fds(rel)) == minimal_fds(rel)


@pytest.mark.parametrize("seed", range(4))
def test_pairwise_oracle_on_wide_domains(seed):
    rel = multi_mas_relation(seed, 5, 40)
    assert fd_pairs(discover_fds(rel)) == minimal_fds_pairwise(rel)


def test_fd_value_object():
    fd = FD(("B", "A", "A"), "C")
    assert fd.lhs == ("A", "B") and str(fd) == "A,B -> C"
    assert FD.parse(" A , B -> C ") == fd
    assert FD(("A",), "A").trivial


def test_fd_holds_and_compare():
    rel = overlap_table()
    assert fd_holds(rel, FD(("C",), "B"))
    assert not fd_holds(rel, FD(("B",), "C"))
    assert fd_holds(Relation("AB", [("x", "1"), ("x", "2")]), FD((), "A"))
    diff = compare_fd_sets([FD(("C",), "B")], [FD(("A",), "B")])
    assert not diff.empty and diff.only_a == [FD(("C",), "B")]
    assert compare_fd_sets(discover_fds(rel), discover_fds(rel)).empty


def test_format_is_sorted():
    assert format_fds([FD(("C",), "B"), FD(("A", "B"), "C"), FD(("A",), "B")]) == \
        ["A -> B", "C -> B", "A,B -> C"]


def test_width_cap():
    rel = Relation([f"c{i}" for i in range(4)], [tuple("abcd")])
    with pytest.raises(ValueError):
        discover_fds(rel, max_attrs=3)
