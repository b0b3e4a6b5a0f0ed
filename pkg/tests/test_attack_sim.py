import math
import random
import warnings

import pytest

from fdcrypt.attack_sim import (AttackReport, ShapeWarning, _candidates, attack_rows,
                                ecg_stats, frequency_class_violations, knowledge,
                                run_freq_game, run_kerckhoffs_attack, scope_violations)
from fdcrypt.datasets import five_class_table
from fdcrypt.grouping import SecurityConfig
from fdcrypt.pipeline import encrypt, encrypt_deterministic
from fdcrypt.relation import Relation


def column(freqs, prefix="v"):
    rows = [(f"{prefix}{i}",) for i, f in enumerate(freqs) for _ in range(f)]
    return Relation(["A"], rows)


@pytest.fixture(scope="module")
def four_values(key):
    """One column with frequencies 2, 2, 8, 8 at alpha=1/4 and split factor 2.

    The two frequent values are split in half, everything is scaled to 4:
    y = 6 ciphertexts share one frequency, so a known-scheme attacker that
    matches ciphertexts to the 4 candidates at random wins with 1/6.
    """
    rel = column([2, 2, 8, 8])
    res = encrypt(rel, SecurityConfig(alpha=0.25, split_factor=2, seed=3), key)
    return rel, res


def test_constructed_group_shape(four_values):
    _, res = four_values
    stats = [s for s in ecg_stats(res.manifest)]
    assert [(s["k"], s["k_split"], s["y"], s["target"]) for s in stats] == [(4, 2, 6, 4)]
    assert stats[0]["prob"] == pytest.approx(1 / 6)


def test_kerckhoffs_rate_is_one_over_y(four_values, key):
    rel, res = four_values
    trials = 20_000
    rep = run_kerckhoffs_attack(knowledge(rel), res.relation, trials, random.Random(5), key)
    sigma = math.sqrt((1 / 6) * (5 / 6) / trials)
    assert abs(rep.rate - 1 / 6) < 4 * sigma
    assert rep.split_estimate == {"A": 0.5}
    assert rep.rate <= rep.limit(0.25)


def test_freq_game_falls_back_to_uniform(four_values, key):
    rel, res = four_values
    trials = 20_000
    rep = run_freq_game(rel, res.relation, trials, random.Random(6), key)
    # no plaintext has frequency 4, so every guess is uniform over 4 values
    assert rep.candidate_sizes == {4: trials}
    assert abs(rep.rate - 0.25) < 4 * math.sqrt(0.25 * 0.75 / trials)


def test_deterministic_is_broken(key):
    rel = column([1, 2, 3, 5, 8, 13])
    det = encrypt_deterministic(rel, key)
    rep = run_freq_game(rel, det, 5000, random.Random(0), key)
    assert rep.rate == 1.0
    with pytest.warns(ShapeWarning):
        k = run_kerckhoffs_attack(knowledge(rel), det, 5000, random.Random(0), key)
    assert k.rate > 0.9
    assert frequency_class_violations(det, 2)


def test_aware_attacker_caps_candidates(four_values, key):
    rel, res = four_values
    rep = run_kerckhoffs_attack(knowledge(rel), res.relation, 5000, random.Random(1), key,
                                aware=(0.25, 2))
    assert rep.attack == "kerckhoffs-aware" and set(rep.candidate_sizes) == {4}
    assert rep.rate <= rep.limit(0.25)


def test_candidates_keep_ties():
    ranked = [("p", 9), ("q", 5), ("r", 5), ("s", 1)]
    assert _candidates(ranked, 1.0, 5, 2) == ["q", "r"]
    assert _candidates(ranked, 1.0, 9, 1) == ["p"]
    assert _candidates(ranked, 0.5, 3, 10) == ["q", "r", "s"]


def test_structural_checks_on_f2(key):
    rel = five_class_table()
    for alpha in (1 / 2, 1 / 3, 1 / 5):
        res = encrypt(rel, SecurityConfig(alpha=alpha, seed=0), key)
        assert frequency_class_violations(res.relation, SecurityConfig(alpha=alpha).k) == []
        assert scope_violations(res.relation, res.manifest, key) == []


def test_targets_need_real_plaintexts(key):
    rel = column([2, 3])
    other = encrypt_deterministic(column([4], "w"), key)
    with pytest.raises(ValueError):
        run_freq_game(rel, other, 10, random.Random(0), key)


def test_report_helpers():
    r = AttackReport("freq", 100, 20)
    assert r.rate == 0.2 and r.limit(0.2) == pytest.approx(0.2 + 3 * 0.04)
    rows = attack_rows({"f2": [r]}, 0.2)
    assert rows[0]["scheme"] == "f2" and rows[0]["rate"] == 0.2
    assert r.summary()["median_candidates"] == 0
    assert AttackReport("x", 0, 0).rate == 0.0


def test_no_warning_on_f2(four_values, key):
    rel, res = four_values
    with warnings.catch_warnings():
        warnings.simplefilter("error", ShapeWarning)
        run_kerckhoffs_attack(knowledge(rel), res.relation, 100, random.Random(0), key)
