"""Frequency-analysis adversaries and structural alpha-security checks.

Two attackers are simulated against an encrypted table:

* the frequency game: pick a ciphertext, guess uniformly among plaintexts
  of the same frequency in the original data;
* the known-scheme attacker: estimate the split factor, bucket ciphertexts
  by frequency, derive candidate plaintexts per bucket and guess through a
  random bucket-to-candidate matching.

Targets are always ciphertexts whose true plaintext is a real value of the
column, so guesses are never scored against fresh or fake tokens.
"""

from __future__ import annotations

import math
import random
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .cipher import Key, decrypt_cell
from .manifest import Manifest, check_matches
from .relation import Cipher, Relation

FrequencyKnowledge = dict[str, Counter]


class ShapeWarning(UserWarning):
    """Ciphertext frequencies are not homogenized per bucket."""


@dataclass
class AttackReport:
    attack: str
    trials: int
    successes: int
    candidate_sizes: Counter = field(default_factory=Counter)
    split_estimate: dict[str, float] = field(default_factory=dict)
    ecg_stats: list[dict] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def rate(self) -> float:
        return self.successes / self.trials if self.trials else 0.0

    def limit(self, alpha: float) -> float:
        return alpha + 3 * math.sqrt(alpha * (1 - alpha) / max(self.trials, 1))

    def summary(self) -> dict:
        sizes = sorted(self.candidate_sizes.elements())
        return {"attack": self.attack, "trials": self.trials, "successes": self.successes,
                "rate": round(self.rate, 6),
                "median_candidates": sizes[len(sizes) // 2] if sizes else 0}


def knowledge(rel: Relation) -> FrequencyKnowledge:
    return {a: Counter(rel.column(a)) for a in rel.attributes}


def _truth_fn(key: Key | None) -> Callable:
    cache: dict = {}

    def truth(cell):
        if not isinstance(cell, Cipher):
            return cell
        if cell not in cache:
            cache[cell] = decrypt_cell(cell, key) if key is not None else None
        return cache[cell]
    return truth


def _targets(enc: Relation, freq: FrequencyKnowledge, truth) -> dict[str, list]:
    """Distinct ciphertexts per column whose plaintext is a real column value."""
    out = {}
    for a in enc.attributes:
        plain = freq[a]
        cells = sorted({c for c in enc.column(a)}, key=str)
        hits = [c for c in cells if truth(c) in plain]
        if hits:
            out[a] = hits
    if not out:
        raise ValueError("no ciphertext decrypts to a plaintext of the original table")
    return out


def run_freq_game(plain: Relation, enc: Relation, trials: int, rng: random.Random,
                  key: Key | None = None) -> AttackReport:
    """Guess the plaintext of a random ciphertext from frequencies alone.

    The candidate set is ``G(e)``: plaintexts of the column whose frequency
    in ``plain`` equals the frequency of ``e`` in ``enc``. When no plaintext
    has that frequency the guess is uniform over the whole column domain.
    """
    freq = knowledge(plain)
    truth = _truth_fn(key)
    targets = _targets(enc, freq, truth)
    attrs = sorted(targets)
    by_freq = {a: defaultdict(list) for a in attrs}
    domain = {a: sorted(freq[a]) for a in attrs}
    for a in attrs:
        for p in domain[a]:
            by_freq[a][freq[a][p]].append(p)
    counts = {a: Counter(enc.column(a)) for a in attrs}
    rep = AttackReport("freq", trials, 0)
    for _ in range(trials):
        a = rng.choice(attrs)
        e = rng.choice(targets[a])
        cands = by_freq[a].get(counts[a][e]) or domain[a]
        rep.candidate_sizes[len(cands)] += 1
        if rng.choice(cands) == truth(e):
            rep.successes += 1
    return rep


def run_kerckhoffs_attack(freq: FrequencyKnowledge, enc: Relation, trials: int,
                          rng: random.Random, key: Key | None = None,
                          aware: tuple[float, int] | None = None) -> AttackReport:
    """Known-scheme attack in four steps.

    1. ``w' = f_max(enc) / f_max(plain)`` per column.
    2. Bucket the column's ciphertexts by frequency; a bucket of size ``y``
       stands for one group.
    3. Candidates for a bucket of frequency ``f`` are plaintexts with
       ``w' * freq(p) <= f``, keeping the ``y`` most frequent (ties at the
       cut are kept).
    4. A random matching assigns ``min(|P'|, y)`` of the bucket's ciphertexts
       to distinct candidates; ``e`` is guessed only if it was matched.

    ``aware=(alpha, w)`` gives the attacker the true split factor and caps
    the candidates at ``ceil(1/alpha)`` instead of ``y``.
    """
    truth = _truth_fn(key)
    targets = _targets(enc, freq, truth)
    attrs = sorted(targets)
    rep = AttackReport("kerckhoffs" if aware is None else "kerckhoffs-aware", trials, 0)
    counts = {a: Counter(enc.column(a)) for a in attrs}
    buckets = {}
    ranked = {}
    for a in attrs:
        f_p = max(freq[a].values())
        f_e = max(counts[a].values())
        rep.split_estimate[a] = f_e / f_p if aware is None else 1 / aware[1]
        b = defaultdict(int)
        for c, t in counts[a].items():
            b[t] += 1
        buckets[a] = b
        ranked[a] = sorted(freq[a].items(), key=lambda kv: (-kv[1], kv[0]))
        short = [t for t, y in b.items() if t >= 2 and y < 2]
        if short:
            msg = f"{a}: {len(short)} frequency buckets with a single ciphertext"
            rep.notes.append(msg)
            warnings.warn(msg, ShapeWarning, stacklevel=2)
    cap_k = math.ceil(1 / aware[0] - 1e-9) if aware else None
    cache: dict[tuple[str, int], list] = {}
    for _ in range(trials):
        a = rng.choice(attrs)
        e = rng.choice(targets[a])
        f = counts[a][e]
        y = buckets[a][f]
        if (a, f) not in cache:
            cache[a, f] = _candidates(ranked[a], rep.split_estimate[a], f, cap_k or y)
        cands = cache[a, f] or [p for p, _ in ranked[a]]
        rep.candidate_sizes[len(cands)] += 1
        matched = min(len(cands), y)
        if rng.randrange(y) >= matched:
            continue
        if rng.choice(cands) == truth(e):
            rep.successes += 1
    return rep


def _candidates(ranked: list[tuple[str, int]], w: float, f: int, cap: int) -> list:
    ok = [(p, c) for p, c in ranked if w * c <= f + 1e-9]
    if len(ok) <= cap:
        return [p for p, _ in ok]
    cut = ok[cap - 1][1]
    return [p for p, c in ok if c >= cut]


def ecg_stats(manifest: Manifest) -> list[dict]:
    """Per group: members k, split members k', ciphertexts y and 1/y."""
    rows = []
    for sid, s in manifest.scopes.items():
        if s.get("mas") is None:
            continue
        y = s["pieces"]
        rows.append({"scope": sid, "k": s["members"], "k_split": s["split_members"],
                     "y": y, "target": s["target"], "prob": 1 / y if y else 0.0})
    return rows


def frequency_class_violations(enc: Relation, k: int) -> list[tuple[str, int, int]]:
    """Key-free check: each repeated frequency class holds >= k ciphertexts.

    Returns ``(attribute, frequency, distinct)`` for every short class.
    Frequency-one values are exempt: they cannot be told apart by frequency
    from any other once-occurring value, including fresh tokens.
    """
    bad = []
    for a in enc.attributes:
        by = Counter(Counter(enc.column(a)).values())
        for t, y in sorted(by.items()):
            if t >= 2 and y < k:
                bad.append((a, t, y))
    return bad


def scope_violations(enc: Relation, manifest: Manifest, key: Key) -> list[str]:
    """Per group and attribute: every carried cell sits at the group's common
    frequency, and the group spans at least k distinct plaintexts."""
    check_matches(manifest, enc)
    col = {a: Counter(enc.column(a)) for a in enc.attributes}
    cells: dict[tuple[str, str], set] = defaultdict(set)
    for row, meta in zip(enc.rows, manifest.rows):
        for sid, _ in meta.views:
            for a in manifest.scopes[sid]["attrs"]:
                cells[sid, a].add(row[enc.index_of(a)])
    bad = []
    for sid, s in manifest.scopes.items():
        k = s["k"]
        if s["target"] < 2:
            # every cell is unique; the group must still offer k ciphertexts
            if s["members"] < k:
                bad.append(f"{sid}: {s['members']} members < k={k}")
            for a in s["attrs"]:
                if any(col[a][c] != 1 for c in cells.get((sid, a), ())):
                    bad.append(f"{sid}/{a}: repeated ciphertext in a frequency-one group")
            continue
        for a in s["attrs"]:
            cs = cells.get((sid, a), set())
            off = [c for c in cs if col[a][c] != s["target"]]
            if off:
                bad.append(f"{sid}/{a}: {len(off)} ciphertexts off the target frequency")
            distinct = {decrypt_cell(c, key) for c in cs}
            if len(distinct) < k:
                bad.append(f"{sid}/{a}: {len(distinct)} distinct plaintexts < k={k}")
    return bad


def attack_rows(results: Mapping[str, list[AttackReport]], alpha: float) -> list[dict]:
    rows = []
    for scheme, reps in results.items():
        for r in reps:
            rows.append({"scheme": scheme, "attack": r.attack, "trials": r.trials,
                         "successes": r.successes, "rate": round(r.rate, 6),
                         "alpha": round(alpha, 6), "limit": round(r.limit(alpha), 6)})
    return rows
