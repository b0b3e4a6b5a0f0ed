"""The four-step encryption pipeline, its inverse and two baseline schemes."""

from __future__ import annotations

import logging
import random
import secrets
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, replace

from .cipher import CellEncryptor, CipherTag, Key, decrypt_cell, keygen
from .conflict import EncodedRow, materialize, resolve_all, ConflictReport
from .fp_elimination import FPResult, eliminate_false_positives, fp_bounds
from .grouping import FreshTokens, Packing, SecurityConfig, build_ecgs, greedy_pack
from .manifest import Manifest, ManifestError, ManifestRow, check_matches, relation_digest
from .mas import MASReport, find_mas
from .relation import ConflictSplit, Original, Relation
from .report import RunReport
from .split_scale import MASStage, build_stage

log = logging.getLogger(__name__)


@dataclass
class EncryptionResult:
    relation: Relation
    manifest: Manifest
    report: RunReport
    mas_report: MASReport
    stages: list[MASStage]
    conflicts: ConflictReport
    fp: FPResult


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it and ``__cause__`` holds the error."""

    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"stage {stage}: {exc}")
        self.stage = stage


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def _stream(rng: random.Random) -> random.Random:
    return random.Random(rng.getrandbits(64))


def encrypt(rel: Relation, config: SecurityConfig, key: Key | None = None,
            threads: int = 1, pack: Packing = greedy_pack) -> EncryptionResult:
    """Run MAS discovery, grouping with splitting and scaling, conflict
    resolution and false-positive elimination, then shuffle the rows.

    ``pack`` replaces the class-packing strategy of the grouping step.
    Unseeded configs get a fresh seed, recorded in the report and manifest
    so the run can be repeated. Stage failures raise ``StageError``.
    """
    if rel.is_cipher:
        raise ValueError("input relation is already encrypted")
    if key is None:
        key = keygen(config.key_bits)
    if config.seed is None:
        config = replace(config, seed=secrets.randbits(63))
    rng = random.Random(config.seed)
    enc = CellEncryptor(key)
    domain = rel.domain()
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    with _stage("mas"):
        mas_report = find_mas(rel)
    timings["mas"] = time.perf_counter() - t0

    streams = [_stream(rng) for _ in mas_report.mas_list]

    def stage_of(i: int) -> tuple[MASStage, float, float]:
        mas = mas_report.mas_list[i]
        fresh = FreshTokens(streams[i], domain)
        a = time.perf_counter()
        with _stage("grouping"):
            ecgs = build_ecgs(mas, config, fresh, i, pack)
        b = time.perf_counter()
        with _stage("split_scale"):
            stage = build_stage(i, mas.attrs, ecgs, enc, config.split_factor)
        return stage, b - a, time.perf_counter() - b

    idx = range(mas_report.q)
    if threads > 1 and mas_report.q > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(stage_of, idx))
    else:
        results = [stage_of(i) for i in idx]
    stages = [r[0] for r in results]
    timings["grouping"] = sum(r[1] for r in results)
    timings["split_scale"] = sum(r[2] for r in results)

    t0 = time.perf_counter()
    fresh = FreshTokens(_stream(rng), domain)
    with _stage("conflict"):
        specs, creport = resolve_all(stages, mas_report, rel.ids, _stream(rng))
        rows = materialize(specs, rel, stages, enc, fresh)
    timings["conflict"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    with _stage("fp"):
        fp = eliminate_false_positives(rel.attributes, mas_report, config, enc, fresh)
    rows.extend(fp.rows)
    timings["fp"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    order = list(range(len(rows)))
    _stream(rng).shuffle(order)
    rows = [rows[i] for i in order]
    out = Relation(rel.attributes, [r.cells for r in rows])
    manifest = _manifest(rel, config, rows, stages, fp, out)
    timings["assemble"] = time.perf_counter() - t0

    report = _report(rel, config, mas_report, stages, creport, fp, out.n, timings)
    with _stage("report"):
        report.check_bounds()
    return EncryptionResult(out, manifest, report, mas_report, stages, creport, fp)


def _manifest(rel: Relation, config: SecurityConfig, rows: list[EncodedRow],
              stages: list[MASStage], fp: FPResult, out: Relation) -> Manifest:
    scopes: dict[str, dict] = {}
    for s in stages:
        for g, plan in zip(s.ecgs, s.plans):
            scopes[g.id] = {
                "mas": s.index, "attrs": list(s.attrs), "target": plan.target, "k": g.k,
                "members": len(g.members), "fakes": g.fake_count,
                "pieces": sum(len(p) for p in plan.pieces),
                "split_members": sum(len(p) > 1 for p in plan.pieces),
                "distinct": [len({c.representative[a] for c in g.members})
                             for a in range(len(s.attrs))],
            }
    for i, node in enumerate(fp.false_positive_nodes):
        lhs = sorted(node.lhs)
        scopes[f"fp.{i}"] = {"mas": None, "attrs": lhs, "target": 2, "k": config.k,
                             "members": config.k, "fakes": 0, "pieces": config.k,
                             "split_members": 0, "distinct": [config.k] * len(lhs),
                             "rhs": node.rhs}
    mrows = [ManifestRow(r.provenance, r.real, r.views) for r in rows]
    snapshot = {k: v for k, v in asdict(config).items()}
    return Manifest(rel.attributes, rel.n, snapshot, mrows, scopes, relation_digest(out))


def _report(rel, config, mas_report, stages, creport, fp, out_rows, timings) -> RunReport:
    lo, hi = fp_bounds(mas_report, rel.m, config.k)
    per_mas = [{"attrs": list(s.attrs), "classes": len(mas_report.mas_list[s.index].partition),
                "ecgs": len(s.ecgs), "fake_classes": sum(g.fake_count for g in s.ecgs),
                "fake_rows": s.fake_rows, "scale_rows": s.scale_rows} for s in stages]
    return RunReport(
        n=rel.n, m=rel.m, q=mas_report.q, h=mas_report.h, k=config.k,
        alpha=config.alpha, split_factor=config.split_factor, seed=config.seed,
        added={"fakes": sum(s.fake_rows for s in stages),
               "scaling": sum(s.scale_rows for s in stages),
               "conflicts": creport.records_added, "fp": fp.added},
        timings=timings, output_rows=out_rows, type1=creport.type1_count,
        type2=creport.type2_count, conflict_bound=mas_report.h * rel.n,
        fp_lower=lo, fp_upper=hi, fp_nodes=len(fp.false_positive_nodes), per_mas=per_mas,
    )


def decrypt(rel: Relation, manifest: Manifest, key: Key) -> Relation:
    """Recover the original table from the ciphertext rows that carry real cells."""
    check_matches(manifest, rel)
    m = rel.m
    values: dict[int, list] = {}
    for row, meta in zip(rel.rows, manifest.rows):
        prov = meta.provenance
        if not isinstance(prov, (Original, ConflictSplit)):
            continue
        slot = values.setdefault(prov.of, [None] * m)
        for j in range(m):
            if meta.real[j] and slot[j] is None:
                slot[j] = decrypt_cell(row[j], key)
    if sorted(values) != list(range(manifest.n_original)):
        raise ManifestError("manifest does not cover every original record")
    rows = []
    for rid in range(manifest.n_original):
        slot = values[rid]
        if any(v is None for v in slot):
            raise ManifestError(f"record {rid} has cells with no real ciphertext")
        rows.append(slot)
    return Relation(rel.attributes, rows)


def encrypt_deterministic(rel: Relation, key: Key) -> Relation:
    """Per-value deterministic encryption (frequency revealing)."""
    enc = CellEncryptor(key)
    rows = [tuple(enc(p, CipherTag(a, p, 1, "det")) for a, p in zip(rel.attributes, r))
            for r in rel.rows]
    return Relation(rel.attributes, rows)


def encrypt_per_cell(rel: Relation, key: Key) -> Relation:
    """Independent probabilistic encryption of every cell (destroys FDs)."""
    enc = CellEncryptor(key)
    rows = [tuple(enc(p, CipherTag(a, p, 1, f"cell.{rid}")) for a, p in zip(rel.attributes, r))
            for rid, r in zip(rel.ids, rel.rows)]
    return Relation(rel.attributes, rows)
