"""Command-line interface.

Exit codes: 0 success, 1 verification or attack-bound failure, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import random
import sys
from dataclasses import asdict

from .attack_sim import (attack_rows, ecg_stats, frequency_class_violations, knowledge,
                         run_freq_game, run_kerckhoffs_attack, scope_violations)
from .cipher import CipherError, Key, keygen, read_keyfile, write_keyfile
from .fd_discovery import compare_fd_sets, discover_fds, format_fds
from .grouping import SecurityConfig
from .manifest import Manifest
from .mas import find_mas
from .pipeline import StageError, decrypt, encrypt, encrypt_deterministic, encrypt_per_cell
from .relation import RelationError, load_csv, write_csv
from .report import RunReport, render_report

KEYFILE_ENV = "F2_KEYFILE"
DEFAULTS = {"alpha": 0.2, "split_factor": 2, "key_bits": 128, "seed": None}

log = logging.getLogger("fdcrypt")


class InputError(Exception):
    pass


def _config(args) -> SecurityConfig:
    """Flags beat the JSON config file, which beats the defaults."""
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(data) - set(DEFAULTS)
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(data)
    for name in DEFAULTS:
        v = getattr(args, name, None)
        if v is not None:
            merged[name] = v
    try:
        return SecurityConfig(**merged)
    except (TypeError, ValueError) as exc:
        raise InputError(str(exc)) from exc


def _keypath(args) -> str:
    path = args.key or os.environ.get(KEYFILE_ENV)
    if not path:
        raise InputError(f"no key file: pass --key or set {KEYFILE_ENV}")
    return path


def _load_key(args) -> Key:
    return read_keyfile(_keypath(args))


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, help="security threshold (default 0.2)")
    p.add_argument("--split-factor", dest="split_factor", type=int,
                   help="split factor w >= 2 (default 2)")
    p.add_argument("--key-bits", dest="key_bits", type=int, choices=(128, 256))
    p.add_argument("--seed", type=int, help="seed for every random choice")
    p.add_argument("--config", help="JSON file with alpha / split_factor / key_bits / seed")


def cmd_encrypt(args) -> int:
    cfg = _config(args)
    rel = load_csv(args.input, cipher=False)
    path = _keypath(args)
    if os.path.exists(path):
        key = read_keyfile(path)
        if key.bits != cfg.key_bits:
            raise InputError(f"key file holds a {key.bits}-bit key, config asks for {cfg.key_bits}")
    else:
        key = keygen(cfg.key_bits)
        write_keyfile(key, path)
        log.info("wrote new key to %s", path)
    res = encrypt(rel, cfg, key, threads=args.threads)
    write_csv(res.relation, args.output)
    res.manifest.save(args.manifest)
    if args.report:
        res.report.save(args.report)
    rep = res.report
    print(f"rows\t{rel.n} -> {rep.output_rows}")
    print(f"mas\t{rep.q} (overlapping pairs {rep.h})")
    for row in rep.stage_table():
        print(f"{row['stage']}\t{row['added']}\t{row['overhead']:.4f}\t{row['seconds']:.3f}s")
    return 0


def cmd_decrypt(args) -> int:
    rel = load_csv(args.input, cipher=True)
    manifest = Manifest.load(args.manifest)
    plain = decrypt(rel, manifest, _load_key(args))
    write_csv(plain, args.output)
    return 0


def cmd_discover_fds(args) -> int:
    rel = load_csv(args.input)
    for line in format_fds(discover_fds(rel, max_attrs=args.max_attrs)):
        print(line)
    return 0


def cmd_discover_mas(args) -> int:
    rep = find_mas(load_csv(args.input))
    for m in rep.mas_list:
        print(",".join(m.attrs))
    print(f"# q={rep.q} h={rep.h}", file=sys.stderr)
    return 0


def _encrypt_scheme(scheme: str, rel, cfg: SecurityConfig, key: Key):
    if scheme == "f2":
        res = encrypt(rel, cfg, key)
        return res.relation, res.manifest
    if scheme == "deterministic":
        return encrypt_deterministic(rel, key), None
    return encrypt_per_cell(rel, key), None


def cmd_attack_sim(args) -> int:
    cfg = _config(args)
    rel = load_csv(args.input, cipher=False)
    seed = cfg.seed if cfg.seed is not None else 0
    key = keygen(cfg.key_bits, str(seed).encode())
    enc, manifest = _encrypt_scheme(args.scheme, rel, cfg, key)
    reps = []
    if args.attack in ("freq", "both"):
        reps.append(run_freq_game(rel, enc, args.trials, random.Random(seed), key))
    if args.attack in ("kerckhoffs", "both"):
        aware = (cfg.alpha, cfg.split_factor) if args.aware else None
        reps.append(run_kerckhoffs_attack(knowledge(rel), enc, args.trials,
                                          random.Random(seed + 1), key, aware))
    ok = True
    print(f"scheme: {args.scheme}")
    print(f"alpha: {cfg.alpha}")
    print(f"rows: {rel.n} -> {enc.n}")
    for r in reps:
        limit = r.limit(cfg.alpha)
        passed = r.rate <= limit
        ok &= passed
        print(f"{r.attack}: trials={r.trials} successes={r.successes} rate={r.rate:.4f} "
              f"limit={limit:.4f} {'PASS' if passed else 'FAIL'}")
    if manifest is not None and args.ecgs:
        for row in ecg_stats(manifest):
            print(f"ecg {row['scope']}: k={row['k']} k'={row['k_split']} y={row['y']} "
                  f"p=1/{row['y']}")
    return 0 if ok else 1


def cmd_verify(args) -> int:
    orig = load_csv(args.original, cipher=False)
    enc = load_csv(args.encrypted)
    if tuple(orig.attributes) != tuple(enc.attributes):
        raise InputError("the two files have different headers")
    manifest = Manifest.load(args.manifest) if args.manifest else None
    alpha = args.alpha
    if alpha is None:
        alpha = manifest.config["alpha"] if manifest else DEFAULTS["alpha"]
    k = SecurityConfig(alpha=alpha).k
    diff = compare_fd_sets(discover_fds(orig), discover_fds(enc))
    for fd in sorted(diff.only_a, key=str):
        print(f"lost: {fd}")
    for fd in sorted(diff.only_b, key=str):
        print(f"spurious: {fd}")
    print(f"fd: {'PASS' if diff.empty else 'FAIL'}")
    bad = frequency_class_violations(enc, k)
    for a, t, y in bad[:20]:
        print(f"short class: {a} frequency {t} has {y} < {k} ciphertexts")
    if manifest is not None:
        scoped = scope_violations(enc, manifest, _load_key(args))
        for line in scoped[:20]:
            print(f"scope: {line}")
        bad = bad + scoped
    print(f"alpha: {'PASS' if not bad else 'FAIL'} (k={k})")
    return 0 if diff.empty and not bad else 1


def cmd_report(args) -> int:
    cfg = _config(args)
    reports: list[tuple[str, RunReport]] = []
    for path in args.reports or []:
        reports.append((os.path.basename(path), RunReport.load(path)))
    alphas = [float(a) for a in args.alphas.split(",")] if args.alphas else [cfg.alpha]
    attacks = []
    for path in args.inputs:
        rel = load_csv(path, cipher=False)
        for a in alphas:
            run_cfg = SecurityConfig(**{**asdict(cfg), "alpha": a})
            key = keygen(run_cfg.key_bits, str(run_cfg.seed or 0).encode())
            res = encrypt(rel, run_cfg, key, threads=args.threads)
            label = f"{os.path.basename(path)}@{a:g}"
            reports.append((label, res.report))
            if args.trials:
                seed = run_cfg.seed or 0
                reps = [run_freq_game(rel, res.relation, args.trials, random.Random(seed), key),
                        run_kerckhoffs_attack(knowledge(rel), res.relation, args.trials,
                                              random.Random(seed + 1), key)]
                attacks.extend(attack_rows({label: reps}, a))
    if not reports:
        raise InputError("nothing to report: give input CSVs or --from-json reports")
    written = render_report(reports, args.outdir, attacks or None)
    rows = [{"run": label, **row} for label, rep in reports for row in rep.stage_table()]
    print("\t".join(rows[0]))
    for row in rows:
        print("\t".join(str(v) for v in row.values()))
    for path in written:
        print(f"# wrote {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fdcrypt",
                                description="FD-preserving, frequency-hiding table encryption")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("encrypt", help="encrypt a CSV table")
    e.add_argument("input")
    e.add_argument("-o", "--output", required=True)
    e.add_argument("-m", "--manifest", required=True)
    e.add_argument("-k", "--key", help=f"key file, created if missing (default ${KEYFILE_ENV})")
    e.add_argument("--report", help="write the run report as JSON")
    e.add_argument("--threads", type=int, default=1)
    _add_config_flags(e)
    e.set_defaults(func=cmd_encrypt)

    d = sub.add_parser("decrypt", help="recover the original table")
    d.add_argument("input")
    d.add_argument("-o", "--output", required=True)
    d.add_argument("-m", "--manifest", required=True)
    d.add_argument("-k", "--key")
    d.set_defaults(func=cmd_decrypt)

    f = sub.add_parser("discover-fds", help="print minimal FDs, one per line")
    f.add_argument("input")
    f.add_argument("--max-attrs", type=int, default=20)
    f.set_defaults(func=cmd_discover_fds)

    m = sub.add_parser("discover-mas", help="print maximal attribute sets")
    m.add_argument("input")
    m.set_defaults(func=cmd_discover_mas)

    a = sub.add_parser("attack-sim", help="simulate frequency attacks on an encrypted copy")
    a.add_argument("input", help="plaintext CSV; it is encrypted with the chosen scheme")
    a.add_argument("--scheme", choices=("f2", "deterministic", "naive-probabilistic"),
                   default="f2")
    a.add_argument("--attack", choices=("freq", "kerckhoffs", "both"), default="both")
    a.add_argument("--trials", type=int, default=10_000)
    a.add_argument("--aware", action="store_true",
                   help="give the known-scheme attacker the true alpha and split factor")
    a.add_argument("--ecgs", action="store_true", help="print per-group k, k', y")
    _add_config_flags(a)
    a.set_defaults(func=cmd_attack_sim)

    v = sub.add_parser("verify", help="compare FD sets and check frequency classes")
    v.add_argument("original")
    v.add_argument("encrypted")
    v.add_argument("--alpha", type=float)
    v.add_argument("-m", "--manifest", help="also run the per-group check (needs the key)")
    v.add_argument("-k", "--key")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("report", help="encrypt inputs and render tables and figures")
    r.add_argument("inputs", nargs="*")
    r.add_argument("--from-json", dest="reports", nargs="*", help="saved run reports")
    r.add_argument("--alphas", help="comma-separated alpha values")
    r.add_argument("--trials", type=int, default=0, help="attack trials per run (0 = skip)")
    r.add_argument("--outdir", default="report")
    r.add_argument("--threads", type=int, default=1)
    _add_config_flags(r)
    r.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        bad_input = (InputError, RelationError, CipherError, ValueError)
        return 2 if isinstance(exc.__cause__, bad_input) else 1
    except (InputError, RelationError, CipherError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
