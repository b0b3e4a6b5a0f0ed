"""Client-side manifest: provenance and real-cell masks for every output row.

Stored as JSON lines::

    {"type": "header", "attributes": [...], "n_original": n, "config": {...}, "rows": N, "digest": hex}
    {"type": "scope", "id": "m0.g3", "attrs": [...], "target": 4, "k": 5, ...}   (one per ECG / FP node)
    {"type": "row", "i": 0, "prov": {...}, "real": "1101", "views": [["m0.g3", 1]]}
    {"type": "end", "rows": N}

The trailing ``end`` line makes truncation detectable.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Sequence

from .relation import (Provenance, Relation, RelationError, provenance_from_json,
                       provenance_to_json)


class ManifestError(RelationError):
    """Manifest is truncated, malformed or does not match the ciphertext."""


@dataclass
class ManifestRow:
    provenance: Provenance
    real: tuple[bool, ...]
    views: tuple[tuple[str, int], ...] = ()


@dataclass
class Manifest:
    attributes: tuple[str, ...]
    n_original: int
    config: dict
    rows: list[ManifestRow]
    scopes: dict[str, dict] = field(default_factory=dict)
    digest: str = ""

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            head = {"type": "header", "attributes": list(self.attributes),
                    "n_original": self.n_original, "config": self.config,
                    "rows": len(self.rows), "digest": self.digest}
            fh.write(json.dumps(head) + "\n")
            for sid, meta in self.scopes.items():
                fh.write(json.dumps({"type": "scope", "id": sid, **meta}) + "\n")
            for i, r in enumerate(self.rows):
                fh.write(json.dumps({
                    "type": "row", "i": i, "prov": provenance_to_json(r.provenance),
                    "real": "".join("1" if b else "0" for b in r.real),
                    "views": [list(v) for v in r.views],
                }) + "\n")
            fh.write(json.dumps({"type": "end", "rows": len(self.rows)}) + "\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "Manifest":
        try:
            with open(path, encoding="utf-8") as fh:
                lines = [json.loads(line) for line in fh if line.strip()]
        except json.JSONDecodeError as exc:
            raise ManifestError(f"{path}: malformed manifest line ({exc})") from exc
        if not lines or lines[0].get("type") != "header":
            raise ManifestError(f"{path}: missing manifest header")
        if lines[-1].get("type") != "end":
            raise ManifestError(f"{path}: manifest is truncated (no end marker)")
        head = lines[0]
        scopes = {}
        rows: list[ManifestRow] = []
        for d in lines[1:-1]:
            if d["type"] == "scope":
                sid = d.pop("id")
                d.pop("type")
                scopes[sid] = d
            elif d["type"] == "row":
                if d["i"] != len(rows):
                    raise ManifestError(f"{path}: row entries out of order at {d['i']}")
                rows.append(ManifestRow(provenance_from_json(d["prov"]),
                                        tuple(c == "1" for c in d["real"]),
                                        tuple((s, int(c)) for s, c in d["views"])))
        if len(rows) != head["rows"] or lines[-1]["rows"] != head["rows"]:
            raise ManifestError(f"{path}: manifest lists {len(rows)} rows, header says {head['rows']}")
        return cls(tuple(head["attributes"]), head["n_original"], head["config"], rows,
                   scopes, head["digest"])


def relation_digest(rel: Relation) -> str:
    h = hashlib.sha256()
    h.update(",".join(rel.attributes).encode() + b"\n")
    for row in rel.rows:
        h.update(",".join(c.serialize() for c in row).encode() + b"\n")
    return h.hexdigest()


def check_matches(manifest: Manifest, rel: Relation) -> None:
    if tuple(rel.attributes) != tuple(manifest.attributes):
        raise ManifestError("ciphertext header does not match the manifest")
    if rel.n != len(manifest.rows):
        raise ManifestError(f"ciphertext has {rel.n} rows, manifest covers {len(manifest.rows)}")
    if manifest.digest and relation_digest(rel) != manifest.digest:
        raise ManifestError("ciphertext content does not match the manifest digest")


def rows_of(manifest: Manifest, kinds: Sequence[type]) -> list[int]:
    return [i for i, r in enumerate(manifest.rows) if isinstance(r.provenance, tuple(kinds))]
