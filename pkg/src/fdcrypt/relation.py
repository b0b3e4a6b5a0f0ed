"""Relational tables of plaintext or ciphertext cells, CSV I/O and provenance."""

from __future__ import annotations

import base64
import binascii
import csv
import io
import os
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union


class RelationError(ValueError):
    """Raised for malformed tables or bad attribute references."""


class Cipher(NamedTuple):
    """A ciphertext cell: nonce plus mask (the mask carries the integrity tag)."""

    nonce: bytes
    mask: bytes

    def serialize(self) -> str:
        return (
            base64.b64encode(self.nonce).decode("ascii")
            + ":"
            + base64.b64encode(self.mask).decode("ascii")
        )

    @classmethod
    def parse(cls, text: str) -> "Cipher":
        head, sep, tail = text.partition(":")
        if not sep:
            raise RelationError(f"not a ciphertext cell: {text[:40]!r}")
        try:
            return cls(base64.b64decode(head, validate=True), base64.b64decode(tail, validate=True))
        except binascii.Error as exc:
            raise RelationError(f"bad base64 in ciphertext cell: {text[:40]!r}") from exc


Cell = Union[str, Cipher]


# Provenance variants. They never leave the client: the manifest stores them.

@dataclass(frozen=True)
class Original:
    of: int


@dataclass(frozen=True)
class ScaleCopy:
    of: int


@dataclass(frozen=True)
class ConflictSplit:
    of: int
    side: int


@dataclass(frozen=True)
class FakeEC:
    mas: int
    scope: str


@dataclass(frozen=True)
class FPArtificial:
    pair_index: int
    side: int


Provenance = Union[Original, ScaleCopy, ConflictSplit, FakeEC, FPArtificial]

_PROV_KINDS = {
    "original": Original,
    "scale": ScaleCopy,
    "split": ConflictSplit,
    "fake": FakeEC,
    "fp": FPArtificial,
}


def provenance_to_json(p: Provenance) -> dict:
    kind = {v: k for k, v in _PROV_KINDS.items()}[type(p)]
    return {"kind": kind, **p.__dict__}


def provenance_from_json(d: dict) -> Provenance:
    d = dict(d)
    try:
        cls = _PROV_KINDS[d.pop("kind")]
    except KeyError as exc:
        raise RelationError(f"unknown provenance {d!r}") from exc
    return cls(**d)


class Record(NamedTuple):
    id: int
    cells: tuple


class Relation:
    """An immutable rectangular table.

    Cells are either all text tokens (plaintext) or all ``Cipher`` values.
    Record ids default to the row position; they are unique per relation.
    """

    def __init__(self, attributes: Sequence[str], rows: Iterable[Sequence[Cell]],
                 ids: Sequence[int] | None = None):
        self.attributes: tuple[str, ...] = tuple(attributes)
        if len(set(self.attributes)) != len(self.attributes):
            raise RelationError(f"duplicate attribute names in {self.attributes}")
        self.rows: list[tuple] = [tuple(r) for r in rows]
        m = len(self.attributes)
        for i, r in enumerate(self.rows):
            if len(r) != m:
                raise RelationError(f"row {i + 1} has {len(r)} cells, expected {m}")
        self.ids: list[int] = list(range(len(self.rows))) if ids is None else list(ids)
        if len(self.ids) != len(self.rows):
            raise RelationError("ids and rows differ in length")
        if len(set(self.ids)) != len(self.ids):
            raise RelationError("record ids must be unique")
        self._index = {a: i for i, a in enumerate(self.attributes)}
        self._codes: dict[int, list[int]] = {}

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def m(self) -> int:
        return len(self.attributes)

    @property
    def is_cipher(self) -> bool:
        return bool(self.rows) and isinstance(self.rows[0][0], Cipher)

    def __len__(self) -> int:
        return len(self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self.attributes == other.attributes and self.rows == other.rows

    def __repr__(self) -> str:
        return f"Relation(m={self.m}, n={self.n})"

    def records(self) -> Iterable[Record]:
        for rid, row in zip(self.ids, self.rows):
            yield Record(rid, row)

    def index_of(self, attr: str) -> int:
        try:
            return self._index[attr]
        except KeyError:
            raise RelationError(f"unknown attribute {attr!r}") from None

    def indices(self, attrs: Iterable[str]) -> list[int]:
        return [self.index_of(a) for a in attrs]

    def sorted_attrs(self, attrs: Iterable[str]) -> tuple[str, ...]:
        """Attributes in schema order."""
        return tuple(sorted(set(attrs), key=self.index_of))

    def column(self, attr: str) -> list:
        j = self.index_of(attr)
        return [r[j] for r in self.rows]

    def codes(self, j: int) -> list[int]:
        """Dense integer codes of column j (first-occurrence order), cached."""
        c = self._codes.get(j)
        if c is None:
            seen: dict = {}
            c = [seen.setdefault(r[j], len(seen)) for r in self.rows]
            self._codes[j] = c
        return c

    def project(self, attrs: Sequence[str]) -> list[tuple]:
        idx = self.indices(attrs)
        return [tuple(r[j] for j in idx) for r in self.rows]

    def domain(self) -> set:
        """Every cell value appearing anywhere in the table."""
        out: set = set()
        for r in self.rows:
            out.update(r)
        return out


def load_csv(path: str | os.PathLike, has_header: bool = True,
             cipher: bool | None = None) -> Relation:
    """Read a comma-separated UTF-8 file.

    With ``cipher=None`` the cell type is sniffed from the first data cell.
    Headerless files get attribute names ``c0 .. c{m-1}``.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise RelationError(f"{path}: empty file")
    if has_header:
        header, body = rows[0], rows[1:]
    else:
        header, body = [f"c{i}" for i in range(len(rows[0]))], rows
    m = len(header)
    for i, r in enumerate(body):
        if len(r) != m:
            line = i + 2 if has_header else i + 1
            raise RelationError(f"{path}: row {line} has {len(r)} cells, expected {m}")
    if cipher is None:
        cipher = bool(body) and _looks_cipher(body[0][0])
    if cipher:
        body = [[Cipher.parse(c) for c in r] for r in body]
    return Relation(header, body)


def _looks_cipher(text: str) -> bool:
    head, sep, tail = text.partition(":")
    if not sep or not head or not tail:
        return False
    try:
        base64.b64decode(head, validate=True)
        base64.b64decode(tail, validate=True)
    except binascii.Error:
        return False
    return True


def to_csv_text(rel: Relation) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(rel.attributes)
    for r in rel.rows:
        w.writerow([c.serialize() if isinstance(c, Cipher) else c for c in r])
    return buf.getvalue()


def write_csv(rel: Relation, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(to_csv_text(rel))


def frequency(rel: Relation, attrs: Sequence[str], value: Sequence[Cell]) -> int:
    """Number of records whose projection on ``attrs`` equals ``value``."""
    idx = rel.indices(attrs)
    value = tuple(value)
    if len(value) != len(idx):
        raise RelationError("value arity does not match attrs")
    return sum(1 for r in rel.rows if tuple(r[j] for j in idx) == value)


def value_counts(rel: Relation, attr: str) -> Counter:
    return Counter(rel.column(attr))
