"""Probabilistic cell encryption e = <r, F_k(r) xor p> with tag-derived nonces.

F is keyed BLAKE2b in counter mode, with the personalization string used
for domain separation between nonce, keystream and integrity tag. The nonce r is itself a PRF output over
the serialized ``CipherTag``, so equal tags give equal ciphertexts inside one
run while a different copy index or scope gives an unrelated one.
"""

from __future__ import annotations

import hashlib
import hmac
import os
import secrets
import stat
import struct
from dataclasses import dataclass
from typing import NamedTuple

from .relation import Cipher

MAX_TOKEN_BYTES = 4096
BLOCK = 16
TAG_BYTES = 16


class CipherError(ValueError):
    """Bad parameters or oversized tokens."""


class TamperError(CipherError):
    """Integrity check failed: wrong key or modified ciphertext."""


@dataclass(frozen=True)
class Key:
    bytes: bytes
    bits: int

    def __post_init__(self):
        if self.bits not in (128, 256):
            raise CipherError(f"unsupported key size {self.bits}")
        if len(self.bytes) != self.bits // 8:
            raise CipherError("key length does not match its size")

    def __repr__(self) -> str:
        return f"Key(bits={self.bits})"


class CipherTag(NamedTuple):
    attribute: str
    plaintext: str
    copy_index: int
    scope: str

    def serialize(self) -> bytes:
        a, p, s = self.attribute, self.plaintext, self.scope
        # lengths are in code points, which still makes the encoding injective
        return f"{len(a)}:{a}{len(p)}:{p}{self.copy_index}:{len(s)}:{s}".encode("utf-8")


def keygen(bits: int = 128, seed: bytes | None = None) -> Key:
    if bits not in (128, 256):
        raise CipherError(f"unsupported key size {bits}")
    if seed is None:
        raw = secrets.token_bytes(bits // 8)
    else:
        raw = hashlib.sha256(b"fdcrypt-keygen\x00" + bytes(seed)).digest()[: bits // 8]
    return Key(raw, bits)


def _prf(key: Key, label: bytes, msg: bytes, size: int = 32) -> bytes:
    return hashlib.blake2b(msg, key=key.bytes, person=label, digest_size=size).digest()


def _keystream(key: Key, nonce: bytes, length: int) -> bytes:
    if length <= 64:
        return _prf(key, b"ks", nonce + b"\0\0\0\0", 64)[:length]
    out = bytearray()
    ctr = 0
    while len(out) < length:
        out += _prf(key, b"ks", nonce + struct.pack(">I", ctr), 64)
        ctr += 1
    return bytes(out[:length])


def _frame(p: str) -> bytes:
    raw = p.encode("utf-8")
    if len(raw) > MAX_TOKEN_BYTES:
        raise CipherError(f"token of {len(raw)} bytes exceeds the {MAX_TOKEN_BYTES}-byte limit")
    body = struct.pack(">H", len(raw)) + raw
    return body + b"\x00" * (-len(body) % BLOCK)


def _xor(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(len(a), "big")


def encrypt_cell(p: str, key: Key, tag: CipherTag) -> Cipher:
    framed = _frame(p)
    nonce = _prf(key, b"nonce", tag.serialize())[: key.bits // 8]
    masked = _xor(framed, _keystream(key, nonce, len(framed)))
    mac = _prf(key, b"mac", nonce + framed)[:TAG_BYTES]
    return Cipher(nonce, masked + mac)


def decrypt_cell(c: Cipher, key: Key) -> str:
    if len(c.nonce) != key.bits // 8 or len(c.mask) < BLOCK + TAG_BYTES:
        raise TamperError("ciphertext has the wrong shape for this key")
    masked, mac = c.mask[:-TAG_BYTES], c.mask[-TAG_BYTES:]
    if len(masked) % BLOCK:
        raise TamperError("ciphertext is not block aligned")
    framed = _xor(masked, _keystream(key, c.nonce, len(masked)))
    if not hmac.compare_digest(mac, _prf(key, b"mac", c.nonce + framed)[:TAG_BYTES]):
        raise TamperError("integrity check failed (wrong key or modified cell)")
    (length,) = struct.unpack(">H", framed[:2])
    raw = framed[2 : 2 + length]
    if len(raw) != length or any(framed[2 + length :]):
        raise TamperError("bad padding")
    return raw.decode("utf-8")


class CellEncryptor:
    """Caches ciphertexts by tag; one instance per encryption run."""

    def __init__(self, key: Key):
        self.key = key
        self._cache: dict[CipherTag, Cipher] = {}

    def __call__(self, p: str, tag: CipherTag) -> Cipher:
        c = self._cache.get(tag)
        if c is None:
            c = encrypt_cell(p, self.key, tag)
            self._cache[tag] = c
        return c


def write_keyfile(key: Key, path: str | os.PathLike) -> None:
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
    with os.fdopen(fd, "w") as fh:
        fh.write(key.bytes.hex() + "\n")
    os.chmod(path, stat.S_IRUSR | stat.S_IWUSR)


def read_keyfile(path: str | os.PathLike) -> Key:
    with open(path) as fh:
        text = fh.read().strip()
    try:
        raw = bytes.fromhex(text)
    except ValueError as exc:
        raise CipherError(f"{path}: key file is not hex") from exc
    return Key(raw, len(raw) * 8)
