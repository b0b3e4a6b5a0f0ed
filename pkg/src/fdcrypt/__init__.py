"""FD-preserving, frequency-hiding encryption of relational tables."""

from .cipher import Key, decrypt_cell, encrypt_cell, keygen, read_keyfile, write_keyfile
from .fd_discovery import FD, compare_fd_sets, discover_fds, fd_holds
from .grouping import SecurityConfig
from .manifest import Manifest
from .mas import find_mas
from .pipeline import EncryptionResult, decrypt, encrypt, encrypt_deterministic, encrypt_per_cell
from .relation import Cipher, Relation, load_csv, write_csv

__version__ = "0.1.0"

__all__ = [
    "Cipher", "EncryptionResult", "FD", "Key", "Manifest", "Relation", "SecurityConfig",
    "compare_fd_sets", "decrypt", "decrypt_cell", "discover_fds", "encrypt",
    "encrypt_cell", "encrypt_deterministic", "encrypt_per_cell", "fd_holds", "find_mas",
    "keygen", "load_csv", "read_keyfile", "write_csv", "write_keyfile",
]
