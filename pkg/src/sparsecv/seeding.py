"""Stable seed derivation for grids, folds, repeats, and keyed streams."""

from __future__ import annotations

import hashlib

__all__ = ["derive_seed"]


def derive_seed(master: int, labels) -> int:
    """Hash (master, labels) into a 63-bit seed.

    An empty label list returns ``master`` unchanged. Any change to the
    labels (value, order, or type int-vs-str is canonicalized to its repr)
    yields an unrelated stream.
    """
    labels = list(labels)
    if not labels:
        return int(master)
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master)).encode())
    for lab in labels:
        h.update(b"\x1f")
        h.update(str(lab).encode())
    return int.from_bytes(h.digest(), "big") >> 1
