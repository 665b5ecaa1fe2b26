"""Deterministic uniform draws with lazily expanded binary digits.

The draw ``(stream, index)`` is the real number ``0.b1 b2 b3 ...`` (base 2)
whose bits are the concatenated SHA-256 digests of
``"<stream>:<index>:<block>"`` for ``block = 0, 1, 2, ...``.  The expansion
is machine independent and cached behind a lock.
"""

from __future__ import annotations

import hashlib
import threading

_BLOCK_BITS = 256

_lock = threading.Lock()
_cache: dict[tuple[str, int], bytearray] = {}


def _digest(stream: str, index: int, block: int) -> bytes:
    return hashlib.sha256(f"{stream}:{index}:{block}".encode()).digest()


def leading_bits(stream: str, index: int, k: int) -> int:
    """Integer formed by the first ``k`` bits of the draw."""
    nbytes = (k + 7) // 8
    key = (stream, index)
    with _lock:
        buf = _cache.setdefault(key, bytearray())
        while len(buf) < nbytes:
            buf.extend(_digest(stream, index, len(buf) * 8 // _BLOCK_BITS))
        chunk = bytes(buf[:nbytes])
    return int.from_bytes(chunk, "big") >> (8 * nbytes - k)
