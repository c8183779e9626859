"""Wegman-Carter tree authentication.

The message is cut into ``2s``-bit blocks, every block is compressed to
``s`` bits by one shared kernel function, and the concatenated outputs are
fed to the next level with a fresh function until one ``s``-bit block is
left. The tag is its low-order ``n`` bits.

Two key costs are reported: the real-valued budget ``4 s log2(m)`` with
``s = n + log2(log2(m))``, and the integer number of pool bits this
implementation actually consumes (``levels * (4 s_int - 1)`` where
``s_int = n + ceil(log2(ceil(log2(m))))``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from qkdauth.bitcore import BitString
from qkdauth.errors import DimensionError, KeyExhaustedError, PoolDesyncError
from qkdauth.hashfam import eval_affine_blocks, kernel_for_wc
from qkdauth.keypool import KeyPool


@dataclass(frozen=True)
class WcParams:
    m: int
    n: int
    s: float
    s_int: int
    levels: int
    key_bits_formula: float
    key_bits_actual: int


def intermediate_width(m: int, n: int) -> int:
    return n + math.ceil(math.log2(math.ceil(math.log2(m))))


def level_count(m: int, s: int) -> int:
    """Rounds of ``2s -> s`` compression needed to reduce ``m`` bits to one block."""
    blocks = -(-m // (2 * s))
    levels = 1
    while blocks > 1:
        blocks = -(-blocks // 2)
        levels += 1
    return levels


def wc_params(m: int, n: int) -> WcParams:
    if n < 1:
        raise DimensionError(f"tag length must be positive, got {n}")
    if m <= n:
        raise DimensionError(f"message length {m} must exceed tag length {n}")
    if m < 4:
        raise DimensionError(f"message length {m} too short for log2(log2(m)) to be defined")
    lg = math.log2(m)
    s = n + math.log2(lg)
    s_int = intermediate_width(m, n)
    levels = level_count(m, s_int)
    return WcParams(
        m=m,
        n=n,
        s=s,
        s_int=s_int,
        levels=levels,
        key_bits_formula=4 * s * lg,
        key_bits_actual=levels * kernel_for_wc(s_int).key_length,
    )


def wc_tag(message: BitString, pool: KeyPool, n: int) -> BitString:
    """Tag ``message`` with ``n`` bits, drawing one kernel key per level.

    Raises :class:`KeyExhaustedError` before drawing anything if the pool
    cannot cover every level.
    """
    params = wc_params(len(message), n)
    family = kernel_for_wc(params.s_int)
    if pool.remaining < params.key_bits_actual:
        raise KeyExhaustedError(
            f"wc tag needs {params.key_bits_actual} bits, only {pool.remaining} left"
        )
    cur = message
    for level in range(params.levels):
        key = family.draw(pool, f"wc-level-{level}")
        width = -(-len(cur) // family.r) * family.r
        cur = eval_affine_blocks(key, cur.zero_pad(width))
    return cur.low(n)


def wc_verify(
    message: BitString,
    tag: BitString,
    pool: KeyPool,
    n: int,
    expected_offset: int | None = None,
) -> bool:
    """Recompute the tag from the replica pool and compare.

    ``expected_offset`` is the sender's pool cursor when tagging started;
    a mismatch raises :class:`PoolDesyncError` rather than rejecting.
    """
    if expected_offset is not None and pool.cursor != expected_offset:
        raise PoolDesyncError(f"replica at offset {pool.cursor}, sender at {expected_offset}")
    return wc_tag(message, pool, n) == tag
