"""Two-step authentication: public compression, then a secret affine hash.

``z = f0(l)`` maps the message into ``r`` bits with a fixed public function,
and the tag is ``t = f(z)`` for a one-time Toeplitz-affine ``f``. The secret
cost is ``r + 2n - 1`` bits per message regardless of the message length,
plus the randomizer seed when the optional whitening step is enabled.

The SHA-256 variants of ``f0`` give heuristic collision resistance only.
The linear fold is a GF(2) homomorphism with equal-sized preimages, which
makes the forgery bound ``2^-n + 2^-r`` exactly checkable.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from fractions import Fraction

from qkdauth.bitcore import BitString
from qkdauth.errors import DimensionError, KeyExhaustedError, PoolDesyncError
from qkdauth.hashfam import draw_key, eval_affine, key_length
from qkdauth.keypool import KeyPool

log = logging.getLogger(__name__)

F0_KINDS = ("sha-truncate", "sha-expand", "linear-fold")
SHA_BITS = 256


@dataclass(frozen=True)
class TwoStepParams:
    r: int
    n: int
    f0_kind: str = "sha-truncate"
    randomize: bool = False
    seed_bits: int = 128

    def __post_init__(self):
        key_length(self.r, self.n)
        if self.f0_kind not in F0_KINDS:
            raise ValueError(f"unknown f0 kind {self.f0_kind!r}, expected one of {F0_KINDS}")
        if self.f0_kind == "sha-truncate" and self.r > SHA_BITS:
            raise DimensionError(f"sha-truncate yields at most {SHA_BITS} bits, r={self.r}")
        if self.randomize and self.seed_bits < 1:
            raise DimensionError("randomizer needs a positive seed length")

    def degenerate_for(self, m: int) -> bool:
        """True when the compression step does not compress (``r >= m``)."""
        return self.r >= m


@dataclass(frozen=True)
class SecurityBound:
    p1_bound: Fraction
    p2: Fraction

    @property
    def p_total(self) -> Fraction:
        return self.p1_bound + self.p2


def _length_field(l: BitString) -> bytes:
    return len(l).to_bytes(8, "big")


def f0_sha(l: BitString, r: int, expand: bool | None = None) -> BitString:
    """SHA-256 of the packed message and its 64-bit big-endian bit length.

    Up to 256 bits the digest is truncated to its low ``r`` bits. Otherwise
    (or when ``expand`` is forced) 32-bit big-endian block counters are
    appended and the digests concatenated.
    """
    if r < 1:
        raise DimensionError(f"output width must be positive, got {r}")
    if expand is None:
        expand = r > SHA_BITS
    prefix = l.to_bytes() + _length_field(l)
    if not expand:
        if r > SHA_BITS:
            raise DimensionError(f"plain SHA-256 yields at most {SHA_BITS} bits")
        return BitString.from_bytes(hashlib.sha256(prefix).digest(), r)
    nblocks = -(-r // SHA_BITS)
    out = b"".join(
        hashlib.sha256(prefix + i.to_bytes(4, "big")).digest() for i in range(nblocks)
    )
    return BitString.from_bytes(out, r)


def f0_linear_fold(l: BitString, r: int) -> BitString:
    """XOR of the ``r``-bit blocks of ``l`` after zero-padding."""
    if r < 1:
        raise DimensionError(f"output width must be positive, got {r}")
    mask = (1 << r) - 1
    acc = 0
    v = l.value
    while v:
        acc ^= v & mask
        v >>= r
    return BitString(r, acc)


def apply_f0(l: BitString, params: TwoStepParams) -> BitString:
    if params.f0_kind == "linear-fold":
        return f0_linear_fold(l, params.r)
    return f0_sha(l, params.r, expand=params.f0_kind == "sha-expand")


def keystream(seed: BitString, length: int) -> BitString:
    """Counter-mode SHA-256 stream: block ``j`` is SHA-256(seed || j as u64 BE)."""
    key = seed.to_bytes()
    nblocks = -(-length // SHA_BITS)
    out = b"".join(hashlib.sha256(key + j.to_bytes(8, "big")).digest() for j in range(nblocks))
    return BitString.from_bytes(out, length)


def randomize(l: BitString, seed: BitString) -> BitString:
    return l ^ keystream(seed, len(l))


def key_cost(params: TwoStepParams) -> int:
    return key_length(params.r, params.n) + (params.seed_bits if params.randomize else 0)


def twostep_tag(l: BitString, pool: KeyPool, params: TwoStepParams) -> BitString:
    """Tag ``l``, consuming exactly :func:`key_cost` bits from ``pool``.

    The whole budget is checked before anything is drawn, so exhaustion
    leaves the pool untouched.
    """
    if params.degenerate_for(len(l)):
        log.debug("degenerate two-step parameters: r=%d >= m=%d", params.r, len(l))
    cost = key_cost(params)
    if pool.remaining < cost:
        raise KeyExhaustedError(f"two-step tag needs {cost} bits, only {pool.remaining} left")
    if params.randomize:
        l = randomize(l, pool.draw(params.seed_bits, "twostep-seed"))
    key = draw_key(pool, params.r, params.n, "twostep-key")
    return eval_affine(key, apply_f0(l, params))


def twostep_verify(
    l: BitString,
    tag: BitString,
    pool: KeyPool,
    params: TwoStepParams,
    expected_offset: int | None = None,
) -> bool:
    if expected_offset is not None and pool.cursor != expected_offset:
        raise PoolDesyncError(f"replica at offset {pool.cursor}, sender at {expected_offset}")
    return twostep_tag(l, pool, params) == tag


def security_bound(r: int, n: int) -> SecurityBound:
    """Forgery bound ``2^-n + 2^-r`` for uniformly distributed messages."""
    key_length(r, n)
    return SecurityBound(p1_bound=Fraction(1, 2**r), p2=Fraction(1, 2**n))
