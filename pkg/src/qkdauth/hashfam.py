"""Toeplitz-affine strongly universal hash family.

A member is ``f(z) = Phi z + beta (mod 2)`` with ``Phi`` an ``n x r``
Toeplitz matrix and ``beta`` an ``n``-bit vector, so one function is indexed
by ``r + 2n - 1`` secret bits.
"""

from __future__ import annotations

from dataclasses import dataclass

from qkdauth.bitcore import BitString, ToeplitzDiagonals, toeplitz_mul, toeplitz_mul_blocks
from qkdauth.errors import DimensionError
from qkdauth.keypool import KeyPool


def key_length(r: int, n: int) -> int:
    """Number of secret bits indexing one function mapping ``r`` bits to ``n``."""
    if r < 1 or n < 1:
        raise DimensionError(f"dimensions must be positive, got r={r}, n={n}")
    return r + 2 * n - 1


@dataclass(frozen=True)
class ToeplitzAffineKey:
    diag: ToeplitzDiagonals
    beta: BitString

    def __post_init__(self):
        if len(self.beta) != self.diag.n:
            raise DimensionError(f"beta has {len(self.beta)} bits, expected {self.diag.n}")

    @property
    def r(self) -> int:
        return self.diag.r

    @property
    def n(self) -> int:
        return self.diag.n

    def to_bits(self) -> BitString:
        """Serialize as the diagonal bits followed by ``beta``."""
        return self.diag.t + self.beta

    @classmethod
    def from_bits(cls, bits: BitString, r: int, n: int) -> ToeplitzAffineKey:
        if len(bits) != key_length(r, n):
            raise DimensionError(f"key needs {key_length(r, n)} bits, got {len(bits)}")
        tlen = r + n - 1
        return cls(ToeplitzDiagonals(r, n, bits.low(tlen)), bits.slice(tlen, tlen + n))


def eval_affine(key: ToeplitzAffineKey, z: BitString) -> BitString:
    return toeplitz_mul(key.diag, z) ^ key.beta


def eval_affine_blocks(key: ToeplitzAffineKey, data: BitString) -> BitString:
    """Hash every ``r``-bit block of ``data`` with the same function."""
    out = toeplitz_mul_blocks(key.diag, data)
    nblocks = len(data) // key.r
    beta = key.beta.value
    spread = 0
    for k in range(nblocks):
        spread |= beta << (k * key.n)
    return BitString(len(out), out.value ^ spread)


def draw_key(pool: KeyPool, r: int, n: int, label: str = "toeplitz-affine") -> ToeplitzAffineKey:
    """Consume ``r + 2n - 1`` pool bits and interpret them as a key."""
    return ToeplitzAffineKey.from_bits(pool.draw(key_length(r, n), label), r, n)


@dataclass(frozen=True)
class ToeplitzAffineFamily:
    """The family of Toeplitz-affine maps from ``r`` bits to ``n`` bits."""

    r: int
    n: int

    def __post_init__(self):
        key_length(self.r, self.n)

    @property
    def key_length(self) -> int:
        return key_length(self.r, self.n)

    def draw(self, pool: KeyPool, label: str = "toeplitz-affine") -> ToeplitzAffineKey:
        return draw_key(pool, self.r, self.n, label)

    def evaluate(self, key: ToeplitzAffineKey, z: BitString) -> BitString:
        return eval_affine(key, z)


def kernel_for_wc(s: int) -> ToeplitzAffineFamily:
    """The ``2s -> s`` compression family used at every tree level."""
    if s < 1:
        raise DimensionError(f"intermediate width must be positive, got {s}")
    return ToeplitzAffineFamily(2 * s, s)
