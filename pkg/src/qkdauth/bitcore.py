"""Bit strings and GF(2) Toeplitz products.

A :class:`BitString` is an immutable ``(length, value)`` pair where bit ``i``
of the string is bit ``i`` of the integer ``value``. Packed into bytes, bit
``i`` lands in bit ``i % 8`` (least significant first) of byte ``i // 8``,
which is exactly ``value.to_bytes(nbytes, "little")``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from qkdauth._backend import kernels
from qkdauth.errors import DimensionError


@dataclass(frozen=True, slots=True)
class BitString:
    length: int
    value: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise DimensionError(f"negative bit length {self.length}")
        if self.value < 0 or self.value >> self.length:
            raise DimensionError(f"value does not fit in {self.length} bits")

    @classmethod
    def _trusted(cls, length: int, value: int) -> BitString:
        # skips validation; only for results that fit by construction
        obj = object.__new__(cls)
        object.__setattr__(obj, "length", length)
        object.__setattr__(obj, "value", value)
        return obj

    # -- construction -------------------------------------------------------

    @classmethod
    def zeros(cls, length: int) -> BitString:
        return cls(length, 0)

    @classmethod
    def from_bits(cls, bits: str) -> BitString:
        """Parse a string of ``0``/``1`` characters, bit 0 first.

        >>> BitString.from_bits("110").value
        3
        """
        bits = bits.replace(" ", "").replace("_", "")
        if set(bits) - {"0", "1"}:
            raise ValueError(f"not a bit string: {bits!r}")
        return cls(len(bits), int(bits[::-1], 2) if bits else 0)

    @classmethod
    def from_bytes(cls, data: bytes, length: int | None = None) -> BitString:
        """Unpack ``data``; ``length`` may trim to fewer than ``8*len(data)`` bits."""
        full = 8 * len(data)
        if length is None:
            length = full
        if length > full:
            raise DimensionError(f"{length} bits requested from {len(data)} bytes")
        return cls._trusted(length, int.from_bytes(data, "little") & ((1 << length) - 1))

    @classmethod
    def from_hex(cls, text: str, length: int | None = None) -> BitString:
        return cls.from_bytes(bytes.fromhex(text), length)

    @classmethod
    def random(cls, length: int, rng: random.Random) -> BitString:
        return cls._trusted(length, rng.getrandbits(length) if length else 0)

    # -- views --------------------------------------------------------------

    def __len__(self) -> int:
        return self.length

    def __getitem__(self, i: int) -> int:
        if not -self.length <= i < self.length:
            raise IndexError(i)
        return (self.value >> (i % self.length)) & 1

    def to_bits(self) -> str:
        return "".join(str((self.value >> i) & 1) for i in range(self.length))

    def to_bytes(self) -> bytes:
        return self.value.to_bytes((self.length + 7) // 8, "little")

    def to_hex(self) -> str:
        return self.to_bytes().hex()

    def __repr__(self) -> str:
        if self.length <= 64:
            return f"BitString({self.to_bits()!r})"
        return f"BitString(length={self.length}, hex={self.to_hex()[:16]}...)"

    # -- algebra ------------------------------------------------------------

    def __xor__(self, other: BitString) -> BitString:
        return xor(self, other)

    def __add__(self, other: BitString) -> BitString:
        """Concatenation: ``self`` occupies the low-order bits."""
        return BitString._trusted(self.length + other.length, self.value | (other.value << self.length))

    def slice(self, start: int, stop: int) -> BitString:
        if not 0 <= start <= stop <= self.length:
            raise DimensionError(f"slice [{start}, {stop}) outside {self.length} bits")
        return BitString._trusted(stop - start, (self.value >> start) & ((1 << (stop - start)) - 1))

    def low(self, count: int) -> BitString:
        return self.slice(0, count)

    def zero_pad(self, length: int) -> BitString:
        if length < self.length:
            raise DimensionError(f"cannot pad {self.length} bits down to {length}")
        return BitString(length, self.value)

    def popcount(self) -> int:
        return self.value.bit_count()


@dataclass(frozen=True)
class ToeplitzDiagonals:
    """Diagonal parameters of an ``n x r`` Toeplitz matrix over GF(2).

    The matrix is ``Phi[i][j] = t[i - j + r - 1]``.
    """

    r: int
    n: int
    t: BitString

    def __post_init__(self):
        if self.r < 1 or self.n < 1:
            raise DimensionError(f"Toeplitz dimensions must be positive, got r={self.r}, n={self.n}")
        if len(self.t) != self.r + self.n - 1:
            raise DimensionError(f"expected {self.r + self.n - 1} diagonal bits, got {len(self.t)}")

    def entry(self, i: int, j: int) -> int:
        return self.t[i - j + self.r - 1]


def xor(a: BitString, b: BitString) -> BitString:
    if a.length != b.length:
        raise DimensionError(f"xor of {a.length}-bit and {b.length}-bit strings")
    return BitString._trusted(a.length, a.value ^ b.value)


def toeplitz_mul(d: ToeplitzDiagonals, z: BitString) -> BitString:
    """Return ``Phi @ z`` over GF(2) as an ``n``-bit string."""
    if len(z) != d.r:
        raise DimensionError(f"vector has {len(z)} bits, matrix expects {d.r}")
    return BitString._trusted(d.n, kernels.toeplitz_mul(d.t.value, z.value, d.r, d.n))


def toeplitz_mul_blocks(d: ToeplitzDiagonals, data: BitString) -> BitString:
    """Apply the same matrix to every ``r``-bit block of ``data``.

    ``len(data)`` must be a multiple of ``r``; the outputs are concatenated
    in block order.
    """
    nblocks, rem = divmod(len(data), d.r)
    if rem:
        raise DimensionError(f"{len(data)} bits is not a multiple of the block width {d.r}")
    value = kernels.toeplitz_mul_blocks(d.t.value, data.value, nblocks, d.r, d.n)
    return BitString._trusted(nblocks * d.n, value)
