"""Brute-force verifiers for the hash family and the forgery bounds.

Nothing here calls into :mod:`qkdauth.bitcore`, :mod:`qkdauth.hashfam` or the
tagging modules: matrices are materialized entry by entry from their
diagonal bits and products are plain dense GF(2) arithmetic in numpy. Bits
are handled as ``0``/``1`` integer sequences, bit 0 first.

All probabilities are returned as exact :class:`fractions.Fraction` values.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

SU2_BUDGET = 14  # max r + 2n for check_su2
BRUTE_FORCE_CELLS = 1 << 26  # keys * z * z' above which check_su2 reduces by z ^ z'


@dataclass
class CheckResult:
    check: str
    params: dict
    value: Fraction
    bound: Fraction
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "check": self.check,
            "params": self.params,
            "value": float(self.value),
            "value_exact": str(self.value),
            "bound": float(self.bound),
            "bound_exact": str(self.bound),
            "pass": self.passed,
            **({"detail": self.detail} if self.detail else {}),
        }


class BudgetError(ValueError):
    """Requested enumeration exceeds the configured budget."""


# -- dense reference constructions -----------------------------------------


def dense_toeplitz(t: Sequence[int], r: int, n: int) -> np.ndarray:
    """Build the ``n x r`` matrix with ``M[i][j] = t[i - j + r - 1]``."""
    if len(t) != r + n - 1:
        raise ValueError(f"need {r + n - 1} diagonal bits, got {len(t)}")
    m = np.zeros((n, r), dtype=np.uint8)
    for i in range(n):
        for j in range(r):
            m[i, j] = t[i - j + r - 1]
    return m


def dense_matvec(m: np.ndarray, z: Sequence[int]) -> list[int]:
    rows, cols = m.shape
    if len(z) != cols:
        raise ValueError(f"vector has {len(z)} entries, matrix has {cols} columns")
    out = []
    for i in range(rows):
        acc = 0
        for j in range(cols):
            acc ^= int(m[i, j]) & int(z[j])
        out.append(acc)
    return out


def dense_affine(key: Sequence[int], r: int, n: int, z: Sequence[int]) -> list[int]:
    """Evaluate the Toeplitz-affine map indexed by ``key`` (diagonals, then offset)."""
    key = list(key)
    split = r + n - 1
    phi = dense_toeplitz(key[:split], r, n)
    beta = key[split:split + n]
    return [a ^ b for a, b in zip(dense_matvec(phi, z), beta)]


def _ceil_log2(x: int) -> int:
    return (x - 1).bit_length()


def dense_wc_tag(message: Sequence[int], key: Sequence[int], n: int) -> tuple[list[int], int]:
    """Straight-line tree tag. Returns the tag bits and the number of key bits used."""
    m = len(message)
    s = n + _ceil_log2(_ceil_log2(m))
    w = 2 * s
    klen = 4 * s - 1
    key = list(key)
    cur = list(message)
    pos = 0
    while True:
        if pos + klen > len(key):
            raise ValueError("key material exhausted")
        level_key = key[pos:pos + klen]
        pos += klen
        while len(cur) % w:
            cur.append(0)
        nxt: list[int] = []
        for b in range(0, len(cur), w):
            nxt.extend(dense_affine(level_key, w, s, cur[b:b + w]))
        cur = nxt
        if len(cur) == s:
            return cur[:n], pos


def dense_fold(message: Sequence[int], r: int) -> list[int]:
    out = [0] * r
    for i, bit in enumerate(message):
        out[i % r] ^= int(bit)
    return out


def _pack_le(bits: Sequence[int]) -> bytes:
    if not len(bits):
        return b""
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def _unpack_le(data: bytes, count: int) -> list[int]:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")[:count].tolist()


def dense_sha_f0(message: Sequence[int], r: int, expand: bool = False) -> list[int]:
    prefix = _pack_le(message) + len(message).to_bytes(8, "big")
    if not expand:
        return _unpack_le(hashlib.sha256(prefix).digest(), r)
    blocks = b"".join(
        hashlib.sha256(prefix + i.to_bytes(4, "big")).digest() for i in range(-(-r // 256))
    )
    return _unpack_le(blocks, r)


def dense_keystream(seed: Sequence[int], length: int) -> list[int]:
    prefix = _pack_le(seed)
    blocks = b"".join(
        hashlib.sha256(prefix + j.to_bytes(8, "big")).digest() for j in range(-(-length // 256))
    )
    return _unpack_le(blocks, length)


def dense_twostep_tag(
    message: Sequence[int],
    key: Sequence[int],
    r: int,
    n: int,
    f0: str = "linear-fold",
    seed_bits: int = 0,
) -> list[int]:
    """Two-step tag; ``key`` holds the optional randomizer seed, then the affine key."""
    key = list(key)
    msg = list(message)
    if seed_bits:
        stream = dense_keystream(key[:seed_bits], len(msg))
        msg = [a ^ b for a, b in zip(msg, stream)]
        key = key[seed_bits:]
    if f0 == "linear-fold":
        z = dense_fold(msg, r)
    elif f0 == "sha-truncate":
        z = dense_sha_f0(msg, r, expand=r > 256)
    elif f0 == "sha-expand":
        z = dense_sha_f0(msg, r, expand=True)
    else:
        raise ValueError(f"unknown f0 {f0!r}")
    return dense_affine(key[:r + 2 * n - 1], r, n, z)


# -- exhaustive tables -----------------------------------------------------


def _int_bits(count: int, width: int) -> np.ndarray:
    """Rows are the little-endian bit vectors of 0 .. count-1."""
    vals = np.arange(count, dtype=np.int64)
    return ((vals[:, None] >> np.arange(width)) & 1).astype(np.uint8)


def linear_table(r: int, n: int) -> np.ndarray:
    """``L[t, z]`` = integer value of ``Phi_t z`` for every diagonal vector ``t``."""
    tw = r + n - 1
    tbits = _int_bits(1 << tw, tw)
    idx = np.arange(n)[:, None] - np.arange(r)[None, :] + r - 1
    phi = tbits[:, idx].astype(np.float32)  # (T, n, r)
    zb = _int_bits(1 << r, r).T.astype(np.float32)  # (r, Z)
    weights = (1 << np.arange(n)).astype(np.int64)
    out = np.empty((1 << tw, 1 << r), dtype=np.int64)
    step = max(1, (1 << 22) // max(1, n << r))
    for lo in range(0, 1 << tw, step):
        prod = np.matmul(phi[lo:lo + step], zb).astype(np.int64) & 1  # (chunk, n, Z)
        out[lo:lo + step] = np.einsum("cnz,n->cz", prod, weights)
    return out


def affine_table(r: int, n: int) -> np.ndarray:
    """``F[key, z]`` for every key; key index = t + beta * 2^(r+n-1)."""
    lin = linear_table(r, n)
    betas = np.arange(1 << n, dtype=np.int64)
    return (betas[:, None, None] ^ lin[None, :, :]).reshape(-1, 1 << r)


# -- checks ----------------------------------------------------------------


def _su2_brute(table: np.ndarray, n: int) -> tuple[int, int]:
    """Max |count * 4^n - K| over all z != z' and tag pairs, plus pairs checked."""
    keys, zs = table.shape
    q = 1 << (2 * n)
    worst = 0
    pairs = 0
    for z in range(zs):
        others = np.delete(np.arange(zs), z)
        codes = (table[:, z][:, None] << n) | table[:, others]
        codes = codes + (np.arange(len(others)) * q)[None, :]
        counts = np.bincount(codes.ravel(), minlength=len(others) * q)
        worst = max(worst, int(np.abs(counts * q - keys).max()))
        pairs += len(others)
    return worst, pairs


def _su2_by_difference(lin: np.ndarray, n: int) -> tuple[int, int]:
    # With beta uniform and independent of Phi, #{key: f(z)=a, f(z')=b}
    # equals #{t: Phi_t (z ^ z') = a ^ b}; enumerate every difference.
    tcount, zs = lin.shape
    q = 1 << n
    keys = tcount * q
    sub = lin[:, 1:] + (np.arange(zs - 1) * q)[None, :]
    counts = np.bincount(sub.ravel(), minlength=(zs - 1) * q)
    worst = int(np.abs(counts * (q * q) - keys).max())
    return worst, zs - 1


def check_su2(r: int, n: int, method: str = "auto") -> CheckResult:
    """Exact strong-universality deviation of the Toeplitz-affine family.

    ``method`` is ``"brute"`` (every key, ordered pair and tag pair),
    ``"difference"`` (every key and nonzero input difference), or ``"auto"``
    (brute force when within :data:`BRUTE_FORCE_CELLS`).
    """
    if r < 1 or n < 1:
        raise ValueError("r and n must be positive")
    if r + 2 * n > SU2_BUDGET:
        raise BudgetError(f"r + 2n = {r + 2 * n} exceeds the enumeration budget {SU2_BUDGET}")
    keys = 1 << (r + 2 * n - 1)
    if method == "auto":
        method = "brute" if keys << (2 * r) <= BRUTE_FORCE_CELLS else "difference"
    if method == "brute":
        worst, pairs = _su2_brute(affine_table(r, n), n)
    elif method == "difference":
        worst, pairs = _su2_by_difference(linear_table(r, n), n)
    else:
        raise ValueError(f"unknown method {method!r}")
    deviation = Fraction(worst, keys << (2 * n))
    return CheckResult(
        check="su2",
        params={"r": r, "n": n},
        value=deviation,
        bound=Fraction(0),
        passed=deviation == 0,
        detail={"method": method, "keys": keys, "input_classes": pairs},
    )


def su2_deviation_of_table(table: np.ndarray, n: int) -> Fraction:
    """Brute-force deviation of an arbitrary keyed family given as ``F[key, z]``."""
    worst, _ = _su2_brute(np.asarray(table, dtype=np.int64), n)
    return Fraction(worst, table.shape[0] << (2 * n))


def _fold_all(m: int, r: int) -> np.ndarray:
    msgs = np.arange(1 << m, dtype=np.int64)
    mask = (1 << r) - 1
    z = np.zeros_like(msgs)
    for k in range(0, m, r):
        z ^= (msgs >> k) & mask
    return z


def check_p1(r: int, m: int, f0: Callable[[np.ndarray], np.ndarray] | None = None) -> CheckResult:
    """Exact compression-collision probability over uniformly drawn messages.

    ``f0`` maps an array of message integers to ``r``-bit integers and
    defaults to the linear fold.
    """
    if m > 16 or r > 8:
        raise BudgetError(f"m={m}, r={r} exceeds the enumeration budget (m <= 16, r <= 8)")
    if r < 1 or m < r or m % r:
        raise ValueError(f"m={m} must be a positive multiple of r={r}")
    msgs = np.arange(1 << m, dtype=np.int64)
    z = _fold_all(m, r) if f0 is None else np.asarray(f0(msgs), dtype=np.int64)
    counts = np.bincount(z, minlength=1 << r)
    uniform = bool((counts == counts[0]).all())
    p1 = Fraction(int(counts.max()) - 1, 1 << m)
    bound = Fraction(1, 1 << r)
    expected = Fraction((1 << (m - r)) - 1, 1 << m)
    detail = {"uniform_preimages": uniform, "max_preimage": int(counts.max())}
    if uniform:
        detail["closed_form"] = str(expected)
    return CheckResult(
        check="p1",
        params={"m": m, "r": r},
        value=p1,
        bound=bound,
        passed=uniform and p1 == expected and p1 < bound,
        detail=detail,
    )


def forgery_exhaustive(m: int, r: int, n: int) -> CheckResult:
    """Average best-forgery success against linear-fold two-step tags.

    For every ordered pair of distinct messages ``(l, l')`` the adversary
    sees ``t = f(f0(l))`` and answers the most likely ``t'`` for ``l'``.
    Pairs are weighted uniformly, keys are uniform.
    """
    if m > 8 or r > 4 or n > 2:
        raise BudgetError(f"(m, r, n) = ({m}, {r}, {n}) exceeds (8, 4, 2)")
    if min(m, r, n) < 1:
        raise ValueError("dimensions must be positive")
    table = affine_table(r, n)  # (K, 2^r)
    g = table[:, _fold_all(m, r)]  # (K, 2^m)
    keys, msgs = g.shape
    q = 1 << n
    li, lj = np.nonzero(~np.eye(msgs, dtype=bool))
    codes = (g[:, li] << n) | g[:, lj]
    codes = codes + (np.arange(len(li)) * q * q)[None, :]
    counts = np.bincount(codes.ravel(), minlength=len(li) * q * q).reshape(len(li), q, q)
    best = counts.max(axis=2).sum(axis=1)  # per pair, in units of 1/K
    value = Fraction(int(best.sum()), keys * len(li))
    folded = _fold_all(m, r)
    collide = folded[li] == folded[lj]
    distinct = best[~collide]
    bound = Fraction(1, q) + Fraction(1, 1 << r)
    return CheckResult(
        check="forgery",
        params={"m": m, "r": r, "n": n},
        value=value,
        bound=bound,
        passed=value <= bound,
        detail={
            "collision_probability": str(Fraction(int(collide.sum()), len(li))),
            "worst_noncolliding": str(Fraction(int(distinct.max()), keys)) if len(distinct) else "0",
        },
    )
