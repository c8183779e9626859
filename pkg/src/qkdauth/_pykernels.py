"""Pure-Python GF(2) Toeplitz kernels.

Bit strings are Python ints, bit ``i`` of the string being bit ``i`` of the
integer. The Toeplitz matrix with diagonal parameters ``t`` (``r + n - 1``
bits) has entries ``Phi[i][j] = t[i - j + r - 1]``, so column ``j`` is the
``n``-bit window of ``t`` starting at bit ``r - 1 - j``.
"""

NAME = "python"


def toeplitz_mul(t, z, r, n):
    """Return the ``n``-bit product ``Phi @ z`` over GF(2)."""
    acc = 0
    shift = r - 1
    while z:
        low = z & -z
        acc ^= t >> (shift - low.bit_length() + 1)
        z ^= low
    return acc & ((1 << n) - 1)


def toeplitz_mul_blocks(t, data, nblocks, r, n):
    """Multiply each consecutive ``r``-bit block of ``data`` by the same matrix.

    Output block ``k`` occupies bits ``[k*n, (k+1)*n)`` of the result.
    """
    in_mask = (1 << r) - 1
    out = 0
    for k in range(nblocks):
        z = (data >> (k * r)) & in_mask
        if z:
            out |= toeplitz_mul(t, z, r, n) << (k * n)
    return out
