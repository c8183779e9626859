# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Word-sliced GF(2) Toeplitz kernels.

Same contract as ``qkdauth._pykernels``; operands are Python ints and are
unpacked into little-endian 64-bit word buffers for the inner loops.
"""

from libc.stdint cimport uint64_t
from libc.stdlib cimport calloc, free
from libc.string cimport memcpy

cdef extern from *:
    int __builtin_ctzll(unsigned long long x) nogil

NAME = "cython"


cdef uint64_t* _unpack(object value, Py_ssize_t nbits, Py_ssize_t pad, Py_ssize_t* nwords_out) except NULL:
    cdef Py_ssize_t nbytes = (nbits + 7) // 8
    cdef Py_ssize_t nwords = (nbytes + 7) // 8 + pad
    cdef uint64_t* buf = <uint64_t*> calloc(nwords if nwords > 0 else 1, sizeof(uint64_t))
    if buf == NULL:
        raise MemoryError()
    cdef bytes raw
    if nbytes:
        raw = value.to_bytes(nbytes, "little")
        memcpy(buf, <const char*> raw, nbytes)
    nwords_out[0] = nwords
    return buf


cdef inline uint64_t _window(const uint64_t* w, Py_ssize_t offset) noexcept nogil:
    # 64 bits of w starting at bit offset; caller guarantees one spare word.
    cdef Py_ssize_t q = offset >> 6
    cdef int b = offset & 63
    if b == 0:
        return w[q]
    return (w[q] >> b) | (w[q + 1] << (64 - b))


cdef inline void _accumulate(const uint64_t* tw, Py_ssize_t offset, uint64_t* acc, Py_ssize_t nw) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(nw):
        acc[k] ^= _window(tw, offset + 64 * k)


cdef object _pack(uint64_t* words, Py_ssize_t nwords, Py_ssize_t nbits):
    cdef Py_ssize_t nbytes = (nbits + 7) // 8
    cdef uint64_t keep
    cdef Py_ssize_t last = nbits >> 6
    if nbits & 63:
        keep = (<uint64_t> 1 << (nbits & 63)) - 1
        words[last] &= keep
        last += 1
    cdef Py_ssize_t i
    for i in range(last, nwords):
        words[i] = 0
    return int.from_bytes((<char*> words)[:nbytes], "little")


def toeplitz_mul(object t, object z, Py_ssize_t r, Py_ssize_t n):
    """Return the ``n``-bit product ``Phi @ z`` over GF(2)."""
    cdef Py_ssize_t tn, zn, i, j
    cdef Py_ssize_t nw = (n + 63) // 64
    cdef uint64_t* tw = NULL
    cdef uint64_t* zw = NULL
    cdef uint64_t* acc = NULL
    cdef uint64_t word
    try:
        # spare words cover the widest window read past the top of t
        tw = _unpack(t, r + n - 1, nw + 1, &tn)
        zw = _unpack(z, r, 0, &zn)
        acc = <uint64_t*> calloc(nw + 1, sizeof(uint64_t))
        if acc == NULL:
            raise MemoryError()
        with nogil:
            for i in range(zn):
                word = zw[i]
                while word:
                    j = 64 * i + __builtin_ctzll(word)
                    word &= word - 1
                    _accumulate(tw, r - 1 - j, acc, nw)
        return _pack(acc, nw + 1, n)
    finally:
        free(tw)
        free(zw)
        free(acc)


def toeplitz_mul_blocks(object t, object data, Py_ssize_t nblocks, Py_ssize_t r, Py_ssize_t n):
    """Multiply each consecutive ``r``-bit block of ``data`` by the same matrix.

    Output block ``k`` occupies bits ``[k*n, (k+1)*n)`` of the result.
    """
    cdef Py_ssize_t tn, dn, i, p, k, cur, pos, nout
    cdef Py_ssize_t nw = (n + 63) // 64
    cdef Py_ssize_t total = nblocks * r
    cdef uint64_t* tw = NULL
    cdef uint64_t* dw = NULL
    cdef uint64_t* acc = NULL
    cdef uint64_t* out = NULL
    cdef uint64_t word
    if nblocks <= 0:
        return 0
    nout = (nblocks * n + 63) // 64 + 2
    try:
        tw = _unpack(t, r + n - 1, nw + 1, &tn)
        dw = _unpack(data & (((<object> 1) << total) - 1), total, 0, &dn)
        acc = <uint64_t*> calloc(nw + 1, sizeof(uint64_t))
        out = <uint64_t*> calloc(nout, sizeof(uint64_t))
        if acc == NULL or out == NULL:
            raise MemoryError()
        with nogil:
            cur = -1
            for i in range(dn):
                word = dw[i]
                while word:
                    p = 64 * i + __builtin_ctzll(word)
                    word &= word - 1
                    k = p // r
                    if k != cur:
                        if cur >= 0:
                            _place(out, acc, nw, n, cur * n)
                        cur = k
                    _accumulate(tw, r - 1 - (p - k * r), acc, nw)
            if cur >= 0:
                _place(out, acc, nw, n, cur * n)
        return _pack(out, nout, nblocks * n)
    finally:
        free(tw)
        free(dw)
        free(acc)
        free(out)


cdef inline void _place(uint64_t* out, uint64_t* acc, Py_ssize_t nw, Py_ssize_t n, Py_ssize_t base) noexcept nogil:
    # OR the n-bit accumulator into out at bit offset base, then clear it.
    cdef Py_ssize_t k, pos
    cdef int b
    cdef uint64_t w
    for k in range(nw):
        w = acc[k]
        acc[k] = 0
        if 64 * (k + 1) > n:
            w &= ((<uint64_t> 1 << (n - 64 * k)) - 1) if n - 64 * k < 64 else <uint64_t> 0xFFFFFFFFFFFFFFFF
        pos = base + 64 * k
        b = pos & 63
        out[pos >> 6] |= w << b
        if b:
            out[(pos >> 6) + 1] |= w >> (64 - b)
