import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from qkdauth.bitcore import BitString, ToeplitzDiagonals, toeplitz_mul, toeplitz_mul_blocks, xor
from qkdauth.errors import DimensionError
from qkdauth.oracle import dense_matvec, dense_toeplitz

from conftest import bits


fixture_ok = settings(suppress_health_check=[HealthCheck.function_scoped_fixture])


@st.composite
def bitstrings(draw, max_len=64):
    n = draw(st.integers(0, max_len))
    return BitString(n, draw(st.integers(0, (1 << n) - 1)))


class TestBitString:
    def test_layout_is_lsb_first(self):
        b = bits("101101")
        assert b.value == 0x2D
        assert b.to_hex() == "2d"
        assert [b[i] for i in range(6)] == [1, 0, 1, 1, 0, 1]

    def test_trailing_bits_zero_after_unpack(self):
        b = BitString.from_bytes(b"\xff", 3)
        assert b.to_bytes() == b"\x07"

    def test_value_must_fit(self):
        with pytest.raises(DimensionError):
            BitString(3, 8)

    @pytest.mark.parametrize("length", range(65))
    def test_bytes_roundtrip_all_lengths(self, length, rng):
        b = BitString.random(length, rng)
        assert BitString.from_bytes(b.to_bytes(), length) == b
        assert BitString.from_hex(b.to_hex(), length) == b
        assert len(b.to_bytes()) == (length + 7) // 8

    def test_concat_and_slice(self):
        a, b = bits("110"), bits("0101")
        ab = a + b
        assert ab.to_bits() == "1100101"
        assert ab.slice(3, 7) == b
        assert ab.low(3) == a


class TestXor:
    @pytest.mark.parametrize(
        "a, b, expected",
        [("1010", "0000", "1010"), ("1010", "1010", "0000"), ("1100", "1010", "0110")],
    )
    def test_examples(self, a, b, expected):
        assert xor(bits(a), bits(b)) == bits(expected)

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            xor(bits("10"), bits("100"))

    @given(bitstrings())
    def test_self_inverse(self, a):
        assert (a ^ a) == BitString.zeros(len(a))
        assert len(a ^ a) == len(a)


class TestToeplitz:
    def test_derived_example(self, backend):
        # rows of Phi are (1,0,1) and (1,1,0)
        d = ToeplitzDiagonals(3, 2, bits("1011"))
        assert dense_toeplitz([1, 0, 1, 1], 3, 2).tolist() == [[1, 0, 1], [1, 1, 0]]
        assert toeplitz_mul(d, bits("110")) == bits("10")

    def test_zero_matrix(self, backend, rng):
        d = ToeplitzDiagonals(7, 5, BitString.zeros(11))
        assert toeplitz_mul(d, BitString.random(7, rng)) == BitString.zeros(5)

    @pytest.mark.parametrize("r", [1, 2, 5, 64, 65, 130])
    def test_identity(self, backend, rng, r):
        t = BitString(2 * r - 1, 1 << (r - 1))
        z = BitString.random(r, rng)
        assert toeplitz_mul(ToeplitzDiagonals(r, r, t), z) == z

    def test_dimension_errors(self, backend):
        with pytest.raises(DimensionError):
            ToeplitzDiagonals(3, 2, bits("101"))
        with pytest.raises(DimensionError):
            toeplitz_mul(ToeplitzDiagonals(3, 2, bits("1011")), bits("11"))

    def test_exhaustive_against_dense(self, backend):
        # every (r, n, t, z) with r + n <= 8; larger exhaustive sweeps live in the acceptance suite
        for r in range(1, 8):
            for n in range(1, 9 - r):
                for t in range(1 << (r + n - 1)):
                    tb = BitString(r + n - 1, t)
                    d = ToeplitzDiagonals(r, n, tb)
                    m = dense_toeplitz([tb[i] for i in range(len(tb))], r, n)
                    for z in range(1 << r):
                        zb = BitString(r, z)
                        want = dense_matvec(m, [zb[i] for i in range(r)])
                        assert toeplitz_mul(d, zb).to_bits() == "".join(map(str, want))

    def test_linearity_exhaustive(self, backend, rng):
        r, n = 8, 5
        d = ToeplitzDiagonals(r, n, BitString.random(r + n - 1, rng))
        table = [toeplitz_mul(d, BitString(r, z)).value for z in range(1 << r)]
        for x in range(1 << r):
            for y in range(0, 1 << r, 7):
                assert table[x ^ y] == table[x] ^ table[y]

    @fixture_ok
    @given(st.data())
    def test_random_large_against_dense(self, backend, data):
        r = data.draw(st.integers(1, 200))
        n = data.draw(st.integers(1, 140))
        t = BitString(r + n - 1, data.draw(st.integers(0, (1 << (r + n - 1)) - 1)))
        z = BitString(r, data.draw(st.integers(0, (1 << r) - 1)))
        m = dense_toeplitz([t[i] for i in range(len(t))], r, n)
        want = "".join(map(str, dense_matvec(m, [z[i] for i in range(r)])))
        assert toeplitz_mul(ToeplitzDiagonals(r, n, t), z).to_bits() == want

    @fixture_ok
    @given(st.data())
    def test_blocks_match_single_products(self, backend, data):
        r = data.draw(st.integers(1, 150))
        n = data.draw(st.integers(1, 150))
        k = data.draw(st.integers(0, 6))
        d = ToeplitzDiagonals(r, n, BitString(r + n - 1, data.draw(st.integers(0, (1 << (r + n - 1)) - 1))))
        payload = BitString(r * k, data.draw(st.integers(0, (1 << (r * k)) - 1)))
        out = toeplitz_mul_blocks(d, payload)
        assert len(out) == k * n
        for i in range(k):
            assert out.slice(i * n, (i + 1) * n) == toeplitz_mul(d, payload.slice(i * r, (i + 1) * r))

    def test_blocks_require_whole_blocks(self, backend):
        with pytest.raises(DimensionError):
            toeplitz_mul_blocks(ToeplitzDiagonals(3, 2, bits("1011")), bits("1101"))
