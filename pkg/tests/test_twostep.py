import hashlib
from fractions import Fraction

import pytest

from qkdauth.bitcore import BitString
from qkdauth.errors import DimensionError, KeyExhaustedError, PoolDesyncError
from qkdauth.hashfam import ToeplitzAffineKey, eval_affine
from qkdauth.keypool import KeyPool
from qkdauth.oracle import dense_twostep_tag
from qkdauth.twostep import (
    TwoStepParams,
    f0_linear_fold,
    f0_sha,
    key_cost,
    keystream,
    randomize,
    security_bound,
    twostep_tag,
    twostep_verify,
)

from conftest import bits, pool_from_seed

# pinned with hashlib over hand-built byte strings
SHA_EMPTY = "af5570f5a1810b7af78caf4bc70a660f0df51e42baf91d4de5b2328de0e83dfc"
SHA_BIT_1 = "f52f3a746c2545658e1c6add32e5410365553ebaaa0433f5f8bd90c6f85fd6e2"
SHA_BITS_10 = "9f85fc3e37e6c331b872a92844a8199d4467e717b46210e66dee85d49977aa89"
SHA_EMPTY_EXPAND_300 = (
    "15ec7bf0b50732b49f8228e07d24365338f9e3ab994b00af08e5a3bffe55fd8b3423cfe2ed08"
)
KEYSTREAM_SEED_1 = "71faa70e1da00be5a10e651cdb1921c5"


class TestF0Sha:
    def test_empty_message_full_digest(self):
        assert f0_sha(BitString(0), 256).to_hex() == SHA_EMPTY
        assert hashlib.sha256(bytes(8)).hexdigest() == SHA_EMPTY

    def test_truncation_consistency(self):
        full = f0_sha(BitString(0), 256)
        assert f0_sha(BitString(0), 8).to_bytes() == full.to_bytes()[:1]
        assert f0_sha(BitString(0), 13) == full.low(13)

    def test_zero_extension_changes_digest(self):
        a, b = f0_sha(bits("1"), 256), f0_sha(bits("10"), 256)
        assert a.to_hex() == SHA_BIT_1
        assert b.to_hex() == SHA_BITS_10
        assert a != b

    def test_expansion(self):
        z = f0_sha(BitString(0), 300)
        assert len(z) == 300
        assert z.to_hex() == SHA_EMPTY_EXPAND_300

    def test_bad_width(self):
        with pytest.raises(DimensionError):
            f0_sha(bits("1"), 0)
        with pytest.raises(DimensionError):
            f0_sha(bits("1"), 300, expand=False)


class TestLinearFold:
    def test_single_block(self, rng):
        l = BitString.random(9, rng)
        assert f0_linear_fold(l, 9) == l

    def test_two_identical_blocks(self, rng):
        b = BitString.random(7, rng)
        assert f0_linear_fold(b + b, 7) == BitString.zeros(7)

    def test_truth_table(self):
        assert f0_linear_fold(bits("1011"), 2) == bits("01")

    def test_padding(self):
        # blocks 10, 11 and the padded 00
        assert f0_linear_fold(bits("10110"), 2) == bits("01")

    def test_is_homomorphism(self, rng):
        for _ in range(100):
            a, b = BitString.random(50, rng), BitString.random(50, rng)
            assert f0_linear_fold(a ^ b, 8) == f0_linear_fold(a, 8) ^ f0_linear_fold(b, 8)


class TestRandomize:
    def test_involution(self, rng):
        l, seed = BitString.random(1000, rng), BitString.random(128, rng)
        assert randomize(randomize(l, seed), seed) == l

    def test_zero_message_is_keystream(self, rng):
        seed = BitString.random(128, rng)
        assert randomize(BitString.zeros(700), seed) == keystream(seed, 700)

    def test_golden_keystream(self):
        seed = BitString.from_hex("00" * 15 + "01", 128)
        assert randomize(BitString.zeros(128), seed).to_hex() == KEYSTREAM_SEED_1


class TestTag:
    def test_derived_composition(self, backend):
        params = TwoStepParams(3, 2, "linear-fold")
        pool = KeyPool.from_bits("101101")
        assert twostep_tag(bits("110"), pool, params) == bits("11")
        assert pool.cursor == 6

    def test_zero_key(self, backend, rng):
        params = TwoStepParams(16, 8)
        pool = KeyPool(BitString.zeros(key_cost(params)))
        assert twostep_tag(BitString.random(500, rng), pool, params) == BitString.zeros(8)

    def test_fresh_key_per_tag(self, backend, rng):
        params = TwoStepParams(32, 16)
        pool = pool_from_seed(2 * key_cost(params), 11)
        l = BitString.random(400, rng)
        t1, t2 = twostep_tag(l, pool, params), twostep_tag(l, pool, params)
        assert pool.remaining == 0
        assert [e.offset for e in pool.ledger] == [0, key_cost(params)]
        assert t1 != t2  # holds for this seed; tags are independent in general

    def test_exhaustion_leaves_pool_untouched(self, backend, rng):
        params = TwoStepParams(64, 16, randomize=True, seed_bits=32)
        pool = pool_from_seed(key_cost(params) - 1, 2)
        with pytest.raises(KeyExhaustedError):
            twostep_tag(BitString.random(300, rng), pool, params)
        assert pool.cursor == 0 and pool.ledger == []

    @pytest.mark.parametrize("kind", ["sha-truncate", "sha-expand", "linear-fold"])
    @pytest.mark.parametrize("rand", [False, True])
    def test_composition_identity(self, backend, rng, kind, rand):
        params = TwoStepParams(40, 12, kind, rand, seed_bits=64)
        for _ in range(20):
            l = BitString.random(rng.randint(1, 600), rng)
            pool = pool_from_seed(key_cost(params), rng.getrandbits(32))
            raw = pool.bits
            tag = twostep_tag(l, pool, params)
            if rand:
                l = randomize(l, raw.low(64))
                raw = raw.slice(64, len(raw))
            z = f0_linear_fold(l, 40) if kind == "linear-fold" else f0_sha(l, 40, expand=kind == "sha-expand")
            assert tag == eval_affine(ToeplitzAffineKey.from_bits(raw, 40, 12), z)

    def test_matches_dense_oracle(self, backend, rng):
        params = TwoStepParams(24, 6, "linear-fold", True, seed_bits=16)
        for _ in range(50):
            l = BitString.random(rng.randint(1, 200), rng)
            pool = pool_from_seed(key_cost(params), rng.getrandbits(32))
            key = [pool.bits[i] for i in range(len(pool.bits))]
            want = dense_twostep_tag([l[i] for i in range(len(l))], key, 24, 6, "linear-fold", 16)
            assert twostep_tag(l, pool, params).to_bits() == "".join(map(str, want))


class TestVerify:
    def test_roundtrip(self, backend, rng):
        params = TwoStepParams(256, 64)
        a, b = pool_from_seed(1000, 1), pool_from_seed(1000, 1)
        l = BitString.random(2048, rng)
        tag = twostep_tag(l, a, params)
        assert twostep_verify(l, tag, b, params, expected_offset=0)
        assert a.same_state(b)

    def test_flipped_tag_bit(self, backend, rng):
        params = TwoStepParams(256, 64)
        a, b = pool_from_seed(1000, 1), pool_from_seed(1000, 1)
        l = BitString.random(2048, rng)
        tag = twostep_tag(l, a, params)
        for i in (0, 17, 63):
            b2 = b.copy()
            assert not twostep_verify(l, BitString(64, tag.value ^ (1 << i)), b2, params)
            assert b2.cursor == a.cursor

    def test_single_bit_flip_exhaustive_linear_fold(self, backend):
        # fold is injective on single-bit flips, so only the affine step can collide
        params = TwoStepParams(3, 2, "linear-fold")
        l = bits("110101")
        for flip in range(6):
            forged = BitString(6, l.value ^ (1 << flip))
            hits = sum(
                twostep_tag(l, KeyPool(BitString(6, kv)), params)
                == twostep_tag(forged, KeyPool(BitString(6, kv)), params)
                for kv in range(64)
            )
            assert Fraction(hits, 64) == Fraction(1, 4)

    def test_desync(self, backend):
        params = TwoStepParams(8, 4)
        pool = pool_from_seed(100, 1)
        pool.draw(1)
        with pytest.raises(PoolDesyncError):
            twostep_verify(bits("1"), bits("0000"), pool, params, expected_offset=0)


class TestCosts:
    def test_key_cost_examples(self):
        assert key_cost(TwoStepParams(256, 64)) == 383
        assert key_cost(TwoStepParams(256, 64, randomize=True, seed_bits=128)) == 511

    def test_cost_independent_of_message_length(self, backend, rng):
        params = TwoStepParams(256, 64)
        for m in (10**3, 10**6):
            pool = pool_from_seed(383, 3)
            twostep_tag(BitString.random(m, rng), pool, params)
            assert pool.cursor == 383

    def test_security_bound(self):
        b = security_bound(256, 64)
        assert b.p_total == Fraction(1, 2**64) + Fraction(1, 2**256)
        assert security_bound(2, 2).p_total == Fraction(1, 2)
        assert security_bound(16, 8).p_total < Fraction(2, 2**8)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            TwoStepParams(8, 4, "md5")
        with pytest.raises(DimensionError):
            TwoStepParams(512, 4, "sha-truncate")
        assert TwoStepParams(512, 4, "sha-expand").degenerate_for(100)
