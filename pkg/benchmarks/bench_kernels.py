"""Compare the compiled and pure-Python Toeplitz kernels.

    python3 benchmarks/bench_kernels.py [--repeat N]

Every case is checked for identical output across backends before timing.
"""

from __future__ import annotations

import argparse
import random
import timeit

from qkdauth import _backend, bitcore
from qkdauth.bitcore import BitString
from qkdauth.keypool import KeyPool
from qkdauth.twostep import TwoStepParams, key_cost, twostep_tag
from qkdauth.wcauth import wc_params, wc_tag


def cases(rng: random.Random):
    for r, n in ((256, 64), (1024, 128), (4096, 64)):
        t = rng.getrandbits(r + n - 1)
        z = rng.getrandbits(r)
        yield f"toeplitz_mul r={r} n={n}", lambda k, t=t, z=z, r=r, n=n: k.toeplitz_mul(t, z, r, n)
    for r, n, blocks in ((140, 70, 64), (166, 83, 512)):
        t = rng.getrandbits(r + n - 1)
        data = rng.getrandbits(r * blocks)
        yield (
            f"toeplitz_mul_blocks r={r} n={n} x{blocks}",
            lambda k, t=t, d=data, r=r, n=n, b=blocks: k.toeplitz_mul_blocks(t, d, b, r, n),
        )
    for m in (4096, 65536):
        msg = BitString.random(m, rng)
        key = BitString.random(wc_params(m, 64).key_bits_actual, rng)
        yield f"wc_tag m={m} n=64", lambda k, msg=msg, key=key: wc_tag(msg, KeyPool(key), 64)
    params = TwoStepParams(256, 64, "linear-fold")
    msg = BitString.random(65536, rng)
    key = BitString.random(key_cost(params), rng)
    yield "twostep_tag m=65536 linear-fold", lambda k: twostep_tag(msg, KeyPool(key), params)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = _backend.available()
    names = sorted(backends, reverse=True)  # python first
    print(f"{'case':<42}" + "".join(f"{name:>14}" for name in names) + ("   speedup" if len(names) > 1 else ""))
    for label, fn in cases(random.Random(1)):
        timings, outputs = {}, []
        for name in names:
            bitcore.kernels = backends[name]
            k = backends[name]
            outputs.append(fn(k))
            timer = timeit.Timer(lambda: fn(k))
            number, _ = timer.autorange()
            timings[name] = min(timer.repeat(args.repeat, number)) / number
        if any(out != outputs[0] for out in outputs):
            raise SystemExit(f"backends disagree on {label}")
        row = f"{label:<42}" + "".join(f"{timings[name] * 1e6:>11.1f} us" for name in names)
        if len(names) > 1:
            row += f"   {timings['python'] / timings['cython']:>6.1f}x"
        print(row)
    bitcore.kernels = _backend.kernels


if __name__ == "__main__":
    main()
