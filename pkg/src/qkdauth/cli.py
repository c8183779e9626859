"""Command-line front end.

Exit codes: 0 success or accept, 1 authentication reject, 2 usage, format
or key-pool errors.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from qkdauth import oracle
from qkdauth._backend import BACKEND
from qkdauth.bitcore import BitString
from qkdauth.errors import QkdAuthError
from qkdauth.keypool import KeyPool
from qkdauth.qkdsim import ADVERSARIES, AdversaryMode, SessionConfig, run_campaign, run_session, fresh_pools
from qkdauth.twostep import F0_KINDS, TwoStepParams, key_cost, twostep_tag
from qkdauth.wcauth import wc_params, wc_tag

EXIT_OK, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


# -- keycalc ---------------------------------------------------------------


def keycalc(n: int, m: int, r: int, seed_bits: int = 0) -> dict:
    wc = wc_params(m, n)
    params = TwoStepParams(r, n, "linear-fold", randomize=seed_bits > 0, seed_bits=seed_bits or 128)
    ts = key_cost(params)
    return {
        "m": m,
        "n": n,
        "r": r,
        "seed_bits": seed_bits,
        "wc_s": wc.s,
        "wc_s_int": wc.s_int,
        "wc_levels": wc.levels,
        "wc_key_bits_formula": wc.key_bits_formula,
        "wc_key_bits_actual": wc.key_bits_actual,
        "twostep_key_bits": ts,
        "message_over_wc_formula": m / wc.key_bits_formula,
        "message_over_wc_actual": m / wc.key_bits_actual,
        "message_over_twostep": m / ts,
        "message_exceeds_wc_key": m > wc.key_bits_formula,
        "message_exceeds_twostep_key": m > ts,
    }


def cmd_keycalc(args) -> int:
    row = keycalc(args.n, args.m, args.r, args.seed_bits)
    if args.json:
        print(_dump(row))
        return EXIT_OK
    print(f"message length m           {row['m']:>12d} bits   (tag n = {row['n']}, r = {row['r']})")
    print(f"Wegman-Carter 4 s log2 m   {row['wc_key_bits_formula']:>12.1f} bits   m/k = {row['message_over_wc_formula']:.3f}")
    print(
        f"Wegman-Carter as consumed  {row['wc_key_bits_actual']:>12d} bits   "
        f"({row['wc_levels']} levels x {4 * row['wc_s_int'] - 1})"
    )
    print(f"two-step r + 2n - 1 [+seed]{row['twostep_key_bits']:>12d} bits   m/k = {row['message_over_twostep']:.3f}")
    return EXIT_OK


# -- keygen / tag / verify -------------------------------------------------


def cmd_keygen(args) -> int:
    if args.hex is not None:
        bits = BitString.from_hex(args.hex, args.length)
    else:
        if args.bits is None:
            raise ValueError("keygen needs --bits or --hex")
        bits = BitString.random(args.bits, random.Random(args.seed))
    pool = KeyPool(bits)
    pool.save(args.out)
    print(_dump({"pool": str(args.out), "bits": len(bits), "cursor": 0}))
    return EXIT_OK


def _read_message(args) -> BitString:
    data = Path(args.message_file).read_bytes()
    return BitString.from_bytes(data, args.bits)


def _tag_with(args, pool: KeyPool, message: BitString) -> BitString:
    if args.scheme == "wc":
        return wc_tag(message, pool, args.n)
    params = TwoStepParams(args.r, args.n, args.f0, args.randomize, args.seed_bits)
    return twostep_tag(message, pool, params)


def cmd_tag(args) -> int:
    pool = KeyPool.load(args.key_file)
    message = _read_message(args)
    offset = pool.cursor
    tag = _tag_with(args, pool, message)
    pool.save(args.key_file)
    print(
        _dump(
            {
                "scheme": args.scheme,
                "tag": tag.to_hex(),
                "tag_bits": len(tag),
                "message_bits": len(message),
                "key_offset": offset,
                "consumed_bits": pool.cursor - offset,
            }
        )
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    pool = KeyPool.load(args.key_file)
    message = _read_message(args)
    offset = pool.cursor
    if args.key_offset is not None and args.key_offset != offset:
        print(f"error: key pool at offset {offset}, tag was made at {args.key_offset}", file=sys.stderr)
        return EXIT_ERROR
    expected = BitString.from_hex(args.tag, args.n)
    ok = _tag_with(args, pool, message) == expected
    pool.save(args.key_file)
    print(
        _dump(
            {
                "scheme": args.scheme,
                "verdict": "accept" if ok else "reject",
                "key_offset": offset,
                "consumed_bits": pool.cursor - offset,
            }
        )
    )
    return EXIT_OK if ok else EXIT_REJECT


# -- check -----------------------------------------------------------------


def cmd_check(args) -> int:
    results = []
    for r, n in args.su2 or []:
        results.append(oracle.check_su2(r, n))
    for m, r in args.p1 or []:
        results.append(oracle.check_p1(r, m))
    for m, r, n in args.forgery or []:
        results.append(oracle.forgery_exhaustive(m, r, n))
    if not results:
        raise ValueError("nothing to check: give --su2, --p1 or --forgery")
    for res in results:
        if args.json:
            print(_dump(res.to_json()))
        else:
            status = "PASS" if res.passed else "FAIL"
            print(f"{status}  {res.check:<8} {res.params}  value={res.value}  bound={res.bound}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_REJECT


# -- simulate --------------------------------------------------------------


def _config(args) -> SessionConfig:
    return SessionConfig(
        scheme=args.scheme,
        n=args.n,
        r=args.r,
        f0_kind=args.f0,
        randomize=args.randomize,
        seed_bits=args.seed_bits,
        raw_key_len=args.raw_key_len,
        extract_lens=tuple(args.extract_lens),
        reserve_fraction=args.reserve_fraction,
        rng_seed=args.seed,
        whole_transcript=args.whole_transcript,
    )


def cmd_simulate(args) -> int:
    cfg = _config(args)
    adversary = AdversaryMode(args.adversary, args.tag_strategy)
    if args.transcript:
        alice, bob = fresh_pools(args.pool_bits or cfg.analytic_cost(), args.seed)
        log: list[dict] = []
        report = run_session(cfg, alice, bob, adversary, transcript=log)
        Path(args.transcript).write_text("".join(_dump(rec) + "\n" for rec in log))
        print(_dump({"session": report.to_json()}))
        return EXIT_OK
    stats = run_campaign(
        cfg,
        adversary,
        args.trials,
        seed=args.seed,
        chained=args.chained,
        initial_pool_bits=args.pool_bits,
        workers=args.workers,
    )
    print(_dump({"config": _config_json(cfg), "campaign": stats.to_json()}))
    return EXIT_OK


def _config_json(cfg: SessionConfig) -> dict:
    return {
        "scheme": cfg.scheme,
        "n": cfg.n,
        "r": cfg.r,
        "f0_kind": cfg.f0_kind,
        "randomize": cfg.randomize,
        "raw_key_len": cfg.raw_key_len,
        "extract_lens": list(cfg.extract_lens),
        "reserve_fraction": cfg.reserve_fraction,
        "whole_transcript": cfg.whole_transcript,
        "analytic_cost": cfg.analytic_cost(),
    }


# -- parser ----------------------------------------------------------------


def _lens(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def _scheme_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme", choices=("wc", "twostep"), default="twostep")
    p.add_argument("--n", type=int, default=64, help="tag length in bits")
    p.add_argument("--r", type=int, default=256, help="two-step intermediate width in bits")
    p.add_argument("--f0", choices=F0_KINDS, default="sha-truncate")
    p.add_argument("--randomize", action="store_true", help="whiten the message with a pool-seeded keystream")
    p.add_argument("--seed-bits", type=int, default=128)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkdauth", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qkdauth 0.1.0 ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("keycalc", help="compare secret-key budgets of the two schemes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, default=256)
    p.add_argument("--seed-bits", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_keycalc)

    p = sub.add_parser("keygen", help="write a key pool file")
    p.add_argument("--out", required=True)
    p.add_argument("--bits", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hex", help="pool contents as hex bytes instead of seeded random bits")
    p.add_argument("--length", type=int, help="bit length for --hex")
    p.set_defaults(func=cmd_keygen)

    for name, func in (("tag", cmd_tag), ("verify", cmd_verify)):
        p = sub.add_parser(name, help=f"{name} a message file with one-time pool bits")
        _scheme_args(p)
        p.add_argument("--key-file", required=True)
        p.add_argument("--message-file", required=True)
        p.add_argument("--bits", type=int, help="message length in bits (default: 8 x file size)")
        if name == "verify":
            p.add_argument("--tag", required=True, help="tag as hex")
            p.add_argument("--key-offset", type=int, help="sender's pool offset, checked for desync")
        p.set_defaults(func=func)

    p = sub.add_parser("check", help="run exhaustive oracle checks")
    p.add_argument("--su2", nargs=2, type=int, action="append", metavar=("R", "N"))
    p.add_argument("--p1", nargs=2, type=int, action="append", metavar=("M", "R"))
    p.add_argument("--forgery", nargs=3, type=int, action="append", metavar=("M", "R", "N"))
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="run a seeded QKD authentication campaign")
    _scheme_args(p)
    p.add_argument("--adversary", choices=ADVERSARIES, default="none")
    p.add_argument("--tag-strategy", choices=("random", "reuse"))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reserve-fraction", type=float, default=0.5)
    p.add_argument("--raw-key-len", type=int, default=4096)
    p.add_argument("--extract-lens", type=_lens, default=[1024, 1024])
    p.add_argument("--whole-transcript", action="store_true")
    p.add_argument("--chained", action="store_true", help="run sessions back to back on one pool pair")
    p.add_argument("--pool-bits", type=int, help="initial shared pool size")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--transcript", help="run one session and write its channel log as JSON lines")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QkdAuthError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
