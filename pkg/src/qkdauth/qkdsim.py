"""Two-party QKD session simulator with an in-line adversary.

The quantum phase is a stub: raw key and protocol extracts are seeded
random strings. What is simulated faithfully is the public channel: every
extract is tagged by its sender as soon as it is produced, passes through
the adversary, and is verified by the receiver against its own key pool.
A single rejection aborts the session for both parties; only a session where
every message verified deposits fresh key into the pools.

Alice sends the even-numbered extracts, Bob the odd ones. Parties are small
state machines fed from an ordered channel queue, so a run is a pure
function of the configuration, the two pools and the adversary mode.
"""

from __future__ import annotations

import hashlib
import math
import random
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction

from qkdauth.bitcore import BitString
from qkdauth.errors import KeyExhaustedError, PoolDesyncError
from qkdauth.keypool import KeyPool
from qkdauth.twostep import TwoStepParams, key_cost, security_bound, twostep_tag
from qkdauth.wcauth import wc_params, wc_tag

SCHEMES = ("wc", "twostep")
ADVERSARIES = ("none", "inject", "replay", "mitm-split")
TAG_STRATEGIES = ("random", "reuse")


@dataclass(frozen=True)
class SessionConfig:
    scheme: str = "twostep"
    n: int = 64
    r: int = 256
    f0_kind: str = "sha-truncate"
    randomize: bool = False
    seed_bits: int = 128
    raw_key_len: int = 4096
    extract_lens: tuple[int, ...] = (1024, 1024)
    phase_labels: tuple[str, ...] = ("sifting", "error-correction")
    reserve_fraction: float = 0.5
    rng_seed: int = 0
    whole_transcript: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0 <= self.reserve_fraction <= 1:
            raise ValueError(f"reserve_fraction {self.reserve_fraction} not in [0, 1]")
        if self.raw_key_len < 1 or not self.extract_lens or min(self.extract_lens) < 1:
            raise ValueError("raw key and extract lengths must be positive")
        if not self.phase_labels:
            raise ValueError("need at least one phase label")
        object.__setattr__(self, "extract_lens", tuple(self.extract_lens))
        object.__setattr__(self, "phase_labels", tuple(self.phase_labels))
        if self.scheme == "twostep":
            self.twostep_params()
        else:
            for m in self.units_lengths():
                wc_params(m, self.n)

    def twostep_params(self) -> TwoStepParams:
        return TwoStepParams(self.r, self.n, self.f0_kind, self.randomize, self.seed_bits)

    def units(self) -> list[tuple[int, str, str, int]]:
        """Authenticated messages as ``(seq, phase, sender, length)``."""
        if self.whole_transcript:
            return [(0, "transcript", "alice", sum(self.extract_lens))]
        return [
            (i, self.phase_labels[i % len(self.phase_labels)], "alice" if i % 2 == 0 else "bob", m)
            for i, m in enumerate(self.extract_lens)
        ]

    def units_lengths(self) -> list[int]:
        return [u[3] for u in self.units()]

    def message_cost(self, m: int) -> int:
        if self.scheme == "wc":
            return wc_params(m, self.n).key_bits_actual
        return key_cost(self.twostep_params())

    def analytic_cost(self) -> int:
        """Pool bits each party spends on a session that runs to completion."""
        return sum(self.message_cost(m) for m in self.units_lengths())

    def deposit_bits(self) -> int:
        return math.floor(self.reserve_fraction * self.raw_key_len)

    def forgery_bound(self) -> Fraction:
        if self.scheme == "twostep":
            return security_bound(self.r, self.n).p_total
        # tree construction doubles the single-level bound
        return Fraction(2, 2**self.n)


@dataclass(frozen=True)
class AdversaryMode:
    kind: str = "none"
    tag_strategy: str | None = None

    def __post_init__(self):
        if self.kind not in ADVERSARIES:
            raise ValueError(f"unknown adversary {self.kind!r}, expected one of {ADVERSARIES}")
        if self.tag_strategy is None:
            object.__setattr__(self, "tag_strategy", "reuse" if self.kind == "mitm-split" else "random")
        if self.tag_strategy not in TAG_STRATEGIES:
            raise ValueError(f"unknown tag strategy {self.tag_strategy!r}")


@dataclass(frozen=True)
class Message:
    direction: str
    phase: str
    seq: int
    key_offset: int
    payload: BitString
    tag: BitString
    forged: bool = False


@dataclass
class SessionReport:
    messages_sent: int = 0
    verifications: list[bool] = field(default_factory=list)
    forged: list[bool] = field(default_factory=list)
    aborted: bool = False
    abort_reason: str = ""
    adversary_succeeded: bool = False
    key_consumed: int = 0
    key_deposited: int = 0
    pools_synchronized: bool = True

    @property
    def forged_attempts(self) -> int:
        return sum(self.forged)

    @property
    def forged_accepted(self) -> int:
        return sum(v and f for v, f in zip(self.verifications, self.forged))

    @property
    def growth_ratio(self) -> Fraction | None:
        return Fraction(self.key_deposited, self.key_consumed) if self.key_consumed else None

    def to_json(self) -> dict:
        out = asdict(self)
        ratio = self.growth_ratio
        out.update(
            forged_attempts=self.forged_attempts,
            forged_accepted=self.forged_accepted,
            growth_ratio=None if ratio is None else float(ratio),
        )
        return out


def authenticate(
    cfg: SessionConfig, payload: BitString, pool: KeyPool, params: TwoStepParams | None = None
) -> BitString:
    if cfg.scheme == "wc":
        return wc_tag(payload, pool, cfg.n)
    return twostep_tag(payload, pool, params or cfg.twostep_params())


def derive_seed(seed: int, *labels: object) -> int:
    h = hashlib.sha256(seed.to_bytes(32, "little", signed=False))
    for item in labels:
        h.update(b"\x00" + str(item).encode())
    return int.from_bytes(h.digest(), "little")


class Party:
    """One legitimate endpoint: tags its own extracts, verifies the peer's."""

    def __init__(self, name, cfg, pool, raw_key, rng, report):
        self.name = name
        self.cfg = cfg
        self.pool = pool
        self.raw_key = raw_key
        self.rng = rng
        self.report = report
        self.schedule = cfg.units()
        self.params = cfg.twostep_params() if cfg.scheme == "twostep" else None
        self.next_slot = 0
        self.done = False
        self.aborted = False

    def _maybe_send(self) -> list[Message]:
        if self.next_slot >= len(self.schedule):
            self.done = True
            return []
        seq, phase, sender, length = self.schedule[self.next_slot]
        if sender != self.name:
            return []
        payload = BitString.random(length, self.rng)
        offset = self.pool.cursor
        tag = authenticate(self.cfg, payload, self.pool, self.params)
        self.next_slot += 1
        self.report.messages_sent += 1
        peer = "B" if self.name == "alice" else "A"
        return [Message(f"{self.name[0].upper()}->{peer}", phase, seq, offset, payload, tag)]

    def start(self) -> list[Message]:
        return self._maybe_send()

    def on_message(self, msg: Message) -> list[Message]:
        seq, phase, sender, length = self.schedule[self.next_slot]
        if msg.key_offset != self.pool.cursor:
            raise PoolDesyncError(f"{self.name} at offset {self.pool.cursor}, header says {msg.key_offset}")
        if msg.seq != seq or len(msg.payload) != length:
            # burn the slot's key so both ends stay aligned
            self.pool.draw(self.cfg.message_cost(length), "reject-burn")
            ok = False
        else:
            ok = authenticate(self.cfg, msg.payload, self.pool, self.params) == msg.tag
        self.next_slot += 1
        self.report.verifications.append(ok)
        self.report.forged.append(msg.forged)
        if not ok:
            self.aborted = True
            return []
        return self._maybe_send()


class Adversary:
    """Channel filter; ``none`` forwards every message untouched."""

    def __init__(self, mode: AdversaryMode, cfg: SessionConfig, rng: random.Random):
        self.mode = mode
        self.cfg = cfg
        self.rng = rng
        self.seen: list[Message] = []

    def _forged_tag(self, msg: Message) -> BitString:
        if self.mode.tag_strategy == "reuse":
            return msg.tag
        return BitString.random(len(msg.tag), self.rng)

    def intercept(self, msg: Message) -> Message:
        kind = self.mode.kind
        if kind == "none":
            return msg
        if kind in ("inject", "mitm-split"):
            # Eve's own extract for this slot, independent of the genuine one
            payload = BitString.random(len(msg.payload), self.rng)
            return replace(msg, payload=payload, tag=self._forged_tag(msg), forged=True)
        # replay: first message passes, later slots get an earlier (payload, tag)
        # under the header of the slot being replaced
        if not self.seen:
            self.seen.append(msg)
            return msg
        same_len = [m for m in self.seen if len(m.payload) == len(msg.payload)]
        old = (same_len or self.seen)[-1]
        self.seen.append(msg)
        return replace(msg, payload=old.payload, tag=old.tag, forged=True)


def run_session(
    cfg: SessionConfig,
    alice_pool: KeyPool,
    bob_pool: KeyPool,
    adversary: AdversaryMode = AdversaryMode(),
    transcript: list[dict] | None = None,
    rng: random.Random | None = None,
) -> SessionReport:
    """Run one session, mutating both pools.

    All randomness comes from ``rng`` (default: seeded from ``cfg.rng_seed``).
    Raises :class:`PoolDesyncError` if the pools do not start out identical.
    Pool exhaustion ends the session as an abort.
    """
    if not alice_pool.same_state(bob_pool):
        raise PoolDesyncError("pools are not synchronized at session start")
    if rng is None:
        rng = random.Random(cfg.rng_seed)
    report = SessionReport()
    start = alice_pool.mark()

    raw = BitString.random(cfg.raw_key_len, rng)
    if adversary.kind == "mitm-split":
        # Eve cut the quantum channel: two independent keys, Alice-Eve and Eve-Bob
        alice_raw, bob_raw = raw, BitString.random(cfg.raw_key_len, rng)
    else:
        alice_raw = bob_raw = raw

    alice = Party("alice", cfg, alice_pool, alice_raw, rng, report)
    bob = Party("bob", cfg, bob_pool, bob_raw, rng, report)
    eve = Adversary(adversary, cfg, rng)
    receiver = {"A->B": bob, "B->A": alice}

    try:
        queue = deque(alice.start() + bob.start())
        while queue:
            msg = eve.intercept(queue.popleft())
            party = receiver[msg.direction]
            queue.extend(party.on_message(msg))
            if transcript is not None:
                transcript.append(
                    {
                        "direction": msg.direction,
                        "phase": msg.phase,
                        "seq": msg.seq,
                        "length": len(msg.payload),
                        "tag": msg.tag.to_hex(),
                        "verdict": "accept" if report.verifications[-1] else "reject",
                    }
                )
            if party.aborted:
                report.aborted = True
                report.abort_reason = "authentication-failure"
                break
    except KeyExhaustedError as exc:
        report.aborted = True
        report.abort_reason = f"key-exhausted: {exc}"

    report.adversary_succeeded = report.forged_accepted > 0
    if not report.aborted and len(report.verifications) == len(cfg.units()):
        bits = cfg.deposit_bits()
        alice_pool.deposit(alice_raw.low(bits), "session-reserve")
        bob_pool.deposit(bob_raw.low(bits), "session-reserve")
        report.key_deposited = bits
    elif not report.aborted:
        report.aborted = True
        report.abort_reason = "incomplete"
    report.key_consumed = alice_pool.growth_report(start).consumed
    report.pools_synchronized = alice_pool.same_state(bob_pool)
    return report


# -- campaigns -------------------------------------------------------------


@dataclass
class CampaignStats:
    scheme: str
    adversary: str
    tag_strategy: str
    trials: int = 0
    sessions_aborted: int = 0
    messages_sent: int = 0
    forged_messages: int = 0
    forged_accepted: int = 0
    adversary_successes: int = 0
    desynchronized_sessions: int = 0
    key_consumed: int = 0
    key_deposited: int = 0
    growth_ratio_sum: Fraction = Fraction(0)
    growth_ratio_count: int = 0
    forgery_bound: float = 0.0

    def merge(self, other: CampaignStats) -> None:
        for name in (
            "trials",
            "sessions_aborted",
            "messages_sent",
            "forged_messages",
            "forged_accepted",
            "adversary_successes",
            "desynchronized_sessions",
            "key_consumed",
            "key_deposited",
            "growth_ratio_sum",
            "growth_ratio_count",
        ):
            setattr(self, name, getattr(self, name) + getattr(other, name))

    def add(self, report: SessionReport) -> None:
        self.trials += 1
        self.sessions_aborted += report.aborted
        self.messages_sent += report.messages_sent
        self.forged_messages += report.forged_attempts
        self.forged_accepted += report.forged_accepted
        self.adversary_successes += report.adversary_succeeded
        self.key_consumed += report.key_consumed
        self.key_deposited += report.key_deposited
        if report.growth_ratio is not None:
            self.growth_ratio_sum += report.growth_ratio
            self.growth_ratio_count += 1

    @property
    def forgery_rate(self) -> float:
        return self.forged_accepted / self.forged_messages if self.forged_messages else 0.0

    @property
    def forgery_sigma(self) -> float:
        """Binomial standard error of the forgery rate at the bound."""
        if not self.forged_messages:
            return 0.0
        p = self.forgery_bound
        return math.sqrt(p * (1 - p) / self.forged_messages)

    @property
    def abort_rate(self) -> float:
        return self.sessions_aborted / self.trials if self.trials else 0.0

    @property
    def mean_growth_ratio(self) -> Fraction | None:
        if not self.growth_ratio_count:
            return None
        return self.growth_ratio_sum / self.growth_ratio_count

    def to_json(self) -> dict:
        out = asdict(self)
        del out["growth_ratio_sum"], out["growth_ratio_count"]
        out.update(
            forgery_rate=self.forgery_rate,
            forgery_sigma=self.forgery_sigma,
            abort_rate=self.abort_rate,
            adversary_success_rate=self.adversary_successes / self.trials if self.trials else 0.0,
            mean_growth_ratio=None if self.mean_growth_ratio is None else float(self.mean_growth_ratio),
        )
        return out


def fresh_pools(bits: int, seed: int | random.Random) -> tuple[KeyPool, KeyPool]:
    """Two identical pools of ``bits`` shared random bits."""
    rng = seed if isinstance(seed, random.Random) else random.Random(derive_seed(seed, "initial-pool"))
    shared = BitString.random(bits, rng)
    return KeyPool(shared), KeyPool(shared)


def _run_trials(cfg, adversary, seed, indices, pool_bits) -> CampaignStats:
    stats = CampaignStats(cfg.scheme, adversary.kind, adversary.tag_strategy)
    stats.forgery_bound = float(cfg.forgery_bound())
    for i in indices:
        rng = random.Random(derive_seed(seed, "trial", i))
        alice, bob = fresh_pools(pool_bits, rng)
        report = run_session(cfg, alice, bob, adversary, rng=rng)
        stats.add(report)
        if adversary.kind == "none" and not report.pools_synchronized:
            stats.desynchronized_sessions += 1
    return stats


def run_campaign(
    cfg: SessionConfig,
    adversary: AdversaryMode,
    trials: int,
    seed: int = 0,
    chained: bool = False,
    initial_pool_bits: int | None = None,
    workers: int = 1,
) -> CampaignStats:
    """Aggregate ``trials`` sessions; deterministic for a given ``seed``.

    Independent trials each get their own freshly shared pools (sized to
    one full session by default). With ``chained=True`` the sessions run
    back to back on one pair of pools, so deposits fund later sessions.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    pool_bits = cfg.analytic_cost() if initial_pool_bits is None else initial_pool_bits
    if chained:
        stats = CampaignStats(cfg.scheme, adversary.kind, adversary.tag_strategy)
        stats.forgery_bound = float(cfg.forgery_bound())
        alice, bob = fresh_pools(pool_bits, seed)
        for i in range(trials):
            rng = random.Random(derive_seed(seed, "trial", i))
            report = run_session(cfg, alice, bob, adversary, rng=rng)
            stats.add(report)
            if not report.pools_synchronized:
                stats.desynchronized_sessions += 1
                break
        return stats
    if workers <= 1:
        return _run_trials(cfg, adversary, seed, range(trials), pool_bits)
    chunks = [range(lo, min(trials, lo + -(-trials // workers))) for lo in range(0, trials, -(-trials // workers))]
    total = CampaignStats(cfg.scheme, adversary.kind, adversary.tag_strategy)
    total.forgery_bound = float(cfg.forgery_bound())
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_run_trials, cfg, adversary, seed, c, pool_bits) for c in chunks]
        for fut in futures:
            total.merge(fut.result())
    return total
