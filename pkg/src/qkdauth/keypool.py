"""Append-only pool of shared one-time key bits.

Bits are handed out strictly in order and never twice. Fresh key from a
completed session is appended at the end; the consume cursor only moves
forward.

Persistence layout (all integers little-endian)::

    magic   4 bytes   b"QKPL"
    version u32       1
    cursor  u64
    length  u64       number of valid bits
    payload           packed bits, ceil(length / 8) bytes

The consumption/deposit ledger lives next to the pool file as JSON lines.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

from qkdauth.bitcore import BitString
from qkdauth.errors import KeyExhaustedError, PoolFormatError

MAGIC = b"QKPL"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


@dataclass(frozen=True, slots=True)
class LedgerEntry:
    kind: str  # "draw" or "deposit"
    label: str
    offset: int
    length: int


@dataclass(frozen=True)
class GrowthReport:
    consumed: int
    deposited: int

    @property
    def net(self) -> int:
        return self.deposited - self.consumed

    @property
    def growth_ratio(self) -> float | None:
        if self.consumed == 0:
            return None
        return self.deposited / self.consumed


@dataclass
class KeyPool:
    bits: BitString = field(default_factory=lambda: BitString(0))
    cursor: int = 0
    ledger: list[LedgerEntry] = field(default_factory=list)

    def __post_init__(self):
        if not 0 <= self.cursor <= len(self.bits):
            raise PoolFormatError(f"cursor {self.cursor} outside pool of {len(self.bits)} bits")

    @classmethod
    def from_bits(cls, bits: str) -> KeyPool:
        return cls(BitString.from_bits(bits))

    @property
    def remaining(self) -> int:
        return len(self.bits) - self.cursor

    def draw(self, count: int, label: str = "") -> BitString:
        """Consume the next ``count`` bits.

        Fails without side effects if fewer than ``count`` bits remain.
        """
        if count < 0:
            raise ValueError(f"negative draw size {count}")
        if count > self.remaining:
            raise KeyExhaustedError(
                f"{label or 'draw'} needs {count} bits, only {self.remaining} left"
            )
        out = self.bits.slice(self.cursor, self.cursor + count)
        self.ledger.append(LedgerEntry("draw", label, self.cursor, count))
        self.cursor += count
        return out

    def deposit(self, fresh: BitString, label: str = "") -> KeyPool:
        offset = len(self.bits)
        self.bits = self.bits + fresh
        self.ledger.append(LedgerEntry("deposit", label, offset, len(fresh)))
        return self

    def mark(self) -> int:
        """Return a marker for :meth:`growth_report`."""
        return len(self.ledger)

    def growth_report(self, since: int = 0) -> GrowthReport:
        if not 0 <= since <= len(self.ledger):
            raise ValueError(f"invalid ledger marker {since}")
        consumed = deposited = 0
        for entry in self.ledger[since:]:
            if entry.kind == "draw":
                consumed += entry.length
            else:
                deposited += entry.length
        return GrowthReport(consumed, deposited)

    def copy(self) -> KeyPool:
        return KeyPool(self.bits, self.cursor, list(self.ledger))

    def same_state(self, other: KeyPool) -> bool:
        return self.bits == other.bits and self.cursor == other.cursor

    # -- persistence --------------------------------------------------------

    def to_bytes(self) -> bytes:
        return _HEADER.pack(MAGIC, VERSION, self.cursor, len(self.bits)) + self.bits.to_bytes()

    @classmethod
    def from_file_bytes(cls, data: bytes) -> KeyPool:
        if len(data) < _HEADER.size:
            raise PoolFormatError("truncated pool header")
        magic, version, cursor, length = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise PoolFormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise PoolFormatError(f"unsupported pool version {version}")
        payload = data[_HEADER.size:]
        if len(payload) != (length + 7) // 8:
            raise PoolFormatError(
                f"payload holds {len(payload)} bytes, header declares {length} bits"
            )
        bits = BitString.from_bytes(payload, length)
        if bits.to_bytes() != payload:
            raise PoolFormatError("nonzero padding bits in final payload byte")
        return cls(bits, cursor)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.write_bytes(self.to_bytes())
        with open(ledger_path(path), "w") as fh:
            for entry in self.ledger:
                fh.write(json.dumps(asdict(entry)) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> KeyPool:
        path = Path(path)
        pool = cls.from_file_bytes(path.read_bytes())
        lp = ledger_path(path)
        if lp.exists():
            with open(lp) as fh:
                pool.ledger = [LedgerEntry(**json.loads(line)) for line in fh if line.strip()]
        return pool


def ledger_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".ledger.jsonl")


def issued_indices(pool: KeyPool) -> list[int]:
    """Every pool bit index handed out by a draw, in issue order."""
    out: list[int] = []
    for entry in pool.ledger:
        if entry.kind == "draw":
            out.extend(range(entry.offset, entry.offset + entry.length))
    return out
