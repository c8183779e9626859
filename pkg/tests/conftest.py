import random

import pytest

from qkdauth import _backend, bitcore
from qkdauth.bitcore import BitString
from qkdauth.keypool import KeyPool

BACKENDS = _backend.available()


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per loadable kernel backend."""
    mod = BACKENDS[request.param]
    monkeypatch.setattr(bitcore, "kernels", mod)
    return mod


@pytest.fixture
def rng():
    return random.Random(20061014)


def bits(text):
    return BitString.from_bits(text)


def pool_from_seed(nbits, seed):
    return KeyPool(BitString.random(nbits, random.Random(seed)))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line for the acceptance summary."""

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
