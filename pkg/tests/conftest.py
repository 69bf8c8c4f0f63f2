import numpy as np
import pytest

from adiaforge.circuit import Circuit, gate

ACCEPTANCE = {}


def kron_embed(m, sites, N, d=2):
    """Oracle: embed a matrix given on ``sites`` (any order) with explicit
    permutation matrices, independent of the package's index arithmetic."""
    k = len(sites)
    full = np.kron(m, np.eye(d ** (N - k)))
    order = list(sites) + [p for p in range(N) if p not in sites]
    # full acts on particles in `order`; permute back to 0..N-1
    dim = d ** N
    perm = np.zeros(dim, dtype=np.int64)
    for idx in range(dim):
        digits = np.unravel_index(idx, (d,) * N)
        perm[idx] = np.ravel_multi_index(tuple(digits[p] for p in order), (d,) * N)
    return full[np.ix_(perm, perm)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def bell():
    return Circuit(2, (gate("H", 0), gate("CNOT", 0, 1)))


@pytest.fixture
def record_acceptance():
    def rec(number, ok, detail):
        ACCEPTANCE[number] = (bool(ok), detail)

    return rec


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
