"""Shared brute-force oracles and the acceptance summary hook."""

import itertools

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def brute_unfold(t, mode):
    """Mode-``mode`` unfolding by enumerating every entry.

    Column index of the fiber at ``idx`` (with ``idx[mode]`` removed) is
    ``sum_{k != mode} idx[k] * prod_{m != mode, m < k} I_m``.
    """
    shape = t.shape
    others = [k for k in range(len(shape)) if k != mode]
    ncols = int(np.prod([shape[k] for k in others])) if others else 1
    out = np.zeros((shape[mode], ncols))
    for idx in itertools.product(*(range(s) for s in shape)):
        col, stride = 0, 1
        for k in others:
            col += idx[k] * stride
            stride *= shape[k]
        out[idx[mode], col] = t[idx]
    return out


def naive_mode_product(t, m, mode):
    """Multiply each mode-``mode`` fiber by ``m`` one at a time."""
    new_shape = list(t.shape)
    new_shape[mode] = m.shape[0]
    out = np.zeros(new_shape)
    rest = [range(s) for k, s in enumerate(t.shape) if k != mode]
    for idx in itertools.product(*rest):
        sl = list(idx)
        sl.insert(mode, slice(None))
        sl = tuple(sl)
        fiber = t[sl]
        out[sl] = [sum(m[i, j] * fiber[j] for j in range(len(fiber))) for i in range(m.shape[0])]
    return out


def brute_reconstruct(weights, factors):
    shape = tuple(f.shape[0] for f in factors)
    out = np.zeros(shape)
    for idx in itertools.product(*(range(s) for s in shape)):
        total = 0.0
        for r, w in enumerate(weights):
            term = w
            for f, i in zip(factors, idx):
                term *= f[i, r]
            total += term
        out[idx] = total
    return out


def random_orthonormal(rng, rows, cols):
    q, _ = np.linalg.qr(rng.standard_normal((rows, cols)))
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(label, ok, detail=""):
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] {label}" + (f" -- {detail}" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
