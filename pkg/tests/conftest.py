import math

import numpy as np
import pytest


def dense_large_cycle(n, m, theta, target):
    """2N x 2N matrix of one large cycle, built from scratch.

    Basis order is (H_0..H_{N-1}, V_0..V_{N-1}).
    """
    eye = np.eye(n)

    def rotation(a):
        c, s = math.cos(a), math.sin(a)
        return np.block([[c * eye, -s * eye], [s * eye, c * eye]])

    bomb = np.eye(2 * n)
    bomb[n + target, n + target] = 0.0
    keep_h = np.diag(np.r_[np.ones(n), np.zeros(n)])
    diffusion = np.zeros((2 * n, 2 * n))
    diffusion[:n, :n] = 2.0 / n - eye

    oracle = np.linalg.matrix_power(bomb @ rotation(theta), m)
    return diffusion @ keep_h @ rotation(-m * theta) @ oracle


def dense_trace(n, m, theta, k, target=0):
    """(tau, alpha, cumulative survival) for j = 0..k by matrix powers."""
    step = dense_large_cycle(n, m, theta, target)
    x = np.r_[np.full(n, 1 / math.sqrt(n)), np.zeros(n)]
    out = []
    for _ in range(k + 1):
        weight = float(x @ x)
        h = x[:n] / math.sqrt(weight)
        other = (target + 1) % n
        out.append((h[target], h[other], weight))
        x = step @ x
    return out


@pytest.fixture
def dense():
    return dense_trace


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS:
        terminalreporter.write_line(line)
