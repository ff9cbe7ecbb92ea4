import math
from itertools import combinations

import numpy as np
import pytest

from dirdescent.core import SampleCloud, grid_points


def vertex_enumeration(A, b, c):
    """LP optimum by trying every basis; +inf when no basic feasible solution exists."""
    A, b, c = np.atleast_2d(A), np.asarray(b, float), np.asarray(c, float)
    m, n = A.shape
    rank = np.linalg.matrix_rank(A)
    if rank == 0:
        return 0.0 if np.allclose(b, 0) else math.inf
    best = math.inf
    for cols in combinations(range(n), rank):
        sub = A[:, cols]
        if np.linalg.matrix_rank(sub) < rank:
            continue
        xs = np.linalg.lstsq(sub, b, rcond=None)[0]
        if np.any(xs < -1e-9) or np.abs(sub @ xs - b).max() > 1e-8:
            continue
        best = min(best, float(c[list(cols)] @ xs))
    return best


@pytest.fixture
def w_vertices():
    return SampleCloud([-1, -0.5, 0, 0.5, 1], [0.8, 0.2, 0.5, 0.0, 0.9])


@pytest.fixture
def square_cloud():
    x = grid_points([-1], [1], 0.5)
    return SampleCloud(x, x[:, 0] ** 2)


def random_cloud(rng, n, m):
    pts = rng.uniform(-1, 1, size=(m, n))
    return SampleCloud(pts, rng.uniform(-1, 1, size=m))


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_line():
    """Record one PASS/FAIL line per criterion; echoed now and in the terminal summary."""
    def record(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
