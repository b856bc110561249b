import math

import numpy as np
import pytest

from proca_sps.grid import GridSpec
from proca_sps.initdata import paper_initial_state
from proca_sps.model import LambdaField, Params, ProcaState


def make_params(n=50, cfl=0.25, **kw):
    return Params(dt=cfl / n, **kw)


@pytest.fixture
def grid50():
    return GridSpec.unit_box(50, 50, 1)


@pytest.fixture
def params50():
    return make_params(50)


@pytest.fixture
def lam():
    return LambdaField.constant(0.01)


@pytest.fixture
def paper50(grid50, params50):
    return paper_initial_state(grid50, params50)


def random_state(grid, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return ProcaState.from_interior(grid, scale * rng.standard_normal((8,) + grid.interior_shape))


def xy_mesh(grid):
    """Node coordinates broadcast to the interior shape (z, y, x)."""
    x = grid.coordinates(1)[None, None, :]
    y = grid.coordinates(2)[None, :, None]
    return np.broadcast_to(x, grid.interior_shape), np.broadcast_to(y, grid.interior_shape)


def reference_rhs(v, grid, p1, p2, lam, scheme="sps"):
    """Independent np.roll assembly of the spatial operator on interior arrays.

    ``v`` has shape (8, n3, n2, n1). Axis a of the grid is array axis -a.
    """
    def d1(f, a):
        if grid.count(a) == 1:
            return np.zeros_like(f)
        ax = f.ndim - a
        return (np.roll(f, -1, ax) - np.roll(f, 1, ax)) / (2 * grid.spacing(a))

    def compact(f, a):
        if grid.count(a) == 1:
            return np.zeros_like(f)
        ax = f.ndim - a
        return (np.roll(f, -1, ax) - 2 * f + np.roll(f, 1, ax)) / grid.spacing(a) ** 2

    def sec(f, i, m):
        if scheme == "ss" and i == m:
            return compact(f, i)
        return d1(d1(f, m), i)

    A0, P0, A, P = v[0], v[1], v[2:5], v[5:8]
    out = np.zeros_like(v)
    out[0] = lam * P0 - sum(d1(A[k], k + 1) for k in range(3))
    out[1] = -p2 * A0 - sum(d1(P[k], k + 1) for k in range(3))
    for k in range(3):
        i = k + 1
        out[2 + k] = p1 * P[k] - d1(A0, i)
        lap = sum(sec(A[k], m, m) for m in (1, 2, 3))
        mixed = sum(sec(A[m - 1], i, m) for m in (1, 2, 3))
        out[5 + k] = p2 * A[k] - d1(P0, i) + (lap - mixed) / p1
    return out


def power_radius(G, squarings=40):
    """||G^k||^(1/k) with k = 2^squarings, by normalised repeated squaring."""
    log_scale = 0.0
    X = np.array(G, dtype=complex)
    for s in range(squarings):
        nrm = np.linalg.norm(X, 2)
        X = X / nrm
        log_scale = 2 * (log_scale + math.log(nrm))
        X = X @ X
    k = 2**squarings
    return math.exp((log_scale + math.log(np.linalg.norm(X, 2))) / k)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
