"""Plane-wave initial data along the x + y diagonal.

Fields are sampled at nodes ``x_k = -1/2 + k dx`` (k = 0..n-1) of the unit
periodic square, so the wavenumbers 2 pi and 4 pi are exactly periodic and
ghost filling introduces no seam error. The data do not depend on z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import constraint_c2
from .grid import GridSpec, l2_norm, linf_norm
from .model import Params, ProcaState


class InitialDataError(ValueError):
    pass


@dataclass(frozen=True)
class PlaneWaveParams:
    a: float = 1.0
    p1: float = 1.0
    p2: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not 8 * math.pi**2 - self.p1 * self.p2 > 0:
            raise InitialDataError(
                f"8 pi^2 - p1 p2 must be positive (p1={self.p1}, p2={self.p2})")

    @classmethod
    def from_params(cls, params: Params) -> PlaneWaveParams:
        return cls(a=params.a, p1=params.p1, p2=params.p2, c=params.c)

    @property
    def S(self) -> float:
        return math.sqrt(8 * math.pi**2 - self.p1 * self.p2)


_PI_DIGITS = "3.14159265358979323846264338327950288"


def plane_wave_fields(x, y, pw: PlaneWaveParams, dtype=np.float64) -> list:
    """Closed-form values of the 8 fields at points ``(x, y)``, in state order."""
    dtype = np.dtype(dtype).type
    pi = dtype(_PI_DIGITS)
    a, p1, p2 = dtype(pw.a), dtype(pw.p1), dtype(pw.p2)
    S = np.sqrt(8 * pi**2 - p1 * p2)
    th = 2 * pi * (np.asarray(x, dtype=dtype) + np.asarray(y, dtype=dtype))
    cos, sin = np.cos(th), np.sin(th)
    cos2, sin2 = np.cos(2 * th), np.sin(2 * th)
    return [
        -2 * a * pi * (cos + sin) / S,
        np.zeros_like(th),
        a * cos,
        a * sin,
        a * cos2,
        (-4 * a * pi**2 * cos + a * (p1 * p2 - 4 * pi**2) * sin) / (p1 * S),
        (4 * a * pi**2 * sin + a * (-p1 * p2 + 4 * pi**2) * cos) / (p1 * S),
        -2 * a * S / p1 * sin2,
    ]


def paper_initial_state(grid: GridSpec, params: Params, dtype=np.float64) -> ProcaState:
    """Plane-wave state at t = 0 with ghosts filled.

    ``dtype`` may be ``np.longdouble``; the closed forms are then evaluated in
    that precision too.
    """
    pw = PlaneWaveParams.from_params(params)
    x = (-0.5 + np.arange(grid.n1, dtype=dtype) * np.asarray(grid.dx1, dtype=dtype))
    y = (-0.5 + np.arange(grid.n2, dtype=dtype) * np.asarray(grid.dx2, dtype=dtype))
    values = plane_wave_fields(x[None, None, :], y[None, :, None], pw, dtype)
    state = ProcaState.zeros(grid, dtype=dtype)
    for i, v in enumerate(values):
        state.interior[i] = np.broadcast_to(v, grid.interior_shape)
    return state.fill_ghosts()


@dataclass(frozen=True)
class InitialConstraintReport:
    c1_l2: float
    c1_linf: float
    c2_l2: float
    c2_linf: float


def verify_initial_constraints(u: ProcaState, params: Params) -> InitialConstraintReport:
    """Report (never reject) the constraint values of an initial state."""
    c2 = constraint_c2(u, params)
    return InitialConstraintReport(
        c1_l2=l2_norm(u.Pi0),
        c1_linf=linf_norm(u.Pi0),
        c2_l2=l2_norm(c2),
        c2_linf=linf_norm(c2),
    )
