"""Physical parameters, gauge field and the 8-field Proca state.

The spatial metric is Euclidean, so upper and lower spatial indices share one
storage slot: ``A^i == A_i`` and ``Pi^i == Pi_i``. Time derivatives are taken
with respect to ``x0 = c t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .grid import GridSpec, ScalarField, diff1_array, fill_ghosts_array

FIELD_NAMES = ("A0", "Pi0", "A1", "A2", "A3", "Pi1", "Pi2", "Pi3")
I_A0, I_PI0 = 0, 1
I_A = (2, 3, 4)
I_PI = (5, 6, 7)


@dataclass(frozen=True)
class Params:
    """Physical and gauge constants.

    ``dt`` may be negative to integrate backwards in time; it must not be zero.
    """

    c: float = 1.0
    p1: float = 1.0
    p2: float = 1.0
    lambda0: float = 0.01
    dt: float = 0.005
    a: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if self.p1 == 0:
            raise ValueError("p1 must be nonzero")
        if self.lambda0 == 0:
            raise ValueError("lambda0 must be nonzero")
        if self.dt == 0 or not np.isfinite(self.dt):
            raise ValueError("dt must be finite and nonzero")

    @property
    def cdt(self) -> float:
        return self.c * self.dt

    def with_dt(self, dt: float) -> Params:
        return replace(self, dt=dt)


@dataclass(frozen=True)
class LambdaField:
    """The gauge variable lambda.

    Either a constant, or a prescribed function. With ``uniform=True`` the
    function is called as ``func(t)`` and returns a scalar; otherwise it is
    called as ``func(t, x, y, z)`` on broadcastable interior coordinate arrays.
    """

    value: float | None = 0.01
    func: Callable | None = None
    uniform: bool = True

    def __post_init__(self):
        if self.func is None:
            if self.value is None or self.value == 0:
                raise ValueError("constant lambda must be nonzero")

    @classmethod
    def constant(cls, value: float) -> LambdaField:
        return cls(value=float(value))

    @classmethod
    def prescribed(cls, func: Callable, uniform: bool = True) -> LambdaField:
        return cls(value=None, func=func, uniform=uniform)

    @property
    def is_constant(self) -> bool:
        return self.func is None

    def at(self, t: float, grid: GridSpec):
        """Lambda at time ``t``: a float, or an interior-shaped array."""
        if self.func is None:
            return self.value
        if self.uniform:
            lam = float(self.func(t))
        else:
            x = grid.coordinates(1)[None, None, :]
            y = grid.coordinates(2)[None, :, None]
            z = grid.coordinates(3)[:, None, None]
            lam = np.broadcast_to(np.asarray(self.func(t, x, y, z), dtype=float),
                                  grid.interior_shape)
        if np.any(np.asarray(lam) == 0):
            raise ValueError(f"lambda vanishes at t={t}")
        return lam


def as_lambda(lam) -> LambdaField:
    if isinstance(lam, LambdaField):
        return lam
    return LambdaField.constant(lam)


@dataclass
class ProcaState:
    """The 8 dynamical fields at one time level.

    ``data`` has shape ``(8, n3 + 4, n2 + 4, n1 + 4)`` in the order of
    ``FIELD_NAMES``; the field accessors return views into it.
    """

    grid: GridSpec
    data: np.ndarray
    step_index: int = 0
    t: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.data.shape != (8,) + self.grid.shape:
            raise ValueError(f"state data has shape {self.data.shape}")

    @classmethod
    def zeros(cls, grid: GridSpec, dtype=np.float64) -> ProcaState:
        return cls(grid, np.zeros((8,) + grid.shape, dtype=dtype))

    @classmethod
    def from_interior(cls, grid: GridSpec, interior: np.ndarray, step_index=0, t=0.0):
        interior = np.asarray(interior)
        s = cls.zeros(grid, dtype=interior.dtype if interior.dtype.kind == "f" else float)
        s.interior[...] = interior
        s.step_index, s.t = step_index, t
        return s.fill_ghosts()

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def interior(self) -> np.ndarray:
        return self.data[(slice(None),) + self.grid.interior]

    def field(self, i: int) -> ScalarField:
        return ScalarField(self.grid, self.data[i])

    @property
    def A0(self) -> ScalarField:
        return self.field(I_A0)

    @property
    def Pi0(self) -> ScalarField:
        return self.field(I_PI0)

    @property
    def A(self) -> tuple[ScalarField, ScalarField, ScalarField]:
        return tuple(self.field(i) for i in I_A)

    @property
    def Pi(self) -> tuple[ScalarField, ScalarField, ScalarField]:
        return tuple(self.field(i) for i in I_PI)

    def fill_ghosts(self) -> ProcaState:
        fill_ghosts_array(self.data, self.grid)
        return self

    def copy(self) -> ProcaState:
        return ProcaState(self.grid, self.data.copy(), self.step_index, self.t, dict(self.meta))

    def with_data(self, data: np.ndarray, step_index=None, t=None) -> ProcaState:
        return ProcaState(
            self.grid,
            data,
            self.step_index if step_index is None else step_index,
            self.t if t is None else t,
        )

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.interior)))


def _lam_values(lam, state: ProcaState):
    if isinstance(lam, LambdaField):
        lam = lam.at(state.t, state.grid)
    return lam


def _second_wide(values, grid, i, j):
    return diff1_array(diff1_array(values, grid, j), grid, i)


def canonical_rhs(state: ProcaState, params: Params, lam, second=None) -> ProcaState:
    """Canonical right-hand side with a pluggable second-difference operator.

    ``second(values, grid, i, j)`` realises the mixed derivative along axes
    ``i`` and ``j`` (derivative along ``j`` applied first); the default is the
    composition of central first differences. ``lam`` is a ``LambdaField``
    (evaluated at ``state.t``), a scalar, or an interior-shaped array.
    """
    lam = _lam_values(lam, state)
    second = second or _second_wide
    g = state.grid
    d = state.data
    p1, p2 = params.p1, params.p2
    D = diff1_array

    out = np.empty_like(d)
    A0, Pi0 = d[I_A0], d[I_PI0]
    A = [d[i] for i in I_A]
    Pi = [d[i] for i in I_PI]

    div_A = D(A[0], g, 1) + D(A[1], g, 2) + D(A[2], g, 3)
    div_Pi = D(Pi[0], g, 1) + D(Pi[1], g, 2) + D(Pi[2], g, 3)
    out[I_A0][g.interior] = lam * Pi0[g.interior] - div_A[g.interior]
    out[I_PI0] = -p2 * A0 - div_Pi
    for k, i in enumerate((1, 2, 3)):
        out[I_A[k]] = p1 * Pi[k] - D(A0, g, i)
        lap = second(A[k], g, 1, 1) + second(A[k], g, 2, 2) + second(A[k], g, 3, 3)
        mixed = second(A[0], g, i, 1) + second(A[1], g, i, 2) + second(A[2], g, i, 3)
        out[I_PI[k]] = p2 * A[k] - D(Pi0, g, i) + (lap - mixed) / p1
    fill_ghosts_array(out, g)
    return state.with_data(out)


def continuum_rhs(state: ProcaState, params: Params, lam) -> ProcaState:
    """Right-hand side of the canonical equations with every derivative as ``diff1``.

    This is also the spatial operator of the structure-preserving scheme.
    """
    return canonical_rhs(state, params, lam)
