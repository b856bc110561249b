"""Periodic structured grid, ghost cells and finite-difference stencils.

Layout
------
A scalar field is one contiguous array of shape ``(n3 + 4, n2 + 4, n1 + 4)``:
axis 3 (z) is outermost and axis 1 (x) is the fastest-varying one. Each side
carries ``GHOST_WIDTH = 2`` ghost layers, so the interior cell with zero-based
interior indices ``(k1, k2, k3)`` lives at ``values[k3 + 2, k2 + 2, k1 + 2]``.
Spatial axis ``a`` (1, 2 or 3) maps to array axis ``-a``; every array-level
helper here accepts arbitrary leading batch dimensions.

All stencils read ghost cells, so inputs must have their ghosts filled; all
stencils return fields whose ghosts are already filled, which makes them
freely composable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GHOST_WIDTH = 2
AXES = (1, 2, 3)


@dataclass(frozen=True)
class GridSpec:
    """Periodic grid with ``n1 x n2 x n3`` interior cells and uniform spacings."""

    n1: int
    n2: int
    n3: int
    dx1: float
    dx2: float
    dx3: float
    ghost_width: int = GHOST_WIDTH

    def __post_init__(self):
        for name in ("n1", "n2", "n3"):
            n = getattr(self, name)
            if int(n) != n or n < 1:
                raise ValueError(f"{name} must be a positive integer, got {n!r}")
        for name in ("dx1", "dx2", "dx3"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.ghost_width != GHOST_WIDTH:
            raise ValueError("ghost_width is fixed at 2")

    @classmethod
    def unit_box(cls, n1: int, n2: int | None = None, n3: int = 1) -> GridSpec:
        """Unit-periodic grid in x and y.

        With several z-planes ``dx3 = dx1``. A single plane gets ``dx3 = 1``,
        so the cell volume is an area element and norms of z-independent data
        do not pick up a resolution-dependent thickness.
        """
        n2 = n1 if n2 is None else n2
        return cls(n1, n2, n3, 1.0 / n1, 1.0 / n2, 1.0 / n1 if n3 > 1 else 1.0)

    @property
    def counts(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.n3)

    @property
    def spacings(self) -> tuple[float, float, float]:
        return (self.dx1, self.dx2, self.dx3)

    @property
    def dV(self) -> float:
        return self.dx1 * self.dx2 * self.dx3

    @property
    def shape(self) -> tuple[int, int, int]:
        """Array shape including ghosts (axis 3 first)."""
        g = 2 * self.ghost_width
        return (self.n3 + g, self.n2 + g, self.n1 + g)

    @property
    def interior_shape(self) -> tuple[int, int, int]:
        return (self.n3, self.n2, self.n1)

    @property
    def interior(self) -> tuple[slice, slice, slice]:
        """Slices selecting the index set D inside a ghosted array."""
        g = self.ghost_width
        return (slice(g, g + self.n3), slice(g, g + self.n2), slice(g, g + self.n1))

    @property
    def n_cells(self) -> int:
        return self.n1 * self.n2 * self.n3

    def count(self, axis: int) -> int:
        return self.counts[axis - 1]

    def spacing(self, axis: int) -> float:
        return self.spacings[axis - 1]

    def coordinates(self, axis: int, origin: float = -0.5) -> np.ndarray:
        """Node coordinates ``origin + k * dx`` of the interior cells along ``axis``."""
        return origin + np.arange(self.count(axis)) * self.spacing(axis)


@dataclass
class ScalarField:
    """One real field on a grid, interior plus ghost layers."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape[-3:] != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    @classmethod
    def zeros(cls, grid: GridSpec, dtype=np.float64) -> ScalarField:
        return cls(grid, np.zeros(grid.shape, dtype=dtype))

    @classmethod
    def from_interior(cls, grid: GridSpec, interior: np.ndarray) -> ScalarField:
        interior = np.asarray(interior)
        dtype = interior.dtype if interior.dtype.kind == "f" else np.float64
        f = cls.zeros(grid, dtype=dtype)
        f.interior[...] = np.broadcast_to(interior, grid.interior_shape)
        return fill_ghosts(f)

    @property
    def interior(self) -> np.ndarray:
        return self.values[(...,) + self.grid.interior]

    def copy(self) -> ScalarField:
        return ScalarField(self.grid, self.values.copy())


# ---------------------------------------------------------------------------
# array-level kernels


def fill_ghosts_array(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Overwrite the ghost layers of ``values`` with periodic images, in place."""
    g = grid.ghost_width
    for axis in AXES:
        n = grid.count(axis)
        ax = -axis
        if n >= g:
            lo = [slice(None)] * values.ndim
            src = [slice(None)] * values.ndim
            lo[ax], src[ax] = slice(0, g), slice(n, n + g)
            values[tuple(lo)] = values[tuple(src)]
            lo[ax], src[ax] = slice(n + g, n + 2 * g), slice(g, 2 * g)
            values[tuple(lo)] = values[tuple(src)]
        else:
            idx = (np.arange(-g, n + g) % n) + g
            values[...] = np.take(values, idx, axis=ax)
    return values


def _shifted(values: np.ndarray, grid: GridSpec, axis: int, s: int) -> np.ndarray:
    """Interior-shaped view of ``values`` displaced by ``s`` cells along ``axis``."""
    sl = list(grid.interior)
    k = 3 - axis
    sl[k] = slice(sl[k].start + s, sl[k].stop + s)
    return values[(...,) + tuple(sl)]


def _new_like(values: np.ndarray, grid: GridSpec, interior: np.ndarray) -> np.ndarray:
    out = np.empty(values.shape, dtype=values.dtype)
    out[(...,) + grid.interior] = interior
    return fill_ghosts_array(out, grid)


def diff1_array(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    dx = grid.spacing(axis)
    inner = (_shifted(values, grid, axis, 1) - _shifted(values, grid, axis, -1)) / (2 * dx)
    return _new_like(values, grid, inner)


def diff_fwd_array(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    dx = grid.spacing(axis)
    inner = (_shifted(values, grid, axis, 1) - _shifted(values, grid, axis, 0)) / dx
    return _new_like(values, grid, inner)


def diff_bwd_array(values: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    dx = grid.spacing(axis)
    inner = (_shifted(values, grid, axis, 0) - _shifted(values, grid, axis, -1)) / dx
    return _new_like(values, grid, inner)


def diff2_array(values: np.ndarray, grid: GridSpec, axis_i: int, axis_j: int) -> np.ndarray:
    if axis_i != axis_j:
        return diff1_array(diff1_array(values, grid, axis_j), grid, axis_i)
    dx = grid.spacing(axis_i)
    inner = (
        _shifted(values, grid, axis_i, 1)
        - 2 * _shifted(values, grid, axis_i, 0)
        + _shifted(values, grid, axis_i, -1)
    ) / (dx * dx)
    return _new_like(values, grid, inner)


# ---------------------------------------------------------------------------
# field-level operators


def _check_axis(axis: int) -> None:
    if axis not in AXES:
        raise ValueError(f"axis must be 1, 2 or 3, got {axis!r}")


def fill_ghosts(f: ScalarField) -> ScalarField:
    """Fill the ghost layers of ``f`` with periodic copies (in place); returns ``f``."""
    fill_ghosts_array(f.values, f.grid)
    return f


def diff1(f: ScalarField, axis: int) -> ScalarField:
    """Central first difference ``(f[k+1] - f[k-1]) / (2 dx)``."""
    _check_axis(axis)
    return ScalarField(f.grid, diff1_array(f.values, f.grid, axis))


def diff_fwd(f: ScalarField, axis: int) -> ScalarField:
    """Forward difference ``(f[k+1] - f[k]) / dx``."""
    _check_axis(axis)
    return ScalarField(f.grid, diff_fwd_array(f.values, f.grid, axis))


def diff_bwd(f: ScalarField, axis: int) -> ScalarField:
    """Backward difference ``(f[k] - f[k-1]) / dx``."""
    _check_axis(axis)
    return ScalarField(f.grid, diff_bwd_array(f.values, f.grid, axis))


def diff2(f: ScalarField, axis_i: int, axis_j: int) -> ScalarField:
    """Second difference.

    For ``axis_i == axis_j`` this is the compact three-point stencil
    ``(f[k+1] - 2 f[k] + f[k-1]) / dx**2``; for mixed axes it is the
    composition ``diff1(diff1(f, axis_j), axis_i)``.
    """
    _check_axis(axis_i)
    _check_axis(axis_j)
    return ScalarField(f.grid, diff2_array(f.values, f.grid, axis_i, axis_j))


def l2_norm(f: ScalarField) -> float:
    """Volume-weighted discrete L2 norm ``sqrt(sum_D f**2 dV)``."""
    inner = f.interior
    return float(np.sqrt(np.sum(inner * inner) * f.grid.dV))


def linf_norm(f: ScalarField) -> float:
    return float(np.max(np.abs(f.interior)))
