"""Implicit Crank-Nicolson steppers for the SPS and SS discretisations.

Both schemes advance the state by solving

    (u+ - u) / (c dt) = L((u+ + u) / 2)

where ``L`` is the scheme's spatial operator with the gauge variable replaced
by its two-level average. SPS spells every second derivative as a composition
of central first differences; SS uses the compact second difference on the
diagonal of the ``Pi_i`` row and keeps the composition for mixed axes.

Because every stencil is translation invariant on the periodic grid, the
discrete Fourier transform block-diagonalises the update into one 8x8 system
per wavevector; :func:`solve_spectral` solves those exactly. A matrix-free
GMRES solve (:func:`solve_iterative`) is kept as an independent route.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.fft as sfft
from scipy.sparse.linalg import LinearOperator, gmres

from .grid import GridSpec, diff2_array
from .model import (I_A, I_A0, I_PI, I_PI0, LambdaField, Params, ProcaState, as_lambda,
                    canonical_rhs)


class SchemeKind(str, Enum):
    SPS = "sps"
    SS = "ss"

    @classmethod
    def parse(cls, value) -> SchemeKind:
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class ConfigurationError(ValueError):
    pass


class SolverError(RuntimeError):
    """Raised when an implicit solve fails; carries the residual history."""

    def __init__(self, message, residual=float("nan"), history=()):
        super().__init__(message)
        self.residual = residual
        self.history = list(history)


class SingularModeError(SolverError):
    def __init__(self, wavevector):
        super().__init__(f"singular implicit system for wavevector h={tuple(wavevector)}")
        self.wavevector = tuple(float(h) for h in wavevector)


@dataclass(frozen=True)
class SolverConfig:
    """``kind`` is ``"spectral"`` or ``"iterative"``.

    ``refine`` sets the number of residual-correction sweeps after a spectral
    solve; ``None`` means 0 in double precision and 3 for wider dtypes, which
    the float64 mode solve alone cannot resolve.
    """

    kind: str = "spectral"
    tol: float = 1e-12
    max_iter: int = 10000
    refine: int | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.kind not in ("spectral", "iterative"):
            raise ConfigurationError(f"unknown solver kind {self.kind!r}")
        if not self.tol > 0:
            raise ConfigurationError("tol must be positive")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be at least 1")


@dataclass
class SolveInfo:
    method: str
    iterations: int = 0
    residual: float = 0.0
    history: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# spatial operator


def apply_L(scheme, params: Params, lam, u: ProcaState) -> ProcaState:
    """Spatial right-hand side of the chosen scheme applied to ``u``.

    ``lam`` is a LambdaField (evaluated at ``u.t``), a scalar, or an
    interior-shaped array; inside a step it is the two-level average.
    """
    scheme = SchemeKind.parse(scheme)
    return canonical_rhs(u, params, lam, None if scheme is SchemeKind.SPS else diff2_array)


# ---------------------------------------------------------------------------
# mode-space symbols


def _axis_symbols(grid: GridSpec, h, axis):
    """Fourier symbols of diff1 and of the compact second difference."""
    h = np.asarray(h, dtype=float)
    dx = grid.spacing(axis)
    if grid.count(axis) == 1:
        zero = np.zeros_like(h)
        return zero.astype(complex), zero
    return 1j * np.sin(h * dx) / dx, -4.0 * np.sin(h * dx / 2) ** 2 / dx**2


def symbol_matrix(scheme, params: Params, lam: float, grid: GridSpec, h1, h2, h3) -> np.ndarray:
    """The 8x8 matrix M(h) with ``L e^{ih.x} = M(h) e^{ih.x}``, batched over ``h``."""
    scheme = SchemeKind.parse(scheme)
    h1, h2, h3 = np.broadcast_arrays(*(np.asarray(h, dtype=float) for h in (h1, h2, h3)))
    d, c = zip(*(_axis_symbols(grid, h, ax) for ax, h in zip((1, 2, 3), (h1, h2, h3))))
    p1, p2 = params.p1, params.p2

    def sec(i, m):
        if scheme is SchemeKind.SS and i == m:
            return c[i]
        return d[i] * d[m]

    M = np.zeros(h1.shape + (8, 8), dtype=complex)
    M[..., I_A0, I_PI0] = lam
    M[..., I_PI0, I_A0] = -p2
    lap = sec(0, 0) + sec(1, 1) + sec(2, 2)
    for k in range(3):
        M[..., I_A0, I_A[k]] = -d[k]
        M[..., I_PI0, I_PI[k]] = -d[k]
        M[..., I_A[k], I_PI[k]] = p1
        M[..., I_A[k], I_A0] = -d[k]
        M[..., I_PI[k], I_PI0] = -d[k]
        M[..., I_PI[k], I_A[k]] += p2 + lap / p1
        for m in range(3):
            M[..., I_PI[k], I_A[m]] -= sec(k, m) / p1
    return M


def _cayley_factors(M: np.ndarray, a: float, wavevectors):
    """Return ``(I - aM)^{-1}`` and ``G = (I - aM)^{-1}(I + aM)`` batched."""
    eye = np.eye(8)
    lhs = eye - a * M
    rhs = np.concatenate([np.broadcast_to(eye + a * M, M.shape),
                          np.broadcast_to(eye, M.shape)], axis=-1)
    try:
        sol = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        dets = np.abs(np.linalg.det(lhs)).reshape(-1)
        idx = int(np.argmin(dets))
        raise SingularModeError(np.stack([np.broadcast_to(w, M.shape[:-2]).reshape(-1)[idx]
                                          for w in wavevectors])) from None
    return sol[..., 8:], sol[..., :8]


def amplification_matrix(scheme, params: Params, lam, h, grid: GridSpec) -> np.ndarray:
    """Per-mode update matrix ``G(h)`` of one Crank-Nicolson step."""
    lam = as_lambda(lam)
    if not lam.is_constant:
        raise ConfigurationError("amplification matrix needs a constant lambda")
    M = symbol_matrix(scheme, params, lam.value, grid, *h)
    return _cayley_factors(M, params.cdt / 2, h)[1]


def rfft_wavevectors(grid: GridSpec):
    """Wavevectors of the real-FFT layout, broadcastable to ``(n3, n2, n1//2+1)``."""
    h1 = 2 * np.pi * sfft.rfftfreq(grid.n1, grid.dx1)[None, None, :]
    h2 = 2 * np.pi * sfft.fftfreq(grid.n2, grid.dx2)[None, :, None]
    h3 = 2 * np.pi * sfft.fftfreq(grid.n3, grid.dx3)[:, None, None]
    return h1, h2, h3


def full_wavevectors(grid: GridSpec):
    """All grid-representable wavevectors, broadcastable to ``(n3, n2, n1)``."""
    h1 = 2 * np.pi * sfft.fftfreq(grid.n1, grid.dx1)[None, None, :]
    h2 = 2 * np.pi * sfft.fftfreq(grid.n2, grid.dx2)[None, :, None]
    h3 = 2 * np.pi * sfft.fftfreq(grid.n3, grid.dx3)[:, None, None]
    return h1, h2, h3


# ---------------------------------------------------------------------------
# the step system


@dataclass
class LinearStepSystem:
    """One scheme with its parameters, gauge field and grid."""

    scheme: SchemeKind
    params: Params
    lam: LambdaField
    grid: GridSpec
    last_info: SolveInfo | None = field(default=None, repr=False)
    _factors: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.scheme = SchemeKind.parse(self.scheme)
        self.lam = as_lambda(self.lam)

    def lam_bar(self, t: float):
        """Two-level average of lambda over the step starting at ``t``."""
        if self.lam.is_constant:
            return self.lam.value
        return 0.5 * (self.lam.at(t, self.grid) + self.lam.at(t + self.params.dt, self.grid))

    def apply(self, u: ProcaState, lam=None) -> ProcaState:
        return apply_L(self.scheme, self.params, self.lam_bar(u.t) if lam is None else lam, u)

    def spectral_factors(self, lam_bar: float):
        key = float(lam_bar)
        if key not in self._factors:
            if len(self._factors) > 4:
                self._factors.clear()
            h = rfft_wavevectors(self.grid)
            M = symbol_matrix(self.scheme, self.params, key, self.grid, *h)
            P, G = _cayley_factors(M, self.params.cdt / 2, h)
            self._factors[key] = (P, G)
        return self._factors[key]


def update_residual(sys: LinearStepSystem, u: ProcaState, u_next: ProcaState) -> ProcaState:
    """``(u+ - u)/(c dt) - L((u+ + u)/2)``, the defect of the update equation."""
    avg = u.with_data(0.5 * (u_next.data + u.data))
    Lu = sys.apply(avg, sys.lam_bar(u.t))
    return u.with_data((u_next.data - u.data) / sys.params.cdt - Lu.data)


def relative_update_residual(sys: LinearStepSystem, u: ProcaState, u_next: ProcaState) -> float:
    """L-infinity update residual scaled by ``max|u| / (c dt)``."""
    r = update_residual(sys, u, u_next)
    scale = max(u.max_abs(), u_next.max_abs()) / abs(sys.params.cdt)
    return float(np.max(np.abs(r.interior))) / scale if scale > 0 else 0.0


def _mode_apply(mat: np.ndarray, x: np.ndarray, grid: GridSpec, workers) -> np.ndarray:
    """Apply per-mode 8x8 ``mat`` to the interior fields ``x`` (shape (8, n3, n2, n1))."""
    xh = sfft.rfftn(x, axes=(-3, -2, -1), workers=workers)
    yh = np.matmul(mat, np.moveaxis(xh, 0, -1)[..., None])[..., 0]
    return sfft.irfftn(np.moveaxis(yh, -1, 0), s=grid.interior_shape, axes=(-3, -2, -1),
                       workers=workers)


def solve_spectral(sys: LinearStepSystem, u: ProcaState, solver: SolverConfig | None = None) -> ProcaState:
    """Exact mode-space solve of one step; returns the advanced state."""
    solver = solver or SolverConfig()
    if not (sys.lam.is_constant or sys.lam.uniform):
        raise ConfigurationError("spectral solver requires a spatially uniform lambda")
    lam_bar = sys.lam_bar(u.t)
    P, G = sys.spectral_factors(lam_bar)
    grid = u.grid
    new = ProcaState.zeros(grid, dtype=u.dtype)
    new.interior[...] = _mode_apply(G, u.interior, grid, solver.workers)
    new.fill_ghosts()
    new.step_index, new.t = u.step_index + 1, u.t + sys.params.dt

    refine = solver.refine
    if refine is None:
        refine = 0 if u.dtype == np.float64 else 3
    for _ in range(refine):
        r = update_residual(sys, u, new)
        corr = _mode_apply(P, r.interior, grid, solver.workers)
        new.interior[...] -= sys.params.cdt * corr
        new.fill_ghosts()
    sys.last_info = SolveInfo("spectral", iterations=refine)
    return new


def solve_iterative(sys: LinearStepSystem, u: ProcaState, tol: float = 1e-12,
                    max_iter: int = 10000) -> ProcaState:
    """Matrix-free GMRES solve of ``(I - a L) u+ = (I + a L) u`` with ``a = c dt / 2``.

    Works in double precision regardless of the state dtype.
    """
    grid = u.grid
    a = sys.params.cdt / 2
    lam_bar = sys.lam_bar(u.t)
    shape = (8,) + grid.interior_shape
    n = int(np.prod(shape))

    def L_of(x):
        s = ProcaState.zeros(grid)
        s.interior[...] = x.reshape(shape)
        s.fill_ghosts()
        s.t = u.t
        return sys.apply(s, lam_bar).interior.reshape(-1)

    def matvec(x):
        x = np.asarray(x).reshape(-1)
        return x - a * L_of(x)

    x_old = np.asarray(u.interior, dtype=np.float64).reshape(-1)
    b = x_old + a * L_of(x_old)
    bnorm = np.linalg.norm(b)

    new = ProcaState.zeros(grid, dtype=u.dtype)
    new.step_index, new.t = u.step_index + 1, u.t + sys.params.dt
    if bnorm == 0:
        sys.last_info = SolveInfo("iterative", 0, 0.0, [])
        return new

    history = []
    restart = min(max_iter, 60)
    op = LinearOperator((n, n), matvec=matvec, dtype=np.float64)
    x, info = gmres(op, b, x0=x_old, rtol=tol, atol=0.0, restart=restart,
                    maxiter=math.ceil(max_iter / restart),
                    callback=lambda r: history.append(float(r)), callback_type="pr_norm")
    res = float(np.linalg.norm(b - matvec(x)) / bnorm)
    if info != 0 or res > 10 * tol:
        raise SolverError(f"GMRES did not converge (info={info}, residual={res:.3e})",
                          residual=res, history=history)
    new.interior[...] = x.reshape(shape)
    new.fill_ghosts()
    sys.last_info = SolveInfo("iterative", len(history), res, history)
    return new


def step(u: ProcaState, sys: LinearStepSystem, solver: SolverConfig | None = None) -> ProcaState:
    """Advance ``u`` by one time step of ``sys``."""
    solver = solver or SolverConfig()
    if solver.kind == "spectral":
        return solve_spectral(sys, u, solver)
    return solve_iterative(sys, u, solver.tol, solver.max_iter)
