"""Mode analysis: constraint eigenvalues, CFL bookkeeping, convergence orders
and spectral radii of the per-mode amplification matrices."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .grid import GridSpec
from .model import LambdaField, Params, as_lambda
from .scheme import (ConfigurationError, SchemeKind, _axis_symbols, _cayley_factors,
                     full_wavevectors, symbol_matrix)


class NonMonotoneWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ConstraintModeReport:
    """Constraint propagation for one wavevector.

    The 2x2 system ``d/dx0 (C1, C2) = [[0, 1], [-(p2 lam + h.h), 0]] (C1, C2)``
    has eigenvalues ``+-i sqrt(disc)`` for ``disc >= 0`` and ``+-sqrt(-disc)``
    otherwise; the latter is a growing constraint mode.
    """

    h: tuple[float, float, float]
    discriminant: float
    eigenvalues: tuple[complex, complex]
    growing: bool


def constraint_eigenvalues(h, p2: float, lam: float) -> ConstraintModeReport:
    h = tuple(float(v) for v in np.broadcast_to(np.asarray(h, dtype=float), (3,)))
    disc = p2 * lam + sum(v * v for v in h)
    if disc >= 0:
        r = math.sqrt(disc)
        eig = (complex(0.0, r), complex(0.0, -r))
    else:
        r = math.sqrt(-disc)
        eig = (complex(r, 0.0), complex(-r, 0.0))
    return ConstraintModeReport(h, disc, eig, disc < 0)


def cfl_timestep(grid: GridSpec, cfl: float, c: float = 1.0) -> float:
    """``dt = cfl * min(dx_i) / c`` over axes with more than one cell."""
    if not cfl > 0:
        raise ValueError("cfl must be positive")
    active = [grid.spacing(ax) for ax in (1, 2, 3) if grid.count(ax) > 1]
    if not active:
        active = list(grid.spacings)
    return cfl * min(active) / c


def convergence_order(series: Mapping[float, float]) -> float:
    """Observed order from errors keyed by grid spacing.

    Returns the order of the two finest spacings,
    ``log(e_coarse / e_fine) / log(dx_coarse / dx_fine)`` (log2 of the error
    ratio when the spacing halves). Warns if the errors do not decrease
    monotonically under refinement.
    """
    if len(series) < 2:
        raise ValueError("need at least two resolutions")
    items = sorted(series.items(), key=lambda kv: -kv[0])
    errs = [e for _, e in items]
    if any(e <= 0 for e in errs):
        raise ValueError("errors must be positive")
    orders = [math.log(e0 / e1) / math.log(h0 / h1)
              for (h0, e0), (h1, e1) in zip(items, items[1:])]
    if any(e1 > e0 for e0, e1 in zip(errs, errs[1:])):
        warnings.warn("error series is not monotone under refinement", NonMonotoneWarning,
                      stacklevel=2)
    return orders[-1]


@dataclass
class StabilityReport:
    scheme: SchemeKind
    wavevectors: np.ndarray  # (n_modes, 3)
    radii: np.ndarray  # (n_modes,)

    @property
    def max_radius(self) -> float:
        return float(np.max(self.radii))

    @property
    def argmax_mode(self) -> tuple[float, float, float]:
        return tuple(float(v) for v in self.wavevectors[int(np.argmax(self.radii))])

    @property
    def max_growth_rate(self) -> float:
        """Largest ``log(radius) / (c dt)``: the e-folding rate per unit x0."""
        return float(np.max(np.log(self.radii)))

    def summary(self, cdt: float) -> dict:
        return {
            "scheme": self.scheme.value,
            "max_radius": self.max_radius,
            "argmax_wavevector": list(self.argmax_mode),
            "max_growth_rate": self.max_growth_rate / cdt,
            "n_modes": int(self.radii.size),
        }


def stability_report(scheme, params: Params, lam, grid: GridSpec) -> StabilityReport:
    """Spectral radius of ``G(h)`` for every grid-representable wavevector."""
    scheme = SchemeKind.parse(scheme)
    lam = as_lambda(lam)
    if not lam.is_constant:
        raise ConfigurationError("stability report needs a constant lambda")
    h = np.broadcast_arrays(*full_wavevectors(grid))
    M = symbol_matrix(scheme, params, lam.value, grid, *h)
    G = _cayley_factors(M, params.cdt / 2, h)[1]
    radii = np.max(np.abs(np.linalg.eigvals(G)), axis=-1)
    wv = np.stack([a.reshape(-1) for a in h], axis=-1)
    return StabilityReport(scheme, wv, radii.reshape(-1))


def modified_wavevector(grid: GridSpec, h) -> np.ndarray:
    """Wavevector seen by the central first difference, ``sin(h dx) / dx`` per axis."""
    h = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in h))
    return np.stack([np.imag(_axis_symbols(grid, hv, ax)[0]) for ax, hv in zip((1, 2, 3), h)],
                    axis=-1)


def mode_table(params: Params, lam: LambdaField | float, grid: GridSpec) -> dict:
    """Per-mode constraint analysis under both readings of the wavevector,
    plus the amplification radius of each scheme."""
    lam_val = as_lambda(lam).value
    h = np.broadcast_arrays(*full_wavevectors(grid))
    wv = np.stack([a.reshape(-1) for a in h], axis=-1)
    hm = modified_wavevector(grid, [a.reshape(-1) for a in h])
    p2l = params.p2 * lam_val
    table = {
        "h": wv,
        "discriminant": p2l + np.sum(wv * wv, axis=-1),
        "discriminant_modified": p2l + np.sum(hm * hm, axis=-1),
    }
    for kind in SchemeKind:
        table[f"radius_{kind.value}"] = stability_report(kind, params, lam, grid).radii
    return table
