"""Constraints, discrete Hamiltonians and residuals of the discrete identities.

Everything is evaluated on the interior index set D. Step residuals take two
consecutive accepted states ``u_prev`` (level l) and ``u_next`` (level l+1).
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass, fields

import numpy as np

from .grid import (ScalarField, diff1_array, diff2_array, diff_bwd_array, diff_fwd_array,
                   fill_ghosts, l2_norm, linf_norm)
from .model import I_A, I_A0, I_PI, I_PI0, LambdaField, Params, ProcaState
from .scheme import SchemeKind


class NoGuaranteeWarning(UserWarning):
    """The requested identity is not proven for this scheme."""


def _lam_at(lam, u: ProcaState):
    if isinstance(lam, LambdaField):
        return lam.at(u.t, u.grid)
    return lam


def _field(u: ProcaState, values: np.ndarray) -> ScalarField:
    return ScalarField(u.grid, values)


def constraint_c1(u: ProcaState) -> ScalarField:
    """C1 = Pi0 (a copy)."""
    return u.Pi0.copy()


def constraint_c2(u: ProcaState, params: Params) -> ScalarField:
    """C2 = -p2 A0 - sum_i diff1_i Pi_i, the discrete Gauss law."""
    g, d = u.grid, u.data
    div_pi = (diff1_array(d[I_PI[0]], g, 1) + diff1_array(d[I_PI[1]], g, 2)
              + diff1_array(d[I_PI[2]], g, 3))
    return _field(u, -params.p2 * d[I_A0] - div_pi)


def _common_density(u, params, lam):
    """Terms shared by both densities: lambda, momenta, A0 couplings and masses."""
    g, d = u.grid, u.data
    p1, p2 = params.p1, params.p2
    inner = g.interior
    A0, Pi0 = d[I_A0][inner], d[I_PI0][inner]
    div_A = sum(diff1_array(d[I_A[k]], g, k + 1)[inner] for k in range(3))
    h = 0.5 * lam * Pi0 * Pi0 - Pi0 * div_A + 0.5 * p2 * A0 * A0
    for k in range(3):
        Pk, Ak = d[I_PI[k]][inner], d[I_A[k]][inner]
        h = h + 0.5 * p1 * Pk * Pk - Pk * diff1_array(d[I_A0], g, k + 1)[inner] - 0.5 * p2 * Ak * Ak
    return h


def _gradient_terms(u, p1, op, weight):
    """weight/p1 * sum_{m,n} [(op_m A^n)^2 - (op_n A^m)(op_m A^n)] on D."""
    g, d = u.grid, u.data
    inner = g.interior
    grad = [[op(d[I_A[n]], g, m + 1)[inner] for n in range(3)] for m in range(3)]
    total = 0.0
    for m in range(3):
        for n in range(3):
            total = total + grad[m][n] * grad[m][n] - grad[n][m] * grad[m][n]
    return weight / p1 * total


def _density_to_field(u, h) -> ScalarField:
    return ScalarField.from_interior(u.grid, np.asarray(h, dtype=u.dtype))


def hamiltonian_density_sps(u: ProcaState, params: Params, lam) -> ScalarField:
    """Pointwise energy density of the structure-preserving scheme."""
    lam = _lam_at(lam, u)
    h = _common_density(u, params, lam) + _gradient_terms(u, params.p1, diff1_array, 0.5)
    return _density_to_field(u, h)


def hamiltonian_density_ss(u: ProcaState, params: Params, lam) -> ScalarField:
    """Energy density of the standard scheme (one-sided difference gradients)."""
    lam = _lam_at(lam, u)
    h = (_common_density(u, params, lam)
         + _gradient_terms(u, params.p1, diff_fwd_array, 0.25)
         + _gradient_terms(u, params.p1, diff_bwd_array, 0.25))
    return _density_to_field(u, h)


def total_hamiltonian(u: ProcaState, params: Params, lam, kind="sps") -> float:
    """H_C = sum_D density * dV for the density matching ``kind``."""
    kind = SchemeKind.parse(kind)
    dens = hamiltonian_density_sps if kind is SchemeKind.SPS else hamiltonian_density_ss
    return float(np.sum(dens(u, params, lam).interior) * u.grid.dV)


def residual_id22(u_prev: ProcaState, u_next: ProcaState, params: Params) -> ScalarField:
    """(C1+ - C1)/(c dt) - (C2+ + C2)/2; vanishes for both schemes."""
    cdt = params.cdt
    c1p, c1n = u_prev.data[I_PI0], u_next.data[I_PI0]
    c2p = constraint_c2(u_prev, params).values
    c2n = constraint_c2(u_next, params).values
    return _field(u_prev, (c1n - c1p) / cdt - 0.5 * (c2n + c2p))


def residual_id23(u_prev: ProcaState, u_next: ProcaState, params: Params, lam) -> ScalarField:
    """Defect of the discrete C2 propagation law.

    Vanishes to solver accuracy for SPS; for SS it equals :func:`ss_defect`.
    """
    g = u_prev.grid
    cdt = params.cdt
    lam_p, lam_n = _lam_at(lam, u_prev), _lam_at(lam, u_next)
    c1_sum = u_prev.data[I_PI0] + u_next.data[I_PI0]
    c2p = constraint_c2(u_prev, params).values
    c2n = constraint_c2(u_next, params).values
    lap_c1 = sum(diff1_array(diff1_array(c1_sum, g, i), g, i) for i in (1, 2, 3))

    out = ScalarField.zeros(g, dtype=u_prev.dtype)
    inner = g.interior
    rhs = (-0.25 * params.p2 * (lam_p + lam_n) * c1_sum[inner] + 0.5 * lap_c1[inner])
    out.interior[...] = (c2n[inner] - c2p[inner]) / cdt - rhs
    return fill_ghosts(out)


def ss_defect(u_prev: ProcaState, u_next: ProcaState, params: Params) -> ScalarField:
    """Constraint source injected by the standard scheme each step.

    ``-(1/2p1) sum_{i,m} (d1_i d2_mm - d1_m d2_mi)(A^i+ + A^i)`` with the
    standard second differences; only ``i != m`` terms survive.
    """
    g = u_prev.grid
    total = np.zeros_like(u_prev.data[0])
    for i in (1, 2, 3):
        s_i = u_prev.data[I_A[i - 1]] + u_next.data[I_A[i - 1]]
        for m in (1, 2, 3):
            if m == i:
                continue
            total += (diff1_array(diff2_array(s_i, g, m, m), g, i)
                      - diff1_array(diff2_array(s_i, g, m, i), g, m))
    return _field(u_prev, -total / (2 * params.p1))


def _id25(u_prev, u_next, params, lam, kind) -> float:
    cdt = params.cdt
    h_prev = total_hamiltonian(u_prev, params, lam, kind)
    h_next = total_hamiltonian(u_next, params, lam, kind)
    lam_p, lam_n = _lam_at(lam, u_prev), _lam_at(lam, u_next)
    inner = u_prev.grid.interior
    c1p, c1n = u_prev.data[I_PI0][inner], u_next.data[I_PI0][inner]
    dlam = (np.asarray(lam_n) - np.asarray(lam_p)) / cdt
    source = float(np.sum(0.25 * dlam * (c1n * c1n + c1p * c1p)) * u_prev.grid.dV)
    return (h_next - h_prev) / cdt - source


def residual_id25(u_prev: ProcaState, u_next: ProcaState, params: Params, lam, kind="sps") -> float:
    """Residual of the discrete energy law.

    ``(H+ - H)/(c dt) - sum_D (dV/4) ((lam+ - lam)/(c dt)) (C1+^2 + C1^2)``;
    boundary terms vanish on the periodic grid. The law is proven for the
    SPS density only; for SS the value is returned with a warning.
    """
    kind = SchemeKind.parse(kind)
    if kind is not SchemeKind.SPS:
        warnings.warn("energy identity has no guarantee for the standard scheme",
                      NoGuaranteeWarning, stacklevel=2)
    return _id25(u_prev, u_next, params, lam, kind)


@dataclass
class DiagnosticsRecord:
    """Per-step scalars. Step residuals are ``None`` on the initial row."""

    step: int
    time: float
    c1_l2: float
    c2_l2: float
    hc: float
    hc_rel_err: float
    id22_res: float | None = None
    id23_res: float | None = None
    id25_res: float | None = None
    ss_defect_l2: float | None = None
    solver_iters: int | None = None
    max_abs_A1: float = 0.0
    max_abs: float = 0.0

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_dict(self) -> dict:
        return asdict(self)


def relative_energy_error(hc: float, hc0: float) -> float:
    if abs(hc0) < 1e-14:
        return abs(hc - hc0)
    return abs(hc - hc0) / abs(hc0)


def collect(u_prev: ProcaState | None, u_next: ProcaState, params: Params, lam,
            kind="sps", hc0: float | None = None, solver_iters: int | None = None) -> DiagnosticsRecord:
    """Assemble one record for the state ``u_next``.

    With ``u_prev=None`` (the initial row) no step residuals are computed.
    """
    kind = SchemeKind.parse(kind)
    hc = total_hamiltonian(u_next, params, lam, kind)
    rec = DiagnosticsRecord(
        step=u_next.step_index,
        time=u_next.t,
        c1_l2=l2_norm(u_next.Pi0),
        c2_l2=l2_norm(constraint_c2(u_next, params)),
        hc=hc,
        hc_rel_err=relative_energy_error(hc, hc if hc0 is None else hc0),
        solver_iters=solver_iters,
        max_abs_A1=linf_norm(u_next.A[0]),
        max_abs=u_next.max_abs(),
    )
    if u_prev is not None:
        rec.id22_res = linf_norm(residual_id22(u_prev, u_next, params))
        rec.id23_res = linf_norm(residual_id23(u_prev, u_next, params, lam))
        rec.id25_res = abs(_id25(u_prev, u_next, params, lam, kind))
        if kind is SchemeKind.SS:
            rec.ss_defect_l2 = l2_norm(ss_defect(u_prev, u_next, params))
    return rec
