"""Structure-preserving and standard implicit schemes for the Proca field.

The two schemes share one canonical operator and differ only in the second
differences of the Pi_i equations; :mod:`proca_sps.diagnostics` checks the
discrete constraint and energy identities that separate them.
"""

__version__ = "0.1.0"

from .grid import GridSpec, ScalarField, diff1, diff2, diff_bwd, diff_fwd, fill_ghosts, l2_norm
from .model import LambdaField, Params, ProcaState, continuum_rhs
from .scheme import (LinearStepSystem, SchemeKind, SolverConfig, SolverError, apply_L,
                     solve_iterative, solve_spectral, step)
from .diagnostics import (collect, constraint_c1, constraint_c2, residual_id22, residual_id23,
                          residual_id25, ss_defect, total_hamiltonian)
from .initdata import paper_initial_state, verify_initial_constraints
from .analysis import (constraint_eigenvalues, convergence_order, mode_table,
                       stability_report)
from .runner import RunConfig, simulate
