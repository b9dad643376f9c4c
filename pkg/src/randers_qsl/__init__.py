"""Quantum speed limits for gates under a fixed Hilbert-Schmidt control budget.

The drift Hamiltonian acts as a wind on SU(N); the Randers navigation norm
turns curve lengths into traversal times. See :mod:`randers_qsl.qsl` for the
constant-control optimum and :mod:`randers_qsl.oracle` for the brute-force
check.
"""

from .errors import QslError, SchemaError, SingularFormError, ValidationError
from .hamiltonians import ControlProblem, PauliString, build_pauli, rho, uniform_superposition_check, validate
from .matcore import (
    LogBranch,
    enumerate_log_branches,
    expm_hermitian_generator,
    hilbert_schmidt,
    logm_special_unitary,
)
from .oracle import SearchReport, brute_force_min_time, first_hit_time, propagate
from .qsl import (
    QslResult,
    TargetGate,
    budget_quadratic_root,
    preset,
    t_opt_closed_form,
    t_opt_over_branches,
)
from .randers import ControlSchedule, NavigationData, curve_length, randers_norm_general, randers_norm_su

__version__ = "0.1.0"
