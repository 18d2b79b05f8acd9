"""Counter-diabatic driving of the infinite-range Ising model.

The all-to-all model conserves total spin, so annealing an N-spin chain
reduces to one collective spin S = N/2 in an (N+1)-dimensional space.
This package solves the mean-field self-consistency for the local
counter-diabatic field, propagates the full collective dynamics with and
without the assist, and cross-checks the field against a variational
gauge ansatz and an exact small-N oracle.
"""

from .diagnostics import run_all as run_diagnostics
from .dynamics import (ASSIST_MODES, EXACT_ORACLE_CAP, IntegrationError,
                       SpectralError, ThetaTable, TrajectoryRecord,
                       default_steps, evolve, exact_cd, fidelity,
                       ground_state, reference_adiabat)
from .kernels import available_backends, default_backend, get_expm
from .meanfield import (MeanFieldPoint, ModelParams, SelfConsistencyError,
                        cd_field, limit_mz_h0, limit_theta_dot_h0, mz_dot,
                        solve_mz, trace_meanfield)
from .schedule import Schedule
from .spin_ops import (SpinOperatorSet, SpinSize, assemble_hamiltonian,
                       build_operators)
from .twolevel import (TwoLevelEigen, TwoLevelFields, TwoLevelTrace,
                       eigensystem, evolve_two_level, random_protocol,
                       theta_dot, unwrap_theta)
from .variational import (FieldComparison, alpha_from_fields, compare_fields,
                          gauge_matrix, trace_norm_G, variational_alpha)

__version__ = "0.1.0"

__all__ = [
    "ASSIST_MODES",
    "EXACT_ORACLE_CAP",
    "FieldComparison",
    "IntegrationError",
    "MeanFieldPoint",
    "ModelParams",
    "Schedule",
    "SelfConsistencyError",
    "SpectralError",
    "SpinOperatorSet",
    "SpinSize",
    "ThetaTable",
    "TrajectoryRecord",
    "TwoLevelEigen",
    "TwoLevelFields",
    "TwoLevelTrace",
    "alpha_from_fields",
    "assemble_hamiltonian",
    "available_backends",
    "build_operators",
    "cd_field",
    "compare_fields",
    "default_backend",
    "default_steps",
    "eigensystem",
    "evolve",
    "evolve_two_level",
    "exact_cd",
    "fidelity",
    "gauge_matrix",
    "get_expm",
    "ground_state",
    "limit_mz_h0",
    "limit_theta_dot_h0",
    "mz_dot",
    "random_protocol",
    "reference_adiabat",
    "run_diagnostics",
    "solve_mz",
    "theta_dot",
    "trace_meanfield",
    "trace_norm_G",
    "unwrap_theta",
    "variational_alpha",
    "__version__",
]
