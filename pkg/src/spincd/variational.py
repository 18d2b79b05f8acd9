"""Variational local counter-diabatic field from a single-axis gauge ansatz.

The approximate gauge potential A = alpha * sum_i sigma_i^y (collective
form 2 alpha S^y) is fixed by minimizing the Hilbert-Schmidt norm of

    G = dH/dt + i [A, H]
      = -2 (dGamma/dt - 2 h alpha) S^x + (2 J alpha / S) {S^z, S^x}
        - 4 Gamma alpha S^z,

whose squared trace has the closed form

    Tr G^2 = (4/3) (dGamma/dt - 2 h alpha)^2 S(S+1)(2S+1)
           + (1/15) (2 J alpha / S)^2 S(S+1)(2S+1)(2S-1)(2S+3)
           + (1/3) (4 Gamma alpha)^2 S(S+1)(2S+1).

The quadratic minimizer is

    alpha = (1/2) h dGamma/dt
            / (h^2 + Gamma^2 + (J/S)^2 (2S-1)(2S+3) / 20),

which reduces to the exact two-level counter-diabatic field for J = 0 or
S = 1/2.  Because the numerator carries the bare h rather than the
self-consistent J m + h, this local field is strongly suppressed for
small h and does not reproduce the mean-field counter-diabatic field.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .meanfield import ModelParams, solve_trace_arrays
from .schedule import Schedule
from .spin_ops import SpinOperatorSet


def _casimir_factors(s: float):
    sp = s * (s + 1.0) * (2.0 * s + 1.0)
    corr = (2.0 * s - 1.0) * (2.0 * s + 3.0)
    return sp, corr


def trace_norm_G(params: ModelParams, gamma, gamma_dot, alpha):
    """Closed form of Tr G^2 for the single-axis gauge ansatz."""
    J, h, s = params.coupling, params.field_h, params.spin
    sp, corr = _casimir_factors(s)
    g = np.asarray(gamma, dtype=float)
    gd = np.asarray(gamma_dot, dtype=float)
    a = np.asarray(alpha, dtype=float)
    out = ((4.0 / 3.0) * (gd - 2.0 * h * a) ** 2 * sp
           + (1.0 / 15.0) * (2.0 * J * a / s) ** 2 * sp * corr
           + (1.0 / 3.0) * (4.0 * g * a) ** 2 * sp)
    return out if out.ndim else float(out)


def trace_norm_G_gradient(params: ModelParams, gamma, gamma_dot, alpha):
    """d(Tr G^2)/d alpha, for stationarity checks of the minimizer."""
    J, h, s = params.coupling, params.field_h, params.spin
    sp, corr = _casimir_factors(s)
    g = np.asarray(gamma, dtype=float)
    gd = np.asarray(gamma_dot, dtype=float)
    a = np.asarray(alpha, dtype=float)
    out = (-(16.0 / 3.0) * h * (gd - 2.0 * h * a) * sp
           + (8.0 / 15.0) * (J / s) ** 2 * a * sp * corr
           + (32.0 / 3.0) * g * g * a * sp)
    return out if out.ndim else float(out)


def alpha_from_fields(J: float, h: float, spin: float, gamma, gamma_dot):
    """Minimizer formula from raw fields.

    Unlike ModelParams this accepts J = 0, where the interaction
    correction vanishes and alpha reduces to the two-level
    counter-diabatic field at static h; the same reduction happens for
    spin = 1/2 at any J.
    """
    if spin <= 0:
        raise ValueError(f"spin must be positive, got {spin}")
    _, corr = _casimir_factors(spin)
    g = np.asarray(gamma, dtype=float)
    gd = np.asarray(gamma_dot, dtype=float)
    denom = h * h + g * g + (J / spin) ** 2 * corr / 20.0
    if np.any(denom <= 0.0):
        raise ValueError("gauge minimizer undefined: h = Gamma = 0 "
                         "with vanishing interaction correction")
    out = 0.5 * (h * gd) / denom
    return out if out.ndim else float(out)


def variational_alpha(params: ModelParams, gamma, gamma_dot):
    """Unique minimizer of Tr G^2 over the ansatz coefficient alpha."""
    return alpha_from_fields(params.coupling, params.field_h, params.spin,
                             gamma, gamma_dot)


def gauge_matrix(ops: SpinOperatorSet, params: ModelParams, gamma: float,
                 gamma_dot: float, alpha: float) -> np.ndarray:
    """Explicit G matrix, for brute-force checks of the trace formula."""
    J, h, s = params.coupling, params.field_h, ops.size.s
    return (-2.0 * (gamma_dot - 2.0 * h * alpha) * ops.sx
            + (2.0 * J * alpha / s) * ops.anticomm_zx
            - 4.0 * gamma * alpha * ops.sz)


@dataclasses.dataclass
class FieldComparison:
    """Variational alpha and mean-field theta_dot on a shared s grid."""

    s: np.ndarray
    alpha: np.ndarray
    theta_dot: np.ndarray
    ratio: np.ndarray


def compare_fields(params: ModelParams, schedule: Schedule,
                   n_points: int = 201) -> FieldComparison:
    """Evaluate both counter-diabatic fields along a schedule.

    The ratio column alpha / theta_dot is NaN where the mean-field
    theta_dot vanishes (both fields share the zeros of dGamma/dt, so the
    endpoints and midpoint of the quintic schedule).
    """
    s, g, gd, _, _, td, _ = solve_trace_arrays(params, schedule, n_points)
    alpha = np.asarray(variational_alpha(params, g, gd), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(td != 0.0, alpha / np.where(td == 0.0, 1.0, td),
                         np.nan)
    return FieldComparison(s=s, alpha=alpha, theta_dot=td, ratio=ratio)
