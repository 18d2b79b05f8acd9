"""Transverse-field sweep protocols with exact analytic derivatives.

A schedule is a polynomial in the normalized time s = t / t_f, scaled by
the coupling J.  The default quintic profile

    Gamma(s) = J * (48 s^5 - 120 s^4 + 100 s^3 - 30 s^2 + 2)

starts at 2J, passes through the critical value J at s = 1/2 with
vanishing first and second derivative, and ends at 0, again with zero
slope.  The stationary endpoints and midpoint make the counter-diabatic
field switch off at s = 0, 1/2 and 1, and the cubic flatness at the
midpoint controls how fast the critical point is crossed.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from numpy.polynomial import polynomial as P

_PROFILES = {
    # ascending powers of s, in units of J
    "quintic": (2.0, 0.0, -30.0, 100.0, -120.0, 48.0),
    "linear": (2.0, -2.0),
}


@dataclasses.dataclass(frozen=True)
class Schedule:
    """Polynomial field profile over one sweep.

    Parameters
    ----------
    t_f:
        Total operation time (positive).
    kind:
        "quintic", "linear", or "custom".
    coefficients:
        Ascending polynomial coefficients in s, units of J.  Required for
        kind="custom", ignored otherwise.
    """

    t_f: float
    kind: str = "quintic"
    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.t_f > 0:
            raise ValueError(f"operation time must be positive, got {self.t_f}")
        if self.kind in _PROFILES:
            coef = _PROFILES[self.kind]
        elif self.kind == "custom":
            coef = tuple(float(c) for c in self.coefficients)
            if not coef:
                raise ValueError("custom schedule needs coefficients")
            if not np.isfinite(coef).all():
                raise ValueError("schedule coefficients must be finite")
        else:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "_dcoef", tuple(P.polyder(coef)))

    def gamma(self, s, J=1.0):
        """Field value Gamma at normalized time s (scalar or array)."""
        return J * P.polyval(_check_s(s), self.coefficients)

    def gamma_dot(self, s, J=1.0):
        """Time derivative dGamma/dt at normalized time s.

        The polynomial is differentiated in s; the chain rule supplies
        the 1/t_f factor.  No finite differencing is involved.
        """
        return (J / self.t_f) * P.polyval(_check_s(s), self._dcoef)

    def critical_expansion_order(self, tol=1e-12):
        """Leading power of (s - 1/2) in Gamma(s) - Gamma(1/2).

        3 for the quintic profile, 1 for the linear one.  The order sets
        the scaling of the counter-diabatic field near the critical
        point: expansion order p gives |theta_dot| ~ |s - 1/2|^{(p-1)/2}
        in the h -> +0 limit.
        """
        # expand around s = 1/2 by composing with (u + 1/2)
        poly = np.polynomial.Polynomial(self.coefficients)
        expanded = poly(np.polynomial.Polynomial((0.5, 1.0))).coef
        scale = max(np.abs(expanded).max(), 1.0)
        for k in range(1, len(expanded)):
            if abs(expanded[k]) > tol * scale:
                return k
        raise ValueError("schedule is constant around s = 1/2")


def _check_s(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < -1e-9) or np.any(s > 1 + 1e-9):
        raise ValueError("normalized time s must lie in [0, 1]")
    out = np.clip(s, 0.0, 1.0)
    return out if out.ndim else float(out)
