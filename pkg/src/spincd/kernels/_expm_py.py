"""Pure NumPy Lanczos kernel for exp(-i dt H) psi with Hermitian
tridiagonal H.

The mapped annealing Hamiltonian is tridiagonal in the Dicke basis, so a
short Lanczos recursion (typically 4 to 10 vectors) applies one
propagator step in O(dim) work instead of the O(dim^3) of a dense
eigendecomposition.  The Krylov approximation error is controlled by the
standard last-component estimate beta_m |dt| |y_m| and the recursion is
stopped once it drops below `tol`.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigh_tridiagonal


def _small_expm(alpha, beta, dt):
    """exp(-i dt T) e_1 for the real symmetric tridiagonal Lanczos matrix."""
    w, z = eigh_tridiagonal(alpha, beta)
    return z @ (np.exp(-1j * dt * w) * z[0, :])


def expm_tridiag_apply(diag, offdiag, dt, psi, tol=1e-14, m_max=40):
    """Apply exp(-i dt H) to psi.

    Parameters
    ----------
    diag:
        Real main diagonal of H, length n.
    offdiag:
        Complex superdiagonal of H (H[i, i+1]), length n - 1; the
        subdiagonal is its conjugate.
    dt:
        Real time step.
    psi:
        Complex state vector, length n.

    Returns the propagated vector; the input is not modified.
    """
    nrm = np.linalg.norm(psi)
    if nrm == 0.0:
        return np.zeros_like(psi, dtype=complex)
    n = diag.shape[0]
    m_max = min(m_max, n)
    V = np.empty((m_max, n), dtype=complex)
    alpha = np.empty(m_max)
    beta = np.empty(m_max)
    V[0] = psi / nrm
    breakdown = max(1.0, np.abs(diag).max() + 2 * (np.abs(offdiag).max()
                                                   if n > 1 else 0.0)) * 1e-15
    for j in range(m_max):
        v = V[j]
        w = diag * v
        if n > 1:
            w[:-1] += offdiag * v[1:]
            w[1:] += np.conj(offdiag) * v[:-1]
        if j > 0:
            w -= beta[j - 1] * V[j - 1]
        a = np.vdot(v, w).real
        w -= a * v
        alpha[j] = a
        b = np.linalg.norm(w)
        beta[j] = b
        m = j + 1
        last = j == m_max - 1
        if b < breakdown or m >= 3 or last:
            y = _small_expm(alpha[:m], beta[:m - 1], dt)
            # breakdown means the Krylov space is invariant: result exact
            if b < breakdown or b * abs(dt) * abs(y[-1]) < tol:
                return nrm * (V[:m].T @ y)
            if last:
                raise RuntimeError(
                    f"Lanczos propagator did not converge within {m_max} "
                    f"vectors (residual estimate "
                    f"{b * abs(dt) * abs(y[-1]):.2e})")
        V[j + 1] = w / b
    raise AssertionError("unreachable")
