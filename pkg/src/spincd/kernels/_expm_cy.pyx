# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Lanczos kernel for exp(-i dt H) psi with Hermitian
tridiagonal H.

Mirror of the pure NumPy backend in _expm_py: identical algorithm,
convergence estimate, and tolerances, with the recursion written as C
loops and the small tridiagonal eigenproblem solved in-place by LAPACK
dsteqr.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, fabs, sin, sqrt
from scipy.linalg.cython_lapack cimport dsteqr

cnp.import_array()


cdef int _small_expm(double* alpha, double* beta, double dt, int m,
                     double* d, double* e, double* z, double* work,
                     double complex* y) except -1:
    """y = exp(-i dt T) e_1 for the m x m symmetric tridiagonal T."""
    cdef int i, k, info = 0, n = m
    cdef char compz = b'I'
    cdef double c, s, w0
    for i in range(m):
        d[i] = alpha[i]
    for i in range(m - 1):
        e[i] = beta[i]
    dsteqr(&compz, &n, d, e, z, &n, work, &info)
    if info != 0:
        raise RuntimeError(f"dsteqr failed with info={info}")
    # Fortran order: eigenvector k occupies z[k*m : (k+1)*m]
    for i in range(m):
        y[i] = 0
    for k in range(m):
        w0 = dt * d[k]
        c = cos(w0)
        s = -sin(w0)
        for i in range(m):
            y[i] = y[i] + z[k * m] * (c + 1j * s) * z[k * m + i]
    return 0


def expm_tridiag_apply(double[::1] diag, double complex[::1] offdiag,
                       double dt, double complex[::1] psi,
                       double tol=1e-14, int m_max=40):
    """Apply exp(-i dt H) to psi; same contract as the NumPy backend."""
    cdef int n = diag.shape[0]
    if m_max > n:
        m_max = n
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] V_arr = \
        np.empty((m_max, n), dtype=np.complex128)
    cdef double complex[:, ::1] V = V_arr
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = \
        np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] w = np.empty(n, dtype=np.complex128)
    cdef double complex[::1] y = np.empty(m_max, dtype=np.complex128)
    cdef double[::1] alpha = np.empty(m_max)
    cdef double[::1] beta = np.empty(m_max)
    cdef double[::1] sd = np.empty(m_max)
    cdef double[::1] se = np.empty(max(m_max - 1, 1))
    cdef double[::1] sz = np.empty(m_max * m_max)
    cdef double[::1] swork = np.empty(max(2 * m_max - 2, 1))
    cdef int i, j, k, m
    cdef double a, b, nrm2, nrm, breakdown, amax, umax
    cdef double complex acc
    cdef bint last

    nrm2 = 0.0
    for i in range(n):
        nrm2 += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
    nrm = sqrt(nrm2)
    if nrm == 0.0:
        return out
    amax = 0.0
    for i in range(n):
        if fabs(diag[i]) > amax:
            amax = fabs(diag[i])
    umax = 0.0
    for i in range(n - 1):
        b = sqrt(offdiag[i].real * offdiag[i].real
                 + offdiag[i].imag * offdiag[i].imag)
        if b > umax:
            umax = b
    breakdown = (amax + 2.0 * umax) * 1e-15
    if breakdown < 1e-15:
        breakdown = 1e-15

    for i in range(n):
        V[0, i] = psi[i] / nrm

    for j in range(m_max):
        for i in range(n):
            w[i] = diag[i] * V[j, i]
        for i in range(n - 1):
            w[i] = w[i] + offdiag[i] * V[j, i + 1]
            w[i + 1] = w[i + 1] + offdiag[i].conjugate() * V[j, i]
        if j > 0:
            for i in range(n):
                w[i] = w[i] - beta[j - 1] * V[j - 1, i]
        a = 0.0
        for i in range(n):
            a += V[j, i].real * w[i].real + V[j, i].imag * w[i].imag
        for i in range(n):
            w[i] = w[i] - a * V[j, i]
        alpha[j] = a
        b = 0.0
        for i in range(n):
            b += w[i].real * w[i].real + w[i].imag * w[i].imag
        b = sqrt(b)
        beta[j] = b
        m = j + 1
        last = j == m_max - 1
        if b < breakdown or m >= 3 or last:
            _small_expm(&alpha[0], &beta[0], dt, m,
                        &sd[0], &se[0], &sz[0], &swork[0], &y[0])
            if b < breakdown or b * fabs(dt) * abs(y[m - 1]) < tol:
                for i in range(n):
                    acc = 0
                    for k in range(m):
                        acc = acc + V[k, i] * y[k]
                    out[i] = nrm * acc
                return out
            if last:
                raise RuntimeError(
                    f"Lanczos propagator did not converge within {m_max} "
                    f"vectors (residual estimate "
                    f"{b * fabs(dt) * abs(y[m - 1]):.2e})")
        for i in range(n):
            V[j + 1, i] = w[i] / b

    raise AssertionError("unreachable")
