"""Collective spin operators in the maximal-spin (Dicke) sector.

N spins coupled all-to-all conserve the total spin, so the dynamics of a
state initialized in the maximal sector S = N/2 lives in only 2S + 1 = N + 1
dimensions.  This module builds the dense S^x, S^y, S^z matrices in the
|S, m> basis and assembles the mapped annealing Hamiltonian

    H = -(J/S) (S^z)^2 - 2 Gamma S^x - 2 h S^z + 2 theta_dot S^y.

Basis ordering is fixed to descending m = S, S-1, ..., -S, so the
Gamma = 0, h > 0 ground state is the first basis vector.  All modules
share this convention.
"""

from __future__ import annotations

import dataclasses

import numpy as np


@dataclasses.dataclass(frozen=True)
class SpinSize:
    """Collective spin dimensions for N spins: S = N/2, dim = N + 1."""

    n_spins: int
    s: float = dataclasses.field(init=False)
    dim: int = dataclasses.field(init=False)

    def __post_init__(self):
        n = self.n_spins
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool) or n < 1:
            raise ValueError(f"n_spins must be a positive integer, got {n!r}")
        object.__setattr__(self, "n_spins", int(n))
        object.__setattr__(self, "s", n / 2.0)
        object.__setattr__(self, "dim", int(n) + 1)


@dataclasses.dataclass(frozen=True)
class SpinOperatorSet:
    """Dense spin matrices in the Dicke basis, read-only after construction."""

    size: SpinSize
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    sz2: np.ndarray
    anticomm_zx: np.ndarray


def m_values(size: SpinSize) -> np.ndarray:
    """S^z eigenvalues in basis order (descending): S, S-1, ..., -S."""
    return size.s - np.arange(size.dim)


def ladder_elements(size: SpinSize) -> np.ndarray:
    """Nonzero matrix elements <m+1|S+|m> for m = S-1, ..., -S.

    Entry i couples basis states i-1 and i and equals
    sqrt(S(S+1) - m_i (m_i + 1)) with m_i = S - i.
    """
    m = m_values(size)[1:]
    return np.sqrt(size.s * (size.s + 1) - m * (m + 1))


def build_operators(size: SpinSize) -> SpinOperatorSet:
    """Construct S^x, S^y, S^z, (S^z)^2 and {S^z, S^x} for the given size."""
    if size.dim < 2:
        raise ValueError("need at least one spin (dim >= 2)")
    m = m_values(size)
    c = ladder_elements(size)
    dim = size.dim
    sp = np.zeros((dim, dim), dtype=complex)
    sp[np.arange(dim - 1), np.arange(1, dim)] = c
    sm = sp.conj().T
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    sz = np.diag(m.astype(complex))
    sz2 = np.diag((m * m).astype(complex))
    anticomm_zx = sz @ sx + sx @ sz
    ops = SpinOperatorSet(size=size, sx=sx, sy=sy, sz=sz, sz2=sz2,
                          anticomm_zx=anticomm_zx)
    for a in (ops.sx, ops.sy, ops.sz, ops.sz2, ops.anticomm_zx):
        a.setflags(write=False)
    return ops


def assemble_hamiltonian(ops: SpinOperatorSet, params, gamma: float,
                         theta_dot: float = 0.0) -> np.ndarray:
    """Mapped annealing Hamiltonian for the given fields.

    Returns -(J/S) (S^z)^2 - 2 gamma S^x - 2 h S^z + 2 theta_dot S^y.
    With theta_dot = 0 this is the bare (unassisted) Hamiltonian.
    """
    if ops.size.dim != params.n_spins + 1:
        raise ValueError(
            f"operator set is for N={ops.size.n_spins}, "
            f"params have N={params.n_spins}")
    J, h, s = params.coupling, params.field_h, ops.size.s
    out = (-(J / s)) * ops.sz2 - (2.0 * gamma) * ops.sx - (2.0 * h) * ops.sz
    if theta_dot != 0.0:
        out = out + (2.0 * theta_dot) * ops.sy
    return out
