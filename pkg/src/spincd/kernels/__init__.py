"""Backend selection for the tridiagonal propagator kernel.

Two interchangeable implementations of expm_tridiag_apply exist: a pure
NumPy one and an optional Cython extension.  The compiled backend is
preferred when importable; set SPINCD_KERNEL=python or =cython to force
a choice (forcing an unavailable backend raises).
"""

from __future__ import annotations

import os

from . import _expm_py

_BACKENDS = {"python": _expm_py.expm_tridiag_apply}

try:
    from . import _expm_cy
except ImportError:
    _expm_cy = None
else:
    _BACKENDS["cython"] = _expm_cy.expm_tridiag_apply


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def default_backend() -> str:
    env = os.environ.get("SPINCD_KERNEL")
    if env:
        if env not in _BACKENDS:
            raise ValueError(
                f"SPINCD_KERNEL={env!r} is not available; "
                f"choose from {available_backends()}")
        return env
    return "cython" if "cython" in _BACKENDS else "python"


def get_expm(backend: str | None = None):
    """Return the expm_tridiag_apply implementation for a backend name."""
    name = backend or default_backend()
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown kernel backend {name!r}; "
                         f"choose from {available_backends()}") from None
