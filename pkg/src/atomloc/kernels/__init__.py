"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly, unless the environment
variable ``ATOMLOC_NO_NUMBA`` is set to a truthy value (``1``, ``true``,
``yes``, ``on``).  :func:`use_backend` switches at runtime, which is how the
tests and the benchmark compare both paths.
"""
from __future__ import annotations

import importlib
import os

import numpy as np

from . import _numpy

ENV_FLAG = "ATOMLOC_NO_NUMBA"

_numba = None
if os.environ.get(ENV_FLAG, "").strip().lower() not in {"1", "true", "yes", "on"}:
    try:
        _numba = importlib.import_module(f"{__name__}._numba")
    except ImportError:  # pragma: no cover - numba missing in this interpreter
        _numba = None

_BACKENDS = {"numpy": _numpy}
if _numba is not None:
    _BACKENDS["numba"] = _numba

_active = "numba" if _numba is not None else "numpy"


def available() -> tuple[str, ...]:
    return tuple(_BACKENDS)


def active() -> str:
    return _active


def use_backend(name: str) -> str:
    """Select the kernel backend; returns the previously active name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available (have {sorted(_BACKENDS)})")
    prev, _active = _active, name
    return prev


def _mod(backend):
    return _BACKENDS[backend or _active]


def _flat(x):
    return np.ascontiguousarray(np.ravel(x), dtype=np.float64)


def chi_parts(o1, o2, o3, cphi, g1, g2, pref, delta, s, backend=None):
    """Susceptibility and its denominator parts on broadcast (delta, s) arrays.

    Returns ``(chi_re, chi_im, a, b, z)`` shaped like the broadcast inputs;
    chi entries are NaN where the denominator z falls below the guard.
    """
    delta, s = np.broadcast_arrays(np.asarray(delta, dtype=np.float64),
                                   np.asarray(s, dtype=np.float64))
    shape = delta.shape
    out = _mod(backend).chi_parts(float(o1), float(o2), float(o3), float(cphi),
                                  float(g1), float(g2), float(pref),
                                  _flat(delta), _flat(s))
    return tuple(o.reshape(shape) for o in out)


def cubic_roots(p, q, backend=None):
    p, q = np.broadcast_arrays(np.asarray(p, dtype=np.float64),
                               np.asarray(q, dtype=np.float64))
    shape = p.shape
    roots, arg = _mod(backend).cubic_roots(_flat(p), _flat(q))
    return roots.reshape(shape + (3,)), arg.reshape(shape)


def solve3(m, b, backend=None):
    m = np.ascontiguousarray(m, dtype=np.complex128).reshape(-1, 3, 3)
    b = np.ascontiguousarray(b, dtype=np.complex128).reshape(-1, 3)
    return _mod(backend).solve3(m, b)


def rk4_relax(prop, shift, max_steps, tol, backend=None):
    prop = np.ascontiguousarray(prop, dtype=np.complex128).reshape(-1, 3, 3)
    shift = np.ascontiguousarray(shift, dtype=np.complex128).reshape(-1, 3)
    max_steps = np.ascontiguousarray(
        np.broadcast_to(np.asarray(max_steps, dtype=np.int64), (prop.shape[0],)))
    tol = np.ascontiguousarray(
        np.broadcast_to(np.asarray(tol, dtype=np.float64), (prop.shape[0],)))
    return _mod(backend).rk4_relax(prop, shift, max_steps, tol)


def eigvecs(h, lam, degen_tol, backend=None):
    h = np.ascontiguousarray(h, dtype=np.complex128).reshape(-1, 3, 3)
    lam = np.ascontiguousarray(lam, dtype=np.float64).reshape(-1, 3)
    return _mod(backend).eigvecs(h, lam, float(degen_tol))
