"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
implementation takes over. ``use("python")`` / ``use("compiled")`` switch at
runtime, and the environment variable ``DBSPACE_BACKEND`` sets the default.
"""

import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

__all__ = ["use", "current", "available", "log_theta", "log_abs_e", "arg_e",
           "s_matrix"]

_active = None


def available():
    """Names of the backends that can be selected."""
    names = ["python"]
    if _ckernels is not None:
        names.append("compiled")
    return names


def use(name):
    """Select the kernel backend by name and return the previous one."""
    global _active
    prev = current()
    if name == "compiled":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not built")
        _active = _ckernels
    elif name == "python":
        _active = _pykernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    return prev


def current():
    return "compiled" if _active is _ckernels and _ckernels is not None else "python"


def _flat(z):
    z = np.asarray(z, dtype=complex)
    return np.ascontiguousarray(z.ravel()), z.shape


def log_theta(z, a, zeros, phase0):
    zf, shape = _flat(z)
    return _active.log_theta(zf, float(a), zeros, float(phase0)).reshape(shape)


def log_abs_e(z, a, zeros, logk):
    zf, shape = _flat(z)
    return _active.log_abs_e(zf, float(a), zeros, float(logk)).reshape(shape)


def arg_e(z, a, zeros, argk):
    zf, shape = _flat(z)
    return _active.arg_e(zf, float(a), zeros, float(argk)).reshape(shape)


def s_matrix(w, z, a, zeros, phase0):
    """Return ``s(w_j, z_i)`` with shape ``(len(z), len(w))``."""
    wf, _ = _flat(w)
    zf, _ = _flat(z)
    return _active.s_matrix(wf, zf, float(a), zeros, float(phase0))


_default = os.environ.get("DBSPACE_BACKEND", "compiled")
if _default == "compiled" and _ckernels is None:
    _default = "python"
use(_default)
