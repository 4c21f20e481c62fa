"""Run-loop backend, chosen once at import.

The compiled core is used when it was built; otherwise, or when the
environment variable ``DUALAVG_BACKEND=python`` is set, the pure-Python
loop in :mod:`dualavg._pycore` is used. Both expose ``run_loop`` with the
same signature and outputs.
"""
import os

from . import _pycore

BACKEND = "python"
_impl = _pycore

if os.environ.get("DUALAVG_BACKEND", "").lower() != "python":
    try:
        from . import _core
    except ImportError:
        pass
    else:
        _impl = _core
        BACKEND = "cython"

_BACKENDS = {"python": _pycore}
if BACKEND == "cython":
    _BACKENDS["cython"] = _impl


def available_backends():
    return tuple(_BACKENDS)


def get_backend(name=None):
    """Module implementing ``run_loop``; ``None`` means the import-time default."""
    if name is None:
        return _impl
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}") from None
