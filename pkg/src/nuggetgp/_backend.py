"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the numpy
implementation is used. ``set_backend`` switches at runtime (benchmarks and
parity tests rely on it).
"""
from . import _core_py

try:
    from . import _core as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _core_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = _compiled if _compiled is not None else _core_py


def available():
    return sorted(_BACKENDS)


def get_backend():
    return "compiled" if _active is _compiled and _compiled is not None else "python"


def set_backend(name):
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; choose from {available()}") from None


def kernels():
    return _active
