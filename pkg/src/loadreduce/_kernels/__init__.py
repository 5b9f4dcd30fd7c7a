"""Kernel backend selection: compiled extension when built, pure Python otherwise.

The model modules call these through the package namespace
(``_kernels.motor_full(...)``) so that set_backend can swap implementations
at runtime -- that is what the kernel benchmark uses to compare the two.
"""

from . import pykernels

try:
    from . import _fast
    HAVE_COMPILED = True
except ImportError:
    _fast = None
    HAVE_COMPILED = False

_KERNEL_NAMES = ("motor_full", "motor_reduced", "dera_full", "dera_reduced")

BACKEND = "compiled" if HAVE_COMPILED else "python"


def available_backends() -> tuple:
    return ("python", "compiled") if HAVE_COMPILED else ("python",)


def set_backend(name: str) -> None:
    """Route the kernels through the named backend ('python' or 'compiled')."""
    global BACKEND
    if name not in available_backends():
        raise ValueError(f"backend {name!r} not available (have {available_backends()})")
    mod = _fast if name == "compiled" else pykernels
    for fn in _KERNEL_NAMES:
        globals()[fn] = getattr(mod, fn)
    BACKEND = name


set_backend(BACKEND)
