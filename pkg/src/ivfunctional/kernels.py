"""Backend selection for the numerical kernels.

The compiled extension is used when it imports; otherwise the NumPy fallback.
Set ``IVFUNCTIONAL_BACKEND=python`` to force the fallback.
"""

import importlib
import os

_NAMES = {"compiled": "ivfunctional._kernels", "python": "ivfunctional._kernels_py"}


def load_backend(name):
    """Import a backend module by name ('compiled' or 'python')."""
    if name not in _NAMES:
        raise ValueError(f"unknown kernel backend {name!r}")
    return importlib.import_module(_NAMES[name])


def available_backends():
    out = []
    for name in _NAMES:
        try:
            load_backend(name)
        except ImportError:
            continue
        out.append(name)
    return out


def _select():
    wanted = os.environ.get("IVFUNCTIONAL_BACKEND", "").strip().lower()
    if wanted == "python":
        return "python", load_backend("python")
    try:
        return "compiled", load_backend("compiled")
    except ImportError:
        if wanted == "compiled":
            raise
        return "python", load_backend("python")


BACKEND, _impl = _select()

basis_matrix = _impl.basis_matrix
joint_density = _impl.joint_density
galerkin_matrix = _impl.galerkin_matrix
invert = _impl.invert
spectral_norm = _impl.spectral_norm
