"""Kernel backend selection.

The fitting inner loop is dominated by chart evaluations and loss
gradients.  A Cython extension (`bellfit._kernels_c`) implements them for
speed; the pure-numpy module (`bellfit._kernels_py`) is the always-available
fallback and the reference for parity tests.  Selection happens at import,
overridable with BELLFIT_KERNELS=python|cython.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

P_CLAMP = _kernels_py.P_CLAMP

_NS_VERTICES: np.ndarray | None = None


def _ns_vertices() -> np.ndarray:
    global _NS_VERTICES
    if _NS_VERTICES is None:
        from .oracles import enumerate_ns_vertices
        _NS_VERTICES = np.ascontiguousarray(enumerate_ns_vertices().vertices)
    return _NS_VERTICES


def _load_backend():
    choice = os.environ.get("BELLFIT_KERNELS", "auto")
    if choice == "python":
        return _kernels_py, "python"
    try:
        from . import _kernels_c
        return _kernels_c, "cython"
    except ImportError:
        if choice == "cython":
            raise
        return _kernels_py, "python"


_impl, BACKEND = _load_backend()


def available_backends() -> dict[str, object]:
    """All importable backends, for parity tests and benchmarks."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels_c
        out["cython"] = _kernels_c
    except ImportError:
        pass
    return out


def behavior(model_class: str, theta: np.ndarray, d: int) -> np.ndarray:
    vertices = _ns_vertices() if model_class == "nsCC" else None
    return _impl.behavior(model_class, np.ascontiguousarray(theta, dtype=float),
                          d, vertices)


def loss_and_grad(model_class: str, theta: np.ndarray, d: int,
                  f: np.ndarray, w: np.ndarray) -> tuple[float, np.ndarray]:
    vertices = _ns_vertices() if model_class == "nsCC" else None
    return _impl.loss_and_grad(model_class, np.ascontiguousarray(theta, dtype=float),
                               d, np.ascontiguousarray(f, dtype=float),
                               np.ascontiguousarray(w, dtype=float), vertices)


def loss_value(f: np.ndarray, w: np.ndarray, p: np.ndarray) -> float:
    return _kernels_py.loss_value(f, w, p)
