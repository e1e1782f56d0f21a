"""Kernel backend selection.

Prefers the compiled extension when it was built, otherwise falls back to the
numpy reference implementation.  Override with SPINBIAS_KERNELS=python or
SPINBIAS_KERNELS=compiled (the latter raises if the extension is missing), or
at runtime via :func:`set_backend` (used by the benchmark and the tests).
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

try:
    from . import _core as _kernels_cy
except ImportError:
    _kernels_cy = None


def _select(name: str):
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _kernels_cy is None:
            raise ImportError("compiled kernels requested but spinbias._core is not built")
        return _kernels_cy
    if name == "auto":
        return _kernels_cy if _kernels_cy is not None else _kernels_py
    raise ValueError(f"unknown kernel backend {name!r}")


_impl = _select(os.environ.get("SPINBIAS_KERNELS", "auto"))


def backend_name() -> str:
    return _impl.BACKEND


def compiled_available() -> bool:
    return _kernels_cy is not None


def set_backend(name: str) -> str:
    """Switch the active backend ('python', 'compiled' or 'auto'); returns its name."""
    global _impl
    _impl = _select(name)
    return _impl.BACKEND


def amplitudes(evals, vecs, i_in, i_out, times) -> np.ndarray:
    ev = np.ascontiguousarray(evals, dtype=float)
    vc = np.ascontiguousarray(vecs, dtype=float)
    ts = np.ascontiguousarray(np.atleast_1d(times), dtype=float)
    return _impl.amplitudes(ev, vc, int(i_in), int(i_out), ts)


def objective_core(h, i_in, i_out, t, want_time_grad=True):
    hm = np.ascontiguousarray(h, dtype=float)
    return _impl.objective_core(hm, int(i_in), int(i_out), float(t), bool(want_time_grad))
