"""Graded-product kernel with backend selection.

The compiled Cython extension is used when importable; otherwise the numpy
fallback takes over. Both run the same table-driven scatter-add in the same
order, so results are bit-identical. The COHERENCE_KERNEL environment
variable ("compiled" | "python") pins the initial choice; set_backend
switches at runtime (used by the benchmark and the equivalence tests).
"""

import os

import numpy as np

from . import pyref, tables

try:
    from . import _graded
except ImportError:
    _graded = None


def _compiled_multiply(x, y, left, right, target, sign, out):
    _graded.graded_multiply(
        x.view(np.float64), y.view(np.float64),
        left, right, target, sign,
        out.view(np.float64),
    )


_BACKENDS = {"python": pyref.graded_multiply}
if _graded is not None:
    _BACKENDS["compiled"] = _compiled_multiply


def available_backends():
    return tuple(sorted(_BACKENDS))


def _initial_backend():
    env = os.environ.get("COHERENCE_KERNEL", "auto").lower()
    if env in _BACKENDS:
        return env
    if env not in ("", "auto"):
        raise ValueError(
            f"COHERENCE_KERNEL={env!r}; expected one of {available_backends()} or 'auto'"
        )
    return "compiled" if "compiled" in _BACKENDS else "python"


_active = _initial_backend()


def get_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; have {available_backends()}")
    _active = name


def multiply(x: np.ndarray, y: np.ndarray, n_gen: int) -> np.ndarray:
    """Graded product of dense coefficient arrays over n_gen generators."""
    left, right, target, sign = tables.mul_table(n_gen)
    out = np.zeros(1 << n_gen, dtype=np.complex128)
    _BACKENDS[_active](x, y, left, right, target, sign, out)
    return out


def conjugate(x: np.ndarray, n_gen: int) -> np.ndarray:
    """Antilinear conjugation of a dense coefficient array."""
    perm, sign = tables.conj_table(n_gen)
    out = np.zeros_like(x)
    out[perm] = sign * np.conj(x)
    return out


def grade_signs(n_gen: int) -> np.ndarray:
    return tables.parity_signs(n_gen)
