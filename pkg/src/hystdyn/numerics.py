"""Dense helpers used by the recurrent model and the linear baseline.

Everything runs in 64-bit floats. Matrices are plain row-major numpy arrays;
the wrappers here add the dimension checks numpy's broadcasting would
otherwise hide.
"""

from __future__ import annotations

import numpy as np

#: Counter-based generator backing every seeded draw. Fixed by name so a
#: checkpoint's ``rng_seed`` reproduces the same stream on any machine.
BIT_GENERATOR = "philox"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic function, evaluated stably for large |x|."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh(x: np.ndarray) -> np.ndarray:
    return np.tanh(np.asarray(x, dtype=float))


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(np.asarray(x, dtype=float), 0.0)


def matvec(m: np.ndarray, x: np.ndarray) -> np.ndarray:
    if m.ndim != 2 or x.ndim != 1 or m.shape[1] != x.shape[0]:
        raise ValueError(f"matvec shapes incompatible: {m.shape} @ {x.shape}")
    return m @ x


def add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise ValueError(f"add shapes differ: {a.shape} vs {b.shape}")
    return a + b


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.shape != b.shape:
        raise ValueError(f"hadamard shapes differ: {a.shape} vs {b.shape}")
    return a * b


def glorot_uniform(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Uniform draw in +/- sqrt(6 / (rows + cols)); also used for recurrent
    weights (no orthogonal initialization)."""
    if rows <= 0 or cols <= 0:
        raise ValueError(f"matrix dims must be positive, got {rows}x{cols}")
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))
