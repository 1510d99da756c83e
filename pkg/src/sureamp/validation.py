"""Input validation helpers shared across the package.

All argument errors raise ValueError so callers (and the CLI) can map them
to usage failures uniformly.
"""

import numpy as np

__all__ = [
    "check_grid",
    "check_real_grid",
    "check_complex_grid",
    "check_same_shape",
    "check_positive",
    "check_nonnegative",
]


def check_grid(a, name="grid"):
    """Coerce to a 2-D float64/complex128 array and require finite entries."""
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    # canonical row-major layout; np.isfinite on complex checks both parts
    if np.iscomplexobj(arr):
        arr = np.ascontiguousarray(arr, dtype=np.complex128)
    else:
        arr = np.ascontiguousarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_real_grid(a, name="grid"):
    arr = check_grid(a, name)
    if np.iscomplexobj(arr):
        raise ValueError(f"{name} must be real-valued")
    return arr


def check_complex_grid(a, name="grid"):
    arr = check_grid(a, name)
    if not np.iscomplexobj(arr):
        arr = arr.astype(np.complex128)
    return arr


def check_same_shape(a, b, name_a="a", name_b="b"):
    if a.shape != b.shape:
        raise ValueError(
            f"shape mismatch: {name_a} is {a.shape}, {name_b} is {b.shape}"
        )


def check_positive(x, name):
    if not np.isfinite(x) or x <= 0:
        raise ValueError(f"{name} must be positive, got {x}")
    return float(x)


def check_nonnegative(x, name):
    if not np.isfinite(x) or x < 0:
        raise ValueError(f"{name} must be non-negative, got {x}")
    return float(x)
