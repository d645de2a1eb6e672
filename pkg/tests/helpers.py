"""Shared oracles for the test suite."""

from __future__ import annotations

import numpy as np


def hausdorff_distance(a, b) -> float:
    """Symmetric set distance between two collections of complex numbers."""
    a = np.asarray(a, dtype=np.complex128).ravel()
    b = np.asarray(b, dtype=np.complex128).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("hausdorff distance needs nonempty sets")
    d = np.abs(a[:, None] - b[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def frobenius_gap(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.linalg.norm(A - B))


def principal_angle_cos(u: np.ndarray, v: np.ndarray) -> float:
    """|cos| of the angle between two complex vectors."""
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(abs(np.vdot(u, v)) / (nu * nv))
