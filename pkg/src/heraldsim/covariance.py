"""Covariance-matrix helpers in the [X, P] = 2i quadrature convention.

Vacuum has covariance matrix equal to the identity; a thermal state with
mean occupation ``n`` has covariance ``(2 n + 1) I``.
"""

from __future__ import annotations

import numpy as np

from .errors import PhysicalityError

SYMMETRY_RTOL = 1e-12
PHYSICALITY_TOL = 1e-9


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form Omega for ``n_modes`` modes."""
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    out = np.zeros((2 * n_modes, 2 * n_modes))
    for i in range(n_modes):
        out[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = block
    return out


def check_symmetric(V: np.ndarray, rtol: float = SYMMETRY_RTOL) -> None:
    scale = max(1.0, float(np.abs(V).max()))
    if np.abs(V - V.T).max() > rtol * scale:
        raise PhysicalityError("covariance matrix is not symmetric")


def physicality_defect(V: np.ndarray) -> float:
    """Most negative eigenvalue of V + i Omega (>= 0 for physical states)."""
    n_modes = V.shape[0] // 2
    H = V.astype(complex) + 1j * symplectic_form(n_modes)
    return float(np.linalg.eigvalsh(H).min())


def is_physical(V: np.ndarray, tol: float = PHYSICALITY_TOL) -> bool:
    return physicality_defect(V) >= -tol


def assert_physical(V: np.ndarray, tol: float = PHYSICALITY_TOL, what: str = "covariance matrix") -> None:
    check_symmetric(V)
    defect = physicality_defect(V)
    if defect < -tol:
        raise PhysicalityError(f"{what} violates V + i Omega >= 0 (defect {defect:.3e})")


def occupation(block: np.ndarray, tol: float = 1e-8) -> float:
    """Mean occupation of a single-mode, phase-insensitive 2x2 block."""
    if abs(block[0, 0] - block[1, 1]) > tol * max(1.0, abs(block[0, 0])):
        raise PhysicalityError("block is not proportional to the identity")
    return (0.5 * (block[0, 0] + block[1, 1]) - 1.0) / 2.0


def check_phase_insensitive(V: np.ndarray, tol: float = 1e-7) -> None:
    """Require identity-proportional diagonal blocks and a zero-diagonal cross block."""
    scale = max(1.0, float(np.abs(V).max()))
    for i in range(0, V.shape[0], 2):
        d = V[i : i + 2, i : i + 2]
        if abs(d[0, 0] - d[1, 1]) > tol * scale or abs(d[0, 1]) > tol * scale:
            raise PhysicalityError("diagonal block is not phase-insensitive")
    for i in range(0, V.shape[0], 2):
        for j in range(i + 2, V.shape[0], 2):
            c = V[i : i + 2, j : j + 2]
            if abs(c[0, 0]) > tol * scale or abs(c[1, 1]) > tol * scale:
                raise PhysicalityError("cross block has phase-sensitive diagonal entries")
