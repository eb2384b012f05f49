"""Signed mixtures of thermal states and Fock-space distributions.

Detector conditioning produces mechanical states of the form
``sum_j w_j rho_th(n_j)`` with real (possibly negative) weights summing to
one.  Every state handled here is phase-insensitive, i.e. diagonal in the
Fock basis, so the pair ``(w_j, n_j)`` is a complete description.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .errors import PhysicalityError

WEIGHT_SUM_TOL = 1e-12
PRUNE_TOL = 1e-14


@dataclass(frozen=True)
class SignedThermalMixture:
    """Signed mixture of thermal states, stored as (weight, occupation) pairs."""

    weights: np.ndarray
    occupations: np.ndarray

    def __post_init__(self) -> None:
        w = np.atleast_1d(np.asarray(self.weights, dtype=float))
        n = np.atleast_1d(np.asarray(self.occupations, dtype=float))
        if w.shape != n.shape or w.ndim != 1:
            raise ValueError("weights and occupations must be 1-D arrays of equal length")
        if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL * max(1.0, np.abs(w).max()):
            raise PhysicalityError(f"mixture weights sum to {w.sum()!r}, expected 1")
        if (n < 0.0).any():
            raise PhysicalityError("negative occupation in thermal mixture")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "occupations", n)

    @classmethod
    def thermal(cls, n: float) -> "SignedThermalMixture":
        return cls(np.array([1.0]), np.array([float(n)]))

    @classmethod
    def vacuum(cls) -> "SignedThermalMixture":
        return cls.thermal(0.0)

    def __len__(self) -> int:
        return self.weights.size

    @property
    def mean_occupation(self) -> float:
        return float(self.weights @ self.occupations)

    def fock_probabilities(self, k_max: int) -> np.ndarray:
        """Diagonal Fock-basis elements p_k for k = 0..k_max."""
        return fock_probabilities(self, k_max)

    def merged(self, atol: float = 1e-12, prune: float = PRUNE_TOL) -> "SignedThermalMixture":
        """Combine components with equal occupations and drop negligible weights."""
        order = np.argsort(self.occupations)
        n_sorted = self.occupations[order]
        w_sorted = self.weights[order]
        ns: list[float] = []
        ws: list[float] = []
        for n, w in zip(n_sorted, w_sorted):
            if ns and abs(n - ns[-1]) <= atol * (1.0 + abs(n)):
                ws[-1] += w
            else:
                ns.append(n)
                ws.append(w)
        keep = [i for i, w in enumerate(ws) if abs(w) > prune]
        if not keep:  # all weight cancelled; keep the largest component
            keep = [int(np.argmax(np.abs(ws)))]
        w_arr = np.array([ws[i] for i in keep])
        n_arr = np.array([ns[i] for i in keep])
        w_arr /= w_arr.sum()
        return SignedThermalMixture(w_arr, n_arr)

    def assert_physical_distribution(self, k_max: int | None = None, tol: float = 1e-10) -> None:
        """Check p_k in [-tol, 1 + tol] and sum close to 1 over a large cutoff."""
        if k_max is None:
            k_max = suggested_cutoff(self.occupations.max(initial=0.0))
        p = self.fock_probabilities(k_max)
        if p.min() < -tol or p.max() > 1.0 + tol:
            raise PhysicalityError(
                f"Fock probabilities outside [0, 1]: min {p.min():.3e}, max {p.max():.3e}"
            )
        tail = 1.0 - p.sum()
        if abs(tail) > max(1e-6, 10 * tol):
            raise PhysicalityError(f"Fock probabilities sum to {p.sum()!r} at cutoff {k_max}")


def fock_probabilities(state: SignedThermalMixture, k_max: int) -> np.ndarray:
    """p_k = sum_j w_j n_j^k / (n_j + 1)^(k+1), for k = 0..k_max."""
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    n = state.occupations
    ratio = n / (n + 1.0)
    k = np.arange(k_max + 1)
    terms = (state.weights / (n + 1.0))[None, :] * ratio[None, :] ** k[:, None]
    return terms.sum(axis=1)


def suggested_cutoff(n_max: float, tail: float = 1e-13) -> int:
    """Fock cutoff so a thermal state with occupation n_max has tail below ``tail``."""
    if n_max <= 0.0:
        return 20
    ratio = n_max / (n_max + 1.0)
    return max(20, int(np.ceil(np.log(tail) / np.log(ratio))) + 5)


# -- closed-form Fock distributions ------------------------------------------


def thermal_fock(n0: float, k_max: int) -> np.ndarray:
    """Fock distribution of a thermal state with mean occupation n0."""
    k = np.arange(k_max + 1)
    return n0**k / (n0 + 1.0) ** (k + 1)


def added_thermal_fock(n0: float, times: int, k_max: int) -> np.ndarray:
    """Ideal ``times``-fold phonon-added thermal state: p_k of a^dag^m rho_th a^m."""
    pad = suggested_cutoff(n0) + k_max + times
    p = thermal_fock(n0, pad)
    for _ in range(times):
        q = np.zeros_like(p)
        q[1:] = np.arange(1, pad + 1) * p[:-1]
        p = q / q.sum()
    return p[: k_max + 1]


def subtracted_thermal_fock(n0: float, k_max: int) -> np.ndarray:
    """Ideal single-phonon-subtracted thermal state: p_n = (n+1) n0^n / (n0+1)^(n+2)."""
    if n0 <= 0.0:
        raise ValueError("subtraction from the ground state is impossible")
    n = np.arange(k_max + 1)
    return (n + 1) * n0**n / (n0 + 1.0) ** (n + 2)


def fock_state(m: int, k_max: int) -> np.ndarray:
    p = np.zeros(k_max + 1)
    p[m] = 1.0
    return p


def binomial_loss(p: np.ndarray, zeta: float) -> np.ndarray:
    """Fock distribution after a loss channel of transmissivity 1 - zeta."""
    if not 0.0 <= zeta <= 1.0:
        raise ValueError("zeta must lie in [0, 1]")
    k_max = p.size - 1
    out = np.zeros_like(p, dtype=float)
    eta = 1.0 - zeta
    for m in range(k_max + 1):
        if p[m] == 0.0:
            continue
        n = np.arange(m + 1)
        out[: m + 1] += p[m] * comb(m, n) * eta**n * zeta ** (m - n)
    return out
