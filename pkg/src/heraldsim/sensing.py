"""Estimation of a phase-randomized displacement with Fock-diagonal probes.

A displacement of magnitude sqrt(N_c) with uniformly random phase maps a
Fock-diagonal probe to another Fock-diagonal state; photon counting then
estimates N_c.  The classical Fisher information of the count
distribution bounds the estimation error through the Cramer-Rao
inequality ``var(N_c) >= 1 / (M F)`` for M probe copies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .errors import ConvergenceError
from .states import SignedThermalMixture, suggested_cutoff

PROB_FLOOR = 1e-14
LEAKAGE_TOL = 1e-8
FISHER_REL_STEP = 1e-4
STABILITY_REL_TOL = 1e-3


@dataclass(frozen=True)
class ProbeState:
    """Fock-diagonal probe distribution with a display label."""

    p: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probe distribution must be a non-empty vector")
        if abs(p.sum() - 1.0) > 1e-9 or p.min() < -1e-12:
            raise ValueError("probe distribution must be normalized and non-negative")
        object.__setattr__(self, "p", p)

    @classmethod
    def from_mixture(cls, state: SignedThermalMixture, label: str = "", k_max: int | None = None):
        if k_max is None:
            k_max = suggested_cutoff(float(state.occupations.max(initial=0.0)), tail=1e-12)
        p = np.clip(state.fock_probabilities(k_max), 0.0, None)
        return cls(p / p.sum(), label)


def _default_n_max(m_max: int, n_c: float) -> int:
    return int(m_max + np.ceil(10.0 * (1.0 + n_c)) + 10)


def displacement_kernel(n_max: int, m_max: int, n_c: float) -> np.ndarray:
    """Matrix P(n|m, N_c) = |<n| D(sqrt(N_c)) |m>|^2, phase-independent.

    Uses the associated-Laguerre closed form for displaced Fock overlaps;
    symmetric under n <-> m.
    """
    if n_c < 0.0:
        raise ValueError("N_c must be non-negative")
    n = np.arange(n_max + 1)[:, None]
    m = np.arange(m_max + 1)[None, :]
    if n_c == 0.0:
        return (n == m).astype(float)
    lo = np.minimum(n, m)
    d = np.abs(n - m)
    log_pref = gammaln(lo + 1.0) - gammaln(lo + d + 1.0) + d * np.log(n_c) - n_c
    lag = eval_genlaguerre(lo, d, n_c)
    return np.exp(log_pref) * lag * lag


def displaced_fock_distribution(m: int, n_c: float, n_max: int | None = None) -> np.ndarray:
    """Photon-number distribution of a phase-randomized displaced Fock state.

    Raises when the truncation at ``n_max`` leaks more than 1e-8 of the
    probability.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    if n_max is None:
        n_max = _default_n_max(m, n_c)
    if n_max < m:
        raise ValueError("n_max must be at least m")
    row = displacement_kernel(n_max, m, n_c)[:, m]
    leak = abs(1.0 - row.sum())
    if leak > LEAKAGE_TOL:
        raise ConvergenceError(f"truncation leakage {leak:.2e} exceeds {LEAKAGE_TOL}")
    return row


def phase_randomized_output(probe: ProbeState, n_c: float, n_max: int | None = None) -> np.ndarray:
    """Output distribution p_f(n | N_c) = sum_m p_in(m) P(n|m, N_c)."""
    m_max = probe.p.size - 1
    if n_max is None:
        n_max = _default_n_max(m_max, n_c)
    return displacement_kernel(n_max, m_max, n_c) @ probe.p


def _fisher_from_terms(p0: np.ndarray, dp: np.ndarray) -> float:
    mask = p0 > PROB_FLOOR
    return float(np.sum(dp[mask] ** 2 / p0[mask]))


def _fisher_once(
    probe: ProbeState, n_c: float, n_max: int, rel_step: float, k_max: int | None
) -> float:
    h = rel_step * n_c
    p_plus = phase_randomized_output(probe, n_c + h, n_max)
    p_minus = phase_randomized_output(probe, n_c - h, n_max)
    p0 = phase_randomized_output(probe, n_c, n_max)
    dp = (p_plus - p_minus) / (2.0 * h)
    if k_max is None:
        return _fisher_from_terms(p0, dp)
    k_max = min(k_max, p0.size - 1)
    f = _fisher_from_terms(p0[: k_max + 1], dp[: k_max + 1])
    tail_p = 1.0 - p0[: k_max + 1].sum()
    tail_dp = -dp[: k_max + 1].sum()
    if tail_p > PROB_FLOOR:
        f += tail_dp**2 / tail_p
    return f


def fisher_information(
    probe: ProbeState,
    n_c: float,
    n_max: int | None = None,
    rel_step: float = FISHER_REL_STEP,
    check_stability: bool = True,
) -> float:
    """Fisher information F(N_c) = sum_n (dp_f/dN_c)^2 / p_f.

    The derivative is a central finite difference with relative step
    ``rel_step``; terms with probability below 1e-14 are skipped.  A
    step-halving check guards against an unstable derivative.
    """
    if n_c <= 0.0:
        raise ValueError("N_c must be positive")
    if n_max is None:
        n_max = _default_n_max(probe.p.size - 1, n_c)
    f = _fisher_once(probe, n_c, n_max, rel_step, None)
    if check_stability:
        f_half = _fisher_once(probe, n_c, n_max, 0.5 * rel_step, None)
        if abs(f_half - f) > STABILITY_REL_TOL * abs(f):
            raise ConvergenceError(
                f"Fisher derivative unstable at N_c={n_c}: {f} vs {f_half} on step halving"
            )
    return f


def fisher_finite_resolution(
    probe: ProbeState,
    n_c: float,
    k_max: int,
    n_max: int | None = None,
    rel_step: float = FISHER_REL_STEP,
    check_stability: bool = True,
) -> float:
    """Fisher information of a detector resolving at most ``k_max`` phonons.

    Counts above ``k_max`` fall into one aggregate bucket whose probability
    enters the sum as a single term.
    """
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    if n_c <= 0.0:
        raise ValueError("N_c must be positive")
    if n_max is None:
        n_max = _default_n_max(probe.p.size - 1, n_c)
    f = _fisher_once(probe, n_c, n_max, rel_step, k_max)
    if check_stability:
        f_half = _fisher_once(probe, n_c, n_max, 0.5 * rel_step, k_max)
        if abs(f_half - f) > STABILITY_REL_TOL * abs(f):
            raise ConvergenceError(f"finite-resolution Fisher derivative unstable at N_c={n_c}")
    return f


def cramer_rao_error(fisher: float, m_copies: int) -> float:
    """Cramer-Rao bound on var(N_c) for ``m_copies`` probe copies."""
    if fisher <= 0.0:
        raise ValueError("Fisher information must be positive")
    if m_copies < 1:
        raise ValueError("m_copies must be at least 1")
    return 1.0 / (m_copies * fisher)


def linear_fit_coefficient(n_c_grid: np.ndarray, errors: np.ndarray, n_c_max: float = 0.3) -> float:
    """Slope of the least-squares line of 1e4 * var(N_c) against N_c.

    Restricted to the quasi-linear region ``N_c <= n_c_max``; requires at
    least 10 grid points there.
    """
    n_c_grid = np.asarray(n_c_grid, dtype=float)
    errors = np.asarray(errors, dtype=float)
    sel = n_c_grid <= n_c_max
    if sel.sum() < 10:
        raise ValueError("need at least 10 grid points with N_c <= n_c_max")
    x = n_c_grid[sel]
    y = 1e4 * errors[sel]
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def default_nc_grid(points: int = 40, lo: float = 1e-3, hi: float = 1.0) -> np.ndarray:
    return np.geomspace(lo, hi, points)


@dataclass(frozen=True)
class SensingReport:
    """Fisher curve, Cramer-Rao errors and linear-fit coefficient of a probe."""

    probe_label: str
    m_copies: int
    n_c: np.ndarray
    fisher: np.ndarray
    error: np.ndarray
    coefficient: float


def sensing_report(
    probe: ProbeState, m_copies: int = 500, n_c_grid: np.ndarray | None = None
) -> SensingReport:
    """Evaluate a probe over an N_c grid and fit the low-N_c error slope."""
    if n_c_grid is None:
        n_c_grid = default_nc_grid()
    fisher = np.array([fisher_information(probe, x) for x in n_c_grid])
    if (fisher <= 0.0).any():
        raise ConvergenceError("Fisher information vanished on the grid")
    error = np.array([cramer_rao_error(f, m_copies) for f in fisher])
    coeff = linear_fit_coefficient(n_c_grid, error)
    return SensingReport(probe.label, m_copies, n_c_grid, fisher, error, coeff)
