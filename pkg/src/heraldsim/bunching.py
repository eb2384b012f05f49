"""Conditional bunching of identical Fock-diagonal states in a multiport.

N copies of a state with phonon-number distribution p enter a balanced
linear N-port; conditioning on all excitations leaving through one output
port yields a rotationally symmetric state whose radial Wigner cut is

    w_out(r) ~ sum_{m_1..m_N} (prod_j p_{m_j}/m_j!) (sum m_i)! / (-N)^(sum m_i)
               exp(-r^2/2) L_{sum m_i}(r^2).

The N-fold sum collapses to a single convolution over the total
excitation number s = sum m_i, which is what this module evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .qng import WignerCut, default_radial_grid, wigner_cut

MAX_TOTAL_EXCITATION = 200


@dataclass(frozen=True)
class BunchingSpec:
    """Input distribution, copy count and output grid of a bunching test."""

    copies: int
    p: np.ndarray
    r_grid: np.ndarray = field(default_factory=default_radial_grid)

    def __post_init__(self) -> None:
        if self.copies < 1:
            raise ValueError("copies must be at least 1")
        p = np.asarray(self.p, dtype=float)
        if abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("input distribution must be normalized")
        object.__setattr__(self, "p", p)


def _log_convolve(log_x: np.ndarray, log_y: np.ndarray) -> np.ndarray:
    out = np.full(log_x.size + log_y.size - 1, -np.inf)
    for s in range(out.size):
        lo = max(0, s - log_y.size + 1)
        hi = min(s, log_x.size - 1)
        terms = log_x[lo : hi + 1] + log_y[s - hi : s - lo + 1][::-1]
        out[s] = logsumexp(terms)
    return out


def bunched_distribution(p: np.ndarray, copies: int) -> np.ndarray:
    """Phonon-number distribution of the bunched output port.

    The signed Wigner series reduces to an ordinary Fock-diagonal state
    with p_out(s) ~ s! / N^s * (N-fold convolution of p_m / m!)(s);
    evaluated in log space because s! overflows beyond s = 170.
    """
    p = np.asarray(p, dtype=float)
    if copies == 1:
        return p.copy()
    cutoff = p.size - 1
    total = copies * cutoff
    if total > MAX_TOTAL_EXCITATION:
        raise ValueError(
            f"copies * cutoff = {total} exceeds the supported total excitation "
            f"{MAX_TOTAL_EXCITATION}"
        )
    m = np.arange(p.size)
    with np.errstate(divide="ignore"):
        log_q = np.log(p) - gammaln(m + 1.0) - m * np.log(copies)
    log_total = log_q
    for _ in range(copies - 1):
        log_total = _log_convolve(log_total, log_q)
    s = np.arange(log_total.size)
    log_c = log_total + gammaln(s + 1.0)
    return np.exp(log_c - logsumexp(log_c))


def bunched_wigner(spec: BunchingSpec) -> WignerCut:
    """Normalized Wigner cut of the bunched output state."""
    return wigner_cut(bunched_distribution(spec.p, spec.copies), spec.r_grid)


def rotational_overlap(w1: WignerCut, w2: WignerCut) -> float:
    """Tr[rho_1 rho_2] from two radial cuts: 4 pi * 2 pi int r w_1 w_2 dr."""
    if w1.r.shape != w2.r.shape or not np.array_equal(w1.r, w2.r):
        raise ValueError("Wigner cuts are sampled on different grids")
    return float(8.0 * np.pi**2 * np.trapezoid(w1.r * w1.values * w2.values, w1.r))
