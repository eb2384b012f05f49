"""Linearized pulsed optomechanical dynamics in phase space.

Quadrature ordering is ``(X_m, P_m, X_c, P_c)`` for the mechanical and
cavity modes.  The pre-detection state of (mechanics, filtered detector
mode) is obtained by integrating the second-moment equations of the
Heisenberg-Langevin dynamics augmented with two accumulator quadratures
for the temporally filtered output field

    a_out(t) = -a_in(t) + sqrt(2 kappa) a_c(t),
    A_det    = integral f(t) a_out(t) dt.

The accumulators are driven by ``sqrt(2 kappa) f(t)`` from the cavity
quadratures and by ``-f(t)`` from the input vacuum; the direct-feedthrough
noise contributes the vacuum variance ``integral f^2 = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .covariance import assert_physical
from .errors import PhysicalityError
from .params import BLUE, RED, SystemParams
from .states import SignedThermalMixture

ODE_TOL = 1e-10
DEFAULT_GRID_POINTS = 4096
FILTER_NORM_TOL = 1e-9

#: 0-indexed (row, column) of the propagator entry carrying the mechanical
#: signature into the cavity output; its time profile is the optimal filter.
MECH_TO_CAVITY = (3, 0)


def build_drift_matrix(params: SystemParams) -> np.ndarray:
    """Drift matrix of the rotating-frame quadrature dynamics.

    Blue detuning activates the two-mode-squeezing coupling ``g_B = g``,
    red detuning the beam-splitter coupling ``g_R = g``; exactly one of
    them is nonzero.
    """
    if params.gamma <= 0.0 or params.kappa <= 0.0:
        raise ValueError("damping rates must be strictly positive")
    g_b = params.g if params.detuning_sign == BLUE else 0.0
    g_r = params.g if params.detuning_sign == RED else 0.0
    gm, gp = g_b - g_r, g_b + g_r
    half_gamma = 0.5 * params.gamma
    kappa = params.kappa
    return np.array(
        [
            [-half_gamma, 0.0, 0.0, gm],
            [0.0, -half_gamma, gp, 0.0],
            [0.0, gm, -kappa, 0.0],
            [gp, 0.0, 0.0, -kappa],
        ]
    )


def propagator(A: np.ndarray, t: float) -> np.ndarray:
    """Propagator M(t) = exp(A t) (Pade scaling-and-squaring)."""
    if t < 0.0:
        raise ValueError("t must be non-negative")
    return expm(A * t)


@dataclass(frozen=True)
class FilterFunction:
    """Real temporal filter sampled on a uniform grid over [0, tau]."""

    values: np.ndarray
    dt: float

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("filter needs at least two samples")
        object.__setattr__(self, "values", v)

    @property
    def duration(self) -> float:
        return self.dt * (self.values.size - 1)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.values.size)

    def norm_squared(self) -> float:
        """Discrete (trapezoid) L2 norm of the filter."""
        return float(np.trapezoid(self.values**2, dx=self.dt))

    def __call__(self, t) -> np.ndarray:
        return np.interp(t, self.times, self.values)


def flat_filter(tau: float, grid_points: int = DEFAULT_GRID_POINTS) -> FilterFunction:
    """Flat-top filter f = tau^(-1/2), unit norm by construction."""
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    dt = tau / (grid_points - 1)
    return FilterFunction(np.full(grid_points, tau**-0.5), dt)


def optimal_filter(
    params: SystemParams, tau: float, grid_points: int = DEFAULT_GRID_POINTS
) -> FilterFunction:
    """Filter maximizing the mechanical signature in the detector mode.

    Proportional to the propagator entry that maps the initial mechanical
    quadrature into the leaking cavity field, normalized to unit L2 norm.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    if grid_points < 100:
        raise ValueError("grid_points must be at least 100")
    A = build_drift_matrix(params)
    dt = tau / (grid_points - 1)
    step = expm(A * dt)
    profile = np.empty(grid_points)
    M = np.eye(4)
    for i in range(grid_points):
        profile[i] = M[MECH_TO_CAVITY]
        M = step @ M
    peak = np.abs(profile).max()
    if peak == 0.0:
        raise ValueError("mechanics leaves no signature in the output (g = 0?)")
    norm2 = np.trapezoid(profile**2, dx=dt)
    return FilterFunction(profile / np.sqrt(norm2), dt)


def _diffusion_diagonal(params: SystemParams, sigma_th: float) -> np.ndarray:
    return np.array([params.gamma * sigma_th, params.gamma * sigma_th, 2 * params.kappa, 2 * params.kappa])


def _augmented_moments(
    params: SystemParams, tau: float, filt: FilterFunction, sigma_m_init: float
) -> tuple[np.ndarray, float]:
    """Integrate second moments of (mechanics, cavity, accumulators).

    Returns the final 6x6 covariance matrix and the accumulated coefficient
    of the initial mechanical quadrature in the detector mode.
    """
    if sigma_m_init < 1.0 - 1e-12:
        raise ValueError("initial mechanical variance must be >= 1 (vacuum)")
    if abs(filt.duration - tau) > 1e-9 * tau:
        raise ValueError("filter duration does not match the pulse duration")
    if abs(filt.norm_squared() - 1.0) > FILTER_NORM_TOL:
        raise ValueError(f"filter is not normalized: |f|^2 = {filt.norm_squared()!r}")

    A = build_drift_matrix(params)
    sigma_th = 2.0 * params.n_th + 1.0
    d_diag = _diffusion_diagonal(params, sigma_th)
    s2k = np.sqrt(2.0 * params.kappa)
    t_nodes = filt.times
    f_vals = filt.values

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        f = np.interp(t, t_nodes, f_vals)
        V = y[:36].reshape(6, 6)
        M = y[36:52].reshape(4, 4)
        A6 = np.zeros((6, 6))
        A6[:4, :4] = A
        A6[4, 2] = s2k * f
        A6[5, 3] = s2k * f
        D6 = np.zeros((6, 6))
        D6[np.arange(4), np.arange(4)] = d_diag
        D6[4, 4] = D6[5, 5] = f * f
        D6[2, 4] = D6[4, 2] = -s2k * f
        D6[3, 5] = D6[5, 3] = -s2k * f
        dV = A6 @ V + V @ A6.T + D6
        dM = A @ M
        dcT = s2k * f * M[MECH_TO_CAVITY]
        return np.concatenate([dV.ravel(), dM.ravel(), [dcT]])

    V0 = np.diag([sigma_m_init, sigma_m_init, 1.0, 1.0, 0.0, 0.0])
    y0 = np.concatenate([V0.ravel(), np.eye(4).ravel(), [0.0]])
    sol = solve_ivp(rhs, (0.0, tau), y0, method="DOP853", rtol=ODE_TOL, atol=ODE_TOL, dense_output=False)
    if not sol.success:
        raise PhysicalityError(f"moment integration failed: {sol.message}")
    y = sol.y[:, -1]
    V6 = y[:36].reshape(6, 6)
    V6 = 0.5 * (V6 + V6.T)
    return V6, float(y[52])


def pre_detection_covariance(
    params: SystemParams, tau: float, filt: FilterFunction, sigma_m_init: float
) -> np.ndarray:
    """4x4 covariance of (mechanics, detector mode) at the end of a pulse.

    The cavity starts in vacuum; the mechanics starts with variance
    ``sigma_m_init = 2 n + 1``.  The returned blocks are phase-insensitive:
    identity-proportional diagonal blocks and a zero-diagonal cross block.
    """
    V6, _ = _augmented_moments(params, tau, filt, sigma_m_init)
    idx = np.array([0, 1, 4, 5])
    V4 = V6[np.ix_(idx, idx)]
    assert_physical(V4, what="pre-detection covariance")
    return V4


def readout_transmittance(params: SystemParams, tau: float, filt: FilterFunction | None = None) -> float:
    """Effective readout transmittance T of the initial mechanical state.

    Square of the accumulated coefficient of the initial mechanical
    quadrature in the detector-mode quadrature.
    """
    if tau == 0.0:
        return 0.0
    if filt is None:
        filt = optimal_filter(params, tau)
    _, c_T = _augmented_moments(params, tau, filt, 1.0)
    return float(c_T**2)


def thermal_decoherence(
    state: SignedThermalMixture, tau_del: float, params: SystemParams
) -> SignedThermalMixture:
    """Couple each component to the thermal bath for a delay ``tau_del``.

    Covariances map as V -> e^(-gamma tau) V + (1 - e^(-gamma tau)) (2 n_th + 1) I,
    i.e. occupations relax exponentially towards n_th.  Weights are unchanged.
    """
    if tau_del < 0.0:
        raise ValueError("tau_del must be non-negative")
    decay = np.exp(-params.gamma * tau_del)
    n_new = decay * state.occupations + (1.0 - decay) * params.n_th
    return SignedThermalMixture(state.weights.copy(), n_new)


def loss_channel(state: SignedThermalMixture, zeta: float) -> SignedThermalMixture:
    """Pure loss of fraction ``zeta``: V -> (1 - zeta) V + zeta I per component."""
    if not 0.0 <= zeta <= 1.0:
        raise ValueError("zeta must lie in [0, 1]")
    return SignedThermalMixture(state.weights.copy(), (1.0 - zeta) * state.occupations)
