"""Detector conditioning and multi-pulse heralding protocols.

An on-off detector clicking on the filtered output mode projects with
``Pi_1 = 1 - |0><0|``; the heralded mechanical state is a signed mixture
of two thermal states.  A coincidence of two on-off detectors behind a
balanced beamsplitter (HBT configuration) yields a signed mixture of
three thermal states and heralds a two-phonon event.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .covariance import assert_physical, check_phase_insensitive, occupation
from .dynamics import (
    _augmented_moments,
    loss_channel,
    optimal_filter,
    pre_detection_covariance,
    thermal_decoherence,
)
from .errors import HeraldingError, HeraldsimError
from .params import READOUT_COUPLING, READOUT_DURATION, RED, SystemParams
from .states import SignedThermalMixture

APD = "apd"
HBT = "hbt"

P_OFF_MAX = 1.0 - 1e-12
COINCIDENCE_MIN = 1e-14
#: Intensity transmittance of the balanced HBT beamsplitter.
HBT_SPLIT = 0.5


def _occupation_clamped(block: np.ndarray) -> float:
    n = occupation(block)
    if n < -1e-9:
        raise HeraldingError(f"conditional occupation {n:.3e} is negative")
    return max(n, 0.0)


def _vacuum_projection(C_bb: np.ndarray) -> float:
    """Probability 2^N / sqrt(det(C_bb + I)) of projecting modes B on vacuum."""
    n_modes = C_bb.shape[0] // 2
    return float(2.0**n_modes / np.sqrt(np.linalg.det(C_bb + np.eye(C_bb.shape[0]))))


def _conditioned_block(C_aa, C_ab, C_bb) -> np.ndarray:
    """Covariance of modes A after projecting modes B on vacuum."""
    return C_aa - C_ab @ np.linalg.solve(C_bb + np.eye(C_bb.shape[0]), C_ab.T)


def _click_terms(V: np.ndarray) -> tuple[float, float, float]:
    """(p_off, unconditioned occupation, vacuum-projected occupation)."""
    C_mm, C_ml, C_ll = V[:2, :2], V[:2, 2:], V[2:, 2:]
    p_off = _vacuum_projection(C_ll)
    n_unc = _occupation_clamped(C_mm)
    n_proj = _occupation_clamped(_conditioned_block(C_mm, C_ml, C_ll))
    return p_off, n_unc, n_proj


def condition_on_click(V: np.ndarray) -> tuple[SignedThermalMixture, float]:
    """Heralded mechanical state and click probability for an APD click.

    ``V`` is the 4x4 pre-detection covariance of (mechanics, detector mode).
    The heralded state is ``[rho(C_mm) - p_off rho(C'_mm)] / (1 - p_off)``
    with ``p_off`` the no-click probability.
    """
    assert_physical(V)
    check_phase_insensitive(V)
    p_off, n_unc, n_proj = _click_terms(V)
    if p_off >= P_OFF_MAX:
        raise HeraldingError(f"click probability {1.0 - p_off:.3e} is zero-measure")
    click = 1.0 - p_off
    weights = np.array([1.0, -p_off]) / click
    state = SignedThermalMixture(weights, np.array([n_unc, n_proj])).merged()
    return state, click


def _beamsplit_with_ancilla(V: np.ndarray) -> np.ndarray:
    """Append a vacuum ancilla and mix it with the light on a balanced splitter."""
    V6 = np.zeros((6, 6))
    V6[:4, :4] = V
    V6[4:, 4:] = np.eye(2)
    t, r = np.sqrt(HBT_SPLIT), np.sqrt(1.0 - HBT_SPLIT)
    S = np.eye(6)
    S[2:4, 2:4] = t * np.eye(2)
    S[2:4, 4:6] = r * np.eye(2)
    S[4:6, 2:4] = -r * np.eye(2)
    S[4:6, 4:6] = t * np.eye(2)
    return S @ V6 @ S.T


def _coincidence_terms(V: np.ndarray):
    """Vacuum-projection probabilities and conditional occupations for HBT."""
    W = _beamsplit_with_ancilla(V)
    m, l, a = slice(0, 2), slice(2, 4), slice(4, 6)
    la = slice(2, 6)
    n_unc = _occupation_clamped(W[m, m])
    p_l = _vacuum_projection(W[l, l])
    p_a = _vacuum_projection(W[a, a])
    p_la = _vacuum_projection(W[la, la])
    n_l = _occupation_clamped(_conditioned_block(W[m, m], W[m, l], W[l, l]))
    n_a = _occupation_clamped(_conditioned_block(W[m, m], W[m, a], W[a, a]))
    n_la = _occupation_clamped(_conditioned_block(W[m, m], W[m, la], W[la, la]))
    return (p_l, p_a, p_la), (n_unc, n_l, n_a, n_la)


def condition_on_coincidence(V: np.ndarray) -> tuple[SignedThermalMixture, float]:
    """Heralded mechanical state and coincidence probability for an HBT event.

    Both detectors behind the balanced beamsplitter click; the conditional
    state carries weights ``(1, -p(0_L), -p(0_A), +p(0_LA))`` on the
    corresponding vacuum-projected thermal components.
    """
    assert_physical(V)
    check_phase_insensitive(V)
    (p_l, p_a, p_la), occs = _coincidence_terms(V)
    coincidence = 1.0 - p_l - p_a + p_la
    if coincidence < COINCIDENCE_MIN:
        raise HeraldingError(f"coincidence probability {coincidence:.3e} is zero-measure")
    weights = np.array([1.0, -p_l, -p_a, p_la]) / coincidence
    state = SignedThermalMixture(weights, np.array(occs)).merged()
    return state, coincidence


# -- protocols -----------------------------------------------------------------


@dataclass(frozen=True)
class PulseSpec:
    """One detuned drive pulse; ``coupling`` defaults to the system value."""

    detuning_sign: str
    duration: float
    coupling: float | None = None

    def resolve(self, params: SystemParams) -> SystemParams:
        g = params.g if self.coupling is None else self.coupling
        return params.with_(detuning_sign=self.detuning_sign, g=g, pulse_duration=self.duration)


@dataclass(frozen=True)
class ProtocolStep:
    pulse: PulseSpec
    detector: str = APD
    delay_after: float = 0.0

    def __post_init__(self) -> None:
        if self.detector not in (APD, HBT):
            raise ValueError(f"detector must be 'apd' or 'hbt', got {self.detector!r}")
        if self.duration_total < 0.0:
            raise ValueError("durations and delays must be non-negative")

    @property
    def duration_total(self) -> float:
        return self.pulse.duration + self.delay_after


@dataclass(frozen=True)
class ReadoutSpec:
    """Red verification pulse swapping the mechanics onto the detector mode."""

    duration: float = READOUT_DURATION
    zeta: float = 0.0
    coupling: float = READOUT_COUPLING

    def __post_init__(self) -> None:
        if self.duration <= 0.0:
            raise ValueError("readout duration must be positive")
        if not 0.0 <= self.zeta <= 1.0:
            raise ValueError("zeta must lie in [0, 1]")


@dataclass(frozen=True)
class HeraldingPlan:
    """Ordered heralding pulses with optional final readout."""

    steps: tuple[ProtocolStep, ...] = ()
    readout: ReadoutSpec | None = None


@dataclass(frozen=True)
class ProtocolResult:
    state: SignedThermalMixture
    step_probabilities: tuple[float, ...]
    readout_state: SignedThermalMixture | None = None
    readout_transmittance: float | None = None


def _condition_components(
    state: SignedThermalMixture, params: SystemParams, detector: str
) -> tuple[SignedThermalMixture, float]:
    """Run one pulse + detection over every mixture component."""
    tau = params.pulse_duration
    filt = optimal_filter(params, tau)
    new_weights: list[float] = []
    new_occs: list[float] = []
    probability = 0.0
    for w, n in zip(state.weights, state.occupations):
        V = pre_detection_covariance(params, tau, filt, 2.0 * n + 1.0)
        if detector == APD:
            p_off, n_unc, n_proj = _click_terms(V)
            p_here = 1.0 - p_off
            term_w = [1.0, -p_off]
            term_n = [n_unc, n_proj]
        else:
            (p_l, p_a, p_la), occs = _coincidence_terms(V)
            p_here = 1.0 - p_l - p_a + p_la
            term_w = [1.0, -p_l, -p_a, p_la]
            term_n = list(occs)
        probability += w * p_here
        new_weights.extend(w * x for x in term_w)
        new_occs.extend(term_n)
    if probability < COINCIDENCE_MIN:
        raise HeraldingError(f"herald probability {probability:.3e} is zero-measure")
    if not 0.0 < probability <= 1.0 + 1e-9:
        raise HeraldingError(f"herald probability {probability!r} outside (0, 1]")
    mixture = SignedThermalMixture(np.array(new_weights) / probability, np.array(new_occs)).merged()
    return mixture, probability


def run_protocol(plan: HeraldingPlan, params: SystemParams) -> ProtocolResult:
    """Execute a heralding plan starting from the thermal state ``n0``.

    Each pulse re-enters every mixture component into the 4x4 pre-detection
    dynamics with the cavity reset to vacuum (conditioning distributes
    linearly over components), applies the detector POVM, and thermalizes
    through the inter-pulse delay.  The optional readout maps the
    mechanical mixture onto the detector mode of a red pulse and applies
    the detection loss ``zeta``.
    """
    state = SignedThermalMixture.thermal(params.n0)
    probabilities: list[float] = []
    for index, step in enumerate(plan.steps):
        pulse_params = step.pulse.resolve(params)
        try:
            state, prob = _condition_components(state, pulse_params, step.detector)
        except HeraldsimError as exc:
            raise type(exc)(f"step {index} ({step.detector}): {exc}") from exc
        probabilities.append(prob)
        if step.delay_after > 0.0:
            state = thermal_decoherence(state, step.delay_after, params)

    readout_state = None
    transmittance = None
    if plan.readout is not None:
        ro = plan.readout
        ro_params = params.with_(detuning_sign=RED, g=ro.coupling, pulse_duration=ro.duration)
        filt = optimal_filter(ro_params, ro.duration)
        occs = []
        for n in state.occupations:
            V6, c_T = _augmented_moments(ro_params, ro.duration, filt, 2.0 * n + 1.0)
            occs.append(_occupation_clamped(V6[4:, 4:]))
            transmittance = float(c_T**2)
        readout_state = SignedThermalMixture(state.weights.copy(), np.array(occs))
        if ro.zeta > 0.0:
            readout_state = loss_channel(readout_state, ro.zeta)
    return ProtocolResult(state, tuple(probabilities), readout_state, transmittance)


# -- plan constructors -----------------------------------------------------------


def addition_plan(
    pulses: int = 1,
    detector: str = APD,
    duration: float = 2.5e-6,
    delay: float = 1.0e-6,
    coupling: float | None = None,
    readout: ReadoutSpec | None = None,
) -> HeraldingPlan:
    """Blue-pulse phonon addition: ``pulses`` sequential heralds, or one HBT pulse."""
    blue = PulseSpec("blue", duration, coupling)
    steps = tuple(
        ProtocolStep(blue, detector, delay if i < pulses - 1 else 0.0) for i in range(pulses)
    )
    return HeraldingPlan(steps, readout)


def subtraction_plan(
    duration: float,
    coupling: float | None = None,
    readout: ReadoutSpec | None = None,
) -> HeraldingPlan:
    """Red-pulse single-phonon subtraction heralded by an APD click."""
    return HeraldingPlan((ProtocolStep(PulseSpec("red", duration, coupling), APD),), readout)
