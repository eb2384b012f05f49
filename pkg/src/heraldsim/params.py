"""Physical configuration of the pulsed optomechanical system.

All rates are angular frequencies (rad/s). The cavity amplitude decay rate
``kappa`` follows the equation-of-motion convention ``da_c/dt = -kappa a_c``,
so the full cavity linewidth is ``2 kappa``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from math import pi

TWO_PI = 2.0 * pi

BLUE = "blue"
RED = "red"


@dataclass(frozen=True)
class SystemParams:
    """Rates, occupations and pulse timing of one optomechanical pulse.

    Attributes
    ----------
    omega_m:
        Mechanical angular frequency (rad/s). Not used by the rotating-frame
        dynamics; retained for configuration records.
    gamma:
        Mechanical viscous damping rate (rad/s).
    kappa:
        Cavity amplitude decay rate (rad/s); full linewidth is ``2 kappa``.
    g:
        Drive-enhanced optomechanical coupling rate (rad/s).
    detuning_sign:
        ``"blue"`` selects the two-mode-squeezing interaction (phonon
        addition), ``"red"`` the beam-splitter interaction (subtraction /
        state swap).
    n0:
        Initial mean occupation of the mechanical oscillator.
    n_th:
        Mean occupation of the mechanical environment.
    pulse_duration:
        Pulse length in seconds.
    """

    omega_m: float = TWO_PI * 315.3e6
    gamma: float = TWO_PI * 3.12e3
    kappa: float = TWO_PI * 23.6e6
    g: float = TWO_PI * 0.5e6
    detuning_sign: str = BLUE
    n0: float = 0.0
    n_th: float = 1.2
    pulse_duration: float = 2.5e-6

    def __post_init__(self) -> None:
        for name in ("omega_m", "gamma", "kappa", "g"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")
        for name in ("gamma", "kappa"):
            if getattr(self, name) == 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.detuning_sign not in (BLUE, RED):
            raise ValueError(f"detuning_sign must be 'blue' or 'red', got {self.detuning_sign!r}")
        if self.n0 < 0.0 or self.n_th < 0.0:
            raise ValueError("occupations must be non-negative")
        if self.pulse_duration < 0.0:
            raise ValueError("pulse_duration must be non-negative")
        if self.g > self.kappa:
            warnings.warn(
                f"coupling g={self.g:.3e} exceeds kappa={self.kappa:.3e}; "
                "the linearized weak-coupling model assumes g <= kappa",
                stacklevel=2,
            )

    def with_(self, **changes) -> "SystemParams":
        """Return a copy with the given fields replaced."""
        return replace(self, **changes)


# Coupling used by default for the red verification pulse.  The heralding
# default above is deliberately weaker: heralded-state purity degrades with
# drive strength, while readout efficiency improves with it.
READOUT_COUPLING = TWO_PI * 1.0e6
READOUT_DURATION = 9.5e-6


def default_params(**overrides) -> SystemParams:
    """Default configuration of the simulated experiment."""
    return SystemParams(**overrides)
