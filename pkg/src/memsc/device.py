"""Probabilistic CBRAM switching model.

A device under a programming pulse of width t at voltage V turns on with

    P(t, V) = 1 - exp(-t * exp(V / V0) / tau0),

where V0 and tau0 are fitting parameters. Inverting the expression gives
the pulse width that realizes a target switching probability, which is how
bit streams are programmed in-memory. The time-to-switch of a fabricated
device at the 4.5 V programming voltage follows an exponential law with
mean tau = 0.38 ms, reported as the histogram density
P(t) = (delta_t / tau) * exp(-t / tau) with bin constant delta_t = 0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngState

__all__ = [
    "DeviceParams",
    "switch_probability",
    "pulse_width_for",
    "sample_switch",
    "switching_time_density",
    "sample_switching_time",
]

# Default tau0 is pinned so that tau_eff at the 4.5 V programming voltage
# equals the measured 0.38 ms switching-time constant (with V0 = 0.4 V).
DEFAULT_V0 = 0.4
DEFAULT_V_PROG = 4.5
DEFAULT_TAU = 0.38e-3
DEFAULT_TAU0 = DEFAULT_TAU * math.exp(DEFAULT_V_PROG / DEFAULT_V0)


@dataclass
class DeviceParams:
    """CBRAM fitting parameters and the switching-time statistics.

    Parameters
    ----------
    v0 : float
        Voltage fitting parameter (volts).
    tau0 : float
        Time fitting parameter (seconds).
    v_prog : float
        Applied programming voltage (volts).
    delta_t : float
        Histogram bin constant of the reported density fit; affects the
        density normalization only, never sampling.
    tau : float
        Mean switching time of the exponential fit (seconds).
    cell_jitter : float
        Optional per-cell multiplicative lognormal jitter on tau_eff
        (sigma of log); 0 disables device-to-device variation.
    """

    v0: float = DEFAULT_V0
    tau0: float = DEFAULT_TAU0
    v_prog: float = DEFAULT_V_PROG
    delta_t: float = 0.5
    tau: float = DEFAULT_TAU
    cell_jitter: float = 0.0

    def __post_init__(self):
        for name in ("v0", "tau0", "v_prog", "tau"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.cell_jitter < 0:
            raise ValueError("cell_jitter must be >= 0")

    def tau_eff(self, v: float | None = None) -> float:
        """Effective switching time constant at voltage v (default v_prog)."""
        v = self.v_prog if v is None else v
        return self.tau0 * math.exp(-v / self.v0)


def switch_probability(t, v: float, params: DeviceParams):
    """Probability that a pulse of width t at voltage v switches the cell.

    Monotonically nondecreasing in both t and v. Accepts scalar or array t.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("pulse width must be >= 0")
    with np.errstate(over="ignore"):
        p = -np.expm1(-t / params.tau_eff(v))
    return float(p) if p.ndim == 0 else p


def pulse_width_for(p: float, v: float, params: DeviceParams) -> float:
    """Pulse width realizing switching probability p at voltage v.

    Exact inverse of :func:`switch_probability`; the round trip holds to
    ~1e-16 relative. p = 1 is unreachable in finite time.
    """
    if p < 0:
        raise ValueError(f"probability {p} is negative")
    if p >= 1:
        raise ValueError(f"probability {p} unreachable with a finite pulse")
    return -params.tau_eff(v) * math.log1p(-p)


def sample_switch(t: float, v: float, params: DeviceParams, rng: RngState) -> int:
    """One Bernoulli switching event for a pulse of width t at voltage v."""
    p = switch_probability(t, v, params)
    return int(rng.generator.random() < p)


def switching_time_density(t, params: DeviceParams):
    """Reported switching-time histogram density (delta_t/tau) e^(-t/tau)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be >= 0")
    d = (params.delta_t / params.tau) * np.exp(-t / params.tau)
    return float(d) if d.ndim == 0 else d


def sample_switching_time(params: DeviceParams, rng: RngState, size: int | None = None):
    """Draw switching times from the exponential law by inverse transform."""
    u = rng.generator.random(size)
    return -params.tau * np.log1p(-u)
