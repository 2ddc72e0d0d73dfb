"""Soft-core model potentials and the dipole-coupled laser pulse (atomic units)."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SoftCoreParams:
    """Strengths of the electron-nuclear (a) and electron-electron (b) terms."""

    a: float = 2.0
    b: float = 1.0

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError("soft-core strengths must be >= 0")


@dataclass(frozen=True)
class LaserPulse:
    """Few-cycle pulse: envelope * cos(carrier), zero carrier-envelope phase."""

    e0: float = 0.16
    omega: float = 0.1
    n_cycles: int = 2
    envelope: str = "sin2"
    t_start: float = 0.0

    def __post_init__(self):
        if self.e0 < 0:
            raise ValueError("e0 must be >= 0")
        if not self.omega > 0:
            raise ValueError("omega must be > 0")
        if self.n_cycles < 1:
            raise ValueError("n_cycles must be >= 1")
        if self.envelope not in ("sin2", "flat"):
            raise ValueError(f"unknown envelope {self.envelope!r}")

    @property
    def duration(self):
        return self.n_cycles * 2.0 * math.pi / self.omega


def v_en(x, params: SoftCoreParams):
    """Electron-nuclear attraction -a / sqrt(1 + x^2). Even, bounded below by -a."""
    return -params.a / np.sqrt(1.0 + np.square(x))


def v_ee(separation, params: SoftCoreParams):
    """Electron-electron repulsion b / sqrt(1 + s^2). Even, peaks at b."""
    return params.b / np.sqrt(1.0 + np.square(separation))


def field_at(t, pulse: LaserPulse):
    """Electric field at time t; identically zero outside the pulse window."""
    if pulse is None:
        return 0.0
    tt = np.asarray(t, dtype=np.float64)
    tau = tt - pulse.t_start
    inside = (tau >= 0.0) & (tau <= pulse.duration)
    if pulse.envelope == "flat":
        env = 1.0
    else:
        env = np.sin(np.pi * tau / pulse.duration) ** 2
    value = np.where(inside, pulse.e0 * env * np.cos(pulse.omega * tau), 0.0)
    return float(value) if np.isscalar(t) else value


def v_ext_dipole(x, t, pulse: LaserPulse):
    """Dipole-approximation coupling -x * E(t)."""
    e = field_at(t, pulse)
    return -np.asarray(x, dtype=np.float64) * e
