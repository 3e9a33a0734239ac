"""Heel-strike force waveform synthesis.

Pure functions of an immutable GaitProfile. The phase within the gait cycle
is computed by exact floating-point remainder (fmod), never by accumulating
increments, so long runs do not drift.
"""

from __future__ import annotations

from . import _kernel
from .model import GaitProfile

_SHAPE_CODES = {"half_sine": 0.0, "trapezoid": 1.0}


def shape_code(profile: GaitProfile) -> float:
    return _SHAPE_CODES[profile.shape]


def force_at(profile: GaitProfile, t: float) -> float:
    """Transmitted heel force (N) at time t >= 0.

    Periodic with period 1/cadence; a half_sine or 20/60/20 trapezoid pulse
    of height peak_force * force_fraction fills the duty window, zero
    elsewhere. Always nonnegative: the foot only pushes.
    """
    return _kernel.gait_force(profile.cadence, profile.peak_force,
                              profile.duty, shape_code(profile),
                              profile.force_fraction, t)


def pulse_energy_bound(profile: GaitProfile, stroke: float) -> float:
    """Upper bound on per-step mechanical input work:
    peak_force * force_fraction * stroke."""
    return profile.peak_force * profile.force_fraction * stroke
