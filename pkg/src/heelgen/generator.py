"""Magnet-in-coil electromechanical model.

Flux linkage uses a single equivalent dipole on the coil axis with all turns
lumped at the mean radius; the bistable end magnets follow the coaxial
dipole-dipole law with the separation floored at the closest physical
approach. Displacement x is the relative magnet-coil position; the engine
convention is that the foot pushes the mover toward -x.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import _kernel
from .model import GaitProfile, HarvesterDesign
from .gait import force_at

DEFAULT_V_THRESHOLD = 1e-3  # m/s, stage-classification velocity threshold


@dataclass(frozen=True)
class MechState:
    """Mover displacement from equilibrium (m) and velocity (m/s)."""

    x: float
    v: float


class Stage(enum.IntEnum):
    """Operating stage of the generator over a gait cycle."""

    NEUTRAL = 0
    COMPRESSION = 1
    INDUCTION = 2
    RECOVERY = 3


def _design_arr(design: HarvesterDesign):
    import numpy as np

    return np.array([
        design.moving_mass, design.spring_k, design.mech_damping,
        design.stroke_limit, float(design.coil_turns), design.coil_radius,
        design.coil_resistance, design.coil_inductance, design.magnet_moment,
        design.end_magnet_moment, design.end_gap,
    ])


def flux_linkage(design: HarvesterDesign, x: float) -> float:
    """Total flux linkage (Wb-turns) at displacement x; even, maximal at 0."""
    return _kernel.flux_linkage(float(design.coil_turns), design.magnet_moment,
                                design.coil_radius, x)


def dflux_dx(design: HarvesterDesign, x: float) -> float:
    """Analytic d(flux linkage)/dx; odd, zero at x = 0."""
    return _kernel.dflux_dx(float(design.coil_turns), design.magnet_moment,
                            design.coil_radius, x)


def emf(design: HarvesterDesign, x: float, v: float) -> float:
    """Induced EMF e = -dflux_dx(x) * v (Faraday's law through x(t))."""
    return -dflux_dx(design, x) * v


def magnetic_latch_force(design: HarvesterDesign, x: float) -> float:
    """Net pull from the two fixed end magnets, positive toward +x.

    Zero everywhere when end_magnet_moment is zero; odd in x; the 1/d^4 law
    is capped at d_min = end_gap - stroke_limit.
    """
    return _kernel.latch_force(design.magnet_moment, design.end_magnet_moment,
                               design.end_gap,
                               design.end_gap - design.stroke_limit, x)


def latch_potential(design: HarvesterDesign, x: float) -> float:
    """Potential energy of the latch force with U(0) = 0 (for energy audits)."""
    return _kernel.latch_potential(design.magnet_moment, design.end_magnet_moment,
                                   design.end_gap,
                                   design.end_gap - design.stroke_limit, x)


def stop_force(design: HarvesterDesign, x: float, v: float) -> float:
    """Penalty end-stop force; nonzero only while |x| > stroke_limit."""
    return _kernel.stop_force(design.spring_k, design.moving_mass,
                              design.stroke_limit, x, v)


def mech_acceleration(design: HarvesterDesign, state: MechState,
                      f_ext: float, coil_current: float) -> float:
    """Mover acceleration under external force, spring, damper, latch,
    end stops, and the electromagnetic reaction +dflux_dx*i.

    The reaction sign pairs with emf() so that e*i + F_reaction*v = 0: the
    coupling extracts exactly the power the circuit receives.
    """
    return _kernel.mech_accel(_design_arr(design), state.x, state.v,
                              f_ext, coil_current)


def classify_stage(profile: GaitProfile, t: float, state: MechState,
                   v_threshold: float = DEFAULT_V_THRESHOLD) -> Stage:
    """Classify the operating stage at time t.

    Compression while loaded and moving into the stroke; Recovery while
    unloaded and returning toward equilibrium above the velocity threshold;
    Induction for any other motion above threshold; Neutral otherwise.
    """
    return Stage(_kernel.classify(force_at(profile, t), state.x, state.v,
                                  v_threshold))
