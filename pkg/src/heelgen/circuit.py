"""Per-timestep solver for the rectification network.

Topology: Thevenin source (EMF + coil resistance, optional inductance) into
a four-diode full bridge, then smoothing capacitor in parallel with the load
(resistor, battery, or open). Each call advances one backward-Euler step;
the nonlinear bridge is solved by damped Newton with a bisection safeguard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .model import BatteryModel, CircuitConfig, DiodeModel

_DIODE_CODES = {"constant_drop": 0.0, "shockley": 1.0}
_LOAD_CODES = {"resistor": 0.0, "battery": 1.0, "open": 2.0}


class SolverError(RuntimeError):
    """Newton failed to converge or the state went non-finite."""


@dataclass(frozen=True)
class CircuitState:
    """Electrical state after a step. cap_voltage never goes negative."""

    cap_voltage: float = 0.0
    coil_current: float = 0.0
    battery_charge: float = 0.0
    last_diode_losses: float = 0.0  # W during the last step


def circuit_params(cfg: CircuitConfig) -> np.ndarray:
    """Flatten a CircuitConfig into the kernel parameter layout."""
    d = cfg.diode
    b = cfg.battery
    return np.array([
        _DIODE_CODES[d.kind], d.forward_drop, d.saturation_current,
        d.ideality, d.thermal_voltage, cfg.smoothing_cap,
        _LOAD_CODES[cfg.load_kind], cfg.load_resistance,
        b.nominal_voltage, b.internal_resistance, b.capacity,
    ])


def diode_current(model: DiodeModel, v: float) -> float:
    """Diode current at voltage v.

    Shockley: Is*(exp(v/(n*Vt)) - 1) with the exponent clamped at 40.
    constant_drop is an ideal switch plus series drop, not an I-V curve:
    zero below the drop, unbounded above (conduction state is resolved
    inside solve_step).
    """
    if model.kind == "shockley":
        return _kernel.diode_current(model.saturation_current, model.ideality,
                                     model.thermal_voltage, v)
    return 0.0 if v <= model.forward_drop else math.inf


def ripple_estimate(cap: float, load_r: float, dc: float, period: float) -> float:
    """First-order discharge ripple of a capacitor-input filter refreshed
    once per period: dc * period / (load_r * cap)."""
    return dc * period / (load_r * cap)


def battery_step(model: BatteryModel, charge: float, current_in: float,
                 dt: float) -> float:
    """Coulomb counting: charge + current_in*dt clamped to [0, capacity]."""
    return _kernel.battery_step(charge, model.capacity, current_in, dt)


def battery_terminal_voltage(model: BatteryModel, current_in: float) -> float:
    """Terminal voltage the battery presents while absorbing current_in."""
    return model.nominal_voltage + current_in * model.internal_resistance


def solve_step(cfg: CircuitConfig, coil_r: float, coil_l: float, emf: float,
               state: CircuitState, dt: float) -> CircuitState:
    """Advance the network one backward-Euler step of size dt.

    The bridge conducts when the source can overcome the cap voltage plus
    two diode drops; otherwise the cap relaxes through the load alone (with
    an open load it holds its value bit-exactly). Raises SolverError when
    Newton fails to reach residual < 1e-9 A within 100 iterations.
    """
    if dt <= 0:
        raise ValueError("dt must be strictly positive")
    vc, i, q, p_diode, _i_load, status, resid = _kernel.circuit_step(
        circuit_params(cfg), coil_r, coil_l, emf,
        state.cap_voltage, state.coil_current, state.battery_charge, dt)
    if status != _kernel.OK:
        raise SolverError(
            f"circuit Newton did not converge (residual {resid:.3e} A); "
            "dt may be too large or parameters degenerate")
    return CircuitState(cap_voltage=vc, coil_current=i, battery_charge=q,
                        last_diode_losses=p_diode)


def step_energy_audit(cfg: CircuitConfig, coil_r: float, coil_l: float,
                      emf: float, state: CircuitState, dt: float) -> dict:
    """Advance one step and return the energy terms of that step.

    The backward-Euler cap update dissipates C*(dV)^2/2 per step beyond the
    physical stored-energy change; it is reported separately as be_cap_loss
    so the audit identity closes to machine precision:

        emf*i*dt = i^2*R*dt + diode + d(C V^2/2) + d(L i^2/2)
                   + load + be_cap_loss + be_ind_loss
    """
    new = solve_step(cfg, coil_r, coil_l, emf, state, dt)
    dv = new.cap_voltage - state.cap_voltage
    di = new.coil_current - state.coil_current
    g_load, src = _load_terms(cfg)
    i_load = g_load * new.cap_voltage - src
    terms = {
        "source": emf * new.coil_current * dt,
        "coil_loss": new.coil_current ** 2 * coil_r * dt,
        "diode_loss": new.last_diode_losses * dt,
        "cap_delta": 0.5 * cfg.smoothing_cap
        * (new.cap_voltage ** 2 - state.cap_voltage ** 2),
        "ind_delta": 0.5 * coil_l
        * (new.coil_current ** 2 - state.coil_current ** 2),
        "load": new.cap_voltage * i_load * dt,
        "be_cap_loss": 0.5 * cfg.smoothing_cap * dv * dv,
        "be_ind_loss": 0.5 * coil_l * di * di,
    }
    terms["residual"] = terms["source"] - (
        terms["coil_loss"] + terms["diode_loss"] + terms["cap_delta"]
        + terms["ind_delta"] + terms["load"] + terms["be_cap_loss"]
        + terms["be_ind_loss"])
    terms["state"] = new
    return terms


def _load_terms(cfg: CircuitConfig):
    if cfg.load_kind == "resistor":
        return 1.0 / cfg.load_resistance, 0.0
    if cfg.load_kind == "battery":
        b = cfg.battery
        return 1.0 / b.internal_resistance, b.nominal_voltage / b.internal_resistance
    return 0.0, 0.0
