"""Co-simulation driver: mechanics (RK4) + rectifier (implicit per step).

run() integrates a full scenario from rest and returns sampled waveforms, an
energy ledger partitioning the input work, and the summary scalars
(peak_emf, dc_steady, settle_time). run_pulse_source() replaces the
electromechanical generator with an ideal pulsed voltage source in series
with the coil resistance — the rectifier-only experiment.

Per step the mechanics are advanced twice: a predictor pass with the held
coil current yields the step-average EMF -(d lambda)/dt, the circuit takes
one backward-Euler step on it, and a corrector pass re-advances mechanics
with the fresh current. Booking the extracted energy as sum(e*i*dt) with
that pairing is what lets both ledger identities close to < 1e-3.
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernel
from .circuit import SolverError, circuit_params
from .gait import shape_code
from .generator import DEFAULT_V_THRESHOLD, latch_potential
from .model import SimConfig

SETTLE_BAND = 0.02       # fraction of the final value
DC_WINDOW = 0.10         # trailing fraction of the run that defines dc_steady

STAGE_NAMES = ("neutral", "compression", "induction", "recovery")


@dataclass(frozen=True)
class EnergyLedger:
    """End-of-run energy partition, joules.

    Mech identity:  input_work = kinetic + spring + mech_dissipated
                    + electrical_extracted + stop_loss + latch_potential
    Elec identity:  electrical_extracted = coil_loss + diode_loss
                    + cap_stored + inductor_stored + load_delivered

    kinetic/spring/latch_potential are evaluated at the final state (the run
    starts from rest, so they are deltas too); cap_stored and
    inductor_stored are deltas from the initial charge state. In pulse-source
    runs input_work is the source work, so the mech identity degenerates to
    input_work = electrical_extracted.
    """

    input_work: float
    kinetic: float
    spring: float
    mech_dissipated: float
    electrical_extracted: float
    coil_loss: float
    diode_loss: float
    cap_stored: float
    load_delivered: float
    stop_loss: float
    latch_potential: float
    inductor_stored: float = 0.0

    def mech_residual(self, em_coupling: bool = True) -> float:
        """Relative residual of the mech identity (0 for an all-zero run).

        With em_coupling False the reaction force is disabled, so the
        extracted energy is excluded from the mechanical balance.
        """
        em = self.electrical_extracted if em_coupling else 0.0
        rhs = (self.kinetic + self.spring + self.mech_dissipated + em
               + self.stop_loss + self.latch_potential)
        terms = (abs(self.input_work), abs(self.kinetic), abs(self.spring),
                 abs(self.mech_dissipated), abs(em), abs(self.stop_loss),
                 abs(self.latch_potential))
        scale = max(terms)
        if scale == 0.0:
            return 0.0
        return abs(self.input_work - rhs) / scale

    def electrical_residual(self) -> float:
        rhs = (self.coil_loss + self.diode_loss + self.cap_stored
               + self.inductor_stored + self.load_delivered)
        terms = (abs(self.electrical_extracted), abs(self.coil_loss),
                 abs(self.diode_loss), abs(self.cap_stored),
                 abs(self.inductor_stored), abs(self.load_delivered))
        scale = max(terms)
        if scale == 0.0:
            return 0.0
        return abs(self.electrical_extracted - rhs) / scale


@dataclass(frozen=True)
class SimResult:
    """Sampled waveforms plus the energy ledger and summary scalars."""

    time: np.ndarray
    x: np.ndarray
    v: np.ndarray
    emf: np.ndarray
    coil_current: np.ndarray
    cap_voltage: np.ndarray
    stage: np.ndarray  # int8 Stage codes
    ledger: EnergyLedger
    peak_emf: float
    dc_steady: float
    settle_time: float | None
    max_stroke: float
    peak_cap_voltage: float
    config: SimConfig

    @property
    def efficiency(self) -> float:
        if self.ledger.input_work == 0.0:
            return 0.0
        return self.ledger.load_delivered / self.ledger.input_work

    def stage_names(self) -> list[str]:
        return [STAGE_NAMES[s] for s in self.stage]


def settle_time(series: np.ndarray, times: np.ndarray,
                band: float = SETTLE_BAND) -> float | None:
    """Earliest time after which the series never leaves
    [V_inf*(1-band), V_inf*(1+band)], with V_inf the mean of the final 10%
    of samples. None if it never stays in band or V_inf <= 1e-9."""
    if not 0.0 < band < 0.5:
        raise ValueError("band must lie in (0, 0.5)")
    series = np.asarray(series, dtype=float)
    times = np.asarray(times, dtype=float)
    if series.size == 0:
        raise ValueError("series must be nonempty")
    tail = max(1, int(math.ceil(0.1 * series.size)))
    v_inf = float(series[-tail:].mean())
    if v_inf <= 1e-9:
        return None
    out = np.abs(series - v_inf) > band * abs(v_inf)
    if not out.any():
        return float(times[0])
    last_out = int(np.nonzero(out)[0][-1])
    if last_out == series.size - 1:
        return None
    return float(times[last_out + 1])


def _gait_arr(cfg: SimConfig) -> np.ndarray:
    g = cfg.gait
    return np.array([g.cadence, g.peak_force, g.duty, shape_code(g),
                     g.force_fraction])


def _design_arr(cfg: SimConfig) -> np.ndarray:
    d = cfg.design
    return np.array([d.moving_mass, d.spring_k, d.mech_damping,
                     d.stroke_limit, float(d.coil_turns), d.coil_radius,
                     d.coil_resistance, d.coil_inductance, d.magnet_moment,
                     d.end_magnet_moment, d.end_gap])


def _initial_battery_charge(cfg: SimConfig) -> float:
    return cfg.circuit.battery.initial_charge \
        if cfg.circuit.load_kind == "battery" else 0.0


def _raise_on_status(status: int, fail_t: float):
    if status == _kernel.NEWTON_FAIL:
        raise SolverError(f"circuit Newton failed to converge at t = {fail_t:.6f} s; "
                          "reduce sim.dt or check circuit parameters")
    if status == _kernel.NONFINITE:
        raise SolverError(f"non-finite state detected at t = {fail_t:.6f} s; "
                          "sim.dt is too large for this scenario")


def run(cfg: SimConfig) -> SimResult:
    """Simulate the full electromechanical scenario from rest.

    Deterministic: identical configs produce bit-identical results.
    """
    n_steps = int(round(cfg.duration / cfg.dt))
    if n_steps < 1:
        n_steps = 1
    d = cfg.design
    (t_rec, x_rec, v_rec, e_rec, i_rec, vc_rec, st_rec, led, fin,
     status, fail_t) = _kernel.run_gait_loop(
        _design_arr(cfg), _gait_arr(cfg), circuit_params(cfg.circuit),
        d.coil_resistance, d.coil_inductance,
        cfg.circuit.cap_initial_voltage, _initial_battery_charge(cfg),
        cfg.dt, n_steps, cfg.record_stride, cfg.em_coupling,
        DEFAULT_V_THRESHOLD)
    _raise_on_status(status, fail_t)

    input_work, mech_diss, stop_loss, elec_ext, coil_loss, diode_loss, load_del = led
    x_f, v_f, vc_f, i_f, _q_f, max_abs_x, max_vc = fin
    cap = cfg.circuit.smoothing_cap
    ledger = EnergyLedger(
        input_work=input_work,
        kinetic=0.5 * d.moving_mass * v_f * v_f,
        spring=0.5 * d.spring_k * x_f * x_f,
        mech_dissipated=mech_diss,
        electrical_extracted=elec_ext,
        coil_loss=coil_loss,
        diode_loss=diode_loss,
        cap_stored=0.5 * cap * (vc_f * vc_f - cfg.circuit.cap_initial_voltage ** 2),
        load_delivered=load_del,
        stop_loss=stop_loss,
        latch_potential=latch_potential(d, x_f),
        inductor_stored=0.5 * d.coil_inductance * i_f * i_f,
    )
    return _finish(cfg, t_rec, x_rec, v_rec, e_rec, i_rec, vc_rec, st_rec,
                   ledger, max_abs_x, max_vc)


def run_pulse_source(cfg: SimConfig, amplitude: float, width: float) -> SimResult:
    """Rectifier-only run: ideal pulsed source (amplitude, width, period
    1/cadence) in series with coil_resistance feeding the bridge."""
    if amplitude < 0:
        raise ValueError("amplitude must be nonnegative")
    period = 1.0 / cfg.gait.cadence
    if not 0.0 < width < period:
        raise ValueError("width must lie in (0, 1/cadence)")
    n_steps = int(round(cfg.duration / cfg.dt))
    if n_steps < 1:
        n_steps = 1
    d = cfg.design
    t_rec, e_rec, i_rec, vc_rec, led, fin, status, fail_t = _kernel.run_pulse_loop(
        amplitude, width, period, circuit_params(cfg.circuit),
        d.coil_resistance, d.coil_inductance,
        cfg.circuit.cap_initial_voltage, _initial_battery_charge(cfg),
        cfg.dt, n_steps, cfg.record_stride)
    _raise_on_status(status, fail_t)

    source_work, _, _, elec_ext, coil_loss, diode_loss, load_del = led
    _x, _v, vc_f, i_f, _q_f, _mx, max_vc = fin
    cap = cfg.circuit.smoothing_cap
    ledger = EnergyLedger(
        input_work=source_work, kinetic=0.0, spring=0.0, mech_dissipated=0.0,
        electrical_extracted=elec_ext, coil_loss=coil_loss,
        diode_loss=diode_loss,
        cap_stored=0.5 * cap * (vc_f * vc_f - cfg.circuit.cap_initial_voltage ** 2),
        load_delivered=load_del, stop_loss=0.0, latch_potential=0.0,
        inductor_stored=0.5 * d.coil_inductance * i_f * i_f,
    )
    zeros = np.zeros_like(t_rec)
    stages = np.zeros(t_rec.size, dtype=np.int8)  # no motion: Neutral
    return _finish(cfg, t_rec, zeros, zeros, e_rec, i_rec, vc_rec, stages,
                   ledger, 0.0, max_vc)


def _finish(cfg, t_rec, x_rec, v_rec, e_rec, i_rec, vc_rec, st_rec, ledger,
            max_abs_x, max_vc) -> SimResult:
    window = t_rec >= (1.0 - DC_WINDOW) * cfg.duration
    dc = float(vc_rec[window].mean()) if window.any() else float(vc_rec[-1])
    for arr in (t_rec, x_rec, v_rec, e_rec, i_rec, vc_rec):
        arr.setflags(write=False)
    st_rec.setflags(write=False)
    return SimResult(
        time=t_rec, x=x_rec, v=v_rec, emf=e_rec, coil_current=i_rec,
        cap_voltage=vc_rec, stage=st_rec, ledger=ledger,
        peak_emf=float(np.abs(e_rec).max()),
        dc_steady=dc,
        settle_time=settle_time(vc_rec, t_rec, SETTLE_BAND),
        max_stroke=float(max_abs_x),
        peak_cap_voltage=float(max_vc),
        config=cfg,
    )


def run_batch(cfgs: list[SimConfig], max_workers: int | None = None) -> list[SimResult]:
    """Evaluate several configs concurrently; results keep input order."""
    if len(cfgs) <= 1:
        return [run(c) for c in cfgs]
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(run, cfgs))


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def summary(result: SimResult) -> dict[str, str]:
    """Summary block written to the sidecar file and printed by the CLI."""
    led = result.ledger
    return {
        "peak_emf": _fmt(result.peak_emf),
        "dc_steady": _fmt(result.dc_steady),
        "settle_time": "none" if result.settle_time is None else _fmt(result.settle_time),
        "input_work": _fmt(led.input_work),
        "load_delivered": _fmt(led.load_delivered),
        "efficiency": _fmt(result.efficiency),
    }


def export_csv(result: SimResult, path):
    """Write the waveforms as CSV (t,x,v,emf,i_coil,v_cap,stage) plus a
    `<path>.summary` sidecar of key=value lines. Full 17-digit precision;
    locale-independent."""
    p = Path(path)
    names = result.stage_names()
    with p.open("w", newline="\n") as f:
        f.write("t,x,v,emf,i_coil,v_cap,stage\n")
        for k in range(result.time.size):
            f.write(f"{_fmt(result.time[k])},{_fmt(result.x[k])},"
                    f"{_fmt(result.v[k])},{_fmt(result.emf[k])},"
                    f"{_fmt(result.coil_current[k])},"
                    f"{_fmt(result.cap_voltage[k])},{names[k]}\n")
    sidecar = p.with_name(p.name + ".summary")
    with sidecar.open("w", newline="\n") as f:
        for key, value in summary(result).items():
            f.write(f"{key}={value}\n")
