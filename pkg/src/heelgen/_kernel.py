"""Numba-compiled numerical core shared by the public modules.

Everything here works on plain floats and flat parameter arrays so the hot
loops stay in nopython mode. Public modules (generator, circuit, engine)
wrap these with the dataclass-based API; the physics lives only here.

Parameter array layouts (float64):

design[11]: moving_mass, spring_k, mech_damping, stroke_limit, coil_turns,
            coil_radius, coil_resistance, coil_inductance, magnet_moment,
            end_magnet_moment, end_gap
gait[5]:    cadence, peak_force, duty, shape_code (0 half_sine, 1 trapezoid),
            force_fraction
circ[11]:   diode_kind (0 constant_drop, 1 shockley), forward_drop,
            saturation_current, ideality, thermal_voltage, smoothing_cap,
            load_kind (0 resistor, 1 battery, 2 open), load_resistance,
            battery_nominal_voltage, battery_internal_resistance,
            battery_capacity
"""

import math

import numpy as np
from numba import njit

MU0 = 4.0e-7 * math.pi

# design[] indices
D_MASS, D_K, D_C, D_STROKE, D_TURNS, D_RADIUS, D_RCOIL, D_LCOIL, \
    D_MOMENT, D_END_MOMENT, D_END_GAP = range(11)

# circ[] indices
C_DIODE_KIND, C_VF, C_IS, C_N, C_VT, C_CAP, C_LOAD_KIND, C_RLOAD, \
    C_VNOM, C_RINT, C_QCAP = range(11)

# stage codes
STAGE_NEUTRAL, STAGE_COMPRESSION, STAGE_INDUCTION, STAGE_RECOVERY = 0, 1, 2, 3

# solver status codes
OK, NEWTON_FAIL, NONFINITE = 0, 1, 2

NEWTON_MAX_ITERS = 100
NEWTON_TOL = 1e-9  # residual tolerance, natural units (A)


# -- gait -------------------------------------------------------------------

@njit(cache=True, nogil=True)
def gait_force(cadence, peak_force, duty, shape_code, force_fraction, t):
    """Heel force at time t >= 0. Periodic via exact remainder phase
    reduction (for t >= 0 the float % operator is IEEE fmod)."""
    period = 1.0 / cadence
    phase = t % period
    window = duty * period
    if phase >= window:
        return 0.0
    peak = peak_force * force_fraction
    if shape_code == 0:  # half_sine
        return peak * math.sin(math.pi * phase / window)
    u = phase / window  # trapezoid: 20% rise / 60% hold / 20% fall
    if u < 0.2:
        return peak * (u / 0.2)
    if u <= 0.8:
        return peak
    return peak * ((1.0 - u) / 0.2)


# -- generator --------------------------------------------------------------

@njit(cache=True, nogil=True)
def flux_linkage(turns, moment, radius, x):
    """Coaxial-dipole flux linkage: N*mu0*m*a^2 / (2 (a^2+x^2)^(3/2))."""
    a2 = radius * radius
    return turns * MU0 * moment * a2 / (2.0 * (a2 + x * x) ** 1.5)


@njit(cache=True, nogil=True)
def dflux_dx(turns, moment, radius, x):
    a2 = radius * radius
    return -3.0 * turns * MU0 * moment * a2 * x / (2.0 * (a2 + x * x) ** 2.5)


@njit(cache=True, nogil=True)
def latch_force(moment, end_moment, end_gap, d_min, x):
    """Net dipole-dipole pull toward the nearer end magnet (+x toward top).

    Each side follows 3*mu0*m1*m2/(2*pi*d^4) with d floored at d_min; the
    floor is the closest physical approach, end_gap - stroke_limit.
    """
    if end_moment == 0.0:
        return 0.0
    k = 1.5 * MU0 * moment * end_moment / math.pi
    d_top = end_gap - x
    if d_top < d_min:
        d_top = d_min
    d_bot = end_gap + x
    if d_bot < d_min:
        d_bot = d_min
    return k / d_top ** 4 - k / d_bot ** 4


@njit(cache=True, nogil=True)
def latch_potential(moment, end_moment, end_gap, d_min, x):
    """Potential of latch_force with U(0) = 0; exact -dU/dx including the floor."""
    if end_moment == 0.0:
        return 0.0
    k = 1.5 * MU0 * moment * end_moment / math.pi

    def side(d):
        if d >= d_min:
            return -k / (3.0 * d ** 3)
        return -k / (3.0 * d_min ** 3) + (d - d_min) * k / d_min ** 4

    return side(end_gap - x) + side(end_gap + x) - 2.0 * side(end_gap)


@njit(cache=True, nogil=True)
def stop_force(spring_k, mass, stroke, x, v):
    """Penalty end-stop: k_stop = 100k spring + near-critical damper,
    active only while penetrating."""
    k_stop = 100.0 * spring_k
    if x > stroke:
        c_stop = 2.0 * math.sqrt(k_stop * mass)
        return -k_stop * (x - stroke) - c_stop * v
    if x < -stroke:
        c_stop = 2.0 * math.sqrt(k_stop * mass)
        return -k_stop * (x + stroke) - c_stop * v
    return 0.0


@njit(cache=True, nogil=True)
def mech_accel(design, x, v, f_ext, coil_current):
    """Newton's law for the mover. The electromagnetic reaction term
    +dflux_dx*i removes exactly the power e*i the circuit receives
    (e = -dflux_dx*v), so e*i + F_reaction*v = 0 identically."""
    f = f_ext - design[D_K] * x - design[D_C] * v
    f += latch_force(design[D_MOMENT], design[D_END_MOMENT], design[D_END_GAP],
                     design[D_END_GAP] - design[D_STROKE], x)
    f += dflux_dx(design[D_TURNS], design[D_MOMENT], design[D_RADIUS], x) * coil_current
    f += stop_force(design[D_K], design[D_MASS], design[D_STROKE], x, v)
    return f / design[D_MASS]


@njit(cache=True, nogil=True)
def classify(force, x, v, v_threshold):
    """Operating stage from (gait force, displacement, velocity).

    Compression while loaded and moving into the stroke (engine convention:
    the foot pushes toward -x); Recovery while unloaded and returning toward
    equilibrium; Induction for any other motion above threshold."""
    if force > 0.0 and v < 0.0:
        return STAGE_COMPRESSION
    if force == 0.0 and x * v < 0.0 and abs(v) >= v_threshold:
        return STAGE_RECOVERY
    if abs(v) >= v_threshold:
        return STAGE_INDUCTION
    return STAGE_NEUTRAL


# -- diodes and bridge ------------------------------------------------------

@njit(cache=True, nogil=True)
def diode_current(saturation_current, ideality, thermal_voltage, v):
    """Shockley law with the exponent argument clamped at 40; past the clamp
    the current continues linearly so Newton keeps a nonzero slope."""
    arg = v / (ideality * thermal_voltage)
    if arg <= 40.0:
        return saturation_current * math.expm1(arg)
    e40 = math.exp(40.0)
    return saturation_current * (e40 * (1.0 + (arg - 40.0)) - 1.0)


@njit(cache=True, nogil=True)
def diode_conductance(saturation_current, ideality, thermal_voltage, v):
    arg = v / (ideality * thermal_voltage)
    if arg > 40.0:
        arg = 40.0
    return saturation_current * math.exp(arg) / (ideality * thermal_voltage)


@njit(cache=True, nogil=True)
def bridge_currents(is_, n, vt, vp, vc):
    """Exact reduction of the four-diode bridge with identical diodes.

    vp is the AC-port voltage, vc the DC-side (cap node) voltage. Returns
    (i_ac into the port, i_dc delivered to the cap node). Each conducting
    pair splits (vp - vc) or (-vp - vc) equally across its two diodes."""
    i1 = diode_current(is_, n, vt, 0.5 * (vp - vc))
    i2 = diode_current(is_, n, vt, 0.5 * (-vp - vc))
    return i1 - i2, i1 + i2


# -- circuit step -----------------------------------------------------------

@njit(cache=True, nogil=True)
def _load_terms(circ, q):
    """Load branch as i_load(vc) = g*vc - src (current out of the cap node)."""
    kind = int(circ[C_LOAD_KIND])
    if kind == 0:  # resistor
        return 1.0 / circ[C_RLOAD], 0.0
    if kind == 1:  # battery: ideal source + internal resistance
        return 1.0 / circ[C_RINT], circ[C_VNOM] / circ[C_RINT]
    return 0.0, 0.0  # open


@njit(cache=True, nogil=True)
def battery_step(charge, capacity, current_in, dt):
    """Coulomb counting with clamping at the capacity limits."""
    q = charge + current_in * dt
    if q < 0.0:
        q = 0.0
    elif q > capacity:
        q = capacity
    return q


@njit(cache=True, nogil=True)
def _solve_vp(is_, n, vt, e, r_c, vc):
    """Series-path voltage for the Shockley bridge at zero inductance.

    Solves (e - vp)/r_c = i_ac(vp, vc); the left side is strictly decreasing
    and the right strictly increasing in vp, so the root is unique. Newton
    with a maintained bisection bracket."""
    span = abs(e) + vc + 2.0
    lo, hi = -span, span
    vp = e  # good start: small currents keep vp near e
    if vp < lo or vp > hi:
        vp = 0.0
    for _ in range(200):
        i_ac, _unused = bridge_currents(is_, n, vt, vp, vc)
        g = (e - vp) / r_c - i_ac
        if abs(g) < 1e-13:
            return vp
        if g > 0.0:  # root is above
            lo = vp
        else:
            hi = vp
        d1 = diode_conductance(is_, n, vt, 0.5 * (vp - vc))
        d2 = diode_conductance(is_, n, vt, 0.5 * (-vp - vc))
        dg = -1.0 / r_c - 0.5 * (d1 + d2)
        step = -g / dg
        vp = vp + step
        if vp <= lo or vp >= hi:
            vp = 0.5 * (lo + hi)
    return vp


@njit(cache=True, nogil=True)
def circuit_step(circ, r_c, l_c, e, vc_prev, i_prev, q_prev, dt):
    """One backward-Euler step of the rectifier network.

    Returns (vc, i_coil, q_batt, p_diode, i_load, status, residual).
    status: 0 ok, 1 Newton failed (residual reported).
    """
    g_load, src_load = _load_terms(circ, q_prev)
    c_over_dt = circ[C_CAP] / dt
    diode_kind = int(circ[C_DIODE_KIND])
    load_kind = int(circ[C_LOAD_KIND])

    # Off-state cap node: exact backward-Euler relaxation through the load.
    denom_off = c_over_dt + g_load
    if denom_off > 0.0:
        vc_off = (c_over_dt * vc_prev + src_load) / denom_off
    else:
        vc_off = vc_prev  # no cap, open load: inert node

    if diode_kind == 0:
        # Ideal switch + 2*Vf series drop; conduction state detected by trial.
        vf2 = 2.0 * circ[C_VF]
        s = 1.0 if e >= 0.0 else -1.0
        drive = abs(e) - vf2
        if l_c == 0.0:
            denom = c_over_dt + g_load + 1.0 / r_c
            vc_on = (c_over_dt * vc_prev + src_load + drive / r_c) / denom
            i_dc = (drive - vc_on) / r_c
            if i_dc > 0.0:
                i_load = g_load * vc_on - src_load
                q = battery_step(q_prev, circ[C_QCAP], i_load, dt) \
                    if load_kind == 1 else q_prev
                return vc_on, s * i_dc, q, vf2 * i_dc, i_load, OK, 0.0
        else:
            # series: e = i*r_c + L(i - i_prev)/dt + s*(vc + 2Vf)
            # cap:    C(vc - vc_prev)/dt + g*vc - src = s*i
            a = r_c + l_c / dt
            # s*i = (|e| - vf2 - vc + s*L*i_prev/dt*s...) careful with signs:
            # i = (e - s*(vc + vf2) + L*i_prev/dt) / a ; i_dc = s*i
            rhs_cap = c_over_dt * vc_prev + src_load
            # substitute i into cap eq: (c_over_dt+g)vc - rhs_cap = s*i
            # s*i = (s*e - vc - vf2 + s*L*i_prev/dt)/a
            denom = c_over_dt + g_load + 1.0 / a
            vc_on = (rhs_cap + (s * e - vf2 + s * l_c * i_prev / dt) / a) / denom
            i = (e - s * (vc_on + vf2) + l_c * i_prev / dt) / a
            i_dc = s * i
            if i_dc > 0.0:
                i_load = g_load * vc_on - src_load
                q = battery_step(q_prev, circ[C_QCAP], i_load, dt) \
                    if load_kind == 1 else q_prev
                return vc_on, i, q, vf2 * i_dc, i_load, OK, 0.0
        # blocked: bridge open, current interrupted
        i_load = g_load * vc_off - src_load
        q = battery_step(q_prev, circ[C_QCAP], i_load, dt) if load_kind == 1 else q_prev
        return vc_off, 0.0, q, 0.0, i_load, OK, 0.0

    # Shockley bridge. Gate: below |e| <= vc_off both forward pairs are
    # reverse biased; bridge leakage is neglected (treated as fully open).
    is_, n, vt = circ[C_IS], circ[C_N], circ[C_VT]
    if abs(e) <= vc_off:
        i_load = g_load * vc_off - src_load
        q = battery_step(q_prev, circ[C_QCAP], i_load, dt) if load_kind == 1 else q_prev
        return vc_off, 0.0, q, 0.0, i_load, OK, 0.0

    if l_c == 0.0:
        # Outer 1-D Newton on the cap node; the residual is monotone in vc.
        lo = 0.0
        hi = abs(e) + vc_prev + 1.0
        vc = vc_prev
        if vc <= lo or vc >= hi:
            vc = 0.5 * (lo + hi)
        resid = 0.0
        for it in range(NEWTON_MAX_ITERS):
            vp = _solve_vp(is_, n, vt, e, r_c, vc)
            i_ac, i_dc = bridge_currents(is_, n, vt, vp, vc)
            resid = c_over_dt * (vc - vc_prev) + g_load * vc - src_load - i_dc
            if abs(resid) < NEWTON_TOL:
                i_load = g_load * vc - src_load
                p_diode = vp * i_ac - vc * i_dc
                q = battery_step(q_prev, circ[C_QCAP], i_load, dt) \
                    if load_kind == 1 else q_prev
                return vc, i_ac, q, p_diode, i_load, OK, abs(resid)
            if resid > 0.0:
                hi = vc
            else:
                lo = vc
            d1 = diode_conductance(is_, n, vt, 0.5 * (vp - vc))
            d2 = diode_conductance(is_, n, vt, 0.5 * (-vp - vc))
            # dvp*/dvc along the inner solution manifold
            dvp = (d1 - d2) / (2.0 / r_c + d1 + d2)
            di_dc = 0.5 * (d1 - d2) * dvp - 0.5 * (d1 + d2)
            dres = c_over_dt + g_load - di_dc
            vc = vc - resid / dres
            if vc <= lo or vc >= hi:
                vc = 0.5 * (lo + hi)
        return vc, 0.0, q_prev, 0.0, 0.0, NEWTON_FAIL, abs(resid)

    # Shockley with inductance: damped 2-D Newton on (vp, vc).
    vp = e - i_prev * r_c
    vc = vc_prev
    resid = 0.0
    for it in range(NEWTON_MAX_ITERS):
        i_ac, i_dc = bridge_currents(is_, n, vt, vp, vc)
        r1 = e - i_ac * r_c - l_c * (i_ac - i_prev) / dt - vp
        r2 = c_over_dt * (vc - vc_prev) + g_load * vc - src_load - i_dc
        resid = abs(r1) / max(r_c, 1.0) + abs(r2)
        if resid < NEWTON_TOL:
            i_load = g_load * vc - src_load
            p_diode = vp * i_ac - vc * i_dc
            q = battery_step(q_prev, circ[C_QCAP], i_load, dt) \
                if load_kind == 1 else q_prev
            return vc, i_ac, q, p_diode, i_load, OK, resid
        d1 = diode_conductance(is_, n, vt, 0.5 * (vp - vc))
        d2 = diode_conductance(is_, n, vt, 0.5 * (-vp - vc))
        zi = r_c + l_c / dt
        a11 = -zi * 0.5 * (d1 + d2) - 1.0
        a12 = -zi * 0.5 * (-d1 + d2)
        a21 = -0.5 * (d1 - d2)
        a22 = c_over_dt + g_load + 0.5 * (d1 + d2)
        det = a11 * a22 - a12 * a21
        if det == 0.0:
            break
        dvp = (-r1 * a22 + r2 * a12) / det
        dvc = (-a11 * r2 + a21 * r1) / det
        # halve the step while the residual grows
        scale = 1.0
        for _ in range(30):
            i_ac2, i_dc2 = bridge_currents(is_, n, vt, vp + scale * dvp, vc + scale * dvc)
            t1 = e - i_ac2 * r_c - l_c * (i_ac2 - i_prev) / dt - (vp + scale * dvp)
            t2 = c_over_dt * (vc + scale * dvc - vc_prev) + g_load * (vc + scale * dvc) \
                - src_load - i_dc2
            if abs(t1) / max(r_c, 1.0) + abs(t2) <= resid:
                break
            scale *= 0.5
        vp += scale * dvp
        vc += scale * dvc
        if vc < 0.0:
            vc = 0.0
    return vc, 0.0, q_prev, 0.0, 0.0, NEWTON_FAIL, resid


# -- mechanics step ---------------------------------------------------------

@njit(cache=True, nogil=True)
def _mech_rates(design, gait, t, x, v, i_coil):
    """State and work-integral rates: (dx, dv, input, damping, stop power)."""
    f_gait = gait_force(gait[0], gait[1], gait[2], gait[3], gait[4], t)
    f_ext = -f_gait  # the foot pushes the mover toward -x
    a = mech_accel(design, x, v, f_ext, i_coil)
    f_stop = stop_force(design[D_K], design[D_MASS], design[D_STROKE], x, v)
    return v, a, f_ext * v, design[D_C] * v * v, -f_stop * v


@njit(cache=True, nogil=True)
def rk4_mech(design, gait, t, dt, x, v, i_coil):
    """Classic RK4 on (x, v) with the coil current held fixed; also returns
    the step increments of the work integrals (input, damping, stop loss)."""
    dx1, dv1, w1, m1, s1 = _mech_rates(design, gait, t, x, v, i_coil)
    h = 0.5 * dt
    dx2, dv2, w2, m2, s2 = _mech_rates(design, gait, t + h, x + h * dx1, v + h * dv1, i_coil)
    dx3, dv3, w3, m3, s3 = _mech_rates(design, gait, t + h, x + h * dx2, v + h * dv2, i_coil)
    dx4, dv4, w4, m4, s4 = _mech_rates(design, gait, t + dt, x + dt * dx3, v + dt * dv3, i_coil)
    sixth = dt / 6.0
    x1 = x + sixth * (dx1 + 2.0 * dx2 + 2.0 * dx3 + dx4)
    v1 = v + sixth * (dv1 + 2.0 * dv2 + 2.0 * dv3 + dv4)
    dw = sixth * (w1 + 2.0 * w2 + 2.0 * w3 + w4)
    dm = sixth * (m1 + 2.0 * m2 + 2.0 * m3 + m4)
    ds = sixth * (s1 + 2.0 * s2 + 2.0 * s3 + s4)
    return x1, v1, dw, dm, ds


# -- full runs ---------------------------------------------------------------

@njit(cache=True, nogil=True)
def run_gait_loop(design, gait, circ, r_c, l_c, cap_v0, q0, dt, n_steps,
                  stride, em_coupling, v_threshold):
    """Co-simulate mechanics and rectifier from rest.

    Per step: predictor RK4 with the held coil current gives the step-average
    EMF -(dlambda)/dt; the circuit takes one implicit step on that EMF; the
    corrector RK4 rewinds and advances mechanics with the new current.

    Returns record arrays, ledger integrals, extrema, and a status tuple.
    """
    n_rec = n_steps // stride + 1
    t_rec = np.empty(n_rec)
    x_rec = np.empty(n_rec)
    v_rec = np.empty(n_rec)
    e_rec = np.empty(n_rec)
    i_rec = np.empty(n_rec)
    vc_rec = np.empty(n_rec)
    st_rec = np.empty(n_rec, dtype=np.int8)

    turns, moment, radius = design[D_TURNS], design[D_MOMENT], design[D_RADIUS]
    x = 0.0
    v = 0.0
    vc = cap_v0
    i = 0.0
    q = q0

    input_work = 0.0
    mech_diss = 0.0
    stop_loss = 0.0
    elec_ext = 0.0
    coil_loss = 0.0
    diode_loss = 0.0
    load_del = 0.0
    max_abs_x = 0.0
    max_vc = vc

    t_rec[0] = 0.0
    x_rec[0] = 0.0
    v_rec[0] = 0.0
    e_rec[0] = 0.0
    i_rec[0] = 0.0
    vc_rec[0] = vc
    f0 = gait_force(gait[0], gait[1], gait[2], gait[3], gait[4], 0.0)
    st_rec[0] = classify(f0, 0.0, 0.0, v_threshold)

    status = OK
    fail_t = 0.0

    for k in range(n_steps):
        t = k * dt
        i_held = i if em_coupling else 0.0
        # predictor: average EMF over the step from the realized flux change
        xp, vp_, wp, mp, sp = rk4_mech(design, gait, t, dt, x, v, i_held)
        lam0 = flux_linkage(turns, moment, radius, x)
        lam1 = flux_linkage(turns, moment, radius, xp)
        e_step = -(lam1 - lam0) / dt

        vc1, i1, q1, p_diode, i_load, st, resid = circuit_step(
            circ, r_c, l_c, e_step, vc, i, q, dt)
        if st != OK:
            status = st
            fail_t = t
            break

        if em_coupling:
            # corrector: re-advance mechanics holding the fresh current
            x1, v1, dw, dm, ds = rk4_mech(design, gait, t, dt, x, v, i1)
        else:
            x1, v1, dw, dm, ds = xp, vp_, wp, mp, sp

        input_work += dw
        mech_diss += dm
        stop_loss += ds
        elec_ext += e_step * i1 * dt
        coil_loss += i1 * i1 * r_c * dt
        diode_loss += p_diode * dt
        load_del += vc1 * i_load * dt

        x, v, vc, i, q = x1, v1, vc1, i1, q1
        if not (math.isfinite(x) and math.isfinite(v) and math.isfinite(vc)):
            status = NONFINITE
            fail_t = t
            break
        if abs(x) > max_abs_x:
            max_abs_x = abs(x)
        if vc > max_vc:
            max_vc = vc

        if (k + 1) % stride == 0:
            j = (k + 1) // stride
            tj = (k + 1) * dt
            t_rec[j] = tj
            x_rec[j] = x
            v_rec[j] = v
            e_rec[j] = e_step
            i_rec[j] = i
            vc_rec[j] = vc
            fj = gait_force(gait[0], gait[1], gait[2], gait[3], gait[4], tj)
            st_rec[j] = classify(fj, x, v, v_threshold)

    ledger = np.array([input_work, mech_diss, stop_loss, elec_ext,
                       coil_loss, diode_loss, load_del])
    final = np.array([x, v, vc, i, q, max_abs_x, max_vc])
    return (t_rec, x_rec, v_rec, e_rec, i_rec, vc_rec, st_rec,
            ledger, final, status, fail_t)


@njit(cache=True, nogil=True)
def pulse_value(amplitude, width, period, t, dt):
    """Step-average of a rectangular pulse train over [t, t+dt)."""
    phase = t % period
    hi = phase + dt
    ov = min(hi, width) - phase
    if ov < 0.0:
        ov = 0.0
    if hi > period:  # wrap into the next pulse
        spill = hi - period
        ov += min(spill, width)
    if ov > dt:
        ov = dt
    return amplitude * ov / dt


@njit(cache=True, nogil=True)
def run_pulse_loop(amplitude, width, period, circ, r_c, l_c, cap_v0, q0,
                   dt, n_steps, stride):
    """Rectifier-only run: the generator is replaced by an ideal pulsed
    voltage source in series with the coil resistance. The source work plays
    the role of the mechanical input in the ledger."""
    n_rec = n_steps // stride + 1
    t_rec = np.empty(n_rec)
    e_rec = np.empty(n_rec)
    i_rec = np.empty(n_rec)
    vc_rec = np.empty(n_rec)

    vc = cap_v0
    i = 0.0
    q = q0
    source_work = 0.0
    coil_loss = 0.0
    diode_loss = 0.0
    load_del = 0.0
    max_vc = vc

    t_rec[0] = 0.0
    e_rec[0] = 0.0
    i_rec[0] = 0.0
    vc_rec[0] = vc

    status = OK
    fail_t = 0.0

    for k in range(n_steps):
        t = k * dt
        e_step = pulse_value(amplitude, width, period, t, dt)
        vc1, i1, q1, p_diode, i_load, st, resid = circuit_step(
            circ, r_c, l_c, e_step, vc, i, q, dt)
        if st != OK:
            status = st
            fail_t = t
            break
        source_work += e_step * i1 * dt
        coil_loss += i1 * i1 * r_c * dt
        diode_loss += p_diode * dt
        load_del += vc1 * i_load * dt
        vc, i, q = vc1, i1, q1
        if not math.isfinite(vc):
            status = NONFINITE
            fail_t = t
            break
        if vc > max_vc:
            max_vc = vc
        if (k + 1) % stride == 0:
            j = (k + 1) // stride
            t_rec[j] = (k + 1) * dt
            e_rec[j] = e_step
            i_rec[j] = i
            vc_rec[j] = vc

    ledger = np.array([source_work, 0.0, 0.0, source_work,
                       coil_loss, diode_loss, load_del])
    final = np.array([0.0, 0.0, vc, i, q, 0.0, max_vc])
    return t_rec, e_rec, i_rec, vc_rec, ledger, final, status, fail_t
