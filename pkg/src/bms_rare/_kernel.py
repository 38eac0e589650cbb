"""Compiled twin of :func:`bms_rare.model.simulate` with the criticality monitor fused in.

Every arithmetic expression mirrors the reference implementation operation
for operation so both routes agree bit for bit; tests assert that.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from bms_rare.criticality import CriticalitySpec
from bms_rare.model import ControlLimits, SimParams

CHARGING, RESTING, DISCHARGING = 0, 1, 2


@numba.njit(cache=True)
def _r_factor(soc, i, rlo, rhi, ilo, ihi, fac, soc_top, i_top):
    for k in range(rlo.shape[0]):
        in_soc = (rlo[k] <= soc and soc < rhi[k]) or (rhi[k] == soc_top and soc == soc_top)
        in_i = (ilo[k] <= i and i < ihi[k]) or (ihi[k] == i_top and i == i_top)
        if in_soc and in_i:
            return fac[k]
    return 1.0


@numba.njit(cache=True)
def _kappa(t, t_bat, cr):
    # cr = (t_min_h, t_fatal_h, temp_min_c, temp_fatal_c)
    kt = (t / 3600.0 - cr[0]) / (cr[1] - cr[0])
    kt = min(max(kt, 0.0), 1.0)
    kb = (t_bat - cr[2]) / (cr[3] - cr[2])
    kb = min(max(kb, 0.0), 1.0)
    return max(kt, kb)


@numba.njit(cache=True)
def run_one(t_amb, i_max, sp, lm, cr, rlo, rhi, ilo, ihi, fac, soc_top, i_top):
    """Returns (kappa_peak, charging_time_s, timed_out, t_bat_peak, steps, bad_step)."""
    b_size, mc, ah, r_int, r_a, ocv0, slope, soc, t_bat, dt, t_max = (
        sp[0], sp[1], sp[2], sp[3], sp[4], sp[5], sp[6], sp[7], sp[8], sp[9], sp[10])
    (soc_full, t_hi, t_re, t_lo, t_lo_re, u_hi, u_re, heatup, f_soc_lo, f_soc_hi,
     f_t_lo, f_t_hi, i_heat, i_slow, i_rest) = (
        lm[0], lm[1], lm[2], lm[3], lm[4], lm[5], lm[6], lm[7], lm[8], lm[9],
        lm[10], lm[11], lm[12], lm[13], lm[14])
    t = 0.0
    u = r_a * 0.0 + slope * soc + ocv0
    ctl = CHARGING
    kp = _kappa(t, t_bat, cr)
    tp = t_bat
    k = 0
    done = False
    while t < t_max:
        # approval
        if soc >= soc_full:
            done = True
            break
        if ctl == RESTING:
            if t_bat <= t_re and u <= u_re and t_bat >= t_lo_re:
                ctl = CHARGING
        elif t_bat > t_hi or u > u_hi or t_bat < t_lo:
            ctl = RESTING
        # management
        if ctl != CHARGING:
            dem = i_rest
        elif t_bat < heatup:
            dem = i_heat
        elif f_soc_lo <= soc and soc <= f_soc_hi and f_t_lo <= t_bat and t_bat <= f_t_hi:
            dem = i_max
        else:
            dem = i_slow
        i = min(dem, i_max)
        u = r_a * i + slope * soc + ocv0
        soc = min(max(soc + i * dt / (b_size * 3600.0), 0.0), 1.0)
        r = r_int * _r_factor(soc, i, rlo, rhi, ilo, ihi, fac, soc_top, i_top)
        t_bat = t_bat + dt * (r * i * i + ah * (t_amb - t_bat)) / mc
        k += 1
        t = k * dt
        if not (math.isfinite(t_bat) and math.isfinite(u)):
            return kp, t, False, tp, k, k
        kp = max(kp, _kappa(t, t_bat, cr))
        tp = max(tp, t_bat)
    if not done and soc >= soc_full:
        done = True
    if done:
        return kp, t, False, tp, k, -1
    return kp, t_max, True, tp, k, -1


@numba.njit(cache=True)
def run_batch(points, sp, lm, cr, rlo, rhi, ilo, ihi, fac, soc_top, i_top):
    n = points.shape[0]
    out = np.empty(n)
    bad = np.full(n, -1, dtype=np.int64)
    for j in range(n):
        res = run_one(points[j, 0], points[j, 1], sp, lm, cr, rlo, rhi, ilo, ihi, fac, soc_top, i_top)
        out[j] = res[0]
        bad[j] = res[5]
    return out, bad


def pack(p: SimParams, lim: ControlLimits, crit: CriticalitySpec) -> tuple:
    """Flatten the configuration into the argument tuple the kernels expect."""
    sp = np.array([p.b_size, p.heat_capacity, p.heat_transfer, p.r_internal, p.r_a, p.ocv0,
                   p.ocv_slope, p.soc_init, p.t_bat_init, p.dt, p.t_sim_max])
    lm = np.array([lim.soc_full, lim.t_bat_max_approve, lim.t_bat_rearm, lim.t_bat_min_approve,
                   lim.t_bat_min_rearm, lim.u_bat_max_approve, lim.u_bat_rearm, lim.heatup_temp,
                   lim.fast_soc_lo, lim.fast_soc_hi, lim.fast_temp_lo, lim.fast_temp_hi,
                   lim.i_heatup, lim.i_slow, lim.i_rest])
    cr = np.array([crit.t_min_h, crit.t_fatal_h, crit.temp_min_c, crit.temp_fatal_c])
    cells = p.r_factors.cells
    rt = np.array([[c.soc_lo, c.soc_hi, c.i_lo, c.i_hi, c.factor] for c in cells]).reshape(-1, 5)
    cols = tuple(np.ascontiguousarray(rt[:, j]) for j in range(5))
    return (sp, lm, cr) + cols + (float(p.r_factors.soc_top), float(p.r_factors.i_top))
