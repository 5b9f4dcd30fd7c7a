# cython: language_level=3
"""Compiled kernels for the hot right-hand sides.

Expression-for-expression mirror of pykernels.py -- keep the two in sync.
"""

from libc.math cimport pow, sqrt

import numpy as np


cdef inline double _clamp(double x, double lo, double hi) nogil:
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


cdef inline double _dead(double x, double lo, double hi) nogil:
    if x > hi:
        return x - hi
    if x < lo:
        return x - lo
    return 0.0


def motor_full(double[:] state, double[:] u, double[:] k):
    cdef double rs = k[0], ls = k[1], lp = k[2], lpp = k[3]
    cdef double tp0 = k[4], tpp0 = k[5], h_in = k[6]
    cdef double a = k[7], b = k[8], c0 = k[9], d = k[10], etrq = k[11]
    cdef double p = k[12], q = k[13], omega0 = k[14], tm0 = k[15]

    cdef double eq_p = state[0], ed_p = state[1], eq_pp = state[2]
    cdef double ed_pp = state[3], s = state[4]
    cdef double vq = u[0], vd = u[1]

    cdef double den = rs * rs + lpp * lpp
    cdef double i_d = (rs * (vd + ed_pp) + lpp * (vq + eq_pp)) / den
    cdef double i_q = (rs * (vq + eq_pp) - lpp * (vd + ed_pp)) / den

    cdef double dls = ls - lp
    cdef double c1 = (tp0 - tpp0) / (tp0 * tpp0)
    cdef double c2 = (tpp0 * dls + tp0 * (lp - lpp)) / (tp0 * tpp0)
    cdef double w_sync = omega0 * s

    cdef double w = 1.0 - s
    cdef double t_load = tm0 * (a * w * w + b * w + c0 + d * pow(w, etrq))

    out = np.empty(5)
    cdef double[:] o = out
    o[0] = (-eq_p - i_d * dls) / tp0 - w_sync * ed_p
    o[1] = (-ed_p + i_q * dls) / tp0 + w_sync * eq_p
    o[2] = c1 * eq_p - c2 * i_d - eq_pp / tpp0 - w_sync * ed_pp
    o[3] = c1 * ed_p + c2 * i_q - ed_pp / tpp0 + w_sync * eq_pp
    o[4] = -(p * ed_pp * i_d + q * eq_pp * i_q - t_load) / (2.0 * h_in)
    return out


def motor_reduced(double[:] state, double[:] u, double[:] k):
    cdef double rs = k[0], ls = k[1], lp = k[2], lpp = k[3]
    cdef double tp0 = k[4], h_in = k[6]
    cdef double a = k[7], b = k[8], c0 = k[9], d = k[10], etrq = k[11]
    cdef double p = k[12], q = k[13], omega0 = k[14], tm0 = k[15]

    cdef double x1 = state[0], x2 = state[1], x3 = state[2]
    cdef double vq = u[0], vd = u[1]

    cdef double den = rs * rs + lp * lp
    cdef double i_d = (lp * (vq + x1) + rs * (vd + x2)) / den
    cdef double i_q = (rs * (vq + x1) - lp * (vd + x2)) / den

    cdef double dl = lp - lpp
    cdef double h1 = ((lp * lpp + rs * rs) * x1 - dl * rs * x2 - dl * lp * vq - dl * rs * vd) / den
    cdef double h2 = (dl * rs * x1 + (lp * lpp + rs * rs) * x2 + dl * rs * vq - dl * lp * vd) / den

    cdef double dls = ls - lp
    cdef double w_sync = omega0 * x3
    cdef double w = 1.0 - x3
    cdef double t_load = tm0 * (a * w * w + b * w + c0 + d * pow(w, etrq))

    out = np.empty(3)
    cdef double[:] o = out
    o[0] = (-x1 - i_d * dls) / tp0 - w_sync * x2
    o[1] = (-x2 + i_q * dls) / tp0 + w_sync * x1
    o[2] = (t_load - p * h2 * i_d - q * h1 * i_q) / (2.0 * h_in)
    return out


def dera_full(double[:] state, double[:] u, double[:] k, double vp_mult):
    cdef double v_f = state[0], p_f = state[1], q_int = state[2], iq_c = state[3]
    cdef double prot = state[4], freq_f = state[5], pi_int = state[6]
    cdef double p_ord = state[7], p_lag = state[8], id_c = state[9]
    cdef double vt = u[0], freq = u[1]

    cdef double floor1 = k[33]
    cdef double s1 = v_f if v_f > floor1 else floor1

    cdef double q_target, verr, lim3, iq_sum, iq_lo, iq_hi, iq_want, room
    cdef double ferr, dn, up, droop, pi_in, d_pi, p7, id_hi, id_lo, id_want

    out = np.empty(10)
    cdef double[:] o = out
    o[0] = (vt - v_f) / k[0]
    o[1] = (p_lag - p_f) / k[1]

    if k[35] == 0.0:
        q_target = k[16] / s1
    else:
        q_target = k[15] * p_f / s1
    o[2] = (q_target - q_int) / k[2]

    verr = _dead(k[14] - v_f, k[28], k[29])
    lim3 = k[34]
    iq_sum = q_int + k[7] * _clamp(verr, -lim3, lim3)
    if k[39] == 0.0:
        iq_lo = k[20] if k[20] > -k[19] else -k[19]
        iq_hi = k[21] if k[21] < k[19] else k[19]
    else:
        room = sqrt(max(0.0, k[19] * k[19] - id_c * id_c))
        iq_lo = k[20] if k[20] > -room else -room
        iq_hi = k[21] if k[21] < room else room
    iq_want = _clamp(iq_sum, iq_lo, iq_hi)
    if k[36] == 1.0:
        iq_want *= prot
    o[3] = (iq_want - iq_c) / k[3]

    o[4] = (vp_mult - prot) / k[4]
    o[5] = (freq - freq_f) / k[5]

    if k[38] == 1.0 and vt < k[32]:
        droop = 0.0
    else:
        ferr = _dead(k[18] - freq_f, k[30], k[31])
        dn = k[10] * ferr
        up = k[11] * ferr
        droop = (dn if dn < 0.0 else 0.0) + (up if up > 0.0 else 0.0)
    pi_in = _clamp(k[17] - p_f + droop, k[26], k[27])
    d_pi = k[9] * pi_in + (k[8] / k[1]) * p_f + (k[12] + k[13]) * (freq - freq_f) - p_lag / k[1]
    o[6] = d_pi

    if k[37] == 0.0:
        o[7] = 0.0
    else:
        if k[22] < pi_int < k[23]:
            o[7] = _clamp(d_pi, k[24], k[25])
        else:
            o[7] = _clamp(0.0, k[24], k[25])

    o[8] = (p_ord - p_lag) / k[6]

    p7 = _clamp(p_lag, k[22], k[23])
    if k[39] == 0.0:
        id_hi = sqrt(max(0.0, k[19] * k[19] - iq_c * iq_c))
    else:
        id_hi = k[19]
    id_lo = -id_hi if k[40] == 1.0 else 0.0
    id_want = _clamp(p7 / s1, id_lo, id_hi)
    if k[36] == 1.0:
        id_want *= prot
    o[9] = (id_want - id_c) / k[3]
    return out


def dera_reduced(double[:] state, double[:] u, double[:] k):
    out = np.empty(4)
    cdef double[:] o = out
    o[0] = (u[0] - state[0]) / k[0]
    o[1] = (state[3] - state[1]) / k[1]
    o[2] = (u[1] - state[2]) / k[5]
    o[3] = 0.0
    return out
