"""Pure-Python reference kernels for the hot right-hand sides.

These mirror the compiled versions in _fast.pyx expression for expression:
both backends must agree to machine precision, so any change here has to be
made in the .pyx file too.  Parameters arrive packed as flat float vectors
(see the _kvec helpers in motor.py / dera.py for the layouts); flags are
encoded as 0.0/1.0.
"""

import math

import numpy as np


def _clamp(x, lo, hi):
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


def _dead(x, lo, hi):
    # offset deadband: continuous, zero inside [lo, hi]
    if x > hi:
        return x - hi
    if x < lo:
        return x - lo
    return 0.0


# ---------------------------------------------------------------------------
# induction motor
# ---------------------------------------------------------------------------
# k layout: [rs, Ls, Lp, Lpp, Tp0, Tpp0, H, A, B, C0, D, Etrq, p, q, omega0, tm0]

def motor_full(state, u, k):
    rs = k[0]; ls = k[1]; lp = k[2]; lpp = k[3]
    tp0 = k[4]; tpp0 = k[5]; h_in = k[6]
    a = k[7]; b = k[8]; c0 = k[9]; d = k[10]; etrq = k[11]
    p = k[12]; q = k[13]; omega0 = k[14]; tm0 = k[15]

    eq_p = state[0]; ed_p = state[1]; eq_pp = state[2]; ed_pp = state[3]; s = state[4]
    vq = u[0]; vd = u[1]

    den = rs * rs + lpp * lpp
    i_d = (rs * (vd + ed_pp) + lpp * (vq + eq_pp)) / den
    i_q = (rs * (vq + eq_pp) - lpp * (vd + ed_pp)) / den

    dls = ls - lp
    c1 = (tp0 - tpp0) / (tp0 * tpp0)
    c2 = (tpp0 * dls + tp0 * (lp - lpp)) / (tp0 * tpp0)
    w_sync = omega0 * s

    w = 1.0 - s
    t_load = tm0 * (a * w * w + b * w + c0 + d * w ** etrq)

    out = np.empty(5)
    out[0] = (-eq_p - i_d * dls) / tp0 - w_sync * ed_p
    out[1] = (-ed_p + i_q * dls) / tp0 + w_sync * eq_p
    out[2] = c1 * eq_p - c2 * i_d - eq_pp / tpp0 - w_sync * ed_pp
    out[3] = c1 * ed_p + c2 * i_q - ed_pp / tpp0 + w_sync * eq_pp
    out[4] = -(p * ed_pp * i_d + q * eq_pp * i_q - t_load) / (2.0 * h_in)
    return out


def motor_reduced(state, u, k):
    rs = k[0]; ls = k[1]; lp = k[2]; lpp = k[3]
    tp0 = k[4]; h_in = k[6]
    a = k[7]; b = k[8]; c0 = k[9]; d = k[10]; etrq = k[11]
    p = k[12]; q = k[13]; omega0 = k[14]; tm0 = k[15]

    x1 = state[0]; x2 = state[1]; x3 = state[2]
    vq = u[0]; vd = u[1]

    den = rs * rs + lp * lp
    i_d = (lp * (vq + x1) + rs * (vd + x2)) / den
    i_q = (rs * (vq + x1) - lp * (vd + x2)) / den

    dl = lp - lpp
    h1 = ((lp * lpp + rs * rs) * x1 - dl * rs * x2 - dl * lp * vq - dl * rs * vd) / den
    h2 = (dl * rs * x1 + (lp * lpp + rs * rs) * x2 + dl * rs * vq - dl * lp * vd) / den

    dls = ls - lp
    w_sync = omega0 * x3
    w = 1.0 - x3
    t_load = tm0 * (a * w * w + b * w + c0 + d * w ** etrq)

    out = np.empty(3)
    out[0] = (-x1 - i_d * dls) / tp0 - w_sync * x2
    out[1] = (-x2 + i_q * dls) / tp0 + w_sync * x1
    out[2] = (t_load - p * h2 * i_d - q * h1 * i_q) / (2.0 * h_in)
    return out


# ---------------------------------------------------------------------------
# DER_A
# ---------------------------------------------------------------------------
# k layout:
#   0 Trv   1 Tp    2 Tiq   3 Tg    4 Tv    5 Trf   6 Tpord
#   7 Kqv   8 Kpg   9 Kig  10 Ddn  11 Dup  12 Gdn  13 Gup
#  14 Vref0 15 tan_pfaref 16 Qref 17 Pref 18 Freq_ref
#  19 Imax 20 Iql1 21 Iqh1 22 Pmin 23 Pmax 24 dPmin 25 dPmax
#  26 femin 27 femax 28 dbd1 29 dbd2 30 fdbd1 31 fdbd2
#  32 Vpr  33 sat1_floor 34 sat3_lim
#  35 pf_flag 36 v_tripflag 37 freq_flag 38 f_tripflag 39 pq_flag 40 typeflag

def dera_full(state, u, k, vp_mult):
    v_f = state[0]; p_f = state[1]; q_int = state[2]; iq_c = state[3]
    prot = state[4]; freq_f = state[5]; pi_int = state[6]
    p_ord = state[7]; p_lag = state[8]; id_c = state[9]
    vt = u[0]; freq = u[1]

    floor1 = k[33]
    s1 = v_f if v_f > floor1 else floor1

    out = np.empty(10)
    out[0] = (vt - v_f) / k[0]
    out[1] = (p_lag - p_f) / k[1]

    if k[35] == 0.0:
        q_target = k[16] / s1
    else:
        q_target = k[15] * p_f / s1
    out[2] = (q_target - q_int) / k[2]

    verr = _dead(k[14] - v_f, k[28], k[29])
    lim3 = k[34]
    iq_sum = q_int + k[7] * _clamp(verr, -lim3, lim3)
    if k[39] == 0.0:
        iq_lo = k[20] if k[20] > -k[19] else -k[19]
        iq_hi = k[21] if k[21] < k[19] else k[19]
    else:
        room = math.sqrt(max(0.0, k[19] * k[19] - id_c * id_c))
        iq_lo = k[20] if k[20] > -room else -room
        iq_hi = k[21] if k[21] < room else room
    iq_want = _clamp(iq_sum, iq_lo, iq_hi)
    if k[36] == 1.0:
        iq_want *= prot
    out[3] = (iq_want - iq_c) / k[3]

    out[4] = (vp_mult - prot) / k[4]
    out[5] = (freq - freq_f) / k[5]

    if k[38] == 1.0 and vt < k[32]:
        droop = 0.0
    else:
        ferr = _dead(k[18] - freq_f, k[30], k[31])
        dn = k[10] * ferr
        up = k[11] * ferr
        droop = (dn if dn < 0.0 else 0.0) + (up if up > 0.0 else 0.0)
    pi_in = _clamp(k[17] - p_f + droop, k[26], k[27])
    d_pi = k[9] * pi_in + (k[8] / k[1]) * p_f + (k[12] + k[13]) * (freq - freq_f) - p_lag / k[1]
    out[6] = d_pi

    if k[37] == 0.0:
        out[7] = 0.0
    else:
        inside = k[22] < pi_int < k[23]
        out[7] = _clamp(d_pi if inside else 0.0, k[24], k[25])

    out[8] = (p_ord - p_lag) / k[6]

    p7 = _clamp(p_lag, k[22], k[23])
    if k[39] == 0.0:
        id_hi = math.sqrt(max(0.0, k[19] * k[19] - iq_c * iq_c))
    else:
        id_hi = k[19]
    id_lo = -id_hi if k[40] == 1.0 else 0.0
    id_want = _clamp(p7 / s1, id_lo, id_hi)
    if k[36] == 1.0:
        id_want *= prot
    out[9] = (id_want - id_c) / k[3]
    return out


def dera_reduced(state, u, k):
    out = np.empty(4)
    out[0] = (u[0] - state[0]) / k[0]
    out[1] = (state[3] - state[1]) / k[1]
    out[2] = (u[1] - state[2]) / k[5]
    out[3] = 0.0
    return out
