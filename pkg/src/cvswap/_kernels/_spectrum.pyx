# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled spectral integrand kernel (see reference.py for the definition).

Implements the symmetrized spectral density Re[K diag(s) K^dag] per
frequency with the drift resolvent expanded in the eigenbasis of A.  Must
stay numerically identical (to float round-off) to reference.spectrum_batch.
"""

import numpy as np


def spectrum_batch(double[::1] omega,
                   double complex[::1] lam,
                   double complex[:, ::1] p_mat,
                   double complex[:, ::1] q_mat,
                   double refl_b, double refl_c,
                   double tau_b, double om_b,
                   double tau_c, double om_c,
                   double[::1] s_xi,
                   int mode):
    cdef Py_ssize_t n = omega.shape[0]
    out_arr = np.empty((n, 6, 6), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr

    cdef Py_ssize_t w, i, j, k
    cdef double complex r[6]
    cdef double complex rq[6][5]
    cdef double complex tn[6][6]
    cdef double complex kmat[6][5]
    cdef double complex wb0, wb1
    cdef double complex hp, hm, h_re, h_im
    cdef double complex acc
    cdef double om, s0
    cdef double s[5]
    cdef double amp_b = (2.0 / tau_b) ** 0.5 if tau_b > 0 else 0.0
    cdef double amp_c = (2.0 / tau_c) ** 0.5 if tau_c > 0 else 0.0

    cdef double complex imag_unit = 1j

    s[1] = s[2] = s[3] = s[4] = 0.5

    with nogil:
        for w in range(n):
            om = omega[w]
            s[0] = s_xi[w]
            for j in range(6):
                r[j] = 1.0 / (-imag_unit * om - lam[j])
            for j in range(6):
                for k in range(5):
                    rq[j][k] = r[j] * q_mat[j, k]
            for i in range(6):
                for k in range(5):
                    acc = 0
                    for j in range(6):
                        acc = acc + p_mat[i, j] * rq[j][k]
                    tn[i][k] = acc

            if mode == 0:
                for i in range(6):
                    for k in range(5):
                        kmat[i][k] = tn[i][k]
            else:
                for k in range(5):
                    kmat[0][k] = tn[0][k]
                    kmat[1][k] = tn[1][k]
                # Bell output mode: input columns 1 (x_in) and 2 (y_in)
                hp = amp_b / (1.0 / tau_b + imag_unit * (om_b - om))
                hm = (amp_b / (1.0 / tau_b + imag_unit * (om_b + om))).conjugate()
                h_re = 0.5 * (hp + hm)
                h_im = -0.5 * imag_unit * (hp - hm)
                for k in range(5):
                    wb0 = refl_b * tn[2][k]
                    wb1 = refl_b * tn[3][k]
                    if k == 1:
                        wb0 = wb0 - 1.0
                    if k == 2:
                        wb1 = wb1 - 1.0
                    kmat[2][k] = h_re * wb0 - h_im * wb1
                    kmat[3][k] = h_im * wb0 + h_re * wb1
                # certification output mode: input columns 3 and 4
                hp = amp_c / (1.0 / tau_c + imag_unit * (om_c - om))
                hm = (amp_c / (1.0 / tau_c + imag_unit * (om_c + om))).conjugate()
                h_re = 0.5 * (hp + hm)
                h_im = -0.5 * imag_unit * (hp - hm)
                for k in range(5):
                    wb0 = refl_c * tn[4][k]
                    wb1 = refl_c * tn[5][k]
                    if k == 3:
                        wb0 = wb0 - 1.0
                    if k == 4:
                        wb1 = wb1 - 1.0
                    kmat[4][k] = h_re * wb0 - h_im * wb1
                    kmat[5][k] = h_im * wb0 + h_re * wb1

            for i in range(6):
                for j in range(i, 6):
                    acc = 0
                    for k in range(5):
                        acc = acc + kmat[i][k] * s[k] * kmat[j][k].conjugate()
                    out[w, i, j] = acc.real
                    out[w, j, i] = acc.real

    return out_arr
