# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo trial loop; arithmetic mirrors ``_kernel_py.py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport acos, cos, sin, sqrt, M_PI, NAN
from libc.stdint cimport uint64_t

cnp.import_array()

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef double R2 = 0.70710678118654752440

cdef double BELL[4][4]
BELL[0][:] = [R2, 0.0, 0.0, R2]
BELL[1][:] = [R2, 0.0, 0.0, -R2]
BELL[2][:] = [0.0, R2, R2, 0.0]
BELL[3][:] = [0.0, R2, -R2, 0.0]

cdef double CORR[4][4]
CORR[0][:] = [1.0, 0.0, 0.0, 1.0]
CORR[1][:] = [1.0, 0.0, 0.0, -1.0]
CORR[2][:] = [0.0, 1.0, 1.0, 0.0]
CORR[3][:] = [0.0, -1.0, 1.0, 0.0]

cdef int SUB[2][2]
SUB[0][:] = [0, 3]
SUB[1][:] = [2, 1]


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double uniform(uint64_t state0, uint64_t k) nogil:
    return <double>(mix64(state0 + GAMMA * k) >> 11) * INV_2_53


cdef inline double abs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag


cdef inline int pick(double* probs, int n, double u) nogil:
    cdef double total = 0.0, acc = 0.0, q
    cdef int i, last = -1
    for i in range(n):
        total += probs[i]
    for i in range(n):
        q = probs[i] / total
        if q > 0.0:
            last = i
        acc += q
        if u < acc:
            return i
    return last


def run_trials(int protocol, double alpha, double beta, seed, long long start, long long n,
               fixed_input, kraus):
    step1_arr = np.empty(n, dtype=np.int8)
    step2_arr = np.empty(n, dtype=np.int8)
    concl_arr = np.empty(n, dtype=np.uint8)
    fid_arr = np.empty(n, dtype=np.float64)
    cdef cnp.int8_t[::1] step1 = step1_arr
    cdef cnp.int8_t[::1] step2 = step2_arr
    cdef cnp.uint8_t[::1] concl = concl_arr
    cdef double[::1] fid = fid_arr

    cdef double complex kr[3][4]
    cdef int j, q
    if kraus is not None:
        for j in range(3):
            flat = np.asarray(kraus[j], dtype=complex).reshape(4)
            for q in range(4):
                kr[j][q] = flat[q]

    cdef bint random_input = fixed_input is None
    cdef double complex fa = 0, fb = 0
    if not random_input:
        fa = fixed_input[0]
        fb = fixed_input[1]

    cdef uint64_t useed = (<uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF))
    cdef uint64_t mseed = mix64(useed)
    cdef double chan[4]
    chan[0] = alpha
    chan[1] = 0.0
    chan[2] = 0.0
    chan[3] = beta

    cdef long long t
    cdef uint64_t state0, counter
    cdef double u, u0, u1, polar, phase, norm, nz, na
    cdef double complex a, b, c0, c1, y0, y1, z0, z1, ov
    cdef double complex psi[8]
    cdef double complex amps[4][2]
    cdef double complex outs[3][4]
    cdef double complex m00, m01, m10, m11
    cdef double probs[4]
    cdef double probs2[3]
    cdef int k, i1, r, br, o, corr, i0, ia
    cdef bint ok

    with nogil:
        for t in range(n):
            state0 = mix64(mseed + GAMMA * <uint64_t>(start + t + 1))
            counter = 0
            if random_input:
                counter += 1
                u0 = uniform(state0, counter)
                counter += 1
                u1 = uniform(state0, counter)
                polar = acos(1.0 - 2.0 * u0)
                phase = 2.0 * M_PI * u1
                a = cos(polar / 2.0)
                b = (cos(phase) + 1j * sin(phase)) * sin(polar / 2.0)
            else:
                a = fa
                b = fb
            for r in range(4):
                psi[r] = a * chan[r]
                psi[4 + r] = b * chan[r]

            if protocol == 0 or protocol == 1:
                for k in range(4):
                    c0 = BELL[k][0] * psi[0] + BELL[k][1] * psi[2] + BELL[k][2] * psi[4] + BELL[k][3] * psi[6]
                    c1 = BELL[k][0] * psi[1] + BELL[k][1] * psi[3] + BELL[k][2] * psi[5] + BELL[k][3] * psi[7]
                    amps[k][0] = c0
                    amps[k][1] = c1
                    probs[k] = abs2(c0) + abs2(c1)
                counter += 1
                u = uniform(state0, counter)
                k = pick(probs, 4, u)
                step1[t] = k
                step2[t] = -1
                ok = protocol == 0 or k == 3
                concl[t] = ok
                if not ok:
                    fid[t] = NAN
                    continue
                corr = k
                y0 = amps[k][0]
                y1 = amps[k][1]
            else:
                for br in range(2):
                    i0 = SUB[br][0]
                    ia = SUB[br][1]
                    probs[br] = abs2(psi[2 * i0]) + abs2(psi[2 * i0 + 1]) + abs2(psi[2 * ia]) + abs2(psi[2 * ia + 1])
                counter += 1
                u = uniform(state0, counter)
                br = pick(probs, 2, u)
                step1[t] = br
                i0 = SUB[br][0]
                ia = SUB[br][1]
                norm = sqrt(probs[br])
                m00 = psi[2 * i0] / norm
                m01 = psi[2 * i0 + 1] / norm
                m10 = psi[2 * ia] / norm
                m11 = psi[2 * ia + 1] / norm
                for j in range(3):
                    outs[j][0] = kr[j][0] * m00 + kr[j][1] * m10
                    outs[j][1] = kr[j][0] * m01 + kr[j][1] * m11
                    outs[j][2] = kr[j][2] * m00 + kr[j][3] * m10
                    outs[j][3] = kr[j][2] * m01 + kr[j][3] * m11
                    probs2[j] = abs2(outs[j][0]) + abs2(outs[j][1]) + abs2(outs[j][2]) + abs2(outs[j][3])
                counter += 1
                u = uniform(state0, counter)
                o = pick(probs2, 3, u)
                step2[t] = o
                if protocol == 2:
                    ok = o != 2
                else:
                    ok = br == 1 and o == 1
                concl[t] = ok
                if not ok:
                    fid[t] = NAN
                    continue
                corr = 2 * br + o
                if abs2(outs[o][0]) + abs2(outs[o][1]) >= abs2(outs[o][2]) + abs2(outs[o][3]):
                    y0 = outs[o][0]
                    y1 = outs[o][1]
                else:
                    y0 = outs[o][2]
                    y1 = outs[o][3]

            z0 = CORR[corr][0] * y0 + CORR[corr][1] * y1
            z1 = CORR[corr][2] * y0 + CORR[corr][3] * y1
            nz = abs2(z0) + abs2(z1)
            ov = a.conjugate() * z0 + b.conjugate() * z1
            na = abs2(a) + abs2(b)
            fid[t] = min(1.0, abs2(ov) / (nz * na))

    return step1_arr, step2_arr, concl_arr, fid_arr
