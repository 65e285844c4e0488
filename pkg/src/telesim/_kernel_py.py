"""Pure-Python Monte Carlo trial loop.

Mirror of ``_kernel.pyx``: same SplitMix64 derivation, same variate order,
same arithmetic. Used when the compiled extension is not available.
"""

from __future__ import annotations

import math

import numpy as np

from .rng import GAMMA, INV_2_53, MASK64, mix64, trial_state

STANDARD, SINGLET_ONLY, CONCLUSIVE, CONCLUSIVE_SINGLET_ONLY = 0, 1, 2, 3

_R2 = 1.0 / math.sqrt(2.0)
# rows: Phi+, Phi-, Psi+, Psi-, over |00>,|01>,|10>,|11> of particles 1,2
_BELL = ((_R2, 0.0, 0.0, _R2), (_R2, 0.0, 0.0, -_R2), (0.0, _R2, _R2, 0.0), (0.0, _R2, -_R2, 0.0))
# I, Z, X, XZ as (m00, m01, m10, m11)
_CORR = ((1.0, 0.0, 0.0, 1.0), (1.0, 0.0, 0.0, -1.0), (0.0, 1.0, 1.0, 0.0), (0.0, -1.0, 1.0, 0.0))
# logical basis of particles 1,2: parallel |00>,|11>; antiparallel |10>,|01>
_SUB = ((0, 3), (2, 1))


def _abs2(z):
    return z.real * z.real + z.imag * z.imag


def _pick(probs, u):
    total = sum(probs)
    acc = 0.0
    last = -1
    for i, p in enumerate(probs):
        q = p / total
        if q > 0.0:
            last = i
        acc += q
        if u < acc:
            return i
    return last


def run_trials(protocol, alpha, beta, seed, start, n, fixed_input, kraus):
    """Run ``n`` trials (indices ``start .. start+n-1``).

    Returns ``(step1, step2, conclusive, fidelity)`` arrays; ``step2`` is -1 for
    single-step protocols and ``fidelity`` is NaN when Bob received nothing.
    """
    step1 = np.empty(n, dtype=np.int8)
    step2 = np.empty(n, dtype=np.int8)
    concl = np.empty(n, dtype=np.uint8)
    fid = np.empty(n, dtype=np.float64)
    kr = [[complex(x) for x in np.asarray(k).reshape(4)] for k in kraus] if kraus is not None else None
    chan = (alpha, 0.0, 0.0, beta)
    seed = int(seed) & MASK64

    for t in range(n):
        state0 = trial_state(seed, start + t)
        counter = 0

        if fixed_input is None:
            counter += 1
            u0 = (mix64((state0 + GAMMA * counter) & MASK64) >> 11) * INV_2_53
            counter += 1
            u1 = (mix64((state0 + GAMMA * counter) & MASK64) >> 11) * INV_2_53
            polar = math.acos(1.0 - 2.0 * u0)
            phase = 2.0 * math.pi * u1
            a = complex(math.cos(polar / 2.0), 0.0)
            b = complex(math.cos(phase), math.sin(phase)) * math.sin(polar / 2.0)
        else:
            a, b = fixed_input
        inp = (a, b)
        psi = [inp[i1] * chan[r] for i1 in range(2) for r in range(4)]

        if protocol in (STANDARD, SINGLET_ONLY):
            amps = []
            probs = []
            for k in range(4):
                bk = _BELL[k]
                c0 = bk[0] * psi[0] + bk[1] * psi[2] + bk[2] * psi[4] + bk[3] * psi[6]
                c1 = bk[0] * psi[1] + bk[1] * psi[3] + bk[2] * psi[5] + bk[3] * psi[7]
                amps.append((c0, c1))
                probs.append(_abs2(c0) + _abs2(c1))
            counter += 1
            u = (mix64((state0 + GAMMA * counter) & MASK64) >> 11) * INV_2_53
            k = _pick(probs, u)
            step1[t] = k
            step2[t] = -1
            ok = protocol == STANDARD or k == 3
            concl[t] = ok
            if ok:
                corr = k
                y0, y1 = amps[k]
            else:
                fid[t] = math.nan
                continue
        else:
            probs = []
            for i0, i1 in _SUB:
                probs.append(
                    _abs2(psi[2 * i0]) + _abs2(psi[2 * i0 + 1]) + _abs2(psi[2 * i1]) + _abs2(psi[2 * i1 + 1])
                )
            counter += 1
            u = (mix64((state0 + GAMMA * counter) & MASK64) >> 11) * INV_2_53
            br = _pick(probs, u)
            step1[t] = br
            i0, i1 = _SUB[br]
            norm = math.sqrt(probs[br])
            m00, m01 = psi[2 * i0] / norm, psi[2 * i0 + 1] / norm
            m10, m11 = psi[2 * i1] / norm, psi[2 * i1 + 1] / norm
            outs = []
            probs2 = []
            for kk in kr:
                n00 = kk[0] * m00 + kk[1] * m10
                n01 = kk[0] * m01 + kk[1] * m11
                n10 = kk[2] * m00 + kk[3] * m10
                n11 = kk[2] * m01 + kk[3] * m11
                outs.append((n00, n01, n10, n11))
                probs2.append(_abs2(n00) + _abs2(n01) + _abs2(n10) + _abs2(n11))
            counter += 1
            u = (mix64((state0 + GAMMA * counter) & MASK64) >> 11) * INV_2_53
            o = _pick(probs2, u)
            step2[t] = o
            if protocol == CONCLUSIVE:
                ok = o != 2
            else:
                ok = br == 1 and o == 1
            concl[t] = ok
            if not ok:
                fid[t] = math.nan
                continue
            corr = 2 * br + o
            n00, n01, n10, n11 = outs[o]
            if _abs2(n00) + _abs2(n01) >= _abs2(n10) + _abs2(n11):
                y0, y1 = n00, n01
            else:
                y0, y1 = n10, n11

        cm = _CORR[corr]
        z0 = cm[0] * y0 + cm[1] * y1
        z1 = cm[2] * y0 + cm[3] * y1
        nz = _abs2(z0) + _abs2(z1)
        ov = a.conjugate() * z0 + b.conjugate() * z1
        na = _abs2(a) + _abs2(b)
        fid[t] = min(1.0, _abs2(ov) / (nz * na))

    return step1, step2, concl, fid
