"""Statevector gate kernels.

Amplitude layout: basis index bit n encodes site n (site 0 is the least
significant bit).  All kernels mutate the 1-D complex128 amplitude array in
place and run serially, so results are bit-reproducible.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def apply_site_gates(psi, mats):
    """Apply one 2x2 gate per site, mats shape (n_sites, 2, 2)."""
    n_sites = mats.shape[0]
    size = psi.size
    for s in range(n_sites):
        step = 1 << s
        u00 = mats[s, 0, 0]
        u01 = mats[s, 0, 1]
        u10 = mats[s, 1, 0]
        u11 = mats[s, 1, 1]
        block = step << 1
        for base in range(0, size, block):
            for i in range(base, base + step):
                a = psi[i]
                b = psi[i + step]
                psi[i] = u00 * a + u01 * b
                psi[i + step] = u10 * a + u11 * b


@njit(cache=True)
def apply_one_site_gate(psi, site, u):
    """Apply a single 2x2 gate on one site."""
    step = 1 << site
    block = step << 1
    for base in range(0, psi.size, block):
        for i in range(base, base + step):
            a = psi[i]
            b = psi[i + step]
            psi[i] = u[0, 0] * a + u[0, 1] * b
            psi[i + step] = u[1, 0] * a + u[1, 1] * b


@njit(cache=True)
def apply_two_site_gate(psi, sa, sb, u):
    """Apply a 4x4 gate on sites (sa, sb); u is indexed by 2*b_sa + b_sb."""
    lo = sa if sa < sb else sb
    hi = sb if sa < sb else sa
    ka = 1 << sa
    kb = 1 << sb
    klo = 1 << lo
    khi = 1 << hi
    for k in range(psi.size >> 2):
        i = ((k >> lo) << (lo + 1)) | (k & (klo - 1))
        i = ((i >> hi) << (hi + 1)) | (i & (khi - 1))
        a0 = psi[i]
        a1 = psi[i | kb]
        a2 = psi[i | ka]
        a3 = psi[i | ka | kb]
        psi[i] = u[0, 0] * a0 + u[0, 1] * a1 + u[0, 2] * a2 + u[0, 3] * a3
        psi[i | kb] = u[1, 0] * a0 + u[1, 1] * a1 + u[1, 2] * a2 + u[1, 3] * a3
        psi[i | ka] = u[2, 0] * a0 + u[2, 1] * a1 + u[2, 2] * a2 + u[2, 3] * a3
        psi[i | ka | kb] = u[3, 0] * a0 + u[3, 1] * a1 + u[3, 2] * a2 + u[3, 3] * a3


@njit(cache=True)
def apply_gate_program(psi, sites_a, sites_b, mats):
    """Apply a sequence of two-site gates in order; mats shape (G, 4, 4)."""
    for g in range(sites_a.size):
        apply_two_site_gate(psi, sites_a[g], sites_b[g], mats[g])


@njit(cache=True)
def site_moments(cot, psi, n_sites):
    """Per-site overlap matrices M[s, a, b] = sum_rest conj(cot)|site=a> * psi|site=b>.

    Contracting M against a one-site operator D gives <cot| D_s |psi>.
    """
    out = np.zeros((n_sites, 2, 2), dtype=np.complex128)
    size = psi.size
    for s in range(n_sites):
        step = 1 << s
        block = step << 1
        m00 = 0.0 + 0.0j
        m01 = 0.0 + 0.0j
        m10 = 0.0 + 0.0j
        m11 = 0.0 + 0.0j
        for base in range(0, size, block):
            for i in range(base, base + step):
                ca = np.conj(cot[i])
                cb = np.conj(cot[i + step])
                pa = psi[i]
                pb = psi[i + step]
                m00 += ca * pa
                m01 += ca * pb
                m10 += cb * pa
                m11 += cb * pb
        out[s, 0, 0] = m00
        out[s, 0, 1] = m01
        out[s, 1, 0] = m10
        out[s, 1, 1] = m11
    return out
