# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled region-growing kernel; semantics identical to the pure fallback."""

import numpy as np

cimport numpy as cnp

UNLABELED = 255


def grow_kernel(cnp.uint8_t[:, ::1] labels,
                double[:, ::1] profiles,
                double[::1] pixel_norms,
                cnp.int64_t[::1] seed_rows,
                cnp.int64_t[::1] seed_cols,
                cnp.int64_t[::1] seed_classes,
                double[:, ::1] seed_profiles,
                double[::1] seed_norms,
                cnp.int64_t[::1] seed_radius,
                double tau):
    """Grow ``labels`` in place. ``seed_radius[s] < 0`` means unlimited."""
    cdef Py_ssize_t h = labels.shape[0]
    cdef Py_ssize_t w = labels.shape[1]
    cdef Py_ssize_t n_seeds = seed_rows.shape[0]
    cdef Py_ssize_t length = profiles.shape[1]

    cdef cnp.int64_t[::1] origin = np.full(h * w, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] queue = np.empty(h * w, dtype=np.int64)
    cdef Py_ssize_t head = 0, tail = 0

    cdef Py_ssize_t s, r, c, u, ur, uc, vr, vc, v, k, i
    cdef Py_ssize_t dr_abs, dc_abs, cheb
    cdef cnp.int64_t rad
    cdef double dot, denom, rho
    cdef int[4] drs = [-1, 1, 0, 0]
    cdef int[4] dcs = [0, 0, -1, 1]

    for s in range(n_seeds):
        r = seed_rows[s]
        c = seed_cols[s]
        if labels[r, c] == UNLABELED:
            labels[r, c] = <cnp.uint8_t> seed_classes[s]
            origin[r * w + c] = s
            queue[tail] = r * w + c
            tail += 1

    while head < tail:
        u = queue[head]
        head += 1
        ur = u // w
        uc = u - ur * w
        s = origin[u]
        rad = seed_radius[s]
        for k in range(4):
            vr = ur + drs[k]
            vc = uc + dcs[k]
            if vr < 0 or vr >= h or vc < 0 or vc >= w:
                continue
            if labels[vr, vc] != UNLABELED:
                continue
            if rad >= 0:
                dr_abs = vr - seed_rows[s]
                if dr_abs < 0:
                    dr_abs = -dr_abs
                dc_abs = vc - seed_cols[s]
                if dc_abs < 0:
                    dc_abs = -dc_abs
                cheb = dr_abs if dr_abs > dc_abs else dc_abs
                if cheb > rad:
                    continue
            v = vr * w + vc
            denom = pixel_norms[v] * seed_norms[s]
            if denom > 0.0:
                dot = 0.0
                for i in range(length):
                    dot += profiles[v, i] * seed_profiles[s, i]
                rho = dot / denom
            else:
                rho = 0.0
            if rho > tau:
                labels[vr, vc] = labels[ur, uc]
                origin[v] = s
                queue[tail] = v
                tail += 1
