"""Time-marching kernel, numba flavour.

Mirrors ``_kernels_np`` loop for loop; see there for the data layout.
"""

import math

import numpy as np
from numba import njit

from ._layout import (G_CLOSED, G_OPEN, K_C, K_L, K_R, K_SAT, K_SW, PK_BR_FLUX, PK_BR_I,
                      PK_BR_V, PK_EXT, PK_LINE_K, PK_LINE_M, PK_NODE, ST_NONFINITE, ST_OK,
                      ST_SINGULAR)

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def lu_factor(a):
    """In-place Doolittle LU with partial pivoting. Returns (piv, ok)."""
    n = a.shape[0]
    piv = np.arange(n)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            if abs(a[i, j]) > scale:
                scale = abs(a[i, j])
    tiny = scale * 1e-18
    for k in range(n):
        p = k
        best = abs(a[k, k])
        for i in range(k + 1, n):
            if abs(a[i, k]) > best:
                best = abs(a[i, k])
                p = i
        if best <= tiny or best == 0.0:
            return piv, False
        if p != k:
            for j in range(n):
                tmp = a[k, j]
                a[k, j] = a[p, j]
                a[p, j] = tmp
            tmp_i = piv[k]
            piv[k] = piv[p]
            piv[p] = tmp_i
        inv = 1.0 / a[k, k]
        for i in range(k + 1, n):
            f = a[i, k] * inv
            a[i, k] = f
            if f != 0.0:
                for j in range(k + 1, n):
                    a[i, j] -= f * a[k, j]
    return piv, True


@njit(**_opts)
def lu_solve(lu, piv, b, x):
    n = lu.shape[0]
    for i in range(n):
        s = b[piv[i]]
        for j in range(i):
            s -= lu[i, j] * x[j]
        x[i] = s
    for i in range(n - 1, -1, -1):
        s = x[i]
        for j in range(i + 1, n):
            s -= lu[i, j] * x[j]
        x[i] = s / lu[i, i]


@njit(**_opts)
def _seg_params(seg, lu_, ls_, knee):
    if seg == 0:
        return 0.0, lu_
    sgn = 1.0 if seg > 0 else -1.0
    return sgn * knee * (1.0 / lu_ - 1.0 / ls_), ls_


@njit(**_opts)
def _seg_of(flux, knee):
    if flux > knee:
        return 1
    if flux < -knee:
        return -1
    return 0


@njit(**_opts)
def _branch_g(kind, par, seg, dt):
    if kind == K_R:
        return 1.0 / par[0]
    if kind == K_L:
        return dt / (2.0 * par[0])
    if kind == K_C:
        return 2.0 * par[0] / dt
    if kind == K_SW:
        return G_CLOSED if seg == 1 else G_OPEN
    _, lseg = _seg_params(seg, par[0], par[1], par[2])
    return dt / (2.0 * lseg)


@njit(**_opts)
def _stamp(a, i, j, g):
    if i >= 0:
        a[i, i] += g
    if j >= 0:
        a[j, j] += g
    if i >= 0 and j >= 0:
        a[i, j] -= g
        a[j, i] -= g


@njit(**_opts)
def assemble(dim, dt, br_a, br_b, br_kind, br_par, br_seg, br_g, ln_a, ln_b, ln_par,
             src_row, src_node, tr_row, tr_nodes, tr_ratio):
    a = np.zeros((dim, dim))
    for k in range(br_a.shape[0]):
        g = _branch_g(br_kind[k], br_par[k], br_seg[k], dt)
        br_g[k] = g
        _stamp(a, br_a[k], br_b[k], g)
    for k in range(ln_a.shape[0]):
        g = 1.0 / (ln_par[k, 0] + 0.25 * ln_par[k, 1])
        _stamp(a, ln_a[k], -1, g)
        _stamp(a, ln_b[k], -1, g)
    for k in range(src_row.shape[0]):
        r = src_row[k]
        nd = src_node[k]
        a[nd, r] += 1.0
        a[r, nd] += 1.0
    for k in range(tr_row.shape[0]):
        r = tr_row[k]
        n = tr_ratio[k]
        for q in range(4):
            nd = tr_nodes[k, q]
            if nd < 0:
                continue
            coef = 1.0 if q == 0 else (-1.0 if q == 1 else (-n if q == 2 else n))
            a[nd, r] += coef
            a[r, nd] += coef
    return a


@njit(**_opts)
def _branch_hist(kind, par, v, i, flux, seg, g, dt):
    if kind == K_L:
        return i + g * v
    if kind == K_C:
        return -i - g * v
    if kind == K_SAT:
        aseg, lseg = _seg_params(seg, par[0], par[1], par[2])
        return aseg + (flux + 0.5 * dt * v) / lseg
    return 0.0


@njit(**_opts)
def _delayed(buf, q, j, frac, depth):
    # sample at fractional index j + frac; negative indices are quiescent
    v0 = 0.0 if j < 0 else buf[q, j % depth]
    if frac == 0.0:
        return v0
    v1 = 0.0 if j + 1 < 0 else buf[q, (j + 1) % depth]
    return (1.0 - frac) * v0 + frac * v1


@njit(**_opts)
def _xval(x, idx):
    return 0.0 if idx < 0 else x[idx]


@njit(**_opts)
def march(dt, n_steps, dim, br_a, br_b, br_kind, br_par, br_v, br_i, br_flux, br_seg,
          ln_a, ln_b, ln_par, ln_buf, src_row, src_node, src_par, tr_row, tr_nodes, tr_ratio,
          pr_kind, pr_idx, pr_sign, out):
    nb = br_a.shape[0]
    nl = ln_a.shape[0]
    depth = ln_buf.shape[2]
    br_g = np.zeros(nb)
    hist = np.zeros(nb)
    ln_hk = np.zeros(nl)
    ln_hm = np.zeros(nl)
    rhs = np.zeros(dim)
    x = np.zeros(dim)
    lu = assemble(dim, dt, br_a, br_b, br_kind, br_par, br_seg, br_g, ln_a, ln_b, ln_par,
                  src_row, src_node, tr_row, tr_nodes, tr_ratio)
    piv, ok = lu_factor(lu)
    if not ok:
        return ST_SINGULAR, 0
    seg_new = br_seg.copy()
    twopi = 2.0 * math.pi
    for n in range(n_steps):
        t = (n + 1) * dt
        refactor = False
        for k in range(nb):
            if br_kind[k] == K_SW and br_seg[k] == 0 and t >= br_par[k, 0] - 1e-6 * dt:
                br_seg[k] = 1
                refactor = True
        if refactor:
            lu = assemble(dim, dt, br_a, br_b, br_kind, br_par, br_seg, br_g, ln_a, ln_b,
                          ln_par, src_row, src_node, tr_row, tr_nodes, tr_ratio)
            piv, ok = lu_factor(lu)
            if not ok:
                return ST_SINGULAR, n + 1

        for k in range(nl):
            zc = ln_par[k, 0]
            rq = 0.25 * ln_par[k, 1]
            g = 1.0 / (zc + rq)
            h = (zc - rq) / (zc + rq)
            s = (n + 1) - ln_par[k, 2] / dt
            j = int(math.floor(s))
            frac = s - j
            vk = _delayed(ln_buf[k], 0, j, frac, depth)
            ik = _delayed(ln_buf[k], 1, j, frac, depth)
            vm = _delayed(ln_buf[k], 2, j, frac, depth)
            im = _delayed(ln_buf[k], 3, j, frac, depth)
            wk = g * vk + h * ik
            wm = g * vm + h * im
            ln_hk[k] = -0.5 * (1.0 + h) * wm - 0.5 * (1.0 - h) * wk
            ln_hm[k] = -0.5 * (1.0 + h) * wk - 0.5 * (1.0 - h) * wm

        for attempt in range(2):
            for q in range(dim):
                rhs[q] = 0.0
            for k in range(nb):
                hk = _branch_hist(br_kind[k], br_par[k], br_v[k], br_i[k], br_flux[k],
                                  br_seg[k], br_g[k], dt)
                hist[k] = hk
                if br_a[k] >= 0:
                    rhs[br_a[k]] -= hk
                if br_b[k] >= 0:
                    rhs[br_b[k]] += hk
            for k in range(nl):
                if ln_a[k] >= 0:
                    rhs[ln_a[k]] -= ln_hk[k]
                if ln_b[k] >= 0:
                    rhs[ln_b[k]] -= ln_hm[k]
            for k in range(src_row.shape[0]):
                rhs[src_row[k]] = src_par[k, 0] * math.cos(twopi * src_par[k, 1] * t
                                                           + src_par[k, 2])
            lu_solve(lu, piv, rhs, x)
            if attempt == 1:
                break
            changed = False
            for k in range(nb):
                seg_new[k] = br_seg[k]
                if br_kind[k] == K_SAT:
                    v_new = _xval(x, br_a[k]) - _xval(x, br_b[k])
                    fl = br_flux[k] + 0.5 * dt * (br_v[k] + v_new)
                    sg = _seg_of(fl, br_par[k, 2])
                    if sg != br_seg[k]:
                        seg_new[k] = sg
                        changed = True
            if not changed:
                break
            # one re-stamp and re-solve per step, no inner iteration
            for k in range(nb):
                br_seg[k] = seg_new[k]
            lu = assemble(dim, dt, br_a, br_b, br_kind, br_par, br_seg, br_g, ln_a, ln_b,
                          ln_par, src_row, src_node, tr_row, tr_nodes, tr_ratio)
            piv, ok = lu_factor(lu)
            if not ok:
                return ST_SINGULAR, n + 1

        for q in range(dim):
            if not math.isfinite(x[q]):
                return ST_NONFINITE, n + 1

        for k in range(nb):
            v_new = _xval(x, br_a[k]) - _xval(x, br_b[k])
            if br_kind[k] == K_SAT:
                br_flux[k] += 0.5 * dt * (br_v[k] + v_new)
            br_i[k] = br_g[k] * v_new + hist[k]
            if br_kind[k] == K_L:
                br_flux[k] = br_par[k, 0] * br_i[k]
            br_v[k] = v_new

        pos = (n + 1) % depth
        for k in range(nl):
            zc = ln_par[k, 0]
            g = 1.0 / (zc + 0.25 * ln_par[k, 1])
            vk = _xval(x, ln_a[k])
            vm = _xval(x, ln_b[k])
            ln_buf[k, 0, pos] = vk
            ln_buf[k, 1, pos] = g * vk + ln_hk[k]
            ln_buf[k, 2, pos] = vm
            ln_buf[k, 3, pos] = g * vm + ln_hm[k]

        for p in range(pr_kind.shape[0]):
            kind = pr_kind[p]
            idx = pr_idx[p]
            if kind == PK_NODE:
                val = _xval(x, idx)
            elif kind == PK_BR_I:
                val = br_i[idx]
            elif kind == PK_BR_V:
                val = br_v[idx]
            elif kind == PK_BR_FLUX:
                val = br_flux[idx]
            elif kind == PK_EXT:
                val = x[idx]
            elif kind == PK_LINE_K:
                val = ln_buf[idx, 1, pos]
            else:
                val = ln_buf[idx, 3, pos]
            out[p, n + 1] = pr_sign[p] * val
    return ST_OK, n_steps
