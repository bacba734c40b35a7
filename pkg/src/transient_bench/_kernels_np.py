"""Time-marching kernel, pure numpy flavour.

Per step: companion history currents for every branch, Bergeron history
currents from the delayed ring-buffer samples, right-hand side, dense
solve, state update, probe capture. Vectorized over elements; the Python
loop runs over time steps only.

Layout
------
branches ``br_*``  two-terminal R/L/C/switch/saturable elements
lines ``ln_*``     Bergeron lines; ``ln_buf[k, q, pos]`` with q in
                   (v_send, i_send, v_recv, i_recv), ring depth ``D``
sources ``src_*``  ideal voltage sources, one extra row each
``tr_*``           ideal-ratio constraints, one extra row each
"""

import numpy as np

from ._layout import (G_CLOSED, G_OPEN, K_C, K_L, K_R, K_SAT, K_SW, PK_BR_FLUX, PK_BR_I,
                      PK_BR_V, PK_EXT, PK_LINE_K, PK_LINE_M, PK_NODE, ST_NONFINITE, ST_OK,
                      ST_SINGULAR)


def _seg_params(seg, par):
    lu_, ls_, knee = par[:, 0], par[:, 1], par[:, 2]
    aseg = np.sign(seg) * knee * (1.0 / lu_ - 1.0 / ls_)
    lseg = np.where(seg == 0, lu_, ls_)
    return aseg, lseg


def branch_conductance(kind, par, seg, dt):
    g = np.zeros(kind.shape[0])
    m = kind == K_R
    g[m] = 1.0 / par[m, 0]
    m = kind == K_L
    g[m] = dt / (2.0 * par[m, 0])
    m = kind == K_C
    g[m] = 2.0 * par[m, 0] / dt
    m = kind == K_SW
    g[m] = np.where(seg[m] == 1, G_CLOSED, G_OPEN)
    m = kind == K_SAT
    if m.any():
        _, lseg = _seg_params(seg[m], par[m])
        g[m] = dt / (2.0 * lseg)
    return g


def assemble(dim, dt, br_a, br_b, br_kind, br_par, br_seg, ln_a, ln_b, ln_par,
             src_row, src_node, tr_row, tr_nodes, tr_ratio):
    """Dense nodal matrix; returns (A, branch conductances)."""
    g = branch_conductance(br_kind, br_par, br_seg, dt)
    big = np.zeros((dim + 1, dim + 1))
    ia = np.where(br_a < 0, dim, br_a)
    ib = np.where(br_b < 0, dim, br_b)
    np.add.at(big, (ia, ia), g)
    np.add.at(big, (ib, ib), g)
    np.add.at(big, (ia, ib), -g)
    np.add.at(big, (ib, ia), -g)
    gl = 1.0 / (ln_par[:, 0] + 0.25 * ln_par[:, 1])
    for ends in (ln_a, ln_b):
        ie = np.where(ends < 0, dim, ends)
        np.add.at(big, (ie, ie), gl)
    np.add.at(big, (src_node, src_row), 1.0)
    np.add.at(big, (src_row, src_node), 1.0)
    if tr_row.shape[0]:
        coef = np.stack([np.ones_like(tr_ratio), -np.ones_like(tr_ratio), -tr_ratio, tr_ratio],
                        axis=1)
        rows = np.repeat(tr_row[:, None], 4, axis=1)
        nodes = np.where(tr_nodes < 0, dim, tr_nodes)
        np.add.at(big, (nodes, rows), coef)
        np.add.at(big, (rows, nodes), coef)
    return big[:dim, :dim].copy(), g


def _delayed(buf, j, frac):
    # buf: (nl, 4, D); j, frac: (nl,)
    depth = buf.shape[2]
    rows = np.arange(buf.shape[0])
    v0 = np.where(j[:, None] < 0, 0.0, buf[rows, :, j % depth])
    v1 = np.where(j[:, None] + 1 < 0, 0.0, buf[rows, :, (j + 1) % depth])
    f = frac[:, None]
    return np.where(f == 0.0, v0, (1.0 - f) * v0 + f * v1)


def march(dt, n_steps, dim, br_a, br_b, br_kind, br_par, br_v, br_i, br_flux, br_seg,
          ln_a, ln_b, ln_par, ln_buf, src_row, src_node, src_par, tr_row, tr_nodes, tr_ratio,
          pr_kind, pr_idx, pr_sign, out):
    ia = np.where(br_a < 0, dim, br_a)
    ib = np.where(br_b < 0, dim, br_b)
    la = np.where(ln_a < 0, dim, ln_a)
    lb = np.where(ln_b < 0, dim, ln_b)
    is_l = br_kind == K_L
    is_c = br_kind == K_C
    is_sat = br_kind == K_SAT
    is_sw = br_kind == K_SW
    depth = ln_buf.shape[2]
    zc = ln_par[:, 0]
    rq = 0.25 * ln_par[:, 1]
    gl = 1.0 / (zc + rq)
    h = (zc - rq) / (zc + rq)
    delay = ln_par[:, 2] / dt
    src_amp, src_w, src_ph = src_par[:, 0], 2.0 * np.pi * src_par[:, 1], src_par[:, 2]

    node_probe = pr_kind == PK_NODE
    node_idx = np.where(pr_idx < 0, dim, pr_idx)

    def factor():
        return assemble(dim, dt, br_a, br_b, br_kind, br_par, br_seg, ln_a, ln_b, ln_par,
                        src_row, src_node, tr_row, tr_nodes, tr_ratio)

    a, g = factor()
    xe = np.zeros(dim + 1)

    def history():
        hist = np.zeros(br_kind.shape[0])
        hist[is_l] = br_i[is_l] + g[is_l] * br_v[is_l]
        hist[is_c] = -br_i[is_c] - g[is_c] * br_v[is_c]
        if is_sat.any():
            aseg, lseg = _seg_params(br_seg[is_sat], br_par[is_sat])
            hist[is_sat] = aseg + (br_flux[is_sat] + 0.5 * dt * br_v[is_sat]) / lseg
        return hist

    def solve(hist, hk, hm, t):
        rhs = np.zeros(dim + 1)
        rhs += np.bincount(ib, weights=hist, minlength=dim + 1)
        rhs -= np.bincount(ia, weights=hist, minlength=dim + 1)
        rhs -= np.bincount(la, weights=hk, minlength=dim + 1)
        rhs -= np.bincount(lb, weights=hm, minlength=dim + 1)
        rhs[src_row] = src_amp * np.cos(src_w * t + src_ph)
        try:
            xe[:dim] = np.linalg.solve(a, rhs[:dim])
        except np.linalg.LinAlgError:
            return False
        xe[dim] = 0.0
        return True

    for n in range(n_steps):
        t = (n + 1) * dt
        closing = is_sw & (br_seg == 0) & (t >= br_par[:, 0] - 1e-6 * dt)
        if closing.any():
            br_seg[closing] = 1
            a, g = factor()

        if ln_a.shape[0]:
            s = (n + 1) - delay
            j = np.floor(s).astype(np.int64)
            d = _delayed(ln_buf, j, s - j)
            wk = gl * d[:, 0] + h * d[:, 1]
            wm = gl * d[:, 2] + h * d[:, 3]
            hk = -0.5 * (1.0 + h) * wm - 0.5 * (1.0 - h) * wk
            hm = -0.5 * (1.0 + h) * wk - 0.5 * (1.0 - h) * wm
        else:
            hk = hm = np.zeros(0)

        hist = history()
        if not solve(hist, hk, hm, t):
            return ST_SINGULAR, n + 1
        if is_sat.any():
            v_new = xe[ia[is_sat]] - xe[ib[is_sat]]
            fl = br_flux[is_sat] + 0.5 * dt * (br_v[is_sat] + v_new)
            knee = br_par[is_sat, 2]
            sg = np.where(fl > knee, 1, np.where(fl < -knee, -1, 0))
            if np.any(sg != br_seg[is_sat]):
                # one re-stamp and re-solve per step, no inner iteration
                br_seg[is_sat] = sg
                a, g = factor()
                hist = history()
                if not solve(hist, hk, hm, t):
                    return ST_SINGULAR, n + 1

        if not np.all(np.isfinite(xe)):
            return ST_NONFINITE, n + 1

        v_new = xe[ia] - xe[ib]
        br_flux[is_sat] += 0.5 * dt * (br_v[is_sat] + v_new[is_sat])
        br_i[:] = g * v_new + hist
        br_flux[is_l] = br_par[is_l, 0] * br_i[is_l]
        br_v[:] = v_new

        pos = (n + 1) % depth
        if ln_a.shape[0]:
            vk = xe[la]
            vm = xe[lb]
            ln_buf[:, 0, pos] = vk
            ln_buf[:, 1, pos] = gl * vk + hk
            ln_buf[:, 2, pos] = vm
            ln_buf[:, 3, pos] = gl * vm + hm

        col = np.empty(pr_kind.shape[0])
        col[node_probe] = xe[node_idx[node_probe]]
        for kind, src in ((PK_BR_I, br_i), (PK_BR_V, br_v), (PK_BR_FLUX, br_flux)):
            m = pr_kind == kind
            col[m] = src[pr_idx[m]]
        m = pr_kind == PK_EXT
        col[m] = xe[pr_idx[m]]
        m = pr_kind == PK_LINE_K
        col[m] = ln_buf[pr_idx[m], 1, pos]
        m = pr_kind == PK_LINE_M
        col[m] = ln_buf[pr_idx[m], 3, pos]
        out[:, n + 1] = pr_sign * col
    return ST_OK, n_steps
