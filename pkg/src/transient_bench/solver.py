"""Fixed-step trapezoidal transient solver.

Every inductor and capacitor is replaced by its trapezoidal companion (a
conductance in parallel with a history current source), every Bergeron
line end by ``1/Z`` in parallel with a delayed history current, and the
resulting nodal system is solved once per step. Ideal sources and ideal
transformer ratios add extra rows (modified nodal analysis).

The step loop itself lives in ``_kernels_jit`` / ``_kernels_np``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _backend
from ._layout import (K_C, K_L, K_R, K_SAT, K_SW, PK_BR_FLUX, PK_BR_I, PK_BR_V, PK_EXT,
                      PK_LINE_K, PK_LINE_M, PK_NODE, ST_NONFINITE, ST_OK, ST_SINGULAR)
from .circuit import (G_CLOSED, G_OPEN, BergeronLine, Capacitor, Circuit, Inductor, Resistor,
                      SaturableInductor, Switch, Transformer, VoltageSource, terminals,
                      validate)
from .errors import NumericFault, ParameterError, SingularMatrixError, TimestepError

# Bergeron lines need at least this many steps per travel time.
MIN_STEPS_PER_TAU = 10
G_INIT_INDUCTOR = 1e-6


class CompanionStamp(NamedTuple):
    g: float        # siemens
    i_hist: float   # ampere, Norton injection from n1 to n2


def _check_positive(name, value):
    if not value > 0:
        raise ParameterError(name, f"{name} must be > 0 (got {value!r})")


def companion_inductor(l: float, dt: float, v_prev: float, i_prev: float) -> CompanionStamp:
    _check_positive("l", l)
    _check_positive("dt", dt)
    g = dt / (2.0 * l)
    return CompanionStamp(g, i_prev + g * v_prev)


def companion_capacitor(c: float, dt: float, v_prev: float, i_prev: float) -> CompanionStamp:
    _check_positive("c", c)
    _check_positive("dt", dt)
    g = 2.0 * c / dt
    return CompanionStamp(g, -i_prev - g * v_prev)


def bergeron_history(z_c: float, v_far: float, i_far: float, r_total: float = 0.0,
                     v_near: float = 0.0, i_near: float = 0.0) -> float:
    """History current at one line end from the samples one travel time ago.

    Currents are positive into the line. With ``r_total > 0`` the loss is
    lumped as r/4 at each end and r/2 in the middle; the near-end samples
    then contribute too.
    """
    _check_positive("z_c", z_c)
    rq = 0.25 * r_total
    g = 1.0 / (z_c + rq)
    h = (z_c - rq) / (z_c + rq)
    return (-0.5 * (1.0 + h) * (g * v_far + h * i_far)
            - 0.5 * (1.0 - h) * (g * v_near + h * i_near))


def saturation_segment(flux: float, flux_knee: float) -> int:
    if flux > flux_knee:
        return 1
    if flux < -flux_knee:
        return -1
    return 0


def update_saturable_inductor(l_unsat: float, l_sat: float, flux_knee: float,
                              flux: float) -> tuple:
    """Return ``(segment, incremental inductance)`` for the given flux linkage."""
    seg = saturation_segment(flux, flux_knee)
    return seg, (l_unsat if seg == 0 else l_sat)


def saturation_current(flux, l_unsat: float, l_sat: float, flux_knee: float):
    """Piecewise-linear current for flux linkage ``flux`` (scalar or array)."""
    flux = np.asarray(flux, dtype=float)
    excess = np.maximum(np.abs(flux) - flux_knee, 0.0)
    core = np.clip(flux, -flux_knee, flux_knee) / l_unsat
    out = core + np.sign(flux) * excess / l_sat
    return float(out) if out.ndim == 0 else out


def integrate_flux(flux: float, v_prev: float, v_new: float, dt: float) -> float:
    return flux + 0.5 * dt * (v_prev + v_new)


@dataclass(frozen=True, eq=False)
class WaveformSet:
    """Uniformly sampled probe records; ``data[k, n]`` is probe k at ``t0 + n*dt``."""

    dt: float
    t0: float
    names: tuple
    data: np.ndarray

    def __post_init__(self):
        self.data.setflags(write=False)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.data[self.names.index(name)]
        except ValueError:
            raise KeyError(name) from None

    def __len__(self):
        return self.data.shape[1]

    @property
    def time(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.data.shape[1])

    def index_at(self, t: float) -> int:
        return int(round((t - self.t0) / self.dt))

    def identical(self, other: "WaveformSet") -> bool:
        return (self.dt == other.dt and self.t0 == other.t0 and self.names == other.names
                and self.data.shape == other.data.shape
                and self.data.tobytes() == other.data.tobytes())


class _Compiled:
    """Flat arrays for the kernels plus probe and element bookkeeping."""

    def __init__(self, circuit: Circuit):
        self.n_nodes = circuit.nodes
        self.branches = []     # (a_node, b_node, kind, p0, p1, p2, v0, i0, flux0)
        self.lines = []        # (send, recv, z_c, r_total, tau)
        self.sources = []      # (node, amplitude, freq, phase)
        self.transformers = []  # (h1, h2, x1, x2, ratio)
        self.targets = {}      # (element id, quantity) -> (probe kind, ref, sign)
        for eid, el in enumerate(circuit.elements):
            self._expand(eid, el)
        # declared but unconnected nodes are pinned to ground so the nodal
        # matrix stays regular; they read 0 V
        used = {n for el in circuit.elements for n in terminals(el)}
        for n in range(1, circuit.nodes):
            if n not in used:
                self._branch(n, 0, K_R, 1.0)

    def _new_node(self) -> int:
        self.n_nodes += 1
        return self.n_nodes - 1

    def _branch(self, a, b, kind, p0, p1=0.0, p2=0.0, v0=0.0, i0=0.0, flux0=0.0) -> int:
        self.branches.append((a, b, kind, p0, p1, p2, v0, i0, flux0))
        return len(self.branches) - 1

    def _two_terminal_targets(self, eid, k, flux=False):
        self.targets[(eid, "i")] = (PK_BR_I, k, 1.0)
        self.targets[(eid, "v")] = (PK_BR_V, k, 1.0)
        if flux:
            self.targets[(eid, "flux")] = (PK_BR_FLUX, k, 1.0)

    def _expand(self, eid, el):
        if isinstance(el, Resistor):
            self._two_terminal_targets(eid, self._branch(el.n1, el.n2, K_R, el.r))
        elif isinstance(el, Inductor):
            k = self._branch(el.n1, el.n2, K_L, el.l, i0=el.i0, flux0=el.l * el.i0)
            self._two_terminal_targets(eid, k, flux=True)
        elif isinstance(el, Capacitor):
            self._two_terminal_targets(eid, self._branch(el.n1, el.n2, K_C, el.c, v0=el.v0))
        elif isinstance(el, SaturableInductor):
            i0 = saturation_current(el.flux0, el.l_unsat, el.l_sat, el.flux_knee)
            k = self._branch(el.n1, el.n2, K_SAT, el.l_unsat, el.l_sat, el.flux_knee,
                             i0=i0, flux0=el.flux0)
            self._two_terminal_targets(eid, k, flux=True)
        elif isinstance(el, Switch):
            t_close = math.inf if el.t_close is None else el.t_close
            self._two_terminal_targets(eid, self._branch(el.n1, el.n2, K_SW, t_close))
        elif isinstance(el, BergeronLine):
            self.lines.append((el.n_send, el.n_recv, el.z_c, el.r_total, el.tau))
            k = len(self.lines) - 1
            self.targets[(eid, "i_send")] = (PK_LINE_K, k, 1.0)
            self.targets[(eid, "i_recv")] = (PK_LINE_M, k, 1.0)
        elif isinstance(el, VoltageSource):
            if el.r_thev == 0 and el.l_thev == 0:
                self.sources.append((el.n_pos, el.amplitude, el.freq, el.phase))
                # extra-row unknown is the current leaving the node into the source
                self.targets[(eid, "i")] = ("src", len(self.sources) - 1, -1.0)
                return
            emf = self._new_node()
            self.sources.append((emf, el.amplitude, el.freq, el.phase))
            a = emf
            k = None
            if el.r_thev > 0:
                b = self._new_node() if el.l_thev > 0 else el.n_pos
                k = self._branch(a, b, K_R, el.r_thev)
                a = b
            if el.l_thev > 0:
                k = self._branch(a, el.n_pos, K_L, el.l_thev)
            self.targets[(eid, "i")] = (PK_BR_I, k, 1.0)
        elif isinstance(el, Transformer):
            self._expand_transformer(eid, el)
        else:
            raise TypeError(f"unsupported element {el!r}")

    def _expand_transformer(self, eid, el):
        m = el.model
        x = self._new_node()
        self.transformers.append((el.hv, el.hv_neutral, x, el.lv_neutral, m.ratio))
        self.targets[(eid, "i")] = ("tr", len(self.transformers) - 1, 1.0)
        if m.saturable:
            kmag = self._branch(x, el.lv_neutral, K_SAT, m.l_mag_lv, m.l_sat, m.flux_knee)
        else:
            kmag = self._branch(x, el.lv_neutral, K_L, m.l_mag_lv)
        self.targets[(eid, "i_mag")] = (PK_BR_I, kmag, 1.0)
        self.targets[(eid, "flux")] = (PK_BR_FLUX, kmag, 1.0)
        self._branch(x, el.lv_neutral, K_R, m.r_mag_lv)
        a = x
        if m.r_series_lv > 0:
            a = self._new_node()
            self._branch(x, a, K_R, m.r_series_lv)
        self._branch(a, el.lv, K_L, m.l_leak_lv)
        if m.c_hl > 0:
            self._branch(el.hv, el.lv, K_C, m.c_hl)
        if m.c_surge > 0:
            self._branch(el.lv, el.lv_neutral, K_C, m.c_surge)

    @property
    def n_node_rows(self) -> int:
        return self.n_nodes - 1

    @property
    def dim(self) -> int:
        return self.n_node_rows + len(self.sources) + len(self.transformers)

    def resolve_target(self, kind, ref, sign):
        if kind == "src":
            return PK_EXT, self.n_node_rows + ref, sign
        if kind == "tr":
            return PK_EXT, self.n_node_rows + len(self.sources) + ref, sign
        return kind, ref, sign


def _i64(values, width=None):
    arr = np.asarray(values, dtype=np.int64)
    if width is not None:
        arr = arr.reshape(-1, width)
    return arr


def _f64(values, width=None):
    arr = np.asarray(values, dtype=np.float64)
    if width is not None:
        arr = arr.reshape(-1, width)
    return arr


def _initial_state(comp: _Compiled):
    """Consistent t = 0 operating point.

    Capacitors act as voltage sources at ``v0``, inductors as current
    sources at ``i0``, lines as their surge impedance with no history.
    Inductors also get a weak conductance so that nodes reached only
    through inductors (an open winding behind its leakage) start at the
    voltage of their neighbour instead of at zero; otherwise the first
    trapezoidal steps ring between 0 and twice the true value. A 1 pS leak
    on every node keeps the rest determined.
    """
    nr = comp.n_node_rows
    caps = [k for k, b in enumerate(comp.branches) if b[2] == K_C]
    ns, nt = len(comp.sources), len(comp.transformers)
    dim = nr + ns + nt + len(caps)
    a = np.zeros((dim, dim))
    rhs = np.zeros(dim)
    a[np.arange(nr), np.arange(nr)] += 1e-12

    def stamp(i, j, g):
        i, j = i - 1, j - 1
        if i >= 0:
            a[i, i] += g
        if j >= 0:
            a[j, j] += g
        if i >= 0 and j >= 0:
            a[i, j] -= g
            a[j, i] -= g

    def inject(i, j, cur):
        # current ``cur`` flows from node i to node j through the branch
        if i > 0:
            rhs[i - 1] -= cur
        if j > 0:
            rhs[j - 1] += cur

    def couple(row, node, coef):
        if node > 0:
            a[node - 1, row] += coef
            a[row, node - 1] += coef

    for (n1, n2, kind, p0, p1, p2, v0, i0, flux0) in comp.branches:
        if kind == K_R:
            stamp(n1, n2, 1.0 / p0)
        elif kind == K_SW:
            stamp(n1, n2, G_CLOSED if p0 <= 0 else G_OPEN)
        elif kind in (K_L, K_SAT):
            stamp(n1, n2, G_INIT_INDUCTOR)
            inject(n1, n2, i0)
    for (send, recv, z_c, r_total, _tau) in comp.lines:
        g = 1.0 / (z_c + 0.25 * r_total)
        stamp(send, 0, g)
        stamp(recv, 0, g)
    for k, (node, amp, freq, phase) in enumerate(comp.sources):
        couple(nr + k, node, 1.0)
        rhs[nr + k] = amp * math.cos(phase)
    for k, (h1, h2, x1, x2, ratio) in enumerate(comp.transformers):
        row = nr + ns + k
        for node, coef in ((h1, 1.0), (h2, -1.0), (x1, -ratio), (x2, ratio)):
            couple(row, node, coef)
    for q, k in enumerate(caps):
        n1, n2 = comp.branches[k][:2]
        row = nr + ns + nt + q
        couple(row, n1, 1.0)
        couple(row, n2, -1.0)
        rhs[row] = comp.branches[k][6]
    try:
        x = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError:
        raise SingularMatrixError("singular system while computing the initial state", 0) from None

    volts = np.concatenate([[0.0], x[:nr]])
    nb = len(comp.branches)
    br_v = np.zeros(nb)
    br_i = np.zeros(nb)
    br_flux = np.zeros(nb)
    br_seg = np.zeros(nb, dtype=np.int64)
    cap_current = {k: x[nr + ns + nt + q] for q, k in enumerate(caps)}
    for k, (n1, n2, kind, p0, p1, p2, v0, i0, flux0) in enumerate(comp.branches):
        v = volts[n1] - volts[n2]
        br_v[k] = v
        if kind == K_R:
            br_i[k] = v / p0
        elif kind == K_SW:
            closed = p0 <= 0
            br_seg[k] = 1 if closed else 0
            br_i[k] = (G_CLOSED if closed else G_OPEN) * v
        elif kind == K_C:
            br_i[k] = cap_current[k]
        elif kind == K_L:
            br_i[k] = i0
            br_flux[k] = p0 * i0
        else:
            br_i[k] = i0
            br_flux[k] = flux0
            br_seg[k] = saturation_segment(flux0, p2)
    ext = x[nr:nr + ns + nt]
    return volts, br_v, br_i, br_flux, br_seg, ext


def _probe_arrays(circuit: Circuit, comp: _Compiled):
    kinds, idxs, signs = [], [], []
    for p in circuit.probes:
        if p.node is not None:
            kinds.append(PK_NODE)
            idxs.append(p.node - 1)
            signs.append(1.0)
            continue
        key = (p.element, p.quantity)
        if key not in comp.targets:
            raise ParameterError("quantity", f"probe {p.name!r}: element {p.element} has no "
                                 f"{p.quantity!r} quantity")
        kind, ref, sign = comp.resolve_target(*comp.targets[key])
        kinds.append(kind)
        idxs.append(ref)
        signs.append(sign)
    return _i64(kinds), _i64(idxs), _f64(signs)


def default_timestep(taus=(), natural_periods=(), cap: float = 1e-6) -> float:
    """``min(tau/20, T/200)`` over the given travel times and periods, capped."""
    cands = [cap] + [t / 20 for t in taus] + [T / 200 for T in natural_periods]
    return min(cands)


def run(circuit: Circuit, dt: float, t_end: float, backend: Optional[str] = None) -> WaveformSet:
    """Time-march ``circuit`` from 0 to ``t_end`` with fixed step ``dt``."""
    issues = validate(circuit)
    if issues:
        raise ParameterError("circuit", "invalid circuit: " + "; ".join(issues))
    if not dt > 0:
        raise ParameterError("dt", "dt must be > 0")
    if not t_end > dt:
        raise ParameterError("t_end", "t_end must exceed dt")
    taus = [el.tau for el in circuit.elements if isinstance(el, BergeronLine)]
    if taus:
        max_dt = min(taus) / MIN_STEPS_PER_TAU
        if dt > max_dt * (1 + 1e-12):
            raise TimestepError(f"dt={dt:g} s is too large for a line with tau={min(taus):g} s; "
                                f"use dt <= {max_dt:g} s", max_dt)

    comp = _Compiled(circuit)
    n_steps = int(round(t_end / dt))
    volts, br_v, br_i, br_flux, br_seg, ext = _initial_state(comp)
    dim = comp.dim

    br = comp.branches
    br_a = _i64([b[0] - 1 for b in br])
    br_b = _i64([b[1] - 1 for b in br])
    br_kind = _i64([b[2] for b in br])
    br_par = _f64([b[3:6] for b in br], 3)

    lines = comp.lines
    ln_a = _i64([ln[0] - 1 for ln in lines])
    ln_b = _i64([ln[1] - 1 for ln in lines])
    ln_par = _f64([(ln[2], ln[3], ln[4]) for ln in lines], 3)
    depth = max([int(math.ceil(ln[4] / dt)) + 2 for ln in lines], default=2)
    ln_buf = np.zeros((len(lines), 4, depth))
    for k, (send, recv, z_c, r_total, _tau) in enumerate(lines):
        g = 1.0 / (z_c + 0.25 * r_total)
        ln_buf[k, :, 0] = (volts[send], g * volts[send], volts[recv], g * volts[recv])

    nr = comp.n_node_rows
    src_row = _i64([nr + k for k in range(len(comp.sources))])
    src_node = _i64([s[0] - 1 for s in comp.sources])
    src_par = _f64([s[1:] for s in comp.sources], 3)
    tr_row = _i64([nr + len(comp.sources) + k for k in range(len(comp.transformers))])
    tr_nodes = _i64([[n - 1 for n in t[:4]] for t in comp.transformers], 4)
    tr_ratio = _f64([t[4] for t in comp.transformers])

    pr_kind, pr_idx, pr_sign = _probe_arrays(circuit, comp)
    out = np.zeros((len(circuit.probes), n_steps + 1))
    x0 = np.concatenate([volts[1:], ext, [0.0]])
    for p in range(pr_kind.shape[0]):
        kind, idx = pr_kind[p], pr_idx[p]
        if kind == PK_NODE:
            val = volts[idx + 1]
        elif kind == PK_BR_I:
            val = br_i[idx]
        elif kind == PK_BR_V:
            val = br_v[idx]
        elif kind == PK_BR_FLUX:
            val = br_flux[idx]
        elif kind == PK_EXT:
            val = x0[idx]
        elif kind == PK_LINE_K:
            val = ln_buf[idx, 1, 0]
        else:
            val = ln_buf[idx, 3, 0]
        out[p, 0] = pr_sign[p] * val

    _, march = _backend.march_kernel(backend)
    status, step = march(float(dt), n_steps, dim, br_a, br_b, br_kind, br_par, br_v, br_i,
                         br_flux, br_seg, ln_a, ln_b, ln_par, ln_buf, src_row, src_node,
                         src_par, tr_row, tr_nodes, tr_ratio, pr_kind, pr_idx, pr_sign, out)
    if status == ST_SINGULAR:
        raise SingularMatrixError(f"singular nodal matrix at step {step}; check for floating "
                                  "subnetworks or loops of ideal sources", step)
    if status == ST_NONFINITE:
        raise NumericFault(f"non-finite solution at step {step} (t={step * dt:g} s)", step)
    assert status == ST_OK
    names = tuple(p.name for p in circuit.probes)
    return WaveformSet(dt=float(dt), t0=0.0, names=names, data=out)
