"""Scenario files and the circuit builders for the two energization cases.

Both cases are instances of one radial chain, per phase::

    source -> bus -> breaker -> [primary cable] -> transformer -> [secondary]

Case A feeds the transformer through a long HV cable and loads its LV side
with a short cable; case B switches the transformer with a 50 kV line (or
its lumped capacitance) hanging off the LV terminals.

Scenario documents are YAML, all quantities in SI units.
"""

from __future__ import annotations

import copy
import dataclasses
import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import yaml

from . import transformer as tfm
from .circuit import (R_FLOAT, BergeronLine, Capacitor, Circuit, Inductor, Resistor, Switch,
                      Transformer, VoltageSource)
from .errors import ConfigError, ParameterError
from .solver import default_timestep

PHASE_LABELS = "abc"
SETTLE_CYCLES = 3


def thevenin_from_short_circuit(u_ll_rms: float, i_sc_rms: float, f: float) -> float:
    """Source inductance from the three-phase short-circuit level."""
    for name, value in (("u_ll_rms", u_ll_rms), ("i_sc_rms", i_sc_rms), ("f", f)):
        if not value > 0:
            raise ParameterError(name, f"{name} must be > 0")
    x = u_ll_rms / (math.sqrt(3.0) * i_sc_rms)
    return x / (2.0 * math.pi * f)


# -- config types -----------------------------------------------------------

@dataclass(frozen=True)
class SourceConfig:
    u_ll_rms_v: float
    f_hz: float
    sc_current_a: float
    surge_impedance_ohm: Optional[float]
    phase_rad: float


@dataclass(frozen=True)
class CableConfig:
    length_m: float
    velocity_m_per_s: float
    z_c_ohm: float
    r_total_ohm: float

    @property
    def tau(self) -> float:
        return self.length_m / self.velocity_m_per_s


@dataclass(frozen=True)
class TransformerConfig:
    s_va: float
    u_hv_v: float
    u_lv_v: float
    u_hv_tap1_v: float
    u_hv_tap_max_v: float
    tap_count: int
    z_leak_pct: float
    z_leak_pct_tap1: Optional[float]
    z_leak_pct_tap_max: Optional[float]
    i_mag_pct: float
    p_noload_w: float
    p_shortcircuit_w: float
    f_rated_hz: float
    tap: int
    saturable: bool
    capacitive: bool
    k_c: float
    c_lv_total_f: float
    hv_neutral: str
    lv_neutral: str
    present: bool

    def nameplate(self) -> tfm.TransformerNameplate:
        return tfm.TransformerNameplate(
            s_rated=self.s_va, u_hv=self.u_hv_v, u_lv=self.u_lv_v, u_hv_tap1=self.u_hv_tap1_v,
            u_hv_tap_max=self.u_hv_tap_max_v, tap_count=self.tap_count,
            z_leak_pct=self.z_leak_pct, z_leak_pct_tap1=self.z_leak_pct_tap1,
            z_leak_pct_tap_max=self.z_leak_pct_tap_max, i_mag_pct=self.i_mag_pct,
            p_noload=self.p_noload_w, p_shortcircuit=self.p_shortcircuit_w,
            f_rated=self.f_rated_hz)

    def model(self) -> tfm.TransformerModel:
        return tfm.build_model(self.nameplate(), self.tap, saturable=self.saturable,
                               capacitive=self.capacitive, k_c=self.k_c,
                               c_lv_total=self.c_lv_total_f)


@dataclass(frozen=True)
class SecondaryConfig:
    kind: str
    capacitance_f: Optional[float]
    capacitance_per_m_f: float
    length_m: Optional[float]
    velocity_m_per_s: Optional[float]
    z_c_ohm: Optional[float]
    r_total_ohm: float
    switched_separately: bool

    @property
    def tau(self) -> float:
        return self.length_m / self.velocity_m_per_s


@dataclass(frozen=True)
class SwitchingConfig:
    mode: str
    t_close_s: Optional[tuple]
    t_min_s: Optional[float]
    pole_offsets_s: tuple


@dataclass(frozen=True)
class SimConfig:
    dt_s: Optional[float]
    t_end_s: Optional[float]
    phases: int


@dataclass(frozen=True)
class ScenarioConfig:
    case_kind: str
    source: SourceConfig
    primary_cable: Optional[CableConfig]
    transformer: TransformerConfig
    secondary: SecondaryConfig
    switching: SwitchingConfig
    sim: SimConfig
    probes: tuple
    parallel_branch: bool = False


# -- field converters -------------------------------------------------------

def _real(path, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(path, f"expected a finite number, got {v!r}")
    return float(v)


def _pos(path, v):
    v = _real(path, v)
    if v <= 0:
        raise ConfigError(path, f"must be > 0 (got {v!r})")
    return v


def _nonneg(path, v):
    v = _real(path, v)
    if v < 0:
        raise ConfigError(path, f"must be >= 0 (got {v!r})")
    return v


def _opt(conv):
    def inner(path, v):
        return None if v is None else conv(path, v)
    return inner


def _int(path, v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    return v


def _bool(path, v):
    if not isinstance(v, bool):
        raise ConfigError(path, f"expected true/false, got {v!r}")
    return v


def _choice(*options):
    def inner(path, v):
        if v not in options:
            raise ConfigError(path, f"must be one of {', '.join(options)} (got {v!r})")
        return v
    return inner


def _real_list(conv):
    def inner(path, v):
        if not isinstance(v, (list, tuple)):
            raise ConfigError(path, f"expected a list, got {v!r}")
        return tuple(conv(f"{path}[{i}]", x) for i, x in enumerate(v))
    return inner


def _names(path, v):
    if not isinstance(v, (list, tuple)) or not all(isinstance(x, str) for x in v):
        raise ConfigError(path, f"expected a list of names, got {v!r}")
    if len(set(v)) != len(v):
        raise ConfigError(path, "probe names must be unique")
    return tuple(v)


_NEUTRAL = _choice("grounded", "floating")

SECTIONS = {
    "source": (SourceConfig, {
        "u_ll_rms_v": _pos, "f_hz": _pos, "sc_current_a": _pos,
        "surge_impedance_ohm": _opt(_pos), "phase_rad": _real}),
    "primary_cable": (CableConfig, {
        "length_m": _pos, "velocity_m_per_s": _pos, "z_c_ohm": _pos, "r_total_ohm": _nonneg}),
    "transformer": (TransformerConfig, {
        "s_va": _pos, "u_hv_v": _pos, "u_lv_v": _pos, "u_hv_tap1_v": _pos,
        "u_hv_tap_max_v": _pos, "tap_count": _int, "z_leak_pct": _pos,
        "z_leak_pct_tap1": _opt(_pos), "z_leak_pct_tap_max": _opt(_pos), "i_mag_pct": _pos,
        "p_noload_w": _pos, "p_shortcircuit_w": _pos, "f_rated_hz": _pos, "tap": _int,
        "saturable": _bool, "capacitive": _bool, "k_c": _pos, "c_lv_total_f": _pos,
        "hv_neutral": _NEUTRAL, "lv_neutral": _NEUTRAL, "present": _bool}),
    "secondary": (SecondaryConfig, {
        "kind": _choice("cable", "line", "none"), "capacitance_f": _opt(_pos),
        "capacitance_per_m_f": _pos, "length_m": _opt(_pos),
        "velocity_m_per_s": _opt(_pos), "z_c_ohm": _opt(_pos), "r_total_ohm": _nonneg,
        "switched_separately": _bool}),
    "switching": (SwitchingConfig, {
        "mode": _choice("phase_a_peak", "phase_a_zero", "explicit"),
        "t_close_s": _opt(_real_list(_nonneg)), "t_min_s": _opt(_nonneg),
        "pole_offsets_s": _real_list(_real)}),
    "sim": (SimConfig, {"dt_s": _opt(_pos), "t_end_s": _opt(_pos), "phases": _int}),
}
TOP_LEVEL = ("case_kind", "source", "primary_cable", "transformer", "secondary", "switching",
             "sim", "probes", "parallel_branch")


def _nameplate_dict(np_: tfm.TransformerNameplate) -> dict:
    return {
        "s_va": np_.s_rated, "u_hv_v": np_.u_hv, "u_lv_v": np_.u_lv,
        "u_hv_tap1_v": np_.u_hv_tap1, "u_hv_tap_max_v": np_.u_hv_tap_max,
        "tap_count": np_.tap_count, "z_leak_pct": np_.z_leak_pct,
        "z_leak_pct_tap1": np_.z_leak_pct_tap1, "z_leak_pct_tap_max": np_.z_leak_pct_tap_max,
        "i_mag_pct": np_.i_mag_pct, "p_noload_w": np_.p_noload,
        "p_shortcircuit_w": np_.p_shortcircuit, "f_rated_hz": np_.f_rated,
    }


_TRANSFORMER_OPTIONS = {
    "tap": 11, "saturable": False, "capacitive": False, "k_c": 0.2, "c_lv_total_f": 4e-9,
    "hv_neutral": "grounded", "lv_neutral": "grounded", "present": True,
}
_SWITCHING = {"mode": "phase_a_peak", "t_close_s": None, "t_min_s": None,
              "pole_offsets_s": [0.0, 0.0, 0.0]}
_SIM = {"dt_s": None, "t_end_s": None, "phases": 3}
# Bus surge impedance, chosen so that 3/4 of the source voltage is launched
# into a 40 ohm cable (1.5 p.u. after doubling at the transformer).
BUS_SURGE_IMPEDANCE = 40.0 / 3.0
# 50 kV double-circuit line: 200 ohm, 118 nF total over 4 km.
OHL_Z_C = 200.0
OHL_CAPACITANCE = 118e-9
OHL_LENGTH = 4000.0

DEFAULTS = {
    "case_a": {
        "source": {"u_ll_rms_v": 150e3, "f_hz": 50.0, "sc_current_a": 33e3,
                   "surge_impedance_ohm": BUS_SURGE_IMPEDANCE, "phase_rad": 0.0},
        "primary_cable": {"length_m": 7100.0, "velocity_m_per_s": 150e6, "z_c_ohm": 40.0,
                          "r_total_ohm": 0.0},
        "transformer": {**_nameplate_dict(tfm.ZVD), **_TRANSFORMER_OPTIONS},
        "secondary": {"kind": "cable", "capacitance_f": None, "capacitance_per_m_f": 2.2e-10,
                      "length_m": 60.0, "velocity_m_per_s": None, "z_c_ohm": None,
                      "r_total_ohm": 0.0, "switched_separately": False},
        "switching": _SWITCHING, "sim": _SIM, "probes": None, "parallel_branch": False,
    },
    "case_b": {
        "source": {"u_ll_rms_v": 150e3, "f_hz": 50.0, "sc_current_a": 42e3,
                   "surge_impedance_ohm": BUS_SURGE_IMPEDANCE, "phase_rad": 0.0},
        "primary_cable": None,
        "transformer": {**_nameplate_dict(tfm.DDW), **_TRANSFORMER_OPTIONS},
        "secondary": {"kind": "cable", "capacitance_f": OHL_CAPACITANCE,
                      "capacitance_per_m_f": 2.2e-10, "length_m": OHL_LENGTH,
                      "velocity_m_per_s": OHL_LENGTH / (OHL_Z_C * OHL_CAPACITANCE),
                      "z_c_ohm": OHL_Z_C, "r_total_ohm": 0.0, "switched_separately": False},
        "switching": _SWITCHING, "sim": _SIM, "probes": None, "parallel_branch": False,
    },
    "custom": {
        "source": {"f_hz": 50.0, "surge_impedance_ohm": None, "phase_rad": 0.0},
        "primary_cable": None,
        "transformer": dict(_TRANSFORMER_OPTIONS, z_leak_pct_tap1=None,
                            z_leak_pct_tap_max=None, f_rated_hz=50.0),
        "secondary": {"kind": "none", "capacitance_f": None, "capacitance_per_m_f": 2.2e-10,
                      "length_m": None, "velocity_m_per_s": None, "z_c_ohm": None,
                      "r_total_ohm": 0.0, "switched_separately": False},
        "switching": _SWITCHING, "sim": _SIM, "probes": None, "parallel_branch": False,
    },
}


def _section(name, raw, defaults):
    cls, convs = SECTIONS[name]
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(name, f"expected a mapping, got {raw!r}")
    for key in raw:
        if key not in convs:
            raise ConfigError(f"{name}.{key}", "unknown key")
    values = {}
    for key, conv in convs.items():
        if key in raw:
            value = raw[key]
        elif defaults is not None and key in defaults:
            value = defaults[key]
        else:
            raise ConfigError(f"{name}.{key}", "missing required key")
        values[key] = conv(f"{name}.{key}", value)
    return cls(**values)


def from_dict(doc) -> ScenarioConfig:
    """Build and resolve a config from a parsed document."""
    if not isinstance(doc, dict):
        raise ConfigError("", "scenario document must be a mapping")
    for key in doc:
        if key not in TOP_LEVEL:
            raise ConfigError(str(key), "unknown key")
    if "case_kind" not in doc:
        raise ConfigError("case_kind", "missing required key")
    kind = _choice("case_a", "case_b", "custom")("case_kind", doc["case_kind"])
    defaults = DEFAULTS[kind]

    sections = {}
    for name in SECTIONS:
        if name == "primary_cable":
            raw = doc.get(name, defaults[name])
            if raw is None:
                sections[name] = None
                continue
            sections[name] = _section(name, raw, defaults[name] or {"r_total_ohm": 0.0})
            continue
        sections[name] = _section(name, doc.get(name), defaults[name])
    probes = doc.get("probes", defaults["probes"])
    probes = None if probes is None else _names("probes", probes)
    parallel = _bool("parallel_branch", doc.get("parallel_branch", defaults["parallel_branch"]))
    cfg = ScenarioConfig(case_kind=kind, probes=probes, parallel_branch=parallel, **sections)
    return resolve(cfg)


def _phase_angle(phase_rad: float, pole: int) -> float:
    return phase_rad - pole * 2.0 * math.pi / 3.0


def _selector_time(mode: str, src: SourceConfig, t_min: float) -> float:
    w = 2.0 * math.pi * src.f_hz
    # cos(w t + phase) is at a positive peak for angle 2 pi k, rising zero at 2 pi k - pi/2
    target = 0.0 if mode == "phase_a_peak" else -0.5 * math.pi
    k = math.ceil((w * t_min + src.phase_rad - target) / (2.0 * math.pi) - 1e-9)
    return (2.0 * math.pi * k + target - src.phase_rad) / w


def pre_energized(cfg: ScenarioConfig) -> bool:
    return cfg.parallel_branch or cfg.secondary.switched_separately


def _secondary_capacitance(sec: SecondaryConfig) -> Optional[float]:
    if sec.kind == "cable":
        return sec.capacitance_f
    if sec.kind == "line":
        return sec.tau / sec.z_c_ohm
    return None


def resolve(cfg: ScenarioConfig) -> ScenarioConfig:
    """Check cross-field rules and fill every derived default."""
    phases = cfg.sim.phases
    if phases not in (1, 3):
        raise ConfigError("sim.phases", "must be 1 or 3")
    tr = cfg.transformer
    try:
        nameplate = tr.nameplate()
    except ParameterError as exc:
        raise ConfigError(f"transformer.{exc.field}", str(exc)) from None
    if not 1 <= tr.tap <= tr.tap_count:
        raise ConfigError("transformer.tap", f"tap out of range: {tr.tap} not in "
                          f"1..{tr.tap_count}")
    try:
        model = tr.model()
    except ParameterError as exc:
        raise ConfigError(f"transformer.{exc.field}", str(exc)) from None

    sec = cfg.secondary
    if sec.kind == "cable" and sec.capacitance_f is None:
        if sec.length_m is None:
            raise ConfigError("secondary.capacitance_f",
                              "cable needs capacitance_f or length_m")
        sec = dataclasses.replace(sec, capacitance_f=sec.length_m * sec.capacitance_per_m_f)
    if sec.kind == "line":
        for key in ("length_m", "velocity_m_per_s", "z_c_ohm"):
            if getattr(sec, key) is None:
                raise ConfigError(f"secondary.{key}", "missing required key for a line")
    if sec.switched_separately and sec.kind == "none":
        raise ConfigError("secondary.switched_separately", "nothing to switch separately")
    if not tr.present and sec.kind != "none":
        raise ConfigError("secondary.kind", "must be none when the transformer is absent")
    if cfg.parallel_branch and cfg.primary_cable is None:
        raise ConfigError("parallel_branch", "needs a primary cable")

    sw = cfg.switching
    if len(sw.pole_offsets_s) != 3:
        raise ConfigError("switching.pole_offsets_s", "expected three per-pole offsets")
    settle = SETTLE_CYCLES / cfg.source.f_hz
    t_min = sw.t_min_s
    if t_min is None:
        t_min = settle if pre_energized(cfg) else 0.005
    if sw.mode == "explicit":
        if sw.t_close_s is None or len(sw.t_close_s) != phases:
            raise ConfigError("switching.t_close_s", f"explicit mode needs {phases} close times")
        t_close = sw.t_close_s
    else:
        t0 = _selector_time(sw.mode, cfg.source, t_min)
        t_close = tuple(t0 + sw.pole_offsets_s[p] for p in range(phases))
    sw = dataclasses.replace(sw, t_close_s=tuple(t_close), t_min_s=t_min)

    sim = cfg.sim
    if sim.dt_s is None:
        taus = []
        if cfg.primary_cable is not None:
            taus.append(cfg.primary_cable.tau)
        if sec.kind == "line":
            taus.append(sec.tau)
        periods = []
        c_sec = _secondary_capacitance(sec)
        if c_sec is not None and tr.present:
            periods.append(2 * math.pi * math.sqrt(model.l_leak_lv * c_sec))
        sim = dataclasses.replace(sim, dt_s=default_timestep(taus, periods))
    if sim.t_end_s is None:
        sim = dataclasses.replace(sim, t_end_s=max(t_close) + 0.03)
    elif sim.t_end_s <= max(t_close):
        raise ConfigError("sim.t_end_s", f"run ends at {sim.t_end_s:g} s, before the last "
                          f"switching instant {max(t_close):g} s")

    resolved = dataclasses.replace(cfg, secondary=sec, switching=sw, sim=sim)
    available = probe_names(resolved)
    probes = cfg.probes if cfg.probes is not None else default_probes(resolved)
    for name in probes:
        if name not in available:
            raise ConfigError("probes", f"unknown probe {name!r}; available: "
                              f"{', '.join(available)}")
    return dataclasses.replace(resolved, probes=tuple(probes))


def probe_names(cfg: ScenarioConfig) -> list:
    names = []
    for lab in PHASE_LABELS[:cfg.sim.phases]:
        names.append(f"bus_{lab}")
        if cfg.primary_cable is not None:
            names.append(f"send_{lab}")
        names.append(f"hv_{lab}")
        if cfg.transformer.present:
            names += [f"lv_{lab}", f"i_hv_{lab}", f"i_mag_{lab}", f"flux_{lab}"]
        if cfg.secondary.switched_separately:
            names.append(f"sec_{lab}")
        if cfg.secondary.kind == "line":
            names.append(f"line_end_{lab}")
    return names


def default_probes(cfg: ScenarioConfig) -> list:
    names = ["bus_a", "hv_a"]
    if cfg.transformer.present:
        names.append("lv_a")
        if cfg.secondary.kind == "none":
            names += ["i_mag_a", "flux_a"]
    if cfg.secondary.switched_separately:
        names.append("sec_a")
    if cfg.secondary.kind == "line":
        names.append("line_end_a")
    return names


# -- documents --------------------------------------------------------------

def to_dict(cfg: ScenarioConfig) -> dict:
    def plain(v):
        if isinstance(v, tuple):
            return [plain(x) for x in v]
        return v

    doc = {"case_kind": cfg.case_kind}
    for name in SECTIONS:
        sec = getattr(cfg, name)
        doc[name] = None if sec is None else {f.name: plain(getattr(sec, f.name))
                                              for f in dataclasses.fields(sec)}
    doc["probes"] = plain(cfg.probes)
    doc["parallel_branch"] = cfg.parallel_branch
    return doc


def serialize(cfg: ScenarioConfig) -> str:
    return yaml.safe_dump(to_dict(cfg), sort_keys=False, default_flow_style=None)


def digest(cfg: ScenarioConfig) -> str:
    canonical = json.dumps(to_dict(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


class _Loader(yaml.SafeLoader):
    """Safe loader that also reads ``1e-6`` (no decimal point) as a float."""


_Loader.add_implicit_resolver(
    "tag:yaml.org,2002:float",
    re.compile(r"""^(?:[-+]?[0-9][0-9_]*(?:\.[0-9_]*)?[eE][-+]?[0-9]+
                  |[-+]?[0-9][0-9_]*\.[0-9_]*
                  |[-+]?\.[0-9_]+(?:[eE][-+]?[0-9]+)?
                  |[-+]?\.(?:inf|Inf|INF)
                  |\.(?:nan|NaN|NAN))$""", re.X),
    list("-+0123456789."))


def load_document(text: str):
    try:
        return yaml.load(text, Loader=_Loader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}" if mark is not None else ""
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError("", f"syntax error{where}: {problem}") from None


def apply_overrides(doc: dict, overrides) -> dict:
    """Apply ``dotted.key=value`` overrides; values are parsed as YAML scalars."""
    doc = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(item, "override must look like key=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = doc
        for part in parts[:-1]:
            if node.get(part) is None:
                node[part] = {}
            node = node[part]
            if not isinstance(node, dict):
                raise ConfigError(key, "cannot override inside a non-mapping value")
        node[parts[-1]] = load_document(raw)
    return doc


def parse_scenario(text: str, overrides=()) -> ScenarioConfig:
    doc = load_document(text)
    if overrides:
        if not isinstance(doc, dict):
            raise ConfigError("", "scenario document must be a mapping")
        doc = apply_overrides(doc, overrides)
    return from_dict(doc)


def default_config(case_kind: str, **overrides) -> ScenarioConfig:
    """Resolved defaults for a case; keyword overrides use ``section__key`` names."""
    doc: dict = {"case_kind": case_kind}
    for key, value in overrides.items():
        if "__" in key:
            section, sub = key.split("__", 1)
            doc.setdefault(section, {})[sub] = value
        else:
            doc[key] = value
    return from_dict(doc)


# -- builders ---------------------------------------------------------------

@dataclass
class BuiltScenario:
    circuit: Circuit
    config: ScenarioConfig
    t_close: tuple
    probe_targets: dict = field(default_factory=dict)


def _neutral(circuit: Circuit, mode: str, shared: dict, key: str) -> int:
    if mode == "grounded":
        return 0
    if key not in shared:
        node = circuit.add_node(f"{key}_neutral")
        circuit.add_element(Resistor(node, 0, R_FLOAT))
        shared[key] = node
    return shared[key]


def _build(cfg: ScenarioConfig) -> BuiltScenario:
    c = Circuit(phase_count=cfg.sim.phases)
    src = cfg.source
    l_thev = thevenin_from_short_circuit(src.u_ll_rms_v, src.sc_current_a, src.f_hz)
    amp = math.sqrt(2.0 / 3.0) * src.u_ll_rms_v
    model = cfg.transformer.model() if cfg.transformer.present else None
    sec = cfg.secondary
    targets = {}
    neutrals = {}
    t_close = cfg.switching.t_close_s

    for p, lab in enumerate(PHASE_LABELS[:cfg.sim.phases]):
        bus = c.add_node(f"bus_{lab}")
        phase = _phase_angle(src.phase_rad, p)
        if src.surge_impedance_ohm is not None:
            emf = c.add_node(f"emf_{lab}")
            c.add_element(VoltageSource(emf, amp, src.f_hz, phase))
            c.add_element(Inductor(emf, bus, l_thev))
            c.add_element(Resistor(emf, bus, src.surge_impedance_ohm))
        else:
            c.add_element(VoltageSource(bus, amp, src.f_hz, phase, l_thev=l_thev))
        targets[f"bus_{lab}"] = ("node", bus)

        t_hv = 0.0 if sec.switched_separately else t_close[p]
        if cfg.primary_cable is not None:
            send = c.add_node(f"send_{lab}")
            hv = c.add_node(f"hv_{lab}")
            cab = cfg.primary_cable
            c.add_element(Switch(bus, send, t_hv))
            c.add_element(BergeronLine(send, hv, cab.z_c_ohm, cab.tau, cab.r_total_ohm))
            targets[f"send_{lab}"] = ("node", send)
            if cfg.parallel_branch:
                send2 = c.add_node(f"send2_{lab}")
                hv2 = c.add_node(f"hv2_{lab}")
                lv2 = c.add_node(f"lv2_{lab}")
                c.add_element(Switch(bus, send2, 0.0))
                c.add_element(BergeronLine(send2, hv2, cab.z_c_ohm, cab.tau, cab.r_total_ohm))
                c.add_element(Transformer(hv2, lv2, model))
        else:
            hv = c.add_node(f"hv_{lab}")
            c.add_element(Switch(bus, hv, t_hv))
        targets[f"hv_{lab}"] = ("node", hv)

        if model is None:
            continue
        lv = c.add_node(f"lv_{lab}")
        hv_n = _neutral(c, cfg.transformer.hv_neutral, neutrals, "hv")
        lv_n = _neutral(c, cfg.transformer.lv_neutral, neutrals, "lv")
        tid = c.add_element(Transformer(hv, lv, model, hv_n, lv_n))
        targets[f"lv_{lab}"] = ("node", lv)
        targets[f"i_hv_{lab}"] = ("element", tid, "i")
        targets[f"i_mag_{lab}"] = ("element", tid, "i_mag")
        targets[f"flux_{lab}"] = ("element", tid, "flux")

        attach = lv
        if sec.switched_separately:
            attach = c.add_node(f"sec_{lab}")
            c.add_element(Switch(lv, attach, t_close[p]))
            targets[f"sec_{lab}"] = ("node", attach)
        if sec.kind == "cable":
            c.add_element(Capacitor(attach, 0, sec.capacitance_f))
        elif sec.kind == "line":
            end = c.add_node(f"line_end_{lab}")
            c.add_element(BergeronLine(attach, end, sec.z_c_ohm, sec.tau, sec.r_total_ohm))
            targets[f"line_end_{lab}"] = ("node", end)

    for name in cfg.probes:
        target = targets[name]
        if target[0] == "node":
            c.add_probe(name, node=target[1])
        else:
            c.add_probe(name, element=target[1], quantity=target[2])
    return BuiltScenario(c, cfg, tuple(t_close), targets)


def build_case_a(cfg: ScenarioConfig) -> BuiltScenario:
    if cfg.case_kind != "case_a":
        raise ConfigError("case_kind", "build_case_a needs case_kind = case_a")
    return _build(cfg)


def build_case_b(cfg: ScenarioConfig) -> BuiltScenario:
    if cfg.case_kind != "case_b":
        raise ConfigError("case_kind", "build_case_b needs case_kind = case_b")
    return _build(cfg)


def build(cfg: ScenarioConfig) -> BuiltScenario:
    """Dispatch on ``case_kind``; custom scenarios use the same radial chain."""
    return _build(cfg)


def simulate(cfg: ScenarioConfig, backend: Optional[str] = None):
    from .solver import run

    built = build(cfg)
    return run(built.circuit, cfg.sim.dt_s, cfg.sim.t_end_s, backend=backend)
