"""Netlist model: nodes, element variants, probes and structural validation.

Node 0 is ground. Element identifiers are the insertion index into
``Circuit.elements`` and never change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Union

from .errors import ParameterError

if TYPE_CHECKING:
    from .transformer import TransformerModel

GROUND = 0

# Switch conductances, 9 decades either side of typical circuit values.
G_OPEN = 1e-9
G_CLOSED = 1e9
# Grounding resistance for otherwise floating nodes (e.g. an isolated neutral).
R_FLOAT = 1e9


def _positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise ParameterError(name, f"{name} must be > 0 (got {value!r})")


def _non_negative(name: str, value: float) -> None:
    if not (value >= 0 and math.isfinite(value)):
        raise ParameterError(name, f"{name} must be >= 0 (got {value!r})")


def _node(name: str, value: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool) or value < 0:
        raise ParameterError(name, f"{name} must be a non-negative node index (got {value!r})")


@dataclass(frozen=True)
class Resistor:
    n1: int
    n2: int
    r: float

    def __post_init__(self):
        _node("n1", self.n1)
        _node("n2", self.n2)
        _positive("r", self.r)


@dataclass(frozen=True)
class Inductor:
    n1: int
    n2: int
    l: float
    i0: float = 0.0

    def __post_init__(self):
        _node("n1", self.n1)
        _node("n2", self.n2)
        _positive("l", self.l)


@dataclass(frozen=True)
class Capacitor:
    n1: int
    n2: int
    c: float
    v0: float = 0.0

    def __post_init__(self):
        _node("n1", self.n1)
        _node("n2", self.n2)
        _positive("c", self.c)


@dataclass(frozen=True)
class SaturableInductor:
    """Two-slope flux/current characteristic, symmetric about the origin."""

    n1: int
    n2: int
    l_unsat: float
    l_sat: float
    flux_knee: float
    flux0: float = 0.0

    def __post_init__(self):
        _node("n1", self.n1)
        _node("n2", self.n2)
        _positive("l_unsat", self.l_unsat)
        _positive("l_sat", self.l_sat)
        _positive("flux_knee", self.flux_knee)
        if self.l_sat > self.l_unsat:
            raise ParameterError("l_sat", "l_sat must be <= l_unsat")


@dataclass(frozen=True)
class VoltageSource:
    """``amplitude * cos(2*pi*freq*t + phase)`` from ``n_pos`` to ground.

    ``freq = 0`` gives a DC source of value ``amplitude * cos(phase)``.
    Non-zero ``r_thev``/``l_thev`` are placed in series.
    """

    n_pos: int
    amplitude: float
    freq: float = 0.0
    phase: float = 0.0
    r_thev: float = 0.0
    l_thev: float = 0.0

    def __post_init__(self):
        _node("n_pos", self.n_pos)
        if self.n_pos == GROUND:
            raise ParameterError("n_pos", "n_pos must not be ground")
        if not math.isfinite(self.amplitude):
            raise ParameterError("amplitude", "amplitude must be finite")
        _non_negative("freq", self.freq)
        _non_negative("r_thev", self.r_thev)
        _non_negative("l_thev", self.l_thev)


@dataclass(frozen=True)
class Switch:
    """Ideal breaker pole; ``t_close=None`` means it never closes."""

    n1: int
    n2: int
    t_close: Optional[float] = None

    def __post_init__(self):
        _node("n1", self.n1)
        _node("n2", self.n2)
        if self.t_close is not None and not math.isfinite(self.t_close):
            raise ParameterError("t_close", "t_close must be finite or None")


@dataclass(frozen=True)
class BergeronLine:
    n_send: int
    n_recv: int
    z_c: float
    tau: float
    r_total: float = 0.0

    def __post_init__(self):
        _node("n_send", self.n_send)
        _node("n_recv", self.n_recv)
        _positive("z_c", self.z_c)
        _positive("tau", self.tau)
        _non_negative("r_total", self.r_total)
        if self.r_total / 4 >= self.z_c:
            raise ParameterError("r_total", "r_total/4 must be below z_c")


@dataclass(frozen=True)
class Transformer:
    """Single-phase two-winding unit; windings hv-hv_neutral and lv-lv_neutral."""

    hv: int
    lv: int
    model: "TransformerModel"
    hv_neutral: int = GROUND
    lv_neutral: int = GROUND

    def __post_init__(self):
        for name in ("hv", "lv", "hv_neutral", "lv_neutral"):
            _node(name, getattr(self, name))


Element = Union[Resistor, Inductor, Capacitor, SaturableInductor, VoltageSource,
                Switch, BergeronLine, Transformer]

# quantities a branch probe may ask for, per element type
PROBE_QUANTITIES = {
    Resistor: ("i", "v"),
    Inductor: ("i", "v", "flux"),
    Capacitor: ("i", "v"),
    SaturableInductor: ("i", "v", "flux"),
    VoltageSource: ("i",),
    Switch: ("i", "v"),
    BergeronLine: ("i_send", "i_recv"),
    Transformer: ("i", "i_mag", "flux"),
}


def terminals(element: Element) -> tuple:
    if isinstance(element, VoltageSource):
        return (element.n_pos, GROUND)
    if isinstance(element, BergeronLine):
        return (element.n_send, element.n_recv)
    if isinstance(element, Transformer):
        return (element.hv, element.hv_neutral, element.lv, element.lv_neutral)
    return (element.n1, element.n2)


@dataclass(frozen=True)
class Probe:
    name: str
    node: Optional[int] = None
    element: Optional[int] = None
    quantity: str = "v"


@dataclass
class Circuit:
    """Netlist under construction. Run it with :func:`transient_bench.solver.run`."""

    nodes: int = 1
    elements: list = field(default_factory=list)
    probes: list = field(default_factory=list)
    phase_count: int = 1
    node_names: dict = field(default_factory=dict)

    def add_node(self, name: Optional[str] = None) -> int:
        index = self.nodes
        self.nodes += 1
        if name is not None:
            if name in self.node_names:
                raise ParameterError("name", f"node name {name!r} already used")
            self.node_names[name] = index
        return index

    def add_element(self, element: Element) -> int:
        for n in terminals(element):
            if n >= self.nodes:
                self.nodes = n + 1
        self.elements.append(element)
        return len(self.elements) - 1

    def add_probe(self, name: str, node: Optional[int] = None, element: Optional[int] = None,
                  quantity: str = "v") -> None:
        if any(p.name == name for p in self.probes):
            raise ParameterError("name", f"probe name {name!r} already used")
        if (node is None) == (element is None):
            raise ParameterError("probe", "a probe targets exactly one node or one element")
        if element is not None and 0 <= element < len(self.elements):
            allowed = PROBE_QUANTITIES[type(self.elements[element])]
            if quantity not in allowed:
                raise ParameterError("quantity", f"{type(self.elements[element]).__name__} "
                                     f"supports probes {allowed}, not {quantity!r}")
        self.probes.append(Probe(name, node, element, quantity))


def validate(circuit: Circuit) -> list:
    """Return a list of human-readable structural issues; empty means valid."""
    issues = []
    if not circuit.elements:
        issues.append("no elements")

    parent = list(range(circuit.nodes))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        parent[find(a)] = find(b)

    used = {GROUND}
    for el in circuit.elements:
        nodes = terminals(el)
        used.update(nodes)
        if isinstance(el, BergeronLine):
            # each end is a surge impedance to ground in the nodal model
            union(el.n_send, GROUND)
            union(el.n_recv, GROUND)
        elif isinstance(el, Transformer):
            # windings are magnetically, not galvanically, coupled
            union(el.hv, el.hv_neutral)
            union(el.lv, el.lv_neutral)
            if el.model.c_hl > 0:
                union(el.hv, el.lv)
        else:
            union(nodes[0], nodes[1])

    for n in range(1, circuit.nodes):
        if n in used and find(n) != find(GROUND):
            issues.append(f"node {n} is not connected to ground")

    for p in circuit.probes:
        if p.node is not None:
            if p.node >= circuit.nodes or p.node not in used:
                issues.append(f"dangling probe {p.name!r}: node {p.node} has no element")
        elif not 0 <= p.element < len(circuit.elements):
            issues.append(f"dangling probe {p.name!r}: no element {p.element}")
    return issues
