"""Nameplate to per-phase two-winding transient model.

All model quantities are per phase, referred to the LV winding, for a
star-equivalent connection: the impedance base is ``U_lv**2 / S``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import ParameterError


@dataclass(frozen=True)
class TransformerNameplate:
    s_rated: float          # VA
    u_hv: float             # V rms line-line at the neutral tap
    u_lv: float
    u_hv_tap1: float
    u_hv_tap_max: float
    tap_count: int
    z_leak_pct: float       # at the neutral tap
    i_mag_pct: float
    p_noload: float         # W
    p_shortcircuit: float   # W
    f_rated: float = 50.0
    z_leak_pct_tap1: Optional[float] = None
    z_leak_pct_tap_max: Optional[float] = None

    def __post_init__(self):
        for name in ("s_rated", "u_hv", "u_lv", "u_hv_tap1", "u_hv_tap_max",
                     "i_mag_pct", "p_noload", "p_shortcircuit", "f_rated"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ParameterError(name, f"{name} must be > 0 (got {value!r})")
        if not isinstance(self.tap_count, int) or self.tap_count < 1:
            raise ParameterError("tap_count", "tap_count must be a positive integer")
        for name in ("z_leak_pct", "z_leak_pct_tap1", "z_leak_pct_tap_max"):
            value = getattr(self, name)
            if value is not None and not 0 < value < 100:
                raise ParameterError(name, f"{name} must lie in (0, 100)")

    @property
    def neutral_tap(self) -> int:
        return (self.tap_count + 1) // 2


# ZVD unit (tertiary winding omitted) and DDW unit of the studied substations.
ZVD = TransformerNameplate(
    s_rated=100e6, u_hv=150e3, u_lv=52.5e3, u_hv_tap1=172.5e3, u_hv_tap_max=127.5e3,
    tap_count=21, z_leak_pct=14.19, z_leak_pct_tap1=15.19, z_leak_pct_tap_max=13.43,
    i_mag_pct=0.3, p_noload=38.2e3, p_shortcircuit=267.4e3, f_rated=50.0,
)
DDW = TransformerNameplate(
    s_rated=80e6, u_hv=150e3, u_lv=52.5e3, u_hv_tap1=172.5e3, u_hv_tap_max=127.5e3,
    tap_count=21, z_leak_pct=13.8, i_mag_pct=0.3, p_noload=71e3, p_shortcircuit=287e3,
    f_rated=50.0,
)


@dataclass(frozen=True)
class TransformerModel:
    ratio: float
    l_leak_lv: float
    r_series_lv: float
    l_mag_lv: float
    r_mag_lv: float
    c_hl: float = 0.0
    c_surge: float = 0.0
    saturable: bool = False
    flux_knee: float = 0.0
    l_sat: float = 0.0

    @property
    def capacitive_ratio(self) -> float:
        total = self.c_hl + self.c_surge
        return self.c_hl / total if total > 0 else 0.0


def _check_tap(nameplate: TransformerNameplate, tap: int) -> None:
    if not isinstance(tap, int) or not 1 <= tap <= nameplate.tap_count:
        raise ParameterError("tap", f"tap out of range: {tap!r} not in 1..{nameplate.tap_count}")


def hv_tap_voltage(nameplate: TransformerNameplate, tap: int) -> float:
    _check_tap(nameplate, tap)
    if nameplate.tap_count == 1:
        return nameplate.u_hv
    frac = (tap - 1) / (nameplate.tap_count - 1)
    return nameplate.u_hv_tap1 + frac * (nameplate.u_hv_tap_max - nameplate.u_hv_tap1)


def tap_ratio(nameplate: TransformerNameplate, tap: int) -> float:
    return hv_tap_voltage(nameplate, tap) / nameplate.u_lv


def leakage_pct(nameplate: TransformerNameplate, tap: int) -> float:
    """Leakage impedance in %, piecewise linear through the tabulated taps."""
    _check_tap(nameplate, tap)
    mid = nameplate.neutral_tap
    z = nameplate.z_leak_pct
    if tap < mid and nameplate.z_leak_pct_tap1 is not None:
        return nameplate.z_leak_pct_tap1 + (tap - 1) / (mid - 1) * (z - nameplate.z_leak_pct_tap1)
    if tap > mid and nameplate.z_leak_pct_tap_max is not None:
        frac = (tap - mid) / (nameplate.tap_count - mid)
        return z + frac * (nameplate.z_leak_pct_tap_max - z)
    return z


def _side_voltage(nameplate: TransformerNameplate, tap: int, side: str) -> float:
    if side == "lv":
        return nameplate.u_lv
    if side == "hv":
        return hv_tap_voltage(nameplate, tap)
    raise ParameterError("side", f"side must be 'hv' or 'lv', not {side!r}")


def leakage_inductance(nameplate: TransformerNameplate, tap: int, side: str = "lv") -> float:
    """Per-phase leakage inductance in henry seen from ``side``."""
    u = _side_voltage(nameplate, tap, side)
    omega = 2 * math.pi * nameplate.f_rated
    return leakage_pct(nameplate, tap) / 100 * u * u / (nameplate.s_rated * omega)


def leakage_pct_from_inductance(l: float, s_rated: float, u_side: float, f_rated: float) -> float:
    return l * s_rated * 2 * math.pi * f_rated / (u_side * u_side) * 100


def rated_peak_flux(nameplate: TransformerNameplate) -> float:
    """Peak flux linkage (Wb-turns) of the LV phase winding at rated voltage."""
    return math.sqrt(2.0 / 3.0) * nameplate.u_lv / (2 * math.pi * nameplate.f_rated)


def build_model(nameplate: TransformerNameplate, tap: int, saturable: bool = False,
                capacitive: bool = False, k_c: float = 0.2,
                c_lv_total: float = 4e-9) -> TransformerModel:
    """Reduce the nameplate to ratio + series R-L + shunt magnetizing branch.

    With ``capacitive`` the inter-winding capacitance ``c_hl`` and the LV
    surge capacitance split ``c_lv_total`` so that an HV step appears at the
    open LV terminal scaled by ``k_c``. With ``saturable`` the magnetizing
    inductance knees at rated peak flux and drops to five times the leakage.
    """
    ratio = tap_ratio(nameplate, tap)
    u = nameplate.u_lv
    s = nameplate.s_rated
    omega = 2 * math.pi * nameplate.f_rated
    z_base = u * u / s

    l_leak = leakage_inductance(nameplate, tap, "lv")
    r_series = nameplate.p_shortcircuit * z_base / s
    if r_series >= omega * l_leak:
        raise ParameterError("p_shortcircuit",
                             "short-circuit losses imply a series resistance above the leakage "
                             "reactance")
    l_mag = z_base / (nameplate.i_mag_pct / 100) / omega
    r_mag = u * u / nameplate.p_noload

    model = TransformerModel(ratio=ratio, l_leak_lv=l_leak, r_series_lv=r_series,
                             l_mag_lv=l_mag, r_mag_lv=r_mag)
    if saturable:
        model = replace(model, saturable=True, flux_knee=rated_peak_flux(nameplate),
                        l_sat=5 * l_leak)
    if capacitive:
        if not 0 < k_c < 1:
            raise ParameterError("k_c", "k_c must lie in (0, 1)")
        if not c_lv_total > 0:
            raise ParameterError("c_lv_total", "c_lv_total must be > 0")
        model = replace(model, c_hl=k_c * c_lv_total, c_surge=(1 - k_c) * c_lv_total)
    return model
