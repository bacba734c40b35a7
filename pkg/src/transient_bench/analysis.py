"""Waveform metrics and closed-form reference responses."""

from __future__ import annotations

import math
from typing import NamedTuple, Optional

import numpy as np

from .errors import ParameterError


class SpectrumPeak(NamedTuple):
    frequency: float   # Hz
    amplitude: float   # sinusoid amplitude, unit of the input
    bin_width: float   # Hz


class OvervoltageReport(NamedTuple):
    peak_abs: float
    base_peak: float
    per_unit: float
    time_of_peak: float


class TravelMetrics(NamedTuple):
    tau: float          # one-way travel time
    round_trip: float   # 2 tau
    cycle: float        # 4 tau, period of the open-ended square pattern
    f: float            # 1 / cycle


def _positive(**kw):
    for name, value in kw.items():
        if not value > 0:
            raise ParameterError(name, f"{name} must be > 0 (got {value!r})")


def natural_frequency(l: float, c: float) -> float:
    _positive(l=l, c=c)
    return 1.0 / (2.0 * math.pi * math.sqrt(l * c))


def travel_metrics(length: float, velocity: float) -> TravelMetrics:
    _positive(length=length, velocity=velocity)
    tau = length / velocity
    return TravelMetrics(tau, 2 * tau, 4 * tau, 1.0 / (4 * tau))


def base_peak(u_rated_rms_ll: float) -> float:
    """Peak phase-to-ground voltage of a rated line-line rms voltage."""
    _positive(u_rated_rms_ll=u_rated_rms_ll)
    return math.sqrt(2.0 / 3.0) * u_rated_rms_ll


def _window(samples, dt, t0, t_start, t_end):
    x = np.asarray(samples, dtype=float)
    lo = 0 if t_start is None else max(0, int(math.ceil((t_start - t0) / dt - 1e-9)))
    hi = len(x) if t_end is None else min(len(x), int(math.floor((t_end - t0) / dt + 1e-9)) + 1)
    return x[lo:hi], lo


def dominant_frequency(samples, dt: float, t_start: Optional[float] = None,
                       t_end: Optional[float] = None, exclude_below: float = 500.0,
                       t0: float = 0.0, n_fft: Optional[int] = None) -> Optional[SpectrumPeak]:
    """Strongest spectral line above ``exclude_below`` in a time window.

    Hann-windowed, mean-removed DFT; the peak bin is refined by a parabola
    through the log magnitudes of it and its two neighbours. ``n_fft``
    zero-pads. Returns ``None`` when the window carries no signal.
    """
    _positive(dt=dt)
    x, _ = _window(samples, dt, t0, t_start, t_end)
    if len(x) == 0:
        raise ValueError("empty analysis window")
    if len(x) < 16:
        raise ValueError(f"analysis window holds {len(x)} samples, need at least 16")
    x = x - x.mean()
    w = np.hanning(len(x))
    n = max(len(x), n_fft or 0)
    mag = np.abs(np.fft.rfft(x * w, n))
    bin_width = 1.0 / (n * dt)
    freqs = np.arange(len(mag)) * bin_width
    allowed = freqs >= exclude_below
    if not allowed.any():
        return None
    # only local maxima whose whole interpolation stencil clears the floor
    # count; a leakage skirt rising toward the excluded band is not a line
    left = np.concatenate([[-np.inf], mag[:-1]])
    right = np.concatenate([mag[1:], [-np.inf]])
    left_ok = np.concatenate([[False], allowed[:-1]])
    candidates = allowed & left_ok & (mag >= left) & (mag >= right) & (mag > 0)
    if not candidates.any():
        return None
    k = int(np.argmax(np.where(candidates, mag, -np.inf)))
    if mag[k] <= 1e-12 * np.abs(x).max() * w.sum():
        return None
    delta = 0.0
    peak = mag[k]
    if 0 < k < len(mag) - 1 and mag[k - 1] > 0 and mag[k + 1] > 0:
        a, b, c = np.log(mag[k - 1]), np.log(mag[k]), np.log(mag[k + 1])
        denom = a - 2 * b + c
        if denom < 0:
            delta = min(max(0.5 * (a - c) / denom, -0.5), 0.5)
            peak = math.exp(b - 0.25 * (a - c) * delta)
    amplitude = 2.0 * peak / w.sum()
    return SpectrumPeak((k + delta) * bin_width, amplitude, bin_width)


def peak_overvoltage(samples, u_rated_rms_ll: float, dt: float = 1.0,
                     t0: float = 0.0) -> OvervoltageReport:
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("empty waveform")
    base = base_peak(u_rated_rms_ll)
    k = int(np.argmax(np.abs(x)))
    peak = float(abs(x[k]))
    return OvervoltageReport(peak, base, peak / base, t0 + k * dt)


def lattice_oracle(z_c: float, tau: float, r_source: float, v_step: float, t):
    """Open-ended line far-end voltage for a step applied through ``r_source`` at t=0.

    Bewley sum: the k-th wave arrives at ``(2k+1) tau`` with amplitude
    ``2 * launch * rho**k``.
    """
    _positive(z_c=z_c, tau=tau)
    if r_source < 0:
        raise ParameterError("r_source", "r_source must be >= 0")
    launch = v_step * z_c / (r_source + z_c)
    rho = (r_source - z_c) / (r_source + z_c)
    t = np.asarray(t, dtype=float)
    # arrivals up to and including t
    count = np.floor((t / tau - 1.0) / 2.0 + 1e-12) + 1
    count = np.maximum(count, 0)
    if rho == 0.0:
        out = np.where(count > 0, 2.0 * launch, 0.0)
    else:
        out = 2.0 * launch * (1.0 - rho ** count) / (1.0 - rho)
    return float(out) if out.ndim == 0 else out


def lc_step_oracle(v_step: float, l: float, c: float, r: float, t):
    """Capacitor voltage of a series R-L-C charged by a step at t=0."""
    _positive(l=l, c=c)
    if r < 0:
        raise ParameterError("r", "r must be >= 0")
    w0 = 1.0 / math.sqrt(l * c)
    alpha = r / (2.0 * l)
    if alpha >= w0:
        raise ParameterError("r", "circuit is not underdamped (r >= 2*sqrt(l/c))")
    wd = math.sqrt(w0 * w0 - alpha * alpha)
    t = np.asarray(t, dtype=float)
    out = v_step * (1.0 - np.exp(-alpha * t) * (np.cos(wd * t) + alpha / wd * np.sin(wd * t)))
    out = np.where(t < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def rl_exp_oracle(v_step: float, l: float, z: float, t):
    """Voltage across ``z`` for a step through series ``l``: ``v (1 - exp(-t z / l))``."""
    _positive(l=l, z=z)
    t = np.asarray(t, dtype=float)
    out = v_step * (1.0 - np.exp(-np.maximum(t, 0.0) * z / l))
    return float(out) if out.ndim == 0 else out
