"""Command-line front end: ``transient-bench simulate | analyze | plot``.

Exit codes: 0 success, 2 usage or configuration error, 3 numeric fault.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, plot, scenarios
from ._backend import resolve as resolve_backend
from .errors import ConfigError, NumericFault, ParameterError, TimestepError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

THREADS_ENV = "TRANSIENT_BENCH_THREADS"
CSV_NAME = "waveforms.csv"
MANIFEST_NAME = "manifest.json"
CSV_FMT = "%.14e"


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunManifest:
    scenario: str
    digest: str
    dt_s: float
    t_end_s: float
    probes: tuple
    outputs: tuple
    wall_clock_s: float
    backend: str

    def to_json(self) -> str:
        doc = {
            "scenario": self.scenario,
            "digest": self.digest,
            "dt_s": self.dt_s,
            "t_end_s": self.t_end_s,
            "probes": list(self.probes),
            "outputs": list(self.outputs),
            "wall_clock_s": self.wall_clock_s,
            "backend": self.backend,
        }
        return json.dumps(doc, indent=2) + "\n"


# -- csv ----------------------------------------------------------------------

def write_csv(path, waves) -> None:
    table = np.vstack([waves.time, waves.data]).T
    header = ",".join(("time_s",) + tuple(waves.names))
    with open(path, "w", newline="\n") as fh:
        np.savetxt(fh, table, fmt=CSV_FMT, delimiter=",", header=header, comments="",
                   newline="\n")


def read_csv(path):
    """Return ``(time, {name: samples})`` from a waveform CSV."""
    try:
        with open(path, newline="") as fh:
            header = fh.readline().strip()
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}") from None
    except ValueError as exc:
        raise CliError(f"{path}: malformed waveform table ({exc})") from None
    names = header.split(",")
    if not names or names[0] != "time_s":
        raise CliError(f"{path}: first column must be time_s")
    if data.shape[0] == 0:
        raise CliError(f"{path}: no samples")
    if data.shape[1] != len(names):
        raise CliError(f"{path}: header has {len(names)} columns, rows have {data.shape[1]}")
    return data[:, 0], {n: data[:, k] for k, n in enumerate(names) if k}


def parse_range(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise CliError(f"range {text!r} must look like start:end (seconds)")
    try:
        lo = float(parts[0]) if parts[0].strip() else None
        hi = float(parts[1]) if parts[1].strip() else None
    except ValueError:
        raise CliError(f"range {text!r} must contain numbers") from None
    if lo is not None and hi is not None and hi <= lo:
        raise CliError(f"range {text!r} is empty")
    return lo, hi


# -- simulate -----------------------------------------------------------------

def _read_text(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise CliError(f"cannot read scenario {path}: {exc.strerror or exc}") from None


def expand_batch(paths) -> list:
    """Scenario paths, with batch documents (``batch: [paths]``) expanded in place."""
    out = []
    for p in paths:
        path = Path(p)
        doc = scenarios.load_document(_read_text(path))
        if isinstance(doc, dict) and set(doc) == {"batch"}:
            items = doc["batch"]
            if not isinstance(items, list) or not all(isinstance(i, str) for i in items):
                raise ConfigError("batch", "must be a list of scenario paths")
            out.extend(path.parent / i for i in items)
        else:
            out.append(path)
    return out


def _run_one(path: Path, cfg, out_dir: Path, backend: str) -> RunManifest:
    start = time.perf_counter()
    waves = scenarios.simulate(cfg, backend=backend)
    elapsed = time.perf_counter() - start
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / CSV_NAME
    man_path = out_dir / MANIFEST_NAME
    write_csv(csv_path, waves)
    manifest = RunManifest(str(path), scenarios.digest(cfg), cfg.sim.dt_s, cfg.sim.t_end_s,
                           tuple(waves.names), (str(csv_path), str(man_path)),
                           round(elapsed, 6), backend)
    man_path.write_text(manifest.to_json())
    return manifest


def _output_dirs(paths, out_dir: Path) -> list:
    if len(paths) == 1:
        return [out_dir]
    seen = {}
    dirs = []
    for p in paths:
        stem = p.stem
        seen[stem] = seen.get(stem, 0) + 1
        dirs.append(out_dir / (stem if seen[stem] == 1 else f"{stem}_{seen[stem]}"))
    return dirs


def _thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise CliError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise CliError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def cmd_simulate(args) -> int:
    overrides = list(args.override or [])
    if args.dt is not None:
        overrides.append(f"sim.dt_s={args.dt!r}")
    if args.t_end is not None:
        overrides.append(f"sim.t_end_s={args.t_end!r}")
    backend = resolve_backend(args.backend)

    # everything is parsed and validated before any output is written
    paths = expand_batch(args.scenarios)
    configs = []
    for path in paths:
        try:
            configs.append(scenarios.parse_scenario(_read_text(path), overrides))
        except ConfigError as exc:
            raise ConfigError(exc.path, f"{exc.message} [{path}]") from None
    dirs = _output_dirs(paths, Path(args.out))
    workers = min(len(paths), _thread_cap())

    if workers == 1:
        manifests = [_run_one(p, c, d, backend) for p, c, d in zip(paths, configs, dirs)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_one, p, c, d, backend)
                       for p, c, d in zip(paths, configs, dirs)]
            manifests = [f.result() for f in futures]
    for m in manifests:
        print(f"{m.scenario}: {len(m.probes)} probes, dt={m.dt_s:g} s, t_end={m.t_end_s:g} s, "
              f"{m.wall_clock_s:.2f} s -> {m.outputs[0]}")
    return EXIT_OK


# -- analyze ------------------------------------------------------------------

def analyze_report(time_s, samples, u_base_ll_v: float, window=None,
                   exclude_below: float = 500.0) -> dict:
    dt = float(time_s[1] - time_s[0]) if len(time_s) > 1 else 1.0
    lo, hi = (None, None) if window is None else window
    lo, hi, clipped = plot.clip_range(time_s, lo, hi)
    sel = (time_s >= lo - 1e-9 * dt) & (time_s <= hi + 1e-9 * dt)
    x = samples[sel]
    t0 = float(time_s[sel][0])
    ov = analysis.peak_overvoltage(x, u_base_ll_v, dt=dt, t0=t0)
    peak = None
    if np.any(x != 0) and len(x) >= 16:
        peak = analysis.dominant_frequency(x, dt, exclude_below=exclude_below)
    return {
        "window_start_s": lo,
        "window_end_s": hi,
        "window_clipped": clipped,
        "peak_abs_v": ov.peak_abs,
        "time_of_peak_s": ov.time_of_peak,
        "base_peak_v": ov.base_peak,
        "per_unit": ov.per_unit,
        "dominant_freq_hz": None if peak is None else peak.frequency,
        "dominant_amplitude_v": None if peak is None else peak.amplitude,
        "bin_width_hz": None if peak is None else peak.bin_width,
    }


def format_report(probe: str, rep: dict) -> str:
    lines = [
        f"probe          {probe}",
        f"window         {rep['window_start_s']:.6g} .. {rep['window_end_s']:.6g} s",
        f"peak           {rep['peak_abs_v'] / 1e3:.4f} kV at {rep['time_of_peak_s'] * 1e3:.4f} ms",
        f"per unit       {rep['per_unit']:.4f} p.u. (base {rep['base_peak_v'] / 1e3:.3f} kVp)",
    ]
    if rep["dominant_freq_hz"] is None:
        lines.append("dominant freq  no peak")
    else:
        lines.append(f"dominant freq  {rep['dominant_freq_hz']:.1f} Hz "
                     f"(amplitude {rep['dominant_amplitude_v'] / 1e3:.4f} kV, "
                     f"bin {rep['bin_width_hz']:.1f} Hz)")
    lines.append("")
    lines.append(f"probe={probe}")
    for key, value in rep.items():
        if value is None:
            text = "none"
        elif isinstance(value, bool):
            text = str(value).lower()
        else:
            text = repr(float(value))
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"


def cmd_analyze(args) -> int:
    time_s, cols = read_csv(args.csv)
    if args.probe not in cols:
        raise CliError(f"unknown probe {args.probe!r}; available: {', '.join(cols)}")
    if not args.base_kv > 0:
        raise CliError("--base-kv must be > 0")
    window = parse_range(args.window) if args.window else None
    try:
        rep = analyze_report(time_s, cols[args.probe], args.base_kv * 1e3, window,
                             args.exclude_below)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if rep["window_clipped"]:
        print("warning: analysis window clipped to the data span", file=sys.stderr)
    sys.stdout.write(format_report(args.probe, rep))
    return EXIT_OK


# -- plot ---------------------------------------------------------------------

def cmd_plot(args) -> int:
    names = [n.strip() for n in args.probes.split(",") if n.strip()]
    if not names:
        raise CliError("no probes selected")
    time_s, cols = read_csv(args.csv)
    missing = [n for n in names if n not in cols]
    if missing:
        raise CliError(f"unknown probe(s) {', '.join(missing)}; available: {', '.join(cols)}")
    try:
        lo, hi, clipped = plot.clip_range(time_s, *(parse_range(args.range) if args.range
                                                    else (None, None)))
        zoom = None
        if args.zoom:
            zlo, zhi, zclipped = plot.clip_range(time_s, *parse_range(args.zoom))
            zoom = (zlo, zhi)
            clipped = clipped or zclipped
    except ValueError as exc:
        raise CliError(str(exc)) from None
    if clipped:
        print("warning: requested time range clipped to the data span", file=sys.stderr)
    svg = plot.render_svg(time_s, {n: cols[n] for n in names}, (lo, hi), zoom,
                          title=args.title or Path(args.csv).name)
    Path(args.out).write_text(svg, newline="\n")
    print(f"wrote {args.out}")
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="transient-bench",
                                description="Switching-transient desk simulations.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run scenario files and export waveforms")
    s.add_argument("scenarios", nargs="+", help="scenario or batch files (YAML)")
    s.add_argument("-o", "--out", required=True, help="output directory")
    s.add_argument("--override", action="append", metavar="KEY=VALUE",
                   help="dotted config override, e.g. transformer.tap=21 (repeatable)")
    s.add_argument("--dt", type=float, help="time step in seconds")
    s.add_argument("--t-end", type=float, help="end time in seconds")
    s.add_argument("--backend", choices=("numba", "numpy"),
                   help="kernel backend (default from TRANSIENT_BENCH_BACKEND)")
    s.set_defaults(func=cmd_simulate)

    a = sub.add_parser("analyze", help="peak and dominant frequency of one probe")
    a.add_argument("csv")
    a.add_argument("--probe", required=True)
    a.add_argument("--base-kv", type=float, required=True,
                   help="rated line-line rms voltage of the per-unit base, kV")
    a.add_argument("--window", help="start:end in seconds")
    a.add_argument("--exclude-below", type=float, default=500.0,
                   help="ignore spectral lines below this frequency (Hz)")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("plot", help="SVG chart of selected probes")
    g.add_argument("csv")
    g.add_argument("--probes", required=True, help="comma-separated probe names")
    g.add_argument("--range", help="main panel window start:end in seconds")
    g.add_argument("--zoom", help="extra zoom panel window start:end in seconds")
    g.add_argument("--title")
    g.add_argument("-o", "--out", required=True, help="output SVG path")
    g.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, TimestepError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFault as exc:
        print(f"numeric fault at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
