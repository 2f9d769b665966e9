"""Experiment configuration, Monte Carlo sweeps, and CSV/SVG emission."""

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, ParameterError
from .sysmodel import SystemConfig, angle_grid
from .channel import DEFAULT_TAU_MAX, assemble_channel, sample_paths
from .sensing import make_combiners, observe, snr_to_sigma2
from .bsp import capture_ratio_analytic, patterns_for
from .estimators import bspd_estimate, omp_block_estimate, oracle_ls_estimate, somp_estimate
from .analysis import direction_probability_point, nmse_linear, to_db
from .seeding import trial_streams

ALL_SCHEMES = ("bspd", "somp", "omp-block", "oracle")
EXPERIMENT_KINDS = ("snr-sweep", "pilot-sweep", "bandwidth-sweep",
                    "direction-prob", "capture-ratio", "validate")
CSV_HEADER = "experiment,scheme,sweep_name,sweep_value,snr_db,trials,metric_name,metric_value,base_seed"

DEFAULT_BASE_SEED = 1000003
DEFAULT_NMSE_TRIALS = 100
DEFAULT_DIRECTION_TRIALS = 200


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment: kind, system configuration, sweep grids, and run knobs."""

    experiment: str = "snr-sweep"
    config: SystemConfig = field(default_factory=SystemConfig)
    tau_max: float = DEFAULT_TAU_MAX
    trials: Optional[int] = None
    base_seed: int = DEFAULT_BASE_SEED
    schemes: tuple = ALL_SCHEMES
    snr_db: float = 20.0
    snr_sweep_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    pilot_sweep: tuple = (4, 8, 12, 16, 20)
    bandwidth_sweep_hz: tuple = (1e9, 5e9, 10e9, 15e9)
    direction_snr_sweep_db: tuple = (-30.0, -25.0, -20.0, -15.0, -10.0, -5.0, 0.0)
    direction_grid_indices: tuple = (193, 17, 90)
    on_grid: bool = False
    baseline_sparsity: Optional[int] = None
    omp_block_len: int = 16
    workers: int = 1
    out_path: Optional[str] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_KINDS:
            raise ParameterError(f"unknown experiment kind {self.experiment!r}")
        if self.trials is not None and self.trials < 1:
            raise ParameterError("trials must be >= 1")
        for s in self.schemes:
            if s not in ALL_SCHEMES:
                raise ParameterError(f"unknown scheme {s!r}")
        if not self.schemes:
            raise ParameterError("schemes must be non-empty")
        for name in ("snr_sweep_db", "pilot_sweep", "bandwidth_sweep_hz",
                     "direction_snr_sweep_db"):
            values = getattr(self, name)
            if len(values) == 0:
                raise ParameterError(f"{name} must be non-empty")
            if list(values) != sorted(values):
                raise ParameterError(f"{name} must be sorted ascending")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")

    @property
    def sweep_values(self) -> tuple:
        return {
            "snr-sweep": self.snr_sweep_db,
            "pilot-sweep": self.pilot_sweep,
            "bandwidth-sweep": self.bandwidth_sweep_hz,
            "direction-prob": self.direction_snr_sweep_db,
            "capture-ratio": tuple(range(self.config.window_halfwidth + 1)),
            "validate": (),
        }[self.experiment]

    def effective_trials(self) -> int:
        if self.trials is not None:
            return self.trials
        if self.experiment == "direction-prob":
            return DEFAULT_DIRECTION_TRIALS
        return DEFAULT_NMSE_TRIALS

    def effective_sparsity(self) -> int:
        if self.baseline_sparsity is not None:
            return self.baseline_sparsity
        return self.config.n_paths * (2 * self.config.window_halfwidth + 1)


@dataclass(frozen=True)
class ResultRow:
    """One CSV row of an experiment output."""

    experiment: str
    scheme: str
    sweep_name: str
    sweep_value: float
    snr_db: Optional[float]
    trials: int
    metric_name: str
    metric_value: float
    base_seed: int


_CONFIG_KEYS = {
    "n_antennas": int,
    "n_rf": int,
    "n_subcarriers": int,
    "n_users": int,
    "pilot_slots": int,
    "carrier_hz": float,
    "bandwidth_hz": float,
    "n_paths": int,
    "window_halfwidth": int,
    "tau_max_s": float,
    "trials": int,
    "base_seed": int,
    "snr_db": float,
    "schemes": "str_list",
    "snr_sweep_db": "float_list",
    "pilot_sweep": "int_list",
    "bandwidth_sweep_hz": "float_list",
    "direction_snr_sweep_db": "float_list",
    "direction_grid_indices": "int_list",
    "on_grid": "bool",
    "baseline_sparsity": int,
    "omp_block_len": int,
}

_SYSTEM_KEYS = ("n_antennas", "n_rf", "n_subcarriers", "n_users", "pilot_slots",
                "carrier_hz", "bandwidth_hz", "n_paths", "window_halfwidth")


def _parse_value(key: str, raw: str, lineno: int):
    kind = _CONFIG_KEYS[key]
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "1", "yes"):
                return True
            if low in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        items = [item.strip() for item in raw.split(",") if item.strip()]
        if kind == "str_list":
            return tuple(items)
        if kind == "int_list":
            return tuple(int(item) for item in items)
        return tuple(float(item) for item in items)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: bad value for {key!r}: {raw!r}") from exc


def load_config(path: Optional[str] = None, experiment: str = "snr-sweep") -> ExperimentSpec:
    """Build an ExperimentSpec from a flat key-value file.

    Every key is optional; an empty or missing file yields the full default
    configuration. Unknown keys and malformed values are rejected with the
    offending line number.
    """
    values: dict = {}
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                text = line.split("#", 1)[0].strip()
                if not text:
                    continue
                if "=" not in text:
                    raise ConfigError(f"line {lineno}: expected 'key = value', got {text!r}")
                key, raw = (part.strip() for part in text.split("=", 1))
                if key not in _CONFIG_KEYS:
                    raise ConfigError(f"line {lineno}: unknown key {key!r}")
                if key in values:
                    raise ConfigError(f"line {lineno}: duplicate key {key!r}")
                values[key] = _parse_value(key, raw, lineno)

    sys_kwargs = {k: values.pop(k) for k in list(values) if k in _SYSTEM_KEYS}
    try:
        cfg = SystemConfig(**sys_kwargs)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc
    spec_kwargs = {"experiment": experiment, "config": cfg}
    if "tau_max_s" in values:
        spec_kwargs["tau_max"] = values.pop("tau_max_s")
    spec_kwargs.update(values)
    try:
        return ExperimentSpec(**spec_kwargs)
    except ParameterError as exc:
        raise ConfigError(str(exc)) from exc


def _trial_nmse(cfg, spec: ExperimentSpec, sigma2: float, trial: int) -> dict:
    """One Monte Carlo trial: fresh channel, combiners, and noise; all schemes share them."""
    rng_sample, rng_noise = trial_streams(spec.base_seed, trial)
    sines = None
    if spec.on_grid:
        grid = angle_grid(cfg.n_antennas)
        if len(spec.direction_grid_indices) != cfg.n_paths:
            raise ParameterError("on-grid runs need one grid index per path")
        sines = np.array([grid.theta(n) for n in spec.direction_grid_indices])
    paths = sample_paths(rng_sample, cfg, spec.tau_max, direction_sines=sines)
    ch = assemble_channel(paths, cfg)
    comb = make_combiners(rng_sample, cfg)
    obs = observe(ch, comb, sigma2, rng_noise)

    patterns = patterns_for(cfg)
    sparsity = spec.effective_sparsity()
    out = {}
    for scheme in spec.schemes:
        if scheme == "bspd":
            rep = bspd_estimate(obs.y, comb.effective, cfg.n_paths,
                                cfg.window_halfwidth, patterns)
        elif scheme == "somp":
            rep = somp_estimate(obs.y, comb.effective, sparsity)
        elif scheme == "omp-block":
            rep = omp_block_estimate(obs.y, comb.effective, sparsity, spec.omp_block_len)
        else:
            rep = oracle_ls_estimate(obs.y, comb.effective, ch, cfg.window_halfwidth)
        out[scheme] = nmse_linear(rep.h_hat, ch.h_angle)
    return out


def _ordered_map(fn, items, workers: int):
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _nmse_point_rows(spec: ExperimentSpec, cfg, sweep_name: str, sweep_value: float,
                     snr_db: float) -> list:
    trials = spec.effective_trials()
    sigma2 = snr_to_sigma2(snr_db)
    patterns_for(cfg)  # build the shared pattern cache before the parallel map
    per_trial = _ordered_map(lambda t: _trial_nmse(cfg, spec, sigma2, t),
                             range(trials), spec.workers)
    rows = []
    for scheme in spec.schemes:
        mean_linear = float(np.mean([r[scheme] for r in per_trial]))
        rows.append(ResultRow(spec.experiment, scheme, sweep_name, float(sweep_value),
                              float(snr_db), trials, "nmse_db", to_db(mean_linear),
                              spec.base_seed))
    return rows


def run_snr_sweep(spec: ExperimentSpec) -> list:
    """Mean NMSE per scheme at each SNR of the sweep grid."""
    rows = []
    for snr in spec.snr_sweep_db:
        rows.extend(_nmse_point_rows(spec, spec.config, "snr_db", snr, snr))
    return rows


def run_pilot_sweep(spec: ExperimentSpec) -> list:
    """Mean NMSE per scheme against the pilot length at the fixed SNR."""
    rows = []
    for p in spec.pilot_sweep:
        cfg = dataclasses.replace(spec.config, pilot_slots=int(p))
        rows.extend(_nmse_point_rows(spec, cfg, "pilot_slots", p, spec.snr_db))
    return rows


def run_bandwidth_sweep(spec: ExperimentSpec) -> list:
    """Mean NMSE per scheme against the bandwidth at the fixed SNR."""
    rows = []
    for b in spec.bandwidth_sweep_hz:
        cfg = dataclasses.replace(spec.config, bandwidth_hz=float(b))
        rows.extend(_nmse_point_rows(spec, cfg, "bandwidth_hz", b, spec.snr_db))
    return rows


def run_direction_prob(spec: ExperimentSpec) -> list:
    """Empirical detection probability plus the analytic lower bound per SNR."""
    trials = spec.effective_trials()
    rows = []
    for snr in spec.direction_snr_sweep_db:
        point = direction_probability_point(spec.config, snr, trials, spec.base_seed,
                                            spec.direction_grid_indices, spec.tau_max)
        rows.append(ResultRow(spec.experiment, "bspd", "snr_db", float(snr), float(snr),
                              trials, "success_prob", point.success_fraction, spec.base_seed))
        rows.append(ResultRow(spec.experiment, "bound", "snr_db", float(snr), float(snr),
                              trials, "bound", point.bound if point.condition_met else 0.0,
                              spec.base_seed))
    return rows


def run_capture_ratio(spec: ExperimentSpec) -> list:
    """Analytic capture ratio for window halfwidths 0..delta."""
    rows = []
    for d in spec.sweep_values:
        gamma = capture_ratio_analytic(int(d), spec.config.n_antennas)
        rows.append(ResultRow(spec.experiment, "analytic", "delta", float(d), None,
                              1, "gamma", gamma, spec.base_seed))
    return rows


RUNNERS = {
    "snr-sweep": run_snr_sweep,
    "pilot-sweep": run_pilot_sweep,
    "bandwidth-sweep": run_bandwidth_sweep,
    "direction-prob": run_direction_prob,
    "capture-ratio": run_capture_ratio,
}


def rows_to_csv(rows) -> str:
    if not rows:
        raise ParameterError("no result rows to emit")
    lines = [CSV_HEADER]
    for r in rows:
        snr = "" if r.snr_db is None else repr(float(r.snr_db))
        lines.append(",".join([
            r.experiment, r.scheme, r.sweep_name, repr(float(r.sweep_value)), snr,
            str(r.trials), r.metric_name, repr(float(r.metric_value)), str(r.base_seed),
        ]))
    return "\n".join(lines) + "\n"


def emit_csv(rows, path: str) -> None:
    """Write rows to path with the fixed schema header."""
    text = rows_to_csv(rows)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise ParameterError(f"cannot write {path}: {exc}") from exc


def parse_csv(path: str) -> list:
    """Read rows previously written by emit_csv (exact float round-trip)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ParameterError(f"{path}: unexpected CSV header")
    rows = []
    for line in lines[1:]:
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 9:
            raise ParameterError(f"{path}: malformed row {line!r}")
        rows.append(ResultRow(parts[0], parts[1], parts[2], float(parts[3]),
                              None if parts[4] == "" else float(parts[4]),
                              int(parts[5]), parts[6], float(parts[7]), int(parts[8])))
    return rows


_SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def emit_svg(rows, path: str) -> None:
    """Line chart of metric_value against sweep_value, one polyline per scheme."""
    if not rows:
        raise ParameterError("no result rows to plot")
    width, height, margin = 880, 560, 70.0
    xs = [r.sweep_value for r in rows]
    ys = [r.metric_value for r in rows]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0

    def sx(x):
        return margin + (x - x_lo) / x_span * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y_lo) / y_span * (height - 2 * margin)

    schemes = []
    for r in rows:
        if r.scheme not in schemes:
            schemes.append(r.scheme)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x_lo + frac * x_span
        yv = y_lo + frac * y_span
        parts.append(f'<text x="{sx(xv):.1f}" y="{height - margin + 20:.1f}" '
                     f'font-size="12" text-anchor="middle">{xv:.4g}</text>')
        parts.append(f'<text x="{margin - 8:.1f}" y="{sy(yv) + 4:.1f}" '
                     f'font-size="12" text-anchor="end">{yv:.4g}</text>')
    sweep_name = rows[0].sweep_name
    metric_name = rows[0].metric_name
    parts.append(f'<text x="{width / 2:.1f}" y="{height - 18}" font-size="14" '
                 f'text-anchor="middle">{sweep_name}</text>')
    parts.append(f'<text x="20" y="{height / 2:.1f}" font-size="14" text-anchor="middle" '
                 f'transform="rotate(-90 20 {height / 2:.1f})">{metric_name}</text>')
    for i, scheme in enumerate(schemes):
        series = sorted(((r.sweep_value, r.metric_value) for r in rows if r.scheme == scheme))
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in series)
        color = _SERIES_COLORS[i % len(_SERIES_COLORS)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{width - margin + 6:.1f}" y="{margin + 16 * i:.1f}" '
                     f'font-size="12" fill="{color}">{scheme}</text>')
    parts.append("</svg>")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(parts) + "\n")
    except OSError as exc:
        raise ParameterError(f"cannot write {path}: {exc}") from exc
