"""Beam split patterns, support detection windows, and capture-ratio analysis.

A pattern traces, per subcarrier, the grid row where a path pinned to grid
direction n concentrates its power once the per-subcarrier frequency ratio
drags the direction across the grid. Expanding every pattern entry by
+/- delta rows (with modular wrap) yields the support detection window used
by the estimator.
"""

import threading
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .sysmodel import AngleGrid, SystemConfig, angle_grid, nearest_grid_index, subcarrier_frequencies
from .channel import dirichlet_kernel


@dataclass(frozen=True)
class BeamSplitPattern:
    """Per-subcarrier nearest-grid rows for a path at grid index center_index."""

    center_index: int
    rows: np.ndarray  # (M,) 1-based grid rows

    @property
    def entries(self):
        """The pattern as (row, subcarrier) pairs, both 1-based."""
        return tuple((int(r), m + 1) for m, r in enumerate(self.rows))


@dataclass(frozen=True)
class SupportWindow:
    """A pattern dilated by +/- halfwidth rows per subcarrier, wrapped modulo N."""

    source_pattern: int
    halfwidth: int
    rows: np.ndarray  # (2*halfwidth+1, M) 1-based grid rows, distinct per column

    @property
    def flattened(self):
        """Set of (row, subcarrier) pairs covered by the window."""
        _, m = self.rows.shape
        return {(int(r), j + 1) for j in range(m) for r in self.rows[:, j]}


@dataclass(frozen=True)
class PatternSet:
    """All N patterns of one system configuration, row n-1 holding pattern n."""

    rows: np.ndarray  # (N, M) 1-based grid rows
    n_antennas: int
    n_subcarriers: int

    def pattern(self, n: int) -> BeamSplitPattern:
        if not 1 <= n <= self.n_antennas:
            raise ParameterError(f"grid index {n} outside 1..{self.n_antennas}")
        return BeamSplitPattern(n, self.rows[n - 1])


def beam_split_pattern(n: int, grid: AngleGrid, freqs, f_c: float) -> BeamSplitPattern:
    """Pattern for grid index n: per subcarrier the plain nearest-grid row of (f_m/f_c) * theta_bar(n).

    Ties in the nearest-grid match break toward the smaller index; rows
    clamp at the grid edges (no wrap).
    """
    if not 1 <= n <= grid.size:
        raise ParameterError(f"grid index {n} outside 1..{grid.size}")
    theta = (np.asarray(freqs, dtype=float) / f_c) * grid.theta(n)
    rows = nearest_grid_index(theta, grid.size)
    rows.setflags(write=False)
    return BeamSplitPattern(n, rows)


_PATTERN_CACHE: dict = {}
_PATTERN_LOCK = threading.Lock()


def patterns_for(cfg: SystemConfig) -> PatternSet:
    """All N patterns for a configuration, computed once and cached.

    The cache key is (N, M, f_c, B); the stored arrays are read-only so the
    set can be shared across worker threads.
    """
    key = (cfg.n_antennas, cfg.n_subcarriers, cfg.carrier_hz, cfg.bandwidth_hz)
    with _PATTERN_LOCK:
        cached = _PATTERN_CACHE.get(key)
        if cached is not None:
            return cached
        grid = angle_grid(cfg.n_antennas)
        ratio = subcarrier_frequencies(cfg) / cfg.carrier_hz
        theta = grid.values[:, None] * ratio[None, :]
        rows = nearest_grid_index(theta, cfg.n_antennas)
        rows.setflags(write=False)
        pset = PatternSet(rows, cfg.n_antennas, cfg.n_subcarriers)
        _PATTERN_CACHE[key] = pset
        return pset


def wrap_rows(rows, n_antennas: int):
    """Modular index wrap keeping values in 1..N."""
    return ((np.asarray(rows) - 1) % n_antennas) + 1


def expand_window(pattern: BeamSplitPattern, halfwidth: int, n_antennas: int) -> SupportWindow:
    """Dilate a pattern by +/- halfwidth rows per subcarrier with modular wrap.

    Requires 2*halfwidth + 1 <= N so the per-subcarrier row sets stay
    distinct.
    """
    if 2 * halfwidth + 1 > n_antennas:
        raise ParameterError("window 2*halfwidth+1 exceeds the grid size")
    if halfwidth < 0:
        raise ParameterError("halfwidth must be non-negative")
    shifts = np.arange(-halfwidth, halfwidth + 1)[:, None]
    rows = wrap_rows(pattern.rows[None, :] + shifts, n_antennas)
    rows.setflags(write=False)
    return SupportWindow(pattern.center_index, halfwidth, rows)


def window_rows_for_pattern(pattern_rows, halfwidth: int, n_antennas: int) -> np.ndarray:
    """(2*halfwidth+1, M) window rows from a raw per-subcarrier row vector."""
    if 2 * halfwidth + 1 > n_antennas:
        raise ParameterError("window 2*halfwidth+1 exceeds the grid size")
    shifts = np.arange(-halfwidth, halfwidth + 1)[:, None]
    return wrap_rows(np.asarray(pattern_rows)[None, :] + shifts, n_antennas)


def _simpson(fn, a: float, b: float, intervals: int) -> float:
    # composite Simpson rule; intervals must be even
    x = np.linspace(a, b, intervals + 1)
    y = fn(x)
    h = (b - a) / intervals
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def capture_ratio_analytic(halfwidth: int, n_antennas: int, intervals: int = 4096) -> float:
    """Expected fraction of a split path's power captured by a +/- halfwidth window.

    Evaluates (1/2N) * sum_{b=-delta..delta} of the squared Dirichlet kernel
    integrated over one grid cell offset by 2b/N, by composite Simpson
    quadrature with at least 2048 points per sub-interval. Equals 1 when the
    window covers all N shifts (full-period power identity).
    """
    if 2 * halfwidth + 1 > n_antennas:
        raise ParameterError("window 2*halfwidth+1 exceeds the grid size")
    if halfwidth < 0:
        raise ParameterError("halfwidth must be non-negative")
    intervals = max(int(intervals), 2048)
    if intervals % 2:
        intervals += 1
    edge = 1.0 / n_antennas
    total = 0.0
    for b in range(-halfwidth, halfwidth + 1):
        shift = 2.0 * b / n_antennas
        total += _simpson(lambda t: dirichlet_kernel(t - shift, n_antennas) ** 2,
                          -edge, edge, intervals)
    return float(total / (2.0 * n_antennas))


def captured_power_fraction(q: np.ndarray, window: SupportWindow) -> float:
    """Fraction of the Frobenius power of q lying inside the window."""
    rows = window.rows
    if q.shape[1] != rows.shape[1]:
        raise ParameterError(
            f"window covers {rows.shape[1]} subcarriers, matrix has {q.shape[1]}")
    if np.any(rows > q.shape[0]):
        raise ParameterError("window rows exceed the matrix height")
    picked = q[rows - 1, np.arange(q.shape[1])[None, :]]
    return float(np.sum(np.abs(picked) ** 2) / np.sum(np.abs(q) ** 2))


def subcoherence(a_eff: np.ndarray) -> float:
    """Largest absolute inner product between distinct columns of the sensing matrix."""
    if a_eff.ndim != 2 or a_eff.shape[1] < 2:
        raise ParameterError("subcoherence needs a matrix with at least 2 columns")
    gram = a_eff.conj().T @ a_eff
    np.fill_diagonal(gram, 0.0)
    return float(np.max(np.abs(gram)))
