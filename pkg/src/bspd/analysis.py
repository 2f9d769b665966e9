"""Error metrics, detection-probability bounds, and the block channel decomposition.

The detection bound machinery follows the printed inequality chain: a path
pinned on-grid at row n is detected whenever the pattern-aligned channel
mass exceeds the coherence cross-terms by the noise threshold
sqrt(2 M sigma^2 alpha), and the event probability is lower-bounded by
(1 - 0.8 alpha^{-1/2} e^{-alpha/2})^M.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ParameterError
from .sysmodel import angle_grid
from .channel import assemble_channel, sample_paths, DEFAULT_TAU_MAX
from .sensing import make_combiners, observe, snr_to_sigma2
from .bsp import PatternSet, patterns_for, subcoherence
from .estimators import detect_direction_index
from .seeding import trial_streams, channel_stream

NMSE_FLOOR_DB = -300.0


def nmse_linear(h_hat: np.ndarray, h_true: np.ndarray) -> float:
    """Squared-error ratio ||h_hat - h_true||_F^2 / ||h_true||_F^2."""
    if h_hat.shape != h_true.shape:
        raise ParameterError(f"shape mismatch {h_hat.shape} vs {h_true.shape}")
    denom = np.sum(np.abs(h_true) ** 2)
    if denom == 0:
        raise ParameterError("true channel has zero norm")
    return float(np.sum(np.abs(h_hat - h_true) ** 2) / denom)


def to_db(ratio: float) -> float:
    """dB conversion with the floor guarding the exact-recovery case."""
    if ratio <= 10.0 ** (NMSE_FLOOR_DB / 10.0):
        return NMSE_FLOOR_DB
    return float(10.0 * np.log10(ratio))


def nmse(h_hat: np.ndarray, h_true: np.ndarray) -> float:
    """Normalized mean square error in dB, floored at -300 dB."""
    return to_db(nmse_linear(h_hat, h_true))


def captured_fraction_of_windows(h: np.ndarray, windows) -> float:
    """Fraction of the channel's power inside the per-subcarrier union of windows.

    windows is a sequence of (k, M) 1-based row arrays; rows claimed by
    several windows count once.
    """
    total = np.sum(np.abs(h) ** 2)
    if total == 0:
        raise ParameterError("channel has zero norm")
    captured = 0.0
    for j in range(h.shape[1]):
        rows = np.unique(np.concatenate([np.asarray(w)[:, j] for w in windows]))
        captured += np.sum(np.abs(h[rows - 1, j]) ** 2)
    return float(captured / total)


def gaussian_tail_bound(r: float) -> float:
    """Tail bound P{|d|^2 >= r^2} <= 0.8 r^{-1} e^{-r^2/2} for a unit Gaussian d, clamped to 1."""
    if r <= 0:
        raise ParameterError("r must be positive")
    return float(min(1.0, 0.8 / r * math.exp(-r * r / 2.0)))


def detection_probability_bound(alpha: float, n_subcarriers: int) -> float:
    """Detection probability lower bound (1 - 0.8 alpha^{-1/2} e^{-alpha/2})^M, clamped to [0, 1]."""
    if alpha <= 0:
        raise ParameterError("alpha must be positive")
    if math.isinf(alpha):
        return 1.0
    inner = max(0.0, 1.0 - 0.8 / math.sqrt(alpha) * math.exp(-alpha / 2.0))
    return float(min(1.0, inner ** n_subcarriers))


@dataclass(frozen=True)
class BlockDecomposition:
    """Channel rows regrouped by pattern row-set; only hosted blocks are nonzero.

    row_sets[n-1] holds the sorted distinct rows of pattern n. For a hosted
    grid index n the block is the corresponding row slice of the
    angle-domain channel; all other blocks are zero. The placement
    reconstruction is exact only when the channel is supported on the
    hosted row sets and those sets are disjoint.
    """

    row_sets: tuple  # N sorted 1-based row arrays
    hosted: tuple  # hosted grid indices
    blocks: dict  # hosted index -> (|row_set|, M) complex block
    n_antennas: int
    n_subcarriers: int

    def block(self, n: int) -> np.ndarray:
        rows = self.row_sets[n - 1]
        if n in self.blocks:
            return self.blocks[n]
        return np.zeros((rows.size, self.n_subcarriers), dtype=complex)

    def reconstruct(self) -> np.ndarray:
        """Place every block back at its row set (V @ B)."""
        out = np.zeros((self.n_antennas, self.n_subcarriers), dtype=complex)
        for n in self.hosted:
            out[self.row_sets[n - 1] - 1, :] += self.blocks[n]
        return out


def block_decompose(h_angle: np.ndarray, patterns: PatternSet, hosted) -> BlockDecomposition:
    """Split the angle-domain channel into pattern-aligned blocks."""
    hosted = tuple(int(n) for n in hosted)
    if len(set(hosted)) != len(hosted):
        raise ParameterError("hosted grid indices must be distinct")
    for n in hosted:
        if not 1 <= n <= patterns.n_antennas:
            raise ParameterError(f"hosted index {n} outside 1..{patterns.n_antennas}")
    row_sets = tuple(np.unique(patterns.rows[n - 1]) for n in range(1, patterns.n_antennas + 1))
    blocks = {n: h_angle[row_sets[n - 1] - 1, :].copy() for n in hosted}
    return BlockDecomposition(row_sets, hosted, blocks,
                              patterns.n_antennas, patterns.n_subcarriers)


def hosted_grid_indices(ch, tol: float = 1e-12) -> tuple:
    """Grid indices of the channel's paths; raises if any direction is off-grid."""
    grid = angle_grid(ch.cfg.n_antennas)
    out = []
    for p in ch.paths:
        n = int(np.argmin(np.abs(grid.values - p.direction_sine))) + 1
        if abs(grid.values[n - 1] - p.direction_sine) > tol:
            raise ParameterError(
                f"path direction {p.direction_sine} is off-grid (nearest sample {grid.values[n - 1]})")
        out.append(n)
    return tuple(out)


def _condition_lhs(blocks: BlockDecomposition, patterns: PatternSet, mu: float, n_l: int) -> float:
    if n_l not in blocks.hosted:
        raise ParameterError(f"grid index {n_l} does not host a path")
    rows_l = patterns.rows[n_l - 1]
    ups_l = blocks.row_sets[n_l - 1]
    positions = np.searchsorted(ups_l, rows_l)
    b_l = blocks.block(n_l)
    lead = float(np.sum(np.abs(b_l[positions, np.arange(patterns.n_subcarriers)])))
    self_term = mu * math.sqrt(ups_l.size) * float(np.linalg.norm(b_l))
    cross = 0.0
    for n_i in blocks.hosted:
        if n_i == n_l:
            continue
        cross += math.sqrt(blocks.row_sets[n_i - 1].size) * float(np.linalg.norm(blocks.block(n_i)))
    return lead - self_term - 2.0 * mu * cross


def detection_margin_condition(blocks: BlockDecomposition, patterns: PatternSet, mu: float,
                     sigma2: float, alpha: float, n_l: int) -> bool:
    """Whether the pattern-aligned mass clears the sqrt(2 M sigma^2 alpha) threshold.

    Magnitudes are taken inside the leading sum; the cross-terms are the
    coherence-weighted norms of every other hosted block.
    """
    if alpha <= 0:
        raise ParameterError("alpha must be positive")
    lhs = _condition_lhs(blocks, patterns, mu, n_l)
    return bool(lhs >= math.sqrt(2.0 * patterns.n_subcarriers * sigma2 * alpha))


def largest_feasible_alpha(blocks: BlockDecomposition, patterns: PatternSet, mu: float,
                           sigma2: float, n_l: int, rel_tol: float = 1e-6) -> Optional[float]:
    """Largest alpha satisfying the detection condition, by bisection.

    Returns None when no positive alpha is feasible and infinity in the
    noiseless case (the threshold vanishes for every finite alpha).
    """
    lhs = _condition_lhs(blocks, patterns, mu, n_l)
    if lhs < 0:
        return None
    if sigma2 == 0:
        return math.inf
    lo = 0.0
    hi = 1.0
    while detection_margin_condition(blocks, patterns, mu, sigma2, hi, n_l):
        lo = hi
        hi *= 2.0
        if hi > 1e18:
            return hi
    while hi - lo > rel_tol * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if detection_margin_condition(blocks, patterns, mu, sigma2, mid, n_l):
            lo = mid
        else:
            hi = mid
    if lo == 0.0:
        return None
    return lo


def largest_consistent_alpha(blocks: BlockDecomposition, patterns: PatternSet, mu: float,
                             sigma2: float, n_l: int) -> Optional[float]:
    """Largest alpha under the per-subcarrier reading of the noise event.

    The detection margin sums M per-subcarrier terms, and the bounded-noise
    event grants each of the M noise projections a budget sqrt(sigma2*alpha)
    on both sides of the comparison, so the margin must clear
    2*M*sqrt(sigma2*alpha). This keeps both sides on the same scale in M and
    is the variant used for the reported probability bound; the
    aggregate-threshold form is available as largest_feasible_alpha.
    """
    lhs = _condition_lhs(blocks, patterns, mu, n_l)
    if lhs < 0:
        return None
    if sigma2 == 0:
        return math.inf
    per_subcarrier = lhs / (2.0 * patterns.n_subcarriers)
    alpha = per_subcarrier ** 2 / sigma2
    return alpha if alpha > 0 else None


@dataclass(frozen=True)
class BoundEvaluation:
    """One detection-bound evaluation at a chosen alpha."""

    alpha: float
    condition_met: bool
    probability_bound: float
    mu: float
    sigma2: float


def evaluate_detection_bound(blocks: BlockDecomposition, patterns: PatternSet, mu: float,
                             sigma2: float, n_l: int, alpha: Optional[float] = None,
                             consistent: bool = True) -> BoundEvaluation:
    """Bound at the given alpha, or at the largest admissible alpha when omitted.

    The default alpha selection uses the per-subcarrier noise budget (see
    largest_consistent_alpha); pass consistent=False for the
    aggregate-threshold selection.
    """
    if alpha is None:
        if consistent:
            alpha = largest_consistent_alpha(blocks, patterns, mu, sigma2, n_l)
        else:
            alpha = largest_feasible_alpha(blocks, patterns, mu, sigma2, n_l)
        if alpha is None:
            return BoundEvaluation(0.0, False, 0.0, mu, sigma2)
        met = True
    else:
        met = True if math.isinf(alpha) else detection_margin_condition(blocks, patterns, mu,
                                                              sigma2, alpha, n_l)
    bound = detection_probability_bound(alpha, patterns.n_subcarriers) if (met and alpha > 0) else 0.0
    return BoundEvaluation(float(alpha), met, bound, mu, sigma2)


@dataclass(frozen=True)
class DirectionProbePoint:
    """Empirical detection success at one SNR plus the most conservative trial bound."""

    snr_db: float
    trials: int
    success_fraction: float
    bound: float
    condition_met: bool


def direction_probability_point(cfg, snr_db: float, trials: int, base_seed: int,
                                grid_indices, tau_max: float = DEFAULT_TAU_MAX,
                                with_bound: bool = True) -> DirectionProbePoint:
    """Monte Carlo detection probability for fixed on-grid directions.

    The channel (gains and delays) is realized once from the seed's channel
    stream; every trial draws fresh combiners and noise. Success means the
    first detected index equals the strongest path's grid index. The
    reported bound is the minimum over trials of the per-trial bound at the
    largest admissible alpha under the per-subcarrier noise budget (each
    trial has its own combiner coherence).
    """
    if trials < 1:
        raise ParameterError("trials must be >= 1")
    grid_indices = tuple(int(n) for n in grid_indices)
    if len(grid_indices) != cfg.n_paths:
        raise ParameterError("need one grid index per path")
    grid = angle_grid(cfg.n_antennas)
    sines = np.array([grid.theta(n) for n in grid_indices])

    ch_rng = np.random.default_rng(channel_stream(base_seed))
    paths = sample_paths(ch_rng, cfg, tau_max, direction_sines=sines)
    ch = assemble_channel(paths, cfg)
    target = grid_indices[int(np.argmax([abs(p.gain) for p in ch.paths]))]

    patterns = patterns_for(cfg)
    blocks = block_decompose(ch.h_angle, patterns, grid_indices) if with_bound else None
    sigma2 = snr_to_sigma2(snr_db)

    successes = 0
    worst_bound = 1.0
    condition_met = True
    for t in range(trials):
        rng_sample, rng_noise = trial_streams(base_seed, t)
        comb = make_combiners(rng_sample, cfg)
        obs = observe(ch, comb, sigma2, rng_noise)
        n1 = detect_direction_index(obs.y, comb.effective, patterns)
        successes += int(n1 == target)
        if with_bound:
            ev = evaluate_detection_bound(blocks, patterns, subcoherence(comb.effective),
                                          sigma2, target)
            worst_bound = min(worst_bound, ev.probability_bound)
            condition_met = condition_met and ev.condition_met
    if not with_bound:
        worst_bound = 0.0
        condition_met = False
    return DirectionProbePoint(float(snr_db), trials, successes / trials,
                               worst_bound, condition_met)


def direction_success_probability(cfg, snr_db: float, trials: int, base_seed: int,
                                  grid_indices, tau_max: float = DEFAULT_TAU_MAX) -> float:
    """Fraction of trials whose first detected index matches the strongest path."""
    point = direction_probability_point(cfg, snr_db, trials, base_seed, grid_indices,
                                        tau_max, with_bound=False)
    return point.success_fraction
