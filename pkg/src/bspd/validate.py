"""Self-contained property suite behind the `validate` CLI subcommand.

Each check returns (name, passed, detail); the suite is deterministic and
sized to finish in well under a minute.
"""

import dataclasses

import numpy as np

from .sysmodel import SystemConfig, angle_grid, angle_transform
from .channel import assemble_channel, sample_paths
from .sensing import make_combiners, observe, snr_to_sigma2
from .bsp import expand_window, patterns_for
from .estimators import bspd_estimate, omp_block_estimate, oracle_ls_estimate, somp_estimate
from .analysis import gaussian_tail_bound, nmse
from .harness import ExperimentSpec, run_snr_sweep
from .seeding import trial_streams


def _check_unitarity():
    f = angle_transform(256)
    err = np.max(np.abs(f @ f.conj().T - np.eye(256)))
    return "angle transform unitarity (N=256)", err <= 1e-10, f"max |FF^H - I| = {err:.3e}"


def _check_parseval():
    rng = np.random.default_rng(11)
    f = angle_transform(256)
    worst = 0.0
    for _ in range(5):
        x = rng.standard_normal(256) + 1j * rng.standard_normal(256)
        worst = max(worst, abs(np.linalg.norm(f @ x) - np.linalg.norm(x)) / np.linalg.norm(x))
    return "Parseval round-trip", worst <= 1e-10, f"max relative norm error = {worst:.3e}"


def _check_window_cardinality():
    cfg = SystemConfig()
    patterns = patterns_for(cfg)
    ok = True
    for n in (1, 40, 128, 256):
        win = expand_window(patterns.pattern(n), cfg.window_halfwidth, cfg.n_antennas)
        counts = np.array([np.unique(win.rows[:, j]).size for j in range(0, cfg.n_subcarriers, 37)])
        ok = ok and bool(np.all(counts == 2 * cfg.window_halfwidth + 1))
    return "window cardinality 2*delta+1", ok, "checked patterns n in {1, 40, 128, 256}"


def _check_residual_monotonicity():
    cfg = SystemConfig()
    patterns = patterns_for(cfg)
    worst = 0.0
    for seed in range(20):
        rng_sample, rng_noise = trial_streams(777, seed)
        ch = assemble_channel(sample_paths(rng_sample, cfg), cfg)
        comb = make_combiners(rng_sample, cfg)
        obs = observe(ch, comb, snr_to_sigma2(10.0), rng_noise)
        rep = bspd_estimate(obs.y, comb.effective, cfg.n_paths, cfg.window_halfwidth, patterns)
        norms = rep.residual_norms
        increase = np.max(norms[1:] - norms[:-1])
        worst = max(worst, float(increase))
    return ("residual norms non-increasing (20 seeds)", worst <= 1e-9,
            f"max per-subcarrier increase = {worst:.3e}")


def _zero_off_support(rep):
    mask = np.ones_like(rep.h_hat, dtype=bool)
    for j, rows in enumerate(rep.supports):
        mask[rows - 1, j] = False
    return np.all(rep.h_hat[mask] == 0)


def _narrowband_cfg():
    return SystemConfig(n_antennas=64, n_rf=8, n_subcarriers=32, pilot_slots=6,
                        bandwidth_hz=0.0, n_paths=2, window_halfwidth=2)


def _check_support_and_narrowband():
    cfg = _narrowband_cfg()
    grid = angle_grid(cfg.n_antennas)
    rng_sample, rng_noise = trial_streams(31, 0)
    sines = np.array([grid.theta(12), grid.theta(50)])
    ch = assemble_channel(sample_paths(rng_sample, cfg, direction_sines=sines), cfg)
    comb = make_combiners(rng_sample, cfg)
    obs = observe(ch, comb, 0.0, rng_noise)
    patterns = patterns_for(cfg)
    sparsity = cfg.n_paths * (2 * cfg.window_halfwidth + 1)
    reports = [
        bspd_estimate(obs.y, comb.effective, cfg.n_paths, cfg.window_halfwidth, patterns),
        somp_estimate(obs.y, comb.effective, sparsity),
        omp_block_estimate(obs.y, comb.effective, sparsity),
        oracle_ls_estimate(obs.y, comb.effective, ch, cfg.window_halfwidth),
    ]
    off_ok = all(_zero_off_support(r) for r in reports)
    errs = {r.scheme: nmse(r.h_hat, ch.h_angle) for r in reports}
    nmse_ok = all(v <= -100.0 for v in errs.values())
    detail = ", ".join(f"{k} {v:.0f} dB" for k, v in errs.items())
    return [("estimates vanish off declared supports", off_ok, "all four schemes"),
            ("noiseless narrowband on-grid NMSE <= -100 dB", nmse_ok, detail)]


def _check_tail_bound():
    rng = np.random.default_rng(5150)
    draws = 100_000
    d = (rng.standard_normal(draws) + 1j * rng.standard_normal(draws)) / np.sqrt(2)
    power = np.abs(d) ** 2
    ok = True
    details = []
    for alpha in (1.0, 2.0, 4.0):
        emp = float(np.mean(power >= alpha))
        bound = gaussian_tail_bound(np.sqrt(alpha))
        ok = ok and emp <= bound
        details.append(f"alpha={alpha:g}: {emp:.4f} <= {bound:.4f}")
    return "Gaussian tail bound dominance", ok, "; ".join(details)


def _check_thread_determinism():
    cfg = SystemConfig(n_antennas=32, n_rf=4, n_subcarriers=64, pilot_slots=6,
                       n_paths=2, window_halfwidth=2)
    base = ExperimentSpec(experiment="snr-sweep", config=cfg, trials=3,
                          snr_sweep_db=(0.0, 5.0, 10.0, 15.0))
    rows_by_workers = [run_snr_sweep(dataclasses.replace(base, workers=w)) for w in (1, 4)]
    ok = rows_by_workers[0] == rows_by_workers[1]
    return "bit-identical results for 1 and 4 workers", ok, "4-point sweep, all schemes"


def run_property_suite() -> list:
    """Run every property check; returns (name, passed, detail) tuples."""
    results = [
        _check_unitarity(),
        _check_parseval(),
        _check_window_cardinality(),
        _check_residual_monotonicity(),
    ]
    results.extend(_check_support_and_narrowband())
    results.append(_check_tail_bound())
    results.append(_check_thread_determinism())
    return results
