import dataclasses

import numpy as np
import pytest

from bspd.errors import ConfigError, ParameterError, UnderdeterminedSupportError
from bspd.sysmodel import SystemConfig
from bspd.harness import (CSV_HEADER, ExperimentSpec, ResultRow, emit_csv, emit_svg,
                          load_config, parse_csv, rows_to_csv, run_bandwidth_sweep,
                          run_capture_ratio, run_direction_prob, run_pilot_sweep,
                          run_snr_sweep)


TINY = SystemConfig(n_antennas=32, n_rf=4, n_subcarriers=48, pilot_slots=5,
                    n_paths=2, window_halfwidth=2)


def tiny_spec(**kwargs):
    defaults = dict(experiment="snr-sweep", config=TINY, trials=3,
                    snr_sweep_db=(0.0, 10.0), pilot_sweep=(4, 6),
                    bandwidth_sweep_hz=(1e9, 15e9),
                    direction_snr_sweep_db=(-10.0, 0.0),
                    direction_grid_indices=(8, 25))
    defaults.update(kwargs)
    return ExperimentSpec(**defaults)


class TestLoadConfig:
    def test_missing_file_gives_defaults(self):
        spec = load_config(None)
        assert spec.config == SystemConfig()
        assert spec.tau_max == 20e-9
        assert spec.schemes == ("bspd", "somp", "omp-block", "oracle")

    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "empty.cfg"
        path.write_text("")
        spec = load_config(str(path))
        assert spec.config == SystemConfig()

    def test_overrides_and_comments(self, tmp_path):
        path = tmp_path / "override.cfg"
        path.write_text(
            "# comment\n"
            "n_antennas = 64\n"
            "pilot_slots = 4   # trailing comment\n"
            "snr_sweep_db = 0, 10, 20\n"
            "schemes = bspd, oracle\n"
            "on_grid = true\n"
            "base_seed = 99\n")
        spec = load_config(str(path))
        assert spec.config.n_antennas == 64
        assert spec.config.pilot_slots == 4
        assert spec.snr_sweep_db == (0.0, 10.0, 20.0)
        assert spec.schemes == ("bspd", "oracle")
        assert spec.on_grid is True
        assert spec.base_seed == 99

    def test_unknown_key_rejected_by_name(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("n_antennas = 64\nnot_a_key = 3\n")
        with pytest.raises(ConfigError, match="line 2.*not_a_key"):
            load_config(str(path))

    def test_invalid_value_reports_line(self, tmp_path):
        path = tmp_path / "bad2.cfg"
        path.write_text("n_antennas = sixty-four\n")
        with pytest.raises(ConfigError, match="line 1"):
            load_config(str(path))

    def test_invariant_violation_rejected(self, tmp_path):
        path = tmp_path / "bad3.cfg"
        path.write_text("n_antennas = 0\n")
        with pytest.raises(ConfigError, match="n_antennas"):
            load_config(str(path))

    def test_duplicate_key_rejected(self, tmp_path):
        path = tmp_path / "dup.cfg"
        path.write_text("n_rf = 4\nn_rf = 8\n")
        with pytest.raises(ConfigError, match="duplicate"):
            load_config(str(path))

    def test_default_trial_counts(self):
        assert load_config(None, experiment="snr-sweep").effective_trials() == 100
        assert load_config(None, experiment="direction-prob").effective_trials() == 200

    def test_default_sparsity_from_geometry(self):
        spec = load_config(None)
        assert spec.effective_sparsity() == 3 * (2 * 4 + 1) == 27

    def test_unsorted_sweep_rejected(self):
        with pytest.raises(ParameterError):
            tiny_spec(snr_sweep_db=(10.0, 0.0))

    def test_unknown_scheme_rejected(self):
        with pytest.raises(ParameterError):
            tiny_spec(schemes=("bspd", "mystery"))


class TestSweeps:
    def test_snr_sweep_shape_and_determinism(self):
        spec = tiny_spec()
        rows_a = run_snr_sweep(spec)
        rows_b = run_snr_sweep(spec)
        assert rows_a == rows_b
        assert len(rows_a) == len(spec.snr_sweep_db) * len(spec.schemes)
        assert {r.metric_name for r in rows_a} == {"nmse_db"}
        assert all(np.isfinite(r.metric_value) for r in rows_a)

    def test_seed_changes_results(self):
        rows_a = run_snr_sweep(tiny_spec())
        rows_b = run_snr_sweep(tiny_spec(base_seed=5))
        assert rows_a != rows_b

    def test_worker_count_invariance(self):
        spec = tiny_spec(snr_sweep_db=(0.0, 5.0, 10.0, 15.0))
        assert run_snr_sweep(spec) == run_snr_sweep(dataclasses.replace(spec, workers=4))

    def test_noiseless_narrowband_on_grid_all_schemes_exact(self):
        cfg = dataclasses.replace(TINY, bandwidth_hz=0.0)
        spec = tiny_spec(config=cfg, trials=1, snr_sweep_db=(300.0,), on_grid=True,
                         direction_grid_indices=(8, 25))
        rows = run_snr_sweep(spec)
        for r in rows:
            assert r.metric_value <= -100.0

    def test_pilot_sweep_uses_fixed_snr(self):
        spec = tiny_spec(experiment="pilot-sweep", snr_db=12.0)
        rows = run_pilot_sweep(spec)
        assert {r.snr_db for r in rows} == {12.0}
        assert {r.sweep_name for r in rows} == {"pilot_slots"}

    def test_pilot_sweep_underdetermined_gate(self):
        # P = 2 gives 8 observations < L(2*delta+1) = 10
        spec = tiny_spec(experiment="pilot-sweep", pilot_sweep=(2, 4))
        with pytest.raises(UnderdeterminedSupportError):
            run_pilot_sweep(spec)

    def test_bandwidth_sweep_rows(self):
        spec = tiny_spec(experiment="bandwidth-sweep")
        rows = run_bandwidth_sweep(spec)
        assert {r.sweep_value for r in rows} == {1e9, 15e9}

    def test_direction_prob_rows(self):
        spec = tiny_spec(experiment="direction-prob", trials=5)
        rows = run_direction_prob(spec)
        assert len(rows) == 4
        by_scheme = {(r.scheme, r.sweep_value): r for r in rows}
        assert by_scheme[("bspd", 0.0)].metric_name == "success_prob"
        assert by_scheme[("bound", 0.0)].metric_name == "bound"
        assert 0.0 <= by_scheme[("bound", 0.0)].metric_value <= 1.0

    def test_capture_ratio_rows(self):
        spec = tiny_spec(experiment="capture-ratio")
        rows = run_capture_ratio(spec)
        assert [r.sweep_value for r in rows] == [0.0, 1.0, 2.0]
        gammas = [r.metric_value for r in rows]
        assert all(b >= a for a, b in zip(gammas, gammas[1:]))
        assert rows[0].snr_db is None


class TestCsv:
    def test_header_golden(self):
        assert CSV_HEADER == ("experiment,scheme,sweep_name,sweep_value,snr_db,"
                              "trials,metric_name,metric_value,base_seed")

    def test_round_trip(self, tmp_path):
        rows = run_snr_sweep(tiny_spec())
        path = tmp_path / "rows.csv"
        emit_csv(rows, str(path))
        assert parse_csv(str(path)) == rows

    def test_round_trip_with_none_snr(self, tmp_path):
        rows = run_capture_ratio(tiny_spec(experiment="capture-ratio"))
        path = tmp_path / "gamma.csv"
        emit_csv(rows, str(path))
        assert parse_csv(str(path)) == rows

    def test_empty_rows_refused(self, tmp_path):
        with pytest.raises(ParameterError):
            emit_csv([], str(tmp_path / "x.csv"))

    def test_bit_identical_text(self):
        assert rows_to_csv(run_snr_sweep(tiny_spec())) == rows_to_csv(run_snr_sweep(tiny_spec()))

    def test_unwritable_path_surfaced(self):
        rows = run_capture_ratio(tiny_spec(experiment="capture-ratio"))
        with pytest.raises(ParameterError, match="no/such"):
            emit_csv(rows, "/no/such/dir/file.csv")


class TestSvg:
    def test_one_series_one_point_single_polyline(self, tmp_path):
        rows = [ResultRow("snr-sweep", "bspd", "snr_db", 0.0, 0.0, 1, "nmse_db", -3.0, 1)]
        path = tmp_path / "one.svg"
        emit_svg(rows, str(path))
        text = path.read_text()
        assert text.count("<polyline") == 1

    def test_one_polyline_per_scheme(self, tmp_path):
        rows = run_snr_sweep(tiny_spec())
        path = tmp_path / "many.svg"
        emit_svg(rows, str(path))
        assert path.read_text().count("<polyline") == len(tiny_spec().schemes)

    def test_empty_refused(self, tmp_path):
        with pytest.raises(ParameterError):
            emit_svg([], str(tmp_path / "x.svg"))
