"""Wideband THz massive-MIMO channel estimation via beam split pattern detection."""

from .errors import (BspdError, ConfigError, DimensionMismatchError,
                     ParameterError, UnderdeterminedSupportError)
from .sysmodel import (LIGHT_SPEED, AngleGrid, SystemConfig, angle_grid,
                       angle_transform, nearest_grid_index,
                       nearest_grid_index_periodic, steering_vector,
                       subcarrier_frequencies)
from .channel import (DEFAULT_TAU_MAX, ChannelRealization, PathComponent,
                      assemble_channel, direction_response, dirichlet_kernel,
                      sample_paths, spatial_direction)
from .sensing import (CombinerSet, PilotObservation, make_combiners, observe,
                      snr_to_sigma2)
from .bsp import (BeamSplitPattern, PatternSet, SupportWindow,
                  beam_split_pattern, capture_ratio_analytic,
                  captured_power_fraction, expand_window, patterns_for,
                  subcoherence)
from .estimators import (EstimateReport, bspd_estimate, detect_direction_index,
                         ls_on_columns, omp_block_estimate, oracle_ls_estimate,
                         somp_estimate)
from .analysis import (BlockDecomposition, BoundEvaluation, DirectionProbePoint,
                       block_decompose, captured_fraction_of_windows,
                       direction_probability_point, direction_success_probability,
                       evaluate_detection_bound, gaussian_tail_bound,
                       hosted_grid_indices, largest_consistent_alpha,
                       largest_feasible_alpha, detection_margin_condition,
                       detection_probability_bound, nmse, nmse_linear)
from .harness import (ExperimentSpec, ResultRow, emit_csv, emit_svg, load_config,
                      parse_csv, run_bandwidth_sweep, run_capture_ratio,
                      run_direction_prob, run_pilot_sweep, run_snr_sweep)
from .validate import run_property_suite

__version__ = "0.1.0"
