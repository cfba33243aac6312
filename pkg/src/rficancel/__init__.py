"""Collaborative eigenspace-based RFI cancellation for radio astronomy."""

from .cancel import (Projector, cancel_pipeline, diagonal_average,
                     orth_complement, project_eigenspace, reconstruct_trajectory)
from .channel import (ChannelScenario, LinkBudget, apply_gain_db, awgn,
                      bandlimit, composite_uplink_path, fade, make_scenario)
from .channelizer import ChannelPlan, channelize, dechannelize, pfb_prototype
from .errors import (ConfigError, IllConditioned, InvalidArgument, NumericError,
                     RficancelError, ShapeError, UndefinedMetric)
from .harness import (ScenarioConfig, SweepReport, desk_preset, load_config,
                      paper_preset, run_sweep, run_trial, write_report_csv)
from .klt import (Eigenspace, Trajectory, characterize, eig_hermitian,
                  empty_eigenspace, hankel_embed, lag_covariance,
                  load_eigenspace, principal_components, save_eigenspace,
                  truncate)
from .lte import (LteConfig, ResourceGrid, UeGeometry, build_grid,
                  build_uplink_grid, demodulate_ofdma, modulate,
                  ofdma_waveform, pss_sequence, scfdma_waveform,
                  uplink_power_dbm)
from .metrics import (RqfValue, itu_threshold, rate_budget_bps,
                      removal_fraction, rqf)
from .signals import (ComplexSeries, delay_samples, gen_circular_gaussian,
                      gen_narrowband_gaussian, inr_db, mix, power, read_series,
                      write_series)

__version__ = "0.1.0"
