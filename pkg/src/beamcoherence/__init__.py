"""Channel and beam coherence time for mobile mmWave receivers with directional beams."""

from .coherence import (
    channel_coherence_time,
    tb_los,
    tb_nlos_mean,
    tc_general_mu,
    tc_los,
    tc_no_pointing,
    tc_numeric,
    tc_small_mu,
    tc_worst_case,
)
from .correlation import corr_combined, corr_los, corr_nlos_approx, corr_nlos_exact, correlation_fn
from .link import LinkConfig, antenna_gain, mi_lower_bound, optimal_pilot_spacing
from .scenario import Beam, Scenario, SpatialLobeModel

__version__ = "0.1.0"

__all__ = [
    "Beam",
    "LinkConfig",
    "Scenario",
    "SpatialLobeModel",
    "antenna_gain",
    "channel_coherence_time",
    "corr_combined",
    "corr_los",
    "corr_nlos_approx",
    "corr_nlos_exact",
    "correlation_fn",
    "mi_lower_bound",
    "optimal_pilot_spacing",
    "tb_los",
    "tb_nlos_mean",
    "tc_general_mu",
    "tc_los",
    "tc_no_pointing",
    "tc_numeric",
    "tc_small_mu",
    "tc_worst_case",
]
