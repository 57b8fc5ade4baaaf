"""Decoder complexity statistics for pooled baseband processing.

Submodules: ``specfun`` (special functions), ``mcs`` (rate tables and link
adaptation), ``decoder`` (per-block complexity model), ``channel`` (SNR
distributions), ``analytic`` (moments, CDF and pooling metrics),
``montecarlo`` (trial simulation), ``cli`` (experiment runner).
"""
__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    average_rate,
    complexity_cdf,
    complexity_moments,
    complexity_rate_tradeoff,
    computational_diversity,
    computational_gain,
    computational_outage_prob,
    fixed_moments,
    metrics_report,
    outage_complexity_asymptotic,
    outage_complexity_clt,
    outage_complexity_single,
    per_cell_constraint,
)
from .channel import FixedRayleigh, PathLossFpc, path_loss_fpc, snr_cdf  # noqa: E402
from .decoder import ComplexityModelParams, complexity  # noqa: E402
from .mcs import McsTable, load_table, make_equally_spaced_table, rate_select  # noqa: E402
