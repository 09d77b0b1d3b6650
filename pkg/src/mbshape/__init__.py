"""Maxwell-Boltzmann probabilistic shaping of QAM on the AWGN channel."""

__version__ = "0.1.0"

from .constellation import PamConstellation, ShapedQam, base_grid, mb_pmf
from .gain import required_snr_uniform, sensitivity_gain
from .infotheory import awgn_capacity, eb_n0_db, mi_awgn_1d, mi_awgn_2d
from .mismatch import build_gain_map, coverage_interval, quantize_pmfs
from .shaping import nu_for_power, optimize_shaping

__all__ = [
    "PamConstellation",
    "ShapedQam",
    "awgn_capacity",
    "base_grid",
    "build_gain_map",
    "coverage_interval",
    "eb_n0_db",
    "mb_pmf",
    "mi_awgn_1d",
    "mi_awgn_2d",
    "nu_for_power",
    "optimize_shaping",
    "quantize_pmfs",
    "required_snr_uniform",
    "sensitivity_gain",
]
