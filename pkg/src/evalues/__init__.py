"""E-values and p-values: calibration, merging, and multiple testing.

The most used functions are re-exported here; the submodules hold the rest.
"""

from .calibration import (
    CalibratorSpec,
    calibrate_f_kappa,
    calibrate_h,
    calibrate_integrated,
    calibrate_power,
    check_calibrator,
    e_to_p,
    jeffreys_category,
    vs_bound,
)
from .cross_merging import e_to_p_merge, p_to_e_merge, p_to_e_mixture, ville_se_to_p
from .e_merging import (
    MergeClass,
    arithmetic_mean,
    convex_mixture,
    e_simes,
    m_family_e,
    product,
    ruger_e,
    u_mixture,
    u_statistic,
)
from .multiple_testing import (
    AdjustedEValues,
    AdjustedPValues,
    adjust_e_average,
    adjust_e_product,
    fact_fisher,
    fact_generic,
    holm_adjust,
    hommel_adjust,
)
from .p_merging import bonferroni, fisher, maximum, ruger_p, simes

__version__ = "0.1.0"
