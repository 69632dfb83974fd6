"""Distance covariance, auto-distance correlation and serial-dependence tests."""

from .distance import (
    CenteredDistanceMatrix,
    MetricSpec,
    centered_distances,
    dcor,
    dcor_affine,
    dcor_bernoulli_closed_form,
    dcor_normal_closed_form,
    dcor_screen,
    dcov_affine,
    dcov_u,
    dcov_v,
    dcov_v_expanded,
    double_center,
    feuerverger_statistic,
    normal_scores,
    pairwise_distances,
    pdcor,
    u_center,
)
from .fastdcov import dcor_fast_univariate, dcov_fast_univariate
from .io import DataError, read_series
from .kernels import KernelSpec, kernel_weight, resolve_bandwidth
from .plotdata import PlotData, adcf_plot_data
from .portmanteau import (
    TestStatistic,
    compute_statistic,
    dist_D1,
    dist_D2,
    edf_joint,
    edf_marginal,
    gaussian_weighted_sigma2,
    spectral_estimate,
    stat_BP,
    stat_FP,
    stat_FP_multivariate,
    stat_H96,
    stat_H98,
    stat_H98_multivariate,
    stat_H99,
    stat_LB,
    stat_mLB,
    stat_ST,
    stat_ST_multivariate,
    stat_T2n,
    stat_T3n,
)
from .resampling import (
    ResamplingPlan,
    TestResult,
    bootstrap_tests,
    iid_bootstrap_pvalue,
    min_volatility_block,
    permutation_pvalue,
    subsample_band,
    wild_bootstrap_band,
)
from .simulation import ExperimentConfig, ExperimentReport, ModelSpec, generate, run_experiment
from .timeseries import LagProfile, acf, adcf, adcf_matrix, adcf_profile, adcv, adcv_matrix, autocov_matrix
from .var import VarModel, var_fit, var_order_select

__version__ = "0.1.0"
