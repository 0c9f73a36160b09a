"""Monte Carlo estimation of generalization capacity for sparse mean localization."""

from gencap.correlated import (
    HypergeometricLaw,
    YhApproximator,
    estimate_elogz_correlated,
    hypergeometric_sample,
    y_h_eta_approx,
    y_h_exact,
)
from gencap.costs import (
    ModelParams,
    boltzmann_logweight,
    draw_noise,
    joint_risk_crn,
    risk_hits,
    risk_l1,
    risk_linear,
    risk_sq,
)
from gencap.errors import CapacityError, DomainError
from gencap.gc import (
    BetaGrid,
    EstimatorSpec,
    GcResult,
    componentwise_gibbs,
    crn_noise_plan,
    estimate_gc,
    gibbs_distribution,
    information_content,
)
from gencap.hypothesis import (
    FullSpace,
    SparseSpace,
    hit_count,
    importance_weight,
    rank_sparse,
    sample_stratified,
    sample_uniform,
    stratum_size,
    unrank_full,
    unrank_sparse,
)
from gencap.kernels import BACKEND
from gencap.partition import (
    LogPartitionTriple,
    exhaustive_log_partitions,
    importance_sample_log_partitions,
    log_sum_exp,
    uniform_sample_log_partitions,
    weighted_log_partitions,
)

__version__ = "0.1.0"
