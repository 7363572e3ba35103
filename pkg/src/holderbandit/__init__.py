"""Bandit optimisation of Hölder-smooth functions with two-layer UCB and Corral algorithms."""

from .baselines import Ucb1Bins
from .corral import (
    AlphaGrid,
    CorralState,
    SmoothedBase,
    adapt_learning_rate,
    adapt_run,
    alpha_grid,
    corral_init,
    corral_meta_run,
    corral_step,
    corral_update,
    smooth_activate,
)
from .features import FeatureMap, build_feature_map, degree_for, feature_dim, featurize, multi_indices, to_local
from .harness import ExperimentConfig, RateFit, emit_csv, fit_rate, run_experiment
from .linucb import LinUcbConfig, MisspecLinUCB, beta, theorem1_rhs
from .meta import BinGrid, DoublingUCBMeta, MetaConfig, UCBMeta, bin_epsilon, doubling_run, num_bins
from .testbed import (
    HolderFunction,
    NoiseModel,
    Oracle,
    certify,
    make_power_bump,
    make_quadratic,
    make_trig_mixture,
    sample_reward,
    true_max,
)
from .trace import ConfigError, RegretTrace

__version__ = "0.1.0"
