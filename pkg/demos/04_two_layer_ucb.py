# %% [markdown]
# # Two-layer UCB over bins
#
# The domain is cut into `n` equal bins, with `n` growing like
# `T^(d/(d+2 alpha))`. Each bin runs its own misspecified linear UCB on local
# polynomial features, and the top layer always advances the bin whose latest
# upper confidence bound is largest. A smoother function allows fewer, larger
# bins, which is where the rate gain over plain discretisation comes from.

# %%
import numpy as np

from holderbandit import MetaConfig, NoiseModel, Oracle, bin_epsilon, doubling_run, make_power_bump, num_bins
from holderbandit.baselines import run as baseline_run
from holderbandit.harness import fit_rate
from holderbandit.meta import run as meta_run

for T in (2**10, 2**13, 2**16):
    n, m = num_bins(T, 1, 2.0)
    print(f"T={T:6d}: {n} bins, eps per bin {bin_epsilon(1.0, 1 / m, 2.0):.4f}; alpha=1 baseline uses {num_bins(T, 1, 1.0)[0]} bins")

# %% [markdown]
# Regret of the two-layer method against UCB1 with uniform sampling inside
# bins, averaged over a few random optimum locations.

# %%
Ts = [2**k for k in range(10, 15)]
meta_regret, base_regret, doubling_regret = np.zeros(len(Ts)), np.zeros(len(Ts)), np.zeros(len(Ts))
for seed in range(4):
    f = make_power_bump(1, 2.0, 1.0, [np.random.default_rng(seed).uniform()])
    for i, T in enumerate(Ts):
        cfg = MetaConfig(2.0, 1.0, 1, T, 0.1, 0.1, "aggressive")
        meta_regret[i] += meta_run(cfg, Oracle(f, NoiseModel(0.1), np.random.default_rng([seed, T])), f.f_star,
                                   np.random.default_rng([seed, T, 1])).final_regret / 4
        doubling_regret[i] += doubling_run(cfg, Oracle(f, NoiseModel(0.1), np.random.default_rng([seed, T])), f.f_star,
                                           T, np.random.default_rng([seed, T, 1])).final_regret / 4
        base_regret[i] += baseline_run(T, 1, Oracle(f, NoiseModel(0.1), np.random.default_rng([seed, T])), f.f_star,
                                       np.random.default_rng([seed, T, 1])).final_regret / 4

for name, r in [("two-layer", meta_regret), ("doubling", doubling_regret), ("ucb1 bins", base_regret)]:
    print(f"{name:10s} regrets {np.round(r, 1)}  slope {fit_rate(zip(Ts, r)).slope:.3f}")
