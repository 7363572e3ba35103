# %% [markdown]
# # Corralling bases and adapting to unknown smoothness
#
# A Corral master keeps a distribution over base algorithms and updates it by
# log-barrier mirror descent on importance-weighted losses. Bases are smoothed:
# at their k-th activation they advance with probability 1/k, otherwise they
# replay one of their own past actions.
#
# Two uses: one base per bin (a drop-in for the top layer of the two-layer
# method), and one doubling two-layer base per smoothness guess on a grid up
# to a target `R`, which needs no knowledge of the true smoothness.

# %%
import numpy as np

from holderbandit import NoiseModel, Oracle, adapt_learning_rate, adapt_run, alpha_grid, corral_meta_run, make_power_bump

T = 2**13
print("grid for R=2, T=2^13:", np.round(alpha_grid(2.0, T).points, 3))
print(f"learning rate: {adapt_learning_rate(1, 2.0, T):.3g}")

# %%
for alpha in (0.5, 1.0, 2.0):
    f = make_power_bump(1, alpha, 1.0, [0.31])
    tr = adapt_run(2.0, 1, Oracle(f, NoiseModel(0.1), np.random.default_rng(0)), f.f_star, T, 0.1, 0.1,
                   np.random.default_rng(1), profile="aggressive")
    share = np.bincount(tr.chosen_base, minlength=len(tr.meta["alpha_grid"])) / T
    print(f"true alpha {alpha}: regret {tr.final_regret:8.1f}, time share per guess {np.round(share, 2)}")

# %%
f = make_power_bump(1, 2.0, 1.0, [0.31])
tr = corral_meta_run(2.0, 1.0, 1, Oracle(f, NoiseModel(0.1), np.random.default_rng(0)), f.f_star, T, 0.1, 0.1,
                     np.random.default_rng(1), profile="aggressive")
print(f"one base per bin: {tr.meta['n_bins']} bins, regret {tr.final_regret:.1f}, final p {np.round(tr.meta['final_p'], 3)}")
