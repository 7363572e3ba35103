# %% [markdown]
# # Smooth test functions
#
# Three families of reward functions with a known smoothness exponent `alpha`
# and a certified optimum. A function of smoothness `alpha` is approximated
# around any point by its Taylor polynomial of degree `ceil(alpha) - 1`, with
# an error of at most `L * |x - y|^alpha`.

# %%
import numpy as np

from holderbandit import NoiseModel, Oracle, certify, make_power_bump, make_quadratic, make_trig_mixture
from holderbandit.testbed import evaluate_many, taylor_polynomial

bump = make_power_bump(1, alpha=1.5, L=1.0, x_star=[0.3])
quad = make_quadratic(1)
trig = certify(make_trig_mixture(1, [0.5, 0.3], [[1.0], [3.0]], [0.2, 1.0], alpha=2.0))

xs = np.linspace(0, 1, 6)[:, None]
for name, f in [("bump", bump), ("quadratic", quad), ("trig", trig)]:
    print(f"{name:10s} f* = {f.f_star:.4f} at x* = {np.round(f.x_star, 4)}  values: {np.round(evaluate_many(f, xs), 3)}")

# %% [markdown]
# The recorded constant `certified_L` bounds the Taylor remainder. We probe it
# on random pairs and report the worst ratio (it must stay at or below 1).

# %%
rng = np.random.default_rng(0)
pairs = rng.uniform(size=(20_000, 2))
worst = max(
    abs(evaluate_many(bump, [[x]])[0] - taylor_polynomial(bump, [y], [x])) / (bump.certified_L * abs(x - y) ** bump.alpha)
    for x, y in pairs
)
print(f"worst remainder / (L |x-y|^alpha) over 20000 pairs: {worst:.4f}")

# %% [markdown]
# Queries go through an `Oracle`, which adds noise from its own generator and
# keeps the noiseless values that pseudo-regret is computed from.

# %%
oracle = Oracle(bump, NoiseModel(0.1), np.random.default_rng(1))
print(np.round([oracle([x]) for x in (0.1, 0.3, 0.5)], 4), "noiseless:", np.round(oracle.values, 4))
