# %% [markdown]
# # Local polynomial features
#
# Inside a bin with centre `c` and side `s`, a point is mapped to local
# coordinates `u = (x - c) / s` in `[-1/2, 1/2]^d` and then to all monomials of
# total degree below `alpha`. A linear model on these features is the local
# Taylor model, so a smooth reward is linear up to an error `L s^alpha`.

# %%
import numpy as np

from holderbandit import build_feature_map, feature_dim, featurize
from holderbandit.testbed import evaluate_many, make_power_bump

for d, alpha in [(1, 1.0), (1, 2.0), (2, 2.0), (2, 3.0), (3, 3.0)]:
    fmap = build_feature_map(d, alpha)
    print(f"d={d} alpha={alpha}: dim={fmap.dim} (= {feature_dim(d, fmap.degree)}), monomials {fmap.labels()}")

print(featurize(build_feature_map(2, 3.0), [0.5, 0.5], 0.5, [0.625, 0.375]))

# %% [markdown]
# Best linear fit on shrinking bins: the residual falls like `side^alpha`.

# %%
f = make_power_bump(1, 2.0, 1.0, [0.42])
fmap = build_feature_map(1, 2.0)
U = np.linspace(-0.5, 0.5, 201)[:, None]
for side in (0.5, 0.25, 0.125, 0.0625):
    centre = 0.42 + side / 3
    y = evaluate_many(f, centre + side * U)
    Phi = fmap.local(U)
    theta, *_ = np.linalg.lstsq(Phi, y, rcond=None)
    print(f"side {side:<7} max residual {np.max(np.abs(Phi @ theta - y)):.2e}   L side^alpha {side**2:.2e}")
