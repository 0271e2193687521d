"""
Fitting under heavy-tailed noise
================================

Nine responses that share coefficient patterns in three groups, with
scaled t(4) errors. Least squares is pulled around by the outliers; the rank
loss is not, and the cluster penalty lets responses in the same group
borrow strength from each other.
"""

import numpy as np

from wmcen import Dataset, Hyperparams, fit, mse_beta
from wmcen.simgen import SimulationSpec, generate_dataset
from wmcen.tuning import lambda_max

spec = SimulationSpec(p=12, eta=1.0, xi=0.05, error_kind="t4")
train, test, b_true = generate_dataset(spec, np.random.default_rng(1))

# ordinary least squares, one response at a time
xc = train.x - train.x.mean(0)
yc = train.y - train.y.mean(0)
b_ols = np.linalg.lstsq(xc, yc, rcond=None)[0]

lm = lambda_max(train)
lasso = fit(train, Hyperparams(0.05 * lm))
clustered = fit(train, Hyperparams(0.05 * lm, 0.05 * lm, 3))

for name, b in [("least squares", b_ols), ("rank lasso", lasso.b),
                ("rank lasso + clusters", clustered.b)]:
    print(f"{name:<22} coefficient MSE {mse_beta(b, b_true):.4f}")

# the true grouping is responses (0,1,2), (3,4,5), (6,7,8). The k-means start
# is taken from a ridge fit, so with Cauchy errors it can lock onto outliers
# and stay in a poor local optimum; try error_kind="cauchy" to see it.
print("cluster labels:", clustered.clusters.labels)
print("converged:", clustered.converged, "after", clustered.outer_iters, "outer rounds")
