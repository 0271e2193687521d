"""
What the MM iterations are doing
================================

Each sweep replaces every |pairwise residual difference| by a parabola
that touches it at the current coefficients and lies above it everywhere
else. Minimizing the parabolas can only lower the true objective.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from wmcen import (ClusterState, Dataset, Hyperparams, build_pairwise, fit, majorizer_m,
                   objective_l_dagger)

rng = np.random.default_rng(0)
x = rng.standard_normal((20, 1))
y = 0.8 * x + rng.standard_t(2, size=(20, 1))
x -= x.mean(0)
y -= y.mean(0)
ps = build_pairwise(Dataset(x, y))
hp = Hyperparams(0.5)
cs = ClusterState.from_labels([0], np.zeros((1, 1)))

grid = np.linspace(-1, 2.5, 400)
obj = [objective_l_dagger(ps, x, [[b]], cs, hp).total for b in grid]

fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(grid, obj, "k", lw=2, label="objective")
for anchor in (-0.5, 0.4, 1.8):
    m = [majorizer_m(ps, x, [[b]], [[anchor]], cs, hp) for b in grid]
    ax.plot(grid, m, "--", label=f"surrogate at {anchor}")
ax.set_ylim(min(obj) - 5, max(obj) + 5)
ax.set_xlabel("beta")
ax.legend()
fig.tight_layout()
fig.savefig("mm_surrogates.png", dpi=100)

# the recorded objective never goes up
res = fit(Dataset(x, y), hp)
print("objective trace:", np.round(res.objective_trace[:8], 4), "...")
print("largest step:", np.diff(res.objective_trace).max())
