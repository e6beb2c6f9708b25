"""The comb walk: horizontal motion only on the axis, local-time scaling."""
import math

import numpy as np

from mixclt.limitlaw import MixtureLawSpec, sample_mixture
from mixclt.mcstat import ks_two_sample
from mixclt.paths import comb_endpoint, comb_rescaled, simulate_comb

c = simulate_comb(10 ** 5, seed=2)
r = comb_rescaled(c, grid_points=10)
print("t     ", r.t_grid)
print("xi1   ", np.round(r.xi1, 3))
print("comp1 ", np.round(r.comp1, 3))  # half the rescaled axis time

# %% endpoints over many walks
n, N = 10 ** 5, 3000
ends = [comb_endpoint(n, s) for s in range(N)]
xi1 = np.array([e[0] for e in ends]) * n ** -0.25
local = np.array([e[2] for e in ends]) / (2 * math.sqrt(n))
print("mean local time", local.mean(), "vs", math.sqrt(2 / math.pi))
print("KS vs sqrt(|Z1|) Z2:", ks_two_sample(xi1, sample_mixture(MixtureLawSpec(1.0), 99, size=N)))
