"""Occupation sums of a random walk converge to a Brownian motion run at local time."""
import math

import numpy as np

from mixclt.lattice import DobrushinSystem, LatticePotential
from mixclt.limitlaw import MixtureLawSpec, mixture_moments, sample_mixture
from mixclt.mcstat import McConfig, ks_two_sample, run_experiment
from mixclt.paths import rescaled_statistics, simulate_srw

sys = DobrushinSystem.build(LatticePotential(0, [-1.0, 1.0]))

# %% one path: V_n and the Dobrushin martingale M_n stay within 2 max|G| n^(-1/4)
n = 100_000
st = rescaled_statistics(simulate_srw(n, 1), sys, grid_points=1000)
print("sup |V_n - M_n| =", np.max(np.abs(st.v_n - st.m_n)), "bound", 2 * sys.max_abs_G * n ** -0.25)
print("A_n(1) =", st.a_n[-1], " <M_n, B_n>_1 =", st.cross_mb[-1])

# %% many paths against the mixture sqrt(mu_v |Z1|) Z2
rep = run_experiment(McConfig("occupation_clt", master_seed=7, replications=2000, steps=20_000))
print("KS =", rep.ks["stat"], "threshold", rep.ks["threshold"], "passed", rep.passed)
law = MixtureLawSpec(sys.mu_v, 1.0)
print("variance", rep.stats["v_n"]["variance"], "vs", mixture_moments(law, 2))
print("kurtosis", rep.stats["v_n"]["kurtosis"], "vs", mixture_moments(law, 4) / mixture_moments(law, 2) ** 2)
print("mean A_n/mu_v", rep.stats["a_n_over_mu_v"]["mean"], "vs", math.sqrt(2 / math.pi))

# %% the scale matters: the wrong constant is visibly off
v = sample_mixture(law, 3, size=20_000)
print("KS(c=2 vs c=4) =", ks_two_sample(v, sample_mixture(MixtureLawSpec(4.0), 4, size=20_000)))
