"""Local time, its inverse and the Brownian mixture, sampled exactly."""
import math

import numpy as np
from scipy import stats

from mixclt.limitlaw import (MixtureLawSpec, mixture_moments, sample_inverse_local_time,
                             sample_local_time, sample_mixture)

L = sample_local_time(1.0, 0, size=100_000)
print("E l_1(0) =", L.mean(), "vs", math.sqrt(2 / math.pi))

tau = sample_inverse_local_time(1.0, 1, size=100_000)
for lam in (0.25, 1.0, 4.0):
    print(f"E exp(-{lam} tau) = {np.mean(np.exp(-lam * tau)):.5f} vs {math.exp(-math.sqrt(2 * lam)):.5f}")
# the inverse local time is the Levy law; its density carries a 1/sqrt(2 pi) factor
print("KS vs Levy:", stats.kstest(tau, stats.levy.cdf).statistic)

spec = MixtureLawSpec(2.0, 1.0)
x = sample_mixture(spec, 2, size=100_000)
for k in (2, 4, 6):
    print(f"E X^{k} = {np.mean(x ** k):.3f} vs {mixture_moments(spec, k):.3f}")
