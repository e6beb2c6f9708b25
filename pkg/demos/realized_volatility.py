"""Realized variance and higher power variations of a stochastic-volatility path."""
import numpy as np

from mixclt.mcstat import McConfig, run_experiment
from mixclt.paths import simulate_vol_model
from mixclt.powervar import (VolModelSpec, compensator_power_variation, gaussian_abs_moment,
                             realized_power_variation, scheme_series)

spec = VolModelSpec(family="log_ou", kappa=2.0, nu=0.5, refine=4)
n = 4096

# %% one path
vp = simulate_vol_model(spec, n, seed=11)
for p in (2, 4, 6):
    V = realized_power_variation(vp.m, p, 1 / n).values[-1]
    U = compensator_power_variation(vp.a_increments, p, 1 / n, 1 / n).values[-1]
    print(f"p={p}: V = {V:.4f}  mu_p U = {gaussian_abs_moment(p) * U:.4f}")

s = scheme_series(vp.m, vp.a_increments, n)
print("X_n(1) / sqrt(bracket) =", s.x_n[-1] / np.sqrt(s.bracket[-1]))

# %% the normalized error is standard normal, with or without drift
for name, params in [("realized_var_clt", {"family": "log_ou", "kappa": 2.0, "nu": 0.5, "refine": 4}),
                     ("power_var_clt_p", {"p": 6}),
                     ("drift_robustness", {"mu_drift": 0.5, "beta": 0.3})]:
    rep = run_experiment(McConfig(name, master_seed=1, replications=2000, steps=n, params=params))
    print(f"{name}: KS = {rep.ks['stat']:.4f} (threshold {rep.ks['threshold']}) passed={rep.passed}")
