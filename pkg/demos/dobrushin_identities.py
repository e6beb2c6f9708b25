"""Dobrushin functions of a lattice potential and the identities they satisfy."""
import numpy as np

from mixclt.lattice import (DobrushinSystem, LatticePotential, apply_T, c_V_squared,
                            cross_bracket_g, mu_v_all_formulas)

# %% the dipole V = -1 at 0, +1 at a
for a in range(1, 6):
    V = LatticePotential.from_dict({0: -1.0, a: 1.0})
    mu = mu_v_all_formulas(V)
    print(f"a={a}: mu_v = {mu.direct:g} / {mu.squares:g} / {mu.dobrushin:g} (4a-2 = {4 * a - 2})")

# %% tables for a symmetric potential
V = LatticePotential(-1, [1.0, -2.0, 1.0])
sys = DobrushinSystem.build(V)
xs = np.arange(-4, 5)
print("x   ", xs)
print("G   ", sys.G(xs))
print("TG-G", apply_T(sys.G, -4, 4).values - sys.G(xs))  # equals -V
print("v   ", sys.v(xs))
print("g   ", cross_bracket_g(V)(xs))  # odd, because V is even
print("c_V^2 =", c_V_squared(V), " 2c_V^2 - sum V^2 =", 2 * c_V_squared(V) - V.sum_sq, " mu_v =", sys.mu_v)

# %% a potential that does not sum to zero: G grows linearly, v tends to mu_V^2
W = LatticePotential(0, [1.0, 0.0, 1.0])
sysW = DobrushinSystem.build(W)
print("mu_V =", sysW.mu_V, " v far out =", sysW.v(np.array([-50, 50])))
