"""Martingale central limit theorems with mixture limits: exact lattice
constructions, simulators, limit-law samplers and Monte Carlo checks."""
from .lattice import (DobrushinSystem, LatticeFunction, LatticePotential, WindowError, apply_T,
                      c_V_squared, compensator_v, cross_bracket_g, cumulative_H, mu_v_all_formulas,
                      potential_G)
from .limitlaw import (MixtureLawSpec, mixture_moments, sample_inverse_local_time, sample_local_time,
                       sample_mixture)
from .mcstat import (McConfig, McReport, empirical_cdf, ks_one_sample, ks_two_sample,
                     run_experiment)
from .paths import (CombPath, RescaledStats, SamplePath, WalkPath, comb_rescaled, dds_time_change,
                    max_jump, occupation_counts, rescaled_statistics, simulate_comb,
                    simulate_discrete_stoch_integral, simulate_srw, simulate_vol_model)
from .powervar import (SchemeSeries, VolModelSpec, compensator_power_variation,
                       drift_perturbation_check, gaussian_abs_moment, realized_power_variation,
                       scheme_series)

__version__ = "0.1.0"
