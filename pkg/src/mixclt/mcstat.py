"""Monte Carlo replication engine and distribution tests.

Each experiment turns one limit theorem into a pass/fail check: it runs
``N`` replications, each on its own stream derived from
``(master_seed, experiment_code, index)``, and compares the resulting
sample with an exact oracle (the standard normal CDF, or draws from a
limit-law sampler).  Replication records are merged after sorting by index
and moments use :func:`math.fsum`, so the report does not depend on the
order in which replications finish.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Callable, Optional

import numpy as np
from scipy.special import ndtr

from . import paths
from .lattice import DobrushinSystem, LatticePotential
from .limitlaw import MixtureLawSpec, mixture_moments, sample_mixture
from .powervar import (VolModelSpec, compensator_power_variation, drift_perturbation_check,
                       gaussian_abs_moment, realized_power_variation, scheme_series)
from .streams import replication_seed

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)
KS99 = 1.63
_ORACLE_KEY = 2 ** 62
_DECAY_KEY = 2 ** 62 + 1


# ---------------------------------------------------------------------------
# distribution tests


class ECDF:
    """Right-continuous empirical distribution function of a sample."""

    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size == 0:
            raise ValueError("empirical CDF needs at least one sample")
        self.x = x

    def __call__(self, y):
        return np.searchsorted(self.x, y, side="right") / self.x.size


def empirical_cdf(samples) -> ECDF:
    return ECDF(samples)


def ks_two_sample(a, b) -> float:
    """``sup_y |F_a(y) - F_b(y)|`` over the pooled sample."""
    Fa, Fb = ECDF(a), ECDF(b)
    pooled = np.concatenate((Fa.x, Fb.x))
    return float(np.max(np.abs(Fa(pooled) - Fb(pooled))))


def ks_one_sample(samples, cdf: Callable = ndtr) -> float:
    """``sup_y |F_n(y) - cdf(y)|``; the default ``cdf`` is the standard normal."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("KS statistic needs at least one sample")
    F = cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def default_ks_threshold(replications: int) -> float:
    if replications >= 10_000:
        return 0.02
    if replications >= 5_000:
        return 0.03
    return round(1.5 * KS99 / math.sqrt(replications), 4)


def moment_summary(x) -> dict:
    """Mean, variance, skewness and kurtosis (raw fourth standardized moment) with standard errors."""
    x = np.asarray(x, dtype=float)
    n = x.size
    mean = math.fsum(x) / n
    d = x - mean
    var = math.fsum(d ** 2) / max(n - 1, 1)
    m2 = math.fsum(d ** 2) / n
    out = {"n": n, "mean": mean, "mean_se": math.sqrt(var / n), "variance": var,
           "variance_se": math.sqrt(max(math.fsum(d ** 4) / n - m2 ** 2, 0.0) / n)}
    if m2 > 0:
        out["skewness"] = math.fsum(d ** 3) / n / m2 ** 1.5
        out["kurtosis"] = math.fsum(d ** 4) / n / m2 ** 2
    return out


# ---------------------------------------------------------------------------
# configuration and report


EXPERIMENT_NAMES = ("occupation_clt", "comb_clt", "realized_var_clt", "power_var_lln",
                    "power_var_clt_p", "drift_robustness", "cross_bracket_decay")


@dataclass
class McConfig:
    """One Monte Carlo experiment: ``replications`` runs of ``steps`` steps each."""

    experiment: str
    master_seed: int = 0
    replications: int = 1000
    steps: int = 1000
    params: dict = field(default_factory=dict)
    ks_threshold: Optional[float] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_NAMES:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENT_NAMES}")
        if int(self.replications) != self.replications or self.replications < 1:
            raise ValueError("replications must be an integer >= 1")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValueError("steps must be an integer >= 1")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        self.replications, self.steps = int(self.replications), int(self.steps)
        self.master_seed = int(self.master_seed)
        self.params = dict(self.params)

    @property
    def code(self) -> int:
        return EXPERIMENT_NAMES.index(self.experiment) + 1

    @property
    def threshold(self) -> float:
        return self.ks_threshold if self.ks_threshold is not None else \
            default_ks_threshold(self.replications)

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "master_seed": self.master_seed,
                "replications": self.replications, "steps": self.steps,
                "params": dict(sorted(self.params.items())), "ks_threshold": self.threshold}


@dataclass
class Check:
    name: str
    value: float
    target: Any
    tolerance: Any
    passed: bool


@dataclass
class McReport:
    experiment: str
    config_echo: dict
    stats: dict
    ks: Optional[dict]
    checks: list
    passed: bool
    runtime_seconds: Optional[float]
    seeds: dict

    def to_dict(self, include_runtime: bool = True) -> dict:
        d = asdict(self)
        if not include_runtime:
            d["runtime_seconds"] = None
        return d

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(_jsonable(self.to_dict(include_runtime)), indent=2, sort_keys=True) + "\n"

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _rel_check(name: str, value: float, target: float, tol: float) -> Check:
    return Check(name, value, target, tol, bool(abs(value / target - 1) <= tol))


# ---------------------------------------------------------------------------
# experiments


def _potential(params: dict) -> DobrushinSystem:
    V = LatticePotential(int(params.get("potential_lo", 0)),
                         np.asarray(params.get("potential_values", [-1.0, 1.0]), dtype=float))
    sys = DobrushinSystem.build(V)
    if not sys.zero_sum:
        raise ValueError("experiment needs a potential with sum_x V(x) = 0")
    return sys


_VOL_FIELDS = {f.name for f in fields(VolModelSpec)} - {"sigma_fn"}


def vol_spec(params: dict) -> VolModelSpec:
    return VolModelSpec(**{k: v for k, v in params.items() if k in _VOL_FIELDS})


class Experiment:
    """Per-replication simulation plus an assembly step that emits checks."""

    ks_based = True

    def __init__(self, cfg: McConfig):
        self.cfg = cfg
        self.p = cfg.params

    def replicate(self, seed) -> dict:
        raise NotImplementedError

    def assemble(self, records: list[dict]):
        raise NotImplementedError

    def oracle_seed(self):
        return np.random.SeedSequence(self.cfg.master_seed, spawn_key=(self.cfg.code, _ORACLE_KEY))

    def validate(self) -> None:
        pass


class OccupationCLT(Experiment):
    def validate(self):
        self.sys = _potential(self.p)

    def replicate(self, seed):
        w = paths.simulate_srw(self.cfg.steps, seed)
        st = paths.rescaled_statistics(w, self.sys, 1)
        return {"v_n": st.v_n[-1], "m_n": st.m_n[-1], "a_n": st.a_n[-1], "cross": st.cross_mb[-1]}

    def assemble(self, records):
        v = np.array([r["v_n"] for r in records])
        a = np.array([r["a_n"] for r in records])
        mu_v = self.sys.mu_v
        law = MixtureLawSpec(mu_v, 1.0)
        oracle = sample_mixture(law, self.oracle_seed(), size=v.size)
        ks = ks_two_sample(v, oracle)
        stats = {"v_n": moment_summary(v), "oracle_sample": moment_summary(oracle),
                 "oracle_variance": mixture_moments(law, 2), "oracle_fourth": mixture_moments(law, 4),
                 "a_n_over_mu_v": moment_summary(a / mu_v), "mu_v": mu_v,
                 "sup_v_minus_m_bound": 2 * self.sys.max_abs_G * self.cfg.steps ** -0.25}
        checks = [_rel_check("mean_a_n_over_mu_v", stats["a_n_over_mu_v"]["mean"], SQRT_2_OVER_PI,
                             float(self.p.get("mean_tolerance", 0.03)))]
        return v, ks, stats, checks


class CombCLT(Experiment):
    def replicate(self, seed):
        n = self.cfg.steps
        c1, _, a1, mom = paths.comb_endpoint(n, seed)
        return {"xi1": c1 * n ** -0.25, "local": a1 / (2 * math.sqrt(n)), "moments": tuple(mom)}

    def assemble(self, records):
        xi1 = np.array([r["xi1"] for r in records])
        n_mean = int(self.p.get("mean_replications", len(records)))
        local = np.array([r["local"] for r in records[:n_mean]])
        mom = paths.CombMoments(*np.sum([r["moments"] for r in records], axis=0).tolist())
        oracle = sample_mixture(MixtureLawSpec(1.0, 1.0), self.oracle_seed(), size=xi1.size)
        ks = ks_two_sample(xi1, oracle)
        tol = float(self.p.get("moment_tolerance", 0.02))
        stats = {"xi1": moment_summary(xi1), "oracle_sample": moment_summary(oracle),
                 "local_time": moment_summary(local), "step_moments": mom._asdict()}
        on_dx = mom.on_axis_dc1_sq / mom.on_axis
        on_dy = mom.on_axis_dc2_sq / mom.on_axis
        off_dy = mom.off_axis_dc2_sq / mom.off_axis
        # the cross product of the increments is bounded by 1 in absolute value
        total = mom.on_axis + mom.off_axis
        cross_mean = mom.cross_sum / total
        cross_se = math.sqrt(max((mom.on_axis_dc1_sq + mom.off_axis_dc1_sq) / total - cross_mean ** 2, 0.0) / total)
        checks = [
            _rel_check("mean_local_time", stats["local_time"]["mean"], SQRT_2_OVER_PI,
                       float(self.p.get("mean_tolerance", 0.03))),
            _rel_check("on_axis_dc1_sq", on_dx, 0.5, tol),
            _rel_check("on_axis_dc2_sq", on_dy, 0.5, tol),
            _rel_check("off_axis_dc2_sq", off_dy, 1.0, tol),
            Check("cross_increment_mean", cross_mean, 0.0, 3 * cross_se,
                  bool(abs(cross_mean) <= 3 * cross_se)),
        ]
        return xi1, ks, stats, checks


class _VolExperiment(Experiment):
    def validate(self):
        self.spec = vol_spec(self.p)
        self.spec.steps(self.cfg.steps)


class RealizedVarCLT(_VolExperiment):
    power = 4

    def _p(self) -> float:
        return self.power

    def replicate(self, seed):
        vp = paths.simulate_vol_model(self.spec, self.cfg.steps, seed)
        s = scheme_series(vp.m, vp.a_increments, self.cfg.steps, p=self._p())
        end = s.at_end()
        return {"z": end["x_n"] / math.sqrt(end["bracket"]), **end}

    def assemble(self, records):
        z = np.array([r["z"] for r in records])
        ks = ks_one_sample(z)
        p = self._p()
        stats = {"normalized": moment_summary(z),
                 "bracket": moment_summary([r["bracket"] for r in records]),
                 "v_n": moment_summary([r["v_n"] for r in records]),
                 "limit_bracket_over_v": (gaussian_abs_moment(p) - gaussian_abs_moment(p / 2) ** 2)
                 / gaussian_abs_moment(p)}
        return z, ks, stats, []


class PowerVarCLT(RealizedVarCLT):
    def _p(self):
        return float(self.p.get("p", 6))

    def validate(self):
        super().validate()
        if self._p() < 2:
            raise ValueError("p must be >= 2")


class PowerVarLLN(_VolExperiment):
    ks_based = False

    def validate(self):
        super().validate()
        self.power = float(self.p.get("p", 4))
        self.delta = float(self.p.get("delta", 1.0 / self.cfg.steps))

    def replicate(self, seed):
        n = self.cfg.steps
        vp = paths.simulate_vol_model(self.spec, n, seed)
        V = realized_power_variation(vp.m, self.power, self.delta)
        U = compensator_power_variation(vp.a_increments, self.power, self.delta, 1.0 / n)
        k = int(round(1.0 / self.delta))
        return {"v": V.values[k], "u": U.values[k]}

    def assemble(self, records):
        v = np.array([r["v"] for r in records])
        u = np.array([r["u"] for r in records])
        mu_p = gaussian_abs_moment(self.power)
        stats = {"v_pd": moment_summary(v), "u_pd": moment_summary(u), "mu_p": mu_p}
        tol = float(self.p.get("tolerance", 0.02))
        if self.spec.family == "log_ou":
            target = mu_p * stats["u_pd"]["mean"]
        else:
            target = mu_p * self.spec.integrated_sigma_power(self.power, self.cfg.steps, 1.0)
        stats["target"] = target
        return None, None, stats, [_rel_check("mean_v_pd", stats["v_pd"]["mean"], target, tol)]


class DriftRobustness(_VolExperiment):
    def replicate(self, seed):
        n = self.cfg.steps
        vp = paths.simulate_vol_model(self.spec, n, seed)
        s = scheme_series(vp.m, vp.a_increments, n, p=4,
                          drift=(self.spec.mu_drift, self.spec.beta))
        end = s.at_end()
        return {"y": end["y_n"] / math.sqrt(end["bracket"]),
                "x": end["x_n"] / math.sqrt(end["bracket"])}

    def decay(self) -> dict:
        ns = [int(n) for n in self.p.get("decay_ns", [256, 1024, 4096])]
        reps = int(self.p.get("decay_replications", 20))
        s1, s2 = [], []
        for n in ns:
            a, b = [], []
            for i in range(reps):
                seed = np.random.SeedSequence(self.cfg.master_seed,
                                              spawn_key=(self.cfg.code, _DECAY_KEY, n, i))
                vp = paths.simulate_vol_model(self.spec, n, seed)
                ra, rb = drift_perturbation_check(vp.a_increments, n, self.spec.mu_drift, self.spec.beta)
                a.append(ra)
                b.append(rb)
            s1.append(math.fsum(a) / reps)
            s2.append(math.fsum(b) / reps)
        logn = np.log(ns)
        slope = lambda s: float(np.polyfit(logn, np.log(s), 1)[0]) if min(s) > 0 else float("nan")
        return {"ns": ns, "s1": s1, "s2": s2, "s1_slope": slope(s1), "s2_slope": slope(s2)}

    def assemble(self, records):
        y = np.array([r["y"] for r in records])
        x = np.array([r["x"] for r in records])
        ks = ks_one_sample(y)
        stats = {"normalized_y": moment_summary(y), "normalized_x": moment_summary(x),
                 "ks_x": ks_one_sample(x)}
        checks = []
        if self.spec.mu_drift or self.spec.beta:
            d = self.decay()
            stats["decay"] = d
            tol = float(self.p.get("decay_tolerance", 0.2))
            checks += [_rel_check("s1_rate", d["s1_slope"], -0.5, tol),
                       _rel_check("s2_rate", d["s2_slope"], -1.0, tol)]
        return y, ks, stats, checks


class CrossBracketDecay(Experiment):
    ks_based = False

    def validate(self):
        self.sys = _potential(self.p)
        self.factor = int(self.p.get("factor", 16))
        if self.factor < 2:
            raise ValueError("factor must be >= 2")

    def replicate(self, seed):
        small, large = np.random.default_rng(seed).spawn(2)
        n = self.cfg.steps
        c_small = paths.rescaled_statistics(paths.simulate_srw(n, small), self.sys).cross_mb[-1]
        c_large = paths.rescaled_statistics(paths.simulate_srw(self.factor * n, large), self.sys).cross_mb[-1]
        return {"small": abs(c_small), "large": abs(c_large)}

    def assemble(self, records):
        small = np.array([r["small"] for r in records])
        large = np.array([r["large"] for r in records])
        ratio = (math.fsum(small) / small.size) / (math.fsum(large) / large.size)
        lo, hi = self.p.get("ratio_band", [1.5, 2.5])
        stats = {"abs_cross_small": moment_summary(small), "abs_cross_large": moment_summary(large),
                 "ratio": ratio, "theoretical_ratio": self.factor ** 0.25}
        return None, None, stats, [Check("decay_ratio", ratio, self.factor ** 0.25, [lo, hi],
                                         bool(lo <= ratio <= hi))]


_EXPERIMENTS: dict[str, type[Experiment]] = {
    "occupation_clt": OccupationCLT,
    "comb_clt": CombCLT,
    "realized_var_clt": RealizedVarCLT,
    "power_var_lln": PowerVarLLN,
    "power_var_clt_p": PowerVarCLT,
    "drift_robustness": DriftRobustness,
    "cross_bracket_decay": CrossBracketDecay,
}


def make_experiment(cfg: McConfig) -> Experiment:
    exp = _EXPERIMENTS[cfg.experiment](cfg)
    exp.validate()
    if exp.ks_based:
        if cfg.replications < 100:
            raise ValueError("KS-based experiments need at least 100 replications")
        floor = KS99 / math.sqrt(cfg.replications)
        if cfg.threshold <= floor:
            raise ValueError(f"KS threshold {cfg.threshold} is below the 99% null quantile "
                             f"{floor:.4f} for N = {cfg.replications}")
    return exp


def replicate(cfg: McConfig, indices, threads: int = 1, exp: Optional[Experiment] = None) -> list[dict]:
    """Run the replications with the given indices; each record carries its ``index``."""
    exp = exp or make_experiment(cfg)

    def one(i):
        rec = exp.replicate(replication_seed(cfg.master_seed, cfg.code, i))
        rec["index"] = int(i)
        return rec

    indices = list(indices)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, indices, chunksize=max(1, len(indices) // (8 * threads))))
    return [one(i) for i in indices]


def summarize(cfg: McConfig, records: list[dict], runtime: Optional[float] = None,
              exp: Optional[Experiment] = None) -> McReport:
    """Merge replication records (in any order) into a report."""
    exp = exp or make_experiment(cfg)
    records = sorted(records, key=lambda r: r["index"])
    sample, ks, stats, checks = exp.assemble(records)
    ks_block = None
    if exp.ks_based:
        half = sample.size // 2
        ks_block = {"stat": ks, "threshold": cfg.threshold,
                    "halves": ks_two_sample(sample[:half], sample[half:])}
        checks = [Check("ks", ks, 0.0, cfg.threshold, bool(ks < cfg.threshold))] + checks
    return McReport(
        experiment=cfg.experiment, config_echo=cfg.to_dict(), stats=stats, ks=ks_block,
        checks=checks, passed=all(c.passed for c in checks), runtime_seconds=runtime,
        seeds={"master_seed": cfg.master_seed, "experiment_code": cfg.code,
               "replication_stream": "SeedSequence(master_seed, spawn_key=(experiment_code, index))",
               "oracle_stream": f"SeedSequence(master_seed, spawn_key=(experiment_code, {_ORACLE_KEY}))"},
    )


def run_experiment(cfg: McConfig, threads: int = 1) -> McReport:
    """Run all replications of ``cfg`` and compare them with the experiment's oracle."""
    start = time.perf_counter()
    exp = make_experiment(cfg)
    records = replicate(cfg, range(cfg.replications), threads=threads, exp=exp)
    return summarize(cfg, records, exp=exp, runtime=time.perf_counter() - start)
