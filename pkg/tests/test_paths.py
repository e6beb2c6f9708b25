import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import SEED
from mixclt.lattice import DobrushinSystem, LatticePotential
from mixclt.paths import (CombPath, SamplePath, WalkPath, comb_endpoint, comb_rescaled,
                          comb_step_moments, dds_time_change, max_jump, occupation_counts,
                          read_csv_columns, rescaled_statistics, simulate_comb,
                          simulate_discrete_stoch_integral, simulate_srw, simulate_vol_model)
from mixclt.powervar import VolModelSpec
from mixclt.streams import replication_seed

DIPOLE = DobrushinSystem.build(LatticePotential(0, [-1.0, 1.0]))


def seeds(n, code=90):
    return [replication_seed(SEED, code, i) for i in range(n)]


# -- SamplePath -------------------------------------------------------------

def test_sample_path_csv_round_trip():
    p = SamplePath(0.25, [0.0, 1.5, -2.0, 0.125, 3.0])
    text = p.to_csv({"extra": np.arange(5.0)})
    assert text.splitlines()[0] == "t,value,extra"
    q = SamplePath.from_csv(text)
    assert q.delta == 0.25 and np.array_equal(q.values, p.values)
    assert np.array_equal(read_csv_columns(text, ["extra"])["extra"].values, np.arange(5.0))
    assert p.horizon == 1.0


def test_sample_path_rejects_bad_input():
    with pytest.raises(ValueError):
        SamplePath(0.0, [1.0])
    with pytest.raises(ValueError):
        SamplePath(1.0, [])
    with pytest.raises(ValueError):
        SamplePath.from_csv("x,value\n0,1\n")


# -- simple random walk -----------------------------------------------------

def test_srw_one_step():
    for s in range(20):
        assert simulate_srw(1, s).positions[1] in (-1, 1)


def test_srw_rejects_zero_steps():
    with pytest.raises(ValueError):
        simulate_srw(0, 1)


def test_srw_deterministic():
    assert np.array_equal(simulate_srw(1000, 7).positions, simulate_srw(1000, 7).positions)
    assert not np.array_equal(simulate_srw(1000, 7).positions, simulate_srw(1000, 8).positions)


def test_srw_invariants_many_paths():
    for s in seeds(1000):
        w = simulate_srw(257, s)
        w.check()


def test_walk_check_rejects():
    with pytest.raises(ValueError):
        WalkPath(np.array([0, 2])).check()
    with pytest.raises(ValueError):
        WalkPath(np.array([1, 2])).check()


@pytest.mark.slow
def test_srw_endpoint_mean():
    n = 10 ** 6
    ends = np.array([simulate_srw(n, s).positions[-1] for s in seeds(10_000)]) / math.sqrt(n)
    assert abs(ends.mean()) < 3e-2


def test_occupation_counts_two_steps():
    N = occupation_counts(WalkPath(np.array([0, 1, 0])))
    assert N(1) == 1 and N(0) == 1 and N(-1) == 0 and N(5) == 0


def test_occupation_counts_brute():
    path = [0, 1, 2, 1, 0, -1, 0]
    N = occupation_counts(WalkPath(np.array(path)))
    for x in range(-4, 5):
        assert N(x) == sum(1 for k in range(1, 7) if path[k] == x)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 500), st.integers(0, 2 ** 32))
def test_occupation_total(n, seed):
    w = simulate_srw(n, seed)
    N = occupation_counts(w)
    assert N.values.sum() == n
    assert N.lo >= -n - 1 and N.hi <= n + 1


# -- Dobrushin statistics along a walk -------------------------------------

def test_rescaled_away_from_support():
    V = DobrushinSystem.build(LatticePotential(10, [-1.0, 1.0]))
    path = np.array([0, 1, 0, -1, -2, -1, 0, 1])
    st = rescaled_statistics(WalkPath(path), V, grid_points=7)
    assert np.all(st.v_n == 0) and np.all(st.a_n == 0)


def test_rescaled_brute_length_8():
    path = [0, 1, 0, 1, 2, 1, 0, -1, 0]
    n = 8
    V = {0: -1.0, 1: 1.0}
    st = rescaled_statistics(WalkPath(np.array(path)), DIPOLE, grid_points=8)
    vfun = lambda x: oracles.v(V, x)
    gfun = lambda x: oracles.g(V, x)
    for k in range(n + 1):
        s_v, s_prev, s_vv, s_g = oracles.walk_sums(path[:k + 1], V, vfun, gfun)
        assert st.v_n[k] == pytest.approx(n ** -0.25 * s_v, abs=1e-12)
        m = n ** -0.25 * (oracles.G(V, path[k]) - oracles.G(V, 0)) + n ** -0.25 * s_prev
        assert st.m_n[k] == pytest.approx(m, abs=1e-12)
        assert st.a_n[k] == pytest.approx(s_vv / math.sqrt(n), abs=1e-12)
        assert st.b_n[k] == pytest.approx(path[k] / math.sqrt(n), abs=1e-12)
        assert st.cross_mb[k] == pytest.approx(n ** -0.75 * s_g, abs=1e-12)


def test_rescaled_rejects_nonzero_sum():
    with pytest.raises(ValueError):
        rescaled_statistics(simulate_srw(10, 1), DobrushinSystem.build(LatticePotential(0, [1.0])))


def test_rescaled_invariants():
    for s in seeds(50):
        n = 4096
        st = rescaled_statistics(simulate_srw(n, s), DIPOLE, grid_points=64)
        assert np.all(np.diff(st.a_n) >= 0)
        assert st.m_n[0] == st.a_n[0] == st.b_n[0] == st.v_n[0] == 0
        assert np.max(np.abs(st.v_n - st.m_n)) <= 2 * DIPOLE.max_abs_G * n ** -0.25 + 1e-12


def test_martingale_difference_exact():
    # M_n - V_n is the boundary term n^(-1/4) {G(S_m) - G(0) - V(S_m) + V(0)}
    n = 1000
    w = simulate_srw(n, 3)
    st = rescaled_statistics(w, DIPOLE, grid_points=n)
    s = w.positions
    diff = n ** -0.25 * (DIPOLE.G(s) - DIPOLE.G(0) - DIPOLE.V(s) + DIPOLE.V(0))
    assert np.allclose(st.m_n - st.v_n, diff, atol=1e-12)


# -- comb -------------------------------------------------------------------

def _check_comb(c: CombPath):
    d1, d2 = np.diff(c.c1), np.diff(c.c2)
    assert c.c1[0] == c.c2[0] == c.a1[0] == 0
    assert np.all(np.abs(d1) + np.abs(d2) == 1)
    assert np.all(d1[c.c2[:-1] != 0] == 0)
    da = np.diff(c.a1)
    assert np.all((da == 0) | (da == 1))
    assert np.array_equal(c.a1, np.concatenate(([0], np.cumsum(c.c2[1:] == 0))))


def test_comb_invariants():
    for s in seeds(200):
        _check_comb(simulate_comb(500, s))


def test_comb_endpoint_matches_path():
    for s in range(10):
        c = simulate_comb(5000, s)
        c1, c2, a1, mom = comb_endpoint(5000, s)
        assert (c1, c2, a1) == (c.c1[-1], c.c2[-1], c.a1[-1])
        assert mom == comb_step_moments(c)


def test_comb_on_axis_frequency():
    on = moved = 0
    for s in seeds(2000, code=91):
        _, _, _, mom = comb_endpoint(10 ** 6, s)
        on += mom.on_axis
        moved += mom.on_axis_dc1_sq
        if on >= 10 ** 6:
            break
    assert on >= 10 ** 6
    assert abs(moved / on - 0.5) < 0.02 * 0.5


def test_comb_rescaled_off_axis_prefix():
    # hand-built prefix that leaves the axis at once and never returns
    c = CombPath(np.zeros(5, int), np.array([0, 1, 2, 3, 2]), np.zeros(5, int))
    r = comb_rescaled(c, grid_points=4)
    assert np.all(r.comp1 == 0)


def test_comb_compensators_sum_to_time():
    c = simulate_comb(4096, 5)
    n = c.steps
    r = comb_rescaled(c, grid_points=64)
    # comp1 is scaled by n^(-1/2) and comp2 by n^(-1); rescaling comp1 aligns them
    assert np.allclose(r.comp1 / math.sqrt(n) + r.comp2, np.floor(n * r.t_grid) / n, atol=1e-15)


def test_comb_rescaled_brute():
    c = simulate_comb(8, 11)
    n = 8
    r = comb_rescaled(c, grid_points=8)
    for k in range(n + 1):
        a = sum(1 for j in range(1, k + 1) if c.c2[j] == 0)
        assert r.xi1[k] == pytest.approx(c.c1[k] * n ** -0.25)
        assert r.xi2[k] == pytest.approx(c.c2[k] / math.sqrt(n))
        assert r.comp1[k] == pytest.approx(a / (2 * math.sqrt(n)))
        assert r.comp2[k] == pytest.approx(k / n - a / (2 * n))


# -- discrete stochastic integral -------------------------------------------

def test_stoch_integral_zero_sigma():
    si = simulate_discrete_stoch_integral(SamplePath(1 / 64, np.zeros(65)), "gaussian", 64, 1)
    assert np.all(si.m_n.values == 0) and np.all(si.v_n.values == 0)


def test_stoch_integral_unit_sigma():
    n = 100
    si = simulate_discrete_stoch_integral(SamplePath(1 / n, np.ones(n + 1)), "rademacher", n, 2)
    assert np.array_equal(si.m_n.values, si.b_n.values)
    assert np.allclose(si.v_n.values, np.arange(n + 1) / n)


def test_stoch_integral_resolution():
    with pytest.raises(ValueError):
        simulate_discrete_stoch_integral(SamplePath(1 / 10, np.ones(11)), "gaussian", 64, 1)
    with pytest.raises(ValueError):
        simulate_discrete_stoch_integral(SamplePath(1 / 64, np.ones(65)), "cauchy", 64, 1)


def test_stoch_integral_subsamples_fine_sigma():
    n = 16
    s = np.linspace(0, 1, 4 * n + 1)
    si = simulate_discrete_stoch_integral(SamplePath(1 / (4 * n), 1 + s), "rademacher", n, 3)
    j = np.arange(1, n + 1)
    assert np.allclose(si.v_n.values[1:], np.cumsum((1 + (j - 1) / n) ** 2) / n)
    assert np.all(np.diff(si.v_n.values) >= 0)


def test_stoch_integral_variance():
    n = 4096
    grid = SamplePath(1 / n, 1 + np.arange(n + 1) / n)
    ends = np.array([simulate_discrete_stoch_integral(grid, "rademacher", n, s).m_n.values[-1]
                     for s in seeds(2000, code=92)])
    assert abs(ends.var(ddof=1) / (7 / 3) - 1) < 0.03


# -- volatility model -------------------------------------------------------

def test_vol_model_unit_sigma():
    n = 64
    vp = simulate_vol_model(VolModelSpec(), n, 4)
    assert np.all(vp.a_increments == 1 / n)
    assert np.array_equal(vp.r.values, vp.m.values)


def test_vol_model_drift_bookkeeping():
    n = 64
    vp = simulate_vol_model(VolModelSpec(mu_drift=0.5), n, 4)
    assert np.allclose(vp.r.values - vp.m.values, 0.5 * np.arange(n + 1) / n, atol=1e-15)


def test_vol_model_rejects():
    with pytest.raises(ValueError):
        simulate_vol_model(VolModelSpec(), 0, 1)
    with pytest.raises(ValueError):
        VolModelSpec(sigma0=-1.0)


def test_vol_model_independent_of_sigma_stream():
    # sigma and Z use separate streams: for a constant family the returns
    # share the Gaussian draws whatever sigma0 is
    a = simulate_vol_model(VolModelSpec(sigma0=1.0), 32, 9).m.values
    b = simulate_vol_model(VolModelSpec(sigma0=2.0), 32, 9).m.values
    assert np.allclose(b, 2 * a)


def test_vol_model_gaussian_moments():
    n = 4096
    ends = np.array([simulate_vol_model(VolModelSpec(), n, s).m.values[-1]
                     for s in seeds(10_000, code=93)])
    assert abs(ends.var(ddof=1) - 1) < 0.02
    assert abs(np.mean(ends ** 4) / 3 - 1) < 0.05


# -- diagnostics ------------------------------------------------------------

def test_max_jump():
    assert max_jump(SamplePath(0.1, np.full(11, 2.0)), 1.0) == 0
    n = 400
    assert max_jump(simulate_srw(n, 1).rescaled(), 1.0) == pytest.approx(n ** -0.5)
    p = SamplePath(0.25, [0.0, 0.5, -1.0, -0.75, 2.0])
    assert max_jump(p, 1.0) == 2.75
    assert max_jump(p, 0.5) == 1.5
    with pytest.raises(ValueError):
        max_jump(p, 2.0)


def test_dds_identity_clock():
    n = 100
    m = simulate_srw(n, 3).rescaled()
    a = SamplePath(1 / n, np.arange(n + 1) / n)
    W = dds_time_change(m, a)
    assert W.delta == pytest.approx(1 / n)
    # right-continuous inverse: tau(s) is one grid step past s
    assert np.allclose(W.values[:-1], m.values[1:])


def test_dds_linear_clock():
    n = 200
    t = np.arange(n + 1) / n
    m = SamplePath(1 / n, np.sin(3 * t))
    W = dds_time_change(m, SamplePath(1 / n, 2 * t))
    s = W.times
    assert np.max(np.abs(W.values - np.sin(3 * s / 2))) < 3 * 3 / n


def test_dds_rejects_decreasing_clock():
    m = SamplePath(0.5, [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        dds_time_change(m, SamplePath(0.5, [0.0, 1.0, 0.5]))


def test_dds_brownian_increments():
    n = 1024
    ratios = []
    for s in seeds(2000, code=94):
        vp = simulate_vol_model(VolModelSpec(), n, s)
        W = dds_time_change(vp.m, vp.a)
        ratios.append(np.var(np.diff(W.values[:-1]), ddof=0) / W.delta)
    assert abs(np.mean(ratios) - 1) < 0.05
