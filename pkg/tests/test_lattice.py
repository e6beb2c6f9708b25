import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from mixclt.lattice import (DobrushinSystem, LatticeFunction, LatticePotential, WindowError, apply_T,
                            c_V_squared, compensator_v, cross_bracket_g, cumulative_H,
                            mu_v_all_formulas, potential_G)

DIPOLE = {0: -1.0, 1: 1.0}


def pot(d):
    return LatticePotential.from_dict(d)


@st.composite
def zero_sum_potentials(draw):
    """Integer values in [-5, 5] on a subset of [-10, 10], adjusted to sum to zero."""
    lo = draw(st.integers(-10, 9))
    hi = draw(st.integers(lo + 1, 10))
    vals = draw(st.lists(st.integers(-5, 5), min_size=hi - lo + 1, max_size=hi - lo + 1))
    # push the excess onto points that can absorb it without leaving [-5, 5]
    excess = sum(vals)
    for i in range(len(vals)):
        if excess == 0:
            break
        step = max(-5 - vals[i], min(5 - vals[i], -excess))
        vals[i] += step
        excess += step
    if excess != 0 or not any(vals):
        vals = [1] + [0] * (hi - lo - 1) + [-1]
    return LatticePotential(lo, vals)


# -- potential type ---------------------------------------------------------

def test_trimming_and_support():
    V = LatticePotential(-2, [0, 0, 3, 0, -3, 0])
    assert (V.lo, V.hi) == (0, 2)
    assert V.values.tolist() == [3, 0, -3]
    assert V.zero_sum


def test_rejects_zero_and_nonfinite():
    with pytest.raises(ValueError):
        LatticePotential(0, [0, 0])
    with pytest.raises(ValueError):
        LatticePotential(0, [1, np.nan])


def test_text_round_trip():
    V = LatticePotential(-1, [1, -2, 1])
    W = LatticePotential.from_text(V.to_text())
    assert (W.lo, W.values.tolist()) == (V.lo, V.values.tolist())
    W = LatticePotential.from_text("0 1\n-1 1\n")
    assert (W.lo, W.hi, W.values.tolist()) == (0, 1, [-1.0, 1.0])


def test_text_length_mismatch():
    with pytest.raises(ValueError):
        LatticePotential.from_text("0 2\n1 -1\n")


# -- H and G ----------------------------------------------------------------

def test_H_dipole():
    H = cumulative_H(pot(DIPOLE))
    assert [H(x) for x in (0, 1, 2)] == [0, -1, 0]


def test_H_single_point():
    V = pot({0: 1.0})
    assert cumulative_H(V)(1) == 1 == V.mu


def test_H_gap():
    assert cumulative_H(pot({0: -1.0, 2: 1.0})).as_dict() == {0: 0, 1: -1, 2: -1, 3: 0}


def test_G_dipole():
    G, c = potential_G(pot(DIPOLE))
    assert (G(0), G(1), c) == (-1, 1, 1)
    assert G(5) == c and G(-7) == -c


def test_G_symmetric():
    V = {-1: 1.0, 0: -2.0, 1: 1.0}
    G, c = potential_G(pot(V))
    assert c == 0
    for x in range(-6, 7):
        assert G(x) == G(-x) == oracles.G(V, x)


def test_G_affine_when_not_zero_sum():
    V = {0: 1.0, 3: 2.0}
    G, _ = potential_G(pot(V))
    for x in range(-8, 12):
        assert G(x) == pytest.approx(oracles.G(V, x))


# -- T ----------------------------------------------------------------------

def test_T_identity_preserved():
    f = LatticeFunction(0, np.arange(0, 6, dtype=float), 1.0, 1.0)
    Tf = apply_T(f, -3, 9)
    assert np.array_equal(Tf.values, np.arange(-3, 10))


def test_T_constant():
    f = LatticeFunction(0, np.full(4, 2.5))
    assert np.all(apply_T(f, -2, 6).values == 2.5)


def test_TG_dipole():
    G, _ = potential_G(pot(DIPOLE))
    TG = apply_T(G, 0, 1)
    assert TG(0) == G(0) + 1 == 0
    assert TG(1) == G(1) - 1 == 0


def test_T_window_underflow():
    f = LatticeFunction(0, np.ones(3), None, None)
    with pytest.raises(WindowError):
        apply_T(f, 0, 2)
    assert apply_T(f, 1, 1)(1) == 1


# -- v, mu_v, c_V^2, g ------------------------------------------------------

@pytest.mark.parametrize("V, total", [(DIPOLE, 2.0), ({0: -1.0, 2: 1.0}, 6.0)])
def test_v_sum(V, total):
    assert compensator_v(pot(V)).values.sum() == pytest.approx(total, abs=1e-12)


def test_v_nonnegative_and_brute():
    V = pot(DIPOLE)
    v = compensator_v(V)
    for x in range(-5, 7):
        assert v(x) >= 0
        assert v(x) == pytest.approx(oracles.v(DIPOLE, x), abs=1e-12)


def test_v_formulas_agree():
    V = pot({-2: 1.5, 0: -4.0, 3: 2.5})
    assert np.allclose(compensator_v(V).values, compensator_v(V, "expanded").values, atol=1e-12)


def test_v_tail_when_not_zero_sum():
    V = {0: 1.0, 2: 1.0}
    v = compensator_v(pot(V))
    for x in (-5, -1, 0, 1, 2, 3, 8):
        assert v(x) == pytest.approx(oracles.v(V, x))
    assert v(50) == pytest.approx(4.0)


@pytest.mark.parametrize("a", [1, 2, 3, 4, 5])
def test_mu_v_dipole_family(a):
    mu = mu_v_all_formulas(pot({0: -1.0, a: 1.0}))
    assert mu.direct == mu.squares == mu.dobrushin == 4 * a - 2


def test_mu_v_symmetric_agree():
    V = {-1: 1.0, 0: -2.0, 1: 1.0}
    mu = mu_v_all_formulas(pot(V))
    brute = sum(oracles.v(V, x) for x in oracles.window(V, 3))
    assert mu.direct == pytest.approx(brute) and mu.squares == pytest.approx(brute)
    assert mu.dobrushin == pytest.approx(brute)


def test_zero_sum_ops_reject():
    V = pot({0: 1.0, 1: 1.0})
    for op in (mu_v_all_formulas, c_V_squared, cross_bracket_g):
        with pytest.raises(ValueError):
            op(V)


@pytest.mark.parametrize("V, c2", [(DIPOLE, 2.0), ({0: -1.0, 2: 1.0}, 4.0)])
def test_c_V_squared(V, c2):
    V = pot(V)
    assert c_V_squared(V) == c2 == c_V_squared(V, "pairs")


def test_two_c_sq_identity_dipole():
    V = pot(DIPOLE)
    assert 2 * c_V_squared(V) == mu_v_all_formulas(V).direct + V.sum_sq == 4


def test_g_dipole():
    g = cross_bracket_g(pot(DIPOLE))
    for x in range(-8, 10):
        assert g(x) == pytest.approx(oracles.g(DIPOLE, x), abs=1e-12)
    assert g(40) == 0 and g(-40) == 0


def test_g_antisymmetric():
    V = {-1: 1.0, 0: -2.0, 1: 1.0}
    g = cross_bracket_g(pot(V))
    for x in range(-6, 7):
        assert g(-x) == pytest.approx(-g(x), abs=1e-12)
        assert g(x) == pytest.approx(oracles.g(V, x), abs=1e-12)


def test_system_and_report():
    sys = DobrushinSystem.build(pot(DIPOLE))
    assert sys.mu_v == 2 and sys.c_V_sq == 2 and sys.c == 1 and sys.max_abs_G == 1
    rep = sys.report()
    assert rep["mu_v"] == 2 and rep["mu_v_formulas"]["dobrushin"] == 2
    assert rep["v"]["values"] == [0.0, 1.0, 1.0, 0.0]
    nz = DobrushinSystem.build(pot({0: 1.0}))
    assert nz.mu_v is None and "mu_v" not in nz.report()


# -- properties -------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(zero_sum_potentials())
def test_identities_random(V):
    tol = 1e-9
    mu = mu_v_all_formulas(V)
    assert abs(mu.direct - mu.squares) < tol and abs(mu.direct - mu.dobrushin) < tol
    c1, c2 = c_V_squared(V), c_V_squared(V, "pairs")
    assert abs(c1 - c2) < tol
    assert abs(2 * c1 - mu.direct - V.sum_sq) < tol
    v = compensator_v(V)
    assert np.all(v.values >= -tol)
    G, _ = potential_G(V)
    TG = apply_T(G, V.lo, V.hi)
    assert np.allclose(TG.values, G.on(V.lo, V.hi) - V.values, atol=tol, rtol=0)


@settings(max_examples=60, deadline=None)
@given(zero_sum_potentials(), st.floats(-4, 4).filter(lambda x: abs(x) > 1e-3))
def test_quadratic_scaling(V, lam):
    a, b = mu_v_all_formulas(V), mu_v_all_formulas(V.scaled(lam))
    for x, y in zip(a, b):
        assert y == pytest.approx(lam * lam * x, rel=1e-9, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(zero_sum_potentials(), st.integers(-50, 50))
def test_translation_invariance(V, k):
    W = V.shifted(k)
    assert mu_v_all_formulas(W).squares == pytest.approx(mu_v_all_formulas(V).squares, abs=1e-9)
    assert c_V_squared(W) == pytest.approx(c_V_squared(V), abs=1e-9)
    assert W.sum_sq == V.sum_sq


@settings(max_examples=60, deadline=None)
@given(zero_sum_potentials())
def test_v_is_g_squared(V):
    # with f(x) = x, T(fG) - f TG is the centred difference of G, whose square is v
    v, g = compensator_v(V), cross_bracket_g(V)
    xs = np.arange(V.lo - 3, V.hi + 4)
    assert np.allclose(v(xs), g(xs) ** 2, atol=1e-9)
