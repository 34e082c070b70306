import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusmfg.checks import project_bruteforce
from torusmfg.feasible import is_feasible, project_K, simplex_threshold
from torusmfg.grid import GridSpec, StatePair, inner_l2, mass


def proj(m, g):
    return project_K(StatePair(np.asarray(m, dtype=float), g.zeros()), g).m


def test_feasible_input_unchanged():
    g = GridSpec(2, 4)
    u = np.arange(16.0).reshape(4, 4)
    z = project_K(StatePair(g.constant(1), u), g)
    np.testing.assert_array_equal(z.m, 1.0)
    np.testing.assert_array_equal(z.u, u)


def test_hand_examples():
    g = GridSpec(1, 2)
    np.testing.assert_array_equal(proj([4.0, 0.0], g), [2.0, 0.0])
    np.testing.assert_array_equal(proj([0.0, 0.0], g), [1.0, 1.0])


def test_hand_example_matches_kkt_enumeration():
    # the hyperplane projection (3, -1) is infeasible; the thresholded (2, 0) is optimal
    np.testing.assert_allclose(project_bruteforce(np.array([4.0, 0.0]), 0.5), [2.0, 0.0])


def test_matches_bruteforce(rng):
    for n_nodes in range(1, 7):
        g = GridSpec(1, max(n_nodes, 2))
        for _ in range(30):
            m = rng.normal(1.0, 2.0, size=g.shape)
            np.testing.assert_allclose(proj(m, g), project_bruteforce(m, g.cell_volume), rtol=0, atol=1e-12)


def test_threshold():
    y = np.array([3.0, 1.0, -2.0])
    t = simplex_threshold(y, 2.0)
    assert np.sum(np.maximum(y - t, 0)) == pytest.approx(2.0)


finite = st.floats(-50, 50, allow_nan=False)


@settings(max_examples=200)
@given(st.lists(finite, min_size=9, max_size=9))
def test_idempotent_and_feasible(vals):
    g = GridSpec(2, 3)
    m = np.array(vals).reshape(g.shape)
    p1 = proj(m, g)
    assert p1.min() >= 0
    assert abs(mass(p1, g) - 1) <= 1e-12
    np.testing.assert_array_equal(proj(p1, g), p1)


@settings(max_examples=200)
@given(st.lists(finite, min_size=8, max_size=8), st.lists(finite, min_size=8, max_size=8))
def test_nonexpansive(a, b):
    g = GridSpec(1, 8)
    a, b = np.array(a), np.array(b)
    d_in = inner_l2(a - b, a - b, g)
    pa, pb = proj(a, g), proj(b, g)
    assert inner_l2(pa - pb, pa - pb, g) <= d_in * (1 + 1e-12) + 1e-24


def test_variational_characterization(rng):
    g = GridSpec(2, 6)
    for _ in range(5):
        m = rng.normal(0.5, 3.0, size=g.shape)
        p = proj(m, g)
        for _ in range(1000 // 5):
            w = rng.exponential(size=g.shape)
            w /= mass(w, g)
            assert inner_l2(m - p, w - p, g) <= 1e-10


def test_is_feasible():
    g = GridSpec(1, 4)
    assert is_feasible(StatePair(g.constant(1), g.zeros()), g).feasible
    rep = is_feasible(StatePair(np.array([1.1, -0.1, 1.0, 2.0]), g.zeros()), g)
    assert not rep.feasible and rep.min_density == pytest.approx(-0.1)
    rep = is_feasible(StatePair(g.constant(2), g.zeros()), g)
    assert not rep.feasible and rep.mass_error == pytest.approx(1.0)


def test_nonfinite_rejected():
    g = GridSpec(1, 3)
    with pytest.raises(ValueError):
        project_K(StatePair(np.array([1.0, np.nan, 1.0]), g.zeros()), g)
