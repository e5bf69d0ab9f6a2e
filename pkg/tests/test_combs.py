import math

import numpy as np
import pytest

from cutproject import builtins as B
from cutproject import combs as CB
from cutproject import groups as G
from cutproject import pointset as P
from cutproject import scheme as S
from cutproject.errors import ArgumentError
from cutproject.geometry import Box, PointPatch, WeightedComb

EMPTY = WeightedComb(np.zeros((0, 1)), np.zeros(0), Box.interval(-10, 10))
HALF_OPEN_01 = Box((0.0,), (1.0,), closed=False)
HALF_OPEN_02 = Box((0.0,), (2.0,), closed=False)


def delta_z(lo=-100, hi=100):
    return B.integers(lo, hi).as_comb()


def test_sup_norm_examples():
    assert CB.sup_norm(B.dirac_minus_half(-50, 50)) == 1.0
    assert CB.sup_norm(EMPTY) == 0.0
    assert CB.sup_norm(B.silver_tent(-100, 100)) == pytest.approx(1.0)


def test_k_norm_examples():
    assert CB.k_norm(delta_z(), HALF_OPEN_01) == 1.0
    assert CB.k_norm(delta_z(), HALF_OPEN_02) == 2.0
    assert CB.k_norm(B.dirac_minus_half(-50, 50), HALF_OPEN_01) == 1.5
    with pytest.raises(ArgumentError):
        CB.k_norm(delta_z(), Box((0.0,), (0.0,)))


def test_k_norm_sweep_oracle(rng):
    c = B.dirac_minus_half(-20, 20)
    a = np.abs(c.weights)
    best = 0.0
    for t in np.linspace(-20, 19, 39001):
        m = (c.x >= t) & (c.x < t + 1)
        best = max(best, a[m].sum())
    assert CB.k_norm(c, HALF_OPEN_01) == pytest.approx(best)


def test_k_norm_2d_reports_pitch():
    c = B.lattice_z2(0, 10).as_comb()
    rec = CB.k_norm_record(c, Box((0.0, 0.0), (1.0, 1.0), closed=False))
    assert not rec["exact"] and rec["pitch"] == 0.25 and rec["value"] == 1.0


def test_domination_examples():
    assert CB.check_norm_sup_domination(delta_z(), HALF_OPEN_01) == (1.0, 1.0, True)
    assert CB.check_norm_sup_domination(B.dirac_minus_half(-50, 50), HALF_OPEN_01) == (1.0, 1.5, True)
    assert CB.check_norm_sup_domination(EMPTY, HALF_OPEN_01) == (0.0, 0.0, True)


def test_almost_periods_dirac_minus_half():
    ap = CB.almost_periods(B.dirac_minus_half(-200, 200), 0.5, "sup", Box.interval(-50, 50))
    assert np.array_equal(ap.periods.x, np.arange(-50, 51.0))


def test_almost_periods_delta_z():
    ap = CB.almost_periods(delta_z(), 0.5, "sup", Box.interval(-20, 20))
    assert np.array_equal(ap.periods.x, np.arange(-20, 21.0))
    assert ap.to_csv().splitlines()[0] == "t0,distance"
    assert ap.metadata()["count"] == 41


def test_almost_periods_trivial_warning():
    with pytest.warns(RuntimeWarning):
        CB.almost_periods(delta_z(-10, 10), 2.5, "sup", Box.interval(-3, 3))


def test_almost_periods_eps_positive():
    with pytest.raises(ArgumentError):
        CB.almost_periods(delta_z(), 0.0)


def test_tent_almost_periods_contain_model_set():
    c = B.silver_tent(-300, 300)
    search = Box.interval(-40, 40)
    ap = CB.almost_periods(c, 0.25, "sup", search)
    ball = S.model_set(S.silver_mean(), G.BoxWindow.interval(-0.25, 0.25), search)
    ball = ball.points[np.abs(np.asarray(S.star_values(S.silver_mean(), ball.coords), float)).ravel() < 0.25 - 1e-9]
    assert len(ball) > 5
    assert np.all(ap.contains(ball))


def test_almost_period_axioms():
    c = B.silver_tent(-300, 300)
    search = Box.interval(-30, 30)
    e1, e2 = 0.2, 0.3
    p1 = CB.almost_periods(c, e1, "sup", search).periods.x
    p2 = CB.almost_periods(c, e2, "sup", search).periods.x
    # A1: 0 and symmetry
    assert 0.0 in p1 and np.allclose(np.sort(p1), np.sort(-p1))
    s = (p1[:, None] + p2[None, :]).ravel()
    s = s[np.abs(s) <= 30]
    d = CB.sup_distances(c, s[:, None])
    assert np.all(d < e1 + e2 + 1e-12)


def test_k_almost_periods_are_sup_almost_periods():
    c = B.silver_tent(-200, 200)
    search = Box.interval(-20, 20)
    K = Box((0.0,), (1.0,), closed=False)
    pk = CB.almost_periods(c, 0.3, ("k", K), search)
    ps = CB.almost_periods(c, 0.3, "sup", search)
    assert np.all(ps.contains(pk.periods.points))


def test_sup_inside_k_with_occupancy():
    c = B.silver_tent(-200, 200)
    search = Box.interval(-20, 20)
    K = Box((0.0,), (1.0,), closed=False)
    N = P.occupancy(c.support(), 1.0)
    eps = 0.4
    ps = CB.almost_periods(c, eps / (2 * N), "sup", search)
    pk = CB.almost_periods(c, eps, ("k", K), search)
    assert np.all(pk.contains(ps.periods.points))


def test_ssam_only_lattice_periods():
    c = B.ssam(-12, 12)
    search = Box((-4.0, -4.0), (4.0, 4.0))
    ap = CB.almost_periods(c, 0.4, "sup", search)
    expect = np.array([[k, 0.0] for k in range(-4, 5)])
    assert ap.periods.same_points(PointPatch(expect, search))


def test_classify_examples():
    cl = CB.classify_dirac_comb(B.periodic_5z01(-200, 200), 0.5)
    assert cl.kind == "fully_periodic_crystal"
    assert cl.lattice == [[5.0]] and sorted(x[0] for x in cl.F) == [0.0, 1.0]
    cl = CB.classify_dirac_comb(B.silver_patch(-200, 200), 0.5)
    assert cl.kind == "not_sup_almost_periodic" and cl.periods == [[0.0]]
    cl = CB.classify_dirac_comb(B.lattice_z2(-10, 10), 0.9)
    assert cl.kind == "fully_periodic_crystal" and cl.F == [[0.0, 0.0]]
    assert sorted(map(tuple, cl.lattice)) == [(0.0, 1.0), (1.0, 0.0)]


def test_classify_errors():
    with pytest.raises(ArgumentError):
        CB.classify_dirac_comb(B.integers(0, 10), 1.0)
    assert CB.classify_dirac_comb(B.integers(0, 10), 0.5, Box.interval(-20, 20)).kind == "indeterminate"


def test_difference_comb_safe_overlap():
    c = delta_z(0, 10)
    d = CB.difference_comb(c, [1.0])
    assert d.region.to_json()["lower"] == [1.0] and CB.sup_norm(d) == 0.0
    assert CB.difference_comb(c, [20.0]) is None
