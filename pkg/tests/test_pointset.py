import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cutproject import builtins as B
from cutproject import combs as CB
from cutproject import groups as G
from cutproject import pointset as P
from cutproject import scheme as S
from cutproject.errors import InsufficientDataError, WitnessUnavailableError
from cutproject.geometry import Box, PointPatch

SQRT2 = math.sqrt(2)

# frozen oracles
MINKOWSKI_014 = [-4, -3, -1, 0, 1, 3, 4]
ACCUM_MIN_GAP = 1 / 31  # n = 30: consecutive k/(n+1) differ by 1/31
SILVER_RADIUS_0_1000 = (1 + SQRT2) / 2
D_5Z01 = [-6, -5, -4, -1, 0, 1, 4, 5, 6]


def patch(xs, lo, hi):
    return PointPatch.from_points(np.array(xs, dtype=float), Box.interval(lo, hi))


def test_minkowski_examples():
    a = patch([0, 1, 4], -5, 5)
    assert P.minkowski(a, [-1], [a], Box.interval(-5, 5)).x.tolist() == MINKOWSKI_014
    lam = B.silver_patch(0, 50)
    z = patch([0.0], -1, 1)
    assert P.minkowski(lam, [1], [z], lam.region).same_points(lam)
    d = P.minkowski(lam, [-1], [lam], Box.interval(-10, 10))
    assert P.min_gap(d.points) >= SQRT2 - 1 - 1e-9
    # brute force
    x = lam.x
    bf = np.unique(np.round((x[:, None] - x[None, :]).ravel(), 9))
    bf = bf[(bf >= -10) & (bf <= 10)]
    assert np.allclose(d.x, bf)


def test_minkowski_empty_operand():
    a = patch([0, 1], -5, 5)
    e = PointPatch(np.zeros((0, 1)), Box.interval(-5, 5))
    assert len(P.minkowski(a, [1], [e], Box.interval(-5, 5))) == 0


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=1, max_size=5, unique=True),
       st.lists(st.integers(-6, 6), min_size=1, max_size=5, unique=True),
       st.lists(st.integers(-6, 6), min_size=1, max_size=5, unique=True))
def test_minkowski_assoc_comm(a, b, c):
    R = Box.interval(-30, 30)
    A, Bp, C = (patch(v, -30, 30) for v in (a, b, c))
    ab = P.minkowski(A, [1], [Bp], R)
    ba = P.minkowski(Bp, [1], [A], R)
    assert ab.same_points(ba)
    left = P.minkowski(ab, [1], [C], R)
    right = P.minkowski(A, [1], [P.minkowski(Bp, [1], [C], R)], R)
    both = P.minkowski(A, [1, 1], [Bp, C], R)
    assert left.same_points(right) and left.same_points(both)


def test_uniform_discreteness():
    assert P.is_uniformly_discrete(B.integers(0, 100)) == (True, 1.0)
    ud, gap = P.is_uniformly_discrete(B.accumulating(30), 0.05)
    assert not ud and gap == pytest.approx(ACCUM_MIN_GAP, abs=1e-12)
    assert P.is_uniformly_discrete(PointPatch(np.zeros((0, 1)), Box.interval(0, 1))) == (True, math.inf)


def test_covering_radius():
    assert P.covering_radius(B.integers(0, 100), margin=1) == pytest.approx(0.5)
    r = P.covering_radius(B.silver_patch(0, 1000))
    assert r == pytest.approx(SILVER_RADIUS_0_1000, abs=1e-6)
    assert P.covering_radius(patch([0.0], 0, 100)) == pytest.approx(100)
    assert P.covering_radius(PointPatch(np.zeros((0, 1)), Box.interval(0, 1))) == math.inf


def test_covering_radius_2d():
    r = P.covering_radius(B.lattice_z2(0, 20), margin=1)
    assert r == pytest.approx(math.sqrt(2) / 2, abs=1e-2)


def test_flc():
    ok, D = P.flc_clusters(B.periodic_5z01(0, 500), Box.interval(-6, 6))
    assert ok and D.x.tolist() == D_5Z01
    ok, _ = P.flc_clusters(B.accumulating(30), Box.interval(-2, 2))
    assert not ok
    ok, D = P.flc_clusters(patch([3.0], 0, 10), Box.interval(-2, 2))
    assert ok and D.x.tolist() == [0.0]


def test_covering_witness():
    w = P.covering_witness(B.integers(0, 20), B.periodic_5z01(0, 20).restrict(Box.interval(0, 20)) if False else
                           PointPatch.from_points(np.arange(0, 21, 2.0), Box.interval(0, 20)))
    assert w.verified and sorted(w.F.x.tolist()) == [0.0, 1.0]
    a = B.silver_patch(0, 500)
    b = B.silver_patch(0, 500, 0.5)
    w = P.covering_witness(a, b)
    assert w.verified and len(w.F) <= 3
    w = P.covering_witness(a, a)
    assert w.F.x.tolist() == [0.0]


def test_covering_witness_unavailable():
    with pytest.raises(WitnessUnavailableError):
        P.covering_witness(B.integers(0, 20), patch([0.0, 1.0], 0, 20))


def test_meyer_battery():
    r = P.meyer_test(B.silver_patch(0, 2000))
    assert r.verdict == "pass" and len(r.almost_lattice_witness) <= 5
    r = P.meyer_test(B.integers(0, 2000))
    assert r.verdict == "pass" and r.almost_lattice_witness == [[0.0]]
    r = P.meyer_test(B.accumulating(30))
    assert r.verdict == "fail" and "flc" in r.failing
    assert "verdict" in r.table()


def test_meyer_report_invariants():
    r = P.meyer_test(B.silver_patch(0, 2000))
    assert r.min_gap <= r.covering_radius
    assert all([r.uniformly_discrete, r.relatively_dense, r.flc, r.triple_diff_locally_finite, r.almost_lattice_ok])
    j = r.to_json()
    assert j["verdict"] == "pass"


def test_meyer_insufficient():
    with pytest.raises(InsufficientDataError):
        P.meyer_test(B.silver_patch(0, 6))


@pytest.mark.parametrize("shift", [-1234.5, 0.37, 999.0])
def test_meyer_translation_invariant(shift):
    p = B.silver_patch(0, 1000)
    assert P.meyer_test(p.shift([shift])).verdict == P.meyer_test(p).verdict == "pass"


@pytest.mark.parametrize("c", [0.5, 1.0, 1.7])
def test_model_sets_are_meyer(c):
    p = S.model_set(S.silver_mean(), G.BoxWindow.interval(-c, c), Box.interval(0, 1500))
    assert P.meyer_test(p).verdict == "pass"


def test_period_lattice():
    g = P.period_lattice(B.periodic_5z01(-500, 500), Box.interval(-50, 50))
    assert len(g) == 1 and g[0][0] == pytest.approx(5.0)
    g = P.period_lattice(B.dirac_minus_half(-200, 200), Box.interval(-20, 20))
    assert len(g) == 1 and g[0][0] == pytest.approx(1.0)
    assert P.period_lattice(B.silver_patch(-500, 500), Box.interval(-100, 100)) == []


def test_period_lattice_generators_are_periods():
    c = B.dirac_minus_half(-200, 200)
    for t in P.period_lattice(c, Box.interval(-20, 20), tol=1e-9):
        assert CB.sup_distance(c, t) <= 1e-9


def test_occupancy():
    assert P.occupancy(B.integers(0, 50)) == 1
    assert P.occupancy(B.periodic_5z01(0, 50), side=2.0) == 2
