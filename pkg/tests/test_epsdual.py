import math

import numpy as np
import pytest

from cutproject import builtins as B
from cutproject import diffraction as D
from cutproject import epsdual as E
from cutproject import scheme as S
from cutproject.errors import ArgumentError
from cutproject.geometry import Box, PointPatch

Z100_HALF_WIDTH = math.asin(0.1) / (100 * math.pi)  # 3.1888e-4


@pytest.fixture(scope="module")
def z100():
    return B.integers(-100, 100)


def test_deviation_closed_form(z100):
    k = np.array([[0.0], [0.5], [1e-3], [1.0]])
    d = E.deviation(z100.points, k)
    assert d[0] == 0.0 and d[1] == pytest.approx(2.0) and d[3] == pytest.approx(0.0, abs=1e-12)
    brute = np.max(np.abs(np.exp(2j * np.pi * 1e-3 * z100.x) - 1))
    assert d[2] == pytest.approx(brute, rel=1e-12)


def test_z_patch_component(z100):
    cs = E.eps_dual(z100, 0.2, Box.interval(-0.6, 0.6), 1e-5, refine=True)
    assert len(cs.components) == 1
    a, b = cs.components[0]
    assert b == pytest.approx(Z100_HALF_WIDTH, rel=1e-3) and a == pytest.approx(-b, rel=1e-9)
    assert not np.any(np.abs(np.abs(cs.frequencies.x) - 0.5) < 0.05)
    assert np.all(cs.deviations <= 0.2)


def test_z_patch_brute_force_pitch(z100):
    cs = E.eps_dual(z100, 0.2, Box.interval(-1e-3, 1e-3), 1e-6)
    grid = np.arange(-1000, 1001) * 1e-6
    dev = np.max(np.abs(np.exp(2j * np.pi * np.outer(grid, z100.x)) - 1), axis=1)
    assert np.allclose(cs.frequencies.x, grid[dev <= 0.2])


def test_single_point_full():
    p = PointPatch(np.zeros((1, 1)), Box.interval(-1, 1))
    box = Box.interval(-2, 2)
    cs = E.eps_dual(p, 0.1, box, 0.01)
    assert len(cs) == len(E.frequency_grid(box, 0.01))
    assert E.dual_inclusion_checks(p, 0.1, box, 0.01).passed


def test_eps_errors(z100):
    with pytest.raises(ArgumentError):
        E.eps_dual(z100, 0.0, Box.interval(-1, 1), 0.01)
    with pytest.raises(ArgumentError):
        E.eps_dual(z100, 0.1, Box.interval(-1, 1), 0.0)
    with pytest.warns(RuntimeWarning):
        E.eps_dual(z100, 2.0, Box.interval(-0.1, 0.1), 0.01)


def test_silver_dual_proximity():
    p = B.silver_patch(0, 500)
    cs = E.eps_dual(p, 0.3, Box.interval(-6, 6), 1e-3, refine=True)
    c = cs.centers().ravel()
    assert len(c) >= 3
    pts, _, _ = D.dual_candidates(S.silver_mean(), Box.interval(-7, 7), 1.0)
    assert np.all(np.min(np.abs(c[:, None] - pts.ravel()[None, :]), axis=1) <= 1e-3)


def test_symmetry_and_zero(z100):
    cs = E.eps_dual(z100, 0.3, Box.interval(-1.5, 1.5), 1e-4)
    x = cs.frequencies.x
    assert 0.0 in x
    assert np.allclose(np.sort(x), np.sort(-x))


def test_inclusions_z(z100):
    r = E.dual_inclusion_checks(z100, 0.1, Box.interval(-1.5, 1.5), 1e-5, eps2=0.1)
    assert r.sum_inclusion and r.sum_pairs > 0
    assert r.dms3_dual_in_delta and r.dms3_delta_in_bidual
    assert r.uniformly_discrete and r.passed


def test_silver_gap_positive():
    p = B.silver_patch(0, 500)
    r = E.dual_inclusion_checks(p, 0.4, Box.interval(-12, 12), 1e-3)
    assert r.uniformly_discrete and 0 < r.component_gap < math.inf


def test_large_eps_logged(z100):
    r = E.dual_inclusion_checks(z100, 0.9, Box.interval(-1.2, 1.2), 1e-4)
    assert r.uniformly_discrete is None and r.observations


def test_monotone_in_eps(z100):
    box = Box.interval(-1.2, 1.2)
    small = E.eps_dual(z100, 0.1, box, 1e-5)
    big = E.eps_dual(z100, 0.3, box, 1e-5)
    assert np.all(big.frequencies.index(1e-12).contains(small.frequencies.points))


def test_anti_monotone_in_patch():
    box = Box.interval(-3, 3)
    p = B.silver_patch(-100, 300)
    small = E.eps_dual(p.restrict(Box.interval(0, 200)), 0.3, box, 1e-3)
    big = E.eps_dual(p, 0.3, box, 1e-3)
    assert len(big) <= len(small)
    assert np.all(small.frequencies.index(1e-12).contains(big.frequencies.points))


def test_lattice_dual_exact():
    p = B.integers(-300, 300)
    d = E.deviation(p.points, np.arange(-5, 6.0).reshape(-1, 1))
    assert np.all(d <= 1e-12)
    p2 = B.lattice_z2(-20, 20)
    d2 = E.deviation(p2.points, np.array([[1.0, 0.0], [2.0, -3.0], [0.0, 0.0]]))
    assert np.all(d2 <= 1e-12)


def test_harmonious_z():
    out = E.harmonious_check(B.integers(-100, 100), [0.1, 0.5, 1.0], pitch=1e-4)
    for v in out:
        assert v.verdict == "harmonious-evidence"
        assert v.radius == pytest.approx(0.5, abs=0.01)


def test_harmonious_silver():
    out = E.harmonious_check(B.silver_patch(-50, 50), [0.25, 0.5], pitch=1e-4)
    assert all(v.verdict == "harmonious-evidence" and np.isfinite(v.radius) for v in out)


def test_harmonious_growth_accumulating():
    small = E.harmonious_check(B.accumulating(3), [0.25], half_width=32, pitch=1e-3)[0]
    big = E.harmonious_check(B.accumulating(8), [0.25], half_width=32, pitch=1e-3)[0]
    assert big.radius > 2 * small.radius


def test_harmonious_translation_invariant():
    p = B.silver_patch(-50, 50)
    a = E.harmonious_check(p, [0.5], pitch=1e-4)[0]
    b = E.harmonious_check(p.shift([123.25]), [0.5], pitch=1e-4)[0]
    assert a.verdict == b.verdict


def test_csv_and_metadata(z100):
    cs = E.eps_dual(z100, 0.2, Box.interval(-0.01, 0.01), 1e-4, refine=True)
    assert cs.to_csv().splitlines()[0] == "k0,max_deviation"
    assert cs.metadata()["patch_size"] == 201
