import math

import numpy as np
import pytest

from cutproject import baake_moody as BM
from cutproject import builtins as B
from cutproject import scheme as S
from cutproject.errors import ArgumentError, InsufficientDataError, NotLiftableError
from cutproject.geometry import Box, PointPatch, WeightedComb


@pytest.fixture(scope="module")
def padic():
    return BM.padic_family(2, 8, 1e4)


def v2(n):
    n = abs(int(n))
    k = 0
    while n % 2 == 0:
        n //= 2
        k += 1
    return k


def test_padic_axioms(padic):
    r = BM.verify_axioms(padic, cover_pair=(0.5, 1 / 3))
    assert r.passed
    F = r.finite_sets["0.5,0.3333333333333333"]
    assert len(F) == 2
    assert r.to_json()["passed"] is True


def test_trivial_family():
    f = BM.lattice_family(1, [0.9, 0.5, 0.25])
    assert BM.verify_axioms(f).passed
    assert set(BM.completion_coords(f, 37, 3).integers()) == {0}


def test_a3_violation_reported():
    r = BM.verify_axioms(BM.a3_violating_family())
    assert "A3" in r.failing()
    w = r.a3_witness
    assert w["sum"][0] == pytest.approx(w["t"][0] + w["s"][0])


def test_grid_must_decrease():
    p = PointPatch(np.zeros((1, 1)), Box.interval(-1, 1))
    with pytest.raises(ArgumentError):
        BM.PeriodFamily((0.2, 0.5, 0.1), (p, p, p), 1.0)
    with pytest.raises(ArgumentError):
        BM.verify_axioms(BM.PeriodFamily((0.5, 0.2), (p, p), 1.0))


def test_pseudo_metric_examples(padic):
    assert BM.pseudo_metric(padic, 12, 0) == pytest.approx(1 / 3)
    assert BM.pseudo_metric(padic, 5, 5) == 0.0
    assert BM.pseudo_metric(padic, 7, 0) == 1.0
    with pytest.raises(InsufficientDataError):
        BM.pseudo_metric(padic, 3e4, 0)


def test_pseudo_metric_closed_form(padic, rng):
    x = rng.integers(-5000, 5000, 1000)
    y = rng.integers(-5000, 5000, 1000)
    d = BM.pseudo_metric_many(padic, x, y)
    for a, b, got in zip(x, y, d):
        if a == b:
            assert got == 0.0
        elif v2(a - b) <= 7:
            assert got == 1 / (v2(a - b) + 1)


def test_pseudo_metric_triangle(padic, rng):
    x, y, z = (rng.integers(-2500, 2500, 1000) for _ in range(3))
    dxz = BM.pseudo_metric_many(padic, x, z)
    dxy = BM.pseudo_metric_many(padic, x, y)
    dyz = BM.pseudo_metric_many(padic, y, z)
    assert np.all(dxz <= dxy + dyz + BM.grid_step(padic) + 1e-12)
    assert np.array_equal(dxy, BM.pseudo_metric_many(padic, y, x))


def test_completion_digits(padic, rng):
    cm = BM.CompletionMap(padic)
    assert BM.completion_coords(padic, 11, 4).digits(2) == [1, 1, 0, 1]
    assert BM.completion_coords(padic, 0, 4).integers() == [0, 0, 0, 0]
    x = rng.integers(0, 5000, 1000)
    res = cm.coords_many(x)[:, :, 0].astype(np.int64)
    # nested residues r_i = x mod 2^(i+1) give the base-2 digits
    assert np.array_equal(res, x[:, None] % (2 ** np.arange(1, 9)))
    for xi in x[:20]:
        assert cm.coords(xi).digits(2) == [(int(xi) >> i) & 1 for i in range(8)]


def test_completion_refinement_stable(padic):
    short = BM.completion_coords(padic, 173, 3).integers()
    long = BM.completion_coords(padic, 173, 6).integers()
    assert long[:3] == short


def test_cyclic_coords():
    f = BM.lattice_family(4, [0.9, 0.5, 0.25])
    assert BM.completion_coords(f, 7, 3).integers() == [3, 3, 3]


def test_kernel_property(rng):
    f = BM.lattice_family(4, [0.9, 0.5, 0.25])
    cm = BM.CompletionMap(f)
    for x in rng.integers(-400, 400, 100):
        k = 4 * int(rng.integers(-50, 50))
        assert cm.coords(x).integers() == cm.coords(x + k).integers()


def test_depth_error(padic):
    with pytest.raises(ArgumentError):
        BM.completion_coords(padic, 3, 9)


def test_lift_delta_z():
    c = B.integers(-200, 200).as_comb()
    f = BM.lattice_family(1, [0.9, 0.5, 0.25], half_width=100)
    assert BM.lift_function(c, f, [17.0], 0.25).value == 1.0


def test_lift_tent():
    c = B.silver_tent(-2000, 2000)
    fam, _ = BM.reconstruct(c, [0.5, 0.25, 0.125], Box.interval(-300, 300))
    # x = 2 + 1*sqrt2 ... choose x with x* near 0.5: a - b sqrt2 = 0.5 approx
    s = S.silver_mean()
    best = None
    for b in range(-60, 60):
        a = round(0.5 + b * math.sqrt(2))
        xs = a - b * math.sqrt(2)
        if abs(xs - 0.5) < 0.02:
            best = (a, b)
            break
    x = best[0] + best[1] * math.sqrt(2)
    r = BM.lift_function(c, fam, [x], 0.05)
    assert abs(r.value - 0.5) <= 0.05


def test_lift_no_representative():
    c = B.integers(-20, 20).as_comb()
    f = BM.lattice_family(1, [0.9, 0.5, 0.25], half_width=10)
    with pytest.raises(InsufficientDataError):
        BM.lift_function(c, f, [0.5], 0.25)


def test_lift_not_liftable():
    x = np.arange(-20, 21.0)
    c = WeightedComb.from_points(x, np.where(x > 0, 1.0, 0.1), Box.interval(-20, 20))
    f = BM.lattice_family(1, [0.9, 0.5, 0.25], half_width=10)
    with pytest.raises(NotLiftableError):
        BM.lift_function(c, f, [3.0], 0.25)
    assert not BM.continuity_precheck(c, f)


def test_reconstruct_tent_silver():
    c = B.silver_tent(-3000, 3000)
    fam, rep = BM.reconstruct(c, [0.5, 0.25, 0.125], Box.interval(-200, 200), reference=S.silver_mean())
    assert rep.axioms.passed and rep.scheme_produced
    assert rep.reference["0.25"]["contained"]
    # monotone by construction
    for a, b in zip(fam.patches, fam.patches[1:]):
        assert np.all(a.index(1e-7).contains(b.points))


def test_reconstruct_delta_z():
    fam, rep = BM.reconstruct(B.integers(-200, 200).as_comb(), [0.5, 0.25, 0.125])
    assert rep.axioms.passed
    assert all(np.array_equal(p.x, fam.patches[0].x) for p in fam.patches)


def test_reconstruct_non_meyer_fails():
    _, rep = BM.reconstruct(B.accumulating(30).as_comb(), [0.5, 0.25, 0.125])
    assert not rep.axioms.passed and not rep.scheme_produced


def test_reconstruct_grid_range():
    with pytest.raises(ArgumentError):
        BM.reconstruct(B.integers(-20, 20).as_comb(), [1.5, 0.5, 0.25])


def test_family_save_load(tmp_path, padic):
    small = BM.padic_family(2, 4, 100)
    small.save(str(tmp_path))
    back = BM.PeriodFamily.load(str(tmp_path))
    assert back.eps_grid == small.eps_grid and back.cap == small.cap
    assert all(np.array_equal(a.points, b.points) for a, b in zip(back.patches, small.patches))
