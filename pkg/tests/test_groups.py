import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cutproject import groups as G
from cutproject.errors import ArgumentError, PrecisionError, SpecMismatchError
from cutproject.geometry import Box

SQRT2 = math.sqrt(2)

# frozen oracles
ORDER5_GAP = 1.9021130325903071  # 2 sin(2π/5)


def test_internal_add_examples():
    assert G.internal_add(G.Cyclic(4), 3, 2) == 1
    assert G.internal_add(G.PAdic(2, 3), 5, 6) == 3
    assert G.internal_add(G.Euclidean(1), np.array([0.25]), np.array([-0.25]))[0] == 0.0


def test_internal_add_mismatch():
    with pytest.raises(SpecMismatchError):
        G.internal_add(G.Cyclic(4), 1.5, 2)


def test_spec_invariants():
    with pytest.raises(ArgumentError):
        G.Cyclic(0)
    with pytest.raises(ArgumentError):
        G.PAdic(4, 3)
    with pytest.raises(ArgumentError):
        G.PAdic(2, 0)
    with pytest.raises(ArgumentError):
        G.Product(())


def test_padic_precision_guard():
    g = G.PAdic(2, 3)
    assert g.digits(5) == [1, 0, 1]
    with pytest.raises(PrecisionError):
        g.digits(5, 4)
    with pytest.raises(PrecisionError):
        G.PAdicCharacter(2, 3, 1, 4)


def test_haar_examples():
    assert G.haar_measure(G.Cyclic(4), G.ResidueWindow(4, frozenset({0, 2}))) == pytest.approx(0.5)
    assert G.haar_measure(G.PAdic(2, 3), G.CylinderWindow(2, 3, ((3, 2),))) == pytest.approx(0.25)
    assert G.haar_measure(G.Euclidean(1), G.BoxWindow.interval(-1, 1), 2 * SQRT2) == pytest.approx(0.7071068, abs=1e-7)


def test_haar_overlaps_not_double_counted():
    w = G.BoxWindow((Box((0.0,), (2.0,), closed=False), Box((1.0,), (3.0,), closed=False)))
    assert G.haar_measure(G.Euclidean(1), w) == pytest.approx(3.0)
    c = G.CylinderWindow(2, 3, ((1, 1), (3, 2)))  # 3 + 4Z_2 lies inside 1 + 2Z_2
    assert G.haar_measure(G.PAdic(2, 3), c) == pytest.approx(0.5)


def test_haar_negative_normalization():
    with pytest.raises(ArgumentError):
        G.haar_measure(G.Euclidean(1), G.BoxWindow.interval(0, 1), -1.0)


def test_char_examples():
    assert G.char_eval(G.CyclicCharacter(4, 1), 2) == pytest.approx(-1)
    assert G.char_eval(G.PAdicCharacter(2, 3, 1, 1), 3) == pytest.approx(-1)
    assert G.char_eval(G.EuclideanCharacter((0.5,)), np.array([1.0])) == pytest.approx(-1)


def test_char_mismatch():
    with pytest.raises(SpecMismatchError):
        G.char_eval(G.CyclicCharacter(4, 1), 2, G.Cyclic(5))


def test_u1_gap_examples():
    assert G.u1_subgroup_gap(3) == pytest.approx(math.sqrt(3), abs=1e-7)
    assert G.u1_subgroup_gap(2) == 2.0
    assert G.u1_subgroup_gap(5) == pytest.approx(ORDER5_GAP, abs=1e-12)
    assert G.u1_subgroup_gap(1) == 0.0
    assert G.u1_subgroup_gap("dense") == 2.0
    with pytest.raises(ArgumentError):
        G.u1_subgroup_gap(0)


def test_u1_gap_brute_force():
    for n in (3, 5, 7, 9, 12):
        z = np.exp(2j * np.pi * np.arange(n) / n)
        assert G.u1_subgroup_gap(n) == pytest.approx(np.max(np.abs(z - 1)), abs=1e-12)


def test_u1_gap_lemma_exhaustive():
    gaps = [G.u1_subgroup_gap(n) for n in range(2, 10_001)]
    assert min(gaps) >= math.sqrt(3) - 1e-12


GROUPS = [G.Euclidean(1), G.Euclidean(2), G.Cyclic(7), G.PAdic(3, 4),
          G.Product((G.Euclidean(1), G.Cyclic(5)))]


@pytest.mark.parametrize("g", GROUPS, ids=lambda g: g.variant)
@settings(max_examples=1000, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_group_laws(g, seed):
    rng = np.random.default_rng(seed)
    a, b, c = g.random(rng), g.random(rng), g.random(rng)
    add = lambda x, y: G.internal_add(g, x, y)
    tol = 1e-9
    assert g.equal(add(add(a, b), c), add(a, add(b, c)), tol)
    assert g.equal(add(a, b), add(b, a), tol)
    assert g.equal(add(a, g.zero()), a, tol)
    assert g.equal(add(a, g.neg(a)), g.zero(), tol)


@pytest.mark.parametrize("g", GROUPS, ids=lambda g: g.variant)
@settings(max_examples=1000, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_character_homomorphism(g, seed):
    rng = np.random.default_rng(seed)
    chi = G.random_character(g, rng)
    a, b = g.random(rng), g.random(rng)
    va, vb = G.char_eval(chi, a, g), G.char_eval(chi, b, g)
    vab = G.char_eval(chi, G.internal_add(g, a, b), g)
    assert abs(abs(va) - 1) <= 1e-12
    assert abs(vab - va * vb) <= 1e-10


@pytest.mark.parametrize("g", [G.Euclidean(1), G.Euclidean(2), G.Cyclic(6), G.PAdic(2, 5)], ids=lambda g: g.variant)
def test_haar_translation_invariant(g, rng):
    for _ in range(100):
        w = G.random_window(g, rng)
        h = g.random(rng)
        assert G.haar_measure(g, w.translate(h)) == pytest.approx(G.haar_measure(g, w), rel=1e-9, abs=1e-12)


def test_haar_additive_disjoint(rng):
    g = G.Euclidean(1)
    for _ in range(100):
        a, b, c = np.sort(rng.uniform(-5, 5, 3))
        w1, w2 = G.BoxWindow.interval(a, b), G.BoxWindow.interval(b, c)
        both = G.BoxWindow(w1.boxes + w2.boxes)
        assert G.haar_measure(g, both) == pytest.approx(G.haar_measure(g, w1) + G.haar_measure(g, w2))
    g = G.Cyclic(10)
    s = frozenset({1, 2, 3}); t = frozenset({5, 7})
    assert G.haar_measure(g, G.ResidueWindow(10, s | t)) == pytest.approx(
        G.haar_measure(g, G.ResidueWindow(10, s)) + G.haar_measure(g, G.ResidueWindow(10, t)))


def test_window_topology():
    w = G.BoxWindow.interval(-1, 1)
    h = np.array([[-1.0], [0.0], [1.0]])
    assert w.contains(h).tolist() == [True, True, False]
    assert w.closure_contains(h).tolist() == [True, True, True]
    assert w.interior_contains(h).tolist() == [False, True, False]


def test_group_json_round_trip():
    for g in GROUPS:
        assert G.group_from_json(g.to_json()) == g
