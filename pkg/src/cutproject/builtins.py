"""Named point sets and combs used by the CLI and the tests."""
from __future__ import annotations

import math

import numpy as np

from . import groups as G
from . import scheme as S
from .errors import CatalogError
from .geometry import Box, PointPatch, WeightedComb


def integers(lo: float, hi: float) -> PointPatch:
    """Z ∩ [lo, hi]."""
    n = np.arange(math.ceil(lo), math.floor(hi) + 1)
    return PointPatch(n.reshape(-1, 1).astype(float), Box.interval(lo, hi), n.reshape(-1, 1))


def lattice_z2(lo: float, hi: float) -> PointPatch:
    n = np.arange(math.ceil(lo), math.floor(hi) + 1)
    g = np.stack(np.meshgrid(n, n, indexing="ij"), axis=-1).reshape(-1, 2)
    return PointPatch(g.astype(float), Box((lo, lo), (hi, hi)), g)


def periodic_5z01(lo: float, hi: float) -> PointPatch:
    """5Z + {0, 1}."""
    m = np.arange(math.floor(lo / 5) - 1, math.ceil(hi / 5) + 2) * 5
    x = np.concatenate([m, m + 1]).astype(float)
    return PointPatch.from_points(x, Box.interval(lo, hi))


def accumulating(nmax: int = 30) -> PointPatch:
    """{n + k/(n+1) : 0 <= k <= n-1, 1 <= n <= nmax}: locally finite, not uniformly discrete."""
    pts = [n + k / (n + 1) for n in range(1, nmax + 1) for k in range(n)]
    return PointPatch(np.array(pts).reshape(-1, 1), Box.interval(1.0, nmax + 1.0, closed=False))


def dirac_minus_half(lo: float, hi: float) -> WeightedComb:
    """δ_Z - ½ δ_{π+Z}."""
    n = np.arange(math.floor(lo) - 4, math.ceil(hi) + 5)
    region = Box.interval(lo, hi)
    a = WeightedComb.from_points(n.astype(float), 1.0, region)
    b = WeightedComb.from_points(n + math.pi, -0.5, region)
    return WeightedComb.sum([a, b], region)


def ssam(lo: float, hi: float) -> WeightedComb:
    """δ_{Z²} + δ_{(Z × πZ) + (1/2, 0)} on [lo, hi]²."""
    region = Box((lo, lo), (hi, hi))
    n = np.arange(math.floor(lo) - 1, math.ceil(hi) + 2)
    g = np.stack(np.meshgrid(n, n, indexing="ij"), axis=-1).reshape(-1, 2).astype(float)
    m = np.arange(math.floor(lo / math.pi) - 1, math.ceil(hi / math.pi) + 2)
    h = np.stack(np.meshgrid(n + 0.5, m * math.pi, indexing="ij"), axis=-1).reshape(-1, 2)
    a = WeightedComb.from_points(g, 1.0, region)
    b = WeightedComb.from_points(h, 1.0, region)
    return WeightedComb.sum([a, b], region)


def silver_patch(lo: float, hi: float, c: float = 1.0) -> PointPatch:
    """Silver-mean model set with window [-c, c)."""
    return S.model_set(S.silver_mean(), G.BoxWindow.interval(-c, c), Box.interval(lo, hi))


def silver_tent(lo: float, hi: float, radius: float = 1.0) -> WeightedComb:
    return S.weighted_comb(S.silver_mean(), S.tent(radius), Box.interval(lo, hi))


POINTSETS = {
    "integers": integers,
    "z2": lattice_z2,
    "periodic_5z01": periodic_5z01,
    "accumulating": lambda lo=None, hi=None: accumulating(),
    "silver": silver_patch,
}

COMBS = {
    "dirac_minus_half": dirac_minus_half,
    "ssam": ssam,
    "silver_tent": silver_tent,
    "integers": lambda lo, hi: integers(lo, hi).as_comb(),
}


def pointset(name: str, lo: float = 0.0, hi: float = 100.0) -> PointPatch:
    try:
        return POINTSETS[name](lo, hi)
    except KeyError:
        raise CatalogError(f"unknown builtin point set {name!r}") from None


def comb(name: str, lo: float = 0.0, hi: float = 100.0) -> WeightedComb:
    try:
        return COMBS[name](lo, hi)
    except KeyError:
        raise CatalogError(f"unknown builtin comb {name!r}") from None
