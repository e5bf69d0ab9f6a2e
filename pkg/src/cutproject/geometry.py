"""Boxes, finite point patches and finite weighted Dirac combs in R^d.

Every object here is a truncation of an infinite point set or measure:
it carries the region on which it is trusted.  Arrays are stored
read-only and points are kept in lexicographic order so that every
derived result is deterministic.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .config import DEFAULT
from .errors import ArgumentError


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _coords(c, n: int) -> np.ndarray:
    c = np.asarray(c, dtype=np.int64)
    if n == 0:
        return c.reshape(0, c.shape[-1] if c.ndim > 1 else 0)
    return c.reshape(n, -1)


def as_points(points, dim: Optional[int] = None) -> np.ndarray:
    """Coerce to a float array of shape (n, d)."""
    a = np.asarray(points, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a.reshape(-1, 1) if dim in (None, 1) else a.reshape(-1, dim)
    if dim is not None and a.shape[1] != dim:
        raise ArgumentError(f"expected points of dimension {dim}, got {a.shape[1]}")
    return a


def quantize(points: np.ndarray, tol: float = DEFAULT.equality) -> np.ndarray:
    """Integer keys of points on a grid of pitch ``tol`` (dedup / lookup)."""
    return np.round(np.asarray(points, dtype=float) / tol).astype(np.int64)


def unique_points(points: np.ndarray, tol: float = DEFAULT.equality, return_index: bool = False):
    """Lexicographically sorted unique rows, merging points closer than ``tol``."""
    points = as_points(points)
    if len(points) == 0:
        return (points, np.empty(0, dtype=np.int64)) if return_index else points
    keys = quantize(points, tol)
    order = np.lexsort(keys.T[::-1])
    ks = keys[order]
    first = np.ones(len(ks), dtype=bool)
    first[1:] = np.any(ks[1:] != ks[:-1], axis=1)
    idx = order[first]
    out = points[idx]
    return (out, idx) if return_index else out


@dataclass(frozen=True)
class Box:
    """Axis-parallel box; closed ``[lo, hi]`` unless ``closed`` is False (``[lo, hi)``)."""

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    closed: bool = True

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi):
            raise ArgumentError("box bounds must have equal length")
        if any(h < l for l, h in zip(lo, hi)):
            raise ArgumentError(f"box has negative side length: {lo} > {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def interval(cls, lo: float, hi: float, closed: bool = True) -> "Box":
        return cls((lo,), (hi,), closed)

    @classmethod
    def cube(cls, half_width: float, dim: int = 1, center=None, closed: bool = True) -> "Box":
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        return cls(tuple(c - half_width), tuple(c + half_width), closed)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def lo(self) -> np.ndarray:
        return np.array(self.lower)

    @property
    def hi(self) -> np.ndarray:
        return np.array(self.upper)

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def center(self) -> np.ndarray:
        return (self.lo + self.hi) / 2

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.widths))

    @property
    def is_empty(self) -> bool:
        return (not self.closed) and bool(np.any(self.widths == 0))

    def contains(self, points) -> np.ndarray:
        p = as_points(points, self.dim)
        upper = p <= self.hi if self.closed else p < self.hi
        return np.all((p >= self.lo) & upper, axis=1)

    def shrink(self, margin: float) -> Optional["Box"]:
        """Box shrunk by ``margin`` on every side, or None when nothing is left."""
        lo, hi = self.lo + margin, self.hi - margin
        if np.any(hi < lo):
            return None
        return Box(tuple(lo), tuple(hi), self.closed)

    def grow(self, margin: float) -> "Box":
        return Box(tuple(self.lo - margin), tuple(self.hi + margin), self.closed)

    def shift(self, v) -> "Box":
        v = np.broadcast_to(np.asarray(v, dtype=float), (self.dim,))
        return Box(tuple(self.lo + v), tuple(self.hi + v), self.closed)

    def intersect(self, other: "Box") -> Optional["Box"]:
        lo, hi = np.maximum(self.lo, other.lo), np.minimum(self.hi, other.hi)
        if np.any(hi < lo):
            return None
        return Box(tuple(lo), tuple(hi), self.closed and other.closed)

    def symmetric(self) -> "Box":
        r = np.maximum(np.abs(self.lo), np.abs(self.hi))
        return Box(tuple(-r), tuple(r), self.closed)

    def to_json(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper), "closed": self.closed}

    @classmethod
    def from_json(cls, obj) -> "Box":
        if isinstance(obj, dict):
            return cls(tuple(obj["lower"]), tuple(obj["upper"]), bool(obj.get("closed", True)))
        lo, hi = obj
        return cls(tuple(np.atleast_1d(lo)), tuple(np.atleast_1d(hi)))


class PointIndex:
    """Tolerance lookup of query points in a fixed point set."""

    def __init__(self, points: np.ndarray, tol: float = DEFAULT.equality):
        self.points = as_points(points)
        self.tol = tol
        self.dim = self.points.shape[1] if self.points.ndim == 2 else 1
        if self.dim == 1:
            self._order = np.argsort(self.points[:, 0], kind="stable")
            self._sorted = self.points[self._order, 0]
        else:
            self._tree = cKDTree(self.points) if len(self.points) else None

    def find(self, queries) -> np.ndarray:
        """Index of a stored point within ``tol`` of each query, else -1."""
        q = as_points(queries, self.dim)
        out = np.full(len(q), -1, dtype=np.int64)
        if len(self.points) == 0 or len(q) == 0:
            return out
        if self.dim == 1:
            s = self._sorted
            pos = np.searchsorted(s, q[:, 0])
            for cand in (pos - 1, pos):
                c = np.clip(cand, 0, len(s) - 1)
                hit = (np.abs(s[c] - q[:, 0]) <= self.tol) & (out < 0)
                out[hit] = self._order[c[hit]]
            return out
        d, i = self._tree.query(q, distance_upper_bound=self.tol * np.sqrt(self.dim))
        ok = np.isfinite(d)
        out[ok] = i[ok]
        return out

    def contains(self, queries) -> np.ndarray:
        return self.find(queries) >= 0


@dataclass(frozen=True, eq=False)
class PointPatch:
    """A finite set of points in R^d together with the region it exhausts.

    ``coords`` optionally records integer lattice coordinates of every
    point (provenance), which keeps sums and differences exact.
    """

    points: np.ndarray
    region: Box
    coords: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self):
        pts = as_points(self.points, self.region.dim)
        coords = None if self.coords is None else _coords(self.coords, len(pts))
        if len(pts):
            if not np.all(self.region.contains(pts)):
                raise ArgumentError("patch points must lie in the region")
            pts_u, idx = unique_points(pts, return_index=True)
            pts = pts_u
            if coords is not None:
                coords = coords[idx]
        object.__setattr__(self, "points", _frozen(pts))
        if coords is not None:
            object.__setattr__(self, "coords", _frozen(coords))

    @classmethod
    def from_points(cls, points, region: Optional[Box] = None, coords=None, label: str = "") -> "PointPatch":
        pts = as_points(points, None if region is None else region.dim)
        if region is None:
            if len(pts) == 0:
                raise ArgumentError("region required for an empty patch")
            region = Box(tuple(pts.min(axis=0)), tuple(pts.max(axis=0)))
        else:
            inside = region.contains(pts) if len(pts) else np.zeros(0, bool)
            pts = pts[inside]
            if coords is not None:
                coords = np.asarray(coords, dtype=np.int64).reshape(len(inside), -1)[inside]
        return cls(pts, region, coords, label)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.region.dim

    @property
    def x(self) -> np.ndarray:
        """1D convenience view."""
        return self.points[:, 0]

    def restrict(self, region: Box) -> "PointPatch":
        keep = region.contains(self.points) if len(self) else np.zeros(0, bool)
        inter = self.region.intersect(region) or region
        coords = None if self.coords is None else self.coords[keep]
        return PointPatch(self.points[keep], inter, coords, self.label)

    def shift(self, v) -> "PointPatch":
        v = np.broadcast_to(np.asarray(v, dtype=float), (self.dim,))
        return PointPatch(self.points + v, self.region.shift(v), None, self.label)

    def index(self, tol: float = DEFAULT.equality) -> PointIndex:
        return PointIndex(self.points, tol)

    def as_comb(self) -> "WeightedComb":
        return WeightedComb(self.points, np.ones(len(self)), self.region, self.coords, self.label)

    def same_points(self, other: "PointPatch", tol: float = DEFAULT.equality) -> bool:
        if len(self) != len(other):
            return False
        return bool(np.all(np.abs(self.points - other.points) <= tol))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(self.dim)])
        for p in self.points:
            w.writerow([_fmt(v) for v in p])
        return buf.getvalue()

    def to_json(self) -> dict:
        out = {"region": self.region.to_json(), "points": self.points.tolist()}
        if self.coords is not None:
            out["coords"] = self.coords.tolist()
        return out

    @classmethod
    def from_json(cls, obj) -> "PointPatch":
        region = Box.from_json(obj["region"])
        pts = np.asarray(obj["points"], dtype=float).reshape(-1, region.dim)
        return cls(pts, region, obj.get("coords"))


@dataclass(frozen=True, eq=False)
class WeightedComb:
    """Finite truncation of a weighted Dirac comb: sum of w(x) delta_x over a region."""

    points: np.ndarray
    weights: np.ndarray
    region: Box
    coords: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self):
        pts = as_points(self.points, self.region.dim)
        w = np.asarray(self.weights, dtype=complex).reshape(-1)
        if len(w) != len(pts):
            raise ArgumentError("one weight per point required")
        coords = None if self.coords is None else _coords(self.coords, len(pts))
        keep = w != 0
        pts, w = pts[keep], w[keep]
        coords = None if coords is None else coords[keep]
        if len(pts):
            if not np.all(self.region.contains(pts)):
                raise ArgumentError("comb support must lie in the region")
            pts_u, idx = unique_points(pts, return_index=True)
            if len(pts_u) != len(pts):
                raise ArgumentError("comb support points must be pairwise distinct")
            pts, w = pts_u, w[idx]
            coords = None if coords is None else coords[idx]
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))
        if coords is not None:
            object.__setattr__(self, "coords", _frozen(coords))

    @classmethod
    def from_points(cls, points, weights, region: Box, coords=None, label: str = "") -> "WeightedComb":
        pts = as_points(points, region.dim)
        w = np.broadcast_to(np.asarray(weights, dtype=complex), (len(pts),))
        inside = region.contains(pts) if len(pts) else np.zeros(0, bool)
        if coords is not None:
            coords = _coords(coords, len(pts))[inside]
        return cls(pts[inside], w[inside], region, coords, label)

    @classmethod
    def sum(cls, combs: Sequence["WeightedComb"], region: Optional[Box] = None) -> "WeightedComb":
        """Pointwise sum of combs (weights at coinciding points add)."""
        region = region or combs[0].region
        pts = np.concatenate([c.points for c in combs])
        w = np.concatenate([c.weights for c in combs])
        if len(pts) == 0:
            return cls(pts.reshape(0, region.dim), w, region)
        keys = quantize(pts)
        _, first, inv = np.unique(keys, axis=0, return_index=True, return_inverse=True)
        inv = inv.reshape(-1)
        acc = np.zeros(len(first), dtype=complex)
        np.add.at(acc, inv, w)
        return cls.from_points(pts[first], acc, region)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.region.dim

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    def support(self) -> PointPatch:
        return PointPatch(self.points, self.region, self.coords, self.label)

    def index(self, tol: float = DEFAULT.equality) -> PointIndex:
        return PointIndex(self.points, tol)

    def weight_at(self, queries, tol: float = DEFAULT.equality) -> np.ndarray:
        """Weights at query points (0 where the comb has no atom)."""
        idx = self.index(tol).find(queries)
        out = np.zeros(len(idx), dtype=complex)
        out[idx >= 0] = self.weights[idx[idx >= 0]]
        return out

    def restrict(self, region: Box) -> "WeightedComb":
        keep = region.contains(self.points) if len(self) else np.zeros(0, bool)
        inter = self.region.intersect(region) or region
        coords = None if self.coords is None else self.coords[keep]
        return WeightedComb(self.points[keep], self.weights[keep], inter, coords, self.label)

    def shift(self, v) -> "WeightedComb":
        v = np.broadcast_to(np.asarray(v, dtype=float), (self.dim,))
        return WeightedComb(self.points + v, self.weights, self.region.shift(v), None, self.label)

    def scaled(self, factor: complex) -> "WeightedComb":
        return WeightedComb(self.points, self.weights * factor, self.region, self.coords, self.label)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(self.dim)] + ["weight_re", "weight_im"])
        for p, wt in zip(self.points, self.weights):
            w.writerow([_fmt(v) for v in p] + [_fmt(wt.real), _fmt(wt.imag)])
        return buf.getvalue()

    def to_json(self) -> dict:
        out = {
            "region": self.region.to_json(),
            "points": self.points.tolist(),
            "weights": [[float(w.real), float(w.imag)] for w in self.weights],
        }
        if self.coords is not None:
            out["coords"] = self.coords.tolist()
        return out

    @classmethod
    def from_json(cls, obj) -> "WeightedComb":
        region = Box.from_json(obj["region"])
        pts = np.asarray(obj["points"], dtype=float).reshape(-1, region.dim)
        w = np.array([complex(a, b) for a, b in obj["weights"]])
        return cls(pts, w, region, obj.get("coords"))

    @classmethod
    def from_csv(cls, text: str, region: Box) -> "WeightedComb":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        d = sum(1 for h in header if h.startswith("x"))
        pts = np.array([[float(v) for v in r[:d]] for r in body]).reshape(-1, d)
        w = np.array([complex(float(r[d]), float(r[d + 1])) for r in body])
        return cls(pts, w, region)


def _fmt(v: float) -> str:
    v = float(v)
    if v == 0:
        return "0"
    return repr(v)


def pair_differences(a: np.ndarray, b: np.ndarray, box: Box, chunk: int = 4096):
    """All differences ``a_i - b_j`` lying in ``box`` with their index pairs.

    Returns ``(diffs, i, j)``.  1D uses sorted search, higher dimensions a
    k-d tree ball query around the box.
    """
    a = as_points(a, box.dim)
    b = as_points(b, box.dim)
    if len(a) == 0 or len(b) == 0:
        return np.empty((0, box.dim)), np.empty(0, np.int64), np.empty(0, np.int64)
    if box.dim == 1:
        order = np.argsort(b[:, 0], kind="stable")
        bs = b[order, 0]
        ii, jj = [], []
        for s in range(0, len(a), chunk):
            av = a[s:s + chunk, 0]
            # a - b in [lo, hi]  <=>  b in [a - hi, a - lo]
            left = np.searchsorted(bs, av - box.upper[0], side="left" if box.closed else "right")
            right = np.searchsorted(bs, av - box.lower[0], side="right")
            counts = np.maximum(right - left, 0)
            if counts.sum() == 0:
                continue
            rep = np.repeat(np.arange(len(av)), counts)
            offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
            jj.append(order[np.repeat(left, counts) + offs])
            ii.append(rep + s)
        if not ii:
            return np.empty((0, 1)), np.empty(0, np.int64), np.empty(0, np.int64)
        i = np.concatenate(ii)
        j = np.concatenate(jj)
        return a[i] - b[j], i, j
    tree = cKDTree(b)
    c = box.center
    r = float(np.linalg.norm(box.widths) / 2) + 1e-12
    ii, jj = [], []
    for s in range(0, len(a), chunk):
        hits = tree.query_ball_point(a[s:s + chunk] - c, r)
        for k, h in enumerate(hits):
            if h:
                ii.append(np.full(len(h), s + k))
                jj.append(np.array(sorted(h)))
    if not ii:
        return np.empty((0, box.dim)), np.empty(0, np.int64), np.empty(0, np.int64)
    i = np.concatenate(ii)
    j = np.concatenate(jj)
    d = a[i] - b[j]
    keep = box.contains(d)
    return d[keep], i[keep], j[keep]


def difference_set(a: PointPatch, b: PointPatch, box: Box) -> PointPatch:
    """``(a - b) ∩ box`` as a patch, with provenance when both operands carry it."""
    d, i, j = pair_differences(a.points, b.points, box)
    coords = None
    if a.coords is not None and b.coords is not None:
        coords = a.coords[i] - b.coords[j]
    return PointPatch(d, box, coords)


def coverage_box(points: np.ndarray) -> Box:
    pts = as_points(points)
    return Box(tuple(pts.min(axis=0)), tuple(pts.max(axis=0)))


def iter_rows(a: np.ndarray) -> Iterable[Tuple[float, ...]]:
    for row in a:
        yield tuple(float(v) for v in row)
