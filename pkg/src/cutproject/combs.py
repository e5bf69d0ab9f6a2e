"""Norms and almost periods of weighted Dirac combs.

Translation convention: (T_t ω)({x}) = ω({x - t}).  Distances
``||T_t ω - ω||`` are evaluated on the safe overlap ``R ∩ (R + t)`` of
the trusted region R, where both the translate and the original are
known.
"""
from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from ._parallel import ordered_map, split_rows
from .config import CHUNK_ENTRIES, DEFAULT
from .errors import ArgumentError, InsufficientDataError
from .geometry import Box, PointIndex, PointPatch, WeightedComb, as_points, pair_differences, unique_points


def sup_norm(c: WeightedComb) -> float:
    return float(np.max(np.abs(c.weights))) if len(c) else 0.0


def _check_k(K: Box) -> None:
    if np.any(K.widths <= 0):
        raise ArgumentError("K must have non-empty interior")


def k_norm(c: WeightedComb, K: Box, grid_pitch: Optional[float] = None) -> float:
    """sup_t |ω|(t + K) over translates t + K inside the comb region.

    Exact sliding-window maximum in 1D; grid-approximate (lower bound)
    in higher dimensions, see :func:`k_norm_record`.
    """
    return k_norm_record(c, K, grid_pitch)["value"]


def k_norm_record(c: WeightedComb, K: Box, grid_pitch: Optional[float] = None) -> dict:
    _check_k(K)
    reg = c.region
    tmin = reg.lo - K.lo
    tmax = reg.hi - K.hi
    if np.any(tmax < tmin):
        raise InsufficientDataError("K does not fit inside the comb region")
    a = np.abs(c.weights)
    if len(c) == 0:
        return {"value": 0.0, "exact": c.dim == 1, "pitch": grid_pitch, "error_bound": 0.0}
    if c.dim == 1:
        x = c.x
        pre = np.concatenate([[0.0], np.cumsum(a)])
        L = K.widths[0]
        # the window sum is maximal with a point on its left edge, or on its right edge for closed K
        starts = [x - K.lower[0]]
        if K.closed:
            starts.append(x - K.upper[0])
        t = np.concatenate(starts + [[tmin[0], tmax[0]]])
        t = np.clip(t, tmin[0], tmax[0])
        # edges are fuzzed by the equality tolerance so that rounding in x + L cannot add a point
        tol = DEFAULT.equality
        lo = t + K.lower[0] - tol
        hi = t + K.upper[0] + (tol if K.closed else -tol)
        i0 = np.searchsorted(x, lo, side="left")
        i1 = np.searchsorted(x, hi, side="right" if K.closed else "left")
        val = float(np.max(pre[i1] - pre[i0]))
        return {"value": val, "exact": True, "pitch": None, "error_bound": 0.0}
    if grid_pitch is None:
        grid_pitch = float(np.min(K.widths)) / 4
    n = np.maximum(np.ceil((tmax - tmin) / grid_pitch).astype(int) + 1, 1)
    axes = [np.linspace(l, h, k) if k > 1 else np.array([l]) for l, h, k in zip(tmin, tmax, n)]
    tree = cKDTree(c.points)
    r = float(np.linalg.norm(K.widths) / 2) + 1e-12
    best = 0.0
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, c.dim)
    for s in range(0, len(grid), 4096):
        g = grid[s:s + 4096]
        hits = tree.query_ball_point(g + K.center, r)
        for t, h in zip(g, hits):
            if h:
                inside = K.shift(t).contains(c.points[h])
                best = max(best, float(a[h][inside].sum()))
    # moving K by less than one pitch can bring in at most the mass of a pitch-enlarged shell
    return {"value": best, "exact": False, "pitch": grid_pitch, "error_bound": None}


def check_norm_sup_domination(c: WeightedComb, K: Box):
    """(||ω||_∞, ||ω||_K, ||ω||_∞ <= ||ω||_K)."""
    s = sup_norm(c)
    k = k_norm(c, K)
    return s, k, bool(s <= k + 1e-12)


def overlap(region: Box, t) -> Optional[Box]:
    return region.intersect(region.shift(t))


def difference_comb(c: WeightedComb, t, base_region: Optional[Box] = None) -> Optional[WeightedComb]:
    """T_t ω - ω restricted to the safe overlap (None when the overlap is empty)."""
    base = base_region or c.region
    t = np.broadcast_to(np.asarray(t, dtype=float), (c.dim,))
    ov = overlap(base, t)
    if ov is None:
        return None
    shifted = c.shift(t).restrict(ov)
    orig = c.restrict(ov)
    return WeightedComb.sum([shifted, orig.scaled(-1)], ov)


def sup_distance(c: WeightedComb, t, base_region: Optional[Box] = None, index: Optional[PointIndex] = None,
                 tol: float = DEFAULT.equality) -> float:
    """||T_t ω - ω||_∞ on the safe overlap."""
    base = base_region or c.region
    t = np.broadcast_to(np.asarray(t, dtype=float), (c.dim,))
    ov = overlap(base, t)
    if ov is None:
        return 0.0
    idx = index or c.index(tol)
    x = c.points
    w = c.weights
    best = 0.0
    # points y = x + t of the translate: compare ω(x) with ω(x + t)
    m = ov.contains(x + t)
    if m.any():
        j = idx.find(x[m] + t)
        other = np.where(j >= 0, w[np.maximum(j, 0)], 0)
        best = max(best, float(np.max(np.abs(w[m] - other))))
    # original points y in the overlap: compare ω(y - t) with ω(y)
    m = ov.contains(x)
    if m.any():
        j = idx.find(x[m] - t)
        other = np.where(j >= 0, w[np.maximum(j, 0)], 0)
        best = max(best, float(np.max(np.abs(other - w[m]))))
    return best


def _sup_distance_block(c: WeightedComb, ts: np.ndarray, base: Box, idx: PointIndex) -> np.ndarray:
    """:func:`sup_distance` for a block of translations at once."""
    x, w = c.points, c.weights
    lo = np.maximum(base.lo, base.lo + ts)[:, None, :]
    hi = np.minimum(base.hi, base.hi + ts)[:, None, :]
    empty = np.any(hi < lo, axis=2)[:, 0]

    def inside(q):
        up = q <= hi if base.closed else q < hi
        return np.all((q >= lo) & up, axis=2)

    out = np.zeros(len(ts))
    for sign in (1, -1):
        # sign +1: points x + t of the translate; -1: original points y, partner y - t
        q = x[None, :, :] + sign * ts[:, None, :]
        m = inside(q if sign > 0 else np.broadcast_to(x[None], q.shape))
        if not m.any():
            continue
        j = np.full(m.shape, -1, dtype=np.int64)
        j[m] = idx.find(q[m])
        other = np.where(j >= 0, w[np.maximum(j, 0)], 0)
        dev = np.where(m, np.abs(w[None, :] - other), 0.0)
        out = np.maximum(out, dev.max(axis=1))
    out[empty] = 0.0
    return out


def sup_distances(c: WeightedComb, ts, base_region: Optional[Box] = None, workers: int = 1) -> np.ndarray:
    ts = as_points(ts, c.dim)
    if len(ts) == 0 or len(c) == 0:
        return np.zeros(len(ts))
    base = base_region or c.region
    idx = c.index()
    blocks = split_rows(len(ts), len(c) * c.dim, CHUNK_ENTRIES // 8)
    parts = ordered_map(lambda sl: _sup_distance_block(c, ts[sl], base, idx), blocks, workers)
    return np.concatenate(parts)


def k_distance(c: WeightedComb, t, K: Box, base_region: Optional[Box] = None) -> float:
    """||T_t ω - ω||_K on the safe overlap."""
    d = difference_comb(c, t, base_region)
    if d is None:
        return 0.0
    try:
        return k_norm(d, K)
    except InsufficientDataError:
        return 0.0


@dataclass(frozen=True, eq=False)
class AlmostPeriodSet:
    epsilon: float
    norm_kind: str
    periods: PointPatch
    search_region: Box
    base_region: Box
    distances: np.ndarray
    K: Optional[Box] = None
    warning: Optional[str] = None

    def __len__(self) -> int:
        return len(self.periods)

    def contains(self, t, tol: float = 1e-7) -> np.ndarray:
        return self.periods.index(tol).contains(t)

    def below(self, eps: float) -> "AlmostPeriodSet":
        """P_eps for a smaller eps, read off the stored distances (same candidates, same norm)."""
        if eps > self.epsilon:
            raise ArgumentError("can only restrict to a smaller eps")
        keep = self.distances < eps
        p = self.periods
        sub = PointPatch(p.points[keep], p.region, None if p.coords is None else p.coords[keep], p.label)
        return AlmostPeriodSet(eps, self.norm_kind, sub, self.search_region, self.base_region,
                               self.distances[keep], self.K, self.warning)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"t{i}" for i in range(self.periods.dim)] + ["distance"])
        for p, d in zip(self.periods.points, self.distances):
            w.writerow([repr(float(v)) if v != 0 else "0" for v in p] + [repr(float(d)) if d != 0 else "0"])
        return buf.getvalue()

    def metadata(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "kind": self.norm_kind,
            "K": None if self.K is None else self.K.to_json(),
            "search_region": self.search_region.to_json(),
            "base_region": self.base_region.to_json(),
            "count": len(self.periods),
            "warning": self.warning,
        }


def _canonical_half(pts: np.ndarray) -> np.ndarray:
    """Mask of the lexicographically positive representatives of ±t (t = 0 excluded)."""
    first = np.zeros(len(pts))
    for k in range(pts.shape[1] - 1, -1, -1):
        col = pts[:, k]
        first = np.where(np.abs(col) > DEFAULT.equality, col, first)
    return first > 0


def almost_periods(c: WeightedComb, eps: float, kind: Union[str, Tuple[str, Box]] = "sup",
                   search_region: Optional[Box] = None, base_region: Optional[Box] = None,
                   extra_candidates=None, workers: int = 1) -> AlmostPeriodSet:
    """P_ε = {t : ||T_t ω - ω|| < ε} among support differences (plus extra candidates) in the search region.

    For ε below the sup norm every almost period nearly maps support to
    support, so support differences are the complete candidate list.
    """
    if not eps > 0:
        raise ArgumentError("eps must be positive")
    K = None
    if isinstance(kind, tuple):
        name, K = kind
        if name not in ("k", "k_norm"):
            raise ArgumentError(f"unknown norm kind {name!r}")
        _check_k(K)
        kind_name = "k_norm"
    elif kind == "sup":
        kind_name = "sup"
    else:
        raise ArgumentError(f"unknown norm kind {kind!r}")
    base = base_region or c.region
    search = (search_region or base).symmetric()
    note = None
    if eps >= 2 * sup_norm(c):
        note = "eps >= 2 sup_norm: every translation qualifies trivially"
        warnings.warn(note, RuntimeWarning, stacklevel=2)
    supp = c.support()
    track = supp.coords is not None and extra_candidates is None
    if len(c):
        cand, i, j = pair_differences(supp.points, supp.points, search)
        cc = supp.coords[i] - supp.coords[j] if track else None
    else:
        cand, cc = np.empty((0, c.dim)), None
    if extra_candidates is not None:
        ex = as_points(extra_candidates, c.dim)
        cand = np.concatenate([cand, ex[search.contains(ex)], -ex[search.contains(-ex)]])
    if len(cand):
        cand, u = unique_points(cand, return_index=True)
        cc = cc[u] if track else None
    sel = _canonical_half(cand) if len(cand) else np.zeros(0, bool)
    half = cand[sel]
    if kind_name == "sup":
        dist = sup_distances(c, half, base, workers)
    else:
        dist = np.array(ordered_map(lambda t: k_distance(c, t, K, base), list(half), workers), dtype=float)
    ok = dist < eps
    keep = half[ok]
    pts = np.concatenate([np.zeros((1, c.dim)), keep, -keep])
    dists = np.concatenate([[0.0], dist[ok], dist[ok]])
    coords = None
    if track:
        kc = cc[sel][ok]
        coords = np.concatenate([np.zeros((1, supp.coords.shape[1]), dtype=np.int64), kc, -kc])
    pts, order = unique_points(pts, return_index=True)
    patch = PointPatch(pts, search, None if coords is None else coords[order])
    return AlmostPeriodSet(eps, kind_name, patch, search, base, dists[order], K, note)


@dataclass(frozen=True)
class Classification:
    kind: str  # fully_periodic_crystal | not_sup_almost_periodic | indeterminate
    eps: float
    lattice: List[List[float]] = field(default_factory=list)
    F: List[List[float]] = field(default_factory=list)
    periods: List[List[float]] = field(default_factory=list)
    note: str = ""

    def to_json(self) -> dict:
        return {"kind": self.kind, "eps": self.eps, "lattice": self.lattice, "F": self.F,
                "periods": self.periods, "note": self.note}


def reduce_mod_lattice(points: np.ndarray, basis: Sequence[np.ndarray], tol: float = 1e-7) -> np.ndarray:
    """Representatives of points modulo the lattice spanned by ``basis`` in the fundamental cell."""
    B = np.array(basis, dtype=float).T  # columns are generators
    pts = as_points(points, B.shape[0])
    coef = np.linalg.solve(B, pts.T).T
    # subtract whole generators from the points themselves: keeps exact inputs exact
    rep = pts - np.floor(coef + tol) @ B.T
    rep[np.abs(rep) < tol] = 0.0
    return unique_points(rep, tol)


def classify_dirac_comb(p: PointPatch, eps: float, search_box: Optional[Box] = None,
                        workers: int = 1) -> Classification:
    """Fully periodic crystal (L, F), or not ε-sup-almost periodic on the search region.

    For a Dirac comb and 0 < ε < 1 every ε-almost period is an exact
    period, so the period lattice decides both cases.
    """
    from .pointset import covering_radius, period_lattice

    if not 0 < eps < 1:
        raise ArgumentError("eps must lie in (0, 1)")
    if len(p) < 2:
        return Classification("indeterminate", eps, note="fewer than two points")
    if search_box is None:
        search_box = Box.cube(float(np.min(p.region.widths)) / 4, p.dim)
    if np.any(search_box.symmetric().widths * 2 > p.region.widths * 1.0001):
        return Classification("indeterminate", eps, note="search box too large for the patch region")
    comb = p.as_comb()
    basis = period_lattice(comb, search_box, tol=eps, workers=workers)
    if len(basis) == p.dim:
        F = reduce_mod_lattice(p.points, basis)
        return Classification("fully_periodic_crystal", eps, [list(map(float, b)) for b in basis], F.tolist())
    ap = almost_periods(comb, eps, "sup", search_box, workers=workers)
    return Classification("not_sup_almost_periodic", eps, [list(map(float, b)) for b in basis],
                          periods=ap.periods.points.tolist(),
                          note="P_eps on the search region equals the period set, which is not relatively dense")
