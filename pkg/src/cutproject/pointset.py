"""Decision procedures on finite point patches.

Every verdict is one-sided: a patch is only a truncation, so tests are
run on a safe sub-region (the region shrunk by a margin, by default three
covering radii) and failures confined to the margin are reported as
indeterminate rather than as failures.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .config import DEFAULT
from .errors import ArgumentError, InsufficientDataError, WitnessUnavailableError
from .geometry import Box, PointIndex, PointPatch, WeightedComb, as_points, pair_differences, unique_points

INF = math.inf


def minkowski(a: PointPatch, signs: Sequence[int], operands: Sequence[PointPatch], region: Box,
              tol: float = DEFAULT.equality) -> PointPatch:
    """{a + s_1 b_1 + ... + s_k b_k} ∩ region, one point from each operand."""
    if len(signs) != len(operands) or not operands:
        raise ArgumentError("one sign per operand and at least one operand required")
    if any(s not in (1, -1) for s in signs):
        raise ArgumentError("signs must be +1 or -1")
    d = region.dim
    cur = a.points
    coords = a.coords
    track = coords is not None and all(o.coords is not None for o in operands)
    if any(len(o) == 0 for o in operands) or len(cur) == 0:
        return PointPatch(np.empty((0, d)), region)
    # bounds still reachable by the remaining operands
    ranges = []
    for s, o in zip(signs, operands):
        lo, hi = o.points.min(axis=0), o.points.max(axis=0)
        ranges.append((np.minimum(s * lo, s * hi), np.maximum(s * lo, s * hi)))
    for k, (s, o) in enumerate(zip(signs, operands)):
        rest_lo = sum((r[0] for r in ranges[k + 1:]), np.zeros(d))
        rest_hi = sum((r[1] for r in ranges[k + 1:]), np.zeros(d))
        target = Box(tuple(region.lo - rest_hi - tol), tuple(region.hi - rest_lo + tol))
        # cur + s*o = cur - (-s*o)
        diffs, i, j = pair_differences(cur, -s * o.points, target)
        if track:
            c = coords[i] + s * o.coords[j]
        pts, idx = unique_points(diffs, tol, return_index=True)
        cur = pts
        if track:
            coords = c[idx]
        if len(cur) == 0:
            break
    keep = region.contains(cur) if len(cur) else np.zeros(0, bool)
    return PointPatch(cur[keep], region, coords[keep] if track and len(cur) else None)


def min_gap(points: np.ndarray) -> float:
    pts = as_points(points)
    if len(pts) < 2:
        return INF
    if pts.shape[1] == 1:
        return float(np.min(np.diff(np.sort(pts[:, 0]))))
    d, _ = cKDTree(pts).query(pts, k=2)
    return float(d[:, 1].min())


def is_uniformly_discrete(p: PointPatch, threshold: float = DEFAULT.discreteness):
    """(min gap > threshold, min gap); +inf for fewer than two points."""
    g = min_gap(p.points)
    return bool(g > threshold), g


def covering_radius(p: PointPatch, margin: float = 0.0, pitch: Optional[float] = None,
                    max_grid: int = 1_000_000) -> float:
    """sup over the region shrunk by ``margin`` of the distance to the nearest patch point.

    Exact in 1D; higher dimensions sample a grid (pitch defaults to
    diameter / 10^4, coarsened so that at most ``max_grid`` nodes are used).
    """
    if len(p) == 0:
        return INF
    inner = p.region.shrink(margin)
    if inner is None:
        raise InsufficientDataError("margin leaves no region to test")
    if p.dim == 1:
        x = np.sort(p.x)
        L, U = inner.lower[0], inner.upper[0]
        cand = [L, U]
        mids = (x[:-1] + x[1:]) / 2
        cand += list(mids[(mids >= L) & (mids <= U)])
        cand = np.array(cand)
        pos = np.searchsorted(x, cand)
        left = np.abs(cand - x[np.clip(pos - 1, 0, len(x) - 1)])
        right = np.abs(x[np.clip(pos, 0, len(x) - 1)] - cand)
        return float(np.max(np.minimum(left, right)))
    if pitch is None:
        pitch = inner.diameter / 1e4
    w = inner.widths
    n = np.maximum(np.ceil(w / max(pitch, 1e-300)).astype(int) + 1, 2)
    while np.prod(n) > max_grid:
        n = np.maximum((n * 0.8).astype(int), 2)
    axes = [np.linspace(l, h, k) for l, h, k in zip(inner.lo, inner.hi, n)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p.dim)
    d, _ = cKDTree(p.points).query(grid)
    return float(d.max())


def occupancy(p: PointPatch, side: float = 1.0) -> int:
    """Largest number of points in a translate of the half-open cube [0, side)^d."""
    if len(p) == 0:
        return 0
    if p.dim == 1:
        x = np.sort(p.x)
        return int(np.max(np.searchsorted(x, x + side, side="left") - np.arange(len(x))))
    tree = cKDTree(p.points)
    best = 0
    for q in p.points:
        # boxes with lower corner at a point coordinate per axis suffice up to one cell
        near = tree.query_ball_point(q + side / 2, side * math.sqrt(p.dim))
        pts = p.points[near]
        inside = np.all((pts >= q - 1e-12) & (pts < q + side), axis=1)
        best = max(best, int(inside.sum()))
    return best


def _central(region: Box, frac: float = 0.5) -> Box:
    c, w = region.center, region.widths * frac / 2
    return Box(tuple(c - w), tuple(c + w), region.closed)


def flc_clusters(p: PointPatch, k_box: Box, threshold: float = DEFAULT.discreteness):
    """(flc?, D) with D = (Λ - Λ) ∩ K.

    D must be uniformly discrete above ``threshold`` and its size must not
    keep growing: |D| from the central half of the patch must equal |D| of
    the whole patch (accumulating differences show up as growth long
    before the gaps fall below any fixed threshold).
    """
    D = minkowski(p, [-1], [p], k_box)
    ud, _ = is_uniformly_discrete(D, threshold)
    stable = True
    sub = p.restrict(_central(p.region))
    if len(sub) >= 2:
        Dsub = minkowski(sub, [-1], [sub], k_box)
        stable = len(Dsub) == len(D)
    return bool(ud and stable), D


@dataclass(frozen=True)
class CoveringWitness:
    """F (reduced) with a ⊆ b + F on the safe region; ``full`` is the unreduced (A - B) ∩ K."""

    F: PointPatch
    full: PointPatch
    radius: float
    safe_region: Box
    verified: bool


def covering_witness(a: PointPatch, b: PointPatch, tol: float = DEFAULT.equality,
                     reduce: bool = True) -> CoveringWitness:
    """F = (A - B) ∩ K with K the closed cube of half-width covering_radius(b)."""
    if len(b) == 0:
        raise WitnessUnavailableError("reference set is empty")
    R = covering_radius(b)
    if not np.isfinite(R) or 4 * R > float(np.min(b.region.widths)):
        raise WitnessUnavailableError(f"reference set is not relatively dense on its region (radius {R})")
    K = Box.cube(R + tol, a.dim)
    full = minkowski(a, [-1], [b], K)
    safe = b.region.shrink(R)
    if safe is None:
        raise InsufficientDataError("region too small for the covering radius")
    targets = a.points[safe.contains(a.points)] if len(a) else a.points
    idx = b.index(1e-7)
    cover = np.stack([idx.contains(targets - f) for f in full.points]) if len(full) else np.zeros((0, len(targets)), bool)
    verified = bool(np.all(cover.any(axis=0))) if len(targets) else True
    F = full
    if reduce and len(full) and verified:
        order = sorted(range(len(full)), key=lambda i: (float(np.linalg.norm(full.points[i])),
                                                        bool(np.any(full.points[i] < 0)), tuple(full.points[i])))
        chosen = []
        covered = np.zeros(len(targets), dtype=bool)
        for i in order:
            if not np.all(covered) and np.any(cover[i] & ~covered):
                chosen.append(i)
                covered |= cover[i]
        # drop members made redundant by later ones
        for i in list(chosen):
            rest = [j for j in chosen if j != i]
            if rest and np.all(cover[rest].any(axis=0)):
                chosen = rest
        if not chosen:
            chosen = [order[0]]
        F = PointPatch(full.points[sorted(chosen)], K)
    return CoveringWitness(F, full, R, safe, verified)


@dataclass
class MeyerReport:
    uniformly_discrete: bool
    min_gap: float
    relatively_dense: bool
    covering_radius: float
    flc: bool
    cluster_count: int
    triple_diff_locally_finite: bool
    triple_min_gap: float
    almost_lattice_witness: Optional[List[List[float]]]
    almost_lattice_ok: bool
    occupancy: int
    margin: float
    safe_region: Box
    verdict: str
    failing: List[str] = field(default_factory=list)
    boundary_only: List[str] = field(default_factory=list)

    def to_json(self) -> dict:
        d = asdict(self)
        d["safe_region"] = self.safe_region.to_json()
        for k in ("min_gap", "covering_radius", "triple_min_gap"):
            if d[k] == INF:
                d[k] = "inf"
        return d

    def table(self) -> str:
        rows = [
            ("uniformly discrete", self.uniformly_discrete, f"min gap {self.min_gap:.6g}"),
            ("relatively dense", self.relatively_dense, f"covering radius {self.covering_radius:.6g}"),
            ("finite local complexity", self.flc, f"{self.cluster_count} differences in K"),
            ("Λ-Λ-Λ locally finite", self.triple_diff_locally_finite, f"min gap {self.triple_min_gap:.6g}"),
            ("almost lattice", self.almost_lattice_ok,
             "F = " + (json.dumps(self.almost_lattice_witness) if self.almost_lattice_witness is not None else "-")),
        ]
        lines = [f"{name:<26} {'yes' if ok else 'no':<4} {info}" for name, ok, info in rows]
        lines.append(f"{'verdict':<26} {self.verdict}")
        return "\n".join(lines)


def meyer_test(p: PointPatch, k_box: Optional[Box] = None, margin: Optional[float] = None,
               threshold: float = DEFAULT.discreteness, tol: float = 1e-7) -> MeyerReport:
    """Meyer battery: uniform discreteness, relative denseness, FLC, Λ-Λ-Λ and the almost-lattice witness.

    Λ-Λ-Λ locally finite implies FLC, so when FLC already fails the
    triple-difference and almost-lattice clauses are recorded as failing
    without being enumerated.

    The property is translation invariant while the witness checks are not,
    so the patch is moved to put its most central point at the origin first;
    the witness refers to that centred copy and the safe region is reported
    in the original coordinates.
    """
    if len(p) < 2:
        raise InsufficientDataError("need at least two points")
    mid = (np.asarray(p.region.lower, float) + np.asarray(p.region.upper, float)) / 2
    x0 = p.points[int(np.argmin(np.linalg.norm(p.points - mid, axis=1)))]
    p = p.shift(-x0)
    R = covering_radius(p)
    if not np.isfinite(R) or 8 * R > float(np.min(p.region.widths)):
        raise InsufficientDataError(f"region too small relative to the covering radius {R:.6g}")
    margin = 3 * R if margin is None else margin
    safe_region = p.region.shrink(margin)
    if safe_region is None:
        raise InsufficientDataError("margin leaves no safe region")
    if k_box is None:
        k_box = Box.cube(max(2 * R, 1.0), p.dim)
    safe = p.restrict(safe_region)
    if len(safe) < 2:
        raise InsufficientDataError("safe region holds fewer than two points")
    big = float(np.min(p.region.widths)) / 4

    ud, gap = is_uniformly_discrete(safe, threshold)
    Rs = covering_radius(p, margin=margin)
    rd = bool(np.isfinite(Rs) and Rs <= big)
    flc, D = flc_clusters(safe, k_box, threshold)
    tud, tgap, al, F = False, 0.0, False, None
    if flc:
        T = minkowski(safe, [-1, -1], [safe, safe], Box.cube(max(R, float(k_box.widths.max()) / 2), p.dim))
        tud, tgap = is_uniformly_discrete(T, threshold)
        F = T.restrict(Box.cube(R + tol, p.dim))
        # Λ - Λ ⊆ Λ + F, checked where Λ is fully known
        diffs = minkowski(p, [-1], [p], safe_region)
        idx = p.index(tol)
        hit = np.zeros(len(diffs), dtype=bool)
        for f in F.points:
            hit |= idx.contains(diffs.points - f)
        al = bool(len(F) and np.all(hit))
    safe_ok = {"uniformly_discrete": ud, "relatively_dense": rd, "flc": flc,
               "triple_diff_locally_finite": tud, "almost_lattice": al}

    # whole patch: failures here that the safe patch does not see sit in the margin
    ud_f, _ = is_uniformly_discrete(p, threshold)
    flc_f = flc_clusters(p, k_box, threshold)[0] if flc else False
    full_ok = {"uniformly_discrete": ud_f, "flc": flc_f}

    failing = [k for k, v in safe_ok.items() if not v]
    boundary = [k for k, v in full_ok.items() if not v and safe_ok[k]]
    verdict = "fail" if failing else ("indeterminate" if boundary else "pass")
    return MeyerReport(
        uniformly_discrete=ud, min_gap=gap, relatively_dense=rd, covering_radius=Rs,
        flc=flc, cluster_count=len(D), triple_diff_locally_finite=tud, triple_min_gap=tgap,
        almost_lattice_witness=F.points.tolist() if al else None, almost_lattice_ok=al,
        occupancy=occupancy(safe), margin=margin, safe_region=safe_region.shift(x0), verdict=verdict,
        failing=failing, boundary_only=boundary,
    )


def period_lattice(c, search_box: Box, tol: float = 1e-9, workers: int = 1) -> List[np.ndarray]:
    """Generators of the translations t in ``search_box`` with ||T_t c - c||_∞ <= tol on the safe overlap.

    Candidates are differences of support points (any period maps support
    to support).  1D returns the smallest positive period; in higher
    dimensions a basis is picked greedily from the periods by length.
    """
    from .combs import sup_distances

    comb = c.as_comb() if isinstance(c, PointPatch) else c
    if len(comb) == 0:
        return []
    cand = minkowski(comb.support(), [-1], [comb.support()], search_box.symmetric())
    pts = cand.points
    pts = pts[np.linalg.norm(pts, axis=1) > DEFAULT.equality]
    # one representative of each ±t pair
    first = np.array([next((v for v in row if abs(v) > DEFAULT.equality), 0.0) for row in pts]) if len(pts) else np.zeros(0)
    pts = pts[first > 0]
    pts = pts[search_box.contains(pts) | search_box.contains(-pts)] if len(pts) else pts
    if len(pts) == 0:
        return []
    dist = sup_distances(comb, pts, workers=workers)
    periods = pts[dist <= tol]
    if len(periods) == 0:
        return []
    order = np.lexsort(tuple(periods.T[::-1]) + (np.linalg.norm(periods, axis=1),))
    periods = periods[order]
    if comb.dim == 1:
        return [periods[0].copy()]
    basis: List[np.ndarray] = []
    for v in periods:
        trial = np.array(basis + [v])
        if np.linalg.matrix_rank(trial, tol=1e-8) > len(basis):
            basis.append(v.copy())
        if len(basis) == comb.dim:
            break
    return basis
