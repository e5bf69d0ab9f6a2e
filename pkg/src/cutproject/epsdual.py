"""ε-dual character sets Λ^ε = {κ : |e^{2πi<κ,x>} - 1| <= ε for all x ∈ Λ} of finite patches.

A finite patch only imposes finitely many constraints, so every result is
a superset of the true Λ^ε on the scanned frequency box (restricted to the
grid).  The deviation f(κ) = max_x |e^{2πi<κ,x>} - 1| is Lipschitz with
constant 2π max|x|, which bounds what the grid can miss between nodes.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._parallel import ordered_map, split_rows
from .config import CHUNK_ENTRIES, DEFAULT
from .errors import ArgumentError
from .geometry import Box, PointPatch, as_points, pair_differences, unique_points
from .pointset import covering_radius, min_gap, minkowski

SQRT3_2 = math.sqrt(3) / 2


def deviation(points: np.ndarray, kappa, workers: int = 1) -> np.ndarray:
    """max over the points of |e^{2πi<κ,x>} - 1| = 2|sin(π<κ,x>)| for each κ."""
    pts = as_points(points)
    k = as_points(kappa, pts.shape[1])
    if len(pts) == 0:
        return np.zeros(len(k))

    def run(sl):
        ph = k[sl] @ pts.T
        # reduce the phase to [-1/2, 1/2] before the sine for accuracy at large arguments
        ph = ph - np.round(ph)
        return np.max(2 * np.abs(np.sin(np.pi * ph)), axis=1)

    parts = ordered_map(run, split_rows(len(k), len(pts), CHUNK_ENTRIES), workers)
    return np.concatenate(parts) if parts else np.zeros(0)


def lipschitz(points: np.ndarray) -> float:
    pts = as_points(points)
    return 2 * math.pi * float(np.max(np.linalg.norm(pts, axis=1))) if len(pts) else 0.0


@dataclass(frozen=True, eq=False)
class CharacterSet:
    frequencies: PointPatch
    deviations: np.ndarray
    epsilon: float
    source_region: Box
    freq_region: Box
    resolution: float
    patch_size: int
    components: Optional[List[Tuple[float, float]]] = None
    lipschitz: float = 0.0
    caveat: str = ("finite patch: superset of the true eps-dual set on the frequency box, "
                   "restricted to the scan grid")

    def __len__(self) -> int:
        return len(self.frequencies)

    def centers(self) -> np.ndarray:
        """Component midpoints (1D with refinement) or the qualifying grid nodes."""
        if self.components is not None:
            return np.array([[(a + b) / 2] for a, b in self.components]).reshape(-1, 1)
        return self.frequencies.points

    def component_gap(self) -> float:
        """Smallest distance between distinct components (1D) or between grid clusters (dD)."""
        if self.components is not None:
            if len(self.components) < 2:
                return math.inf
            return float(min(b2 - a1 for (_, a1), (b2, _) in
                             zip(self.components, self.components[1:])))
        pts = self.frequencies.points
        if len(pts) < 2:
            return math.inf
        # cluster adjacent grid nodes into cells, then measure between clusters
        from scipy.sparse.csgraph import connected_components
        from scipy.spatial import cKDTree
        tree = cKDTree(pts)
        pairs = tree.query_pairs(self.resolution * math.sqrt(pts.shape[1]) * 1.0001, output_type="ndarray")
        import scipy.sparse as sp
        n = len(pts)
        g = sp.coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) else sp.coo_matrix((n, n))
        _, lab = connected_components(g, directed=False)
        best = math.inf
        for a in np.unique(lab):
            da, _ = cKDTree(pts[lab != a]).query(pts[lab == a]) if np.any(lab != a) else (np.array([math.inf]), None)
            best = min(best, float(np.min(da)))
        return best

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"k{i}" for i in range(self.frequencies.dim)] + ["max_deviation"])
        for k, d in zip(self.frequencies.points, self.deviations):
            w.writerow([repr(float(v)) if v != 0 else "0" for v in k] + [repr(float(d)) if d != 0 else "0"])
        return buf.getvalue()

    def metadata(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "count": len(self.frequencies),
            "source_region": self.source_region.to_json(),
            "freq_region": self.freq_region.to_json(),
            "resolution": self.resolution,
            "patch_size": self.patch_size,
            "lipschitz": self.lipschitz,
            "components": None if self.components is None else [list(c) for c in self.components],
            "caveat": self.caveat,
        }


def frequency_grid(freq_region: Box, pitch: float) -> np.ndarray:
    """Nodes k * pitch inside the box (symmetric boxes give symmetric grids containing 0)."""
    axes = []
    for lo, hi in zip(freq_region.lower, freq_region.upper):
        k0, k1 = math.ceil(lo / pitch - 1e-9), math.floor(hi / pitch + 1e-9)
        axes.append(np.arange(k0, k1 + 1) * pitch)
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, freq_region.dim)


def _bisect(points, a: float, b: float, eps: float, good_at_a: bool, steps: int = 20) -> float:
    """Boundary of {f <= eps} between a and b; returns the last qualifying abscissa."""
    good, bad = (a, b) if good_at_a else (b, a)
    for _ in range(steps):
        m = (good + bad) / 2
        if deviation(points, [[m]])[0] <= eps:
            good = m
        else:
            bad = m
    return good


def _hidden(points, a: float, b: float, fa: float, fb: float, eps: float, L: float,
            min_width: float, depth: int = 0) -> Optional[float]:
    """A qualifying point strictly inside (a, b) if the Lipschitz bound allows one, else None."""
    h = b - a
    if (fa + fb - L * h) / 2 > eps or h < min_width or depth > 60:
        return None
    m = (a + b) / 2
    fm = float(deviation(points, [[m]])[0])
    if fm <= eps:
        return m
    return (_hidden(points, a, m, fa, fm, eps, L, min_width, depth + 1)
            or _hidden(points, m, b, fm, fb, eps, L, min_width, depth + 1))


def eps_dual(p: PointPatch, eps: float, freq_region: Box, pitch: float, refine: bool = False,
             workers: int = 1) -> CharacterSet:
    """Grid scan of Λ^ε over ``freq_region``; optional 1D refinement of component boundaries."""
    if not eps > 0:
        raise ArgumentError("eps must be positive")
    if not pitch > 0:
        raise ArgumentError("pitch must be positive")
    if eps >= 2:
        warnings.warn("eps >= 2: every character qualifies", RuntimeWarning, stacklevel=2)
    grid = frequency_grid(freq_region, pitch)
    dev = deviation(p.points, grid, workers)
    ok = dev <= eps
    L = lipschitz(p.points)
    comps = None
    extra_pts, extra_dev = [], []
    if refine and p.dim == 1 and len(grid):
        k = grid[:, 0]
        comps = []
        idx = np.flatnonzero(ok)
        if len(idx):
            breaks = np.flatnonzero(np.diff(idx) > 1)
            starts = np.concatenate([[idx[0]], idx[breaks + 1]])
            ends = np.concatenate([idx[breaks], [idx[-1]]])
            for s, e in zip(starts, ends):
                lo = _bisect(p.points, k[s], k[s - 1], eps, True) if s > 0 else k[s]
                hi = _bisect(p.points, k[e], k[e + 1], eps, True) if e + 1 < len(k) else k[e]
                comps.append((float(lo), float(hi)))
        # components hidden between two failing nodes
        min_width = pitch / 2 ** 20
        lower = (dev[:-1] + dev[1:] - L * np.diff(k)) / 2
        suspicious = np.flatnonzero(~ok[:-1] & ~ok[1:] & (lower <= eps))
        for i in suspicious:
            m = _hidden(p.points, k[i], k[i + 1], dev[i], dev[i + 1], eps, L, min_width)
            if m is not None:
                a = _bisect(p.points, m, k[i], eps, True)
                b = _bisect(p.points, m, k[i + 1], eps, True)
                comps.append((float(a), float(b)))
                extra_pts.append([m])
                extra_dev.append(float(deviation(p.points, [[m]])[0]))
        comps.sort()
    pts = grid[ok]
    devs = dev[ok]
    if extra_pts:
        pts = np.concatenate([pts, np.array(extra_pts)])
        devs = np.concatenate([devs, extra_dev])
    pts, order = unique_points(pts, return_index=True) if len(pts) else (pts, np.zeros(0, np.int64))
    freqs = PointPatch(pts, freq_region)
    return CharacterSet(freqs, devs[order], eps, p.region, freq_region, pitch, len(p), comps, L)


def contains_exact(p: PointPatch, kappa, eps: float, slack: float = 1e-12) -> np.ndarray:
    """Direct membership test κ ∈ Λ^ε for the finite patch."""
    return deviation(p.points, kappa) <= eps + slack


# ---------------------------------------------------------------------------
# inclusion lemmas


@dataclass
class DualReport:
    sum_inclusion: bool
    sum_pairs: int
    dms3_dual_in_delta: bool
    dms3_delta_in_bidual: bool
    uniformly_discrete: Optional[bool]
    component_gap: float
    counts: Dict[str, int] = field(default_factory=dict)
    observations: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        ud = True if self.uniformly_discrete is None else self.uniformly_discrete
        return self.sum_inclusion and self.dms3_dual_in_delta and self.dms3_delta_in_bidual and ud

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["component_gap"] = "inf" if math.isinf(self.component_gap) else self.component_gap
        d["passed"] = self.passed
        return d


def dual_inclusion_checks(p: PointPatch, eps: float, freq_region: Box, pitch: float,
                          eps2: Optional[float] = None, max_pairs: int = 20000,
                          delta_box: Optional[Box] = None, workers: int = 1) -> DualReport:
    """Λ^ε + Λ^ε' ⊆ Λ^{ε+ε'}, Λ^ε ⊆ Δ^{2ε}, Δ ⊆ (Λ^ε)^{2ε} and, for ε < √3/2, discreteness of Λ^ε."""
    eps2 = eps if eps2 is None else eps2
    A = eps_dual(p, eps, freq_region, pitch, refine=p.dim == 1, workers=workers)
    B = eps_dual(p, eps2, freq_region, pitch, workers=workers) if eps2 != eps else A
    ka, kb = A.frequencies.points, B.frequencies.points
    # pair sums inside the frequency box, deterministic thinning when there are too many
    sums, i, j = pair_differences(ka, -kb, freq_region)
    if len(sums) > max_pairs:
        sel = np.linspace(0, len(sums) - 1, max_pairs).astype(int)
        sums = sums[sel]
    sum_ok = bool(np.all(contains_exact(p, sums, eps + eps2))) if len(sums) else True
    if delta_box is None:
        delta_box = Box(tuple(-p.region.widths), tuple(p.region.widths))
    delta = minkowski(p, [-1], [p], delta_box)
    dual_in_delta = bool(np.all(contains_exact(delta, ka, 2 * eps))) if len(ka) else True
    # Δ ⊆ (Λ^ε)^{2ε}: each difference is a 2ε-character of the computed dual set
    bidual = bool(np.all(deviation(ka, delta.points) <= 2 * eps + 1e-12)) if len(ka) else True
    obs = []
    ud = None
    gap = A.component_gap()
    if eps < SQRT3_2:
        lam_dense = np.isfinite(covering_radius(p)) and len(p) > 1
        if lam_dense:
            ud = bool(gap > 2 * pitch)
    else:
        obs.append(f"eps={eps} >= sqrt(3)/2: component gap {gap:.6g} logged, not asserted")
    return DualReport(sum_ok, len(sums), dual_in_delta, bidual, ud, gap,
                      {"dual": len(ka), "dual2": len(kb), "delta": len(delta)}, obs)


@dataclass
class HarmoniousVerdict:
    eps: float
    radius: float
    radius_doubled: float
    verdict: str  # harmonious-evidence | no-evidence
    half_width: float = 0.0

    def to_json(self) -> dict:
        return {k: ("inf" if isinstance(v, float) and math.isinf(v) else v) for k, v in self.__dict__.items()}


def _freq_covering(cs: CharacterSet) -> float:
    c = cs.centers()
    if len(c) == 0:
        return math.inf
    return covering_radius(PointPatch(c, cs.freq_region))


def harmonious_check(p: PointPatch, eps_list: Sequence[float], half_width: Optional[float] = None,
                     pitch: float = 1e-3, max_half_width: float = 64.0, workers: int = 1) -> List[HarmoniousVerdict]:
    """Relative denseness of Λ^ε: covering radius on [-W, W] and on [-2W, 2W] must be finite and agree.

    Without ``half_width`` the window starts at four inverse covering radii
    of Λ and doubles until the radius is well inside it (or the window
    reaches ``max_half_width``).
    """
    out = []
    for e in eps_list:
        if half_width is None:
            R = covering_radius(p)
            W = max(4.0, 4.0 / max(R, 1e-9)) if np.isfinite(R) else 4.0
        else:
            W = float(half_width)

        def radius(w):
            return _freq_covering(eps_dual(p, e, Box.cube(w, p.dim), pitch, refine=p.dim == 1, workers=workers))

        r1 = radius(W)
        while half_width is None and r1 >= W / 4 and 2 * W <= max_half_width:
            W *= 2
            r1 = radius(W)
        r2 = radius(2 * W)
        stable = np.isfinite(r1) and np.isfinite(r2) and abs(r2 - r1) <= max(0.25 * r1, 2 * pitch) and r1 < W / 4
        out.append(HarmoniousVerdict(float(e), r1, r2, "harmonious-evidence" if stable else "no-evidence", W))
    return out
