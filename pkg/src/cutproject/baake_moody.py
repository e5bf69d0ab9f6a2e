"""Families {P_ε} of almost periods, the five axioms A1-A5 and the completion they define.

The ε range is sampled on a finite decreasing grid ε_0 > ε_1 > ... and the
family is read as piecewise constant: P_ε = patch_i for ε in
(ε_{i+1}, ε_i], P_ε = patch_0 up to the cap C, P_ε = L from C on.  Every
"for all ε" statement below means "for all grid values".
"""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import groups as G
from . import scheme as S
from ._parallel import ordered_map
from .combs import almost_periods, sup_norm
from .config import DEFAULT
from .errors import ArgumentError, InsufficientDataError, NotLiftableError
from .geometry import Box, PointPatch, WeightedComb, as_points
from .pointset import covering_radius, covering_witness, is_uniformly_discrete, minkowski

MEMBER_TOL = 1e-7
PAIR_BUDGET = 2_000_000


@dataclass(frozen=True, eq=False)
class PeriodFamily:
    """Grid values, one patch per value, the cap C and a description of L.

    ``group_L`` is a list of generator vectors of L, or ``None`` for "all
    support differences" (then A5 is vacuous).  ``floor`` is the value the
    pseudo-metric reports below the last grid value.
    """

    eps_grid: Tuple[float, ...]
    patches: Tuple[PointPatch, ...]
    cap: float
    group_L: Optional[Tuple[Tuple[float, ...], ...]] = None
    floor: float = 0.0
    label: str = ""

    def __post_init__(self):
        grid = tuple(float(e) for e in self.eps_grid)
        if len(grid) != len(self.patches):
            raise ArgumentError("one patch per grid value required")
        if any(b >= a for a, b in zip(grid, grid[1:])):
            raise ArgumentError("eps grid must be strictly decreasing")
        if any(e <= 0 or e > self.cap for e in grid):
            raise ArgumentError("grid values must lie in (0, C]")
        object.__setattr__(self, "eps_grid", grid)
        object.__setattr__(self, "patches", tuple(self.patches))
        if self.group_L is not None:
            object.__setattr__(self, "group_L", tuple(tuple(float(v) for v in np.atleast_1d(g)) for g in self.group_L))

    @property
    def dim(self) -> int:
        return self.patches[0].dim

    @property
    def region(self) -> Box:
        reg = self.patches[0].region
        for p in self.patches[1:]:
            reg = reg.intersect(p.region) or reg
        return reg

    def membership(self, t) -> np.ndarray:
        """Boolean matrix (len(t), len(grid)): t ∈ patch_i."""
        t = as_points(t, self.dim)
        return np.stack([p.index(MEMBER_TOL).contains(t) for p in self.patches], axis=1)

    def level_for(self, eps: float) -> int:
        """Index of the patch representing P_eps (the smallest grid value >= eps)."""
        ok = [i for i, e in enumerate(self.eps_grid) if e >= eps - 1e-12]
        if not ok:
            raise ArgumentError(f"eps={eps} is above every grid value")
        return ok[-1]

    def save(self, directory: str) -> None:
        os.makedirs(directory, exist_ok=True)
        files = []
        for i, (e, p) in enumerate(zip(self.eps_grid, self.patches)):
            name = f"patch_{i:02d}.csv"
            with open(os.path.join(directory, name), "w") as fh:
                fh.write(p.to_csv())
            files.append({"eps": e, "file": name, "count": len(p), "region": p.region.to_json()})
        manifest = {"cap": self.cap, "floor": self.floor, "label": self.label,
                    "group_L": None if self.group_L is None else [list(g) for g in self.group_L],
                    "patches": files}
        with open(os.path.join(directory, "family.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, directory: str) -> "PeriodFamily":
        with open(os.path.join(directory, "family.json")) as fh:
            m = json.load(fh)
        patches, grid = [], []
        for rec in m["patches"]:
            rows = open(os.path.join(directory, rec["file"])).read().strip().splitlines()[1:]
            region = Box.from_json(rec["region"])
            pts = np.array([[float(v) for v in r.split(",")] for r in rows]).reshape(-1, region.dim)
            patches.append(PointPatch(pts, region))
            grid.append(rec["eps"])
        return cls(tuple(grid), tuple(patches), m["cap"], m["group_L"], m["floor"], m.get("label", ""))


# ---------------------------------------------------------------------------
# families from closed forms


def padic_family(p: int = 2, nmax: int = 8, half_width: float = 1e4) -> PeriodFamily:
    """P_{1/n} = p^n Z on [-half_width, half_width] for n = 1..nmax; C = 1."""
    region = Box.interval(-half_width, half_width)
    patches = []
    for n in range(1, nmax + 1):
        m = p ** n
        k = np.arange(-math.floor(half_width / m), math.floor(half_width / m) + 1)
        patches.append(PointPatch((k * m).reshape(-1, 1).astype(float), region, (k * m).reshape(-1, 1)))
    grid = tuple(1.0 / n for n in range(1, nmax + 1))
    return PeriodFamily(grid, tuple(patches), 1.0, ((1.0,),), floor=1.0 / (nmax + 1), label=f"padic({p})")


def lattice_family(modulus: int, grid: Sequence[float], half_width: float = 1e3, cap: float = 1.0) -> PeriodFamily:
    """P_ε = modulus·Z for every ε (modulus 1: the trivial completion; n: the cyclic one)."""
    region = Box.interval(-half_width, half_width)
    k = np.arange(-math.floor(half_width / modulus), math.floor(half_width / modulus) + 1) * modulus
    patch = PointPatch(k.reshape(-1, 1).astype(float), region, k.reshape(-1, 1))
    return PeriodFamily(tuple(grid), tuple([patch] * len(grid)), cap, ((1.0,),), label=f"{modulus}Z")


def a3_violating_family(half_width: float = 50.0) -> PeriodFamily:
    """P_ε = Z ∪ {±0.3/ε} on the grid {0.8, 0.4, 0.2}."""
    region = Box.interval(-half_width, half_width)
    grid = (0.8, 0.4, 0.2)
    n = np.arange(-math.floor(half_width), math.floor(half_width) + 1).astype(float)
    patches = tuple(PointPatch(np.concatenate([n, [0.3 / e, -0.3 / e]]).reshape(-1, 1), region) for e in grid)
    return PeriodFamily(grid, patches, 1.0, None, label="A3 counterexample")


# ---------------------------------------------------------------------------
# axioms


@dataclass
class AxiomReport:
    grid: List[float]
    monotone: bool
    A1: bool
    A2: bool
    A3: bool
    A4: bool
    A5: bool
    details: Dict[str, object] = field(default_factory=dict)
    a3_witness: Optional[dict] = None
    finite_sets: Dict[str, List[List[float]]] = field(default_factory=dict)
    note: str = "all statements are checked for the grid values only"

    @property
    def passed(self) -> bool:
        return self.monotone and self.A1 and self.A2 and self.A3 and self.A4 and self.A5

    def failing(self) -> List[str]:
        return [k for k in ("monotone", "A1", "A2", "A3", "A4", "A5") if not getattr(self, k)]

    def to_json(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        d["failing"] = self.failing()
        return _jsonable(d)


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, (np.floating, float)):
        return "inf" if math.isinf(o) else float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    return o


def _test_box(region: Box, a: PointPatch, b: PointPatch) -> Box:
    """Central box small enough that |a ∩ box| * |b ∩ box| stays within the pair budget."""
    box = region
    while True:
        na = int(np.sum(box.contains(a.points))) if len(a) else 0
        nb = int(np.sum(box.contains(b.points))) if len(b) else 0
        if na * nb <= PAIR_BUDGET:
            return box
        c, w = box.center, box.widths / 4
        box = Box(tuple(c - w), tuple(c + w), box.closed)


def _in_span(t: np.ndarray, gens: Sequence[Sequence[float]], tol: float = 1e-7) -> np.ndarray:
    """t ∈ Z-span of the generators (exact integer test after a least-squares solve)."""
    B = np.array(gens, dtype=float).T  # (d, k)
    t = as_points(t, B.shape[0])
    if B.shape[1] == 1 or np.linalg.matrix_rank(B) == B.shape[1]:
        coef, *_ = np.linalg.lstsq(B, t.T, rcond=None)
        coef = coef.T
        k = np.round(coef)
        return np.all(np.abs(coef - k) <= tol, axis=1) & np.all(np.abs(k @ B.T - t) <= tol, axis=1)
    raise ArgumentError("A5 needs Z-independent generators over R (use lattice coordinates otherwise)")


def verify_axioms(f: PeriodFamily, threshold: float = DEFAULT.discreteness, cover_pair: Tuple[float, float] = None,
                  workers: int = 1) -> AxiomReport:
    """Check the axioms A1-A5 and monotonicity on the safe region for every grid value."""
    grid = f.eps_grid
    if len(grid) < 3:
        raise ArgumentError("at least three grid values are needed")
    region = f.region
    C = f.cap
    det: Dict[str, object] = {}

    # monotonicity: patch_{i+1} ⊆ patch_i
    mono = True
    for i in range(len(grid) - 1):
        small = f.patches[i + 1].restrict(region)
        if len(small) and not np.all(f.patches[i].index(MEMBER_TOL).contains(small.points)):
            mono = False
            det.setdefault("monotone_failures", []).append([grid[i + 1], grid[i]])

    # A1: 0 ∈ P and P = -P where both signs are inside the region
    a1 = True
    for e, p in zip(grid, f.patches):
        idx = p.index(MEMBER_TOL)
        zero_ok = bool(idx.contains(np.zeros((1, p.dim)))[0])
        inside = region.contains(-p.points) if len(p) else np.zeros(0, bool)
        sym_ok = bool(np.all(idx.contains(-p.points[inside]))) if len(p) else True
        if not (zero_ok and sym_ok):
            a1 = False
            det.setdefault("A1_failures", []).append({"eps": e, "zero": zero_ok, "symmetric": sym_ok})

    # A2: uniform discreteness for ε < C/2
    a2 = True
    gaps = {}
    for e, p in zip(grid, f.patches):
        if e < C / 2:
            ok, g = is_uniformly_discrete(p, threshold)
            gaps[str(e)] = g
            a2 &= ok
    det["A2_min_gaps"] = gaps

    # A3: P_ε + P_ε' ⊆ P_{ε+ε'} for grid pairs with ε+ε' <= max grid
    pairs = [(i, j) for i in range(len(grid)) for j in range(i, len(grid)) if grid[i] + grid[j] <= grid[0] + 1e-12]

    def check_pair(ij):
        i, j = ij
        k = f.level_for(grid[i] + grid[j])
        box = _test_box(region, f.patches[i], f.patches[j])
        a, b = f.patches[i].restrict(box), f.patches[j].restrict(box)
        sums = minkowski(a, [1], [b], region)
        if not len(sums):
            return None
        member = f.patches[k].index(MEMBER_TOL).contains(sums.points)
        if np.all(member):
            return None
        bad_all = sums.points[~member]
        bad = bad_all[np.argmin(np.linalg.norm(bad_all, axis=1))]
        # recover one witnessing pair
        idx_b = b.index(MEMBER_TOL)
        for t in a.points:
            if idx_b.contains((bad - t).reshape(1, -1))[0]:
                return {"eps": grid[i], "eps2": grid[j], "target": grid[k],
                        "t": t.tolist(), "s": (bad - t).tolist(), "sum": bad.tolist()}
        return {"eps": grid[i], "eps2": grid[j], "target": grid[k], "sum": bad.tolist()}

    res = ordered_map(check_pair, pairs, workers)
    fails = [r for r in res if r is not None]
    a3 = not fails
    det["A3_pairs_checked"] = len(pairs)

    # A4: relatively dense
    a4 = True
    radii = {}
    big = float(np.min(region.widths)) / 4
    for e, p in zip(grid, f.patches):
        R = covering_radius(p.restrict(region)) if len(p) else math.inf
        radii[str(e)] = R
        a4 &= bool(np.isfinite(R) and R <= big)
    det["A4_covering_radii"] = radii

    # A5: P_ε ⊆ L
    a5 = True
    if f.group_L is not None:
        gens = np.array(f.group_L)
        for e, p in zip(grid, f.patches):
            if p.coords is not None and p.coords.shape[1] == len(gens):
                # exact: integer lattice coordinates reproduce the points
                ok = np.all(np.abs(p.coords @ gens - p.points) <= MEMBER_TOL)
            else:
                ok = not len(p) or np.all(_in_span(p.points, f.group_L))
            if not ok:
                a5 = False
                det.setdefault("A5_failures", []).append(e)
    else:
        det["A5"] = "L = all support differences (vacuous)"

    finite_sets = {}
    if cover_pair is not None and a4:
        e1, e2 = cover_pair
        P1 = f.patches[f.level_for(e1)]
        P2 = f.patches[f.level_for(e2)]
        w = covering_witness(P1.restrict(region), P2.restrict(region))
        finite_sets[f"{e1},{e2}"] = w.F.points.tolist()
        det["cover_verified"] = w.verified
        det["cover_unreduced_size"] = len(w.full)

    return AxiomReport(list(grid), mono, a1, a2, a3, a4, a5, det, fails[0] if fails else None, finite_sets)


# ---------------------------------------------------------------------------
# pseudo-metric


def pseudo_metric(f: PeriodFamily, x, y) -> float:
    """d(x, y) = inf{ε : x - y ∈ P_ε}, read off the piecewise-constant family; C when no patch has x - y."""
    return float(pseudo_metric_many(f, np.atleast_1d(x).reshape(1, -1), np.atleast_1d(y).reshape(1, -1))[0])


def pseudo_metric_many(f: PeriodFamily, x, y) -> np.ndarray:
    x = as_points(x, f.dim)
    y = as_points(y, f.dim)
    t = x - y
    region = f.region
    if not np.all(region.contains(t)):
        raise InsufficientDataError("x - y lies outside the region covered by the family")
    member = f.membership(t)
    n = len(f.eps_grid)
    lower = np.array(list(f.eps_grid[1:]) + [f.floor])
    # deepest level containing t
    deepest = np.where(member.any(axis=1), n - 1 - np.argmax(member[:, ::-1], axis=1), -1)
    out = np.where(deepest >= 0, lower[np.maximum(deepest, 0)], f.cap)
    zero = np.all(np.abs(t) <= MEMBER_TOL, axis=1)
    return np.where(zero, 0.0, out)


def grid_step(f: PeriodFamily) -> float:
    g = list(f.eps_grid) + [f.floor]
    return float(max([f.cap - g[0]] + [a - b for a, b in zip(g, g[1:])]))


# ---------------------------------------------------------------------------
# completion coordinates


@dataclass(frozen=True, eq=False)
class Transversal:
    level: int
    reps: np.ndarray


def _l_candidates(f: PeriodFamily, half: float) -> np.ndarray:
    """Points of L in [-half, half]^d, nonnegative ones first (ascending), then the negatives."""
    if f.group_L is None:
        pts = np.concatenate([p.points for p in f.patches])
        raise_if = len(pts) == 0
        if raise_if:
            raise InsufficientDataError("no candidates for L")
        pts = pts[np.all(np.abs(pts) <= half + MEMBER_TOL, axis=1)]
    else:
        gens = np.array(f.group_L)
        step = float(np.min(np.linalg.norm(gens, axis=1)))
        kmax = int(math.floor(half * math.sqrt(f.dim) / step)) + 1
        per = kmax * 2 + 1
        if per ** len(gens) > 4_000_000:
            raise InsufficientDataError("transversal search box too large")
        ks = np.stack(np.meshgrid(*[np.arange(-kmax, kmax + 1)] * len(gens), indexing="ij"), -1).reshape(-1, len(gens))
        pts = ks @ gens
        pts = pts[np.all(np.abs(pts) <= half + MEMBER_TOL, axis=1)]
    from .geometry import unique_points
    pts = unique_points(pts)
    neg = np.any(pts < -MEMBER_TOL, axis=1)
    nonneg = pts[~neg]
    nonneg = nonneg[np.lexsort(tuple(nonneg.T[::-1]) + (np.linalg.norm(nonneg, axis=1),))]
    negs = pts[neg]
    negs = negs[np.lexsort(tuple(negs.T[::-1]) + (np.linalg.norm(negs, axis=1),))]
    return np.concatenate([nonneg, negs])


def transversal(f: PeriodFamily, level: int) -> Transversal:
    """First-seen coset representatives of L / P_{ε_level} among L-points within two covering radii."""
    P = f.patches[level]
    R = covering_radius(P.restrict(f.region))
    if not np.isfinite(R):
        raise InsufficientDataError("patch is not relatively dense")
    cand = _l_candidates(f, 2 * R)
    idx = P.index(MEMBER_TOL)
    reps: List[np.ndarray] = []
    for c in cand:
        if reps:
            diffs = c - np.array(reps)
            if np.any(idx.contains(diffs)):
                continue
        reps.append(c)
    return Transversal(level, np.array(reps).reshape(-1, f.dim))


@dataclass(frozen=True)
class CompletionCoords:
    residues: Tuple[Tuple[float, ...], ...]

    def integers(self) -> List[int]:
        return [int(round(r[0])) for r in self.residues]

    def digits(self, p: int) -> List[int]:
        """Base-p digits from nested residues r_i mod p^(i+1)."""
        out, prev = [], 0
        for i, r in enumerate(self.integers()):
            out.append(((r - prev) // p ** i) % p)
            prev = r
        return out


class CompletionMap:
    """Reduces points of L against stored transversals, one per grid level."""

    def __init__(self, f: PeriodFamily, depth: Optional[int] = None):
        depth = len(f.eps_grid) if depth is None else depth
        if depth > len(f.eps_grid):
            raise ArgumentError("depth exceeds the grid length")
        self.family = f
        self.transversals = [transversal(f, i) for i in range(depth)]
        self._index = [f.patches[i].index(MEMBER_TOL) for i in range(depth)]

    def coords_many(self, x, depth: Optional[int] = None) -> np.ndarray:
        """(N, depth, d) array of representatives."""
        f = self.family
        depth = len(self.transversals) if depth is None else depth
        if depth > len(self.transversals):
            raise ArgumentError("depth exceeds the stored transversals")
        x = as_points(x, f.dim)
        out = np.empty((len(x), depth, f.dim))
        for lvl in range(depth):
            reps = self.transversals[lvl].reps
            found = np.full(len(x), -1)
            for k, r in enumerate(reps):
                t = x - r
                ok = (found < 0) & f.region.contains(t)
                if ok.any():
                    hit = np.zeros(len(x), dtype=bool)
                    hit[ok] = self._index[lvl].contains(t[ok])
                    found[hit] = k
            if np.any(found < 0):
                raise InsufficientDataError("point not reducible against the transversal on this region")
            out[:, lvl] = reps[found]
        return out

    def coords(self, x, depth: Optional[int] = None) -> CompletionCoords:
        a = self.coords_many(np.atleast_1d(x).reshape(1, -1), depth)[0]
        return CompletionCoords(tuple(tuple(float(v) for v in row) for row in a))


def completion_coords(f: PeriodFamily, x, depth: int) -> CompletionCoords:
    return CompletionMap(f, depth).coords(x, depth)


# ---------------------------------------------------------------------------
# lifting


@dataclass(frozen=True)
class LiftResult:
    value: complex
    representatives: int
    spread: float
    level_eps: float


def lift_function(c: WeightedComb, f: PeriodFamily, query, tol: float,
                  periods: Optional[PointPatch] = None) -> LiftResult:
    """Weight of the comb at support points y with d(query, y) <= tol.

    Below the grid, P_tol is computed from the comb itself (sup-norm
    almost periods).  All representatives must agree up to 2 tol, which is
    the uniform-continuity bound the family guarantees.
    """
    q = as_points(query, c.dim)[0]
    if periods is None:
        if tol >= f.eps_grid[-1]:
            periods = f.patches[f.level_for(tol)]
        else:
            periods = almost_periods(c, tol, "sup", f.region).periods
    diffs = q - c.points
    ok = periods.region.contains(diffs)
    hit = np.zeros(len(c), dtype=bool)
    hit[ok] = periods.index(MEMBER_TOL).contains(diffs[ok])
    if not hit.any():
        raise InsufficientDataError("no representative within the tolerance")
    vals = c.weights[hit]
    spread = float(np.max(np.abs(vals - vals[0]))) if len(vals) > 1 else 0.0
    if spread > 2 * tol + 1e-12:
        raise NotLiftableError(f"representatives disagree by {spread:.3g} > 2 tol")
    near = np.argmin(np.linalg.norm(diffs[hit], axis=1))
    return LiftResult(complex(vals[near]), int(hit.sum()), spread, tol)


def continuity_precheck(c: WeightedComb, f: PeriodFamily, n_pairs: int = 200, seed: int = 0) -> bool:
    """|ω(x) - ω(y)| <= ε whenever y - x ∈ P_ε, on sampled support pairs."""
    rng = np.random.default_rng(seed)
    if len(c) < 2:
        return True
    idx = c.index(MEMBER_TOL)
    for e, p in zip(f.eps_grid, f.patches):
        if len(p) < 2:
            continue
        xs = c.points[rng.integers(0, len(c), n_pairs)]
        ts = p.points[rng.integers(0, len(p), n_pairs)]
        j = idx.find(xs + ts)
        i = idx.find(xs)
        m = j >= 0
        if np.any(np.abs(c.weights[j[m]] - c.weights[i[m]]) > e + 1e-12):
            return False
    return True


# ---------------------------------------------------------------------------
# reconstruction


@dataclass
class ReconstructionReport:
    axioms: AxiomReport
    sup_norm: float
    counts: Dict[str, int]
    reference: Optional[Dict[str, dict]] = None
    scheme_produced: bool = False

    def to_json(self) -> dict:
        return _jsonable({"axioms": self.axioms.to_json(), "sup_norm": self.sup_norm, "counts": self.counts,
                          "reference": self.reference, "scheme_produced": self.scheme_produced})


def reconstruct(c: WeightedComb, eps_grid: Sequence[float], search_region: Optional[Box] = None,
                reference: Optional[S.SchemeSpec] = None, radius_of_eps=None, group_L=None,
                workers: int = 1) -> Tuple[PeriodFamily, ReconstructionReport]:
    """P_ε^∞ per grid value, assembled into a family and checked against the axioms.

    With a reference scheme (and lattice coordinates on the comb), every
    P_ε is checked to sit inside the model set of the internal ball of
    radius ``radius_of_eps(ε)`` (default ε).
    """
    C = sup_norm(c)
    grid = tuple(sorted((float(e) for e in eps_grid), reverse=True))
    if not grid or grid[0] >= C or grid[-1] <= 0:
        raise ArgumentError("grid values must lie in (0, sup_norm)")
    search = search_region or Box.cube(float(np.min(c.region.widths)) / 4, c.dim)
    top = almost_periods(c, grid[0], "sup", search, workers=workers)
    sets = [top] + [top.below(e) for e in grid[1:]]
    patches = tuple(a.periods for a in sets)
    if group_L is None and reference is not None:
        group_L = tuple(tuple(col) for col in reference.phys_map.T)
    fam = PeriodFamily(grid, patches, C, group_L, label="reconstructed")
    try:
        ax = verify_axioms(fam, workers=workers)
    except InsufficientDataError as e:
        ax = AxiomReport(list(grid), False, False, False, False, False, False, {"error": str(e)})
    counts = {str(e): len(p) for e, p in zip(grid, patches)}
    ref = None
    if reference is not None:
        ref = {}
        rad = radius_of_eps or (lambda e: e)
        for a in sets:
            pc = a.periods.coords
            if pc is None:
                raise InsufficientDataError("the comb carries no lattice coordinates for the reference check")
            h = S.internal_values(reference, pc)
            if isinstance(reference.internal, G.Euclidean):
                size = np.max(np.abs(h), axis=1) if len(h) else np.zeros(0)
                r = rad(a.epsilon)
                ref[str(a.epsilon)] = {"radius": r, "max_star": float(size.max()) if len(size) else 0.0,
                                       "contained": bool(np.all(size <= r + 1e-9))}
            else:
                ref[str(a.epsilon)] = {"star_values": sorted(set(np.asarray(h).tolist()))}
    return fam, ReconstructionReport(ax, C, counts, ref, scheme_produced=ax.passed)
