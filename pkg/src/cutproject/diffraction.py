"""Autocorrelation, Fourier-Bohr coefficients, Bragg tables, means and densities at desk scale.

All limits along van Hove sequences are replaced by finite boxes; every
estimate carries the boundary ratio of its box as an O(1/N) error proxy.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import groups as G
from . import scheme as S
from ._parallel import chunk_slices, ordered_map, split_rows
from .config import CHUNK_ENTRIES, DEFAULT
from .errors import ArgumentError, InsufficientDataError
from .geometry import Box, PointIndex, PointPatch, WeightedComb, _fmt, as_points, pair_differences, quantize


# ---------------------------------------------------------------------------
# van Hove sequences


def boundary_ratio(box: Box, r: float) -> float:
    """vol((A + B_r) minus the r-interior of A) / vol(A) for a box A."""
    outer = float(np.prod(box.widths + 2 * r))
    inner = float(np.prod(np.clip(box.widths - 2 * r, 0, None)))
    return (outer - inner) / box.volume


@dataclass(frozen=True, eq=False)
class BoxSequence:
    """Increasing boxes A_1 ⊂ A_2 ⊂ ... standing in for a van Hove sequence."""

    boxes: Tuple[Box, ...]
    kind: str = "custom"
    test_radius: float = 1.0

    def __post_init__(self):
        boxes = tuple(self.boxes)
        if not boxes:
            raise ArgumentError("a box sequence needs at least one box")
        vols = [b.volume for b in boxes]
        if any(v2 <= v1 for v1, v2 in zip(vols, vols[1:])):
            raise ArgumentError("box volumes must be strictly increasing")
        for a, b in zip(boxes, boxes[1:]):
            if np.any(b.lo > a.lo) or np.any(b.hi < a.hi):
                raise ArgumentError("boxes must be nested")
        ratios = self.van_hove_ratios()
        if any(r2 >= r1 for r1, r2 in zip(ratios, ratios[1:])):
            raise ArgumentError("van Hove ratios must decrease along the sequence")
        object.__setattr__(self, "boxes", boxes)

    @classmethod
    def centered_cubes(cls, n: int, dim: int = 1, start: int = 0, center=None) -> "BoxSequence":
        """Cubes of side 2^j, j = start .. start+n-1."""
        boxes = tuple(Box.cube(2.0 ** j / 2, dim, center) for j in range(start, start + n))
        return cls(boxes, "centered-cubes")

    @classmethod
    def up_to(cls, half_width: float, n: int = 6, dim: int = 1) -> "BoxSequence":
        """n centered cubes with halving sides ending at the given half-width."""
        boxes = tuple(Box.cube(half_width / 2 ** (n - 1 - j), dim) for j in range(n))
        return cls(boxes, "centered-cubes")

    def __len__(self) -> int:
        return len(self.boxes)

    def __getitem__(self, i) -> Box:
        return self.boxes[i]

    def van_hove_ratios(self, r: Optional[float] = None) -> List[float]:
        r = self.test_radius if r is None else r
        return [boundary_ratio(b, r) for b in self.boxes]


# ---------------------------------------------------------------------------
# autocorrelation


@dataclass(frozen=True, eq=False)
class AutocorrelationEstimate:
    comb: WeightedComb
    box: Box
    normalization: float
    max_lag: Optional[float] = None

    def value_at(self, z) -> np.ndarray:
        return self.comb.weight_at(z)

    def hermitian_defect(self) -> float:
        """max |γ({-z}) - conj γ({z})| over the stored lags."""
        c = self.comb
        if len(c) == 0:
            return 0.0
        mirror = c.weight_at(-c.points)
        return float(np.max(np.abs(mirror - np.conj(c.weights))))

    def fourier_bohr(self, kappa, half_width: float) -> np.ndarray:
        """(1/vol B) Σ_{z ∈ B} γ({z}) e^{-2πi<κ,z>} on the lag cube B of the given half-width."""
        return fourier_bohr_many(self.comb, kappa, Box.cube(half_width, self.comb.dim))


def _group(keys: np.ndarray, pts: np.ndarray, vals: np.ndarray):
    """Sum ``vals`` over equal key rows (sorted); representative point is the first occurrence."""
    if len(keys) == 0:
        return keys, pts, vals
    order = np.lexsort(keys.T[::-1])
    ks = keys[order]
    start = np.ones(len(ks), dtype=bool)
    start[1:] = np.any(ks[1:] != ks[:-1], axis=1)
    seg = np.cumsum(start) - 1
    n = int(seg[-1]) + 1
    v = vals[order]
    re = np.bincount(seg, v.real, n)
    im = np.bincount(seg, v.imag, n)
    first = order[start]
    return keys[first], pts[first], re + 1j * im


def autocorrelation(c: WeightedComb, box: Box, max_lag: Optional[float] = None,
                    workers: int = 1, chunk: int = 2048) -> AutocorrelationEstimate:
    """γ_n({z}) = (1/vol A) Σ_{x, x+z ∈ supp ∩ A} ω(x+z) conj ω(x), lags optionally capped at ``max_lag``.

    Lags are merged through lattice coordinates when the comb has them, else
    on the equality grid.  Chunks are fixed-size, so the result does not
    depend on ``workers``.
    """
    if c.region.intersect(box) is None or np.any(box.lo < c.region.lo - 1e-12) or np.any(box.hi > c.region.hi + 1e-12):
        raise ArgumentError("comb region must contain the box")
    sub = c.restrict(box)
    d = c.dim
    if max_lag is None:
        lag_box = Box(tuple(-box.widths), tuple(box.widths))
    else:
        lag_box = Box.cube(float(max_lag), d)
    vol = box.volume
    if len(sub) == 0:
        warnings.warn("empty support in the box: zero autocorrelation", RuntimeWarning, stacklevel=2)
        return AutocorrelationEstimate(WeightedComb(np.zeros((0, d)), np.zeros(0), lag_box), box, vol, max_lag)
    pts, w = sub.points, sub.weights
    coords = sub.coords

    def run(sl):
        diffs, i, j = pair_differences(pts[sl], pts, lag_box)
        i = i + sl.start
        vals = w[i] * np.conj(w[j])
        keys = coords[i] - coords[j] if coords is not None else quantize(diffs)
        return _group(keys, diffs, vals)

    parts = ordered_map(run, chunk_slices(len(pts), chunk), workers)
    keys = np.concatenate([p[0] for p in parts])
    lag_pts = np.concatenate([p[1] for p in parts])
    vals = np.concatenate([p[2] for p in parts])
    keys, lag_pts, vals = _group(keys, lag_pts, vals)
    lag_coords = keys if coords is not None else None
    est = WeightedComb(lag_pts, vals / vol, lag_box, lag_coords, label=f"autocorrelation({c.label})")
    return AutocorrelationEstimate(est, box, vol, max_lag)


# ---------------------------------------------------------------------------
# Fourier-Bohr coefficients


def fourier_bohr_many(c: WeightedComb, kappa, box: Box, workers: int = 1) -> np.ndarray:
    """(1/vol box) Σ_{x ∈ supp ∩ box} ω(x) e^{-2πi<κ,x>} for each row κ."""
    sub = c.restrict(box)
    k = as_points(kappa, c.dim)
    if len(sub) == 0:
        return np.zeros(len(k), dtype=complex)
    x, w = sub.points, sub.weights

    def run(sl):
        ph = k[sl] @ x.T
        ph = ph - np.round(ph)
        return np.exp(-2j * np.pi * ph) @ w

    parts = ordered_map(run, split_rows(len(k), len(x), CHUNK_ENTRIES // 4), workers)
    return (np.concatenate(parts) if parts else np.zeros(0, dtype=complex)) / box.volume


def fourier_bohr(c: WeightedComb, kappa, box: Box) -> complex:
    return complex(fourier_bohr_many(c, np.reshape(kappa, (1, -1)), box)[0])


# ---------------------------------------------------------------------------
# diffraction tables


@dataclass(frozen=True, eq=False)
class DiffractionTable:
    """Pure-point rows (κ, c_κ, |c_κ|²) over a list of candidate frequencies."""

    kappa: np.ndarray
    coefficients: np.ndarray
    box: Box
    source: str = "grid"
    coords: Optional[np.ndarray] = None
    kappa_star: Optional[np.ndarray] = None
    predicted: Optional[np.ndarray] = None
    mass: float = 0.0
    label: str = ""

    def __post_init__(self):
        k = as_points(self.kappa)
        object.__setattr__(self, "kappa", k)
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=complex).reshape(-1))
        if len(self.coefficients) != len(k):
            raise ArgumentError("one coefficient per frequency required")
        if self.coords is not None:
            object.__setattr__(self, "coords", np.asarray(self.coords, dtype=np.int64).reshape(len(k), -1))

    def __len__(self) -> int:
        return len(self.kappa)

    @property
    def dim(self) -> int:
        return self.kappa.shape[1]

    @property
    def intensities(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    @property
    def predicted_intensities(self) -> Optional[np.ndarray]:
        return None if self.predicted is None else np.abs(self.predicted) ** 2

    @property
    def error_bound(self) -> float:
        """O(1/N) proxy: boundary ratio of the averaging box at unit radius."""
        return boundary_ratio(self.box, 1.0)

    def subset(self, mask) -> "DiffractionTable":
        m = np.asarray(mask)
        pick = lambda a: None if a is None else a[m]
        return DiffractionTable(self.kappa[m], self.coefficients[m], self.box, self.source, pick(self.coords),
                                pick(self.kappa_star), pick(self.predicted), self.mass, self.label)

    def lookup(self, kappa=None, coords=None, tol: float = 1e-7) -> np.ndarray:
        """Row index of each query (-1 when absent); exact through coordinates when both sides have them."""
        if coords is not None and self.coords is not None:
            table = {tuple(r): i for i, r in enumerate(self.coords.tolist())}
            q = np.asarray(coords, dtype=np.int64).reshape(-1, self.coords.shape[1])
            return np.array([table.get(tuple(r), -1) for r in q.tolist()], dtype=np.int64)
        return PointIndex(self.kappa, tol).find(as_points(kappa, self.dim))

    def zero_row(self) -> int:
        i = int(self.lookup(np.zeros((1, self.dim)))[0])
        if i < 0:
            raise ArgumentError("the table has no row at κ = 0")
        return i

    def gamma0(self) -> float:
        """γ̂({0}) estimated from the table itself."""
        return float(self.intensities[self.zero_row()])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = [f"kappa{i}" for i in range(self.dim)] + ["re", "im", "intensity"]
        if self.predicted is not None:
            head.append("predicted_intensity")
        w.writerow(head)
        pi = self.predicted_intensities
        for r in range(len(self)):
            row = [_fmt(v) for v in self.kappa[r]]
            c = self.coefficients[r]
            row += [_fmt(c.real), _fmt(c.imag), _fmt(abs(c) ** 2)]
            if pi is not None:
                row.append(_fmt(pi[r]))
            w.writerow(row)
        return buf.getvalue()

    def to_gnuplot(self) -> str:
        """Two columns ``kappa intensity`` (first coordinate), sorted by κ."""
        order = np.argsort(self.kappa[:, 0], kind="stable")
        lines = [f"# {self.label or 'diffraction'} source={self.source}"]
        lines += [f"{_fmt(self.kappa[i, 0])} {_fmt(self.intensities[i])}" for i in order]
        return "\n".join(lines) + "\n"

    def metadata(self) -> dict:
        return {"rows": len(self), "box": self.box.to_json(), "source": self.source, "mass": self.mass,
                "error_bound": self.error_bound, "label": self.label, "kind": "pure-point rows only"}


def dual_candidates(s: S.SchemeSpec, freq_box: Box, star_bound: float):
    """Dual-lattice projections κ in ``freq_box`` with |κ*| <= star_bound: (κ, coords, κ*)."""
    d = S.dual_scheme(s)
    m = d.internal.dim
    w = G.BoxWindow((Box.cube(star_bound, m),))
    patch = S.model_set(d, w, freq_box)
    ks = S.internal_values(d, patch.coords) if len(patch) else np.zeros((0, m))
    return patch.points, patch.coords, np.asarray(ks, dtype=float).reshape(-1, m)


def diffraction_table(c: WeightedComb, candidates, box: Box, coords=None, scheme: Optional[S.SchemeSpec] = None,
                      g: Optional[S.InternalFunction] = None, source: Optional[str] = None,
                      workers: int = 1) -> DiffractionTable:
    """Fourier-Bohr coefficients at the candidates.

    With ``scheme`` and dual ``coords`` each row gets κ*; with an analytic
    ``g.fourier`` also the prediction ĝ(-κ*)/calibration (for dual
    frequencies e^{-2πiκx} = e^{2πiκ*x*}).
    """
    k = as_points(candidates, c.dim)
    coef = fourier_bohr_many(c, k, box, workers)
    ks = pred = None
    if scheme is not None and coords is not None:
        d = S.dual_scheme(scheme)
        ks = np.asarray(S.internal_values(d, coords), dtype=float).reshape(len(k), -1)
        if g is not None and g.fourier is not None:
            pred = g.fourier(-ks) / scheme.calibration
    if source is None:
        source = "dual-scheme" if coords is not None else "grid"
    sub = c.restrict(box)
    mass = float(np.sum(np.abs(sub.weights)) / box.volume)
    return DiffractionTable(k, coef, box, source, coords, ks, pred, mass, c.label)


def visible_bragg(t: DiffractionTable, a: float) -> PointPatch:
    """I(a) = {κ : |c_κ|² >= a}; for a <= 0 the whole candidate set."""
    keep = t.intensities >= a if a > 0 else np.ones(len(t), dtype=bool)
    pts = t.kappa[keep]
    region = coverage_region(t)
    return PointPatch(pts, region, None if t.coords is None else t.coords[keep], label=f"I({a})")


def coverage_region(t: DiffractionTable) -> Box:
    if len(t) == 0:
        return Box.cube(1.0, t.dim)
    lo, hi = t.kappa.min(axis=0), t.kappa.max(axis=0)
    return Box(tuple(lo), tuple(hi))


# ---------------------------------------------------------------------------
# Krein inequality and Bragg inclusions


@dataclass
class KreinReport:
    tested: int
    skipped: int
    violations: List[dict]
    max_excess: float
    slack: float
    error_bound: float

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {**self.__dict__, "passed": self.passed}


def _sum_rows(t: DiffractionTable, i: np.ndarray, j: np.ndarray, sign: int = 1) -> np.ndarray:
    if t.coords is not None:
        return t.lookup(coords=t.coords[i] + sign * t.coords[j])
    return t.lookup(t.kappa[i] + sign * t.kappa[j])


def krein_check(t: DiffractionTable, max_pairs: int = 200, slack: float = 0.02) -> KreinReport:
    """|μ({x+ψ}) - μ({x})|² <= 2μ({0})(μ({0}) - Re μ({ψ})) with μ = table intensities.

    Pairs run over rows ordered by |κ| (ties by index) and are taken
    deterministically until ``max_pairs`` pairs with x+ψ present are found.
    """
    mu = t.intensities
    m0 = mu[t.zero_row()]
    order = np.lexsort((np.arange(len(t)), np.linalg.norm(t.kappa, axis=1)))
    tested = skipped = 0
    viol = []
    worst = -math.inf
    for a in order:
        if tested >= max_pairs:
            break
        bs = order
        s = _sum_rows(t, np.full(len(bs), a), bs)
        for b, r in zip(bs, s):
            if tested >= max_pairs:
                break
            if r < 0:
                skipped += 1
                continue
            tested += 1
            lhs = abs(mu[r] - mu[a]) ** 2
            rhs = 2 * m0 * (m0 - mu[b])
            worst = max(worst, lhs - rhs)
            if lhs > rhs + slack:
                viol.append({"x": t.kappa[a].tolist(), "psi": t.kappa[b].tolist(), "lhs": float(lhs), "rhs": float(rhs)})
    return KreinReport(tested, skipped, viol, float(worst), slack, t.error_bound)


def fake_krein_table() -> DiffractionTable:
    """Constructed table violating the Krein inequality: μ(0)=μ(1)=μ(2)=1 but μ(3)=0."""
    k = np.arange(0, 4, dtype=float).reshape(-1, 1)
    return DiffractionTable(k, np.array([1, 1, 1, 0], dtype=complex), Box.interval(-1e4, 1e4), "fake")


@dataclass
class InclusionReport:
    a: float
    b: float
    gamma0: float
    threshold: float
    tested: int
    missing: int
    failures: List[dict]
    triple_threshold: float
    triple_tested: int
    triple_failures: int
    triple_min_gap: float
    triple_size: int
    min_gap_required: float

    @property
    def passed(self) -> bool:
        return not self.failures and self.triple_failures == 0 and self.triple_min_gap >= self.min_gap_required

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        d["triple_min_gap"] = "inf" if math.isinf(self.triple_min_gap) else self.triple_min_gap
        d["passed"] = self.passed
        return d


def bragg_inclusion_check(t: DiffractionTable, a: float, b: float, slack: Optional[float] = None,
                          min_gap: float = 0.05) -> InclusionReport:
    """I(a) ± I(b) ⊆ I(b - δ(a)), δ(a) = √(2γ0(γ0 - a)), plus the three-fold sums of I(a).

    Inclusions are checked membership-wise for every sum present in the
    table; the three-fold set I(a) - I(a) - I(a) must also be uniformly
    discrete with gap at least ``min_gap``.
    """
    g0 = t.gamma0()
    if a > g0 or b > g0:
        raise ArgumentError(f"thresholds must not exceed γ̂({{0}}) = {g0:.6g}")
    slack = t.error_bound if slack is None else slack
    mu = t.intensities
    delta = math.sqrt(max(0.0, 2 * g0 * (g0 - a)))
    thr = b - delta
    ia = np.flatnonzero(mu >= a)
    ib = np.flatnonzero(mu >= b)
    tested = missing = 0
    fails = []
    for sign in (1, -1):
        ii, jj = np.repeat(ia, len(ib)), np.tile(ib, len(ia))
        rows = _sum_rows(t, ii, jj, sign)
        found = rows >= 0
        missing += int(np.sum(~found))
        tested += int(np.sum(found))
        bad = found & (mu[np.where(found, rows, 0)] < thr - slack)
        for x, y, r in zip(ii[bad], jj[bad], rows[bad]):
            fails.append({"kappa": t.kappa[x].tolist(), "psi": t.kappa[y].tolist(), "sign": sign,
                          "intensity": float(mu[r])})
    # three-fold: I(a) - I(a) - I(a) ⊆ I(a - 2δ(a)), and discreteness
    thr3 = a - 2 * delta
    trip = [(x, y, z) for x in ia for y in ia for z in ia]
    t_fail = t_tested = 0
    if t.coords is not None:
        cs = t.coords
        tc = np.array([cs[x] - cs[y] - cs[z] for x, y, z in trip]).reshape(len(trip), -1)
        tp = np.array([t.kappa[x] - t.kappa[y] - t.kappa[z] for x, y, z in trip]).reshape(len(trip), -1)
        uniq, idx = np.unique(tc, axis=0, return_index=True) if len(tc) else (tc, np.zeros(0, np.int64))
        pts = tp[idx]
        rows = t.lookup(coords=uniq) if len(uniq) else np.zeros(0, np.int64)
    else:
        tp = np.array([t.kappa[x] - t.kappa[y] - t.kappa[z] for x, y, z in trip]).reshape(len(trip), -1)
        from .geometry import unique_points
        pts = unique_points(tp) if len(tp) else tp
        rows = t.lookup(pts) if len(pts) else np.zeros(0, np.int64)
    if thr3 > 0:
        found = rows >= 0
        t_tested = int(np.sum(found))
        t_fail = int(np.sum(mu[rows[found]] < thr3 - slack))
    gap = math.inf
    if len(pts) > 1:
        from scipy.spatial import cKDTree
        dd, _ = cKDTree(pts).query(pts, k=2)
        gap = float(np.min(dd[:, 1]))
    return InclusionReport(a, b, g0, thr, tested, missing, fails, thr3, t_tested, t_fail, gap, len(pts), min_gap)


def almost_period_check(c: WeightedComb, box: Box, kappas, psis, eps: float, workers: int = 1) -> dict:
    """|γ̂({κ+ψ}) - γ̂({κ})| <= C ε for ψ in Δ^ε, with C = 2 (mean |ω|)².

    C is the finite-box mass estimate, not a sharp constant: |c_{κ+ψ}| and
    |c_κ| differ by at most ε·mean|ω| up to a common phase.
    """
    k = as_points(kappas, c.dim)
    p = as_points(psis, c.dim)
    sub = c.restrict(box)
    m = float(np.sum(np.abs(sub.weights)) / box.volume)
    C = 2 * m * m
    base = np.abs(fourier_bohr_many(c, k, box, workers)) ** 2
    shifted = np.abs(fourier_bohr_many(c, (k[:, None, :] + p[None, :, :]).reshape(-1, c.dim), box, workers)) ** 2
    diff = np.abs(shifted.reshape(len(k), len(p)) - base[:, None])
    worst = float(diff.max()) if diff.size else 0.0
    return {"C": C, "eps": eps, "bound": C * eps, "max_difference": worst, "pairs": int(diff.size),
            "passed": bool(worst <= C * eps + boundary_ratio(box, 1.0)), "note": "C is a finite-box estimate"}


# ---------------------------------------------------------------------------
# means and densities


def haar_mean(s: S.SchemeSpec, g: S.InternalFunction, samples: int = 20001) -> float:
    """∫ g dθ_H with the scheme's calibration: trapezoid on R^m, exact sums on cyclic and p-adic groups."""
    H = s.internal
    if isinstance(H, G.Euclidean):
        if g.integral is not None:
            return float(np.real(g.integral)) / s.calibration
        sup = g.support.bounding_box() if g.support is not None else None
        if sup is None or H.dim != 1:
            raise ArgumentError("need a 1D support box or a closed-form integral")
        h = np.linspace(sup.lo[0], sup.hi[0], samples)
        trap = getattr(np, "trapezoid", None) or np.trapz
        return float(trap(g(h.reshape(-1, 1)).real, h)) / s.calibration
    if isinstance(H, G.Cyclic):
        return float(np.sum(g(np.arange(H.n)).real)) * s.calibration
    if isinstance(H, G.PAdic):
        n = H.modulus
        return float(np.sum(g(np.arange(n)).real)) / n * s.calibration
    raise ArgumentError("haar mean is implemented for euclidean, cyclic and p-adic internal groups")


@dataclass
class MeanReport:
    means: List[complex]
    volumes: List[float]
    last: complex
    extrapolated: complex
    reference: Optional[float] = None
    error_bounds: List[float] = field(default_factory=list)

    def to_json(self) -> dict:
        cx = lambda z: [float(np.real(z)), float(np.imag(z))]
        return {"means": [cx(m) for m in self.means], "volumes": self.volumes, "last": cx(self.last),
                "extrapolated": cx(self.extrapolated), "reference": self.reference, "error_bounds": self.error_bounds}


def mean(c: WeightedComb, seq: BoxSequence, scheme: Optional[S.SchemeSpec] = None,
         g: Optional[S.InternalFunction] = None) -> MeanReport:
    """(Σ weights in A_n)/vol(A_n) along the sequence with a first-order Richardson step."""
    ms, vols = [], []
    for b in seq.boxes:
        sub = c.restrict(b)
        ms.append(complex(np.sum(sub.weights)) / b.volume)
        vols.append(b.volume)
    ext = 2 * ms[-1] - ms[-2] if len(ms) > 1 else ms[-1]
    ref = haar_mean(scheme, g) if scheme is not None and g is not None else None
    return MeanReport(ms, vols, ms[-1], ext, ref, [boundary_ratio(b, 1.0) for b in seq.boxes])


@dataclass
class DensityReport:
    lower: List[float]
    upper: List[float]
    lower_dens: float
    upper_dens: float
    uniform: bool
    estimate: float
    tolerance: float
    theta_interior: Optional[float] = None
    theta_closure: Optional[float] = None
    sandwich: Optional[bool] = None

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _count_in(points: np.ndarray, sorted_x: Optional[np.ndarray], box: Box) -> int:
    if sorted_x is not None:
        lo = np.searchsorted(sorted_x, box.lower[0], side="left" if box.closed else "right")
        hi = np.searchsorted(sorted_x, box.upper[0], side="right")
        return int(hi - lo)
    return int(np.sum(box.contains(points)))


def density_bounds(p: PointPatch, seq: BoxSequence, translations: int = 50, seed: int = 0,
                   tolerance: float = 0.01, scheme: Optional[S.SchemeSpec] = None, window=None) -> DensityReport:
    """min / max over seeded translations of #(p ∩ (x + A_n)) / vol(A_n).

    With the generating scheme and window also reports θ_H(W°) and
    θ_H(closure W) and checks θ_H(W°) <= lower <= upper <= θ_H(closure W)
    up to ``tolerance``.
    """
    rng = np.random.default_rng(seed)
    big = seq.boxes[-1]
    room_lo = p.region.lo - big.lo
    room_hi = p.region.hi - big.hi
    if np.any(room_hi < room_lo):
        raise InsufficientDataError("patch region is smaller than the largest box")
    shifts = rng.uniform(room_lo, room_hi, size=(translations, p.dim))
    sx = np.sort(p.points[:, 0]) if p.dim == 1 else None
    lows, ups = [], []
    for b in seq.boxes:
        dens = [_count_in(p.points, sx, b.shift(v)) / b.volume for v in shifts]
        lows.append(float(min(dens)))
        ups.append(float(max(dens)))
    est = _count_in(p.points, sx, p.region) / p.region.volume
    lo, hi = lows[-1], ups[-1]
    rep = DensityReport(lows, ups, lo, hi, bool(hi - lo <= tolerance), float(est), tolerance)
    if scheme is not None and window is not None:
        H = scheme.internal
        if isinstance(H, G.Euclidean):
            ti = G.haar_measure(H, G.interior_window(H, window), scheme.calibration)
            tc = ti if G.window_boundary_is_null(H, window) else G.haar_measure(H, window, scheme.calibration)
        else:
            # discrete groups: every window is clopen and the calibration scales the count measure
            ti = tc = G.haar_measure(H, window) * scheme.calibration / G.default_calibration(H)
        rep.theta_interior, rep.theta_closure = float(ti), float(tc)
        rep.sandwich = bool(ti - tolerance <= lo and hi <= tc + tolerance)
    return rep


# ---------------------------------------------------------------------------
# visible points of Z²


CRT_PRIMES = (2, 3, 5, 7)


@dataclass
class VisibleReport:
    N: int
    mask: np.ndarray  # visible[(a+N), (b+N)]
    density: float
    target: float
    blocks: Dict[int, Optional[Tuple[int, int]]]
    crt_block: Tuple[int, int]
    crt_verified: bool

    def _patch(self, keep) -> PointPatch:
        idx = np.argwhere(keep) - self.N
        return PointPatch(idx.astype(float), Box((-self.N, -self.N), (self.N, self.N)), idx)

    def visible(self) -> PointPatch:
        return self._patch(self.mask)

    def invisible(self) -> PointPatch:
        inv = ~self.mask
        inv[self.N, self.N] = False
        return self._patch(inv)

    def is_visible(self, a: int, b: int) -> bool:
        return bool(self.mask[a + self.N, b + self.N])

    def to_json(self) -> dict:
        return {"N": self.N, "density": self.density, "target": self.target,
                "blocks": {str(k): (None if v is None else list(v)) for k, v in self.blocks.items()},
                "crt_block": list(self.crt_block), "crt_verified": self.crt_verified}


def _crt(residues: Sequence[int], moduli: Sequence[int]) -> int:
    x, m = 0, 1
    for r, n in zip(residues, moduli):
        # solve x + m t ≡ r (mod n)
        t = ((r - x) * pow(m, -1, n)) % n
        x, m = x + m * t, m * n
    return x % m


def crt_block(k: int = 2, primes: Sequence[int] = CRT_PRIMES) -> Tuple[int, int]:
    """Corner (a, b) with gcd(a+i, b+j) > 1 for 0 <= i, j < k: cell (i, j) gets its own prime."""
    if len(primes) < k * k:
        raise ArgumentError("need one prime per block cell")
    cells = list(itertools.product(range(k), range(k)))
    ps = list(primes)[:k * k]
    a = _crt([-i for i, _ in cells], ps)
    b = _crt([-j for _, j in cells], ps)
    m = int(np.prod(ps))
    return (a if a > 0 else m, b if b > 0 else m)


def invisible_block_scan(k: int, limit: int) -> Optional[Tuple[int, int]]:
    """Lexicographically first (a, b) in [1, limit]² starting a k×k all-invisible block."""
    n = np.arange(1, limit + k)
    inv = np.gcd.outer(n, n) > 1
    ok = np.ones((limit, limit), dtype=bool)
    for i in range(k):
        for j in range(k):
            ok &= inv[i:i + limit, j:j + limit]
    hit = np.argwhere(ok)
    if len(hit) == 0:
        return None
    a, b = hit[0]
    return int(a + 1), int(b + 1)


def visible_points(N: int, block_limits: Dict[int, int] = None, chunk: int = 512) -> VisibleReport:
    """gcd sieve on [-N, N]², with block scans for k = 2, 3 and a CRT cross-check."""
    if not (isinstance(N, (int, np.integer)) and 1 <= N <= 10_000):
        raise ArgumentError("N must be an integer in [1, 10^4]")
    block_limits = {2: 1000, 3: 1000} if block_limits is None else block_limits
    vals = np.abs(np.arange(-N, N + 1))
    mask = np.zeros((2 * N + 1, 2 * N + 1), dtype=bool)
    for sl in chunk_slices(len(vals), chunk):
        mask[sl] = np.gcd.outer(vals[sl], vals) == 1
    count = int(mask.sum())
    dens = count / float((2 * N + 1) ** 2)
    blocks = {k: invisible_block_scan(k, lim) for k, lim in sorted(block_limits.items())}
    ca, cb = crt_block(2)
    crt_ok = all(math.gcd(ca + i, cb + j) > 1 for i in range(2) for j in range(2))
    if blocks.get(2) is not None:
        # the scan must not miss the explicit block: the first hit precedes it
        crt_ok = crt_ok and blocks[2] <= (ca, cb)
    return VisibleReport(int(N), mask, dens, 6 / math.pi ** 2, blocks, (ca, cb), bool(crt_ok))
