"""Concrete cut-and-project schemes and their model sets.

A scheme is given by integer lattice coordinates ``c ∈ Z^r`` and two
homomorphisms: the physical embedding ``x = P c`` in R^d and the star
map ``x* = S(c)`` into one of the catalog groups.  Lattice coordinates
stay exact integers; only the embeddings produce floats.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import groups as G
from ._parallel import ordered_map
from .config import DEFAULT
from .errors import (
    ArgumentError,
    CatalogError,
    EnumerationBoundError,
    SpecMismatchError,
    UnboundedSupportError,
    UnsupportedSchemeError,
)
from .geometry import Box, PointPatch, WeightedComb, as_points

COORD_BOUND = 10 ** 9
MAX_CANDIDATES = 50_000_000

SQRT2 = math.sqrt(2.0)
GOLDEN = (1 + math.sqrt(5.0)) / 2


def _star_data(internal: G.InternalGroupSpec, data, rank: int):
    """Normalise star-map data: matrix for euclidean, residues for discrete, tuple for products."""
    if isinstance(internal, G.Euclidean):
        a = np.asarray(data, dtype=float).reshape(internal.dim, rank)
        a.setflags(write=False)
        return a
    if isinstance(internal, (G.Cyclic, G.PAdic)):
        res = tuple(int(v) % internal.modulus for v in np.atleast_1d(data))
        if len(res) != rank:
            raise ArgumentError(f"star map needs one residue per generator ({rank})")
        return res
    if isinstance(internal, G.Product):
        if len(data) != len(internal.factors):
            raise ArgumentError("product star map needs one entry per factor")
        return tuple(_star_data(f, d, rank) for f, d in zip(internal.factors, data))
    raise SpecMismatchError(f"unknown internal group {internal!r}")


def _star_to_json(internal, data):
    if isinstance(internal, G.Euclidean):
        return np.asarray(data).tolist()
    if isinstance(internal, (G.Cyclic, G.PAdic)):
        return list(data)
    return [_star_to_json(f, d) for f, d in zip(internal.factors, data)]


@dataclass(frozen=True, eq=False)
class SchemeSpec:
    """Lattice Z^r mapped into R^d x H by ``phys_map`` and ``star_map``."""

    rank: int
    phys_map: np.ndarray
    internal: G.InternalGroupSpec
    star_map: object
    calibration: float
    name: str = ""
    marker: Optional[str] = None

    def __post_init__(self):
        if self.rank < 1:
            raise ArgumentError("lattice rank must be >= 1")
        pm = np.asarray(self.phys_map, dtype=float)
        if pm.ndim == 1:
            pm = pm.reshape(1, -1)
        if pm.shape[1] != self.rank:
            raise ArgumentError(f"phys_map must have {self.rank} columns")
        pm.setflags(write=False)
        object.__setattr__(self, "phys_map", pm)
        object.__setattr__(self, "star_map", _star_data(self.internal, self.star_map, self.rank))
        if not self.calibration > 0:
            raise ArgumentError("calibration must be positive")
        object.__setattr__(self, "calibration", float(self.calibration))

    @property
    def dim(self) -> int:
        return self.phys_map.shape[0]

    def check(self, bound: int = 100, max_vectors: int = 2_000_000) -> None:
        """Discreteness witness: no non-zero coordinate difference with |c| <= 2*bound maps to 0."""
        if np.linalg.matrix_rank(self.phys_map) < self.dim:
            raise ArgumentError("phys_map must have full row rank d")
        r = self.rank
        side = 4 * bound + 1
        if side ** r <= max_vectors:
            axes = [np.arange(-2 * bound, 2 * bound + 1)] * r
            c = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, r)
        else:
            rng = np.random.default_rng(0)
            c = rng.integers(-2 * bound, 2 * bound + 1, size=(max_vectors, r))
        c = c[np.any(c != 0, axis=1)]
        x = c @ self.phys_map.T
        hit = np.all(np.abs(x) <= DEFAULT.equality, axis=1)
        if hit.any():
            h = internal_values(self, c[hit])
            zero = _internal_is_zero(self.internal, h)
            if np.any(zero):
                raise ArgumentError(f"embedding is not injective: {c[hit][zero][0]} maps to 0")

    def combined_matrix(self) -> np.ndarray:
        """(d+m) x r matrix of the euclidean part of the embedding."""
        rows = [self.phys_map] + _euclidean_rows(self.internal, self.star_map)
        return np.vstack(rows)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "rank": self.rank,
            "phys_map": self.phys_map.tolist(),
            "internal": self.internal.to_json(),
            "star_map": _star_to_json(self.internal, self.star_map),
            "calibration": self.calibration,
            "marker": self.marker,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SchemeSpec":
        if "gallery" in obj:
            return gallery(obj["gallery"])
        internal = G.group_from_json(obj["internal"])
        rank = int(obj["rank"])
        cal = obj.get("calibration")
        s0 = dict(rank=rank, phys_map=obj["phys_map"], internal=internal, star_map=obj["star_map"],
                  name=obj.get("name", ""), marker=obj.get("marker"))
        if cal is None:
            cal = default_calibration(cls(calibration=1.0, **s0))
        return cls(calibration=cal, **s0)


def _euclidean_rows(internal, data) -> List[np.ndarray]:
    if isinstance(internal, G.Euclidean):
        return [np.asarray(data)] if internal.dim else []
    if isinstance(internal, G.Product):
        out = []
        for f, d in zip(internal.factors, data):
            out += _euclidean_rows(f, d)
        return out
    return []


def default_calibration(s: SchemeSpec) -> float:
    """Covolume of the lattice for euclidean internal spaces, else the group default."""
    g = s.internal
    if isinstance(g, G.Euclidean):
        a = s.combined_matrix()
        if a.shape[0] != a.shape[1]:
            raise ArgumentError("calibration must be given for non-square embeddings")
        return abs(float(np.linalg.det(a)))
    if isinstance(g, (G.Cyclic, G.PAdic)):
        if s.rank != s.dim:
            raise ArgumentError("calibration must be given explicitly")
        return G.default_calibration(g) / abs(float(np.linalg.det(s.phys_map)))
    raise ArgumentError("calibration must be given for product internal groups")


# ---------------------------------------------------------------------------
# star map


def _mod_dot(coords: np.ndarray, residues: Sequence[int], n: int) -> np.ndarray:
    out = np.zeros(len(coords), dtype=np.int64)
    for k, r in enumerate(residues):
        out = (out + (coords[:, k] % n) * (r % n)) % n
    return out


def internal_values(s: SchemeSpec, coords: np.ndarray, internal=None, data=None):
    """Star map on an (N, r) integer array (vectorised form of :func:`star`)."""
    internal = s.internal if internal is None else internal
    data = s.star_map if data is None else data
    coords = np.asarray(coords, dtype=np.int64).reshape(-1, s.rank)
    if isinstance(internal, G.Euclidean):
        return coords.astype(float) @ np.asarray(data).T
    if isinstance(internal, (G.Cyclic, G.PAdic)):
        return _mod_dot(coords, data, internal.modulus)
    return [internal_values(s, coords, f, d) for f, d in zip(internal.factors, data)]


def _internal_is_zero(internal, h) -> np.ndarray:
    if isinstance(internal, G.Euclidean):
        return np.all(np.abs(h) <= DEFAULT.equality, axis=1)
    if isinstance(internal, (G.Cyclic, G.PAdic)):
        return h == 0
    out = None
    for f, part in zip(internal.factors, h):
        z = _internal_is_zero(f, part)
        out = z if out is None else out & z
    return out


def _element(internal, h, i: int):
    if isinstance(internal, G.Euclidean):
        return np.array(h[i])
    if isinstance(internal, (G.Cyclic, G.PAdic)):
        return int(h[i])
    return tuple(_element(f, part, i) for f, part in zip(internal.factors, h))


def star(s: SchemeSpec, coords) -> Tuple[np.ndarray, object]:
    """(physical point, internal element) of the lattice point with the given coordinates."""
    c = np.asarray(coords).reshape(-1)
    if c.shape != (s.rank,):
        raise ArgumentError(f"expected {s.rank} lattice coordinates")
    if np.any(c.astype(float) != np.round(c.astype(float))):
        raise ArgumentError("lattice coordinates must be integers")
    if np.any(np.abs(c) > COORD_BOUND):
        raise ArgumentError(f"lattice coordinates exceed the overflow guard {COORD_BOUND}")
    c = c.astype(np.int64).reshape(1, -1)
    x = (c.astype(float) @ s.phys_map.T)[0]
    return x, _element(s.internal, internal_values(s, c), 0)


def window_contains(internal, w, h) -> np.ndarray:
    if w is None:
        n = len(h[0]) if isinstance(internal, G.Product) else len(h)
        return np.ones(n, dtype=bool)
    return np.asarray(w.contains(h), dtype=bool)


# ---------------------------------------------------------------------------
# enumeration


def _window_bounds(internal, w) -> Optional[List[Tuple[float, float]]]:
    """Per-row bounds of the euclidean internal coordinates (None: the window is empty)."""
    if isinstance(internal, G.Euclidean):
        if internal.dim == 0:
            return []
        if w is None:
            raise EnumerationBoundError("euclidean internal space needs a bounded window")
        bb = w.bounding_box()
        if bb is None:
            return None
        return list(zip(bb.lower, bb.upper))
    if isinstance(internal, G.Product):
        out = []
        for k, f in enumerate(internal.factors):
            b = _window_bounds(f, None if w is None else w.factors[k])
            if b is None:
                return None
            out += b
        return out
    return []


def lattice_candidates(s: SchemeSpec, region: Box, w=None, chunk: int = 200_000, workers: int = 1) -> np.ndarray:
    """All lattice coordinates whose embedding can meet ``region`` x bbox(w).

    Exhaustive interval arithmetic: the coordinate box comes from the
    pseudo-inverse of the combined matrix, the inner coordinate is solved
    exactly per outer coordinate tuple.
    """
    bounds = _window_bounds(s.internal, w)
    if bounds is None:
        return np.empty((0, s.rank), dtype=np.int64)
    a = s.combined_matrix()
    lo = np.concatenate([region.lo, [b[0] for b in bounds]]) if bounds else region.lo
    hi = np.concatenate([region.hi, [b[1] for b in bounds]]) if bounds else region.hi
    if np.linalg.matrix_rank(a) < s.rank:
        raise EnumerationBoundError(
            "lattice coordinates are not bounded by the physical region and window (degenerate embedding)")
    pinv = np.linalg.pinv(a)
    cmin = np.where(pinv > 0, pinv * lo, pinv * hi).sum(axis=1)
    cmax = np.where(pinv > 0, pinv * hi, pinv * lo).sum(axis=1)
    slack = 1e-7 * (1 + np.abs(cmin) + np.abs(cmax))
    cmin = np.ceil(cmin - slack).astype(np.int64)
    cmax = np.floor(cmax + slack).astype(np.int64)
    if np.any(cmax < cmin):
        return np.empty((0, s.rank), dtype=np.int64)
    if np.any(np.abs(np.concatenate([cmin, cmax])) > COORD_BOUND):
        raise EnumerationBoundError("enumeration box exceeds the coordinate guard")
    ranges = cmax - cmin + 1
    k = int(np.argmax(ranges))
    others = [i for i in range(s.rank) if i != k]
    n_outer = int(np.prod(ranges[others])) if others else 1
    if n_outer > MAX_CANDIDATES:
        raise EnumerationBoundError(f"{n_outer} outer coordinate tuples exceed the enumeration budget")
    ak = a[:, k]
    ao = a[:, others]
    tol = 1e-9 * (1 + np.abs(lo) + np.abs(hi))

    def solve(sl: slice) -> np.ndarray:
        idx = np.arange(sl.start, sl.stop)
        outer = np.empty((len(idx), len(others)), dtype=np.int64)
        rem = idx
        for j in range(len(others) - 1, -1, -1):
            o = others[j]
            outer[:, j] = cmin[o] + rem % ranges[o]
            rem = rem // ranges[o]
        sv = outer.astype(float) @ ao.T if others else np.zeros((len(idx), len(lo)))
        lo_k = np.full(len(idx), float(cmin[k]))
        hi_k = np.full(len(idx), float(cmax[k]))
        ok = np.ones(len(idx), dtype=bool)
        for row in range(len(lo)):
            c = ak[row]
            l, h = lo[row] - tol[row] - sv[:, row], hi[row] + tol[row] - sv[:, row]
            if abs(c) < 1e-15:
                ok &= (l <= 0) & (0 <= h)
            elif c > 0:
                lo_k = np.maximum(lo_k, l / c)
                hi_k = np.minimum(hi_k, h / c)
            else:
                lo_k = np.maximum(lo_k, h / c)
                hi_k = np.minimum(hi_k, l / c)
        first = np.ceil(lo_k - 1e-9).astype(np.int64)
        last = np.floor(hi_k + 1e-9).astype(np.int64)
        counts = np.where(ok, np.maximum(last - first + 1, 0), 0)
        total = int(counts.sum())
        out = np.empty((total, s.rank), dtype=np.int64)
        if total == 0:
            return out
        rep = np.repeat(np.arange(len(idx)), counts)
        offs = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        out[:, others] = outer[rep]
        out[:, k] = first[rep] + offs
        return out

    slices = [slice(i, min(i + chunk, n_outer)) for i in range(0, n_outer, chunk)]
    parts = ordered_map(solve, slices, workers)
    return np.concatenate(parts) if parts else np.empty((0, s.rank), dtype=np.int64)


def _enumerate(s: SchemeSpec, region: Box, w, workers: int = 1):
    c = lattice_candidates(s, region, w, workers=workers)
    if len(c) == 0:
        return c, np.empty((0, s.dim)), internal_values(s, c)
    x = c.astype(float) @ s.phys_map.T
    keep = region.contains(x)
    c, x = c[keep], x[keep]
    h = internal_values(s, c)
    keep = window_contains(s.internal, w, h)
    return c[keep], x[keep], _select(s.internal, h, keep)


def _select(internal, h, keep):
    if isinstance(internal, G.Product):
        return [_select(f, part, keep) for f, part in zip(internal.factors, h)]
    return h[keep]


def _check_window(s: SchemeSpec, w) -> None:
    G._check_window(s.internal, w)


def model_set(s: SchemeSpec, w, region: Box, workers: int = 1) -> PointPatch:
    """Exactly the points x = P c in ``region`` with c* in ``w`` (lattice coordinates kept)."""
    _check_window(s, w)
    if isinstance(w, G.BoxWindow) and not w.nonempty_boxes():
        return PointPatch(np.empty((0, s.dim)), region, np.empty((0, s.rank), dtype=np.int64), s.name)
    c, x, _ = _enumerate(s, region, w, workers)
    return PointPatch(x, region, c, s.name)


def model_set_closure(s: SchemeSpec, w: G.InternalWindow, region: Box) -> PointPatch:
    """Model set of the closed window (boundary points included)."""
    bw = _grown(s.internal, w, 1e-9)
    c, x, h = _enumerate(s, region, bw)
    keep = w.closure_contains(h) if not isinstance(s.internal, G.Product) else w.closure_contains(h)
    return PointPatch(x[keep], region, c[keep], s.name)


def _grown(internal, w, eps: float):
    if isinstance(w, G.BoxWindow):
        return G.BoxWindow(tuple(Box(tuple(b.lo - eps), tuple(b.hi + eps), closed=False) for b in w.nonempty_boxes()))
    if isinstance(w, G.ProductWindow):
        return G.ProductWindow(tuple(_grown(f, fw, eps) for f, fw in zip(internal.factors, w.factors)))
    return w


# ---------------------------------------------------------------------------
# internal functions and weighted combs


@dataclass(frozen=True, eq=False)
class InternalFunction:
    """A function on the internal group with its support data.

    ``func`` is vectorised over internal value arrays.  Euclidean internal
    spaces require ``support`` (a window containing the support) or
    ``decay_radius``.  ``fourier(k)`` is the analytic transform
    ``∫ g(h) e^{-2πi k h} dh``; ``integral`` is ``∫ g`` for the
    default-calibrated Haar measure.
    """

    func: Callable
    support: Optional[object] = None
    decay_radius: Optional[float] = None
    name: str = "g"
    fourier: Optional[Callable] = None
    integral: Optional[float] = None
    params: dict = field(default_factory=dict)

    def __call__(self, h) -> np.ndarray:
        return np.asarray(self.func(h), dtype=complex).reshape(-1)

    def to_json(self) -> dict:
        return {"kind": self.name, **self.params}


def tent(radius: float = 1.0, dim: int = 1) -> InternalFunction:
    """Product tent prod_i max(0, 1 - |h_i|/radius)."""
    if radius <= 0:
        raise ArgumentError("tent radius must be positive")

    def f(h):
        h = np.asarray(h, dtype=float).reshape(-1, dim)
        return np.prod(np.clip(1 - np.abs(h) / radius, 0, None), axis=1)

    def ft(k):
        k = np.asarray(k, dtype=float).reshape(-1, dim)
        return np.prod(radius * np.sinc(radius * k) ** 2, axis=1)

    sup = G.BoxWindow((Box.cube(radius, dim, closed=False),))
    return InternalFunction(f, sup, name="tent", fourier=ft, integral=radius ** dim,
                            params={"radius": radius, "dim": dim})


def indicator(w: G.InternalWindow, internal: Optional[G.InternalGroupSpec] = None) -> InternalFunction:
    """1_W; for a single euclidean box the transform is analytic."""

    def f(h):
        return w.contains(h).astype(float)

    ft = None
    integral = None
    if isinstance(w, G.BoxWindow):
        bs = w.nonempty_boxes()
        integral = w.lebesgue()
        if len(bs) == 1:
            b = bs[0]

            def ft(k, b=b):
                k = np.asarray(k, dtype=float).reshape(-1, b.dim)
                wd, c = b.widths, b.center
                return np.prod(wd * np.sinc(wd * k) * np.exp(-2j * np.pi * k * c), axis=1)
        sup = w
    else:
        sup = None
        if internal is not None:
            integral = G.haar_measure(internal, w)
    return InternalFunction(f, sup, name="indicator", fourier=ft, integral=integral,
                            params={"window": w.to_json()})


def covariogram(a: float, b: float) -> InternalFunction:
    """Covariogram of the interval [a, b): h -> |[a,b) ∩ ([a,b) + h)| = (L - |h|)_+."""
    L = float(b - a)
    if L <= 0:
        raise ArgumentError("covariogram needs a non-degenerate interval")

    def f(h):
        h = np.asarray(h, dtype=float).reshape(-1)
        return np.clip(L - np.abs(h), 0, None)

    def ft(k):
        k = np.asarray(k, dtype=float).reshape(-1)
        return (L * np.sinc(L * k)) ** 2

    return InternalFunction(f, G.BoxWindow.interval(-L, L), name="covariogram", fourier=ft, integral=L * L,
                            params={"interval": [a, b]})


def samples(h_values, g_values, internal: Optional[G.InternalGroupSpec] = None) -> InternalFunction:
    """Tabulated function: linear interpolation on R (zero outside), lookup on discrete groups."""
    hv = np.asarray(h_values)
    gv = np.asarray(g_values, dtype=complex)
    if internal is None or isinstance(internal, G.Euclidean):
        hv = hv.astype(float)
        order = np.argsort(hv)
        hv, gv = hv[order], gv[order]

        def f(h):
            h = np.asarray(h, dtype=float).reshape(-1)
            re = np.interp(h, hv, gv.real, left=0, right=0)
            im = np.interp(h, hv, gv.imag, left=0, right=0)
            return re + 1j * im

        sup = G.BoxWindow.interval(float(hv[0]), float(np.nextafter(hv[-1], np.inf)))
        integral = complex(np.trapezoid(gv, hv)) if hasattr(np, "trapezoid") else complex(np.trapz(gv, hv))
        return InternalFunction(f, sup, name="samples", integral=integral,
                                params={"h": hv.tolist(), "g": [[v.real, v.imag] for v in gv]})
    n = internal.modulus
    table = np.zeros(n, dtype=complex)
    table[hv.astype(np.int64) % n] = gv

    def f(h):
        return table[np.asarray(h, dtype=np.int64) % n]

    integral = complex(table.sum()) * (1.0 / n if isinstance(internal, G.Cyclic) else 1.0 / n)
    return InternalFunction(f, None, name="samples", integral=integral,
                            params={"h": hv.tolist(), "g": [[v.real, v.imag] for v in gv]})


def _support_window(s: SchemeSpec, g: InternalFunction):
    internal = s.internal
    if not _has_euclidean(internal):
        return g.support
    if g.support is not None:
        return _grown(internal, g.support, 1e-9)
    if g.decay_radius is not None:
        if not isinstance(internal, G.Euclidean):
            raise UnboundedSupportError("decay radius is only supported for euclidean internal spaces")
        return G.BoxWindow((Box.cube(g.decay_radius * (1 + 1e-12), internal.dim, closed=False),))
    raise UnboundedSupportError(f"internal function {g.name!r} needs a support box or decay radius")


def _has_euclidean(internal) -> bool:
    if isinstance(internal, G.Euclidean):
        return internal.dim > 0
    if isinstance(internal, G.Product):
        return any(_has_euclidean(f) for f in internal.factors)
    return False


def weighted_comb(s: SchemeSpec, g: InternalFunction, region: Box, zero_tol: float = 0.0,
                  workers: int = 1) -> WeightedComb:
    """omega_g = sum g(x*) delta_x over lattice points in ``region``, dropping |g| <= zero_tol."""
    w = _support_window(s, g)
    c, x, h = _enumerate(s, region, w, workers)
    vals = g(h) if len(c) else np.zeros(0, dtype=complex)
    keep = np.abs(vals) > zero_tol
    return WeightedComb(x[keep], vals[keep], region, c[keep], f"{s.name}:{g.name}")


def star_values(s: SchemeSpec, coords) -> object:
    """Internal values of a patch's lattice coordinates."""
    return internal_values(s, coords)


# ---------------------------------------------------------------------------
# dual scheme


def dual_scheme(s: SchemeSpec) -> SchemeSpec:
    """Annihilator lattice M^{-T} Z^r for euclidean internal spaces."""
    if not isinstance(s.internal, G.Euclidean):
        raise UnsupportedSchemeError("dual schemes exist here only for euclidean internal spaces")
    if s.internal.dim == 0:
        raise UnsupportedSchemeError("internal dimension 0 has no dual cut-and-project scheme")
    m = s.combined_matrix()
    if m.shape[0] != m.shape[1]:
        raise UnsupportedSchemeError("the embedding matrix must be square")
    det = float(np.linalg.det(m))
    if abs(det) < 1e-12:
        raise UnsupportedSchemeError("the embedding matrix is singular")
    b = np.linalg.inv(m).T
    d = s.dim
    return SchemeSpec(s.rank, b[:d], G.Euclidean(s.internal.dim), b[d:], 1.0 / abs(det),
                      name=f"dual({s.name})" if s.name else "dual")


def pairing(s: SchemeSpec, dual: SchemeSpec, c1, c2) -> np.ndarray:
    """e^{2πi<l, z>} for primal coordinates c1 and dual coordinates c2 (row-wise).

    <l, z> = c1^T (M^T B) c2; the integer part of the Gram matrix M^T B
    contributes an integer and is dropped, so only the residual carries rounding.
    """
    c1 = np.asarray(c1, dtype=np.int64).reshape(-1, s.rank)
    c2 = np.asarray(c2, dtype=np.int64).reshape(-1, dual.rank)
    gram = s.combined_matrix().T @ dual.combined_matrix()
    gi = np.round(gram)
    frac = np.sum((c1.astype(float) @ (gram - gi)) * c2, axis=1)
    return np.exp(2j * np.pi * frac)


# ---------------------------------------------------------------------------
# gallery


def quadratic(alpha: Union[str, float] = "sqrt2") -> SchemeSpec:
    """x = a + b alpha, x* = a - b alpha."""
    label = alpha
    if isinstance(alpha, str):
        key = alpha.strip().lower()
        if key in ("sqrt2", "√2", "silver"):
            alpha = SQRT2
        elif key in ("golden", "tau", "phi"):
            alpha = GOLDEN
        else:
            try:
                alpha = float(key)
            except ValueError:
                raise CatalogError(f"unknown quadratic parameter {label!r}") from None
    alpha = float(alpha)
    if alpha == 0:
        raise ArgumentError("alpha must be non-zero")
    return SchemeSpec(2, [[1.0, alpha]], G.Euclidean(1), [[1.0, -alpha]], 2 * abs(alpha),
                      name=f"quadratic({label})")


def silver_mean() -> SchemeSpec:
    return quadratic("sqrt2")


def cyclic_scheme(n: int) -> SchemeSpec:
    """m -> (m, m mod n)."""
    return SchemeSpec(1, [[1.0]], G.Cyclic(n), [1], 1.0 / n, name=f"cyclic({n})")


def padic_scheme(p: int, k: int) -> SchemeSpec:
    """m -> (m, m mod p^k) in the truncated p-adic integers."""
    return SchemeSpec(1, [[1.0]], G.PAdic(p, k), [1], 1.0, name=f"padic({p},{k})")


def trivial_scheme() -> SchemeSpec:
    return SchemeSpec(1, [[1.0]], G.Cyclic(1), [0], 1.0, name="trivial_Z")


def visible_points_scheme() -> SchemeSpec:
    """Z^2 with trivial internal part; a marker consumed by the visible-points sieve."""
    return SchemeSpec(2, np.eye(2), G.Cyclic(1), [0, 0], 1.0, name="visible_points_Z2", marker="visible_points")


_GALLERY_RE = re.compile(r"^\s*(\w+)\s*(?:\((.*)\))?\s*$")


def gallery(name: str) -> SchemeSpec:
    """Built-in schemes: trivial_Z, cyclic(n), padic(p,k), quadratic(alpha), silver_mean, visible_points_Z2."""
    m = _GALLERY_RE.match(str(name))
    if not m:
        raise CatalogError(f"unknown scheme {name!r}")
    head, args = m.group(1), m.group(2)
    parts = [a.strip() for a in args.split(",")] if args else []
    try:
        if head == "trivial_Z" and not parts:
            return trivial_scheme()
        if head == "visible_points_Z2" and not parts:
            return visible_points_scheme()
        if head == "silver_mean" and not parts:
            return silver_mean()
        if head == "cyclic" and len(parts) == 1:
            return cyclic_scheme(int(parts[0]))
        if head == "padic" and len(parts) == 2:
            return padic_scheme(int(parts[0]), int(parts[1]))
        if head == "quadratic" and len(parts) <= 1:
            return quadratic(parts[0] if parts else "sqrt2")
    except ValueError as e:
        if isinstance(e, ArgumentError):
            raise
        raise CatalogError(f"bad parameters in {name!r}") from None
    raise CatalogError(f"unknown scheme {name!r}")


GALLERY_NAMES = ("trivial_Z", "cyclic(n)", "padic(p,k)", "quadratic(sqrt2|golden|<float>)", "silver_mean",
                 "visible_points_Z2")
