"""Concrete internal groups: R^m, Z/n, truncated Z_p and finite products.

Elements are plain values:

* euclidean(m): float vector of length m (``numpy`` array),
* cyclic(n): integer residue in ``[0, n)``,
* padic(p, k): integer residue in ``[0, p**k)`` (the first k digits),
* product: tuple of factor elements.

Vectorised helpers (``*_many``) accept arrays of elements: shape (N, m)
for euclidean, (N,) integers for cyclic / padic, and a list of factor
arrays for products.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import DEFAULT
from .errors import ArgumentError, PrecisionError, SpecMismatchError
from .geometry import Box


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, int(math.isqrt(p)) + 1))


# ---------------------------------------------------------------------------
# group specs


@dataclass(frozen=True)
class Euclidean:
    dim: int
    variant = "euclidean"

    def __post_init__(self):
        if self.dim < 0:
            raise ArgumentError("euclidean dimension must be >= 0")

    def zero(self):
        return np.zeros(self.dim)

    def conform(self, h):
        a = np.asarray(h, dtype=float).reshape(-1)
        if a.shape != (self.dim,):
            raise SpecMismatchError(f"expected a vector of length {self.dim}, got {h!r}")
        return a

    def add(self, a, b):
        return self.conform(a) + self.conform(b)

    def neg(self, a):
        return -self.conform(a)

    def equal(self, a, b, tol: float = DEFAULT.equality) -> bool:
        return bool(np.all(np.abs(self.conform(a) - self.conform(b)) <= tol))

    def random(self, rng, scale: float = 10.0):
        return rng.uniform(-scale, scale, size=self.dim)

    def to_json(self) -> dict:
        return {"variant": "euclidean", "dim": self.dim}


@dataclass(frozen=True)
class Cyclic:
    n: int
    variant = "cyclic"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ArgumentError("cyclic modulus must be an integer >= 1")

    @property
    def modulus(self) -> int:
        return self.n

    def zero(self):
        return 0

    def conform(self, h):
        if isinstance(h, (tuple, list, np.ndarray)) and np.ndim(h) > 0:
            raise SpecMismatchError(f"cyclic element must be an integer, got {h!r}")
        if int(h) != h:
            raise SpecMismatchError(f"cyclic element must be an integer, got {h!r}")
        return int(h) % self.n

    def add(self, a, b):
        return (self.conform(a) + self.conform(b)) % self.n

    def neg(self, a):
        return (-self.conform(a)) % self.n

    def equal(self, a, b, tol: float = 0.0) -> bool:
        return self.conform(a) == self.conform(b)

    def random(self, rng, scale=None):
        return int(rng.integers(0, self.n))

    def to_json(self) -> dict:
        return {"variant": "cyclic", "n": self.n}


@dataclass(frozen=True)
class PAdic:
    """Z_p truncated to ``depth`` digits, i.e. Z / p^depth with its cylinder topology."""

    p: int
    depth: int
    variant = "padic"

    def __post_init__(self):
        if not is_prime(int(self.p)):
            raise ArgumentError(f"p-adic prime expected, got {self.p}")
        if int(self.depth) != self.depth or self.depth < 1:
            raise ArgumentError("p-adic depth must be >= 1")

    @property
    def modulus(self) -> int:
        return self.p ** self.depth

    def zero(self):
        return 0

    def conform(self, h):
        if isinstance(h, (tuple, list, np.ndarray)) and np.ndim(h) > 0:
            raise SpecMismatchError(f"p-adic element must be an integer, got {h!r}")
        if int(h) != h:
            raise SpecMismatchError(f"p-adic element must be an integer, got {h!r}")
        return int(h) % self.modulus

    def add(self, a, b):
        return (self.conform(a) + self.conform(b)) % self.modulus

    def neg(self, a):
        return (-self.conform(a)) % self.modulus

    def equal(self, a, b, tol: float = 0.0) -> bool:
        return self.conform(a) == self.conform(b)

    def digits(self, h, n: Optional[int] = None) -> List[int]:
        """Base-p digits ``d_0, d_1, ...`` of ``h`` (least significant first)."""
        n = self.depth if n is None else n
        if n > self.depth:
            raise PrecisionError(f"{n} digits requested at truncation depth {self.depth}")
        h = self.conform(h)
        out = []
        for _ in range(n):
            h, d = divmod(h, self.p)
            out.append(d)
        return out

    def valuation(self, h) -> int:
        """p-adic valuation; ``depth`` stands for 'at least depth' (zero residue)."""
        h = self.conform(h)
        if h == 0:
            return self.depth
        v = 0
        while h % self.p == 0:
            h //= self.p
            v += 1
        return v

    def random(self, rng, scale=None):
        return int(rng.integers(0, self.modulus))

    def to_json(self) -> dict:
        return {"variant": "padic", "p": self.p, "depth": self.depth}


@dataclass(frozen=True)
class Product:
    factors: Tuple["InternalGroupSpec", ...]
    variant = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ArgumentError("product of groups needs at least one factor")

    def zero(self):
        return tuple(f.zero() for f in self.factors)

    def conform(self, h):
        if not isinstance(h, (tuple, list)) or len(h) != len(self.factors):
            raise SpecMismatchError(f"product element must be a tuple of {len(self.factors)} parts")
        return tuple(f.conform(x) for f, x in zip(self.factors, h))

    def add(self, a, b):
        a, b = self.conform(a), self.conform(b)
        return tuple(f.add(x, y) for f, x, y in zip(self.factors, a, b))

    def neg(self, a):
        return tuple(f.neg(x) for f, x in zip(self.factors, self.conform(a)))

    def equal(self, a, b, tol: float = DEFAULT.equality) -> bool:
        a, b = self.conform(a), self.conform(b)
        return all(f.equal(x, y, tol) for f, x, y in zip(self.factors, a, b))

    def random(self, rng, scale: float = 10.0):
        return tuple(f.random(rng, scale) for f in self.factors)

    def to_json(self) -> dict:
        return {"variant": "product", "factors": [f.to_json() for f in self.factors]}


InternalGroupSpec = Union[Euclidean, Cyclic, PAdic, Product]


def group_from_json(obj: dict) -> InternalGroupSpec:
    v = obj.get("variant")
    if v == "euclidean":
        return Euclidean(int(obj["dim"]))
    if v == "cyclic":
        return Cyclic(int(obj["n"]))
    if v == "padic":
        return PAdic(int(obj["p"]), int(obj["depth"]))
    if v == "product":
        return Product(tuple(group_from_json(f) for f in obj["factors"]))
    raise ArgumentError(f"unknown group variant {v!r}")


def internal_add(g: InternalGroupSpec, a, b):
    """Group law of ``g``; raises SpecMismatchError for non-conforming operands."""
    return g.add(a, b)


# ---------------------------------------------------------------------------
# windows


@dataclass(frozen=True)
class BoxWindow:
    """Finite union of half-open boxes ``[a, b)`` in R^m."""

    boxes: Tuple[Box, ...]
    variant = "euclidean"

    def __post_init__(self):
        boxes = tuple(b if not b.closed else Box(b.lower, b.upper, closed=False) for b in self.boxes)
        dims = {b.dim for b in boxes}
        if len(dims) > 1:
            raise ArgumentError("window boxes must share a dimension")
        object.__setattr__(self, "boxes", boxes)

    @classmethod
    def interval(cls, a: float, b: float) -> "BoxWindow":
        return cls((Box.interval(a, b, closed=False),))

    @property
    def dim(self) -> Optional[int]:
        return self.boxes[0].dim if self.boxes else None

    def nonempty_boxes(self) -> Tuple[Box, ...]:
        return tuple(b for b in self.boxes if not b.is_empty)

    def contains(self, h) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        pts = h.reshape(-1, self.dim) if self.boxes else h.reshape(len(h), -1)
        out = np.zeros(len(pts), dtype=bool)
        for b in self.nonempty_boxes():
            out |= b.contains(pts)
        return out

    def closure_contains(self, h) -> np.ndarray:
        h = np.asarray(h, dtype=float)
        pts = h.reshape(-1, self.dim) if self.boxes else h.reshape(len(h), -1)
        out = np.zeros(len(pts), dtype=bool)
        for b in self.nonempty_boxes():
            out |= Box(b.lower, b.upper, closed=True).contains(pts)
        return out

    def interior_contains(self, h) -> np.ndarray:
        """Points with a neighbourhood inside the union.

        The union of finitely many boxes is locally constant on the 3^m
        'sign patterns' around a point once the probe step is below the
        distance to every box face not passing through the point.
        """
        h = np.asarray(h, dtype=float)
        pts = h.reshape(-1, self.dim) if self.boxes else h.reshape(len(h), -1)
        if not self.nonempty_boxes():
            return np.zeros(len(pts), dtype=bool)
        faces = np.concatenate([np.stack([b.lo, b.hi]) for b in self.nonempty_boxes()])  # (2B, m)
        patterns = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=self.dim)))
        out = np.empty(len(pts), dtype=bool)
        for k, x in enumerate(pts):
            gaps = np.abs(faces - x)
            gaps = gaps[gaps > 0]
            step = 0.25 * (gaps.min() if len(gaps) else 1.0)
            probes = x + step * patterns
            out[k] = bool(np.all(self.contains(probes)))
        return out

    def bounding_box(self) -> Optional[Box]:
        bs = self.nonempty_boxes()
        if not bs:
            return None
        lo = np.min([b.lo for b in bs], axis=0)
        hi = np.max([b.hi for b in bs], axis=0)
        return Box(tuple(lo), tuple(hi), closed=True)

    def lebesgue(self) -> float:
        """Exact volume of the union by coordinate compression."""
        bs = self.nonempty_boxes()
        if not bs:
            return 0.0
        m = bs[0].dim
        cuts = [np.unique(np.concatenate([[b.lower[i], b.upper[i]] for b in bs])) for i in range(m)]
        mids = [(c[:-1] + c[1:]) / 2 for c in cuts]
        lens = [np.diff(c) for c in cuts]
        grid = np.array(list(itertools.product(*mids))) if m else np.zeros((1, 0))
        vol = np.array([np.prod(v) for v in itertools.product(*lens)]) if m else np.ones(1)
        return float(vol[self.contains(grid)].sum())

    def translate(self, h) -> "BoxWindow":
        return BoxWindow(tuple(b.shift(h) for b in self.boxes))

    def to_json(self) -> dict:
        return {"variant": "euclidean", "boxes": [[list(b.lower), list(b.upper)] for b in self.boxes]}


@dataclass(frozen=True)
class ResidueWindow:
    """Subset of Z/n (discrete topology: open, closed and its own interior)."""

    n: int
    residues: frozenset
    variant = "cyclic"

    def __post_init__(self):
        res = frozenset(int(r) for r in self.residues)
        if any(r < 0 or r >= self.n for r in res):
            raise ArgumentError(f"residues must lie in [0, {self.n})")
        object.__setattr__(self, "residues", res)

    def contains(self, h) -> np.ndarray:
        h = np.asarray(h, dtype=np.int64).reshape(-1) % self.n
        return np.isin(h, np.fromiter(self.residues, dtype=np.int64, count=len(self.residues)))

    interior_contains = contains
    closure_contains = contains

    def count(self) -> int:
        return len(self.residues)

    def translate(self, h) -> "ResidueWindow":
        return ResidueWindow(self.n, frozenset((r + int(h)) % self.n for r in self.residues))

    def to_json(self) -> dict:
        return {"variant": "cyclic", "n": self.n, "residues": sorted(self.residues)}


@dataclass(frozen=True)
class CylinderWindow:
    """Finite union of cylinders ``a + p^j Z_p`` (clopen) at levels ``j <= depth``."""

    p: int
    depth: int
    cylinders: Tuple[Tuple[int, int], ...]
    variant = "padic"

    def __post_init__(self):
        cyl = []
        for a, j in self.cylinders:
            j = int(j)
            if j < 0 or j > self.depth:
                raise ArgumentError(f"cylinder level {j} outside [0, {self.depth}]")
            cyl.append((int(a) % self.p ** j, j))
        object.__setattr__(self, "cylinders", tuple(sorted(set(cyl), key=lambda c: (c[1], c[0]))))

    def disjoint_cylinders(self) -> List[Tuple[int, int]]:
        """Union rewritten as disjoint cylinders (coarse ones absorb finer ones)."""
        out: List[Tuple[int, int]] = []
        for a, j in self.cylinders:  # sorted by level, coarse first
            if any(j >= jj and a % self.p ** jj == aa for aa, jj in out):
                continue
            out.append((a, j))
        return out

    def contains(self, h) -> np.ndarray:
        h = np.asarray(h, dtype=np.int64).reshape(-1)
        out = np.zeros(len(h), dtype=bool)
        for a, j in self.cylinders:
            out |= (h % self.p ** j) == a
        return out

    interior_contains = contains
    closure_contains = contains

    def translate(self, h) -> "CylinderWindow":
        return CylinderWindow(self.p, self.depth, tuple(((a + int(h)) % self.p ** j, j) for a, j in self.cylinders))

    def to_json(self) -> dict:
        return {"variant": "padic", "p": self.p, "depth": self.depth, "cylinders": [list(c) for c in self.cylinders]}


@dataclass(frozen=True)
class ProductWindow:
    factors: Tuple["InternalWindow", ...]
    variant = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))

    def _test(self, h, attr) -> np.ndarray:
        out = None
        for w, part in zip(self.factors, h):
            r = getattr(w, attr)(part)
            out = r if out is None else out & r
        return out

    def contains(self, h) -> np.ndarray:
        return self._test(h, "contains")

    def interior_contains(self, h) -> np.ndarray:
        return self._test(h, "interior_contains")

    def closure_contains(self, h) -> np.ndarray:
        return self._test(h, "closure_contains")

    def translate(self, h) -> "ProductWindow":
        return ProductWindow(tuple(w.translate(x) for w, x in zip(self.factors, h)))

    def to_json(self) -> dict:
        return {"variant": "product", "factors": [w.to_json() for w in self.factors]}


InternalWindow = Union[BoxWindow, ResidueWindow, CylinderWindow, ProductWindow]


def window_from_json(obj: dict, g: InternalGroupSpec) -> InternalWindow:
    if isinstance(g, Euclidean):
        return BoxWindow(tuple(Box(tuple(np.atleast_1d(lo)), tuple(np.atleast_1d(hi)), closed=False)
                               for lo, hi in obj.get("boxes", [])))
    if isinstance(g, Cyclic):
        return ResidueWindow(g.n, frozenset(obj.get("residues", [])))
    if isinstance(g, PAdic):
        return CylinderWindow(g.p, g.depth, tuple(tuple(c) for c in obj.get("cylinders", [])))
    if isinstance(g, Product):
        return ProductWindow(tuple(window_from_json(w, f) for w, f in zip(obj["factors"], g.factors)))
    raise SpecMismatchError(f"no window type for {g!r}")


def _check_window(g: InternalGroupSpec, w: InternalWindow) -> None:
    ok = (
        (isinstance(g, Euclidean) and isinstance(w, BoxWindow) and (w.dim in (None, g.dim)))
        or (isinstance(g, Cyclic) and isinstance(w, ResidueWindow) and w.n == g.n)
        or (isinstance(g, PAdic) and isinstance(w, CylinderWindow) and (w.p, w.depth) == (g.p, g.depth))
        or (isinstance(g, Product) and isinstance(w, ProductWindow) and len(w.factors) == len(g.factors))
    )
    if not ok:
        raise SpecMismatchError(f"window {type(w).__name__} does not conform to {g!r}")
    if isinstance(g, Product):
        for f, fw in zip(g.factors, w.factors):
            _check_window(f, fw)


def default_calibration(g: InternalGroupSpec) -> float:
    if isinstance(g, Cyclic):
        return 1.0 / g.n
    return 1.0


def haar_measure(g: InternalGroupSpec, w: InternalWindow, normalization: Optional[float] = None) -> float:
    """Calibrated Haar measure of a window.

    euclidean: Lebesgue volume / normalization (the covolume of the scheme);
    cyclic: #residues * normalization (default 1/n);
    padic: sum of p^-j over disjoint cylinders * normalization (default 1);
    product: normalization * product of factor measures at their defaults.
    """
    _check_window(g, w)
    if normalization is None:
        normalization = default_calibration(g)
    if normalization <= 0:
        raise ArgumentError("normalization must be positive")
    if isinstance(g, Euclidean):
        return w.lebesgue() / normalization
    if isinstance(g, Cyclic):
        return w.count() * normalization
    if isinstance(g, PAdic):
        return sum(float(g.p) ** (-j) for _, j in w.disjoint_cylinders()) * normalization
    out = normalization
    for f, fw in zip(g.factors, w.factors):
        out *= haar_measure(f, fw)
    return out


def window_boundary_is_null(g: InternalGroupSpec, w: InternalWindow) -> bool:
    """All windows in the catalog are regular (boundary of Haar measure zero)."""
    _check_window(g, w)
    return True


def interior_window(g: InternalGroupSpec, w: InternalWindow) -> InternalWindow:
    """W° in the same representation (differs from W only on null sets for boxes)."""
    return w


# ---------------------------------------------------------------------------
# characters


@dataclass(frozen=True)
class EuclideanCharacter:
    freq: Tuple[float, ...]
    variant = "euclidean"

    def __post_init__(self):
        object.__setattr__(self, "freq", tuple(float(v) for v in np.atleast_1d(self.freq)))


@dataclass(frozen=True)
class CyclicCharacter:
    n: int
    r: int
    variant = "cyclic"

    def __post_init__(self):
        object.__setattr__(self, "r", int(self.r) % self.n)


@dataclass(frozen=True)
class PAdicCharacter:
    """h -> exp(2 pi i r h / p^j), j <= depth."""

    p: int
    depth: int
    r: int
    j: int
    variant = "padic"

    def __post_init__(self):
        if self.j < 0 or self.j > self.depth:
            raise PrecisionError(f"character level p^{self.j} exceeds depth {self.depth}")
        object.__setattr__(self, "r", int(self.r) % self.p ** self.j)


@dataclass(frozen=True)
class ProductCharacter:
    factors: Tuple["InternalCharacter", ...]
    variant = "product"


InternalCharacter = Union[EuclideanCharacter, CyclicCharacter, PAdicCharacter, ProductCharacter]


def _phase(chi: InternalCharacter, h) -> float:
    """Phase in turns (fraction of a full rotation), exact modular arithmetic for discrete variants."""
    if isinstance(chi, EuclideanCharacter):
        return float(np.dot(chi.freq, h))
    if isinstance(chi, CyclicCharacter):
        return ((chi.r * int(h)) % chi.n) / chi.n
    if isinstance(chi, PAdicCharacter):
        q = chi.p ** chi.j
        return ((chi.r * int(h)) % q) / q
    return sum(_phase(c, x) for c, x in zip(chi.factors, h))


def char_eval(chi: InternalCharacter, h, g: Optional[InternalGroupSpec] = None) -> complex:
    """Value of the character at ``h``; always on the unit circle."""
    if g is not None:
        _check_character(g, chi)
        h = g.conform(h)
    else:
        h = _conform_for_character(chi, h)
    return complex(np.exp(2j * np.pi * _phase(chi, h)))


def _conform_for_character(chi: InternalCharacter, h):
    if isinstance(chi, EuclideanCharacter):
        return Euclidean(len(chi.freq)).conform(h)
    if isinstance(chi, CyclicCharacter):
        return Cyclic(chi.n).conform(h)
    if isinstance(chi, PAdicCharacter):
        return PAdic(chi.p, chi.depth).conform(h)
    if not isinstance(h, (tuple, list)) or len(h) != len(chi.factors):
        raise SpecMismatchError("product character needs a tuple element")
    return tuple(_conform_for_character(c, x) for c, x in zip(chi.factors, h))


def _check_character(g: InternalGroupSpec, chi: InternalCharacter) -> None:
    ok = (
        (isinstance(g, Euclidean) and isinstance(chi, EuclideanCharacter) and len(chi.freq) == g.dim)
        or (isinstance(g, Cyclic) and isinstance(chi, CyclicCharacter) and chi.n == g.n)
        or (isinstance(g, PAdic) and isinstance(chi, PAdicCharacter) and (chi.p, chi.depth) == (g.p, g.depth))
        or (isinstance(g, Product) and isinstance(chi, ProductCharacter) and len(chi.factors) == len(g.factors))
    )
    if not ok:
        raise SpecMismatchError(f"character {chi!r} does not conform to {g!r}")
    if isinstance(g, Product):
        for f, c in zip(g.factors, chi.factors):
            _check_character(f, c)


def random_character(g: InternalGroupSpec, rng, scale: float = 3.0) -> InternalCharacter:
    if isinstance(g, Euclidean):
        return EuclideanCharacter(tuple(rng.uniform(-scale, scale, size=g.dim)))
    if isinstance(g, Cyclic):
        return CyclicCharacter(g.n, int(rng.integers(0, g.n)))
    if isinstance(g, PAdic):
        j = int(rng.integers(0, g.depth + 1))
        return PAdicCharacter(g.p, g.depth, int(rng.integers(0, g.p ** j)), j)
    return ProductCharacter(tuple(random_character(f, rng, scale) for f in g.factors))


def random_window(g: InternalGroupSpec, rng) -> InternalWindow:
    """Small random window of the matching variant (property tests)."""
    if isinstance(g, Euclidean):
        boxes = []
        for _ in range(int(rng.integers(1, 4))):
            lo = rng.uniform(-3, 3, size=g.dim)
            boxes.append(Box(tuple(lo), tuple(lo + rng.uniform(0, 2, size=g.dim)), closed=False))
        return BoxWindow(tuple(boxes))
    if isinstance(g, Cyclic):
        return ResidueWindow(g.n, frozenset(int(r) for r in rng.choice(g.n, size=int(rng.integers(0, g.n + 1)), replace=False)))
    if isinstance(g, PAdic):
        cyl = []
        for _ in range(int(rng.integers(1, 4))):
            j = int(rng.integers(0, g.depth + 1))
            cyl.append((int(rng.integers(0, g.p ** j)), j))
        return CylinderWindow(g.p, g.depth, tuple(cyl))
    return ProductWindow(tuple(random_window(f, rng) for f in g.factors))


# ---------------------------------------------------------------------------
# finite subgroups of U(1)


def u1_subgroup_gap(order: Union[int, str]) -> float:
    """sup |z - 1| over a subgroup of U(1) of the given order (or ``"dense"``).

    Every non-trivial subgroup reaches at least sqrt(3); the minimum is
    attained only by the cube roots of unity.
    """
    if order == "dense":
        return 2.0
    if isinstance(order, str) or int(order) != order or order < 1:
        raise ArgumentError("order must be a positive integer or 'dense'")
    order = int(order)
    if order == 1:
        return 0.0
    if order % 2 == 0:
        return 2.0
    gap = 2.0 * math.sin(math.pi * (order // 2) / order)
    assert gap >= math.sqrt(3) - 1e-12
    return gap
