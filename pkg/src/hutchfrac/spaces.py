"""Points, boxes, maps, words and function systems.

Points are read-only 1-D ``float64`` arrays; batches of points are ``(n, dim)``
arrays.  Every map descriptor knows how to act on a batch (``apply``) and on a
single point (``__call__``).  A word ``(i0, i1, ..., i_{n-1})`` denotes the
composition ``f_{i0} o f_{i1} o ... o f_{i_{n-1}}``, so the last letter acts
first and the empty word is the identity.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionError, DomainEscape, WordBudgetExceeded

#: Default cap on ``|F|**n`` for word enumeration.
WORD_BUDGET = 1 << 21

Word = Tuple[int, ...]


def as_point(coords, dim: Optional[int] = None) -> np.ndarray:
    """Validate ``coords`` and return it as a read-only float vector."""
    p = np.array(coords, dtype=np.float64).reshape(-1)
    if p.size == 0:
        raise DimensionError("a point needs at least one coordinate")
    if dim is not None and p.size != dim:
        raise DimensionError(f"expected a point of dimension {dim}, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"point has non-finite coordinates: {p.tolist()}")
    p.flags.writeable = False
    return p


def as_points(points, dim: Optional[int] = None) -> np.ndarray:
    """Coerce a batch of points to a 2-D ``(n, dim)`` float array."""
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1) if dim in (None, 1) else arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionError(f"expected a 2-D array of points, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise DimensionError(f"expected points of dimension {dim}, got {arr.shape[1]}")
    return arr


@dataclass(frozen=True, eq=False)
class DomainBox:
    """Axis-aligned box holding the working compact set."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = as_point(self.lo)
        hi = as_point(self.hi, lo.size)
        if np.any(lo > hi):
            raise ValueError(f"box lower corner {lo.tolist()} exceeds upper {hi.tolist()}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.hi - self.lo))

    def contains(self, points, atol: float = 1e-12) -> np.ndarray:
        pts = as_points(points, self.dim)
        slack = atol * max(1.0, float(np.max(np.abs(np.concatenate([self.lo, self.hi])))))
        return np.all((pts >= self.lo - slack) & (pts <= self.hi + slack), axis=1)

    def grid(self, per_axis: int) -> np.ndarray:
        """Regular grid with ``per_axis`` points along each axis, C order."""
        axes = [np.linspace(l, h, per_axis) for l, h in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1)

    def corners(self) -> np.ndarray:
        return np.array(
            [[(h if bit else l) for l, h, bit in zip(self.lo, self.hi, bits)]
             for bits in itertools.product((0, 1), repeat=self.dim)]
        )

    def __eq__(self, other):
        return (isinstance(other, DomainBox) and np.array_equal(self.lo, other.lo)
                and np.array_equal(self.hi, other.hi))

    def __repr__(self):
        return f"DomainBox(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


# ---------------------------------------------------------------------------
# Map descriptors


class MapDescriptor:
    """Common interface of the map kinds."""

    dim: int

    def apply(self, points: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        x = as_point(x, self.dim)
        out = self.apply(x.reshape(1, -1))[0]
        out.flags.writeable = False
        return out


@dataclass(frozen=True, eq=False)
class Affine(MapDescriptor):
    """``x -> matrix @ x + offset``."""

    matrix: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim == 0:
            m = m.reshape(1, 1)
        off = as_point(self.offset)
        if m.shape != (off.size, off.size):
            raise DimensionError(f"matrix shape {m.shape} does not match offset dim {off.size}")
        if not np.all(np.isfinite(m)):
            raise ValueError("affine matrix has non-finite entries")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", off)

    @property
    def dim(self) -> int:
        return self.offset.size

    def apply(self, points):
        pts = as_points(points, self.dim)
        return pts @ self.matrix.T + self.offset

    def __repr__(self):
        return f"Affine(matrix={self.matrix.tolist()}, offset={self.offset.tolist()})"


@dataclass(frozen=True)
class Clamp1D(MapDescriptor):
    """``x -> min(hi, max(lo, slope*x + shift))`` on the line.

    ``lo``/``hi`` may be infinite for a one-sided clamp.
    """

    slope: float
    shift: float
    lo: float
    hi: float

    def __post_init__(self):
        for name in ("slope", "shift"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"Clamp1D {name} must be finite")
        if not self.lo <= self.hi:
            raise ValueError(f"Clamp1D needs lo <= hi, got {self.lo} > {self.hi}")

    dim = 1

    def apply(self, points):
        pts = as_points(points, 1)
        return np.clip(self.slope * pts + self.shift, self.lo, self.hi)

    def linear_zone(self) -> Tuple[float, float]:
        """Interval of inputs where the clamp is inactive."""
        if self.slope == 0.0:
            inside = self.lo <= self.shift <= self.hi
            return (-math.inf, math.inf) if inside else (math.inf, -math.inf)
        a = (self.lo - self.shift) / self.slope
        b = (self.hi - self.shift) / self.slope
        return (min(a, b), max(a, b))


def _edelstein_exp(pts):
    return pts + np.exp(-pts)


def _halving(pts):
    return 0.5 * pts


# name -> (vectorized function, fixed dimension or None for "any")
BUILTINS: dict = {
    "edelstein_exp": (_edelstein_exp, 1),
    "halving": (_halving, None),
}


@dataclass(frozen=True)
class Builtin(MapDescriptor):
    """A map from the closed registry :data:`BUILTINS`."""

    name: str
    params: Tuple[float, ...] = ()
    dim: int = 1

    def __post_init__(self):
        if self.name not in BUILTINS:
            raise ValueError(f"unregistered builtin map {self.name!r}")
        fixed = BUILTINS[self.name][1]
        if fixed is not None and self.dim != fixed:
            raise DimensionError(f"builtin {self.name!r} is {fixed}-dimensional")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    def apply(self, points):
        return BUILTINS[self.name][0](as_points(points, self.dim))


@dataclass(frozen=True, eq=False)
class WordComposite(MapDescriptor):
    """The composition named by ``word`` over ``system``'s maps."""

    system: "IfsSystem"
    word: Word

    def __post_init__(self):
        object.__setattr__(self, "word", _check_word(self.system, self.word))

    @property
    def dim(self) -> int:
        return self.system.dim

    def apply(self, points):
        pts = as_points(points, self.dim)
        for i in reversed(self.word):
            pts = self.system.maps[i].apply(pts)
        return pts


def eval_map(f: MapDescriptor, x) -> np.ndarray:
    """Image of the point ``x`` under ``f``."""
    return f(x)


# ---------------------------------------------------------------------------
# Systems and words


def _check_word(system, word) -> Word:
    w = tuple(int(i) for i in word)
    n = len(system.maps)
    for i in w:
        if not 0 <= i < n:
            raise IndexError(f"word letter {i} out of range for {n} maps")
    return w


@dataclass(frozen=True, eq=False)
class IfsSystem:
    """A finite function system on a box.

    With ``self_mapping_declared`` every map is spot-checked on a grid of the
    box at construction and must keep it inside.
    """

    maps: Tuple[MapDescriptor, ...]
    domain: DomainBox
    self_mapping_declared: bool = True
    letters: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("a function system needs at least one map")
        for f in maps:
            if f.dim != self.domain.dim:
                raise DimensionError(f"map {f!r} has dim {f.dim}, domain has {self.domain.dim}")
        object.__setattr__(self, "maps", maps)
        if self.letters is not None:
            letters = tuple(self.letters)
            if len(letters) != len(maps):
                raise ValueError("need exactly one letter name per map")
            object.__setattr__(self, "letters", letters)
        if self.self_mapping_declared:
            per_axis = 9 if self.dim <= 2 else (5 if self.dim <= 4 else 3)
            sample = self.domain.grid(per_axis)
            for i, f in enumerate(maps):
                img = f.apply(sample)
                bad = ~self.domain.contains(img, atol=1e-9)
                if np.any(bad):
                    k = int(np.argmax(bad))
                    raise DomainEscape(i, sample[k], img[k])

    @property
    def dim(self) -> int:
        return self.domain.dim

    def __len__(self):
        return len(self.maps)

    def letter(self, i: int) -> str:
        return self.letters[i] if self.letters else str(i)

    def word_label(self, word: Sequence[int]) -> str:
        return "".join(self.letter(i) for i in word) if self.letters else ",".join(map(str, word))

    def subsystem(self, indices: Sequence[int]) -> "IfsSystem":
        idx = list(indices)
        letters = tuple(self.letter(i) for i in idx) if self.letters else None
        return IfsSystem(tuple(self.maps[i] for i in idx), self.domain,
                         self.self_mapping_declared, letters)

    def image(self, points: np.ndarray) -> np.ndarray:
        """Stacked images ``f_0(P), f_1(P), ...`` of a batch of points."""
        pts = as_points(points, self.dim)
        return np.concatenate([f.apply(pts) for f in self.maps], axis=0)


def eval_word(ifs: IfsSystem, w: Sequence[int], x) -> np.ndarray:
    """Evaluate ``f_{w[0]} o ... o f_{w[-1]}`` at the point ``x``."""
    word = _check_word(ifs, w)
    p = as_point(x, ifs.dim).reshape(1, -1)
    for i in reversed(word):
        p = ifs.maps[i].apply(p)
    out = p[0].copy()
    out.flags.writeable = False
    return out


def enumerate_words(ifs: IfsSystem, n: int, budget: int = WORD_BUDGET) -> list:
    """All ``|F|**n`` words of length ``n`` in lexicographic order."""
    if n < 0:
        raise ValueError("word length must be non-negative")
    k = len(ifs.maps)
    if k ** n > budget:
        raise WordBudgetExceeded(k, n, budget)
    return list(itertools.product(range(k), repeat=n))


def word_images(ifs: IfsSystem, n: int, points, budget: int = WORD_BUDGET):
    """Images of ``points`` under every word of length ``n``.

    Returns ``(words, images)`` with ``images[j]`` the image of the whole batch
    under ``words[j]``; words come in the order of :func:`enumerate_words`.
    """
    k = len(ifs.maps)
    pts = as_points(points, ifs.dim)
    if k ** n * max(1, len(pts)) > budget * 64 or k ** n > budget:
        raise WordBudgetExceeded(k, n, budget)
    images = pts[None, :, :]
    # Level m holds suffix words of length m; prepending a letter applies its map last.
    for _ in range(n):
        images = np.stack([f.apply(images.reshape(-1, ifs.dim)).reshape(images.shape)
                           for f in ifs.maps], axis=0)
        images = images.reshape(-1, *pts.shape)
    return enumerate_words(ifs, n, budget), images


# ---------------------------------------------------------------------------
# Exact composition and analytic constants


def _as_affine(f: MapDescriptor) -> Optional[Affine]:
    if isinstance(f, Affine):
        return f
    if isinstance(f, Builtin) and f.name == "halving":
        return Affine(0.5 * np.eye(f.dim), np.zeros(f.dim))
    if isinstance(f, Clamp1D) and f.lo == -math.inf and f.hi == math.inf:
        return Affine([[f.slope]], [f.shift])
    return None


def _compose_clamps(outer: Clamp1D, inner: Clamp1D) -> Clamp1D:
    s1, b1, l1, h1 = inner.slope, inner.shift, inner.lo, inner.hi
    s2, b2, l2, h2 = outer.slope, outer.shift, outer.lo, outer.hi
    if s2 == 0.0:
        c = min(h2, max(l2, b2))
        return Clamp1D(0.0, c, c, c)
    # s2 * clip(u, l1, h1) + b2 == clip(s2*u + b2, A, B)
    ends = (s2 * l1 + b2, s2 * h1 + b2)
    a, b = (ends if s2 > 0 else ends[::-1])
    a = -math.inf if math.isnan(a) else a
    b = math.inf if math.isnan(b) else b
    if b < l2:
        return Clamp1D(0.0, l2, l2, l2)
    if a > h2:
        return Clamp1D(0.0, h2, h2, h2)
    return Clamp1D(s2 * s1, s2 * b1 + b2, max(a, l2), min(b, h2))


def compose(outer: MapDescriptor, inner: MapDescriptor) -> Optional[MapDescriptor]:
    """Exact descriptor for ``outer o inner`` when the kinds allow it."""
    if isinstance(outer, Clamp1D) and isinstance(inner, Clamp1D):
        return _compose_clamps(outer, inner)
    a, b = _as_affine(outer), _as_affine(inner)
    if a is not None and b is not None:
        return Affine(a.matrix @ b.matrix, a.matrix @ b.offset + a.offset)
    if isinstance(outer, Clamp1D) and b is not None:
        return _compose_clamps(outer, Clamp1D(float(b.matrix[0, 0]), float(b.offset[0]),
                                              -math.inf, math.inf))
    return None


def compose_word(ifs: IfsSystem, w: Sequence[int]) -> MapDescriptor:
    """Exact composite of a word, or a :class:`WordComposite` fallback."""
    word = _check_word(ifs, w)
    if not word:
        return Affine(np.eye(ifs.dim), np.zeros(ifs.dim))
    acc = ifs.maps[word[-1]]
    for i in reversed(word[:-1]):
        nxt = compose(ifs.maps[i], acc)
        if nxt is None:
            return WordComposite(ifs, word)
        acc = nxt
    return acc


def _interval(domain) -> Tuple[float, float]:
    if domain is None:
        return (-math.inf, math.inf)
    if isinstance(domain, DomainBox):
        return (float(domain.lo[0]), float(domain.hi[0]))
    lo, hi = domain
    return (float(lo), float(hi))


def clamp_lipschitz(f: Clamp1D, domain=None) -> float:
    """Smallest Lipschitz constant of a clamp on ``domain``."""
    z0, z1 = f.linear_zone()
    d0, d1 = _interval(domain)
    if min(z1, d1) - max(z0, d0) > 0.0:
        return abs(f.slope)
    return 0.0


def _weighted_form(metric, dim):
    """``{index: weight}`` when ``metric`` is a weighted max of coordinates."""
    from . import metrics as M

    if isinstance(metric, M.SupNorm):
        return {i: 1.0 for i in range(dim)}
    if isinstance(metric, M.Coordinate):
        return {metric.index: 1.0}
    if isinstance(metric, M.WeightedMax):
        return {i: w for i, w in metric.terms}
    if isinstance(metric, M.Euclidean) and dim == 1:
        return {0: 1.0}
    if isinstance(metric, M.MaxOf):
        out: dict = {}
        for member in metric.members:
            sub = _weighted_form(member, dim)
            if sub is None:
                return None
            for i, w in sub.items():
                out[i] = max(out.get(i, 0.0), w)
        return out
    return None


def _affine_lipschitz(a: Affine, metric) -> Optional[float]:
    from . import metrics as M

    if isinstance(metric, M.Euclidean):
        return float(np.linalg.norm(a.matrix, 2))
    form = _weighted_form(metric, a.dim)
    if form is None:
        return None
    form = {i: w for i, w in form.items() if w > 0}
    best = 0.0
    for j, wj in form.items():
        row = a.matrix[j]
        total = 0.0
        for k, ajk in enumerate(row):
            if ajk == 0.0:
                continue
            if k not in form:
                return math.inf  # the metric does not see coordinate k
            total += abs(ajk) / form[k]
        best = max(best, wj * total)
    return best


def analytic_lipschitz(f: MapDescriptor, metric, domain=None) -> Optional[float]:
    """Exact smallest Lipschitz constant of ``f`` under ``metric``, if known.

    ``domain`` (a :class:`DomainBox` or ``(lo, hi)`` pair) matters for the
    one-dimensional kinds only.  Returns ``None`` for unsupported pairs.
    """
    from . import metrics as M

    if isinstance(f, WordComposite):
        exact = compose_word(f.system, f.word)
        if isinstance(exact, WordComposite):
            return None
        return analytic_lipschitz(exact, metric, domain if domain is not None else f.system.domain)
    one_d = isinstance(metric, (M.Euclidean, M.SupNorm)) or (
        isinstance(metric, M.Coordinate) and metric.index == 0)
    if isinstance(f, Clamp1D):
        return clamp_lipschitz(f, domain) if one_d else None
    if isinstance(f, Builtin) and f.name == "edelstein_exp":
        if not one_d:
            return None
        lo, hi = _interval(domain)
        if domain is None:
            lo = 0.0
        if lo == -math.inf or hi == math.inf:
            return None if lo == -math.inf else 1.0
        # f'(x) = 1 - exp(-x) is increasing, so |f'| peaks at an endpoint.
        return max(abs(-math.expm1(-lo)), abs(-math.expm1(-hi)))
    a = _as_affine(f)
    if a is not None:
        return _affine_lipschitz(a, metric)
    return None


def analytic_edelstein(f: MapDescriptor, metric, domain=None) -> Optional[bool]:
    """Whether ``d(f x, f y) < d(x, y)`` for all distinct ``x, y``, if decidable.

    ``True``/``False`` are analytic certificates; ``None`` means unknown.
    """
    from . import metrics as M

    if isinstance(f, Builtin) and f.name == "edelstein_exp":
        one_d = isinstance(metric, (M.Euclidean, M.SupNorm)) or (
            isinstance(metric, M.Coordinate) and metric.index == 0)
        if not one_d:
            return None
        lo, _ = _interval(domain)
        if domain is None:
            lo = 0.0
        # |f'(x)| = |1 - exp(-x)| < 1 exactly when x > -ln 2.
        return lo > -math.log(2.0)
    if isinstance(f, WordComposite):
        exact = compose_word(f.system, f.word)
        if isinstance(exact, WordComposite):
            return None
        f = exact
    lip = analytic_lipschitz(f, metric, domain)
    if lip is None:
        return None
    if isinstance(f, Clamp1D) or _as_affine(f) is not None:
        # Linear on its active zone, so the sup ratio is attained.
        return lip < 1.0
    return None


def fixed_point(f: MapDescriptor, start, tol: float = 1e-15, max_iter: int = 10_000) -> np.ndarray:
    """Fixed point of a contraction by direct iteration (exact solve for affine maps)."""
    a = _as_affine(f)
    if a is not None:
        eye = np.eye(a.dim)
        try:
            return as_point(np.linalg.solve(eye - a.matrix, a.offset))
        except np.linalg.LinAlgError:
            pass
    x = as_point(start, f.dim)
    for _ in range(max_iter):
        y = f(x)
        if np.max(np.abs(y - x)) <= tol:
            return y
        x = y
    return x


MapLike = Union[MapDescriptor, Callable]
