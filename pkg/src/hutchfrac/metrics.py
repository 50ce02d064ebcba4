"""Pseudometrics, multimetrics, point clouds and the Hausdorff pseudometric."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionError
from .spaces import as_point, as_points

_THREADS = 1


def set_threads(n: int) -> None:
    """Worker count for Hausdorff and nearest-neighbour queries (results do not depend on it)."""
    global _THREADS
    _THREADS = max(1, int(n))


def get_threads() -> int:
    return _THREADS


# ---------------------------------------------------------------------------
# Descriptors


class PseudometricDescriptor:
    """A pseudometric on points of a fixed dimension.

    Subclasses implement :meth:`paired`; :meth:`cross` defaults to pairing
    every row of ``X`` with every row of ``Y``.
    """

    def paired(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError

    def cross(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        X, Y = np.asarray(X, float), np.asarray(Y, float)
        ii, jj = np.meshgrid(np.arange(len(X)), np.arange(len(Y)), indexing="ij")
        return self.paired(X[ii.ravel()], Y[jj.ravel()]).reshape(len(X), len(Y))

    def kd_embedding(self, dim: int):
        """``(transform, p)`` with ``d(x, y) == ||T x - T y||_p``, or ``None``."""
        return None

    def label(self) -> str:
        return type(self).__name__.lower()


@dataclass(frozen=True)
class Euclidean(PseudometricDescriptor):
    def paired(self, X, Y):
        return np.sqrt(np.sum((np.asarray(X) - np.asarray(Y)) ** 2, axis=1))

    def cross(self, X, Y):
        X, Y = np.asarray(X, float), np.asarray(Y, float)
        return np.sqrt(np.sum((X[:, None, :] - Y[None, :, :]) ** 2, axis=2))

    def kd_embedding(self, dim):
        return (lambda P: P, 2.0)

    def label(self):
        return "euclidean"


@dataclass(frozen=True)
class SupNorm(PseudometricDescriptor):
    def paired(self, X, Y):
        return np.max(np.abs(np.asarray(X) - np.asarray(Y)), axis=1)

    def cross(self, X, Y):
        X, Y = np.asarray(X, float), np.asarray(Y, float)
        return np.max(np.abs(X[:, None, :] - Y[None, :, :]), axis=2)

    def kd_embedding(self, dim):
        return (lambda P: P, math.inf)

    def label(self):
        return "sup"


@dataclass(frozen=True)
class Coordinate(PseudometricDescriptor):
    """``|x[index] - y[index]|``; a pseudometric once ``dim > 1``."""

    index: int

    def paired(self, X, Y):
        return np.abs(np.asarray(X)[:, self.index] - np.asarray(Y)[:, self.index])

    def cross(self, X, Y):
        X, Y = np.asarray(X, float), np.asarray(Y, float)
        return np.abs(X[:, self.index, None] - Y[None, :, self.index])

    def kd_embedding(self, dim):
        i = self.index
        return (lambda P: P[:, i:i + 1], math.inf)

    def label(self):
        return f"coord{self.index}"


@dataclass(frozen=True)
class WeightedMax(PseudometricDescriptor):
    """``max_i w_i |x_i - y_i|`` over the listed ``(index, weight)`` terms."""

    terms: Tuple[Tuple[int, float], ...]

    def __post_init__(self):
        terms = tuple((int(i), float(w)) for i, w in self.terms)
        if not terms or any(w < 0 for _, w in terms):
            raise ValueError("WeightedMax needs at least one non-negative weight")
        object.__setattr__(self, "terms", terms)

    def _cols(self):
        idx = np.array([i for i, _ in self.terms])
        w = np.array([w for _, w in self.terms])
        return idx, w

    def paired(self, X, Y):
        idx, w = self._cols()
        return np.max(w * np.abs(np.asarray(X)[:, idx] - np.asarray(Y)[:, idx]), axis=1)

    def kd_embedding(self, dim):
        idx, w = self._cols()
        return (lambda P: P[:, idx] * w, math.inf)

    def label(self):
        return "wmax(" + ",".join(f"{i}:{w:g}" for i, w in self.terms) + ")"


@dataclass(frozen=True)
class MaxOf(PseudometricDescriptor):
    """Pointwise maximum of a finite family."""

    members: Tuple[PseudometricDescriptor, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("MaxOf needs at least one member")
        object.__setattr__(self, "members", members)

    def paired(self, X, Y):
        return np.max(np.stack([m.paired(X, Y) for m in self.members]), axis=0)

    def cross(self, X, Y):
        return np.max(np.stack([m.cross(X, Y) for m in self.members]), axis=0)

    def kd_embedding(self, dim):
        from .spaces import _weighted_form

        form = _weighted_form(self, dim)
        if form is None:
            return None
        return WeightedMax(tuple(sorted(form.items()))).kd_embedding(dim)

    def label(self):
        return "max(" + ",".join(m.label() for m in self.members) + ")"


@dataclass(frozen=True)
class HausdorffLift(PseudometricDescriptor):
    """The Hausdorff pseudometric of ``base``, acting on clouds rather than points."""

    base: PseudometricDescriptor

    def paired(self, X, Y):
        raise TypeError("HausdorffLift compares clouds; use pd_eval or hausdorff")

    def label(self):
        return f"hausdorff({self.base.label()})"


@dataclass(frozen=True, eq=False)
class Remetrized(PseudometricDescriptor):
    """Descriptor wrapping a :class:`hutchfrac.remetrize.RemetrizedPseudometric`."""

    handle: Any

    def paired(self, X, Y):
        return self.handle.paired(X, Y)

    def label(self):
        return f"remetrized({self.handle.base.label()})"


@dataclass(frozen=True, eq=False)
class BanachPower(PseudometricDescriptor):
    """Descriptor wrapping a :class:`hutchfrac.remetrize.BanachPowerMetric`."""

    handle: Any

    def paired(self, X, Y):
        return self.handle.paired(X, Y)

    def label(self):
        return f"banach_power({self.handle.base.label()})"


@dataclass(frozen=True)
class Multimetric:
    """A non-empty family of pseudometrics meant to separate points."""

    members: Tuple[PseudometricDescriptor, ...]
    separates_points_declared: bool = True

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("a multimetric needs at least one pseudometric")
        object.__setattr__(self, "members", members)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def unseparated_pairs(self, sample: "Cloud", atol: float = 0.0) -> List[Tuple[int, int]]:
        """Distinct sample pairs on which every member vanishes."""
        P = sample.points
        n = len(P)
        iu, ju = np.triu_indices(n, k=1)
        dist = np.max(np.stack([m.paired(P[iu], P[ju]) for m in self.members]), axis=0)
        bad = np.nonzero(dist <= atol)[0]
        return [(int(iu[k]), int(ju[k])) for k in bad]


# ---------------------------------------------------------------------------
# Clouds


def _dedup(points: np.ndarray, tol: float) -> np.ndarray:
    pts = points + 0.0  # folds -0.0 into 0.0 so exact duplicates compare bytewise
    _, first = np.unique(pts, axis=0, return_index=True)
    first.sort()
    pts = pts[first]
    if tol > 0.0 and len(pts) > 1:
        pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
        if len(pairs):
            keep = np.ones(len(pts), dtype=bool)
            order = np.lexsort((pairs[:, 0], pairs[:, 1]))
            for i, j in pairs[order]:
                if keep[j] and keep[i]:
                    keep[j] = False
            pts = pts[keep]
    return pts


@dataclass(frozen=True, eq=False)
class Cloud:
    """Finite non-empty point set standing in for a compact set.

    Points closer than ``dedup_tol`` (Euclidean) are merged on construction,
    keeping the earliest one.
    """

    points: np.ndarray
    dedup_tol: float = 0.0

    def __post_init__(self):
        pts = as_points(self.points)
        if len(pts) == 0:
            raise ValueError("a cloud needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("cloud has non-finite coordinates")
        if self.dedup_tol < 0:
            raise ValueError("dedup_tol must be non-negative")
        pts = _dedup(pts, float(self.dedup_tol))
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @classmethod
    def of(cls, *points, dedup_tol: float = 0.0) -> "Cloud":
        return cls(np.array([np.atleast_1d(np.asarray(p, float)) for p in points]), dedup_tol)


def snap_points(points: np.ndarray, resolution: float, box=None) -> np.ndarray:
    """Round points to a voxel grid anchored at the box corner, clipped to the box."""
    pts = as_points(points)
    origin = box.lo if box is not None else np.zeros(pts.shape[1])
    out = origin + np.round((pts - origin) / resolution) * resolution
    if box is not None:
        out = np.clip(out, box.lo, box.hi)
    return out


# ---------------------------------------------------------------------------
# Operations


def _as_array(A) -> np.ndarray:
    return A.points if isinstance(A, Cloud) else as_points(A)


def pd_eval(d: PseudometricDescriptor, x, y) -> float:
    """Distance between two points, or between two clouds for a Hausdorff lift."""
    if isinstance(d, HausdorffLift):
        return hausdorff(d.base, x, y)
    x = as_point(x)
    y = as_point(y, x.size)
    return float(d.paired(x.reshape(1, -1), y.reshape(1, -1))[0])


def directed_max(family: Sequence[PseudometricDescriptor]) -> MaxOf:
    """The pointwise maximum of a finite family, with nested maxima flattened."""
    members: list = []
    for d in family:
        for m in (d.members if isinstance(d, MaxOf) else (d,)):
            if m not in members:
                members.append(m)
    if not members:
        raise ValueError("directed_max needs a non-empty family")
    return MaxOf(tuple(members))


def _directed_hausdorff_kd(emb, A: np.ndarray, B: np.ndarray) -> float:
    transform, p = emb
    tree = cKDTree(transform(B))
    dist, _ = tree.query(transform(A), k=1, p=p, workers=_THREADS)
    return float(np.max(dist))


def hausdorff_bruteforce(d: PseudometricDescriptor, A, B, chunk: int = 2048) -> float:
    """Exhaustive ``O(|A||B|)`` evaluation of the Hausdorff pseudometric."""
    A, B = _as_array(A), _as_array(B)
    if A.shape[1] != B.shape[1]:
        raise DimensionError("clouds have different dimensions")
    starts = list(range(0, len(A), chunk))

    def block(s):
        D = d.cross(A[s:s + chunk], B)
        return float(np.max(np.min(D, axis=1))), np.min(D, axis=0)

    if _THREADS > 1 and len(starts) > 1:
        with ThreadPoolExecutor(_THREADS) as ex:
            parts = list(ex.map(block, starts))
    else:
        parts = [block(s) for s in starts]
    a_to_b = max(p[0] for p in parts)
    b_to_a = float(np.max(np.min(np.stack([p[1] for p in parts]), axis=0)))
    return max(a_to_b, b_to_a)


def hausdorff(d: PseudometricDescriptor, A, B) -> float:
    """``max(max_a min_b d(a,b), max_b min_a d(a,b))`` for non-empty clouds.

    Norm-like pseudometrics go through an exact k-d tree nearest-neighbour
    query; everything else falls back to :func:`hausdorff_bruteforce`.
    """
    A, B = _as_array(A), _as_array(B)
    if A.shape[1] != B.shape[1]:
        raise DimensionError("clouds have different dimensions")
    if len(A) == 0 or len(B) == 0:
        raise ValueError("Hausdorff distance needs non-empty clouds")
    emb = d.kd_embedding(A.shape[1])
    if emb is None or len(A) * len(B) <= 4096:
        return hausdorff_bruteforce(d, A, B)
    return max(_directed_hausdorff_kd(emb, A, B), _directed_hausdorff_kd(emb, B, A))


def directed_hausdorff(d: PseudometricDescriptor, A, B) -> float:
    """One-sided ``max_a min_b d(a, b)``."""
    A, B = _as_array(A), _as_array(B)
    emb = d.kd_embedding(A.shape[1])
    if emb is not None:
        return _directed_hausdorff_kd(emb, A, B)
    return max(float(np.max(np.min(d.cross(A[s:s + 2048], B), axis=1)))
               for s in range(0, len(A), 2048))


def diameter(d: PseudometricDescriptor, A, chunk: int = 2048) -> float:
    """Largest pairwise distance in a cloud."""
    P = _as_array(A)
    if len(P) == 1:
        return 0.0
    return max(float(np.max(d.cross(P[s:s + chunk], P))) for s in range(0, len(P), chunk))


@dataclass
class AxiomReport:
    """Witnesses ``(i, j[, k], excess)`` of violated pseudometric axioms."""

    checked_triples: int
    symmetry_violations: list = field(default_factory=list)
    triangle_violations: list = field(default_factory=list)
    diagonal_violations: list = field(default_factory=list)
    negativity_violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.symmetry_violations or self.triangle_violations
                    or self.diagonal_violations or self.negativity_violations)

    def counts(self) -> dict:
        return {
            "symmetry": len(self.symmetry_violations),
            "triangle": len(self.triangle_violations),
            "diagonal": len(self.diagonal_violations),
            "negativity": len(self.negativity_violations),
        }


def check_axioms(d: PseudometricDescriptor, sample, seed: int = 0, tol: float = 1e-9,
                 max_witnesses: int = 25, random_triples: int = 100_000) -> AxiomReport:
    """Audit symmetry, zero diagonal, non-negativity and the triangle inequality.

    Exhaustive over all triples for samples of at most 60 points, otherwise
    over ``random_triples`` seeded triples.
    """
    P = _as_array(sample)
    n = len(P)
    if n == 0:
        raise ValueError("need a non-empty sample")

    def collect(mask_idx, excess):
        return [tuple(int(v) for v in idx) + (float(e),)
                for idx, e in zip(mask_idx[:max_witnesses], excess[:max_witnesses])]

    if n <= 60:
        D = d.cross(P, P)
        rep = AxiomReport(checked_triples=n ** 3)
        sym = np.abs(D - D.T)
        iu = np.argwhere(np.triu(sym > tol, 1))
        rep.symmetry_violations = collect(iu, sym[tuple(iu.T)])
        diag = np.abs(np.diag(D))
        bad = np.nonzero(diag > tol)[0]
        rep.diagonal_violations = collect(np.stack([bad, bad], 1), diag[bad])
        neg = np.argwhere(D < -tol)
        rep.negativity_violations = collect(neg, -D[tuple(neg.T)])
        # excess[i, j, k] = d(i, k) - d(i, j) - d(j, k)
        excess = D[:, None, :] - D[:, :, None] - D[None, :, :]
        tri = np.argwhere(excess > tol)
        rep.triangle_violations = collect(tri, excess[tuple(tri.T)])
        return rep

    rng = np.random.default_rng(seed)
    i, j, k = rng.integers(0, n, size=(3, random_triples))
    dij, djk, dik = d.paired(P[i], P[j]), d.paired(P[j], P[k]), d.paired(P[i], P[k])
    dji = d.paired(P[j], P[i])
    dii = d.paired(P[i], P[i])
    rep = AxiomReport(checked_triples=random_triples)
    sym = np.abs(dij - dji)
    m = np.nonzero(sym > tol)[0]
    rep.symmetry_violations = collect(np.stack([i[m], j[m]], 1), sym[m])
    m = np.nonzero(np.abs(dii) > tol)[0]
    rep.diagonal_violations = collect(np.stack([i[m], i[m]], 1), np.abs(dii[m]))
    m = np.nonzero(dij < -tol)[0]
    rep.negativity_violations = collect(np.stack([i[m], j[m]], 1), -dij[m])
    ex = dik - dij - djk
    m = np.nonzero(ex > tol)[0]
    rep.triangle_violations = collect(np.stack([i[m], j[m], k[m]], 1), ex[m])
    return rep
