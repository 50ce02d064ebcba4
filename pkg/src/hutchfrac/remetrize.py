"""Remetrizations that turn a contracting system into an Edelstein or Banach one.

``d_hat(x, y) = max_{n <= N} alpha_n * max_{|w| = n} d(w x, w y)`` truncated at a
depth ``N`` whose tail ``2 * max_{|w| = N} diam(w(K))`` is certified on the
invariant cloud ``K``, and the Banach-power variant with weights ``a**n``.

Affine systems under translation-invariant bases use the linear parts of the
words only (``d(w x, w y) = ||A_w (x - y)||``), deduplicated per level;
everything else falls back to evaluating word images of the points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import RemetrizationError, WordBudgetExceeded
from .metrics import (
    BanachPower, Cloud, Coordinate, Euclidean, MaxOf, PseudometricDescriptor, Remetrized,
    SupNorm, WeightedMax, diameter,
)
from .spaces import (
    IfsSystem, WORD_BUDGET, _as_affine, analytic_lipschitz, as_point, as_points,
    compose_word, enumerate_words, word_images,
)


def default_alpha(n: int) -> float:
    """``2 - 2**-n``: starts at 1, strictly increasing, bounded by 2."""
    return 2.0 - 2.0 ** (-n)


def check_alphas(alpha: Callable[[int], float], depth: int) -> None:
    vals = [alpha(n) for n in range(depth + 2)]
    if vals[0] != 1.0:
        raise ValueError("alpha_0 must be 1")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ValueError("alphas must be strictly increasing")
    if max(vals) > 2.0:
        raise ValueError("alphas must stay at or below 2")


def _is_seminorm(d: PseudometricDescriptor) -> bool:
    if isinstance(d, (Euclidean, SupNorm, Coordinate, WeightedMax)):
        return True
    return isinstance(d, MaxOf) and all(_is_seminorm(m) for m in d.members)


@dataclass
class _Level:
    mats: np.ndarray          # (M, dim, dim) distinct linear parts
    words: List[tuple]        # a representative word per matrix


def _linear_levels(ifs: IfsSystem, depth: int, budget: int) -> Optional[List[_Level]]:
    """Distinct linear parts of all words per length, or ``None`` if not affine."""
    affs = [_as_affine(f) for f in ifs.maps]
    if any(a is None for a in affs):
        return None
    A = np.stack([a.matrix for a in affs])
    levels = [_Level(np.eye(ifs.dim)[None], [()])]
    for _ in range(depth):
        prev = levels[-1]
        mats = np.einsum("kij,mjl->kmil", A, prev.mats).reshape(-1, ifs.dim, ifs.dim)
        words = [(k,) + w for k in range(len(affs)) for w in prev.words]
        mats = mats + 0.0
        _, first = np.unique(mats.reshape(len(mats), -1), axis=0, return_index=True)
        first.sort()
        if len(first) > budget:
            raise WordBudgetExceeded(len(affs), len(levels), budget)
        levels.append(_Level(mats[first], [words[i] for i in first]))
    return levels


def _level_max_linear(base, level: _Level, V: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per row of ``V``: max over the level's matrices of ``base(B v, 0)`` and its argmax."""
    imgs = np.einsum("mij,pj->mpi", level.mats, V)
    zero = np.zeros_like(imgs[0])
    vals = np.stack([base.paired(img, zero) for img in imgs])
    return vals.max(axis=0), vals.argmax(axis=0)


def _images_by_level(ifs, depth, P, budget):
    """Yield ``(n, words, images)`` for ``n = 0..depth``; images shaped (W, len(P), dim)."""
    imgs = P[None]
    yield 0, [()], imgs
    for n in range(1, depth + 1):
        k = len(ifs.maps)
        if k ** n > budget or k ** n * len(P) > budget * 64:
            raise WordBudgetExceeded(k, n, budget)
        imgs = np.stack([f.apply(imgs.reshape(-1, ifs.dim)).reshape(imgs.shape)
                         for f in ifs.maps]).reshape(-1, *P.shape)
        yield n, enumerate_words(ifs, n, budget), imgs


def _weighted_sup(ifs, base, levels, weight, depth, X, Y, budget):
    """``max_{n <= depth} weight(n) * max_{|w| = n} base(w x, w y)`` row-wise."""
    X, Y = as_points(X, ifs.dim), as_points(Y, ifs.dim)
    if levels is not None:
        V = X - Y
        out = np.zeros(len(V))
        for n in range(depth + 1):
            vals, _ = _level_max_linear(base, levels[n], V)
            out = np.maximum(out, weight(n) * vals)
        return out
    P = np.concatenate([X, Y])
    m = len(X)
    out = np.zeros(m)
    for n, _, imgs in _images_by_level(ifs, depth, P, budget):
        vals = np.stack([base.paired(img[:m], img[m:]) for img in imgs]).max(axis=0)
        out = np.maximum(out, weight(n) * vals)
    return out


def _level_diameters(ifs, base, levels, K: np.ndarray, depth, budget):
    """Yield, per length ``n``, max over words of ``diam_base(w(K))`` and a word attaining it.

    Lazy so that a budget overflow still leaves the earlier levels usable.
    """
    if levels is not None:
        iu, ju = np.triu_indices(len(K), 1)
        V = K[iu] - K[ju] if len(iu) else np.zeros((1, ifs.dim))
        for n in range(depth + 1):
            vals = [float(base.paired(V @ B.T, np.zeros_like(V)).max()) for B in levels[n].mats]
            k = int(np.argmax(vals))
            yield vals[k], levels[n].words[k]
        return
    for n, words, imgs in _images_by_level(ifs, depth, K, budget):
        vals = [diameter(base, img) for img in imgs]
        k = int(np.argmax(vals))
        yield vals[k], words[k]


@dataclass(frozen=True, eq=False)
class RemetrizedPseudometric:
    """Certified truncation of ``d_hat``; ``tail_bound`` bounds the neglected levels."""

    base: PseudometricDescriptor
    ifs: IfsSystem
    alphas: Callable[[int], float]
    depth: int
    invariant_cloud: Cloud
    tail_bound: float
    tails: Tuple[float, ...] = ()
    word_budget: int = WORD_BUDGET
    _levels: Optional[list] = field(default=None, repr=False)

    def alpha(self, n: int) -> float:
        return float(self.alphas(n))

    def paired(self, X, Y) -> np.ndarray:
        return _weighted_sup(self.ifs, self.base, self._levels, self.alpha, self.depth,
                             X, Y, self.word_budget)

    def truncated(self, depth: int) -> "RemetrizedPseudometric":
        """Same construction evaluated up to a different depth."""
        levels = self._levels
        if levels is not None and depth >= len(levels):
            levels = _linear_levels(self.ifs, depth, self.word_budget)
        tails = self.tails
        tail = tails[depth] if depth < len(tails) else self.tail_bound
        return RemetrizedPseudometric(self.base, self.ifs, self.alphas, depth,
                                      self.invariant_cloud, tail, tails,
                                      self.word_budget, levels)

    def descriptor(self) -> Remetrized:
        return Remetrized(self)

    def hull_diameter(self) -> float:
        return diameter(self.base, self.invariant_cloud.points)


def build_remetrized(ifs: IfsSystem, base: PseudometricDescriptor,
                     alphas: Callable[[int], float] = default_alpha,
                     K: Optional[Cloud] = None, eps: float = 1e-3,
                     depth_cap: int = 24, word_budget: int = 1 << 18) -> RemetrizedPseudometric:
    """Smallest depth ``N <= depth_cap`` whose certified tail is below ``eps``.

    Raises :class:`RemetrizationError` naming the widest word at the cap
    when the tail never drops below ``eps``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    check_alphas(alphas, depth_cap)
    K = Cloud(ifs.domain.corners()) if K is None else K
    Kp = K.points
    levels = None
    if _is_seminorm(base):
        try:
            levels = _linear_levels(ifs, depth_cap, word_budget)
        except WordBudgetExceeded:
            levels = None
    tails: List[float] = []
    worst: tuple = ()
    try:
        for n, (diam_n, word) in enumerate(_level_diameters(ifs, base, levels, Kp,
                                                             depth_cap, word_budget)):
            tails.append(2.0 * diam_n)
            worst = word
            if tails[-1] < eps:
                lv = levels[: n + 1] if levels is not None else None
                return RemetrizedPseudometric(base, ifs, alphas, n, K, tails[-1], tuple(tails),
                                              word_budget, lv)
    except WordBudgetExceeded as exc:
        raise RemetrizationError(
            f"word budget exhausted at depth {len(tails)}; tail bound still {tails[-1]:.6g} "
            f">= eps {eps:g}, word {ifs.word_label(worst)} keeps diameter {tails[-1] / 2:.6g}",
            word=worst, tail_bound=tails[-1] if tails else None) from exc
    raise RemetrizationError(
        f"tail bound {tails[-1]:.6g} >= eps {eps:g} at depth cap {depth_cap}; "
        f"word {ifs.word_label(worst)} keeps diameter {tails[-1] / 2:.6g}",
        word=worst, tail_bound=tails[-1])


def rhat_eval(rm: RemetrizedPseudometric, x, y) -> Tuple[float, float]:
    """``(value, error_bar)`` with the error bar equal to the tail bound."""
    x, y = as_point(x, rm.ifs.dim), as_point(y, rm.ifs.dim)
    return float(rm.paired(x[None], y[None])[0]), rm.tail_bound


def hull_samples(K: Cloud, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` random convex combinations of the cloud's points."""
    w = rng.dirichlet(np.ones(len(K)), size=n)
    return w @ K.points


def _sample_pairs(rm, pair_samples, seed):
    rng = np.random.default_rng(seed)
    X = hull_samples(rm.invariant_cloud, pair_samples, rng)
    Y = hull_samples(rm.invariant_cloud, pair_samples, rng)
    return X, Y


@dataclass
class EdelsteinCheck:
    checked: int
    skipped: int
    violations: List[dict]
    max_excess: float

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"checked": self.checked, "skipped": self.skipped,
                "violations": len(self.violations), "max_excess": self.max_excess,
                "witnesses": self.violations[:10]}


def verify_edelstein_under(rm: RemetrizedPseudometric, ifs: Optional[IfsSystem] = None,
                           pair_samples: int = 500, seed: int = 0) -> EdelsteinCheck:
    """``rhat(f x, f y) < rhat(x, y) + 2 * tail`` on sampled pairs above the noise floor."""
    ifs = ifs or rm.ifs
    X, Y = _sample_pairs(rm, pair_samples, seed)
    r = rm.paired(X, Y)
    floor = max(1e-6, 4.0 * rm.tail_bound)
    live = r > floor
    violations, max_excess = [], -math.inf
    for m, f in enumerate(ifs.maps):
        rf = rm.paired(f.apply(X[live]), f.apply(Y[live]))
        excess = rf - (r[live] + 2.0 * rm.tail_bound)
        if len(excess):
            max_excess = max(max_excess, float(excess.max()))
        for k in np.nonzero(excess >= 0)[0]:
            i = np.nonzero(live)[0][k]
            violations.append({"map": m, "x": X[i].tolist(), "y": Y[i].tolist(),
                               "rhat": float(r[i]), "rhat_image": float(rf[k])})
    return EdelsteinCheck(int(live.sum()), int((~live).sum()), violations, max_excess)


@dataclass
class KrasnoselskiiCheck:
    sup_ratio: float
    lambda_bound: float
    k: int
    checked: int
    witness: Optional[dict]

    @property
    def ok(self) -> bool:
        return self.sup_ratio < 1.0

    def to_dict(self) -> dict:
        return {"sup_ratio": self.sup_ratio, "lambda_bound": self.lambda_bound, "k": self.k,
                "checked": self.checked, "witness": self.witness}


def verify_krasnoselskii_under(rm: RemetrizedPseudometric, ifs: Optional[IfsSystem] = None,
                               a_low: float = 0.01, b_high: float = 3.0,
                               pair_samples: int = 500, seed: int = 0) -> KrasnoselskiiCheck:
    """Largest ``rhat(f x, f y) / rhat(x, y)`` over sampled pairs with ``rhat`` in ``[a_low, b_high]``.

    ``lambda_bound`` is ``max_{m <= k} alpha_m / alpha_{m+1}`` where ``k`` is the
    first level whose tail is below ``a_low / 4``.
    """
    ifs = ifs or rm.ifs
    X, Y = _sample_pairs(rm, pair_samples, seed)
    r = rm.paired(X, Y)
    window = (r > a_low) & (r <= b_high)
    k = next((n for n, t in enumerate(rm.tails) if t / 2 < a_low / 4), rm.depth)
    lam = max(rm.alpha(m) / rm.alpha(m + 1) for m in range(k + 1))
    sup, witness = 0.0, None
    for m, f in enumerate(ifs.maps):
        if not window.any():
            break
        rf = rm.paired(f.apply(X[window]), f.apply(Y[window]))
        ratio = rf / r[window]
        j = int(np.argmax(ratio))
        if ratio[j] > sup:
            i = np.nonzero(window)[0][j]
            sup = float(ratio[j])
            witness = {"map": m, "x": X[i].tolist(), "y": Y[i].tolist(), "ratio": sup}
    return KrasnoselskiiCheck(sup, lam, k, int(window.sum()), witness)


def epsilon_net(rm: RemetrizedPseudometric, eps: float) -> np.ndarray:
    """Greedy ``eps``-net of the invariant cloud under ``rhat`` (indices into the cloud)."""
    P = rm.invariant_cloud.points
    net: List[int] = []
    dist = np.full(len(P), np.inf)
    while True:
        far = np.nonzero(dist > eps)[0]
        if not len(far):
            return np.array(net, dtype=int)
        i = int(far[0])
        net.append(i)
        dist = np.minimum(dist, rm.paired(P, np.repeat(P[i][None], len(P), axis=0)))


# ---------------------------------------------------------------------------
# Banach-power metric


@dataclass(frozen=True, eq=False)
class BanachPowerMetric:
    """``max_{n <= depth} a**n * max_{|w| = n} d(w x, w y)``."""

    base: PseudometricDescriptor
    ifs: IfsSystem
    m: int
    lam: float
    a: float
    depth: int
    word_budget: int = WORD_BUDGET
    _levels: Optional[list] = field(default=None, repr=False)

    def __post_init__(self):
        if self._levels is None and _is_seminorm(self.base):
            try:
                object.__setattr__(self, "_levels",
                                   _linear_levels(self.ifs, self.depth, self.word_budget))
            except WordBudgetExceeded:
                pass

    def paired(self, X, Y) -> np.ndarray:
        return _weighted_sup(self.ifs, self.base, self._levels, lambda n: self.a ** n,
                             self.depth, X, Y, self.word_budget)

    def descriptor(self) -> BanachPower:
        return BanachPower(self)


def power_lipschitz(ifs: IfsSystem, base: PseudometricDescriptor, m: int,
                    budget: int = WORD_BUDGET) -> Optional[float]:
    """Max analytic Lipschitz constant over words of length ``m``, if all are known."""
    lips = []
    for w in enumerate_words(ifs, m, budget):
        lip = analytic_lipschitz(compose_word(ifs, w), base, ifs.domain)
        if lip is None or not math.isfinite(lip):
            return None
        lips.append(lip)
    return max(lips)


def build_banach_power(ifs: IfsSystem, base: PseudometricDescriptor, m: int, a: float,
                       depth_cap: int = 400, rel_tol: float = 1e-9) -> BanachPowerMetric:
    """Banach-power metric for a system whose ``m``-th power is a Banach contraction.

    The depth is the first ``N`` with ``a**n * lam**(n // m) * C < rel_tol`` for
    all ``n > N``, ``C`` bounding the Lipschitz constants of shorter words.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if a <= 1.0:
        raise RemetrizationError(f"a must exceed 1, got {a}")
    lam = power_lipschitz(ifs, base, m)
    if lam is None:
        raise RemetrizationError(f"no analytic Lipschitz constant for words of length {m}")
    if a ** m * lam >= 1.0:
        raise RemetrizationError(f"a**m * lambda = {a ** m * lam:.6g} is not below 1")
    C = max([1.0] + [power_lipschitz(ifs, base, j) or 0.0 for j in range(1, m)])

    def tail(n):
        return a ** n * lam ** (n // m) * C

    for N in range(depth_cap + 1):
        if all(tail(n) < rel_tol for n in range(N + 1, N + m + 1)):
            return BanachPowerMetric(base, ifs, m, lam, a, N)
    raise RemetrizationError(f"tail does not reach {rel_tol:g} within depth {depth_cap}")


@dataclass
class BanachCheck:
    max_ratio: float
    bound: float
    checked: int
    violations: List[dict]

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"max_ratio": self.max_ratio, "bound": self.bound, "checked": self.checked,
                "violations": len(self.violations), "witnesses": self.violations[:10]}


def verify_banach_under(bp: BanachPowerMetric, ifs: Optional[IfsSystem] = None,
                        pair_samples: int = 500, seed: int = 0) -> BanachCheck:
    """``bp(f x, f y) <= bp(x, y) / a`` (plus ``1e-9`` relative slack) on sampled box pairs."""
    ifs = ifs or bp.ifs
    rng = np.random.default_rng(seed)
    box = ifs.domain
    X = rng.uniform(box.lo, box.hi, size=(pair_samples, box.dim))
    Y = rng.uniform(box.lo, box.hi, size=(pair_samples, box.dim))
    r = bp.paired(X, Y)
    scale = np.maximum(r, 1e-300)
    violations, max_ratio = [], 0.0
    for m, f in enumerate(ifs.maps):
        rf = bp.paired(f.apply(X), f.apply(Y))
        pos = r > 0
        if pos.any():
            max_ratio = max(max_ratio, float((rf[pos] / r[pos]).max()))
        bad = rf > r / bp.a + 1e-9 * scale
        for i in np.nonzero(bad)[0]:
            violations.append({"map": m, "x": X[i].tolist(), "y": Y[i].tolist(),
                               "value": float(r[i]), "image_value": float(rf[i])})
    return BanachCheck(max_ratio, 1.0 / bp.a, pair_samples, violations)
