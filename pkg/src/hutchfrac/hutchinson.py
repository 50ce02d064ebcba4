"""The Hutchinson operator on clouds, attractor iteration, chaos game and coding map.

Chaos-game map indices are drawn from numpy's PCG64 bit generator: index
``k`` is ``random_raw()[k] % len(maps)`` for the stream seeded with the
integer seed.  PCG64 (XSL-RR 128/64) is a published, fixed algorithm, so a
seed reproduces the same orbit bit for bit across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np

from .errors import DomainEscape, NoContraction
from .metrics import Cloud, Euclidean, PseudometricDescriptor, hausdorff, snap_points
from .spaces import (
    IfsSystem, Word, WORD_BUDGET, _check_word, as_point, as_points, fixed_point, word_images,
)

DEFAULT_MAX_POINTS = 5_000_000


@dataclass
class ConvergenceTrace:
    residuals: List[float]
    iterations: int
    converged: bool
    final_cloud: Cloud
    tol: float
    reason: str = "tolerance"

    def summary(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "reason": self.reason,
            "tol": self.tol,
            "final_residual": self.residuals[-1] if self.residuals else None,
            "points": len(self.final_cloud),
            "residuals": list(self.residuals),
        }


@dataclass(frozen=True)
class SymbolStream:
    """The eventually periodic sequence ``preperiod + period + period + ...``."""

    preperiod: Word = ()
    period: Word = (0,)

    def __post_init__(self):
        object.__setattr__(self, "preperiod", tuple(int(i) for i in self.preperiod))
        object.__setattr__(self, "period", tuple(int(i) for i in self.period))
        if not self.period:
            raise ValueError("period must be non-empty")
        if any(i < 0 for i in self.preperiod + self.period):
            raise ValueError("symbols must be non-negative map indices")

    def prefix(self, n: int) -> Word:
        """The first ``n`` symbols."""
        pre = self.preperiod[:n]
        rest = n - len(pre)
        if rest <= 0:
            return pre
        reps = -(-rest // len(self.period))
        return pre + (self.period * reps)[:rest]

    def extended(self) -> "SymbolStream":
        """Same sequence with one period copy moved into the preperiod."""
        return SymbolStream(self.preperiod + self.period, self.period)


def default_dedup_tol(ifs: IfsSystem) -> float:
    return 1e-7 * ifs.domain.diameter


def hutchinson_step(ifs: IfsSystem, K: Union[Cloud, np.ndarray],
                    dedup_tol: Optional[float] = None,
                    snap: Optional[float] = None) -> Cloud:
    """``F(K)``: images of every point under every map, snapped and deduplicated."""
    pts = K.points if isinstance(K, Cloud) else as_points(K, ifs.dim)
    img = ifs.image(pts)
    if ifs.self_mapping_declared:
        bad = ~ifs.domain.contains(img, atol=1e-9)
        if np.any(bad):
            k = int(np.argmax(bad))
            i, j = divmod(k, len(pts))
            raise DomainEscape(i, pts[j], img[k])
    if snap is not None:
        img = snap_points(img, snap, ifs.domain)
    tol = default_dedup_tol(ifs) if dedup_tol is None else dedup_tol
    return Cloud(img, tol)


def seed_cloud(ifs: IfsSystem, spec: Union[str, Cloud, Sequence]) -> Cloud:
    """Starting cloud from ``"fixed_points"``, ``"corners"``, ``"grid:N"`` or explicit points."""
    if isinstance(spec, Cloud):
        return spec
    if isinstance(spec, str):
        if spec == "fixed_points":
            start = ifs.domain.lo + 0.5 * (ifs.domain.hi - ifs.domain.lo)
            return Cloud(np.array([fixed_point(f, start) for f in ifs.maps]))
        if spec == "corners":
            return Cloud(ifs.domain.corners())
        if spec.startswith("grid:"):
            return Cloud(ifs.domain.grid(int(spec[5:])))
        raise ValueError(f"unknown seed specification {spec!r}")
    return Cloud(as_points(spec, ifs.dim))


def attractor_deterministic(ifs: IfsSystem, seed: Union[Cloud, str, Sequence],
                            stop_metric: PseudometricDescriptor = Euclidean(),
                            tol: float = 1e-6, max_iter: int = 50,
                            dedup_tol: Optional[float] = None,
                            snap: Optional[float] = None,
                            max_points: int = DEFAULT_MAX_POINTS) -> ConvergenceTrace:
    """Iterate ``K -> F(K)`` until the successive Hausdorff residual drops below ``tol``.

    Non-convergence is reported in the trace, never raised.  ``max_points``
    stops the run before an iterate would exceed that many points.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    K = seed_cloud(ifs, seed)
    residuals: List[float] = []
    reason = "max_iter"
    for _ in range(max_iter):
        if len(K) * len(ifs) > max_points:
            reason = "point_budget"
            break
        K_next = hutchinson_step(ifs, K, dedup_tol, snap)
        r = hausdorff(stop_metric, K.points, K_next.points)
        residuals.append(r)
        K = K_next
        if r < tol:
            reason = "tolerance"
            break
    converged = bool(residuals) and residuals[-1] < tol
    return ConvergenceTrace(residuals, len(residuals), converged, K, tol, reason)


def chaos_game(ifs: IfsSystem, start, iterations: int, burn_in: int = 0, seed: int = 0) -> Cloud:
    """Random orbit; the points after ``burn_in`` steps are returned."""
    if not iterations > burn_in >= 0:
        raise ValueError("need iterations > burn_in >= 0")
    idx = (np.random.PCG64(seed).random_raw(iterations) % np.uint64(len(ifs))).astype(np.int64)
    x = as_point(start, ifs.dim).reshape(1, -1)
    out = np.empty((iterations - burn_in, ifs.dim))
    maps = ifs.maps
    for k in range(iterations):
        x = maps[idx[k]].apply(x)
        if k >= burn_in:
            out[k - burn_in] = x[0]
    return Cloud(out)


@dataclass
class CodedPoint:
    point: np.ndarray
    radius: float
    depth: int


def _eval_prefix(ifs, word, x0):
    p = x0
    for i in reversed(word):
        p = ifs.maps[i].apply(p)
    return p


def coding_map(ifs: IfsSystem, s: SymbolStream, x0, tol: float = 1e-12,
               depth_cap: int = 200,
               metrics: Sequence[PseudometricDescriptor] = (Euclidean(),)) -> CodedPoint:
    """Evaluate ``f_{s_0} o ... o f_{s_{n-1}}(x0)`` for growing ``n`` until it settles.

    Prefixes are evaluated innermost-first, as :func:`eval_word` does.  The
    values at depths ``n`` and ``n + len(period)`` (with ``n`` past the
    preperiod) are compared; comparing successive depths would stop early
    whenever ``x0`` happens to be fixed by one letter.  The run stops once
    they are within ``tol`` under every metric or coincide, and the last
    displacement is the certified radius.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_word(ifs, s.preperiod + s.period)
    x0 = as_point(x0, ifs.dim).reshape(1, -1)
    p_len = len(s.period)
    n = len(s.preperiod)
    prev = _eval_prefix(ifs, s.prefix(n), x0)
    while n + p_len <= depth_cap:
        n += p_len
        cur = _eval_prefix(ifs, s.prefix(n), x0)
        step = max(float(d.paired(prev, cur)[0]) for d in metrics)
        if step < tol or np.array_equal(prev, cur):
            out = cur[0].copy()
            out.flags.writeable = False
            return CodedPoint(out, step, n)
        prev = cur
    raise NoContraction(f"coding map did not settle within depth {depth_cap}",
                        last_iterate=prev[0].copy())


def attractor_by_words(ifs: IfsSystem, depth: int, base, budget: int = WORD_BUDGET,
                       dedup_tol: float = 0.0) -> Cloud:
    """``{ w(base) : |w| = depth }``, the depth-truncated image of the coding map."""
    base = as_point(base, ifs.dim)
    _, images = word_images(ifs, depth, base.reshape(1, -1), budget)
    return Cloud(images.reshape(-1, ifs.dim), dedup_tol)


def invariance_residual(ifs: IfsSystem, A: Cloud, d: PseudometricDescriptor = Euclidean()) -> float:
    """``d_H(F(A), A)``."""
    return hausdorff(d, ifs.image(A.points), A.points)
