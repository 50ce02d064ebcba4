"""Oscillation profiles and the six-way contractivity classifier.

Sampling can only ever *refute* a contraction property (a witness pair or a
structural certificate); verification always comes from an analytic
constant.  Everything else is reported as ``undetermined``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Sequence, Union

import numpy as np

from .errors import WordBudgetExceeded
from .metrics import Cloud, Multimetric, PseudometricDescriptor
from .spaces import (
    Builtin, Clamp1D, DomainBox, IfsSystem, MapDescriptor, WORD_BUDGET,
    _as_affine, analytic_edelstein, analytic_lipschitz, clamp_lipschitz,
    compose_word, enumerate_words, word_images,
)

CONDITIONS = ("banach", "rakotch", "krasnoselskii", "matkowski", "eventual", "edelstein")
VERDICTS = ("verified", "refuted", "undetermined")

# Implication chain: Banach => Rakotch => Krasnoselskii => Matkowski => Edelstein & Eventual.
IMPLIES = {
    "banach": ("rakotch",),
    "rakotch": ("krasnoselskii",),
    "krasnoselskii": ("matkowski",),
    "matkowski": ("edelstein", "eventual"),
}
IMPLIED_BY = {
    "rakotch": ("banach",),
    "krasnoselskii": ("rakotch",),
    "matkowski": ("krasnoselskii",),
    "edelstein": ("matkowski",),
    "eventual": ("matkowski",),
}

ALL_PAIRS_LIMIT = 400
RATIO_ONE = 1.0 - 1e-12


@dataclass
class OscillationProfile:
    """Sampled monotone approximation of an oscillation function."""

    t_grid: np.ndarray
    values: np.ndarray
    mode: str
    witnesses: Optional[list] = None

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape or len(t) == 0:
            raise ValueError("t_grid and values must be equal-length 1-D sequences")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise ValueError("t_grid must be positive and strictly increasing")
        if self.mode not in ("empirical_lower_bound", "analytic_exact", "analytic_upper_bound"):
            raise ValueError(f"unknown profile mode {self.mode!r}")
        self.t_grid = t
        self.values = np.maximum.accumulate(np.maximum(v, 0.0))

    def __call__(self, t: float) -> float:
        """Value at ``t``, rounding ``t`` up to the next grid point."""
        if t <= 0:
            return 0.0
        k = int(np.searchsorted(self.t_grid, t, side="left"))
        return float(self.values[min(k, len(self.values) - 1)])


def default_t_grid(diam: float, n: int = 32, lo_frac: float = 1e-3) -> np.ndarray:
    """``n`` log-spaced points from ``lo_frac * diam`` to ``diam``."""
    return np.geomspace(lo_frac * diam, diam, n)


def sample_pairs(n_points: int, pair_budget: int, seed: int):
    """Index pairs: all ``i < j`` for small clouds, else a nested seeded sample.

    The sample for budget ``B`` is a prefix of the sample for any ``B' > B``.
    """
    if n_points <= ALL_PAIRS_LIMIT:
        return np.triu_indices(n_points, k=1)
    raw = np.random.PCG64(seed).random_raw(2 * pair_budget)
    idx = (raw % np.uint64(n_points)).astype(np.int64).reshape(-1, 2)
    return idx[:, 0], idx[:, 1]


def _maps_of(system_or_map) -> List[MapDescriptor]:
    if isinstance(system_or_map, IfsSystem):
        return list(system_or_map.maps)
    return [system_or_map]


def _profile_from_pairs(din, dout, t_grid, witness_ids=None):
    order = np.argsort(din, kind="stable")
    d_sorted = din[order]
    cm = np.maximum.accumulate(dout[order]) if len(order) else np.array([])
    arg = None
    if witness_ids is not None and len(order):
        # index (in sorted order) where the running max was last raised
        raised = np.r_[True, dout[order][1:] > cm[:-1]]
        last = np.maximum.accumulate(np.where(raised, np.arange(len(order)), 0))
    values, wit = [], []
    for t in t_grid:
        k = int(np.searchsorted(d_sorted, t, side="right"))
        values.append(float(cm[k - 1]) if k > 0 else 0.0)
        if witness_ids is not None:
            wit.append(witness_ids(int(order[last[k - 1]])) if k > 0 else None)
    return np.array(values), (wit if witness_ids is not None else None)


def oscillation_empirical(system_or_map: Union[IfsSystem, MapDescriptor],
                          d: PseudometricDescriptor, domain: Cloud, t_grid,
                          pair_budget: int = 200_000, seed: int = 0) -> OscillationProfile:
    """Lower bound for the system oscillation from sampled pairs of ``domain``.

    Each grid value is the largest ``d(f x, f y)`` over sampled pairs with
    ``d(x, y) <= t`` and every map ``f``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("empty t grid")
    P = domain.points
    I, J = sample_pairs(len(P), pair_budget, seed)
    din = d.paired(P[I], P[J])
    best = np.zeros(len(I))
    best_map = np.zeros(len(I), dtype=int)
    for m, f in enumerate(_maps_of(system_or_map)):
        img = f.apply(P)
        out = d.paired(img[I], img[J])
        better = out > best
        best_map[better] = m
        best = np.maximum(best, out)
    values, wit = _profile_from_pairs(
        din, best, t_grid,
        lambda k: {"pair": (int(I[k]), int(J[k])), "map": int(best_map[k])})
    return OscillationProfile(t_grid, values, "empirical_lower_bound", wit)


def _analytic_single(f: MapDescriptor, d, t, domain):
    """``(values, mode)`` for one map, or ``None``."""
    if isinstance(f, Clamp1D):
        lip = analytic_lipschitz(f, d, domain)
        if lip is None:
            return None
        z0, z1 = f.linear_zone()
        if domain is not None:
            z0, z1 = max(z0, float(domain.lo[0])), min(z1, float(domain.hi[0]))
        length = max(0.0, z1 - z0)
        return lip * np.minimum(t, length), "analytic_exact"
    if isinstance(f, Builtin) and f.name == "edelstein_exp":
        lip = analytic_lipschitz(f, d, domain)
        return (None if lip is None else (lip * t, "analytic_upper_bound"))
    exact = f
    if not isinstance(f, Clamp1D) and _as_affine(f) is None and hasattr(f, "word"):
        exact = compose_word(f.system, f.word)
        if exact is not f and not hasattr(exact, "word"):
            return _analytic_single(exact, d, t, domain)
        return None
    if _as_affine(exact) is not None:
        lip = analytic_lipschitz(exact, d, domain)
        if lip is None or not math.isfinite(lip):
            return None
        return lip * t, "analytic_exact"
    return None


def oscillation_analytic(f: Union[MapDescriptor, IfsSystem], d: PseudometricDescriptor,
                         t_grid, domain: Optional[DomainBox] = None
                         ) -> Optional[OscillationProfile]:
    """Closed-form oscillation profile for supported (map, metric) pairs.

    Affine maps under norm-like metrics give ``L * t`` (exact on the whole
    space); clamps give ``|slope| * min(t, zone length)`` on ``domain``;
    ``edelstein_exp`` gives the mean-value upper bound.  For a system the
    profile is the pointwise maximum over its maps.
    """
    t = np.asarray(t_grid, dtype=float)
    maps = _maps_of(f)
    if isinstance(f, IfsSystem) and domain is None:
        domain = f.domain
    acc, modes = np.zeros_like(t), set()
    for g in maps:
        res = _analytic_single(g, d, t, domain)
        if res is None:
            return None
        acc = np.maximum(acc, res[0])
        modes.add(res[1])
    mode = "analytic_exact" if modes == {"analytic_exact"} else "analytic_upper_bound"
    return OscillationProfile(t, acc, mode)


def iterate_profile(p: OscillationProfile, n: int) -> OscillationProfile:
    """The ``n``-fold composite of a profile with itself, evaluated on its grid."""
    if n < 1:
        raise ValueError("n must be at least 1")
    vals = p.values.copy()
    for _ in range(n - 1):
        vals = np.array([p(v) for v in vals])
    return OscillationProfile(p.t_grid, vals, p.mode)


@dataclass
class _PowerScan:
    words: list
    din: np.ndarray
    out_best: np.ndarray       # per pair, max over words
    out_word: np.ndarray       # per pair, first word attaining it
    word_ratio: np.ndarray     # per word, max ratio over pairs with din > 0
    word_ratio_pair: np.ndarray
    word_out: np.ndarray       # per word, max output distance
    word_out_pair: np.ndarray
    I: np.ndarray
    J: np.ndarray


def _scan_power(ifs, d, n, P, pair_budget, seed, budget=WORD_BUDGET):
    I, J = sample_pairs(len(P), pair_budget, seed)
    din = d.paired(P[I], P[J])
    words, images = word_images(ifs, n, P, budget)
    out_best = np.full(len(I), -1.0)
    out_word = np.zeros(len(I), dtype=int)
    W = len(words)
    word_ratio = np.zeros(W)
    word_ratio_pair = np.zeros(W, dtype=int)
    word_out = np.zeros(W)
    word_out_pair = np.zeros(W, dtype=int)
    pos = din > 1e-12
    tie = 1e-12
    for w in range(W):
        img = images[w]
        out = d.paired(img[I], img[J])
        better = out > out_best + tie
        out_word[better] = w
        out_best = np.where(better, out, np.maximum(out_best, out))
        ratio = np.where(pos, out / np.where(pos, din, 1.0), 0.0)
        k = int(np.argmax(ratio))
        word_ratio[w], word_ratio_pair[w] = ratio[k], k
        # largest output distance; ties broken by larger input distance, then first pair
        top = out.max()
        cand = np.nonzero(out >= top - tie * max(1.0, top))[0]
        k = int(cand[np.argmax(din[cand])])
        word_out[w], word_out_pair[w] = out[k], k
    return _PowerScan(words, din, np.maximum(out_best, 0.0), out_word, word_ratio,
                      word_ratio_pair, word_out, word_out_pair, I, J)


def system_power_oscillation(ifs: IfsSystem, d: PseudometricDescriptor, n: int,
                             domain: Cloud, t_grid, pair_budget: int = 200_000,
                             seed: int = 0, budget: int = WORD_BUDGET) -> OscillationProfile:
    """Empirical oscillation of ``F^n``: max over all length-``n`` words and sampled pairs."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("empty t grid")
    P = domain.points
    scan = _scan_power(ifs, d, n, P, pair_budget, seed, budget)
    values, wit = _profile_from_pairs(
        scan.din, scan.out_best, t_grid,
        lambda k: {"pair": (int(scan.I[k]), int(scan.J[k])),
                   "word": tuple(scan.words[scan.out_word[k]])})
    return OscillationProfile(t_grid, values, "empirical_lower_bound", wit)


# ---------------------------------------------------------------------------
# Classification


@dataclass
class ClassifyConfig:
    """Pinned parameters of :func:`classify`; ``None`` scales come from the box."""

    a_low: Optional[float] = None
    b_high: Optional[float] = None
    depth_max: int = 8
    pair_budget: int = 100_000
    seed: int = 0
    tol: float = 1e-12
    sample_points: int = 400
    plateau_eps: float = 0.25
    matkowski_points: int = 256
    matkowski_depth: int = 400
    word_budget: int = 1 << 12

    def resolved(self, diam: float) -> "ClassifyConfig":
        a = self.a_low if self.a_low is not None else 1e-2 * diam
        b = self.b_high if self.b_high is not None else diam
        if a <= 0:
            raise ValueError("a_low must be positive")
        if b < a:
            raise ValueError("b_high must be at least a_low")
        return ClassifyConfig(**{**asdict(self), "a_low": a, "b_high": b})


@dataclass
class Verdict:
    status: str = "undetermined"
    reason: str = ""
    witness: Optional[dict] = None
    certificate: Optional[dict] = None

    def to_dict(self) -> dict:
        out = {"status": self.status, "reason": self.reason}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out


@dataclass
class MetricVerdicts:
    metric: str
    verdicts: Dict[str, Verdict]
    evidence: dict = field(default_factory=dict)

    def status(self, condition: str) -> str:
        return self.verdicts[condition].status

    def to_dict(self) -> dict:
        return {"metric": self.metric,
                "verdicts": {c: self.verdicts[c].to_dict() for c in CONDITIONS},
                "evidence": self.evidence}


@dataclass
class ContractivityReport:
    domain: DomainBox
    n_maps: int
    metrics: List[MetricVerdicts]
    config: ClassifyConfig
    notes: List[str] = field(default_factory=list)

    def __getitem__(self, i) -> MetricVerdicts:
        return self.metrics[i]

    def status(self, condition: str, metric: int = 0) -> str:
        return self.metrics[metric].status(condition)

    def to_dict(self) -> dict:
        return {
            "domain": {"lo": self.domain.lo.tolist(), "hi": self.domain.hi.tolist()},
            "n_maps": self.n_maps,
            "metrics": [m.to_dict() for m in self.metrics],
            "config": asdict(self.config),
            "notes": list(self.notes),
        }


class _Settled(Exception):
    pass


class ChainConflict(RuntimeError):
    """A condition ended up both verified and refuted."""


def propagate_chain(verdicts: Dict[str, Verdict]) -> Dict[str, Verdict]:
    """Push verifications down and refutations up the implication chain."""
    changed = True
    while changed:
        changed = False
        for src, dsts in IMPLIES.items():
            if verdicts[src].status != "verified":
                continue
            for dst in dsts:
                if verdicts[dst].status == "refuted":
                    raise ChainConflict(f"{src} verified but {dst} refuted")
                if verdicts[dst].status == "undetermined":
                    verdicts[dst] = Verdict("verified", f"implied by {src}")
                    changed = True
        for src, dsts in IMPLIED_BY.items():
            if verdicts[src].status != "refuted":
                continue
            for dst in dsts:
                if verdicts[dst].status == "verified":
                    raise ChainConflict(f"{src} refuted but {dst} verified")
                if verdicts[dst].status == "undetermined":
                    verdicts[dst] = Verdict("refuted", f"{src} refuted")
                    changed = True
    return verdicts


def chain_violations(report: ContractivityReport) -> List[str]:
    """Implication-chain inconsistencies in a finished report (empty when consistent)."""
    problems = []
    for mv in report.metrics:
        for src, dsts in IMPLIES.items():
            for dst in dsts:
                s, t = mv.status(src), mv.status(dst)
                if s == "verified" and t != "verified":
                    problems.append(f"{mv.metric}: {src} verified but {dst} {t}")
                if t == "refuted" and s != "refuted":
                    problems.append(f"{mv.metric}: {dst} refuted but {src} {s}")
    return problems


def domain_sample(box: DomainBox, n_points: int, seed: int) -> Cloud:
    """Grid sample of the box when it is fine enough, else seeded uniform points."""
    per_axis = int(math.floor(n_points ** (1.0 / box.dim) + 1e-9))
    if per_axis >= 3:
        return Cloud(box.grid(per_axis))
    rng = np.random.default_rng(seed)
    return Cloud(rng.uniform(box.lo, box.hi, size=(n_points, box.dim)))


def _pt(P, k):
    return P[k].tolist()


def _ratio_witness(ifs, d, P, I, J, din, certified, lo=0.0, hi=math.inf):
    """Largest ``d(f x, f y) / d(x, y)`` over uncertified maps and pairs in a window."""
    best = None
    window = (din >= lo) & (din <= hi)
    for m, f in enumerate(ifs.maps):
        if certified[m]:
            continue
        img = f.apply(P)
        out = d.paired(img[I], img[J])
        zero = din <= 1e-12
        ratio = np.where(zero, np.where(out > 1e-9, np.inf, 0.0),
                         out / np.where(zero, 1.0, din))
        ratio = np.where(window, ratio, -1.0)
        k = int(np.argmax(ratio))
        if best is None or ratio[k] > best["ratio"]:
            best = {"map": m, "pair": [_pt(P, I[k]), _pt(P, J[k])],
                    "image": [img[I[k]].tolist(), img[J[k]].tolist()],
                    "input_distance": float(din[k]), "output_distance": float(out[k]),
                    "ratio": float(ratio[k])}
    return best


def _on_segment(q, x, y, eps):
    v = y - x
    L2 = float(v @ v)
    if L2 == 0.0:
        return False
    tau = float((q - x) @ v) / L2
    off = np.linalg.norm(q - (x + tau * v))
    return -eps <= tau <= 1 + eps and off <= eps * math.sqrt(L2)


def isometric_segment(ifs, word, d, x, y, eps: float = 1e-9) -> Optional[dict]:
    """Check that ``word`` maps the segment ``[x, y]`` into itself isometrically.

    The check uses the endpoints and three interior points.
    """
    x, y = np.asarray(x, float), np.asarray(y, float)
    taus = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    pts = x + taus[:, None] * (y - x)
    img = pts
    for i in reversed(word):
        img = ifs.maps[i].apply(img)
    scale = max(1.0, float(d.paired(x[None], y[None])[0]))
    if float(d.paired(x[None], y[None])[0]) <= 1e-9:
        return None
    iu, ju = np.triu_indices(len(pts), 1)
    before = d.paired(pts[iu], pts[ju])
    after = d.paired(img[iu], img[ju])
    if np.max(np.abs(before - after)) > eps * scale:
        return None
    if not all(_on_segment(q, x, y, eps) for q in img):
        return None
    return {"word": list(word), "word_label": ifs.word_label(word),
            "segment": [x.tolist(), y.tolist()], "checked_points": len(pts)}


def _eventual_analytic(ifs, d, cfg):
    """Smallest ``n`` with every length-``n`` word an analytic contraction."""
    box = ifs.domain
    for n in range(1, cfg.depth_max + 1):
        words = enumerate_words(ifs, n, cfg.word_budget)
        lips = []
        for w in words:
            lip = analytic_lipschitz(compose_word(ifs, w), d, box)
            if lip is None or not math.isfinite(lip):
                return None
            lips.append(lip)
        worst = max(lips)
        if worst < 1.0 - cfg.tol:
            k = int(np.argmax(lips))
            return {"depth": n, "lambda": worst, "worst_word": list(words[k]),
                    "worst_word_label": ifs.word_label(words[k])}
    return None


def _eventual_refutation(ifs, d, P, cfg):
    """Plateau of ``d omega_{F^n}`` at the largest sampled scale plus an isometric certificate."""
    plateau = []
    scan = None
    for n in range(1, cfg.depth_max + 1):
        scan = _scan_power(ifs, d, n, P, cfg.pair_budget, cfg.seed, cfg.word_budget)
        t_top = float(np.max(scan.din))
        plateau.append(float(np.max(scan.out_best)) / t_top if t_top > 0 else 0.0)
    if not plateau or min(plateau) < cfg.plateau_eps:
        return None, plateau
    # witness: the word/pair with the largest output distance (ties: larger input distance, first word)
    top = float(np.max(scan.word_out))
    cand = [w for w in range(len(scan.words))
            if scan.word_out[w] >= top - 1e-12 * max(1.0, top)]
    w_best = max(cand, key=lambda w: (scan.din[scan.word_out_pair[w]], -w))
    k = scan.word_out_pair[w_best]
    word = scan.words[w_best]
    x, y = P[scan.I[k]], P[scan.J[k]]
    img = P[[scan.I[k], scan.J[k]]]
    for i in reversed(word):
        img = ifs.maps[i].apply(img)
    witness = {"word": list(word), "word_label": ifs.word_label(word), "depth": len(word),
               "pair": [x.tolist(), y.tolist()], "image": img.tolist(),
               "distance": float(scan.word_out[w_best]),
               "input_distance": float(scan.din[k]),
               "ratio": float(scan.word_out[w_best] / scan.din[k]),
               "plateau": plateau}
    order = sorted(range(len(scan.words)), key=lambda w: (-scan.word_out[w], w))
    for w in order[:64]:
        if scan.word_ratio[w] < 1.0 - 1e-9:
            continue
        k = scan.word_ratio_pair[w]
        cert = isometric_segment(ifs, scan.words[w], d, P[scan.I[k]], P[scan.J[k]])
        if cert is not None:
            return (witness, cert), plateau
    return None, plateau


def _classify_metric(ifs: IfsSystem, d: PseudometricDescriptor, cfg: ClassifyConfig,
                     sample: Cloud, notes: list) -> MetricVerdicts:
    box = ifs.domain
    v = {c: Verdict() for c in CONDITIONS}
    ev: dict = {}
    P = sample.points
    I, J = sample_pairs(len(P), cfg.pair_budget, cfg.seed)
    din = d.paired(P[I], P[J])

    lips = [analytic_lipschitz(f, d, box) for f in ifs.maps]
    certs = [analytic_edelstein(f, d, box) for f in ifs.maps]
    certified = [c is True for c in certs]
    ev["lipschitz"] = [None if l is None else l for l in lips]
    ev["edelstein_certificates"] = certs

    # Edelstein
    wit = _ratio_witness(ifs, d, P, I, J, din, certified)
    ev["sup_ratio_uncertified"] = None if wit is None else wit["ratio"]
    if all(certified):
        v["edelstein"] = Verdict("verified", "analytic: every map strictly shrinks distinct pairs",
                                 certificate={"maps": list(range(len(ifs)))})
    elif wit is not None and wit["ratio"] >= RATIO_ONE:
        v["edelstein"] = Verdict("refuted", "sampled pair is not strictly shrunk", witness=wit)

    # Banach
    if all(l is not None for l in lips):
        lam = max(lips)
        if lam < 1.0 - cfg.tol:
            v["banach"] = Verdict("verified", "analytic Lipschitz constants",
                                  certificate={"lambda": lam, "per_map": lips})
    if v["banach"].status == "undetermined" and wit is not None and wit["ratio"] >= RATIO_ONE:
        v["banach"] = Verdict("refuted", "sampled pair with ratio >= 1", witness=wit)

    # Rakotch / Krasnoselskii sampled windows
    rak = _ratio_witness(ifs, d, P, I, J, din, certified, lo=cfg.a_low)
    kra = _ratio_witness(ifs, d, P, I, J, din, certified, lo=cfg.a_low, hi=cfg.b_high)
    ev["sup_ratio_rakotch_window"] = None if rak is None else rak["ratio"]
    ev["sup_ratio_krasnoselskii_window"] = None if kra is None else kra["ratio"]
    if v["edelstein"].status == "verified":
        v["rakotch"] = Verdict(
            "verified", "Edelstein on the compact box implies Rakotch for the restriction",
            certificate={"box": {"lo": box.lo.tolist(), "hi": box.hi.tolist()}})
    elif rak is not None and rak["ratio"] >= RATIO_ONE:
        v["rakotch"] = Verdict("refuted", f"ratio >= 1 at distance >= {cfg.a_low:g}", witness=rak)
    if kra is not None and kra["ratio"] >= RATIO_ONE and v["krasnoselskii"].status == "undetermined" \
            and v["rakotch"].status != "verified":
        v["krasnoselskii"] = Verdict(
            "refuted", f"ratio >= 1 in [{cfg.a_low:g}, {cfg.b_high:g}]", witness=kra)

    # Matkowski from an analytic profile on a dense log grid
    diam = box.diameter
    tg = default_t_grid(diam, cfg.matkowski_points, 1e-6)
    prof = oscillation_analytic(ifs, d, tg, box)
    if prof is not None:
        ev["matkowski_profile_mode"] = prof.mode
        hits = np.nonzero(prof.values >= tg * (1.0 - 1e-12))[0]
        if prof.mode == "analytic_exact" and len(hits):
            t0 = float(tg[hits[-1]])
            v["matkowski"] = Verdict(
                "refuted", "oscillation reaches the identity, so its iterates cannot decay",
                witness={"t": t0, "omega_t": float(prof.values[hits[-1]])})
        elif not len(hits):
            x = float(tg[-1])
            for n in range(1, cfg.matkowski_depth + 1):
                x = prof(x)
                if x <= tg[0]:
                    v["matkowski"] = Verdict(
                        "verified", "iterated oscillation falls below the grid floor",
                        certificate={"iterations": n, "floor": float(tg[0]), "mode": prof.mode})
                    break

    # Eventual; float rounding can fake isometries (x + exp(-x) == x for large x),
    # so the sampled refutation only runs when the chain leaves Eventual open.
    propagate_chain(v)
    try:
        if v["eventual"].status != "undetermined":
            raise _Settled
        cert = _eventual_analytic(ifs, d, cfg)
        if cert is not None:
            v["eventual"] = Verdict("verified", "every word of some length is an analytic contraction",
                                    certificate=cert)
        else:
            found, plateau = _eventual_refutation(ifs, d, P, cfg)
            ev["eventual_plateau"] = plateau
            if found is not None:
                v["eventual"] = Verdict(
                    "refuted", "oscillation of F^n does not decay and a word acts isometrically",
                    witness=found[0], certificate=found[1])
    except _Settled:
        pass
    except WordBudgetExceeded as exc:
        notes.append(f"{d.label()}: eventual check stopped early ({exc}); left undetermined")

    propagate_chain(v)
    return MetricVerdicts(d.label(), v, ev)


def classify(ifs: IfsSystem, dd: Union[Multimetric, Sequence[PseudometricDescriptor]],
             config: Optional[ClassifyConfig] = None) -> ContractivityReport:
    """Tri-state verdicts for the six contraction conditions, per pseudometric.

    Verdicts are relative to the system's domain box.
    """
    cfg = (config or ClassifyConfig()).resolved(ifs.domain.diameter)
    members = dd.members if isinstance(dd, Multimetric) else tuple(dd)
    notes = [f"verdicts are relative to the box lo={ifs.domain.lo.tolist()} "
             f"hi={ifs.domain.hi.tolist()}"]
    if not ifs.self_mapping_declared:
        notes.append("the maps are not declared to keep the box; verdicts describe their "
                     "restriction to it and imply nothing about an attractor")
    sample = domain_sample(ifs.domain, cfg.sample_points, cfg.seed)
    reports = [_classify_metric(ifs, d, cfg, sample, notes) for d in members]
    return ContractivityReport(ifs.domain, len(ifs), reports, cfg, notes)
