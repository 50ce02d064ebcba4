"""Reference systems with pinned settings, expected verdicts and independent oracles.

The oracles deliberately avoid the library's own machinery: they use plain
Python floats, explicit loops or small numpy computations, so that the
numbers they produce can serve as ground truth for the library.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .io import RunConfig
from .metrics import Cloud, Coordinate, Euclidean, Multimetric, SupNorm
from .oscillation import CONDITIONS, ClassifyConfig
from .spaces import Affine, Builtin, Clamp1D, DomainBox, IfsSystem

ALL_VERIFIED = dict.fromkeys(CONDITIONS, "verified")
ALL_REFUTED = dict.fromkeys(CONDITIONS, "refuted")


@dataclass
class CorpusEntry:
    name: str
    system: IfsSystem
    multimetric: Multimetric
    expected: List[Dict[str, str]]
    notes: str
    config: ClassifyConfig = field(default_factory=ClassifyConfig)
    expected_subsystems: Dict[Tuple[int, ...], List[Dict[str, str]]] = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def run_config(self) -> RunConfig:
        return RunConfig(self.name, self.system, self.multimetric, self.options)


def _sierpinski(**_):
    verts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
    maps = tuple(Affine(0.5 * np.eye(2), 0.5 * np.array(v)) for v in verts)
    ifs = IfsSystem(maps, DomainBox([0.0, 0.0], [1.0, 1.0]))
    return CorpusEntry(
        "sierpinski", ifs, Multimetric((Euclidean(),)), [ALL_VERIFIED],
        "Three half-scale maps toward the vertices of a right triangle; Banach with ratio 1/2.",
        options={
            "attractor": {"seed": "fixed_points", "tol": 1e-5, "max_iter": 40,
                          "snap": 2.0 ** -9},
            "remetrize": {"eps": 1e-3, "invariant_cloud": [list(v) for v in verts], "base": 0},
        })


def _cantor(**_):
    maps = (Affine([[1 / 3]], [0.0]), Affine([[1 / 3]], [2 / 3]))
    ifs = IfsSystem(maps, DomainBox([0.0], [1.0]))
    return CorpusEntry(
        "cantor", ifs, Multimetric((Euclidean(),)), [ALL_VERIFIED],
        "Middle-thirds Cantor system; Banach with ratio 1/3.",
        options={
            "attractor": {"seed": [[0.0], [1.0]], "tol": 1e-6, "max_iter": 40,
                          "dedup_tol": 1e-12},
            "remetrize": {"eps": 1e-3, "invariant_cloud": [[0.0], [1.0]], "base": 0},
        })


def _fg_interval(**_):
    f = Clamp1D(1.0, -1.0, 0.0, math.inf)     # max{0, x - 1}
    g = Clamp1D(1.0, 1.0, -math.inf, 2.0)     # min{2, x + 1}
    ifs = IfsSystem((f, g), DomainBox([0.0], [2.0]), letters=("f", "g"))
    singleton = dict(ALL_REFUTED, eventual="verified")
    return CorpusEntry(
        "fg_interval", ifs, Multimetric((Euclidean(),)), [ALL_REFUTED],
        "f(x)=max{0,x-1}, g(x)=min{2,x+1} on [0,2]. Each map collapses the box after two "
        "steps, while every power of f o g fixes [0,1] pointwise; the pair never contracts.",
        expected_subsystems={(0,): [singleton], (1,): [singleton]},
        options={
            "attractor": {"seed": "grid:201", "tol": 1e-6, "max_iter": 40},
            "remetrize": {"eps": 0.1, "invariant_cloud": [[0.0], [0.5], [1.0], [1.5], [2.0]],
                          "base": 0, "depth_cap": 12},
            "subsystems": [[0], [1]],
        })


def _edelstein_exp(box: float = 10.0, **_):
    B = float(box)
    ifs = IfsSystem((Builtin("edelstein_exp"),), DomainBox([0.0], [B]),
                    self_mapping_declared=False)
    expected = dict(ALL_VERIFIED)
    if -math.expm1(-B) >= 1.0 - ClassifyConfig().tol:
        # The Lipschitz bound 1 - e^{-B} is within tol of 1: no Banach certificate.
        expected["banach"] = "undetermined"
    return CorpusEntry(
        "edelstein_exp", ifs, Multimetric((Euclidean(),)), [expected],
        f"f(x)=x+exp(-x). Strictly shrinking on [0, inf) but without a fixed point or "
        f"attractor there. Verdicts are for the box [0, {B:g}], which f does not map into "
        f"itself; orbits leave every fixed box, see the orbit oracle.",
        options={"attractor": {"seed": [[0.0]], "tol": 1e-6, "max_iter": int(B)}},
        params={"box": B})


def _product_halving_k8(**_):
    k = 8
    ifs = IfsSystem((Builtin("halving", dim=k),), DomainBox([-1.0] * k, [1.0] * k))
    mm = Multimetric(tuple(Coordinate(i) for i in range(k)))
    return CorpusEntry(
        "product_halving_k8", ifs, mm, [ALL_VERIFIED] * k,
        "Halving on R^omega truncated to 8 coordinates with the coordinate pseudometrics; "
        "Banach with ratio 1/2 for each member. The statement that no continuous metric "
        "makes the full infinite product eventually contracting is about the infinite "
        "product and cannot be tested on this truncation.",
        options={"attractor": {"seed": "corners", "tol": 1e-6, "max_iter": 40}})


def _plane_two_coords(**_):
    corners = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
    maps = tuple(Affine(0.5 * np.eye(2), 0.5 * np.array(v)) for v in corners)
    ifs = IfsSystem(maps, DomainBox([0.0, 0.0], [1.0, 1.0]))
    mm = Multimetric((Coordinate(0), Coordinate(1)))
    return CorpusEntry(
        "plane_two_coords", ifs, mm, [ALL_VERIFIED, ALL_VERIFIED],
        "The plane with d1=|x-x'| and d2=|y-y'|. The four corner maps have the square as "
        "attractor; the subsystem of maps 0 and 3 has the diagonal. The Hausdorff lifts of "
        "d1 and d2 do not tell the square from the diagonal.",
        expected_subsystems={(0, 3): [ALL_VERIFIED, ALL_VERIFIED]},
        options={"attractor": {"seed": "corners", "tol": 1e-3, "max_iter": 20,
                               "snap": 2.0 ** -8},
                 "subsystems": [[0, 3]]})


def _swap_halve(**_):
    g = Affine([[0.0, 1.0], [0.5, 0.0]], [0.0, 0.0])   # (x, y) -> (y, x/2)
    ifs = IfsSystem((g,), DomainBox([0.0, 0.0], [1.0, 1.0]))
    expected = dict(ALL_REFUTED, eventual="verified")
    return CorpusEntry(
        "swap_halve", ifs, Multimetric((SupNorm(),)), [expected],
        "g(x,y)=(y,x/2) under the sup metric: g itself is only non-expanding but g^2 is "
        "halving, so the system is eventually (not Banach) contracting.",
        options={
            "attractor": {"seed": "corners", "tol": 1e-6, "max_iter": 60},
            "remetrize": {"eps": 1e-3, "base": 0, "m": 2, "a": 1.2},
        })


REGISTRY: Dict[str, Callable[..., CorpusEntry]] = {
    "sierpinski": _sierpinski,
    "cantor": _cantor,
    "fg_interval": _fg_interval,
    "edelstein_exp": _edelstein_exp,
    "product_halving_k8": _product_halving_k8,
    "plane_two_coords": _plane_two_coords,
    "swap_halve": _swap_halve,
}

BANACH_ENTRIES = ("sierpinski", "cantor", "product_halving_k8", "plane_two_coords")


def names() -> List[str]:
    return list(REGISTRY)


def load_example(name: str, **params) -> CorpusEntry:
    """A registered entry; ``edelstein_exp`` accepts ``box=B`` for the box ``[0, B]``."""
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown corpus entry {name!r}; known: {', '.join(REGISTRY)}") from None
    return factory(**params)


def plane_fixture(h: float = 0.01) -> Tuple[Cloud, Cloud]:
    """``(square grid, diagonal sample)`` with spacing ``h``."""
    t = np.linspace(0.0, 1.0, int(round(1.0 / h)) + 1)
    xx, yy = np.meshgrid(t, t, indexing="ij")
    square = np.stack([xx.ravel(), yy.ravel()], axis=1)
    return Cloud(square), Cloud(np.stack([t, t], axis=1))


# ---------------------------------------------------------------------------
# Oracles


def edelstein_orbit(n: int, x0: float = 0.0) -> float:
    """``x_{k+1} = x_k + exp(-x_k)`` iterated ``n`` times in plain floats."""
    x = x0
    for _ in range(n):
        x = x + math.exp(-x)
    return x


def _fg_word_oracle(h: float = 0.005, n_pairs_word: int = 3) -> float:
    f = lambda x: max(0.0, x - 1.0)   # noqa: E731
    g = lambda x: min(2.0, x + 1.0)   # noqa: E731
    grid = [i * h for i in range(int(round(2.0 / h)) + 1)]

    def word(x):
        for _ in range(n_pairs_word):
            x = f(g(x))
        return x

    imgs = [word(x) for x in grid]
    return max(imgs) - min(imgs)      # all pairs have d(x, y) <= 2 = t


def _fg_single_letter_oracle(h: float = 0.01) -> float:
    grid = np.arange(int(round(2.0 / h)) + 1) * h
    best = 0.0
    for fn in (lambda x: np.maximum(0.0, x - 1.0), lambda x: np.minimum(2.0, x + 1.0)):
        img = fn(grid)
        best = max(best, float(img.max() - img.min()))
    return best


def _cantor_residual_oracle(n_steps: int = 12) -> List[float]:
    """Successive 1-D Hausdorff residuals of the endpoint sets, via sorting."""
    K = np.array([0.0, 1.0])
    ratios, prev_r = [], None
    for _ in range(n_steps):
        nxt = np.unique(np.concatenate([K / 3.0, K / 3.0 + 2.0 / 3.0]))

        def directed(A, B):
            idx = np.clip(np.searchsorted(B, A), 1, len(B) - 1)
            return float(np.max(np.minimum(np.abs(A - B[idx - 1]), np.abs(A - B[idx]))))

        r = max(directed(K, nxt), directed(nxt, K))
        if prev_r is not None:
            ratios.append(r / prev_r)
        prev_r, K = r, nxt
    return ratios


def _word_lipschitz_oracle(mats: List[np.ndarray], n: int, norm) -> float:
    best = 0.0
    for w in itertools.product(range(len(mats)), repeat=n):
        M = np.eye(mats[0].shape[0])
        for i in w:
            M = M @ mats[i]
        best = max(best, norm(M))
    return best


def run_oracles(entry: CorpusEntry) -> dict:
    """Reference numbers for ``entry`` together with the grid parameters used."""
    name = entry.name
    if name == "fg_interval":
        return {
            "word_fg3_sup_distance": _fg_word_oracle(0.005, 3),
            "word_grid_step": 0.005,
            "single_letter_oscillation_t2": _fg_single_letter_oracle(0.01),
            "single_letter_grid_step": 0.01,
            "f_squared_range": [max(0.0, max(0.0, x - 1.0) - 1.0) for x in (0.0, 1.0, 2.0)],
        }
    if name == "edelstein_exp":
        return {"orbit_1000": edelstein_orbit(1000), "orbit_1e6": edelstein_orbit(10 ** 6),
                "start": 0.0, "box": entry.params.get("box")}
    if name == "cantor":
        return {"residual_ratios": _cantor_residual_oracle(12), "steps": 12, "seed": [0.0, 1.0]}
    if name == "sierpinski":
        mats = [0.5 * np.eye(2)] * 3
        return {"word_lipschitz_depth4": _word_lipschitz_oracle(mats, 4,
                                                                lambda M: np.linalg.norm(M, 2)),
                "remetrize_depth_eps1e-3": next(n for n in range(64)
                                                if 2.0 * 2.0 ** -n * math.sqrt(2) < 1e-3)}
    if name == "swap_halve":
        G = np.array([[0.0, 1.0], [0.5, 0.0]])
        inf_norm = lambda M: float(np.abs(M).sum(axis=1).max())   # noqa: E731
        lam2 = inf_norm(G @ G)
        return {"lambda_m2": lam2, "lambda_m1": inf_norm(G), "a": 1.2,
                "a_m_lambda": 1.2 ** 2 * lam2, "a_bad": 1.5, "a_bad_m_lambda": 1.5 ** 2 * lam2}
    if name == "plane_two_coords":
        sq, diag = plane_fixture(0.01)
        S, D = sq.points, diag.points

        def dh(dist):
            return max(dist(S[:, None, :], D[None, :, :]).min(axis=1).max(),
                       dist(S[:, None, :], D[None, :, :]).min(axis=0).max())

        return {"h": 0.01,
                "d1_hausdorff": float(dh(lambda a, b: np.abs(a[..., 0] - b[..., 0]))),
                "d2_hausdorff": float(dh(lambda a, b: np.abs(a[..., 1] - b[..., 1]))),
                "euclidean_hausdorff": float(dh(lambda a, b: np.sqrt(((a - b) ** 2).sum(-1)))),
                "analytic_euclidean": math.sqrt(2) / 2}
    if name == "product_halving_k8":
        return {"per_coordinate_lambda": [0.5] * 8}
    return {}
