"""Acceptance checks shared by ``hutchfrac verify`` and the test suite.

Every check returns a :class:`CheckResult`; none of them raise on failure.
"""

from __future__ import annotations

import re
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List

import numpy as np

from . import corpus
from .errors import RemetrizationError
from .hutchinson import (
    SymbolStream, attractor_deterministic, chaos_game, coding_map, invariance_residual,
)
from .metrics import Cloud, Coordinate, Euclidean, check_axioms, directed_max, hausdorff
from .oscillation import CONDITIONS, chain_violations, classify, domain_sample
from .remetrize import (
    BanachPowerMetric, build_banach_power, build_remetrized, hull_samples,
    verify_banach_under, verify_edelstein_under, verify_krasnoselskii_under,
)
from .spaces import eval_word, fixed_point


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.key} {self.title}: {self.detail}"


def _timed(key: str, title: str, fn: Callable[[], tuple]) -> CheckResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    return CheckResult(key, title, bool(passed), detail, time.perf_counter() - t0)


def stop_metric_for(entry):
    members = entry.multimetric.members
    return members[0] if len(members) == 1 else directed_max(members)


# ---------------------------------------------------------------------------
# Criteria


def _c1():
    msgs, ok = [], True
    cantor = corpus.load_example("cantor").system
    t0 = time.perf_counter()
    tr = attractor_deterministic(cantor, Cloud.of(0.0, 1.0), Euclidean(), tol=1e-12,
                                 max_iter=21, dedup_tol=0.0)
    dt = time.perf_counter() - t0
    r = tr.residuals
    worst = max(r[n] / (3.0 ** -n * r[0]) for n in range(min(21, len(r))))
    ok &= len(r) >= 21 and worst <= 1.01 and dt < 30
    msgs.append(f"cantor {len(r)} residuals, max r_n/(3^-n r_0)={worst:.6f}, {dt:.1f}s")
    sier = corpus.load_example("sierpinski").system
    t0 = time.perf_counter()
    tr = attractor_deterministic(sier, "fixed_points", Euclidean(), tol=1e-3, max_iter=30)
    dt = time.perf_counter() - t0
    r = tr.residuals
    worst = max(r[n] / (0.5 ** n * r[0]) for n in range(len(r)))
    ok &= tr.converged and worst <= 1.01 and dt < 30
    msgs.append(f"sierpinski {len(r)} residuals, max r_n/(2^-n r_0)={worst:.6f}, {dt:.1f}s")
    return ok, "; ".join(msgs)


INVARIANCE_RUNS = {
    "sierpinski": dict(seed="fixed_points", tol=1e-3, max_iter=30),
    "cantor": dict(seed=[[0.0], [1.0]], tol=1e-6, max_iter=40, dedup_tol=1e-12),
    "product_halving_k8": dict(seed="corners", tol=1e-6, max_iter=60),
    "plane_two_coords": dict(seed="corners", tol=2e-3, max_iter=30),
}


def _c2():
    msgs, ok = [], True
    for name in corpus.BANACH_ENTRIES:
        entry = corpus.load_example(name)
        run = dict(INVARIANCE_RUNS[name])
        seed = run.pop("seed")
        tr = attractor_deterministic(entry.system, seed, stop_metric_for(entry), **run)
        res = max(invariance_residual(entry.system, tr.final_cloud, d)
                  for d in entry.multimetric.members)
        good = tr.converged and res <= 2 * tr.tol
        ok &= good
        msgs.append(f"{name} d_H(F(A),A)={res:.3g} (2tol={2 * tr.tol:g})")
    return ok, "; ".join(msgs)


def _c3():
    entry = corpus.load_example("fg_interval")
    rep = classify(entry.system, entry.multimetric, entry.config)
    v = rep.metrics[0].verdicts["eventual"]
    w = v.witness or {}
    ok = (v.status == "refuted"
          and re.fullmatch(r"(fg)+", w.get("word_label", "")) is not None
          and w.get("pair") == [[0.0], [2.0]] and w.get("image") == [[0.0], [1.0]]
          and w.get("distance") == 1.0)
    msgs = [f"pair: eventual={v.status} word={w.get('word_label')} "
            f"{w.get('pair')}->{w.get('image')} distance={w.get('distance')}"]
    for idx in ((0,), (1,)):
        sub = classify(entry.system.subsystem(idx), entry.multimetric, entry.config)
        sv = sub.metrics[0].verdicts["eventual"]
        cert = sv.certificate or {}
        good = sv.status == "verified" and cert.get("depth") == 2 and cert.get("lambda") == 0.0
        ok &= good
        msgs.append(f"{entry.system.letter(idx[0])}: eventual={sv.status} "
                    f"depth={cert.get('depth')} lambda={cert.get('lambda')}")
    return ok, "; ".join(msgs)


def _c4():
    msgs, ok = [], True
    for B in (10, 20, 40):
        entry = corpus.load_example("edelstein_exp", box=B)
        rep = classify(entry.system, entry.multimetric, entry.config)
        st = rep.status("edelstein")
        ok &= st == "verified"
        msgs.append(f"[0,{B}] edelstein={st}")
    x1k = corpus.edelstein_orbit(1000)
    x1m = corpus.edelstein_orbit(10 ** 6)
    ok &= 6.5 <= x1k <= 7.5 and x1m > 13
    msgs.append(f"f^1000(0)={x1k:.4f} f^1e6(0)={x1m:.4f}")
    return ok, "; ".join(msgs)


def _c5():
    t0 = time.perf_counter()
    entry = corpus.load_example("sierpinski")
    K = Cloud(np.array(entry.options["remetrize"]["invariant_cloud"], float))
    rm = build_remetrized(entry.system, Euclidean(), K=K, eps=1e-3)
    rng = np.random.default_rng(0)
    X, Y = hull_samples(K, 500, rng), hull_samples(K, 500, rng)
    base = Euclidean().paired(X, Y)
    rh = rm.paired(X, Y)
    diam = rm.hull_diameter()
    bounds = bool(np.all(base <= rh + 1e-12) and np.all(rh <= 2 * diam + 1e-3))
    ed = verify_edelstein_under(rm, pair_samples=500, seed=0)
    kr = verify_krasnoselskii_under(rm, a_low=0.01, b_high=3.0, pair_samples=500, seed=0)
    dt = time.perf_counter() - t0
    ok = rm.depth == 12 and bounds and ed.ok and kr.sup_ratio < 1.0 and dt < 120
    return ok, (f"N={rm.depth} tail={rm.tail_bound:.3g} bounds={'ok' if bounds else 'broken'} "
                f"edelstein_violations={len(ed.violations)} sup_ratio={kr.sup_ratio:.6f} {dt:.1f}s")


def _c6():
    entry = corpus.load_example("swap_halve")
    bp = build_banach_power(entry.system, entry.multimetric.members[0], m=2, a=1.2)
    good = verify_banach_under(bp, pair_samples=500, seed=0)
    ok = bp.lam == 0.5 and good.ok and good.max_ratio <= 1 / 1.2 + 1e-6
    try:
        build_banach_power(entry.system, entry.multimetric.members[0], m=2, a=1.5)
        refused = False
    except RemetrizationError:
        refused = True
    bad = BanachPowerMetric(entry.multimetric.members[0], entry.system, 2, 0.5, 1.5, 40)
    neg = verify_banach_under(bad, pair_samples=500, seed=0)
    ok &= refused and len(neg.violations) >= 1
    return ok, (f"a=1.2: depth={bp.depth} max_ratio={good.max_ratio:.9f} "
                f"(bound {1 / 1.2:.9f}); a=1.5: build refused={refused}, "
                f"violations={len(neg.violations)}")


def _c7():
    h = 0.01
    square, diag = corpus.plane_fixture(h)
    d1 = hausdorff(Coordinate(0), square, diag)
    d2 = hausdorff(Coordinate(1), square, diag)
    de = hausdorff(Euclidean(), square, diag)
    ok = d1 <= h and d2 <= h and 0.70 <= de <= 0.7072
    return ok, f"d1_H={d1:.3g} d2_H={d2:.3g} euclidean_H={de:.6f}"


def corpus_reports():
    """``(label, entry, metric_index_expected, report)`` for every corpus check."""
    out = []
    for name in corpus.names():
        boxes = (10, 20, 40) if name == "edelstein_exp" else (None,)
        for B in boxes:
            entry = corpus.load_example(name, box=B) if B else corpus.load_example(name)
            label = f"{name}[0,{B}]" if B else name
            rep = classify(entry.system, entry.multimetric, entry.config)
            out.append((label, entry.expected, rep))
            for idx, exp in entry.expected_subsystems.items():
                sub = classify(entry.system.subsystem(idx), entry.multimetric, entry.config)
                out.append((f"{label}{list(idx)}", exp, sub))
    return out


def _c8():
    problems, count = [], 0
    for label, expected, rep in corpus_reports():
        count += 1
        problems += [f"{label}: {p}" for p in chain_violations(rep)]
        got = [{c: m.status(c) for c in CONDITIONS} for m in rep.metrics]
        if got != expected:
            problems.append(f"{label}: verdicts differ from the expected ones")
    return not problems, (f"{count} reports consistent" if not problems else "; ".join(problems))


def _c9(n_streams: int = 64, seed: int = 0):
    cantor = corpus.load_example("cantor").system
    rng = np.random.default_rng(seed)
    tol = 3.0 ** -38
    worst, misses = 0.0, 0
    for _ in range(n_streams):
        pre = tuple(rng.integers(0, 2, size=int(rng.integers(0, 6))))
        per = tuple(rng.integers(0, 2, size=int(rng.integers(1, 5))))
        s = SymbolStream(pre, per)
        got = coding_map(cantor, s, [0.0], tol=tol, depth_cap=400).point
        ref = eval_word(cantor, s.prefix(40), [0.0])
        err = float(np.max(np.abs(got - ref)))
        worst = max(worst, err)
        misses += err > tol
    fixed_err = 0.0
    for i, f in enumerate(cantor.maps):
        got = coding_map(cantor, SymbolStream((), (i,)), [0.5], tol=1e-15).point
        fixed_err = max(fixed_err, float(np.max(np.abs(got - fixed_point(f, [0.5])))))
    ok = misses == 0 and fixed_err <= 1e-12
    return ok, (f"{n_streams - misses}/{n_streams} streams within 3^-38 "
                f"(max error {worst:.3g}); constant streams max error {fixed_err:.3g}")


def _c10():
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        outs = []
        for k in range(2):
            csv, ppm = Path(tmp, f"a{k}.csv"), Path(tmp, f"a{k}.ppm")
            ccsv, cppm = Path(tmp, f"c{k}.csv"), Path(tmp, f"c{k}.ppm")
            code_a = main(["--seed", "7", "attractor", "corpus:sierpinski", "--out-csv", str(csv),
                           "--render-ppm", str(ppm), "--width", "256", "--height", "256"],
                          quiet=True)
            code_c = main(["--seed", "7", "chaos", "corpus:sierpinski", "--iterations", "20000",
                           "--burn-in", "100", "--out-csv", str(ccsv), "--render-ppm", str(cppm)],
                          quiet=True)
            outs.append((code_a, code_c, csv.read_bytes(), ppm.read_bytes(),
                         ccsv.read_bytes(), cppm.read_bytes()))
    same = outs[0] == outs[1]
    sier = corpus.load_example("sierpinski").system
    c1 = chaos_game(sier, [0.25, 0.25], 5000, 50, seed=3).points
    c2 = chaos_game(sier, [0.25, 0.25], 5000, 50, seed=3).points
    lib_same = c1.tobytes() == c2.tobytes()
    ok = same and lib_same and outs[0][0] == 0 and outs[0][1] == 0
    return ok, (f"cli outputs identical={same} (exit codes {outs[0][0]},{outs[0][1]}); "
                f"library chaos game identical={lib_same}")


CRITERIA: Dict[str, tuple] = {
    "C1": ("Banach attractor convergence rates", _c1),
    "C2": ("attractor invariance", _c2),
    "C3": ("fg counterexample: system vs members", _c3),
    "C4": ("Edelstein without attractor", _c4),
    "C5": ("remetrization contract", _c5),
    "C6": ("Banach-power contract", _c6),
    "C7": ("Hausdorff non-admissibility fixture", _c7),
    "C8": ("implication-chain consistency", _c8),
    "C9": ("coding map vs word oracle", _c9),
    "C10": ("determinism", _c10),
}


def run_criterion(key: str) -> CheckResult:
    title, fn = CRITERIA[key]
    try:
        return _timed(key, title, fn)
    except Exception as exc:  # a crash is a failed check, reported with its cause
        return CheckResult(key, title, False, f"error: {exc!r}")


def run_criteria(keys=None) -> List[CheckResult]:
    return [run_criterion(k) for k in (keys or CRITERIA)]


# ---------------------------------------------------------------------------
# Property suites


def axioms_suite() -> List[CheckResult]:
    """Pseudometric axioms for every corpus pseudometric and the remetrized ones."""
    results = []
    for name in corpus.names():
        entry = corpus.load_example(name)
        sample = domain_sample(entry.system.domain, 60, seed=0)
        for d in entry.multimetric.members:
            rep = check_axioms(d, sample, seed=0)
            results.append(CheckResult(f"axioms:{name}:{d.label()}", "pseudometric axioms",
                                       rep.ok, str(rep.counts())))
    sier = corpus.load_example("sierpinski")
    K = Cloud(np.array(sier.options["remetrize"]["invariant_cloud"], float))
    rm = build_remetrized(sier.system, Euclidean(), K=K, eps=1e-3)
    sample = Cloud(hull_samples(K, 40, np.random.default_rng(0)))
    rep = check_axioms(rm.descriptor(), sample, seed=0, tol=max(1e-9, 2 * rm.tail_bound))
    results.append(CheckResult("axioms:sierpinski:remetrized", "pseudometric axioms up to tail",
                               rep.ok, str(rep.counts())))
    sw = corpus.load_example("swap_halve")
    bp = build_banach_power(sw.system, sw.multimetric.members[0], m=2, a=1.2)
    sample = domain_sample(sw.system.domain, 40, seed=0)
    rep = check_axioms(bp.descriptor(), sample, seed=0)
    results.append(CheckResult("axioms:swap_halve:banach_power", "pseudometric axioms",
                               rep.ok, str(rep.counts())))
    return results


def chain_suite() -> List[CheckResult]:
    results = []
    for label, _, rep in corpus_reports():
        problems = chain_violations(rep)
        results.append(CheckResult(f"chain:{label}", "implication chain", not problems,
                                   "consistent" if not problems else "; ".join(problems)))
    return results


SUITES = {
    "axioms": axioms_suite,
    "chain": chain_suite,
    "paper-examples": lambda: run_criteria(),
}


def run_suite(name: str) -> List[CheckResult]:
    if name == "all":
        return [r for key in SUITES for r in SUITES[key]()]
    return SUITES[name]()
