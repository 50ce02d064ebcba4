"""Property-based checks of the metric, oscillation and remetrization invariants."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hutchfrac import corpus
from hutchfrac.metrics import (
    Cloud, Coordinate, Euclidean, MaxOf, SupNorm, WeightedMax, check_axioms, directed_max,
    hausdorff, hausdorff_bruteforce, pd_eval,
)
from hutchfrac.oscillation import (
    CONDITIONS, VERDICTS, ChainConflict, ContractivityReport, MetricVerdicts, Verdict,
    chain_violations, oscillation_analytic, oscillation_empirical, propagate_chain,
)
from hutchfrac.remetrize import build_remetrized
from hutchfrac.spaces import Affine, DomainBox, IfsSystem, analytic_lipschitz

coord = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


def clouds(dim=2, max_size=25):
    return arrays(np.float64, st.tuples(st.integers(1, max_size), st.just(dim)), elements=coord)


base_metrics = st.sampled_from([
    Euclidean(), SupNorm(), Coordinate(0), Coordinate(1),
    WeightedMax(((0, 0.5), (1, 2.0))), MaxOf((Coordinate(0), Euclidean())),
])


@settings(max_examples=60, deadline=None)
@given(base_metrics, clouds(), clouds(), clouds())
def test_hausdorff_lift_is_a_pseudometric(d, A, B, C):
    ab, ba = hausdorff(d, A, B), hausdorff(d, B, A)
    assert ab == pytest.approx(ba, abs=1e-12)
    assert hausdorff(d, A, A) == 0
    assert ab <= hausdorff(d, A, C) + hausdorff(d, C, B) + 1e-9
    assert ab == pytest.approx(hausdorff_bruteforce(d, A, B), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.lists(base_metrics, min_size=1, max_size=4), clouds(max_size=8))
def test_directed_max_dominates_members(family, P):
    dm = directed_max(family)
    for x in P:
        for y in P[:3]:
            v = pd_eval(dm, x, y)
            assert all(v >= pd_eval(d, x, y) - 1e-12 for d in family)
    assert check_axioms(dm, P).ok


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (2, 2), elements=st.floats(-1, 1)),
       arrays(np.float64, 2, elements=st.floats(-1, 1)),
       clouds(max_size=15), st.sampled_from([Euclidean(), SupNorm()]))
def test_affine_ratios_respect_analytic_constant(M, b, P, d):
    f = Affine(M, b)
    L = analytic_lipschitz(f, d)
    img = f.apply(P)
    for i in range(len(P)):
        for j in range(i):
            assert pd_eval(d, img[i], img[j]) <= L * pd_eval(d, P[i], P[j]) + 1e-9


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (2, 2), elements=st.floats(-0.7, 0.7)),
       st.integers(0, 2 ** 16))
def test_empirical_profile_below_analytic(M, seed):
    box = DomainBox([0, 0], [1, 1])
    sys_ = IfsSystem((Affine(M, [0, 0]),), box, self_mapping_declared=False)
    t = np.linspace(0.05, 1.5, 12)
    ana = oscillation_analytic(sys_.maps[0], Euclidean(), t, box)
    pts = Cloud(np.random.default_rng(seed).random((120, 2)))
    emp = oscillation_empirical(sys_, Euclidean(), pts, t, seed=seed)
    assert np.all(emp.values <= ana.values + 1e-9)


@settings(max_examples=10, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 1000), st.integers(500, 4000))
def test_pair_budget_monotone(seed, budget):
    fg = corpus.load_example("fg_interval").system
    pts = Cloud(np.random.default_rng(seed).uniform(0, 2, size=(600, 1)))
    t = np.linspace(0.05, 2.0, 16)
    small = oscillation_empirical(fg, Euclidean(), pts, t, pair_budget=budget, seed=seed)
    big = oscillation_empirical(fg, Euclidean(), pts, t, pair_budget=2 * budget, seed=seed)
    assert np.all(big.values >= small.values)


@settings(max_examples=200, deadline=None)
@given(st.fixed_dictionaries({c: st.sampled_from(VERDICTS) for c in CONDITIONS}))
def test_propagation_yields_consistent_reports(statuses):
    verdicts = {c: Verdict(s, "given") for c, s in statuses.items()}
    try:
        out = propagate_chain(dict(verdicts))
    except ChainConflict:
        return
    for c, s in statuses.items():
        if s != "undetermined":
            assert out[c].status == s
    rep = ContractivityReport(DomainBox([0], [1]), 1, [MetricVerdicts("m", out)], None)
    assert chain_violations(rep) == []


@pytest.fixture(scope="module")
def sier_rm():
    e = corpus.load_example("sierpinski")
    K = Cloud(np.array(e.options["remetrize"]["invariant_cloud"], float))
    return build_remetrized(e.system, Euclidean(), K=K, eps=1e-2)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (2, 2), elements=st.floats(0, 1)))
def test_rhat_monotone_in_depth(sier_rm, XY):
    x, y = XY[:1], XY[1:]
    vals = [sier_rm.truncated(k).paired(x, y)[0] for k in range(sier_rm.depth + 1)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
    assert vals[0] == pytest.approx(pd_eval(Euclidean(), x[0], y[0]))
    assert vals[-1] <= 2 * sier_rm.hull_diameter() + sier_rm.tail_bound
